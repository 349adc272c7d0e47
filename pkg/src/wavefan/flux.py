"""Flux functions for scalar conservation laws u_t + f(u)_x = 0.

Two kinds are supported: the quadratic flux f(u) = u^2/2 (token ``burgers``)
and polynomials with ascending coefficients (token ``poly:c0,c1,...,cn``).
Both are twice differentiable, which is all the profile solver needs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

BURGERS = "burgers"
POLYNOMIAL = "polynomial"

@dataclass(frozen=True)
class FluxSpec:
    """Immutable flux description.

    kind: "burgers" or "polynomial".
    coefficients: ascending polynomial coefficients (empty for burgers).
    """

    kind: str
    coefficients: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind == BURGERS:
            if self.coefficients:
                raise InvalidParameterError("burgers flux takes no coefficients")
        elif self.kind == POLYNOMIAL:
            coeffs = tuple(float(c) for c in self.coefficients)
            object.__setattr__(self, "coefficients", coeffs)
            if len(coeffs) < 2 or all(c == 0.0 for c in coeffs[1:]):
                raise InvalidParameterError(
                    "polynomial flux must have degree >= 1 (got %r)" % (coeffs,)
                )
            if not all(np.isfinite(coeffs)):
                raise InvalidParameterError("polynomial coefficients must be finite")
        else:
            raise InvalidParameterError("unknown flux kind %r" % (self.kind,))


def burgers_flux() -> FluxSpec:
    return FluxSpec(BURGERS)


def polynomial_flux(coefficients) -> FluxSpec:
    return FluxSpec(POLYNOMIAL, tuple(float(c) for c in coefficients))


def parse_flux_token(token: str) -> FluxSpec:
    """Parse a flux token: ``burgers`` or ``poly:c0,c1,...,cn``."""
    token = token.strip()
    if token == BURGERS:
        return burgers_flux()
    if token.startswith("poly:"):
        body = token[len("poly:"):]
        try:
            coeffs = tuple(float(part) for part in body.split(","))
        except ValueError:
            raise InvalidParameterError("malformed flux token %r" % (token,)) from None
        return polynomial_flux(coeffs)
    raise InvalidParameterError("malformed flux token %r" % (token,))


def format_flux_token(flux: FluxSpec) -> str:
    if flux.kind == BURGERS:
        return BURGERS
    return "poly:" + ",".join(repr(c) for c in flux.coefficients)


def evaluate(flux: FluxSpec, u):
    """f(u); accepts scalars or arrays."""
    if flux.kind == BURGERS:
        return np.multiply(u, u) * 0.5
    return np.polynomial.polynomial.polyval(u, flux.coefficients)


def derivative(flux: FluxSpec, u):
    """f'(u); accepts scalars or arrays."""
    if flux.kind == BURGERS:
        return np.asarray(u) + 0.0 if np.ndim(u) else float(u)
    c = np.polynomial.polynomial.polyder(flux.coefficients)
    return np.polynomial.polynomial.polyval(u, c)


def second_derivative(flux: FluxSpec, u):
    """f''(u); accepts scalars or arrays."""
    if flux.kind == BURGERS:
        return np.ones_like(np.asarray(u, dtype=float)) if np.ndim(u) else 1.0
    c = np.polynomial.polynomial.polyder(flux.coefficients, 2)
    return np.polynomial.polynomial.polyval(u, c)


def _interior_critical_points(coeffs, lo: float, hi: float) -> list[float]:
    """Real roots of the polynomial with the given ascending coefficients
    that lie strictly inside (lo, hi)."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
    if len(c) < 2:
        return []
    roots = np.polynomial.polynomial.polyroots(c)
    out = []
    for r in roots:
        if abs(r.imag) <= 1e-9 * (1.0 + abs(r.real)) and lo < r.real < hi:
            out.append(float(r.real))
    return out


def lipschitz_of_derivative(flux: FluxSpec, lo: float, hi: float) -> float:
    """The Lipschitz constant of f' on [lo, hi], i.e. sup |f''|.

    Exact for the supported flux kinds: a polynomial's |f''| attains its sup
    at an endpoint or at an interior root of f''', all of which are checked.
    """
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise InvalidParameterError("interval endpoints must be finite")
    if lo > hi:
        raise InvalidParameterError("invalid interval: lo > hi")
    if flux.kind == BURGERS:
        return 1.0
    d2 = np.polynomial.polynomial.polyder(flux.coefficients, 2)
    d3 = np.polynomial.polynomial.polyder(flux.coefficients, 3)
    candidates = [lo, hi] + _interior_critical_points(d3, lo, hi)
    vals = np.abs(np.polynomial.polynomial.polyval(np.asarray(candidates), d2))
    return float(np.max(vals))


def derivative_range(flux: FluxSpec, lo: float, hi: float) -> tuple[float, float]:
    """(min, max) of f' over the closed interval between lo and hi.

    Exact: evaluated at the endpoints and the interior roots of f''.
    """
    if lo > hi:
        lo, hi = hi, lo
    if lo == hi:
        v = float(derivative(flux, lo))
        return v, v
    if flux.kind == BURGERS:
        return lo, hi
    d1 = np.polynomial.polynomial.polyder(flux.coefficients, 1)
    d2 = np.polynomial.polynomial.polyder(flux.coefficients, 2)
    candidates = [lo, hi] + _interior_critical_points(d2, lo, hi)
    vals = np.polynomial.polynomial.polyval(np.asarray(candidates), d1)
    return float(np.min(vals)), float(np.max(vals))


def sup_derivative(flux: FluxSpec, lo: float, hi: float) -> float:
    """sup |f'| over the closed interval between lo and hi."""
    mn, mx = derivative_range(flux, lo, hi)
    return max(abs(mn), abs(mx))


def chord_slope_Q(flux: FluxSpec, a: float, b: float) -> float:
    """Chord slope of f': (f'(a) - f'(b)) / (a - b), extended by 0 at a == b.

    Bounded in absolute value by any Lipschitz constant of f'.
    """
    if a == b:
        return 0.0
    return float((derivative(flux, a) - derivative(flux, b)) / (a - b))
