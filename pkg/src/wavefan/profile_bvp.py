"""Two-point boundary value solver for self-similar viscous profiles.

The profile u(xi) solves

    eps * u'' = (f'(u) - xi) * u',     u(-inf) = u_left,  u(+inf) = u_right,

which connects the constant states through a smoothed copy of the inviscid
wave fan. The problem is discretized on a finite interval with a graded mesh
and solved by a damped Newton iteration on the nonlinear divided-difference
residual.

Mesh design: away from the wave fan the solution relaxes to its limit like
exp(-|f'(u) - xi| * distance / eps), so both the interior layers and the
tails live on the scale eps / S(xi), where S(xi) bounds |f'(u) - xi| over
the relevant state interval. The mesh marches outward from the domain
centre with local spacing min(h_base, c * eps / S(xi)); for data symmetric
under (xi, u) -> (-xi, -u) the two sides of the march produce bitwise
mirror-image nodes, so the discrete problem inherits the symmetry exactly
instead of up to interpolation error.

Small eps is reached by continuation: solve at a sequence of decreasing
viscosities, each stage re-meshed and warm-started from the previous one.

Derivatives along a computed profile are reconstructed with fourth-order
five-point stencils; second-order differences leave an O(h^2) bias in the
slope that is far too large for the first-integral and comparison checks
downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import solve_banded

from .errors import (
    CoverageError,
    InvalidParameterError,
    LinearSolverError,
    NonConvergenceError,
    WindowError,
)
from .flux import FluxSpec, derivative, derivative_range, second_derivative
from .riemann import eval_riemann, solve_exact, wave_speed_span

_MAX_NODES = 400_000
_EPS_MACH = float(np.finfo(float).eps)
_ARMIJO = 1e-4


@dataclass(frozen=True)
class ProfileProblem:
    flux: FluxSpec
    u_left: float
    u_right: float
    epsilon: float

    def __post_init__(self):
        if not (np.isfinite(self.u_left) and np.isfinite(self.u_right)):
            raise InvalidParameterError("boundary states must be finite")
        if not (np.isfinite(self.epsilon) and self.epsilon > 0.0):
            raise InvalidParameterError("epsilon must be positive")

    @property
    def state_interval(self) -> tuple[float, float]:
        return (min(self.u_left, self.u_right), max(self.u_left, self.u_right))


@dataclass(frozen=True)
class Profile:
    """Mesh nodes xi, profile values u, and reconstructed slope du."""

    xi: np.ndarray
    u: np.ndarray
    du: np.ndarray


@dataclass(frozen=True)
class SolveOptions:
    newton_tol: float = 1e-11
    max_iter: int = 25
    damping: float = 0.5
    max_halvings: int = 30
    tail_tol: float = 1e-5
    h_base: float = 0.05
    nodes_per_layer: int = 120
    domain: tuple | None = None          # override truncate_domain
    continuation: tuple | None = None    # override the viscosity schedule


@dataclass(frozen=True)
class SolveReport:
    converged: bool
    iterations: int
    residual_history: tuple
    domain: tuple
    mesh_size: int
    floor_limited: bool = False
    stages: int = 1

    @property
    def residual_norm(self) -> float:
        return self.residual_history[-1]


def truncate_domain(problem: ProfileProblem, tail_tol: float = 1e-5) -> tuple[float, float]:
    """Finite interval outside which the profile is flat to within tail_tol.

    The wave fan occupies the range of f' over the state interval; beyond it
    the profile relaxes like a Gaussian-in-distance factor, so a pad of
    sqrt(2 eps ln(1/tail_tol)) + sqrt(eps) suffices on each side.
    """
    if not (0.0 < tail_tol < 1.0):
        raise InvalidParameterError("tail_tol must lie in (0, 1)")
    lo, hi = problem.state_interval
    m, big_m = derivative_range(problem.flux, lo, hi)
    pad = math.sqrt(2.0 * problem.epsilon * math.log(1.0 / tail_tol)) \
        + math.sqrt(problem.epsilon)
    return (m - pad, big_m + pad)


def _speed_gap_bound(problem: ProfileProblem):
    """Returns S(xi) >= |f'(u) - xi| for all u in the state interval."""
    lo, hi = problem.state_interval
    m, big_m = derivative_range(problem.flux, lo, hi)

    def gap(xi: float) -> float:
        return max(big_m, xi) - min(m, xi)

    return gap


def build_mesh(problem: ProfileProblem, domain: tuple | None = None,
               options: SolveOptions | None = None) -> np.ndarray:
    """Graded mesh on the truncated domain, marched outward from the centre.

    Local spacing is min(h_base, c*eps/S(xi)) with c = 12/nodes_per_layer,
    which puts nodes_per_layer nodes across a viscous layer and keeps about
    ten nodes per e-folding of the tails. A trailing sliver shorter than
    0.3 of the local spacing is absorbed into the final step.
    """
    opts = options or SolveOptions()
    dom = domain if domain is not None else truncate_domain(problem, opts.tail_tol)
    lo, hi = float(dom[0]), float(dom[1])
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise InvalidParameterError("domain must be a finite increasing pair")

    slo, shi = wave_speed_span(solve_exact(problem.flux, problem.u_left, problem.u_right))
    if not (lo < slo and shi < hi):
        raise WindowError("domain (%g, %g) does not contain the wave fan (%g, %g)"
                          % (lo, hi, slo, shi))

    gap = _speed_gap_bound(problem)
    c_acc = 12.0 / float(opts.nodes_per_layer)
    fine = c_acc * problem.epsilon

    def spacing(xi: float) -> float:
        s = gap(xi)
        if s * opts.h_base <= fine:
            return opts.h_base
        return fine / s

    def march(start: float, stop: float, step_sign: float) -> list[float]:
        out = []
        x = start
        while True:
            if len(out) + 1 > _MAX_NODES:
                raise CoverageError("mesh exceeds %d nodes; enlarge spacing or "
                                    "shrink the domain" % _MAX_NODES)
            h = spacing(x)
            nxt = x + step_sign * h
            if step_sign * (stop - nxt) < 0.3 * h:
                out.append(stop)
                return out
            out.append(nxt)
            x = nxt

    centre = 0.5 * (lo + hi)
    right = march(centre, hi, 1.0)
    left = march(centre, lo, -1.0)
    mesh = np.array(left[::-1] + [centre] + right)
    if len(mesh) > _MAX_NODES:
        raise CoverageError("mesh exceeds %d nodes" % _MAX_NODES)
    return mesh


def reconstruct_derivative(xi: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Fourth-order slope reconstruction on a nonuniform mesh.

    Each node uses the five nearest nodes (windows clipped at the ends);
    the stencil weights come from a scaled Vandermonde solve done for all
    nodes at once.
    """
    xi = np.asarray(xi, dtype=float)
    u = np.asarray(u, dtype=float)
    n = len(xi)
    if n < 5:
        return np.gradient(u, xi, edge_order=2 if n >= 3 else 1)
    starts = np.clip(np.arange(n) - 2, 0, n - 5)
    idx = starts[:, None] + np.arange(5)[None, :]
    dx = xi[idx] - xi[:, None]
    scale = np.max(np.abs(dx), axis=1)
    t = dx / scale[:, None]
    powers = np.arange(5)
    vander = t[:, None, :] ** powers[None, :, None]   # (n, 5, 5): row m is t^m
    rhs = np.zeros((n, 5, 1))
    rhs[:, 1, 0] = 1.0
    weights = np.linalg.solve(vander, rhs)[:, :, 0]
    return np.einsum("ij,ij->i", weights, u[idx]) / scale


def initial_guess(problem: ProfileProblem, xi: np.ndarray) -> Profile:
    """Exact inviscid solution mollified on the sqrt(eps) scale.

    The sliding average removes the kinks and jumps of the inviscid limit,
    which is enough structure for Newton to take full steps at moderate
    viscosity.
    """
    xi = np.asarray(xi, dtype=float)
    if problem.u_left == problem.u_right:
        u = np.full(len(xi), problem.u_left)
        return Profile(xi=xi, u=u, du=np.zeros(len(xi)))
    exact = solve_exact(problem.flux, problem.u_left, problem.u_right)
    delta = 0.5 * math.sqrt(problem.epsilon)
    step = delta / 8.0
    aux = np.arange(xi[0] - 2.0 * delta, xi[-1] + 2.0 * delta + step, step)
    vals = eval_riemann(exact, aux)
    prefix = np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * step)])
    upper = np.interp(xi + delta, aux, prefix)
    lower = np.interp(xi - delta, aux, prefix)
    u = (upper - lower) / (2.0 * delta)
    u[0] = problem.u_left
    u[-1] = problem.u_right
    return Profile(xi=xi, u=u, du=reconstruct_derivative(xi, u))


def residual(problem: ProfileProblem, profile: Profile) -> np.ndarray:
    """Full-length discrete residual; the first and last entries are the
    boundary mismatches and the interior entries are

        eps * D2(u) - (f'(u_i) - xi_i) * D1(u)

    with the standard three-point divided differences on a nonuniform mesh.
    """
    xi, u = profile.xi, profile.u
    n = len(xi)
    r = np.empty(n)
    r[0] = u[0] - problem.u_left
    r[-1] = u[-1] - problem.u_right
    hm = xi[1:-1] - xi[:-2]
    hp = xi[2:] - xi[1:-1]
    hs = hm + hp
    sm = (u[1:-1] - u[:-2]) / hm
    sp = (u[2:] - u[1:-1]) / hp
    c = derivative(problem.flux, u[1:-1]) - xi[1:-1]
    d1 = (hm * sp + hp * sm) / hs
    r[1:-1] = problem.epsilon * 2.0 * (sp - sm) / hs - c * d1
    return r


def residual_noise_floor(problem: ProfileProblem, profile: Profile) -> float:
    """Roundoff level of the interior residual: below this value the computed
    residual is indistinguishable from zero in floating point, so iterating
    past it cannot help."""
    xi, u = profile.xi, profile.u
    hm = xi[1:-1] - xi[:-2]
    hp = xi[2:] - xi[1:-1]
    uscale = np.maximum(np.abs(u[1:-1]), np.maximum(np.abs(u[:-2]), np.abs(u[2:])))
    c = np.abs(derivative(problem.flux, u[1:-1]) - xi[1:-1])
    level = 2.0 * problem.epsilon * uscale / (hm * hp) \
        + c * uscale * (1.0 / hm + 1.0 / hp)
    return 4.0 * _EPS_MACH * float(np.max(level))


def jacobian(problem: ProfileProblem, profile: Profile) -> np.ndarray:
    """Analytic tridiagonal Jacobian of `residual`, in banded (3, n) storage
    for scipy.linalg.solve_banded; the boundary rows are identity."""
    xi, u = profile.xi, profile.u
    n = len(xi)
    hm = xi[1:-1] - xi[:-2]
    hp = xi[2:] - xi[1:-1]
    hs = hm + hp
    sm = (u[1:-1] - u[:-2]) / hm
    sp = (u[2:] - u[1:-1]) / hp
    d1 = (hm * sp + hp * sm) / hs
    c = derivative(problem.flux, u[1:-1]) - xi[1:-1]
    eps = problem.epsilon

    ab = np.zeros((3, n))
    # superdiagonal entries J[i, i+1], stored in ab[0, i+1]
    ab[0, 2:] = 2.0 * eps / (hp * hs) - c * hm / (hp * hs)
    # diagonal
    ab[1, 0] = 1.0
    ab[1, -1] = 1.0
    ab[1, 1:-1] = (-2.0 * eps / (hm * hp)
                   - c * (hp - hm) / (hm * hp)
                   - second_derivative(problem.flux, u[1:-1]) * d1)
    # subdiagonal entries J[i, i-1], stored in ab[2, i-1]
    ab[2, :-2] = 2.0 * eps / (hm * hs) + c * hp / (hm * hs)
    return ab


def _check_guess(profile: Profile):
    xi = np.asarray(profile.xi, dtype=float)
    if len(xi) < 3 or len(xi) != len(profile.u):
        raise InvalidParameterError("guess needs matching xi/u arrays, >= 3 nodes")
    if np.any(np.diff(xi) <= 0.0):
        raise InvalidParameterError("mesh nodes must be strictly increasing")


def newton_solve(problem: ProfileProblem, guess: Profile,
                 options: SolveOptions | None = None) -> tuple[Profile, SolveReport]:
    """Damped Newton iteration from the given guess on the guess's own mesh.

    Steps are backtracked (factor `damping`) until the sup-norm residual
    satisfies an Armijo-type decrease. Raises NonConvergenceError, with the
    partial report attached, if the iteration stalls above both the
    tolerance and the floating-point noise floor of the residual.
    """
    opts = options or SolveOptions()
    _check_guess(guess)
    xi = np.asarray(guess.xi, dtype=float)
    u = np.asarray(guess.u, dtype=float).copy()

    def rnorm(uu):
        return float(np.max(np.abs(residual(problem, Profile(xi, uu, guess.du)))))

    history = [rnorm(u)]
    converged = history[-1] <= opts.newton_tol
    floor_limited = False
    iterations = 0

    while not converged and iterations < opts.max_iter:
        prof = Profile(xi, u, guess.du)
        r = residual(problem, prof)
        try:
            step = solve_banded((1, 1), jacobian(problem, prof), -r)
        except np.linalg.LinAlgError as exc:
            raise LinearSolverError("banded solve failed: %s" % exc) from exc
        if not np.all(np.isfinite(step)):
            raise LinearSolverError("banded solve produced non-finite step")

        lam = 1.0
        accepted = False
        for _ in range(opts.max_halvings + 1):
            trial = u + lam * step
            nt = rnorm(trial)
            if nt <= (1.0 - _ARMIJO * lam) * history[-1] or nt <= opts.newton_tol:
                u = trial
                history.append(nt)
                accepted = True
                break
            lam *= opts.damping
        iterations += 1
        if not accepted:
            break
        if history[-1] <= opts.newton_tol:
            converged = True

    if not converged:
        floor = residual_noise_floor(problem, Profile(xi, u, guess.du))
        if history[-1] <= floor:
            converged = True
            floor_limited = True

    report = SolveReport(converged=converged, iterations=iterations,
                         residual_history=tuple(history),
                         domain=(float(xi[0]), float(xi[-1])),
                         mesh_size=len(xi), floor_limited=floor_limited)
    if not converged:
        raise NonConvergenceError(
            "Newton stalled at residual %.3e (tol %.3e) after %d iterations"
            % (history[-1], opts.newton_tol, iterations),
            report=report, epsilon=problem.epsilon)
    final = Profile(xi=xi, u=u, du=reconstruct_derivative(xi, u))
    return final, report


def _viscosity_schedule(epsilon: float) -> tuple:
    if epsilon >= 1.0:
        return (epsilon,)
    seq = [1.0]
    while seq[-1] * 0.5 > epsilon:
        seq.append(seq[-1] * 0.5)
    seq.append(epsilon)
    return tuple(seq)


def solve_profile(problem: ProfileProblem,
                  options: SolveOptions | None = None) -> tuple[Profile, SolveReport]:
    """Solve for the viscous profile at problem.epsilon by continuation.

    Each stage truncates and meshes for its own viscosity, warm-starts from
    the previous stage (linearly reinterpolated), and solves to a loose
    intermediate tolerance; the final stage uses newton_tol. The returned
    report is the final stage's, with the stage count filled in.
    """
    opts = options or SolveOptions()
    if opts.continuation is not None:
        schedule = tuple(float(e) for e in opts.continuation)
        if len(schedule) == 0 or any(not (np.isfinite(e) and e > 0.0) for e in schedule):
            raise InvalidParameterError("continuation values must be positive")
        if any(b >= a for a, b in zip(schedule, schedule[1:])):
            raise InvalidParameterError("continuation must be strictly decreasing")
        if schedule[-1] != problem.epsilon:
            raise InvalidParameterError("continuation must end at problem.epsilon")
    else:
        schedule = _viscosity_schedule(problem.epsilon)

    profile = None
    report = None
    total_iterations = 0
    for k, eps_k in enumerate(schedule):
        stage = replace(problem, epsilon=eps_k)
        dom = opts.domain if opts.domain is not None else truncate_domain(stage, opts.tail_tol)
        mesh = build_mesh(stage, dom, opts)
        if profile is None:
            guess = initial_guess(stage, mesh)
        else:
            u0 = np.interp(mesh, profile.xi, profile.u)
            u0[0] = problem.u_left
            u0[-1] = problem.u_right
            guess = Profile(mesh, u0, reconstruct_derivative(mesh, u0))
        last = k == len(schedule) - 1
        tol = opts.newton_tol if last else max(opts.newton_tol, 1e-8)
        profile, report = newton_solve(stage, guess, replace(opts, newton_tol=tol))
        total_iterations += report.iterations
    return profile, replace(report, stages=len(schedule), iterations=total_iterations)


def continuation_sweep(problem: ProfileProblem, epsilons,
                       options: SolveOptions | None = None) -> list:
    """Profiles at a strictly decreasing sequence of viscosities.

    The first entry is solved from scratch; each later entry is warm-started
    from its predecessor. Returns [(epsilon, Profile), ...]."""
    eps_list = [float(e) for e in epsilons]
    if len(eps_list) == 0:
        raise InvalidParameterError("need at least one viscosity")
    if any(not (np.isfinite(e) and e > 0.0) for e in eps_list):
        raise InvalidParameterError("viscosities must be positive")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise InvalidParameterError("viscosities must be strictly decreasing")
    opts = options or SolveOptions()

    out = []
    profile = None
    for eps_k in eps_list:
        stage = replace(problem, epsilon=eps_k)
        if profile is None:
            profile, _ = solve_profile(stage, opts)
        else:
            dom = opts.domain if opts.domain is not None else truncate_domain(stage, opts.tail_tol)
            mesh = build_mesh(stage, dom, opts)
            u0 = np.interp(mesh, profile.xi, profile.u)
            u0[0] = problem.u_left
            u0[-1] = problem.u_right
            guess = Profile(mesh, u0, reconstruct_derivative(mesh, u0))
            profile, _ = newton_solve(stage, guess, opts)
        out.append((eps_k, profile))
    return out


def sample_profile(profile: Profile, xi):
    """Piecewise-linear sample of the profile (end values beyond the mesh)."""
    return np.interp(xi, profile.xi, profile.u)
