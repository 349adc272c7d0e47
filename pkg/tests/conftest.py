"""Shared fixtures: the expensive solves are done once per session."""

import numpy as np
import pytest
from hypothesis import settings

import wavefan as wf

settings.register_profile("suite", deadline=None, derandomize=True, max_examples=60)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def shock_problem():
    return wf.ProfileProblem(wf.burgers_flux(), 1.0, -1.0, 0.05)


@pytest.fixture(scope="session")
def shock_profile(shock_problem):
    profile, report = wf.solve_profile(shock_problem)
    assert report.converged
    return profile


@pytest.fixture(scope="session")
def rarefaction_problem():
    return wf.ProfileProblem(wf.burgers_flux(), -1.0, 1.0, 0.05)


@pytest.fixture(scope="session")
def rarefaction_profile(rarefaction_problem):
    profile, report = wf.solve_profile(rarefaction_problem)
    assert report.converged
    return profile


@pytest.fixture(scope="session")
def corner():
    return wf.solve_corner()
