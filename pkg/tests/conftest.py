"""Shared fixtures. Everything expensive is session-scoped: dense
diagonalizations and Newton runs dominate, and every module reuses the
same canonical objects."""

import numpy as np
import pytest

from gapbumps import presets
from gapbumps.functional import Nonlinearity
from gapbumps.operator import diagonalize
from gapbumps.reduction import detect_kernel
from gapbumps.solver import find_critical_point, initial_ansatz
from gapbumps.torus import TorusDomain


@pytest.fixture(scope="session")
def potential():
    return presets.default_potential()


@pytest.fixture(scope="session")
def nl():
    return Nonlinearity()


@pytest.fixture(scope="session")
def S4(potential):
    return diagonalize(potential, TorusDomain(1, 4, 16))


@pytest.fixture(scope="session")
def S8(potential):
    return diagonalize(potential, TorusDomain(1, 8, 16))


@pytest.fixture(scope="session")
def base8(S8, nl):
    init = initial_ansatz(
        presets.BASE_ANSATZ["center"],
        presets.BASE_ANSATZ["width"],
        presets.BASE_ANSATZ["amplitude"],
        S8.domain,
        S8,
    )
    return find_critical_point(init, S8, nl)


@pytest.fixture(scope="session")
def kb8(base8, S8, nl):
    return detect_kernel(base8, S8, nl, tau=presets.TAU_FORCED)


@pytest.fixture(scope="session")
def degenerate():
    """(S, nl, record, kernel basis) of the 2-d translation fixture."""
    domain, V, nl2 = presets.degenerate_problem()
    S2 = diagonalize(V, domain)
    init = initial_ansatz(
        presets.DEGENERATE_ANSATZ["center"],
        presets.DEGENERATE_ANSATZ["width"],
        presets.DEGENERATE_ANSATZ["amplitude"],
        domain,
        S2,
    )
    rec = find_critical_point(init, S2, nl2)
    return S2, nl2, rec, detect_kernel(rec, S2, nl2)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
