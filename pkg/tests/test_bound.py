"""Bound-state counting against closed forms and a banded-eigenvalue oracle."""
import math

import numpy as np
import pytest
from scipy.linalg import eig_banded

from coldcc import constants
from coldcc.scatter.bound import count_bound_states
from coldcc.scatter.runs import make_setup

from test_propagator import _DiagonalSystem

H22MU = constants.h22mu_kelvin(constants.MU_COLLISION_AMU)


def _square_well(depth, width, r_lo):
    def pot(r):
        r = np.asarray(r, dtype=float)
        return np.where(r < r_lo + width, -depth, 0.0)
    return pot


@pytest.mark.parametrize("n_expected", [1, 2, 5])
def test_square_well_count_matches_closed_form(n_expected):
    # Dirichlet wall at r_lo makes this the half-line square well, whose
    # levels sit at K w = (n - 1/2) pi; pick K between transitions
    width = 6.0
    kw = (n_expected - 0.1) * math.pi
    depth = H22MU * (kw / width) ** 2
    cm = _DiagonalSystem([0], [_square_well(depth, width, 4.1)])
    got = count_bound_states(cm, r_lo=4.1, r_hi=60.0, step=0.01)
    assert got == n_expected


def test_morse_count_matches_closed_form():
    # supported levels satisfy n + 1/2 < sqrt(D / h22mu) / alpha; aim the
    # ratio at 3.0, halfway between transitions, so the top level is bound
    # by ~2 K and its tail fits the box
    alpha, r_eq, lam_m = 0.5, 8.0, 3.0
    depth = H22MU * (lam_m * alpha) ** 2
    expected = math.floor(lam_m - 0.5) + 1
    assert expected == 3

    def pot(r):
        x = np.exp(-alpha * (np.asarray(r, dtype=float) - r_eq))
        return depth * (x * x - 2.0 * x)

    cm = _DiagonalSystem([0], [pot])
    got = count_bound_states(cm, r_lo=4.1, r_hi=80.0, step=0.01)
    assert got == expected


def _banded_count(cm, e_ref, r_lo, r_hi, step):
    """Same discretized operator, counted by LAPACK banded eigenvalues."""
    n = cm.size
    npts = int(round((r_hi - r_lo) / step)) - 1
    h = (r_hi - r_lo) / (npts + 1)
    t = cm.h22mu / h**2
    grid = r_lo + h * (1.0 + np.arange(npts))
    uvals = cm.radial_values(grid)
    pats = cm.patterns_rotated
    dim = npts * n
    band = np.zeros((n + 1, dim))
    for p in range(npts):
        d = np.tensordot(uvals[:, p], pats, axes=1) if pats.size else np.zeros((n, n))
        d[np.diag_indices(n)] += (cm.thresholds + 2.0 * t - e_ref
                                  + cm.centrifugal / grid[p] ** 2)
        for i in range(n):
            col = p * n + i
            band[: n - i, col] = d[i:, i]
            if p + 1 < npts:
                band[n, col] = -t
    vals = eig_banded(band, lower=True, eigvals_only=True,
                      select="v", select_range=(-1e7, 0.0))
    return int(vals.size)


@pytest.mark.parametrize("lam", [1.0, 20.0])
def test_inertia_count_matches_banded_eigensolver(lam):
    setup = make_setup(mode="rigid", n_max_by_v={0: 2}, l_max=2).scaled_to(lam)
    cm = setup.coupling(1, 1)
    kw = dict(e_ref=0.0, r_lo=4.1, r_hi=40.0, step=0.05)
    assert count_bound_states(cm, **kw) == _banded_count(cm, **kw)


def test_count_monotone_in_reference_energy():
    setup = make_setup(mode="rigid", n_max_by_v={0: 2}, l_max=2).scaled_to(10.0)
    cm = setup.coupling(1, 1)
    counts = [count_bound_states(cm, e_ref=e, r_hi=40.0, step=0.05)
              for e in (-30.0, -10.0, 0.0, 5.0)]
    assert counts == sorted(counts)
    assert counts[-1] > counts[0]


def test_count_monotone_in_interaction_scale():
    base = make_setup(mode="rigid", n_max_by_v={0: 2}, l_max=2)
    counts = [count_bound_states(base.scaled_to(lam).coupling(1, 1),
                                 r_hi=40.0, step=0.05)
              for lam in (1.0, 5.0, 10.0, 20.0)]
    assert counts == sorted(counts)
    assert counts[-1] > counts[0]


def test_count_stable_under_step_refinement():
    setup = make_setup(mode="rigid", n_max_by_v={0: 2}, l_max=2).scaled_to(20.0)
    cm = setup.coupling(1, 1)
    c1 = count_bound_states(cm, r_hi=40.0, step=0.05)
    c2 = count_bound_states(cm, r_hi=40.0, step=0.03)
    assert c1 == c2
