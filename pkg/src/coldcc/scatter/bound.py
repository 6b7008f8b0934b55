"""Counting coupled-channel bound states below a reference energy.

Finite-difference discretization of the coupled radial problem gives a
symmetric block-tridiagonal matrix; the number of eigenvalues below E is
read off by Sylvester inertia through the block LDL^T (Schur complement)
recursion, without computing any eigenvector.  Used by the scaling scan
to count how many states have crossed the entrance threshold.
"""
import numpy as np

from ..channels import CouplingMatrix


def count_bound_states(cm: CouplingMatrix, e_ref: float = 0.0,
                       r_lo: float = 4.1, r_hi: float = 200.0,
                       step: float = 0.02) -> int:
    """Eigenvalue count of the coupled system below e_ref (in K).

    Dirichlet walls at r_lo and r_hi; the three-point kinetic stencil is
    second order, adequate for counting away from accidental threshold
    degeneracies (counts are integers, so small eigenvalue shifts only
    matter for states within the discretization error of e_ref).
    """
    n = cm.size
    npts = int(round((r_hi - r_lo) / step)) - 1
    if npts < 10:
        raise ValueError("bound-state grid too small")
    h = (r_hi - r_lo) / (npts + 1)
    t = cm.h22mu / h**2
    grid = r_lo + h * (1.0 + np.arange(npts))

    uvals = cm.radial_values(grid)
    pats = cm.patterns_rotated
    diag_const = cm.thresholds + 2.0 * t - e_ref
    idx = np.diag_indices(n)

    count = 0
    schur = None
    for p in range(npts):
        d = np.tensordot(uvals[:, p], pats, axes=1) if pats.size else np.zeros((n, n))
        d[idx] += diag_const + cm.centrifugal / grid[p] ** 2
        if schur is None:
            schur = d
        else:
            schur = d - t * t * np.linalg.inv(schur)
        count += int((np.linalg.eigvalsh(schur) < 0.0).sum())
    return count
