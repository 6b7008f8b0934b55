"""Pure-numpy log-derivative propagation kernel.

Reference implementation of the invariant-embedding update used by the
compiled extension; the two must agree to rounding error (tested).  The
recursion per mesh point is

    y <- (1 + h y)^-1 y            (exact free propagation over one step)
    y <- y + (h/3) w_n Qt_n        (Simpson-weighted interaction kick)

with Qt = Q at even points and Qt = (1 - h^2 Q / 6)^-1 Q at odd points,
which makes the scheme globally fourth order in h.  Q = (W - E)/h22mu.
All energies in the batch share one W assembly per point.
"""
import numpy as np


def propagate_zone(y, h, energies, wconst, cent, rgrid, ufun,
                   prow, pcol, pfun, pval, h22mu):
    """Advance the batched log-derivative y (nE, n, n) across one zone.

    Mutates and returns y.  rgrid has an odd number of points (even step
    count); both endpoints receive weight-1 kicks, so consecutive zones
    chain by simple repeated calls.
    """
    n_e, n, _ = y.shape
    npts = rgrid.size
    last = npts - 1
    if last % 2:
        raise ValueError("zone needs an even number of steps")
    eye = np.eye(n)
    shift = np.asarray(energies, dtype=float) / h22mu
    # dense pattern stack: small and reused every point
    nfun = ufun.shape[0]
    pat = np.zeros((nfun, n, n))
    np.add.at(pat, (pfun, prow, pcol), pval)

    for pt in range(npts):
        wq = np.tensordot(ufun[:, pt], pat, axes=1)
        wq += wconst
        rinv2 = 1.0 / rgrid[pt] ** 2
        wq[np.diag_indices(n)] += cent * rinv2
        wq /= h22mu

        if pt > 0:
            a = eye[None, :, :] + h * y
            y[:] = np.linalg.solve(a, y)

        if pt % 2:
            q = wq[None, :, :] - shift[:, None, None] * eye
            b = eye[None, :, :] - (h * h / 6.0) * q
            y += (4.0 * h / 3.0) * np.linalg.solve(b, q)
        else:
            w = 1.0 if pt in (0, last) else 2.0
            c = w * h / 3.0
            y += c * wq[None, :, :]
            idx = np.arange(n)
            y[:, idx, idx] -= c * shift[:, None]

        y += np.transpose(y, (0, 2, 1)).copy()
        y *= 0.5
    return y
