# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled log-derivative propagation kernel.

Same recursion as fallback.propagate_zone (the pure-numpy reference); the
loops run without the GIL so block-level thread pools scale.
"""
import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_lapack cimport dgesv

cnp.import_array()


def propagate_zone(double[:, :, ::1] y, double h, double[::1] energies,
                   double[:, ::1] wconst, double[::1] cent, double[::1] rgrid,
                   double[:, ::1] ufun, int[::1] prow, int[::1] pcol,
                   int[::1] pfun, double[::1] pval, double h22mu):
    """Advance the batched log-derivative y (nE, n, n) across one zone."""
    cdef Py_ssize_t n_e = y.shape[0]
    cdef int n = <int> y.shape[1]
    cdef Py_ssize_t npts = rgrid.shape[0]
    cdef Py_ssize_t last = npts - 1
    cdef Py_ssize_t nnz = prow.shape[0]
    cdef Py_ssize_t nfun = ufun.shape[0]
    if last % 2:
        raise ValueError("zone needs an even number of steps")
    if y.shape[1] != y.shape[2] or wconst.shape[0] != n:
        raise ValueError("shape mismatch")

    wq_nd = np.empty((n, n))
    a_nd = np.empty((n, n))
    q_nd = np.empty((n, n))
    ipiv_nd = np.empty(n, dtype=np.intc)
    shift_nd = np.asarray(energies, dtype=float) / h22mu
    cdef double[:, ::1] wq = wq_nd
    cdef double[:, ::1] a = a_nd
    cdef double[:, ::1] q = q_nd
    cdef int[::1] ipiv = ipiv_nd
    cdef double[::1] shift = shift_nd

    cdef Py_ssize_t pt, e, i, j, t
    cdef int info = 0, nrhs = 0
    cdef double rinv2, c, hh6, sym, inv_h22mu = 1.0 / h22mu
    cdef Py_ssize_t err_pt = -1
    hh6 = h * h / 6.0

    with nogil:
        for pt in range(npts):
            # W(R)/h22mu shared by all energies in the batch
            for i in range(n):
                for j in range(n):
                    wq[i, j] = wconst[i, j]
            rinv2 = 1.0 / (rgrid[pt] * rgrid[pt])
            for i in range(n):
                wq[i, i] += cent[i] * rinv2
            for t in range(nnz):
                wq[prow[t], pcol[t]] += pval[t] * ufun[pfun[t], pt]
            for i in range(n):
                for j in range(n):
                    wq[i, j] *= inv_h22mu

            for e in range(n_e):
                if pt > 0:
                    # free half of the update: y <- (1 + h y)^-1 y
                    for i in range(n):
                        for j in range(n):
                            a[i, j] = h * y[e, i, j]
                        a[i, i] += 1.0
                    nrhs = n
                    dgesv(&n, &nrhs, &a[0, 0], &n, &ipiv[0], &y[e, 0, 0], &n,
                          &info)
                    if info != 0:
                        err_pt = pt
                        break

                if pt % 2 == 1:
                    # modified kick Q (1 - h^2 Q / 6)^-1 keeps the
                    # fourth-order error bound
                    for i in range(n):
                        for j in range(n):
                            q[i, j] = wq[i, j]
                            a[i, j] = -hh6 * wq[i, j]
                        q[i, i] -= shift[e]
                        a[i, i] += 1.0 + hh6 * shift[e]
                    nrhs = n
                    dgesv(&n, &nrhs, &a[0, 0], &n, &ipiv[0], &q[0, 0], &n,
                          &info)
                    if info != 0:
                        err_pt = pt
                        break
                    c = 4.0 * h / 3.0
                    for i in range(n):
                        for j in range(n):
                            y[e, i, j] += c * q[i, j]
                else:
                    c = h / 3.0 if (pt == 0 or pt == last) else 2.0 * h / 3.0
                    for i in range(n):
                        for j in range(n):
                            y[e, i, j] += c * wq[i, j]
                        y[e, i, i] -= c * shift[e]

                for i in range(n):
                    for j in range(i):
                        sym = 0.5 * (y[e, i, j] + y[e, j, i])
                        y[e, i, j] = sym
                        y[e, j, i] = sym
            if err_pt >= 0:
                break

    if err_pt >= 0:
        raise RuntimeError(
            f"singular linear solve at grid point {err_pt} (step too large)")
    return np.asarray(y)
