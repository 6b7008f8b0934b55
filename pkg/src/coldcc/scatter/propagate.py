"""Propagation driver and asymptotic matching to K and S matrices."""
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ive, kve, spherical_jn, spherical_yn

from ..channels import CouplingMatrix
from .grid import PropagationGrid
from . import kernels


def _kernel_coo(cm: CouplingMatrix):
    """Sparse view of the rotated pattern stack for the kernel."""
    pats = cm.patterns_rotated
    if pats.size == 0:
        empty = np.zeros(0, dtype=np.intc)
        return empty, empty.copy(), empty.copy(), np.zeros(0)
    cut = 1e-14 * np.abs(pats).max()
    fun, row, col = np.nonzero(np.abs(pats) > cut)
    return (row.astype(np.intc), col.astype(np.intc),
            fun.astype(np.intc), pats[fun, row, col].copy())


def propagate(cm: CouplingMatrix, grid: PropagationGrid, energies) -> np.ndarray:
    """Outward log-derivative propagation; returns y (nE, n, n) at r_max.

    All energies share the per-point coupling-matrix assembly, so batching
    an energy grid is much cheaper than repeated single-energy runs.
    """
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    n = cm.size
    y = np.zeros((energies.size, n, n))
    idx = np.arange(n)
    y[:, idx, idx] = grid.y0
    row, col, fun, val = _kernel_coo(cm)
    wconst = np.diag(cm.thresholds).copy()
    for h, rgrid in grid.zones():
        ufun = np.ascontiguousarray(cm.radial_values(rgrid))
        kernels.propagate_zone(y, h, energies, wconst, cm.centrifugal,
                               rgrid, ufun, row, col, fun, val, cm.h22mu)
    return y


def _decaying_logderiv(l: int, z: float) -> float:
    """d/dz log(z k_l(z)) from exponentially scaled Bessel-K ratios."""
    nu = l + 0.5
    return 0.5 / z - (kve(nu - 1.0, z) + kve(nu + 1.0, z)) / (2.0 * kve(nu, z))


def _growing_logderiv(l: int, z: float) -> float:
    """d/dz log(z i_l(z)), kept for diagnostics; not used in matching."""
    nu = l + 0.5
    return 0.5 / z + (ive(nu - 1.0, z) + ive(nu + 1.0, z)) / (2.0 * ive(nu, z))


@dataclass
class ScatteringResult:
    """Open-channel K and S matrices of one (Jtot, parity) block."""
    jtot: int
    parity: int
    energy: float
    channels: tuple          # open channels, nominal labels, block order
    k_open: np.ndarray       # bohr^-1
    kmat: np.ndarray
    smat: np.ndarray
    k_symmetry_defect: float
    unitarity_defect: float

    def index(self, v, n, j, l) -> int:
        for i, ch in enumerate(self.channels):
            if (ch.v, ch.n, ch.j, ch.l) == (v, n, j, l):
                return i
        raise KeyError(f"channel v={v} N={n} J={j} L={l} not open")

    def t_matrix(self) -> np.ndarray:
        return np.eye(len(self.channels)) - self.smat


def match(cm: CouplingMatrix, y: np.ndarray, energy: float,
          r_max: float) -> ScatteringResult:
    """Match the propagated log-derivative to free asymptotic solutions.

    Open channels carry flux-normalized Riccati-Bessel pairs; closed
    channels carry the decaying modified solution, eliminated exactly
    through the same linear system.  Column norms are equilibrated before
    the solve and undone on the K matrix afterwards, which keeps the
    system well conditioned at micro-kelvin energies where the L > 0
    Riccati functions span many orders of magnitude.
    """
    n = cm.size
    th = cm.thresholds
    ke2 = (energy - th) / cm.h22mu
    open_mask = ke2 > 0.0
    if not open_mask.any():
        raise ValueError(f"no open channels at E = {energy} K")
    k = np.sqrt(np.abs(ke2))
    ells = np.array([ch.l for ch in cm.basis.channels])

    j_val = np.zeros(n)
    j_der = np.zeros(n)
    n_val = np.zeros(n)
    n_der = np.zeros(n)
    alpha = np.ones(n)
    beta = np.ones(n)
    for i in range(n):
        l = int(ells[i])
        if open_mask[i]:
            x = k[i] * r_max
            sq = math.sqrt(k[i])
            jv = x * spherical_jn(l, x)
            jd = k[i] * (spherical_jn(l, x) + x * spherical_jn(l, x, derivative=True))
            nv = -x * spherical_yn(l, x)
            nd = -k[i] * (spherical_yn(l, x) + x * spherical_yn(l, x, derivative=True))
            alpha[i] = 1.0 / max(abs(jv), abs(jd)) * sq
            beta[i] = 1.0 / max(abs(nv), abs(nd)) * sq
            j_val[i] = jv / sq * alpha[i]
            j_der[i] = jd / sq * alpha[i]
            n_val[i] = nv / sq * beta[i]
            n_der[i] = nd / sq * beta[i]
        else:
            z = k[i] * r_max
            j_val[i] = 1.0
            j_der[i] = k[i] * _decaying_logderiv(l, z)

    a_mat = y * j_val[None, :]
    a_mat[np.diag_indices(n)] -= j_der
    b_mat = y * n_val[None, :]
    b_mat[np.diag_indices(n)] -= n_der

    open_idx = np.flatnonzero(open_mask)
    closed_idx = np.flatnonzero(~open_mask)
    n_o = open_idx.size
    system = np.concatenate([a_mat[:, closed_idx], b_mat[:, open_idx]], axis=1)
    rhs = -a_mat[:, open_idx]
    sol = np.linalg.solve(system, rhs)
    k_tilde = sol[closed_idx.size:, :]
    kmat = (beta[open_idx, None] * k_tilde) / alpha[open_idx][None, :]

    defect = float(np.abs(kmat - kmat.T).max()) if n_o > 1 else 0.0
    kmat = 0.5 * (kmat + kmat.T)
    ident = np.eye(n_o)
    smat = np.linalg.solve(ident - 1j * kmat, ident + 1j * kmat)
    unit = float(np.abs(smat.conj().T @ smat - ident).max())

    return ScatteringResult(
        jtot=cm.basis.jtot, parity=cm.basis.parity, energy=energy,
        channels=tuple(cm.basis.channels[i] for i in open_idx),
        k_open=k[open_idx].copy(), kmat=kmat, smat=smat,
        k_symmetry_defect=defect, unitarity_defect=unit)
