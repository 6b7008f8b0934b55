"""Cross sections, rate constants and the scattering length.

Two entrance conventions appear: the (J)-basis state-to-state cross
section summed over projections, and the projection-resolved one needed
for spin-orientation loss, where the entrance |N J M_J> is fixed and the
partial-wave projections are summed coherently within each total-J block
and added across blocks.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .. import constants
from ..angmom import clebsch_gordan


def sigma_state_to_state(results, entrance, exit_state) -> float:
    """(J)-basis cross section entrance (v,N,J) -> exit (v',N',J') in bohr^2.

    results: iterable of ScatteringResult blocks at one total energy,
    covering every (Jtot, parity).  sigma = pi/(k^2 (2J+1)) sum_Jtot
    (2 Jtot + 1) sum_LL' |T|^2.
    """
    vi, ni, ji = entrance
    vf, nf, jf = exit_state
    k_in = None
    total = 0.0
    for res in results:
        rows = [i for i, ch in enumerate(res.channels)
                if (ch.v, ch.n, ch.j) == (vf, nf, jf)]
        cols = [i for i, ch in enumerate(res.channels)
                if (ch.v, ch.n, ch.j) == (vi, ni, ji)]
        if not cols:
            continue
        k_in = res.k_open[cols[0]]
        if not rows:
            continue
        t = res.t_matrix()
        total += (2 * res.jtot + 1) * float(
            (np.abs(t[np.ix_(rows, cols)]) ** 2).sum()
        )
    if k_in is None:
        raise ValueError("entrance state closed in every block")
    return math.pi / (k_in**2 * (2 * ji + 1)) * total


def sigma_m_resolved(results, entrance, exit_state) -> float:
    """Projection-resolved cross section in bohr^2.

    entrance = (v, N, J, M_J), exit likewise.  The amplitude at fixed
    total projection M = M_J + m_L sums over blocks coherently:
    T^M(L mL, L' mL') = sum_Jtot CG CG T^Jtot, then
    sigma = pi/k^2 sum over L mL L' mL' of |T^M|^2.
    """
    vi, ni, ji, mi = entrance
    vf, nf, jf, mf = exit_state
    amps = {}
    k_in = None
    for res in results:
        cols = [i for i, ch in enumerate(res.channels)
                if (ch.v, ch.n, ch.j) == (vi, ni, ji)]
        if not cols:
            continue
        k_in = res.k_open[cols[0]]
        rows = [i for i, ch in enumerate(res.channels)
                if (ch.v, ch.n, ch.j) == (vf, nf, jf)]
        if not rows:
            continue
        t = res.t_matrix()
        for ci in cols:
            li = res.channels[ci].l
            for ml in range(-li, li + 1):
                m_tot = mi + ml
                if abs(m_tot) > res.jtot:
                    continue
                cg_in = clebsch_gordan(ji, mi, li, ml, res.jtot, m_tot)
                if cg_in == 0.0:
                    continue
                for ri in rows:
                    lf = res.channels[ri].l
                    mlf = m_tot - mf
                    if abs(mlf) > lf:
                        continue
                    cg_out = clebsch_gordan(jf, mf, lf, mlf, res.jtot, m_tot)
                    if cg_out == 0.0:
                        continue
                    key = (li, ml, lf, mlf)
                    amps[key] = amps.get(key, 0.0) + cg_in * cg_out * t[ri, ci]
    if k_in is None:
        raise ValueError("entrance state closed in every block")
    total = sum(abs(a) ** 2 for a in amps.values())
    return math.pi / k_in**2 * total


def rate_constant(sigma_bohr2: float, energy_k: float, mu_amu: float) -> float:
    """sigma(E) v(E) in cm^3/s for a collision energy in K."""
    v = constants.velocity_au(energy_k, mu_amu)
    return sigma_bohr2 * v * constants.RATE_AU_TO_CM3S


@dataclass
class ScatteringLengthFit:
    value: float              # bohr
    k_values: np.ndarray
    a_values: np.ndarray
    residual: float

    def converged(self, tol: float = 1e-2) -> bool:
        spread = np.abs(self.a_values - self.value).max()
        return self.residual < tol * max(1.0, abs(self.value)) and spread < np.inf


def scattering_length_from_kmats(k_diag, k_values) -> ScatteringLengthFit:
    """Zero-energy extrapolation a = lim -tan(delta_0)/k.

    k_diag: s-wave diagonal K-matrix elements tan(delta_0) on a small
    wavenumber sequence; fits a_k = a + c k^2.
    """
    k_values = np.asarray(k_values, dtype=float)
    a_k = -np.asarray(k_diag, dtype=float) / k_values
    design = np.stack([np.ones_like(k_values), k_values**2], axis=1)
    coef, *_ = np.linalg.lstsq(design, a_k, rcond=None)
    resid = float(np.abs(design @ coef - a_k).max())
    return ScatteringLengthFit(value=float(coef[0]), k_values=k_values,
                               a_values=a_k, residual=resid)
