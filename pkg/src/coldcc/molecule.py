"""Diatomic model: vibration, rotation and triplet fine structure.

The diatom is a closed-shell-nuclei homonuclear molecule in a 3-Sigma
electronic state, so only one rotational manifold (even N here) exists and
every coupled angular momentum is an integer.  Hund's case (b) coupling
N + S = J is used throughout.

Energy zero convention: radial eigenvalues are measured from the potential
asymptote (bound levels are negative); `molecular_levels` shifts everything
so the lowest (v=0, N=0, J=1) level sits at zero.
"""
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from . import constants
from .angmom import clebsch_gordan, triangle

SPIN = 1  # electronic spin of the 3-Sigma state


@dataclass(frozen=True)
class FineStructureConstants:
    """Spin-spin and spin-rotation constants in kelvin.

    Model values: small compared to the rotational constant so that N
    remains a good nominal label (channel mixing stays perturbative).
    """
    lambda_ss: float = 0.2856
    gamma_sr: float = -0.00121


@dataclass(frozen=True)
class MorsePotential:
    """V(r) = D (1 - exp(-a (r - r_eq)))^2 - D, in kelvin and bohr."""
    depth: float
    a: float
    r_eq: float

    def __call__(self, r):
        u = np.exp(-self.a * (np.asarray(r, dtype=float) - self.r_eq))
        return self.depth * ((1.0 - u) ** 2 - 1.0)

    def analytic_levels(self, mu_amu: float, n_levels: int) -> np.ndarray:
        """Exact Morse eigenvalues E_v = -D + w(v+1/2) - x(v+1/2)^2."""
        h22mu = constants.h22mu_kelvin(mu_amu)
        omega = 2.0 * self.a * math.sqrt(self.depth * h22mu)
        x = self.a**2 * h22mu
        v = np.arange(n_levels) + 0.5
        return -self.depth + omega * v - x * v**2


@dataclass(frozen=True)
class TabulatedPotential:
    """Cubic-spline interpolation of sampled V(r); clamped to the table range."""
    r: tuple
    v: tuple
    r_eq: float

    def __call__(self, r):
        spline = _tab_spline(self.r, self.v)
        rr = np.clip(np.asarray(r, dtype=float), self.r[0], self.r[-1])
        return spline(rr)


@lru_cache(maxsize=8)
def _tab_spline(r: tuple, v: tuple):
    return CubicSpline(np.array(r), np.array(v))


def calibrated_morse(gap: float, zpe: float, mu_amu: float, r_eq: float) -> MorsePotential:
    """Morse parameters from the v=0->1 spacing and the zero-point energy.

    With E_v = -D + w(v+1/2) - x(v+1/2)^2 the two targets give
    x = (4/3)(zpe - gap/2), w = gap + 2x, D = w^2/(4x); the anharmonicity
    x = a^2 hbar^2/(2 mu) then fixes the range parameter a.
    """
    x = (4.0 / 3.0) * (zpe - gap / 2.0)
    if x <= 0:
        raise ValueError("zero-point energy must exceed half the 0->1 gap")
    omega = gap + 2.0 * x
    depth = omega**2 / (4.0 * x)
    a = math.sqrt(x / constants.h22mu_kelvin(mu_amu))
    return MorsePotential(depth=depth, a=a, r_eq=r_eq)


@dataclass(frozen=True)
class DiatomModel:
    potential: Callable
    fine_structure: FineStructureConstants
    mu_amu: float = constants.MU_DIATOM_AMU
    r_eq: float = 2.282

    @property
    def h22mu(self) -> float:
        return constants.h22mu_kelvin(self.mu_amu)

    @property
    def rotational_b(self) -> float:
        """Rigid-rotor constant hbar^2/(2 mu r_eq^2) in K."""
        return self.h22mu / self.r_eq**2


def default_diatom(fine_structure: FineStructureConstants | None = None) -> DiatomModel:
    fs = fine_structure if fine_structure is not None else FineStructureConstants()
    # Morse minimum sits slightly inside the frozen-geometry radius so that
    # the vibrationally averaged v=0 rotational constant <h^2/2mu r^2> equals
    # h^2/(2 mu r_eq^2) exactly; rigid and vibrating thresholds then agree
    # to well below the fine-structure scale
    pot = calibrated_morse(gap=2175.0, zpe=1100.0,
                           mu_amu=constants.MU_DIATOM_AMU, r_eq=2.27613814)
    return DiatomModel(potential=pot, fine_structure=fs, r_eq=2.282)


@dataclass
class RadialSolution:
    """Vibrational eigenstates of one (N) centrifugal branch on a shared grid."""
    n_rot: int
    r: np.ndarray
    energies: np.ndarray          # (n_levels,), K, relative to the asymptote
    wavefunctions: np.ndarray     # (n_levels, n_points), sum psi^2 h = 1
    step: float

    def node_counts(self) -> list:
        counts = []
        for psi in self.wavefunctions:
            big = np.abs(psi) > 1e-6 * np.abs(psi).max()
            sgn = np.sign(psi[big])
            counts.append(int(np.sum(sgn[1:] * sgn[:-1] < 0)))
        return counts


def solve_radial(model: DiatomModel, n_rot: int = 0, n_levels: int = 4,
                 r_range: tuple = (1.5, 3.8), n_points: int = 700) -> RadialSolution:
    """Bound vibrational levels by sinc-DVR diagonalization.

    Uniform-grid sinc (Colbert-Miller) kinetic matrix plus the diagonal
    potential and centrifugal term; converges exponentially in n_points for
    smooth potentials, unlike low-order finite differences or shooting.
    """
    if n_rot < 0 or n_points < 50:
        raise ValueError("need n_rot >= 0 and a reasonable grid")
    r = np.linspace(r_range[0], r_range[1], n_points)
    h = r[1] - r[0]
    h22mu = model.h22mu
    idx = np.arange(n_points)
    diff = idx[:, None] - idx[None, :]
    with np.errstate(divide="ignore"):
        kin = 2.0 / diff.astype(float) ** 2
    kin[diff == 0] = math.pi**2 / 3.0
    kin *= (h22mu / h**2) * (-1.0) ** diff
    ham = kin + np.diag(model.potential(r) + h22mu * n_rot * (n_rot + 1) / r**2)
    evals, evecs = np.linalg.eigh(ham)
    bound = evals < 0.0
    keep = min(n_levels, int(bound.sum()))
    if keep < n_levels:
        raise ValueError(f"only {keep} bound levels on this grid, wanted {n_levels}")
    psi = evecs[:, :n_levels].T / math.sqrt(h)
    # fix global sign: positive lobe at the inner edge
    for k in range(n_levels):
        first = np.argmax(np.abs(psi[k]) > 1e-3 * np.abs(psi[k]).max())
        if psi[k, first] < 0:
            psi[k] = -psi[k]
    return RadialSolution(n_rot=n_rot, r=r, energies=evals[:n_levels].copy(),
                          wavefunctions=psi, step=h)


def _spin_tensor2() -> list:
    """Second-rank tensor components T^2_q built from the S=1 matrices."""
    sz = np.diag([1.0, 0.0, -1.0])
    sp = np.zeros((3, 3))
    sp[0, 1] = sp[1, 2] = math.sqrt(2.0)
    sm = sp.T
    s2 = 2.0 * np.eye(3)
    t = [None] * 5  # q = -2 .. 2, index q+2
    t[4] = 0.5 * (sp @ sp)
    t[3] = -0.5 * (sz @ sp + sp @ sz)
    t[2] = (3.0 * sz @ sz - s2) / math.sqrt(6.0)
    t[1] = 0.5 * (sz @ sm + sm @ sz)
    t[0] = 0.5 * (sm @ sm)
    return t


_T2 = _spin_tensor2()


@lru_cache(maxsize=None)
def _c2_dot_t2(n_bra: int, n_ket: int, j: int) -> float:
    """<(N' S) J || C2(r) . T2(S,S) scalar product || (N S) J> at fixed J.

    Explicit magnetic-quantum-number construction in the uncoupled basis;
    no recoupling algebra, so the phases come out right by inspection.
    Independent of the projection M (checked in tests); evaluated at M = 0
    unless J = 0 forces nothing (J >= 0 always allows M = 0).
    """
    if not (triangle(n_bra, SPIN, j) and triangle(n_ket, SPIN, j)):
        return 0.0
    m_tot = 0
    c20 = clebsch_gordan(n_ket, 0, 2, 0, n_bra, 0) * math.sqrt(
        (2 * n_ket + 1) / (2 * n_bra + 1)
    )
    if c20 == 0.0:
        return 0.0
    total = 0.0
    for m_n in range(-n_ket, n_ket + 1):
        m_s = m_tot - m_n
        if abs(m_s) > SPIN:
            continue
        cg_ket = clebsch_gordan(n_ket, m_n, SPIN, m_s, j, m_tot)
        if cg_ket == 0.0:
            continue
        for q in range(-2, 3):
            m_np = m_n + q
            m_sp = m_s - q
            if abs(m_np) > n_bra or abs(m_sp) > SPIN:
                continue
            cg_bra = clebsch_gordan(n_bra, m_np, SPIN, m_sp, j, m_tot)
            if cg_bra == 0.0:
                continue
            # <N' m+q|C2_q|N m> via the Wigner-Eckart CG form
            ang = clebsch_gordan(n_ket, m_n, 2, q, n_bra, m_np) * c20
            spin = _T2[-q + 2][1 - m_sp, 1 - m_s]  # rows m_s = +1, 0, -1
            total += cg_bra * cg_ket * ang * ((-1.0) ** q) * spin
    return total


def spin_spin_element(fs: FineStructureConstants, n_bra: int, n_ket: int, j: int) -> float:
    """<N' S J|H_ss|N S J> with H_ss = (2/3) lambda sqrt(6) (C2 . T2)."""
    return (2.0 / 3.0) * fs.lambda_ss * math.sqrt(6.0) * _c2_dot_t2(n_bra, n_ket, j)


def spin_rotation_element(fs: FineStructureConstants, n: int, j: int) -> float:
    """Diagonal gamma N.S term, (gamma/2)[J(J+1) - N(N+1) - S(S+1)]."""
    return 0.5 * fs.gamma_sr * (j * (j + 1) - n * (n + 1) - SPIN * (SPIN + 1))


def molecular_block(model: DiatomModel, j: int, pairs: Sequence[tuple],
                    radial_energy: dict, overlaps: dict) -> np.ndarray:
    """Molecular Hamiltonian over (v, N) pairs at fixed J.

    radial_energy[(v, N)] carries vibration + rotation on an absolute scale;
    overlaps[((v, N), (v', N'))] are radial overlap integrals (identity
    within one centrifugal branch, slightly less than one across N branches).
    """
    fs = model.fine_structure
    size = len(pairs)
    h = np.zeros((size, size))
    for i, (vi, ni) in enumerate(pairs):
        h[i, i] = radial_energy[(vi, ni)] + spin_rotation_element(fs, ni, j) \
            + spin_spin_element(fs, ni, ni, j)
        for k in range(i + 1, size):
            vk, nk = pairs[k]
            if abs(ni - nk) != 2:
                continue
            ov = overlaps.get(((vi, ni), (vk, nk)))
            if ov is None:
                ov = overlaps.get(((vk, nk), (vi, ni)), 0.0)
            el = spin_spin_element(fs, ni, nk, j) * ov
            h[i, k] = el
            h[k, i] = el
    return h


@dataclass
class MolecularLevels:
    """Fine-structure-resolved thresholds plus the diagonalizing rotations.

    blocks[j] = (pairs, H, eigenvalues, eigenvectors, label_order) where
    label_order[col] is the nominal (v, N) assigned to each eigenvector by
    its dominant component.  Energies are relative to the (0, 0, J=1) level.
    """
    mode: str
    blocks: dict
    reference: float
    radial: dict = field(default_factory=dict)

    def energy(self, v: int, n: int, j: int) -> float:
        pairs, _, evals, _, order = self.blocks[j]
        for col, lab in enumerate(order):
            if lab == (v, n):
                return evals[col] - self.reference
        raise KeyError(f"no level (v={v}, N={n}, J={j})")

    def levels(self) -> list:
        out = []
        for j in sorted(self.blocks):
            _, _, evals, _, order = self.blocks[j]
            for col, (v, n) in enumerate(order):
                out.append((v, n, j, evals[col] - self.reference))
        out.sort()
        return out


def _assign_labels(pairs, evecs) -> list:
    """Map eigenvector columns to nominal (v, N) labels, bijectively."""
    size = len(pairs)
    order = [None] * size
    taken = set()
    # greedy by descending dominance keeps the map stable under weak mixing
    cols = sorted(range(size), key=lambda c: -np.max(np.abs(evecs[:, c])))
    for c in cols:
        for row in np.argsort(-np.abs(evecs[:, c])):
            if row not in taken:
                order[c] = pairs[int(row)]
                taken.add(int(row))
                break
    return order


def molecular_levels(model: DiatomModel, mode: str = "rigid", n_max: int = 8,
                     v_max: int = 0, n_max_by_v: dict | None = None,
                     radial_kwargs: dict | None = None) -> MolecularLevels:
    """Even-manifold level structure for both treatments of vibration.

    rigid: E(v=0, N) = B N(N+1) with B from the equilibrium geometry.
    vibrating: E(v, N) from the radial eigenproblem with the centrifugal
    term included, so the rotational constant is vibrationally averaged.
    """
    if mode not in ("rigid", "vibrating"):
        raise ValueError(f"unknown mode {mode!r}")
    caps = dict(n_max_by_v or {})
    v_list = range(v_max + 1) if mode == "vibrating" else (0,)
    pair_list = []
    for v in v_list:
        cap = min(n_max, caps.get(v, n_max))
        pair_list.extend((v, n) for n in range(0, cap + 1, 2))

    radial_energy = {}
    overlaps = {}
    radial = {}
    if mode == "rigid":
        b_rot = model.rotational_b
        for v, n in pair_list:
            radial_energy[(v, n)] = b_rot * n * (n + 1)
        for vi, ni in pair_list:
            for vk, nk in pair_list:
                if abs(ni - nk) == 2 and vi == vk:
                    overlaps[((vi, ni), (vk, nk))] = 1.0
    else:
        kw = dict(radial_kwargs or {})
        n_levels = max(v for v, _ in pair_list) + 2
        branches = sorted({n for _, n in pair_list})
        for n in branches:
            radial[n] = solve_radial(model, n_rot=n, n_levels=n_levels, **kw)
        for v, n in pair_list:
            radial_energy[(v, n)] = radial[n].energies[v]
        for vi, ni in pair_list:
            for vk, nk in pair_list:
                if abs(ni - nk) == 2:
                    psi_i = radial[ni].wavefunctions[vi]
                    psi_k = radial[nk].wavefunctions[vk]
                    overlaps[((vi, ni), (vk, nk))] = float(
                        psi_i @ psi_k * radial[ni].step
                    )

    n_present = sorted({n for _, n in pair_list})
    j_set = sorted({j for n in n_present for j in range(abs(n - 1), n + 2)})
    blocks = {}
    for j in j_set:
        pairs = [p for p in pair_list if triangle(p[1], SPIN, j)]
        if not pairs:
            continue
        h = molecular_block(model, j, pairs, radial_energy, overlaps)
        evals, evecs = np.linalg.eigh(h)
        order = _assign_labels(pairs, evecs)
        blocks[j] = (tuple(pairs), h, evals, evecs, order)

    lev = MolecularLevels(mode=mode, blocks=blocks, reference=0.0, radial=radial)
    lev.reference = lev.energy(0, 0, 1)
    return lev
