"""Channel basis and coupling-matrix assembly.

Channels are |v N [J L] Jtot M> in Hund's case (b): the mechanical rotation
N couples with the spin S = 1 to J, which couples with the partial wave L
to the conserved total Jtot.  Parity (-1)^(N+L) is conserved, so each
(Jtot, parity) block propagates independently.

Two representations of the coupling matrix appear here.  The "nominal"
one keeps |v N J L> labels, where the R-independent spin-spin interaction
leaves constant off-diagonal blocks between N and N+-2 at the same (J, L).
The default working representation rotates those molecular blocks to their
eigenbasis once (an R-independent orthogonal transform that commutes with
the centrifugal term), which makes W(R) asymptotically diagonal as the
matching step requires; channels keep their dominant nominal label.
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .angmom import triangle, wigner3j, wigner6j
from .molecule import SPIN, MolecularLevels
from .pes import CouplingTable


@dataclass(frozen=True, order=True)
class Channel:
    v: int
    n: int
    j: int
    l: int

    def label(self) -> str:
        return f"v{self.v}n{self.n}j{self.j}l{self.l}"


@dataclass(frozen=True)
class ChannelBasis:
    jtot: int
    parity: int
    channels: tuple

    def __len__(self):
        return len(self.channels)

    def index(self, ch: Channel) -> int:
        return self.channels.index(ch)


def build_basis(jtot: int, parity: int, n_max_by_v: dict, l_max: int,
                manifold: str = "even") -> ChannelBasis:
    """Enumerate channels in canonical (v, N, J, L) order.

    n_max_by_v maps each retained v to its rotational cap; parity is the
    spectroscopic parity (-1)^(N+L), +1 or -1.
    """
    if parity not in (1, -1):
        raise ValueError("parity must be +1 or -1")
    if manifold not in ("even", "odd"):
        raise ValueError("manifold must be 'even' or 'odd'")
    start = 0 if manifold == "even" else 1
    chans = []
    for v in sorted(n_max_by_v):
        for n in range(start, n_max_by_v[v] + 1, 2):
            for j in range(abs(n - SPIN), n + SPIN + 1):
                for l in range(abs(jtot - j), jtot + j + 1):
                    if l > l_max:
                        continue
                    if (-1) ** (n + l) != parity:
                        continue
                    chans.append(Channel(v=v, n=n, j=j, l=l))
    chans.sort()
    return ChannelBasis(jtot=jtot, parity=parity, channels=tuple(chans))


@lru_cache(maxsize=None)
def recoupling_coeff(lam: int, jtot: int, n1: int, j1: int, l1: int,
                     n2: int, j2: int, l2: int) -> float:
    """Angular factor of <v' N' J' L'|P_lam(cos gamma)|v N J L> at fixed Jtot.

    P_lam(r.R) is the scalar product of Racah tensors on the rotor and
    orbital coordinates; two 6-j decouplings (L from J, then N from the
    spectator spin) give the closed form.  Phases are pinned by the
    direct angular-quadrature oracle in the test suite.
    """
    if not (triangle(n1, lam, n2) and triangle(l1, lam, l2)):
        return 0.0
    if (n1 + lam + n2) % 2 or (l1 + lam + l2) % 2:
        return 0.0
    if not (triangle(n1, SPIN, j1) and triangle(n2, SPIN, j2)):
        return 0.0
    if not (triangle(j1, l1, jtot) and triangle(j2, l2, jtot)):
        return 0.0
    # sign convention pinned against the angular-quadrature oracles in the
    # test suite; reduces to +1 on the diagonal at lam = 0 as P_0 requires
    phase = (-1.0) ** (jtot + SPIN + lam)
    dims = math.sqrt((2 * j1 + 1) * (2 * j2 + 1) * (2 * l1 + 1) * (2 * l2 + 1)
                     * (2 * n1 + 1) * (2 * n2 + 1))
    return (
        phase * dims
        * wigner6j(jtot, l2, j2, lam, j1, l1)
        * wigner6j(j2, n2, SPIN, n1, j1, lam)
        * wigner3j(l1, lam, l2, 0, 0, 0)
        * wigner3j(n1, lam, n2, 0, 0, 0)
    )


def potential_matrix_element(table: CouplingTable, jtot: int, ch1: Channel,
                             ch2: Channel, big_r) -> np.ndarray:
    """<ch1|V(R, r, theta)|ch2> in K at the given atom-diatom distances."""
    big_r = np.asarray(big_r, dtype=float)
    out = np.zeros(big_r.shape)
    for order in table.surface.orders():
        f = recoupling_coeff(order, jtot, ch1.n, ch1.j, ch1.l,
                             ch2.n, ch2.j, ch2.l)
        if f == 0.0:
            continue
        out = out + f * table.evaluate(order, (ch1.v, ch1.n), (ch2.v, ch2.n), big_r)
    return out


@dataclass
class CouplingMatrix:
    """Assembled W(R) for one (Jtot, parity) block.

    thresholds and the pattern stack live in the rotated (asymptotically
    diagonal) representation; `rotation` maps nominal to rotated,
    W_rot = O^T W_nom O with O orthogonal and block-diagonal over (J, L).
    """
    basis: ChannelBasis
    h22mu: float
    thresholds: np.ndarray        # (n,), K, relative to the entrance level
    centrifugal: np.ndarray       # (n,), K bohr^2; divide by R^2
    rotation: np.ndarray          # (n, n)
    nominal_const: np.ndarray     # (n, n) molecular part in nominal labels
    pattern_keys: tuple           # (order, pair_i, pair_j) per radial function
    patterns_nominal: np.ndarray  # (n_t, n, n) angular coefficients
    table: CouplingTable

    def __post_init__(self):
        self.patterns_rotated = np.einsum(
            "pi,tpq,qj->tij", self.rotation, self.patterns_nominal, self.rotation)

    @property
    def size(self) -> int:
        return len(self.basis)

    def radial_values(self, big_r) -> np.ndarray:
        """(n_t, n_pts) stack of the radial coupling functions."""
        big_r = np.asarray(big_r, dtype=float)
        vals = np.empty((len(self.pattern_keys), big_r.size))
        for t, (order, pi, pj) in enumerate(self.pattern_keys):
            vals[t] = self.table.evaluate(order, pi, pj, big_r)
        return vals

    def w_nominal(self, big_r: float) -> np.ndarray:
        u = self.radial_values(np.atleast_1d(big_r))[:, 0]
        w = self.nominal_const + np.tensordot(u, self.patterns_nominal, axes=1)
        w[np.diag_indices(self.size)] += self.centrifugal / float(big_r) ** 2
        return w

    def w(self, big_r: float) -> np.ndarray:
        u = self.radial_values(np.atleast_1d(big_r))[:, 0]
        w = np.diag(self.thresholds) + np.tensordot(u, self.patterns_rotated, axes=1)
        w[np.diag_indices(self.size)] += self.centrifugal / float(big_r) ** 2
        return w


def assemble_w(basis: ChannelBasis, table: CouplingTable,
               levels: MolecularLevels, h22mu: float) -> CouplingMatrix:
    """Couple the averaged surface and the molecular structure over a basis."""
    n = len(basis)
    chans = basis.channels
    nominal_const = np.zeros((n, n))
    rotation = np.zeros((n, n))
    thresholds = np.zeros(n)
    # molecular blocks mix N at fixed (v-set, J, L); lay them in channel order
    groups = {}
    for i, ch in enumerate(chans):
        groups.setdefault((ch.j, ch.l), []).append(i)
    for (j, l), idx in groups.items():
        pairs_here = [(chans[i].v, chans[i].n) for i in idx]
        blk_pairs, h_full, _, _, _ = levels.blocks[j]
        sel = [blk_pairs.index(p) for p in pairs_here]
        h_sub = h_full[np.ix_(sel, sel)] - levels.reference * np.eye(len(sel))
        evals, evecs = np.linalg.eigh(h_sub)
        # label eigenvectors by dominant nominal channel, keep channel order
        order = _dominant_order(evecs)
        for a, i in enumerate(idx):
            col = order.index(a)
            thresholds[i] = evals[col]
            for b, k in enumerate(idx):
                nominal_const[k, i] = h_sub[b, a]
                rotation[k, i] = evecs[b, col]
    centrifugal = np.array([h22mu * ch.l * (ch.l + 1) for ch in chans])

    keys = sorted(table.entries)
    patterns = []
    used_keys = []
    for order, pi, pj in keys:
        mat = np.zeros((n, n))
        hit = False
        for a, ca in enumerate(chans):
            for b, cb in enumerate(chans):
                pa, pb = (ca.v, ca.n), (cb.v, cb.n)
                if (min(pa, pb), max(pa, pb)) != (pi, pj):
                    continue
                f = recoupling_coeff(order, basis.jtot, ca.n, ca.j, ca.l,
                                     cb.n, cb.j, cb.l)
                if f != 0.0:
                    mat[a, b] = f
                    hit = True
        if hit:
            patterns.append(mat)
            used_keys.append((order, pi, pj))
    pat = np.array(patterns) if patterns else np.zeros((0, n, n))
    cm = CouplingMatrix(basis=basis, h22mu=h22mu, thresholds=thresholds,
                        centrifugal=centrifugal, rotation=rotation,
                        nominal_const=nominal_const,
                        pattern_keys=tuple(used_keys), patterns_nominal=pat,
                        table=table)
    return cm


def _dominant_order(evecs: np.ndarray) -> list:
    """Assign each eigenvector column a distinct dominant row index."""
    size = evecs.shape[0]
    order = [None] * size
    taken = set()
    cols = sorted(range(size), key=lambda c: -np.max(np.abs(evecs[:, c])))
    for c in cols:
        for row in np.argsort(-np.abs(evecs[:, c])):
            if int(row) not in taken:
                order[c] = int(row)
                taken.add(int(row))
                break
    return order


def adiabatic_curves(cm: CouplingMatrix, r_grid) -> dict:
    """Sorted eigenvalues of W(R); columns inherit asymptotic channel labels.

    The k-th curve connects to the k-th lowest threshold (plus centrifugal
    tail) at the outer end of the grid, which names the columns.
    """
    r_grid = np.asarray(r_grid, dtype=float)
    curves = np.empty((r_grid.size, cm.size))
    for i, r in enumerate(r_grid):
        curves[i] = np.linalg.eigvalsh(cm.w(float(r)))
    far = cm.thresholds + cm.centrifugal / r_grid[-1] ** 2
    label_order = np.argsort(far, kind="stable")
    labels = [cm.basis.channels[k].label() for k in label_order]
    return {"r": r_grid, "curves": curves, "labels": labels}
