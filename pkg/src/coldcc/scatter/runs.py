"""High-level drivers: rate tables, model comparison, interaction scaling scans."""
import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import constants
from ..channels import ChannelBasis, CouplingMatrix, assemble_w, build_basis
from ..molecule import DiatomModel, MolecularLevels, default_diatom, molecular_levels
from ..pes import CouplingTable, InteractionSurface, default_surface, vibrational_average
from . import observables
from .bound import count_bound_states
from .grid import PropagationGrid
from .propagate import match, propagate


@dataclass
class Setup:
    """Everything needed to scatter at one model/scaling choice."""
    mode: str
    diatom: DiatomModel
    surface: InteractionSurface
    levels: MolecularLevels
    table: CouplingTable
    n_max_by_v: dict
    l_max: int
    manifold: str
    grid: PropagationGrid
    mu_collision_amu: float = constants.MU_COLLISION_AMU
    _cms: dict = field(default_factory=dict, repr=False)

    @property
    def h22mu(self) -> float:
        return constants.h22mu_kelvin(self.mu_collision_amu)

    def coupling(self, jtot: int, parity: int) -> CouplingMatrix:
        key = (jtot, parity)
        if key not in self._cms:
            basis = build_basis(jtot, parity, self.n_max_by_v, self.l_max,
                                self.manifold)
            self._cms[key] = assemble_w(basis, self.table, self.levels,
                                        self.h22mu)
        return self._cms[key]

    def scaled_to(self, lam: float) -> "Setup":
        """Same system with the interaction scaled to an absolute factor."""
        factor = lam / self.table.lambda_scale
        return dataclasses.replace(self, table=self.table.scaled(factor),
                                   _cms={})


def make_setup(mode: str = "vibrating", v_max: int = 1,
               surface: InteractionSurface | None = None,
               diatom: DiatomModel | None = None,
               n_max_by_v: dict | None = None, l_max: int = 8,
               manifold: str = "even",
               grid: PropagationGrid | None = None, n_quad: int = 100,
               radial_kwargs: dict | None = None,
               mu_collision_amu: float = constants.MU_COLLISION_AMU) -> Setup:
    """Build molecular levels, averaged couplings and caches for one model."""
    diatom = diatom if diatom is not None else default_diatom()
    surface = surface if surface is not None else default_surface()
    grid = grid if grid is not None else PropagationGrid()
    if mode == "rigid":
        v_max = 0
    caps = dict(n_max_by_v) if n_max_by_v else {0: 8, 1: 6}
    caps = {v: caps.get(v, max(caps.values())) for v in range(v_max + 1)}
    n_top = max(caps.values())
    levels = molecular_levels(diatom, mode=mode, n_max=n_top, v_max=v_max,
                              n_max_by_v=caps, radial_kwargs=radial_kwargs)
    pairs = sorted({p for blk in levels.blocks.values() for p in blk[0]})
    radial = levels.radial if mode == "vibrating" else None
    table = vibrational_average(surface, pairs, radial, n_quad=n_quad)
    return Setup(mode=mode, diatom=diatom, surface=surface, levels=levels,
                 table=table, n_max_by_v=caps, l_max=l_max, manifold=manifold,
                 grid=grid, mu_collision_amu=mu_collision_amu)


def solve_block(setup: Setup, jtot: int, parity: int, energies) -> list:
    """Propagate one (Jtot, parity) block over an energy batch."""
    cm = setup.coupling(jtot, parity)
    y = propagate(cm, setup.grid, energies)
    return [match(cm, y[i], float(e), setup.grid.r_max)
            for i, e in enumerate(np.atleast_1d(energies))]


def entrance_blocks(setup: Setup, entrance, jtot_max: int) -> list:
    """(Jtot, parity) blocks holding the entrance level with L <= l_max."""
    _, n, j = entrance[:3]
    seen = []
    for l in range(0, setup.l_max + 1):
        parity = (-1) ** (n + l)
        for jtot in range(abs(j - l), j + l + 1):
            if jtot > jtot_max:
                continue
            if (jtot, parity) not in seen:
                seen.append((jtot, parity))
    return sorted(seen)


def solve_all_blocks(setup: Setup, energies, entrance, jtot_max: int,
                     threads: int = 1) -> dict:
    """results[e_index] = list of ScatteringResult over all relevant blocks."""
    blocks = entrance_blocks(setup, entrance, jtot_max)
    energies = np.atleast_1d(np.asarray(energies, dtype=float))

    def run(block):
        jtot, parity = block
        return solve_block(setup, jtot, parity, energies)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_block = list(pool.map(run, blocks))
    else:
        per_block = [run(b) for b in blocks]
    return {i: [res[i] for res in per_block] for i in range(energies.size)}


@dataclass
class RateRow:
    energy: float
    exit_label: tuple      # (v, n, j, mj) or ("sum",) for total inelastic
    sigma_bohr2: float
    rate_cm3s: float
    kind: str              # elastic | inelastic | inelastic_sum


@dataclass
class RateTable:
    mode: str
    entrance: tuple
    rows: list
    max_unitarity_defect: float
    jtot_tail_fraction: float

    def lookup(self, energy: float, exit_label: tuple) -> RateRow:
        for row in self.rows:
            if row.exit_label == exit_label and math.isclose(row.energy, energy,
                                                             rel_tol=1e-12):
                return row
        raise KeyError((energy, exit_label))


def open_exit_states(setup: Setup, energy: float) -> list:
    """All (v, N, J) levels open at this total energy."""
    return [(v, n, j) for v, n, j, e in setup.levels.levels() if e < energy]


def rate_table(setup: Setup, energies, entrance=(0, 0, 1, 1),
               jtot_max: int = 8, threads: int = 1) -> RateTable:
    """Projection-resolved cross sections and rates from one entrance state.

    Elastic means the projection is preserved; every other open
    (v', N', J', M_J') exit is listed separately plus a summed row.
    """
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    results = solve_all_blocks(setup, energies, entrance, jtot_max, threads)
    mu = setup.mu_collision_amu
    rows = []
    worst_unit = 0.0
    tail = 0.0
    for i, e in enumerate(energies):
        res_list = results[i]
        worst_unit = max(worst_unit, *(r.unitarity_defect for r in res_list))
        sig_el = observables.sigma_m_resolved(res_list, entrance,
                                              tuple(entrance))
        rows.append(RateRow(energy=float(e), exit_label=tuple(entrance),
                            sigma_bohr2=sig_el,
                            rate_cm3s=observables.rate_constant(sig_el, float(e), mu),
                            kind="elastic"))
        total_inel = 0.0
        for (v, n, j) in open_exit_states(setup, float(e)):
            for mj in range(-j, j + 1):
                lab = (v, n, j, mj)
                if lab == tuple(entrance):
                    continue
                sig = observables.sigma_m_resolved(res_list, entrance, lab)
                total_inel += sig
                rows.append(RateRow(energy=float(e), exit_label=lab,
                                    sigma_bohr2=sig,
                                    rate_cm3s=observables.rate_constant(
                                        sig, float(e), mu),
                                    kind="inelastic"))
        rows.append(RateRow(energy=float(e), exit_label=("sum",),
                            sigma_bohr2=total_inel,
                            rate_cm3s=observables.rate_constant(
                                total_inel, float(e), mu),
                            kind="inelastic_sum"))
        tail = max(tail, _jtot_tail(res_list, entrance))
    return RateTable(mode=setup.mode, entrance=tuple(entrance), rows=rows,
                     max_unitarity_defect=worst_unit, jtot_tail_fraction=tail)


def _jtot_tail(res_list, entrance) -> float:
    """Fraction of the elastic sum carried by the largest Jtot present."""
    by_jtot = {}
    for res in res_list:
        cols = [i for i, ch in enumerate(res.channels)
                if (ch.v, ch.n, ch.j) == tuple(entrance[:3])]
        if not cols:
            continue
        t = res.t_matrix()
        val = (2 * res.jtot + 1) * float((np.abs(t[:, cols]) ** 2).sum())
        by_jtot[res.jtot] = by_jtot.get(res.jtot, 0.0) + val
    if not by_jtot:
        return 0.0
    total = sum(by_jtot.values())
    if total == 0.0:
        return 0.0
    return by_jtot[max(by_jtot)] / total


def scattering_length(setup: Setup, energies=(2.5e-7, 5e-7, 1e-6),
                      entrance=(0, 0, 1)) -> observables.ScatteringLengthFit:
    """Zero-energy s-wave scattering length of the entrance level, in bohr."""
    v, n, j = entrance
    parity = (-1) ** n
    results = solve_block(setup, jtot=j, parity=parity, energies=np.asarray(energies))
    k_diag = []
    k_vals = []
    for res in results:
        i = res.index(v, n, j, 0)
        k_diag.append(res.kmat[i, i])
        k_vals.append(res.k_open[i])
    return observables.scattering_length_from_kmats(k_diag, k_vals)


@dataclass
class CompareRow:
    energy: float
    exit_label: tuple
    kind: str
    sigma: dict     # variant name -> bohr^2
    rate: dict      # variant name -> cm^3/s


def compare_models(energies, entrance=(0, 0, 1, 1), jtot_max: int = 8,
                   surface: InteractionSurface | None = None,
                   diatom: DiatomModel | None = None,
                   grid: PropagationGrid | None = None,
                   n_max_by_v: dict | None = None, l_max: int = 8,
                   threads: int = 1, variants=("rigid", "vibrating-v0",
                                               "vibrating-v1"),
                   n_quad: int = 100,
                   mu_collision_amu: float = constants.MU_COLLISION_AMU) -> dict:
    """Rigid rotor against vibrationally averaged models, shared surface.

    vibrating-v0 keeps only the averaged v=0 couplings; vibrating-v1 adds
    closed vibrationally excited channels.
    """
    tables = {}
    for name in variants:
        if name == "rigid":
            st = make_setup(mode="rigid", surface=surface, diatom=diatom,
                            grid=grid, n_max_by_v=n_max_by_v, l_max=l_max,
                            n_quad=n_quad, mu_collision_amu=mu_collision_amu)
        else:
            v_max = int(name.rsplit("v", 1)[1])
            st = make_setup(mode="vibrating", v_max=v_max, surface=surface,
                            diatom=diatom, grid=grid, n_max_by_v=n_max_by_v,
                            l_max=l_max, n_quad=n_quad,
                            mu_collision_amu=mu_collision_amu)
        tables[name] = rate_table(st, energies, entrance, jtot_max, threads)
    rows = []
    ref = tables[variants[0]]
    for row in ref.rows:
        sig = {}
        rate = {}
        for name in variants:
            try:
                other = tables[name].lookup(row.energy, row.exit_label)
            except KeyError:
                # exit can sit just below threshold in one variant only
                sig[name] = float("nan")
                rate[name] = float("nan")
                continue
            sig[name] = other.sigma_bohr2
            rate[name] = other.rate_cm3s
        rows.append(CompareRow(energy=row.energy, exit_label=row.exit_label,
                               kind=row.kind, sigma=sig, rate=rate))
    return {"rows": rows, "tables": tables}


@dataclass
class ScanRow:
    lam: float
    model: str
    a_bohr: float
    sigma_elastic_bohr2: float
    rate_inelastic_cm3s: float
    resonance: bool = False
    n_bound: int = -1      # -1 when not counted at this point


def _detect_poles(lams, a_vals, magnitude: float = 50.0) -> list:
    """Indices i where a pole of a(lambda) sits between lams[i], lams[i+1].

    A crossing bound state sends a to +-infinity, so look for a sign flip
    with both neighbours large; slow background zero crossings have small
    |a| and are ignored.
    """
    hits = []
    for i in range(len(a_vals) - 1):
        if a_vals[i] * a_vals[i + 1] < 0 and min(abs(a_vals[i]),
                                                 abs(a_vals[i + 1])) > magnitude:
            hits.append(i)
    return hits


def _flag_jumps(vals, factor: float = 10.0) -> list:
    """Grid points where the magnitude jumps by more than `factor`."""
    flags = [False] * len(vals)
    for i in range(len(vals) - 1):
        lo, hi = sorted([abs(vals[i]), abs(vals[i + 1])])
        if lo > 0 and hi / lo > factor:
            flags[i] = flags[i + 1] = True
    return flags


def lambda_scan(lambdas, models=("rigid", "vibrating"), e_scan: float = 1e-6,
                entrance=(0, 0, 1, 1), surface=None, diatom=None, grid=None,
                n_max_by_v=None, l_max: int = 8, v_max: int = 1,
                count_bounds: str = "endpoints", bound_kwargs: dict | None = None,
                threads: int = 1, n_quad: int = 100,
                mu_collision_amu: float = constants.MU_COLLISION_AMU) -> dict:
    """Scattering observables along an interaction-scaling sweep.

    At micro-kelvin scan energies a single total-J block carries the flux,
    so only the entrance block is propagated per scaling value.  Bound
    states below the entrance threshold are counted at the sweep endpoints
    (or everywhere with count_bounds='all'); their difference counts every
    threshold crossing, including poles far too narrow for any feasible
    lambda grid to see in a(lambda).
    """
    lambdas = np.asarray(lambdas, dtype=float)
    v, n, j, _ = entrance
    parity = (-1) ** n
    e_seq = np.array([0.25, 0.5, 1.0]) * e_scan
    base = {}
    for model in models:
        base[model] = make_setup(mode=model, v_max=v_max, surface=surface,
                                 diatom=diatom, grid=grid,
                                 n_max_by_v=n_max_by_v, l_max=l_max,
                                 n_quad=n_quad,
                                 mu_collision_amu=mu_collision_amu)
    rows = []
    summary = {}
    for model in models:
        st0 = base[model]
        a_vals = []
        model_rows = []

        def run_one(lam):
            st = st0.scaled_to(float(lam))
            res_list = solve_block(st, j, parity, e_seq)
            defect = max(res.unitarity_defect for res in res_list)
            k_diag = []
            k_vals = []
            for res in res_list:
                i = res.index(v, n, j, 0)
                k_diag.append(res.kmat[i, i])
                k_vals.append(res.k_open[i])
            fit = observables.scattering_length_from_kmats(k_diag, k_vals)
            at_scan = res_list[-1]
            sig_el = observables.sigma_m_resolved([at_scan], entrance,
                                                  tuple(entrance))
            sig_inel = 0.0
            for (vv, nn, jj) in open_exit_states(st, e_scan):
                for mj in range(-jj, jj + 1):
                    lab = (vv, nn, jj, mj)
                    if lab == tuple(entrance):
                        continue
                    sig_inel += observables.sigma_m_resolved([at_scan],
                                                             entrance, lab)
            rate_inel = observables.rate_constant(sig_inel, e_scan,
                                                  st.mu_collision_amu)
            return fit.value, sig_el, rate_inel, st, defect

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                outs = list(pool.map(run_one, lambdas))
        else:
            outs = [run_one(lam) for lam in lambdas]
        worst_defect = max(out[4] for out in outs)
        for lam, (a, sig_el, rate_inel, st, _) in zip(lambdas, outs):
            a_vals.append(a)
            nb = -1
            if count_bounds == "all" or (
                    count_bounds == "endpoints" and lam in (lambdas[0], lambdas[-1])):
                nb = count_bound_states(st.coupling(j, parity),
                                        **(bound_kwargs or {}))
            model_rows.append(ScanRow(lam=float(lam), model=model, a_bohr=a,
                                      sigma_elastic_bohr2=sig_el,
                                      rate_inelastic_cm3s=rate_inel,
                                      n_bound=nb))
        pole_idx = _detect_poles(lambdas, a_vals)
        flags = _flag_jumps(a_vals)
        for i, flagged in enumerate(flags):
            model_rows[i].resonance = flagged
        for i in pole_idx:
            model_rows[i].resonance = True
            model_rows[i + 1].resonance = True
        counted = [r.n_bound for r in model_rows if r.n_bound >= 0]
        summary[model] = {
            "poles_detected": len(pole_idx),
            "pole_lambdas": [float(0.5 * (lambdas[i] + lambdas[i + 1]))
                             for i in pole_idx],
            "bound_first": counted[0] if counted else -1,
            "bound_last": counted[-1] if counted else -1,
            "max_unitarity_defect": worst_defect,
        }
        rows.extend(model_rows)
    return {"rows": rows, "summary": summary}
