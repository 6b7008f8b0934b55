"""Atom-diatom interaction surface and its vibrational averaging.

The surface is a short even-Legendre expansion in the Jacobi angle,
V(R, r, theta) = sum_l V_l(R, r) P_l(cos theta), each component combining
an exponential repulsion with a damped R^-6 dispersion term:

    V_l(R, r) = A_l(r) exp(-b R) - f6(b R) C6_l(r) / R^6,

with linear r-dependence of both strength functions around the diatom
reference separation.  f6 is the standard incomplete-gamma damping factor.
A smooth sigmoid rolloff centred far outside the physically relevant range
(default 200 bohr) takes every component below 1e-12 K at the matching
radius; its effect on observables is orders of magnitude under the
tolerances used here (the R^-6 tail beyond 200 bohr shifts the scattering
length by ~5e-3 bohr).
"""
import dataclasses
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares, minimize_scalar
from scipy.special import eval_legendre, gammainc, roots_legendre


def damping_f6(x):
    """Tang-Toennies damping 1 - exp(-x) sum_{k<=6} x^k/k!.

    Equal to the regularized lower incomplete gamma function P(7, x),
    which is stable for small x where the direct form cancels.
    """
    return gammainc(7.0, np.asarray(x, dtype=float))


@dataclass(frozen=True)
class LegendreTerm:
    """One even-Legendre component of the surface; energies in K, lengths in bohr."""
    order: int
    amp: float          # repulsion prefactor A_l(r_ref)
    amp_slope: float    # d ln A_l / dr
    decay: float        # exponential range b
    c6: float           # dispersion coefficient C6_l(r_ref)
    c6_slope: float     # d ln C6_l / dr


@dataclass(frozen=True)
class InteractionSurface:
    terms: tuple
    r_ref: float = 2.282
    lambda_scale: float = 1.0
    roll_r: float = 200.0
    roll_w: float = 8.0

    def orders(self):
        return tuple(t.order for t in self.terms)


def _rolloff(surface: InteractionSurface, big_r):
    return 1.0 / (1.0 + np.exp((np.asarray(big_r, dtype=float) - surface.roll_r)
                               / surface.roll_w))


def _term_strengths(term: LegendreTerm, surface: InteractionSurface, r):
    dr = np.asarray(r, dtype=float) - surface.r_ref
    return term.amp * (1.0 + term.amp_slope * dr), term.c6 * (1.0 + term.c6_slope * dr)


def radial_component(surface: InteractionSurface, term: LegendreTerm, big_r, r):
    """V_l(R, r) for one component, including the global lambda scaling."""
    big_r = np.asarray(big_r, dtype=float)
    amp, c6 = _term_strengths(term, surface, r)
    roll = _rolloff(surface, big_r)
    rep = np.exp(-term.decay * big_r)
    disp = damping_f6(term.decay * big_r) / big_r**6
    return surface.lambda_scale * roll * (amp * rep - c6 * disp)


def evaluate_surface(surface: InteractionSurface, big_r, r, theta):
    """V(R, r, theta) in K; accepts broadcastable array arguments."""
    big_r, r, theta = np.broadcast_arrays(
        np.asarray(big_r, dtype=float), np.asarray(r, dtype=float),
        np.asarray(theta, dtype=float))
    out = np.zeros(big_r.shape)
    x = np.cos(theta)
    for term in surface.terms:
        out = out + radial_component(surface, term, big_r, r) * eval_legendre(term.order, x)
    return out


def scale(surface: InteractionSurface, factor: float) -> InteractionSurface:
    """New surface with the overall scaling multiplied by `factor`."""
    if factor <= 0:
        raise ValueError("surface scaling must be positive")
    return dataclasses.replace(surface, lambda_scale=surface.lambda_scale * factor)


def default_surface() -> InteractionSurface:
    """Calibrated model surface.

    The isotropic strength and dispersion were tuned (see
    scripts/calibrate_surface.py) so the unscaled surface has a global
    minimum of exactly -40 K at the T-shaped geometry and the full coupled
    calculation gives an s-wave scattering length of -2.9 bohr.  The
    anisotropy ratios and the r-slopes are fixed model choices; the
    anisotropy is set so the lambda-scaled well picks up vibrational
    Feshbach states inside the 90-91 scan window.
    """
    amp0 = 1.36277599e9
    c60 = 2.71219951e6
    return InteractionSurface(
        terms=(
            LegendreTerm(order=0, amp=amp0, amp_slope=0.4,
                         decay=3.0, c6=c60, c6_slope=0.4),
            LegendreTerm(order=2, amp=0.5 * amp0, amp_slope=0.4,
                         decay=3.0, c6=0.10 * c60, c6_slope=0.4),
        ),
        r_ref=2.282,
    )


@dataclass
class RadialCoupling:
    """<chi_i | V_l(R, r) | chi_j> reduced to two quadrature coefficients."""
    order: int
    rep_coeff: float   # <A_l(r)>_ij
    disp_coeff: float  # <C6_l(r)>_ij
    decay: float


@dataclass
class CouplingTable:
    """Vibrationally averaged radial coupling functions U^l_ij(R).

    entries[(l, pair_i, pair_j)] with pair = (v, N) and pair_i <= pair_j.
    lambda_scale multiplies every evaluation; quad_drift records the worst
    relative change when the quadrature node count is doubled.
    """
    surface: InteractionSurface
    pairs: tuple
    entries: dict
    lambda_scale: float
    quad_drift: float

    def key(self, order, pair_i, pair_j):
        return (order, min(pair_i, pair_j), max(pair_i, pair_j))

    def evaluate(self, order, pair_i, pair_j, big_r):
        ent = self.entries.get(self.key(order, pair_i, pair_j))
        if ent is None:
            return np.zeros_like(np.asarray(big_r, dtype=float))
        return self._radial(ent, big_r)

    def _radial(self, ent: RadialCoupling, big_r):
        big_r = np.asarray(big_r, dtype=float)
        roll = _rolloff(self.surface, big_r)
        rep = np.exp(-ent.decay * big_r)
        disp = damping_f6(ent.decay * big_r) / big_r**6
        return self.lambda_scale * roll * (ent.rep_coeff * rep - ent.disp_coeff * disp)

    def scaled(self, factor: float) -> "CouplingTable":
        if factor <= 0:
            raise ValueError("surface scaling must be positive")
        return CouplingTable(surface=self.surface, pairs=self.pairs,
                             entries=self.entries,
                             lambda_scale=self.lambda_scale * factor,
                             quad_drift=self.quad_drift)

    def sample(self, big_r):
        """Stacked evaluation for the propagation kernel.

        Returns (keys, values) with values[t] = U_t over the grid.
        """
        keys = sorted(self.entries)
        vals = np.empty((len(keys), len(big_r)))
        for t, k in enumerate(keys):
            vals[t] = self._radial(self.entries[k], big_r)
        return keys, vals


def _sinc_interpolate(psi: np.ndarray, grid: np.ndarray, step: float,
                      x: np.ndarray) -> np.ndarray:
    """Band-limited interpolation of a DVR eigenvector off its grid."""
    arg = (x[:, None] - grid[None, :]) / step
    return np.sinc(arg) @ psi


def _pair_integrals(radial, vi, ni, vk, nk, surface, nodes, weights):
    """Quadrature of <chi | A_l(r) | chi'> and <chi | C6_l(r) | chi'>."""
    sol_i = radial[ni]
    sol_k = radial[nk]
    psi_i = _sinc_interpolate(sol_i.wavefunctions[vi], sol_i.r, sol_i.step, nodes)
    psi_k = _sinc_interpolate(sol_k.wavefunctions[vk], sol_k.r, sol_k.step, nodes)
    density = weights * psi_i * psi_k
    out = {}
    for term in surface.terms:
        amp, c6 = _term_strengths(term, surface, nodes)
        out[term.order] = (float(density @ amp), float(density @ c6))
    return out


def vibrational_average(surface: InteractionSurface, pairs: Sequence[tuple],
                        radial: dict | None = None, n_quad: int = 100,
                        drift_tol: float = 1e-8) -> CouplingTable:
    """Average the surface over vibrational wavefunctions.

    pairs lists the (v, N) states to couple.  radial maps N to a
    RadialSolution; passing None selects the rigid rotor, where every
    diagonal entry is V_l(R, r_ref) and off-diagonal (v, N)-changing
    entries vanish.  Gauss-Legendre quadrature over the common radial
    domain, with an n -> 2n node-doubling check recorded in quad_drift.
    """
    pairs = tuple(sorted(pairs))
    entries = {}
    drift = 0.0
    if radial is None:
        # rigid rotor: every channel shares the same point-like radial
        # state, so the radial factor is V_l(R, r_ref) for N-diagonal and
        # N-changing pairs alike (the anisotropy does all the mixing)
        for a, pi in enumerate(pairs):
            for pk in pairs[a:]:
                if pi[0] != pk[0]:
                    continue
                for term in surface.terms:
                    entries[(term.order, pi, pk)] = RadialCoupling(
                        order=term.order, rep_coeff=term.amp,
                        disp_coeff=term.c6, decay=term.decay)
    else:
        any_sol = next(iter(radial.values()))
        lo, hi = any_sol.r[0], any_sol.r[-1]

        def quad_rule(n):
            x, w = roots_legendre(n)
            return 0.5 * (hi + lo) + 0.5 * (hi - lo) * x, 0.5 * (hi - lo) * w

        nodes, weights = quad_rule(n_quad)
        nodes2, weights2 = quad_rule(2 * n_quad)
        raw = {}
        for a, pi in enumerate(pairs):
            for pk in pairs[a:]:
                vi, ni = pi
                vk, nk = pk
                coarse = _pair_integrals(radial, vi, ni, vk, nk, surface,
                                         nodes, weights)
                fine = _pair_integrals(radial, vi, ni, vk, nk, surface,
                                       nodes2, weights2)
                raw[(pi, pk)] = (coarse, fine)
        # drift is judged against the largest coupling of each order, not
        # entry by entry: orthogonality makes some off-diagonal integrals
        # exact zeros whose quadrature noise would swamp a relative test
        scale = {}
        for coarse, fine in raw.values():
            for order, (rep2, disp2) in fine.items():
                s_rep, s_disp = scale.get(order, (0.0, 0.0))
                scale[order] = (max(s_rep, abs(rep2)),
                                max(s_disp, abs(disp2)))
        for (pi, pk), (coarse, fine) in raw.items():
            for order, (rep, disp) in coarse.items():
                rep2, disp2 = fine[order]
                s_rep, s_disp = scale[order]
                drift = max(drift,
                            abs(rep - rep2) / max(s_rep, 1e-300),
                            abs(disp - disp2) / max(s_disp, 1e-300))
                term = next(t for t in surface.terms if t.order == order)
                entries[(order, pi, pk)] = RadialCoupling(
                    order=order, rep_coeff=rep2, disp_coeff=disp2,
                    decay=term.decay)
        if drift > drift_tol:
            raise ValueError(
                f"vibrational quadrature not converged: drift {drift:.2e}")
    return CouplingTable(surface=surface, pairs=pairs, entries=entries,
                         lambda_scale=surface.lambda_scale, quad_drift=drift)


_TABLE_ORDERS = (0, 2)


def write_surface_table(surface: InteractionSurface, path, big_r, r,
                        theta) -> None:
    """Sample the surface over a tensor grid into the plain-text format.

    Companion to load_surface_table; see there for the row layout.  Full
    17-digit floats so a write/load cycle reproduces the surface to
    rounding.
    """
    with open(path, "w") as fh:
        fh.write("# interaction surface samples\n")
        fh.write("# columns: R_bohr r_bohr theta_rad energy_K\n")
        fh.write(f"# r_ref = {surface.r_ref!r}\n")
        for rr in np.asarray(big_r, dtype=float):
            for rv in np.asarray(r, dtype=float):
                for th in np.asarray(theta, dtype=float):
                    val = float(evaluate_surface(surface, rr, rv, th))
                    fh.write(f"{rr:.16e} {rv:.16e} {th:.16e} {val:.16e}\n")


def _parse_table(path):
    rows = []
    directives = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                m = re.match(r"#\s*(\w+)\s*=\s*(\S+)", text)
                if m:
                    directives[m.group(1)] = float(m.group(2))
                continue
            parts = text.split()
            if len(parts) != 4:
                raise ValueError(
                    f"{path}:{ln}: expected 4 columns R r theta V, "
                    f"got {len(parts)}")
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise ValueError(f"{path}:{ln}: non-numeric entry") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return np.asarray(rows), directives


def _radial_basis(b, big_r):
    roll = _rolloff(_ROLL_REF, big_r)
    return np.column_stack([roll * np.exp(-b * big_r),
                            -roll * damping_f6(b * big_r) / big_r**6])


_ROLL_REF = InteractionSurface(terms=())


def _fit_radial(cells, comp, r_groups, path):
    """Fit one Legendre component to a(r) exp(-bR) - c(r) f6/R^6.

    Variable projection: for trial b the (a, c) per r value are a linear
    least-squares solve, and the scalar b is bracketed first, then the
    whole parameter vector is polished to machine precision.
    """
    def solve(b):
        sse = 0.0
        coef = []
        for _, idx in r_groups:
            phi = _radial_basis(b, cells[idx, 0])
            sol, _, rank, _ = np.linalg.lstsq(phi, comp[idx], rcond=None)
            if rank < 2:
                raise ValueError(f"{path}: R grid cannot separate the "
                                 "repulsion from the dispersion tail")
            coef.append(sol)
            resid = comp[idx] - phi @ sol
            sse += float(resid @ resid)
        return sse, coef

    coarse = minimize_scalar(lambda b: solve(b)[0], bounds=(0.2, 12.0),
                             method="bounded", options={"xatol": 1e-10})
    _, coef = solve(coarse.x)
    x0 = np.concatenate([[coarse.x]] + [c for c in coef])

    def residuals(x):
        out = []
        for g, (_, idx) in enumerate(r_groups):
            phi = _radial_basis(x[0], cells[idx, 0])
            out.append(comp[idx] - phi @ x[1 + 2 * g: 3 + 2 * g])
        return np.concatenate(out)

    fit = least_squares(residuals, x0, method="lm", xtol=1e-14, ftol=1e-14)
    return fit.x[0], fit.x[1:].reshape(len(r_groups), 2)


def _strength_line(r_vals, vals, r_ref):
    """(value at r_ref, log-slope) of a sampled linear strength function."""
    dr = np.asarray(r_vals) - r_ref
    if len(r_vals) == 1:
        return float(vals[0]), 0.0
    design = np.column_stack([np.ones_like(dr), dr])
    (v0, v1), *_ = np.linalg.lstsq(design, vals, rcond=None)
    return float(v0), float(v1 / v0) if v0 != 0.0 else 0.0


def load_surface_table(path, r_ref=None, fit_tol=1e-8) -> InteractionSurface:
    """Import a surface from a plain-text sample table.

    Row layout: four whitespace-separated columns R (bohr), r (bohr),
    theta (radians), V (K).  '#' starts a comment; a comment of the form
    '# r_ref = <value>' sets the expansion point of the r-dependence
    (an explicit r_ref argument wins, the fallback is 2.282; the choice
    only relabels the strengths, the surface itself is unchanged).  The
    grid must resolve the model: every (R, r) cell needs theta values
    separating Legendre orders 0 and 2, the R column must span the
    repulsive wall and the dispersion tail, and slopes in r require at
    least two distinct r values (with a single value they are set to 0).

    The samples are projected onto the even-Legendre components and each
    component fitted to the parametric radial form.  A residual above
    fit_tol relative to the largest sample raises ValueError, so data of
    an incompatible functional form is rejected rather than silently
    approximated.  Components below 1e-12 of the largest sample are
    dropped.  The returned surface has lambda_scale 1; any overall scaling
    baked into the samples is absorbed by the strengths.
    """
    data, directives = _parse_table(path)
    if r_ref is None:
        r_ref = directives.get("r_ref", 2.282)
    big_r, r, theta, v = data.T
    v_scale = float(np.max(np.abs(v)))
    if v_scale == 0.0:
        raise ValueError(f"{path}: all samples are zero")

    cells, inverse = np.unique(data[:, :2], axis=0, return_inverse=True)
    comps = np.empty((len(cells), len(_TABLE_ORDERS)))
    for c in range(len(cells)):
        sel = inverse == c
        design = np.column_stack([eval_legendre(l, np.cos(theta[sel]))
                                  for l in _TABLE_ORDERS])
        coef, _, rank, _ = np.linalg.lstsq(design, v[sel], rcond=None)
        if rank < len(_TABLE_ORDERS):
            raise ValueError(f"{path}: theta values cannot resolve Legendre "
                             f"orders {_TABLE_ORDERS}")
        comps[c] = coef

    r_vals = np.unique(cells[:, 1])
    r_groups = [(rv, np.nonzero(cells[:, 1] == rv)[0]) for rv in r_vals]
    terms = []
    for col, order in enumerate(_TABLE_ORDERS):
        if np.max(np.abs(comps[:, col])) <= 1e-12 * v_scale:
            continue
        decay, coef = _fit_radial(cells, comps[:, col], r_groups, path)
        amp, amp_slope = _strength_line(r_vals, coef[:, 0], r_ref)
        c6, c6_slope = _strength_line(r_vals, coef[:, 1], r_ref)
        terms.append(LegendreTerm(order=order, amp=amp, amp_slope=amp_slope,
                                  decay=decay, c6=c6, c6_slope=c6_slope))
    if not terms:
        raise ValueError(f"{path}: no resolvable Legendre components")

    fitted = InteractionSurface(terms=tuple(terms), r_ref=float(r_ref))
    resid = np.max(np.abs(evaluate_surface(fitted, big_r, r, theta) - v))
    if resid > fit_tol * v_scale:
        raise ValueError(
            f"{path}: samples do not match the even-Legendre "
            f"exponential-plus-dispersion form (relative residual "
            f"{resid / v_scale:.2e})")
    return fitted
