"""Channel basis, recoupling coefficients and coupling-matrix assembly."""
import itertools
import math

import numpy as np
import pytest
from scipy.special import eval_legendre, roots_legendre

from coldcc.channels import (
    Channel,
    adiabatic_curves,
    assemble_w,
    build_basis,
    potential_matrix_element,
    recoupling_coeff,
)
from coldcc.molecule import SPIN, default_diatom, molecular_levels
from coldcc.pes import default_surface, evaluate_surface, vibrational_average
from oracles import recoupling_4d, recoupling_oracle


def _nonzero_cases(jtot_values, n_values, l_max=5, lambdas=(0, 2)):
    for jtot in jtot_values:
        for n1, n2 in itertools.product(n_values, repeat=2):
            for lam in lambdas:
                for j1 in range(abs(n1 - SPIN), n1 + SPIN + 1):
                    for j2 in range(abs(n2 - SPIN), n2 + SPIN + 1):
                        for l1 in range(abs(jtot - j1), jtot + j1 + 1):
                            for l2 in range(abs(jtot - j2), jtot + j2 + 1):
                                if l1 > l_max or l2 > l_max:
                                    continue
                                if (-1) ** (n1 + l1) != (-1) ** (n2 + l2):
                                    continue
                                yield lam, jtot, n1, j1, l1, n2, j2, l2


def test_recoupling_matches_addition_theorem_oracle():
    """Every angular factor in the working basis against the projection sum.

    The oracle expands P_lam(rhat.Rhat) with the addition theorem, couples
    the state by explicit projection sums (sympy vector-coupling), and
    integrates the triple-harmonic overlaps numerically, sharing no code
    with the packaged closed form.  Tolerance 1e-10.
    """
    worst = 0.0
    count = 0
    for case in _nonzero_cases(jtot_values=(1,), n_values=(0, 2, 4)):
        lam, jtot, n1, j1, l1, n2, j2, l2 = case
        prod = recoupling_coeff(lam, jtot, n1, j1, l1, n2, j2, l2)
        orc = recoupling_oracle(lam, jtot, 0, n1, j1, l1, n2, j2, l2)
        worst = max(worst, abs(prod - orc))
        count += 1
    assert count > 300
    assert worst < 1e-10


def test_recoupling_other_jtot_and_odd_manifold():
    worst = 0.0
    for case in _nonzero_cases(jtot_values=(0, 2, 3), n_values=(0, 2, 4)):
        lam, jtot, n1, j1, l1, n2, j2, l2 = case
        prod = recoupling_coeff(lam, jtot, n1, j1, l1, n2, j2, l2)
        orc = recoupling_oracle(lam, jtot, 0, n1, j1, l1, n2, j2, l2)
        worst = max(worst, abs(prod - orc))
    for case in _nonzero_cases(jtot_values=(1, 2), n_values=(1, 3)):
        lam, jtot, n1, j1, l1, n2, j2, l2 = case
        prod = recoupling_coeff(lam, jtot, n1, j1, l1, n2, j2, l2)
        orc = recoupling_oracle(lam, jtot, 0, n1, j1, l1, n2, j2, l2)
        worst = max(worst, abs(prod - orc))
    assert worst < 1e-10


def test_recoupling_projection_independent():
    for mtot in (-1, 0, 1):
        assert recoupling_oracle(2, 1, mtot, 2, 2, 2, 2, 3, 2) == pytest.approx(
            recoupling_coeff(2, 1, 2, 2, 2, 2, 3, 2), abs=1e-12)
        assert recoupling_oracle(2, 1, mtot, 0, 1, 0, 2, 1, 2) == pytest.approx(
            recoupling_coeff(2, 1, 0, 1, 0, 2, 1, 2), abs=1e-12)


def test_recoupling_matches_literal_4d_quadrature():
    """Spot checks with no addition theorem at all: brute 4-D integration."""
    cases = [
        (0, 1, 0, 1, 0, 0, 1, 0),
        (2, 1, 0, 1, 0, 2, 1, 2),
        (2, 1, 2, 2, 2, 2, 3, 2),
        (2, 1, 2, 1, 2, 2, 2, 2),
        (2, 2, 2, 3, 1, 4, 3, 1),
    ]
    for lam, jtot, n1, j1, l1, n2, j2, l2 in cases:
        prod = recoupling_coeff(lam, jtot, n1, j1, l1, n2, j2, l2)
        lit = recoupling_4d(lam, jtot, min(jtot, 1), n1, j1, l1, n2, j2, l2)
        assert prod == pytest.approx(lit, abs=1e-12)


def test_lambda0_is_the_identity():
    for case in _nonzero_cases(jtot_values=(0, 1, 2), n_values=(0, 2, 4),
                               lambdas=(0,)):
        _, jtot, n1, j1, l1, n2, j2, l2 = case
        got = recoupling_coeff(0, jtot, n1, j1, l1, n2, j2, l2)
        want = 1.0 if (n1, j1, l1) == (n2, j2, l2) else 0.0
        assert got == pytest.approx(want, abs=1e-14)


def test_recoupling_symmetric_in_bra_ket():
    for case in _nonzero_cases(jtot_values=(1, 2), n_values=(0, 2, 4)):
        lam, jtot, n1, j1, l1, n2, j2, l2 = case
        a = recoupling_coeff(lam, jtot, n1, j1, l1, n2, j2, l2)
        b = recoupling_coeff(lam, jtot, n2, j2, l2, n1, j1, l1)
        assert a == pytest.approx(b, abs=1e-14)


def test_recoupling_selection_rules():
    # rotational triangle/parity violations
    assert recoupling_coeff(2, 1, 0, 1, 0, 4, 3, 2) == 0.0
    assert recoupling_coeff(1, 1, 0, 1, 0, 2, 1, 1) == 0.0  # odd N1+lam+N2
    # orbital parity violation at allowed N
    assert recoupling_coeff(2, 2, 2, 1, 1, 2, 1, 2) == 0.0
    # total-J triangle violation
    assert recoupling_coeff(0, 5, 0, 1, 0, 0, 1, 0) == 0.0


def test_build_basis_matches_bruteforce_enumeration():
    n_max_by_v = {0: 6, 1: 2}
    l_max = 4
    for jtot, parity in ((0, 1), (1, 1), (1, -1), (2, -1)):
        basis = build_basis(jtot, parity, n_max_by_v, l_max)
        expect = set()
        for v, cap in n_max_by_v.items():
            for n in range(0, cap + 1, 2):
                for j in range(0, 20):
                    if not (abs(n - SPIN) <= j <= n + SPIN):
                        continue
                    for l in range(0, l_max + 1):
                        if not (abs(jtot - j) <= l <= jtot + j):
                            continue
                        if (-1) ** (n + l) != parity:
                            continue
                        expect.add((v, n, j, l))
        got = {(c.v, c.n, c.j, c.l) for c in basis.channels}
        assert got == expect
        assert list(basis.channels) == sorted(basis.channels)
        for i, ch in enumerate(basis.channels):
            assert basis.index(ch) == i
    with pytest.raises(ValueError):
        build_basis(1, 0, n_max_by_v, l_max)
    with pytest.raises(ValueError):
        build_basis(1, 1, n_max_by_v, l_max, manifold="mixed")


@pytest.fixture(scope="module")
def rigid_block():
    model = default_diatom()
    levels = molecular_levels(model, mode="rigid", n_max=8)
    surf = default_surface()
    pairs = tuple((0, n) for n in range(0, 9, 2))
    table = vibrational_average(surf, pairs, radial=None)
    basis = build_basis(1, 1, {0: 8}, l_max=7)
    cm = assemble_w(basis, table, levels,
                    h22mu=__import__("coldcc.constants", fromlist=["x"])
                    .h22mu_kelvin(__import__("coldcc.constants",
                                             fromlist=["x"]).MU_COLLISION_AMU))
    return cm, levels


def test_w_is_asymptotically_diagonal(rigid_block):
    cm, _ = rigid_block
    w = cm.w(450.0)
    off = w - np.diag(np.diag(w))
    assert np.max(np.abs(off)) < 1e-10
    want = cm.thresholds + cm.centrifugal / 450.0**2
    assert np.allclose(np.diag(w), want, atol=1e-10)


def test_w_symmetric_and_rotation_orthogonal(rigid_block):
    cm, _ = rigid_block
    assert np.allclose(cm.rotation.T @ cm.rotation, np.eye(cm.size), atol=1e-12)
    for big_r in (4.3, 5.5, 8.0, 20.0):
        w = cm.w(big_r)
        assert np.allclose(w, w.T, atol=1e-9 * np.max(np.abs(w)))


def test_rotated_and_nominal_representations_agree(rigid_block):
    cm, _ = rigid_block
    for big_r in (4.3, 6.0, 11.0, 60.0):
        ev_rot = np.linalg.eigvalsh(cm.w(big_r))
        ev_nom = np.linalg.eigvalsh(cm.w_nominal(big_r))
        scale_ref = max(1.0, np.max(np.abs(ev_nom)))
        assert np.allclose(ev_rot, ev_nom, atol=1e-9 * scale_ref)


def test_thresholds_agree_with_molecular_levels(rigid_block):
    cm, levels = rigid_block
    for i, ch in enumerate(cm.basis.channels):
        assert cm.thresholds[i] == pytest.approx(
            levels.energy(ch.v, ch.n, ch.j), abs=1e-10)


def test_entrance_channel_threshold_is_zero(rigid_block):
    cm, _ = rigid_block
    idx = [i for i, ch in enumerate(cm.basis.channels)
           if (ch.v, ch.n, ch.j, ch.l) == (0, 0, 1, 0)]
    assert len(idx) == 1
    assert cm.thresholds[idx[0]] == pytest.approx(0.0, abs=1e-10)


def test_potential_element_against_surface_projection(rigid_block):
    """Cross-module check: assembled element vs direct angular projection.

    Projects the raw surface onto Legendre components by quadrature and
    contracts with oracle recoupling factors, touching neither the packaged
    coupling table radial form nor the packaged angular closed form.
    """
    cm, _ = rigid_block
    surf = cm.table.surface
    nodes, weights = roots_legendre(24)
    basis = cm.basis
    big_r = 6.5
    v_theta = evaluate_surface(surf, big_r, surf.r_ref, np.arccos(nodes))
    comps = {lam: (2 * lam + 1) / 2.0 * float(np.sum(
        weights * v_theta * eval_legendre(lam, nodes))) for lam in (0, 2)}
    pairs = [(0, 3), (0, 0), (3, 7), (2, 5)]
    for a, b in pairs:
        ch1, ch2 = basis.channels[a], basis.channels[b]
        got = float(potential_matrix_element(cm.table, basis.jtot, ch1, ch2,
                                             big_r))
        want = sum(comps[lam] * recoupling_oracle(
            lam, basis.jtot, 0, ch1.n, ch1.j, ch1.l, ch2.n, ch2.j, ch2.l)
            for lam in (0, 2))
        assert got == pytest.approx(want, rel=1e-9, abs=1e-12)


def test_adiabatic_curves_structure(rigid_block):
    cm, _ = rigid_block
    grid = np.linspace(4.2, 150.0, 400)
    out = adiabatic_curves(cm, grid)
    curves = out["curves"]
    assert curves.shape == (grid.size, cm.size)
    assert sorted(out["labels"]) == sorted(c.label() for c in cm.basis.channels)
    # rows ascend (eigvalsh order), inner wall strongly repulsive,
    # outer end pinned to thresholds + centrifugal tails
    assert np.all(np.diff(curves, axis=1) >= -1e-9)
    assert np.min(curves[0]) > 1000.0
    far = np.sort(cm.thresholds + cm.centrifugal / grid[-1] ** 2)
    assert np.allclose(curves[-1], far, atol=1e-5)
    # the lowest adiabat shows the van der Waals well
    assert curves[:, 0].min() < -20.0
