"""S-matrix invariants: unitarity, symmetry, detailed balance, threshold laws.

Runs on reduced basis caps to stay fast; the invariants hold for any cap.
"""
import math

import numpy as np
import pytest
import scipy.constants as sc

from coldcc import constants
from coldcc.scatter import observables
from coldcc.scatter.runs import (entrance_blocks, make_setup, scattering_length,
                                 solve_block)

CAPS = {0: 4, 1: 2}


@pytest.fixture(scope="module")
def vib_setup():
    return make_setup(mode="vibrating", v_max=1, n_max_by_v=CAPS, l_max=4)


@pytest.fixture(scope="module")
def rigid_setup():
    return make_setup(mode="rigid", n_max_by_v=CAPS, l_max=4)


def _level_energy(setup, v, n, j):
    for vv, nn, jj, e in setup.levels.levels():
        if (vv, nn, jj) == (v, n, j):
            return e
    raise KeyError((v, n, j))


def _solve_blocks(setup, energies, jtot_max=3):
    out = {i: [] for i in range(len(energies))}
    for jtot, parity in entrance_blocks(setup, (0, 0, 1), jtot_max):
        results = solve_block(setup, jtot, parity, np.asarray(energies))
        for i, res in enumerate(results):
            out[i].append(res)
    return out


@pytest.mark.parametrize("model", ["rigid", "vibrating"])
def test_s_matrix_unitary_and_symmetric(model, rigid_setup, vib_setup):
    setup = rigid_setup if model == "rigid" else vib_setup
    energies = [1e-6, 1e-3, 0.1, 1.0, 10.0, 15.0]
    for res_list in _solve_blocks(setup, energies, jtot_max=2).values():
        for res in res_list:
            s = res.smat
            eye = np.eye(s.shape[0])
            assert np.abs(s.conj().T @ s - eye).max() < 1e-8
            assert np.abs(s - s.T).max() < 1e-8
            # pre-symmetrization defect of the matched K matrix
            assert res.k_symmetry_defect < 1e-8
            assert res.unitarity_defect < 1e-8


def test_detailed_balance(vib_setup):
    energy = 15.0
    res_list = _solve_blocks(vib_setup, [energy], jtot_max=3)[0]
    k_in = None
    k_out = {}
    for res in res_list:
        for i, ch in enumerate(res.channels):
            if (ch.v, ch.n, ch.j) == (0, 0, 1):
                k_in = res.k_open[i]
            if ch.v == 0 and ch.n == 2:
                k_out[ch.j] = res.k_open[i]
    for jf in (1, 2, 3):
        fwd = observables.sigma_state_to_state(res_list, (0, 0, 1), (0, 2, jf))
        rev = observables.sigma_state_to_state(res_list, (0, 2, jf), (0, 0, 1))
        lhs = 3 * k_in**2 * fwd
        rhs = (2 * jf + 1) * k_out[jf] ** 2 * rev
        assert lhs == pytest.approx(rhs, rel=1e-6)


def test_m_resolved_sums_to_state_to_state(vib_setup):
    res_list = _solve_blocks(vib_setup, [15.0], jtot_max=3)[0]
    for exit_state in [(0, 0, 1), (0, 2, 1), (0, 2, 3)]:
        ref = observables.sigma_state_to_state(res_list, (0, 0, 1), exit_state)
        jf = exit_state[2]
        total = 0.0
        for mi in (-1, 0, 1):
            for mf in range(-jf, jf + 1):
                total += observables.sigma_m_resolved(
                    res_list, (0, 0, 1, mi), exit_state + (mf,))
        assert total / 3.0 == pytest.approx(ref, rel=1e-8)


def test_elastic_cross_section_flat_at_zero_energy(vib_setup):
    energies = [1e-6, 1e-5, 1e-4]
    results = solve_block(vib_setup, 1, 1, np.asarray(energies))
    sig = [observables.sigma_m_resolved([r], (0, 0, 1, 1), (0, 0, 1, 1))
           for r in results]
    assert max(sig) / min(sig) - 1.0 < 0.05
    a = scattering_length(vib_setup).value
    assert sig[0] == pytest.approx(4.0 * math.pi * a * a, rel=0.05)


def test_exothermic_rate_flat_at_zero_energy(vib_setup):
    # entrance on the excited rotational level: sigma ~ 1/k makes the
    # quenching rate approach a constant
    thr = _level_energy(vib_setup, 0, 2, 1)
    rates = []
    for e_coll in (1e-6, 1e-5, 1e-4):
        res = solve_block(vib_setup, 1, 1, np.array([thr + e_coll]))[0]
        sig = sum(observables.sigma_m_resolved([res], (0, 2, 1, 1), (0, 0, 1, mf))
                  for mf in (-1, 0, 1))
        rates.append(observables.rate_constant(sig, e_coll,
                                               vib_setup.mu_collision_amu))
    assert max(rates) / min(rates) - 1.0 < 0.05


def test_rate_constant_against_si_constants():
    sigma_bohr2, energy_k, mu_amu = 105.3, 2.4e-3, 2.666
    e_joule = energy_k * sc.k
    mu_kg = mu_amu * sc.atomic_mass
    v_cm_s = math.sqrt(2.0 * e_joule / mu_kg) * 100.0
    sigma_cm2 = sigma_bohr2 * (sc.physical_constants["Bohr radius"][0] * 100.0) ** 2
    expected = sigma_cm2 * v_cm_s
    got = observables.rate_constant(sigma_bohr2, energy_k, mu_amu)
    assert got == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("energy", [1e-3, 1.0])
def test_rates_stable_under_step_halving(vib_setup, energy):
    import dataclasses
    halved = dataclasses.replace(vib_setup, grid=vib_setup.grid.halved(),
                                 _cms=dict(vib_setup._cms))
    vals = {}
    for name, st in (("default", vib_setup), ("halved", halved)):
        res = solve_block(st, 1, 1, np.array([energy]))[0]
        sig_el = observables.sigma_m_resolved([res], (0, 0, 1, 1), (0, 0, 1, 1))
        vals[name] = observables.rate_constant(sig_el, energy,
                                               st.mu_collision_amu)
    assert vals["halved"] == pytest.approx(vals["default"], rel=1e-2)


def test_scattering_length_stable_under_longer_grid(vib_setup):
    import dataclasses
    longer = dataclasses.replace(vib_setup, grid=vib_setup.grid.extended(600.0),
                                 _cms=dict(vib_setup._cms))
    a0 = scattering_length(vib_setup).value
    a1 = scattering_length(longer).value
    assert a1 == pytest.approx(a0, rel=1e-2)
