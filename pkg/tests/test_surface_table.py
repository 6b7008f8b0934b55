"""Round-trip and rejection tests for the sampled-surface table import."""
import numpy as np
import pytest

from coldcc.config import DEFAULTS, build_surface, load_config
from coldcc.pes import (InteractionSurface, LegendreTerm, default_surface,
                        evaluate_surface, load_surface_table,
                        write_surface_table)

R_GRID = np.geomspace(4.1, 40.0, 20)
R_VIB = np.array([2.082, 2.282, 2.482])
THETA = np.array([0.0, np.pi / 4.0, np.pi / 2.0])


@pytest.fixture(scope="module")
def table_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("pes") / "surface.dat"
    write_surface_table(default_surface(), path, R_GRID, R_VIB, THETA)
    return path


def test_round_trip_parameters(table_path):
    ref = default_surface()
    got = load_surface_table(table_path)
    assert got.r_ref == ref.r_ref
    assert got.lambda_scale == 1.0
    assert got.orders() == ref.orders()
    for t_got, t_ref in zip(got.terms, ref.terms):
        assert t_got.amp == pytest.approx(t_ref.amp, rel=1e-8)
        assert t_got.c6 == pytest.approx(t_ref.c6, rel=1e-8)
        assert t_got.decay == pytest.approx(t_ref.decay, rel=1e-10)
        assert t_got.amp_slope == pytest.approx(t_ref.amp_slope, abs=1e-8)
        assert t_got.c6_slope == pytest.approx(t_ref.c6_slope, abs=1e-8)


def test_round_trip_values_off_grid(table_path):
    # probe points deliberately between the tabulated ones
    ref = default_surface()
    got = load_surface_table(table_path)
    rng = np.random.default_rng(7)
    big_r = rng.uniform(4.5, 35.0, 50)
    r = rng.uniform(2.1, 2.45, 50)
    theta = rng.uniform(0.0, np.pi, 50)
    v_ref = evaluate_surface(ref, big_r, r, theta)
    v_got = evaluate_surface(got, big_r, r, theta)
    scale = np.max(np.abs(v_ref))
    assert np.max(np.abs(v_got - v_ref)) < 1e-9 * scale


def test_single_r_column_gives_zero_slopes(tmp_path):
    path = tmp_path / "rigid.dat"
    write_surface_table(default_surface(), path, R_GRID, [2.282], THETA)
    got = load_surface_table(path)
    for term, ref in zip(got.terms, default_surface().terms):
        assert term.amp_slope == 0.0
        assert term.c6_slope == 0.0
        assert term.amp == pytest.approx(ref.amp, rel=1e-8)


def test_isotropic_table_drops_anisotropy(tmp_path):
    iso = InteractionSurface(terms=(default_surface().terms[0],))
    path = tmp_path / "iso.dat"
    write_surface_table(iso, path, R_GRID, R_VIB, THETA)
    got = load_surface_table(path)
    assert got.orders() == (0,)


def test_config_table_override(table_path, tmp_path):
    cfg_path = tmp_path / "run.yaml"
    cfg_path.write_text(
        f"surface:\n  table: {table_path}\n  lambda: 2.0\n")
    surf = build_surface(load_config(cfg_path))
    ref = default_surface()
    assert surf.lambda_scale == 2.0
    assert surf.terms[0].amp == pytest.approx(ref.terms[0].amp, rel=1e-8)
    probe = evaluate_surface(surf, 8.0, 2.282, 0.3)
    assert probe == pytest.approx(2.0 * evaluate_surface(ref, 8.0, 2.282, 0.3),
                                  rel=1e-9)
    assert build_surface(DEFAULTS).terms == ref.terms


def test_rejects_wrong_functional_form(tmp_path):
    path = tmp_path / "bad.dat"
    write_surface_table(default_surface(), path, R_GRID, R_VIB, THETA)
    lines = path.read_text().splitlines()
    cols = lines[40].split()
    cols[3] = f"{2.0 * float(cols[3]):.16e}"
    lines[40] = " ".join(cols)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValueError, match="residual"):
        load_surface_table(path)


def test_rejects_unresolvable_theta(tmp_path):
    path = tmp_path / "flat.dat"
    write_surface_table(default_surface(), path, R_GRID, R_VIB, [0.5])
    with pytest.raises(ValueError, match="Legendre"):
        load_surface_table(path)


def test_rejects_malformed_rows(tmp_path):
    path = tmp_path / "short.dat"
    path.write_text("# header\n1.0 2.0 3.0\n")
    with pytest.raises(ValueError, match="4 columns"):
        load_surface_table(path)
    path.write_text("# only comments\n")
    with pytest.raises(ValueError, match="no data"):
        load_surface_table(path)


def test_r_ref_directive_and_argument(tmp_path):
    path = tmp_path / "ref.dat"
    shifted = InteractionSurface(terms=default_surface().terms, r_ref=2.4)
    write_surface_table(shifted, path, R_GRID, R_VIB, THETA)
    assert load_surface_table(path).r_ref == 2.4
    # relabeling the expansion point must not change the surface itself
    relabeled = load_surface_table(path, r_ref=2.282)
    assert relabeled.r_ref == 2.282
    v_a = evaluate_surface(shifted, 9.0, 2.35, 1.1)
    v_b = evaluate_surface(relabeled, 9.0, 2.35, 1.1)
    assert v_b == pytest.approx(v_a, rel=1e-9)
