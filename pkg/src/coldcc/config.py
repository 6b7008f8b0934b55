"""Run configuration: reference defaults, YAML loading, validation, builders.

The commented reference text below is the single source of truth for every
default; `DEFAULTS` is parsed from it, and `--emit-default-config` writes it
verbatim.  User files override defaults key by key; unknown keys are
rejected so typos cannot silently fall back to defaults.
"""
import numpy as np
import yaml

from . import constants
from .molecule import DiatomModel, FineStructureConstants, calibrated_morse
from .pes import InteractionSurface, LegendreTerm, load_surface_table, scale
from .scatter.grid import PropagationGrid

DEFAULT_CONFIG_TEXT = """\
# coldcc reference configuration.  Every key below shows its default; a run
# configuration may override any subset.  Units: kelvin and bohr throughout,
# masses in unified amu.

diatom:
  mass_atom_amu: 3.0160293201        # colliding atom (helium-3)
  mass_diatom_atom_amu: 16.9991317565  # one atom of the homonuclear dimer
  mode: vibrating                    # rigid | vibrating
  v_max: 1                           # highest vibrational channel kept
  n_max: 8                           # rotational cap for v = 0 (even manifold)
  n_max_excited: 6                   # rotational cap for v >= 1
  r_eq: 2.282                        # frozen-geometry bond length, bohr
  vibrational_gap_k: 2175.0          # E(v=1) - E(v=0) target of the bond potential
  zero_point_k: 1100.0               # zero-point energy target of the bond potential
  morse_r_min: 2.27613814            # Morse minimum; set slightly inside r_eq so the
                                     # v=0 averaged rotational constant matches the
                                     # rigid-rotor value and thresholds line up
  # fine-structure constants: same signs and ratio to the rotational constant
  # as the oxygen molecule (spin-spin ~2.9 K, spin-rotation ~-0.012 K),
  # scaled down by 10 so the model levels keep clean nominal N labels
  lambda_ss_k: 0.2856                # spin-spin coupling
  gamma_sr_k: -0.00121               # spin-rotation coupling

surface:
  table: null                        # optional path to a sampled-surface text
                                     # file (columns R r theta V); when set it
                                     # replaces `terms`, with r_ref taken from
                                     # the file when it carries a directive
  r_ref: 2.282                       # expansion point of the r-dependence, bohr
  lambda: 1.0                        # overall interaction scaling factor
  lambda_grid: null                  # scan grid: {start, stop, points} or a list;
                                     # the scan command also accepts presets
                                     # "23-25" and "90-91"
  n_quad: 100                        # vibrational-averaging quadrature nodes;
                                     # an automatic node-doubling check aborts
                                     # the run if the integrals have not converged
  terms:                             # even-Legendre components, V_l(R, r) each
                                     # A exp(-decay R) - f6(decay R) C6 / R^6 with
                                     # linear r-slopes about r_ref
    - order: 0
      amp: 1.36277599e+9              # calibrated: global minimum -40 K (T shape)
      amp_slope: 0.4
      decay: 3.0
      c6: 2.71219951e+6               # calibrated: s-wave scattering length -2.9 bohr
      c6_slope: 0.4
    - order: 2
      amp: 6.81387995e+8              # anisotropy amp = 0.5 * isotropic amp
      amp_slope: 0.4
      decay: 3.0
      c6: 2.71219951e+5               # anisotropic dispersion = 0.10 * isotropic
      c6_slope: 0.4

scattering:
  grid:
    r_start: 4.1                     # propagation start, bohr
    r_switch: 24.0                   # step-size switch radius, bohr
    r_max: 450.0                     # matching radius, bohr
    h_inner: 0.01                    # step in [r_start, r_switch], bohr
    h_outer: 0.1                     # step in [r_switch, r_max], bohr
    y0: 1.0e+8                        # hard-wall log-derivative seed, bohr^-1
  energies: null                     # explicit list of collision energies (K);
                                     # overrides energy_range when set
  energy_range:                      # default: the "fig1" preset, 100 uK - 10 K
    start: 1.0e-4
    stop: 10.0
    points: 24
    spacing: log                     # log | linear
  jtot_max: 8                        # partial-wave (total J) cap
  l_max: 8                           # orbital angular momentum cap
  entrance: [0, 0, 1, 1]             # entrance state v, N, J, M_J
  scan_energy_k: 1.0e-6              # collision energy of the scaling scan
  halving_check: true                # re-run one energy with halved steps and
                                     # report the relative rate change

output:
  directory: out                     # files are written under this directory
  formats: [csv, json]               # any subset; CSV is RFC 4180, JSON mirrors it
"""

DEFAULTS = yaml.safe_load(DEFAULT_CONFIG_TEXT)


class ConfigError(ValueError):
    """Configuration failure with a key-path or file-location message."""


def _merge(base, override, path):
    if not isinstance(override, dict):
        raise ConfigError(f"{path or 'top level'}: expected a mapping")
    out = dict(base)
    for key in sorted(override):
        here = f"{path}.{key}" if path else str(key)
        if key not in base:
            raise ConfigError(f"{here}: unknown key")
        if isinstance(base[key], dict) and base[key]:
            out[key] = _merge(base[key], override[key] or {}, here)
        else:
            out[key] = override[key]
    return out


def load_config(path=None) -> dict:
    """Defaults overridden by the YAML file at `path` (deep merge)."""
    if path is None:
        return validate(DEFAULTS)
    try:
        with open(path, encoding="utf-8") as fh:
            user = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{path}:{mark.line + 1}:{mark.column + 1}" if mark else str(path)
        raise ConfigError(f"{where}: invalid YAML: {exc}") from exc
    if user is None:
        user = {}
    return validate(_merge(DEFAULTS, user, ""))


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


def _num(cfg, path, positive=False):
    node = cfg
    for part in path.split("."):
        node = node[part]
    _require(isinstance(node, (int, float)) and not isinstance(node, bool),
             f"{path}: expected a number")
    if positive:
        _require(node > 0, f"{path}: must be positive")
    return node


def validate(cfg: dict) -> dict:
    d = cfg["diatom"]
    for key in ("mass_atom_amu", "mass_diatom_atom_amu", "r_eq",
                "vibrational_gap_k", "zero_point_k", "morse_r_min"):
        _num(cfg, f"diatom.{key}", positive=True)
    _num(cfg, "diatom.lambda_ss_k")
    _num(cfg, "diatom.gamma_sr_k")
    _require(d["mode"] in ("rigid", "vibrating"),
             "diatom.mode: must be 'rigid' or 'vibrating'")
    _require(isinstance(d["v_max"], int) and 0 <= d["v_max"] <= 3,
             "diatom.v_max: must be an integer in [0, 3]")
    for key in ("n_max", "n_max_excited"):
        _require(isinstance(d[key], int) and d[key] >= 0 and d[key] % 2 == 0,
                 f"diatom.{key}: must be an even integer >= 0")

    s = cfg["surface"]
    _require(s["table"] is None or (isinstance(s["table"], str) and s["table"]),
             "surface.table: must be a file path or null")
    _num(cfg, "surface.r_ref", positive=True)
    _num(cfg, "surface.lambda", positive=True)
    _require(isinstance(s["n_quad"], int) and s["n_quad"] >= 10,
             "surface.n_quad: must be an integer >= 10")
    _require(isinstance(s["terms"], list) and s["terms"],
             "surface.terms: must be a non-empty list")
    for i, term in enumerate(s["terms"]):
        _require(isinstance(term, dict), f"surface.terms[{i}]: expected a mapping")
        _require(set(term) == {"order", "amp", "amp_slope", "decay", "c6",
                               "c6_slope"},
                 f"surface.terms[{i}]: need exactly order, amp, amp_slope, "
                 "decay, c6, c6_slope")
        _require(isinstance(term["order"], int) and term["order"] >= 0
                 and term["order"] % 2 == 0,
                 f"surface.terms[{i}].order: must be an even integer >= 0")
        _require(term["decay"] > 0, f"surface.terms[{i}].decay: must be positive")
    orders = [t["order"] for t in s["terms"]]
    _require(len(set(orders)) == len(orders), "surface.terms: duplicate orders")
    if s["lambda_grid"] is not None:
        _validate_lambda_grid(s["lambda_grid"])

    sc = cfg["scattering"]
    g = sc["grid"]
    for key in ("r_start", "r_switch", "r_max", "h_inner", "h_outer", "y0"):
        _num(cfg, f"scattering.grid.{key}", positive=True)
    _require(g["r_start"] < g["r_switch"] < g["r_max"],
             "scattering.grid: need r_start < r_switch < r_max")
    if sc["energies"] is not None:
        _require(isinstance(sc["energies"], list) and sc["energies"],
                 "scattering.energies: must be a non-empty list")
        for i, e in enumerate(sc["energies"]):
            _require(isinstance(e, (int, float)) and e > 0,
                     f"scattering.energies[{i}]: must be positive")
    er = sc["energy_range"]
    _require(0 < er["start"] < er["stop"],
             "scattering.energy_range: need 0 < start < stop")
    _require(isinstance(er["points"], int) and er["points"] >= 1,
             "scattering.energy_range.points: must be an integer >= 1")
    _require(er["spacing"] in ("log", "linear"),
             "scattering.energy_range.spacing: must be 'log' or 'linear'")
    for key in ("jtot_max", "l_max"):
        _require(isinstance(sc[key], int) and sc[key] >= 0,
                 f"scattering.{key}: must be an integer >= 0")
    ent = sc["entrance"]
    _require(isinstance(ent, list) and len(ent) == 4
             and all(isinstance(x, int) for x in ent),
             "scattering.entrance: must be four integers v, N, J, M_J")
    v, n, j, mj = ent
    _require(0 <= v <= d["v_max"] if d["mode"] == "vibrating" else v == 0,
             "scattering.entrance: v outside the retained vibrational range")
    _require(n >= 0 and n % 2 == 0, "scattering.entrance: N must be even")
    _require(abs(n - 1) <= j <= n + 1, "scattering.entrance: need |N-1| <= J <= N+1")
    _require(abs(mj) <= j, "scattering.entrance: need |M_J| <= J")
    _num(cfg, "scattering.scan_energy_k", positive=True)
    _require(isinstance(sc["halving_check"], bool),
             "scattering.halving_check: must be true or false")

    o = cfg["output"]
    _require(isinstance(o["directory"], str) and o["directory"],
             "output.directory: must be a non-empty string")
    _require(isinstance(o["formats"], list) and o["formats"]
             and all(f in ("csv", "json") for f in o["formats"]),
             "output.formats: must be a non-empty subset of [csv, json]")
    return cfg


def _validate_lambda_grid(lg):
    if isinstance(lg, list):
        _require(lg and all(isinstance(x, (int, float)) and x > 0 for x in lg),
                 "surface.lambda_grid: list entries must be positive numbers")
        return
    _require(isinstance(lg, dict) and set(lg) == {"start", "stop", "points"},
             "surface.lambda_grid: need a list or {start, stop, points}")
    _require(0 < lg["start"] <= lg["stop"],
             "surface.lambda_grid: need 0 < start <= stop")
    _require(isinstance(lg["points"], int) and lg["points"] >= 1,
             "surface.lambda_grid.points: must be an integer >= 1")


SCAN_PRESETS = {
    "23-25": {"start": 23.0, "stop": 25.0, "points": 101},
    "90-91": {"start": 90.0, "stop": 91.0, "points": 51},
}

RATES_PRESETS = {
    "fig1": {"start": 1.0e-4, "stop": 10.0, "points": 24, "spacing": "log"},
}


def build_surface(cfg: dict) -> InteractionSurface:
    s = cfg["surface"]
    if s["table"] is not None:
        loaded = load_surface_table(s["table"])
        return scale(loaded, float(s["lambda"]))
    terms = tuple(LegendreTerm(order=t["order"], amp=float(t["amp"]),
                               amp_slope=float(t["amp_slope"]),
                               decay=float(t["decay"]), c6=float(t["c6"]),
                               c6_slope=float(t["c6_slope"]))
                  for t in sorted(s["terms"], key=lambda t: t["order"]))
    return InteractionSurface(terms=terms, r_ref=float(s["r_ref"]),
                              lambda_scale=float(s["lambda"]))


def build_diatom(cfg: dict) -> DiatomModel:
    d = cfg["diatom"]
    mu = constants.reduced_mass_amu(d["mass_diatom_atom_amu"],
                                    d["mass_diatom_atom_amu"])
    pot = calibrated_morse(gap=float(d["vibrational_gap_k"]),
                           zpe=float(d["zero_point_k"]), mu_amu=mu,
                           r_eq=float(d["morse_r_min"]))
    fs = FineStructureConstants(lambda_ss=float(d["lambda_ss_k"]),
                                gamma_sr=float(d["gamma_sr_k"]))
    return DiatomModel(potential=pot, fine_structure=fs, mu_amu=mu,
                       r_eq=float(d["r_eq"]))


def build_grid(cfg: dict) -> PropagationGrid:
    g = cfg["scattering"]["grid"]
    return PropagationGrid(r_start=float(g["r_start"]),
                           r_switch=float(g["r_switch"]),
                           r_max=float(g["r_max"]), h_inner=float(g["h_inner"]),
                           h_outer=float(g["h_outer"]), y0=float(g["y0"]))


def collision_mu_amu(cfg: dict) -> float:
    d = cfg["diatom"]
    return constants.reduced_mass_amu(d["mass_atom_amu"],
                                      2.0 * d["mass_diatom_atom_amu"])


def caps_by_v(cfg: dict) -> dict:
    d = cfg["diatom"]
    v_top = d["v_max"] if d["mode"] == "vibrating" else 0
    return {v: (d["n_max"] if v == 0 else d["n_max_excited"])
            for v in range(v_top + 1)}


def energy_grid(cfg: dict) -> np.ndarray:
    sc = cfg["scattering"]
    if sc["energies"] is not None:
        return np.asarray(sorted(float(e) for e in sc["energies"]))
    er = sc["energy_range"]
    if er["points"] == 1:
        return np.array([float(er["start"])])
    if er["spacing"] == "log":
        return np.geomspace(er["start"], er["stop"], er["points"])
    return np.linspace(er["start"], er["stop"], er["points"])


def lambda_grid(cfg: dict) -> np.ndarray:
    lg = cfg["surface"]["lambda_grid"]
    if lg is None:
        return np.array([float(cfg["surface"]["lambda"])])
    if isinstance(lg, list):
        return np.asarray(sorted(float(x) for x in lg))
    if lg["points"] == 1:
        return np.array([float(lg["start"])])
    return np.linspace(lg["start"], lg["stop"], lg["points"])
