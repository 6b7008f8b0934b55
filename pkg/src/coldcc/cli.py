"""Configuration-driven command-line front end.

Subcommands: levels, rates, adiabats, scan, compare.  Each loads one YAML
configuration (defaults when none is given), validates it before any
computation, runs the solver, and writes CSV/JSON files with fixed
formatting so identical configurations produce byte-identical output.
Any S-matrix unitarity defect above 1e-6 makes the command exit nonzero:
a violated physics invariant is a failed run, not a warning.
"""
import argparse
import copy
import sys
from pathlib import Path

import numpy as np

from . import constants, io
from .channels import adiabatic_curves
from .config import (DEFAULT_CONFIG_TEXT, RATES_PRESETS, SCAN_PRESETS,
                     ConfigError, build_diatom, build_grid, build_surface,
                     caps_by_v, collision_mu_amu, energy_grid, lambda_grid,
                     load_config)
from .scatter.runs import compare_models, lambda_scan, make_setup, rate_table

UNITARITY_LIMIT = 1e-6
SIGMA_CM2 = constants.BOHR_CM**2


def _make_setup(cfg, mode=None):
    d = cfg["diatom"]
    return make_setup(mode=mode or d["mode"], v_max=d["v_max"],
                      surface=build_surface(cfg), diatom=build_diatom(cfg),
                      n_max_by_v=caps_by_v(cfg),
                      l_max=cfg["scattering"]["l_max"], grid=build_grid(cfg),
                      n_quad=cfg["surface"]["n_quad"],
                      mu_collision_amu=collision_mu_amu(cfg))


def _emit(out_dir, name, formats, header, rows, payload):
    written = []
    if "csv" in formats:
        path = Path(out_dir) / f"{name}.csv"
        io.write_csv(path, header, rows)
        written.append(path)
    if "json" in formats:
        path = Path(out_dir) / f"{name}.json"
        io.write_json(path, payload)
        written.append(path)
    for path in written:
        print(path)


def _state_label(state) -> str:
    return " ".join(str(x) for x in state)


def cmd_levels(cfg, out_dir, formats, args) -> float:
    setup = _make_setup(cfg)
    rows = [(v, n, j, e) for v, n, j, e in setup.levels.levels()]
    payload = {
        "mode": setup.mode,
        "levels": [{"v": v, "n": n, "j": j, "energy_k": e}
                   for v, n, j, e in rows],
        "convergence": {"quadrature_drift": setup.table.quad_drift,
                        "max_unitarity_defect": 0.0},
    }
    _emit(out_dir, "levels", formats, ("v", "n", "j", "energy_k"), rows, payload)
    return 0.0


def _rate_rows(table, lam):
    rows = []
    for r in table.rows:
        rows.append((r.energy, lam, table.mode, _state_label(table.entrance),
                     _state_label(r.exit_label), r.kind,
                     r.sigma_bohr2 * SIGMA_CM2, r.rate_cm3s))
    return rows


RATE_HEADER = ("energy_k", "lambda", "model", "entrance", "exit", "kind",
               "sigma_cm2", "rate_cm3_s")


def _halving_delta(cfg, setup, energy, entrance, jtot_max, threads) -> float:
    """Relative change of the elastic rate when both steps are halved."""
    import dataclasses
    fine = dataclasses.replace(setup, grid=setup.grid.halved(),
                               _cms=dict(setup._cms))
    coarse = rate_table(setup, [energy], entrance, jtot_max, threads)
    finer = rate_table(fine, [energy], entrance, jtot_max, threads)
    a = coarse.lookup(energy, tuple(entrance)).rate_cm3s
    b = finer.lookup(energy, tuple(entrance)).rate_cm3s
    return abs(b - a) / abs(a) if a != 0.0 else 0.0


def cmd_rates(cfg, out_dir, formats, args) -> float:
    sc = cfg["scattering"]
    entrance = tuple(sc["entrance"])
    energies = energy_grid(cfg)
    lam = float(cfg["surface"]["lambda"])
    setup = _make_setup(cfg)
    table = rate_table(setup, energies, entrance, sc["jtot_max"], args.threads)
    halving = None
    if sc["halving_check"]:
        halving = _halving_delta(cfg, setup, float(energies[0]), entrance,
                                 sc["jtot_max"], args.threads)
    rows = _rate_rows(table, lam)
    payload = {
        "model": table.mode,
        "lambda": lam,
        "entrance": list(entrance),
        "rows": [dict(zip(RATE_HEADER, r)) for r in rows],
        "convergence": {
            "max_unitarity_defect": table.max_unitarity_defect,
            "jtot_tail_fraction": table.jtot_tail_fraction,
            "step_halving_delta": halving,
        },
    }
    _emit(out_dir, "rates", formats, RATE_HEADER, rows, payload)
    return table.max_unitarity_defect


def cmd_adiabats(cfg, out_dir, formats, args) -> float:
    lam = args.lam if args.lam is not None else float(cfg["surface"]["lambda"])
    if lam <= 0:
        raise ConfigError("--lam: must be positive")
    _, n, j, _ = cfg["scattering"]["entrance"]
    setup = _make_setup(cfg).scaled_to(lam)
    cm = setup.coupling(j, (-1) ** n)
    g = setup.grid
    r_grid = np.linspace(g.r_start, 30.0, int(round((30.0 - g.r_start) / 0.05)) + 1)
    out = adiabatic_curves(cm, r_grid)
    header = ["r_bohr"] + [f"c{i:02d}_{lab}" for i, lab in enumerate(out["labels"])]
    rows = [(r, *curve) for r, curve in zip(out["r"], out["curves"])]
    payload = {
        "lambda": lam,
        "jtot": int(j),
        "parity": int((-1) ** n),
        "labels": out["labels"],
        "thresholds_k": sorted(float(t) for t in cm.thresholds),
        "r_bohr": out["r"],
        "curves_k": out["curves"],
        "convergence": {"max_unitarity_defect": 0.0},
    }
    _emit(out_dir, "adiabats", formats, header, rows, payload)
    return 0.0


def cmd_scan(cfg, out_dir, formats, args) -> float:
    sc = cfg["scattering"]
    if args.preset:
        p = SCAN_PRESETS[args.preset]
        lambdas = np.linspace(p["start"], p["stop"], p["points"])
    else:
        lambdas = lambda_grid(cfg)
    out = lambda_scan(lambdas, models=("rigid", "vibrating"),
                      e_scan=float(sc["scan_energy_k"]),
                      entrance=tuple(sc["entrance"]),
                      surface=build_surface(cfg), diatom=build_diatom(cfg),
                      grid=build_grid(cfg), n_max_by_v=caps_by_v(cfg),
                      l_max=sc["l_max"], v_max=cfg["diatom"]["v_max"],
                      threads=args.threads, n_quad=cfg["surface"]["n_quad"],
                      mu_collision_amu=collision_mu_amu(cfg))
    header = ("lambda", "model", "a_bohr", "sigma_elastic_cm2",
              "rate_inelastic_cm3_s", "resonance", "n_bound")
    rows = [(r.lam, r.model, r.a_bohr, r.sigma_elastic_bohr2 * SIGMA_CM2,
             r.rate_inelastic_cm3s, r.resonance, r.n_bound)
            for r in out["rows"]]
    summary = {}
    worst = 0.0
    for model, s in out["summary"].items():
        crossings = (s["bound_last"] - s["bound_first"]
                     if s["bound_first"] >= 0 else None)
        summary[model] = dict(s, threshold_crossings=crossings)
        worst = max(worst, s["max_unitarity_defect"])
    payload = {
        "scan_energy_k": float(sc["scan_energy_k"]),
        "rows": [dict(zip(header, r)) for r in rows],
        "summary": summary,
        "convergence": {"max_unitarity_defect": worst},
    }
    _emit(out_dir, "scan", formats, header, rows, payload)
    return worst


def cmd_compare(cfg, out_dir, formats, args) -> float:
    sc = cfg["scattering"]
    entrance = tuple(sc["entrance"])
    energies = energy_grid(cfg)
    lam = float(cfg["surface"]["lambda"])
    variants = ("rigid", "vibrating-v0", "vibrating-v1")
    out = compare_models(energies, entrance=entrance, jtot_max=sc["jtot_max"],
                         surface=build_surface(cfg), diatom=build_diatom(cfg),
                         grid=build_grid(cfg), n_max_by_v=caps_by_v(cfg),
                         l_max=sc["l_max"], threads=args.threads,
                         variants=variants, n_quad=cfg["surface"]["n_quad"],
                         mu_collision_amu=collision_mu_amu(cfg))
    tags = [v.replace("-", "_") for v in variants]
    header = (["energy_k", "lambda", "entrance", "exit", "kind"]
              + [f"sigma_cm2_{t}" for t in tags]
              + [f"rate_cm3_s_{t}" for t in tags])
    rows = []
    for r in out["rows"]:
        rows.append((r.energy, lam, _state_label(entrance),
                     _state_label(r.exit_label), r.kind,
                     *(r.sigma[v] * SIGMA_CM2 for v in variants),
                     *(r.rate[v] for v in variants)))
    convergence = {
        v: {"max_unitarity_defect": t.max_unitarity_defect,
            "jtot_tail_fraction": t.jtot_tail_fraction}
        for v, t in out["tables"].items()
    }
    payload = {
        "lambda": lam,
        "entrance": list(entrance),
        "variants": list(variants),
        "rows": [dict(zip(header, r)) for r in rows],
        "convergence": convergence,
    }
    _emit(out_dir, "compare", formats, header, rows, payload)
    return max(t.max_unitarity_defect for t in out["tables"].values())


COMMANDS = {
    "levels": cmd_levels,
    "rates": cmd_rates,
    "adiabats": cmd_adiabats,
    "scan": cmd_scan,
    "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coldcc",
        description="Coupled-channel cold-collision solver for an atom and a "
                    "vibrating spin-triplet diatom.")
    parser.add_argument("--emit-default-config", action="store_true",
                        help="print the fully commented reference "
                             "configuration and exit")
    sub = parser.add_subparsers(dest="command")
    specs = {
        "levels": "write the (v, N, J, E) level table",
        "rates": "state-to-state cross sections and rates over an energy grid",
        "adiabats": "adiabatic curves of the entrance (Jtot, parity) block",
        "scan": "observables along an interaction-scaling sweep",
        "compare": "rigid rotor against vibrationally averaged models",
    }
    for name, help_text in specs.items():
        q = sub.add_parser(name, help=help_text)
        q.add_argument("--config", default=None, metavar="PATH",
                       help="YAML run configuration; defaults when omitted")
        q.add_argument("--threads", type=int, default=1, metavar="N",
                       help="worker threads for independent blocks")
        q.add_argument("--out", default=None, metavar="DIR",
                       help="output directory (overrides output.directory)")
    sub.choices["rates"].add_argument(
        "--preset", choices=sorted(RATES_PRESETS),
        help="named energy grid (fig1: 100 uK - 10 K, log-spaced)")
    sub.choices["scan"].add_argument(
        "--preset", choices=sorted(SCAN_PRESETS),
        help="named scaling window")
    sub.choices["adiabats"].add_argument(
        "--lam", type=float, default=None,
        help="interaction scaling of the curves (default: surface.lambda)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.emit_default_config:
        sys.stdout.write(DEFAULT_CONFIG_TEXT)
        return 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("coldcc: a subcommand or --emit-default-config is required",
              file=sys.stderr)
        return 1
    try:
        cfg = load_config(args.config)
        if args.command == "rates" and getattr(args, "preset", None):
            cfg = copy.deepcopy(cfg)
            cfg["scattering"]["energies"] = None
            cfg["scattering"]["energy_range"] = dict(RATES_PRESETS[args.preset])
        out_dir = Path(args.out) if args.out else Path(cfg["output"]["directory"])
        defect = COMMANDS[args.command](cfg, out_dir, cfg["output"]["formats"],
                                        args)
    except ConfigError as exc:
        print(f"coldcc: configuration error: {exc}", file=sys.stderr)
        return 1
    if defect > UNITARITY_LIMIT:
        print(f"coldcc: unitarity defect {defect:.3e} exceeds "
              f"{UNITARITY_LIMIT:.0e}; results are not trustworthy",
              file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
