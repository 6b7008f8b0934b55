"""Timing comparison of the compiled and pure-numpy propagation kernels.

Runs the full production pipeline (default grid, entrance block) at a few
basis sizes and energy-batch widths, once per backend, in subprocesses so
the kernel choice is fixed at import time exactly as in normal use.  Also
cross-checks that both backends produce the same log-derivative matrix.

Usage: python3 benchmarks/bench_propagator.py [--fast]
"""
import argparse
import json
import os
import subprocess
import sys
import textwrap

WORKER = textwrap.dedent("""\
    import json, sys, time
    import numpy as np
    from coldcc.scatter import kernels
    from coldcc.scatter.grid import PropagationGrid
    from coldcc.scatter.propagate import propagate
    from coldcc.scatter.runs import make_setup

    spec = json.loads(sys.argv[1])
    setup = make_setup(mode="vibrating", v_max=1,
                       n_max_by_v={0: spec["n_max"], 1: 2},
                       l_max=spec["l_max"])
    cm = setup.coupling(1, 1)
    energies = np.geomspace(1e-6, 1.0, spec["n_energies"])
    grid = PropagationGrid()
    y = propagate(cm, grid, energies)          # warm caches
    t0 = time.perf_counter()
    for _ in range(spec["repeats"]):
        y = propagate(cm, grid, energies)
    dt = (time.perf_counter() - t0) / spec["repeats"]
    print(json.dumps({"backend": kernels.backend_name(),
                      "channels": cm.size, "seconds": dt,
                      "checksum": float(np.sum(y))}))
""")


def run_case(n_max, l_max, n_energies, repeats, pure):
    env = dict(os.environ, COLDCC_PURE="1" if pure else "0")
    spec = json.dumps({"n_max": n_max, "l_max": l_max,
                       "n_energies": n_energies, "repeats": repeats})
    out = subprocess.run([sys.executable, "-c", WORKER, spec], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--fast", action="store_true",
                        help="single small case, one repeat")
    args = parser.parse_args()
    cases = [(2, 2, 1, 3), (4, 4, 1, 3), (4, 4, 8, 2), (8, 8, 4, 1)]
    if args.fast:
        cases = [(2, 2, 1, 1)]
    print(f"{'channels':>9} {'energies':>9} {'compiled s':>11} "
          f"{'numpy s':>9} {'speedup':>8}")
    for n_max, l_max, n_e, reps in cases:
        fast = run_case(n_max, l_max, n_e, reps, pure=False)
        slow = run_case(n_max, l_max, n_e, reps, pure=True)
        if fast["backend"] == slow["backend"]:
            print("note: compiled extension unavailable; timing numpy twice")
        drift = abs(fast["checksum"] - slow["checksum"]) / max(
            1.0, abs(slow["checksum"]))
        assert drift < 1e-9, f"backend results differ: {drift:.2e}"
        print(f"{fast['channels']:>9d} {n_e:>9d} {fast['seconds']:>11.3f} "
              f"{slow['seconds']:>9.3f} {slow['seconds'] / fast['seconds']:>8.1f}")


if __name__ == "__main__":
    main()
