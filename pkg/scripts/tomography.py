"""Tomography experiment: hybrid flexible methods against LSQR, FISTA and (P)IRN.

Runs the bundled ``tomo64`` configuration through the experiment runner and
prints the comparison table.  ``--grid 256`` switches to the 256 x 256 phantom
(90 angles, 362 rays), which takes a few minutes.

    python scripts/tomography.py --out out/tomo64
"""

import argparse
import json
from pathlib import Path

from flexkrylov.cli import _read_config_text, compare_report, parse_config, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", type=int, default=64)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--maxiter", type=int, default=None, help="override every solver's iteration count")
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args()

    raw = json.loads(_read_config_text("tomo64"))
    if args.grid != 64:
        raw["name"] = f"tomo{args.grid}"
        raw["problem"]["params"]["n_grid"] = args.grid
        raw["problem"]["params"]["rays_per_angle"] = int(round(2 ** 0.5 * args.grid))
    if args.maxiter is not None:
        for s in raw["solvers"]:
            if s["method"] in ("irn", "pirn"):
                continue
            s["maxiter"] = args.maxiter
    out = args.out or Path("out") / raw["name"]
    config = parse_config(raw, out=str(out), seed=args.seed)
    code = run_experiment(config)
    print(compare_report(out))
    raise SystemExit(code)


if __name__ == "__main__":
    main()
