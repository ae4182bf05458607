"""Relative error histories on the inverse heat problem (n = 512, noise 1e-4).

Compares LSQR/LSMR, their flexible counterparts, and the -I/-R hybrids with
the error-optimal lambda.  Writes ``heat_errors.csv`` (and a PNG with --plot).

    python scripts/heat_semiconvergence.py --out out/heat --plot
"""

import argparse
from pathlib import Path

import numpy as np

from _common import plot_curves, write_curves
from flexkrylov import ParamPolicy, SolverConfig, WeightPolicy, solve
from flexkrylov.problems import add_noise, gen_heat


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=512)
    ap.add_argument("--noise", type=float, default=1e-4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--maxiter", type=int, default=100)
    ap.add_argument("--tau1-rel", type=float, default=0.1)
    ap.add_argument("--out", type=Path, default=Path("out/heat"))
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args()

    p = add_noise(gen_heat(args.n), args.noise, seed=args.seed)
    weights = WeightPolicy(tau1_rel=args.tau1_rel, clip=True)
    curves = {}
    for method in ("lsqr", "lsmr", "flsqr", "flsmr", "flsqr-i", "flsqr-r"):
        param = ParamPolicy(kind="optimal") if method.endswith(("-i", "-r")) else ParamPolicy()
        cfg = SolverConfig(method=method, maxiter=args.maxiter, weights=weights, param=param,
                           x_true=p.x_true, stagnation_window=args.maxiter + 1)
        run = solve(p.a, p.b, cfg)
        curves[method] = run.rel_errors
        e = run.rel_errors
        k = int(np.argmin(e))
        tail = e[k: 2 * (k + 1)].max() / e[k]
        print(f"{method:8s} min {e[k]:.4f} at {k + 1:3d}  max/min over [k, 2k] {tail:6.2f}")
    write_curves(args.out / "heat_errors.csv", curves)
    if args.plot:
        plot_curves(args.out / "heat_errors.png", curves)


if __name__ == "__main__":
    main()
