"""Deblurring: FISTA relative error over a lambda grid next to hybrid FLSQR-R.

Out-of-focus (disk) blur of a Haar-sparse image with noise 1e-2.  FISTA is
run for each lambda on a logarithmic grid; FLSQR-R picks lambda by the
discrepancy principle on the fly.

    python scripts/deblur_lambda_grid.py --side 64 --radius 4
"""

import argparse

import numpy as np

from flexkrylov import FistaConfig, ParamPolicy, SolverConfig, WeightPolicy, run_fista, solve
from flexkrylov.problems import add_noise, gen_deblur2d


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--side", type=int, default=64)
    ap.add_argument("--radius", type=float, default=4.0)
    ap.add_argument("--image", default="blocks")
    ap.add_argument("--maxiter", type=int, default=100)
    ap.add_argument("--grid", type=float, nargs=3, default=[1e-3, 1.0, 10], metavar=("LO", "HI", "NUM"))
    args = ap.parse_args()

    p = add_noise(gen_deblur2d(args.side, psf="disk", radius=args.radius, image=args.image, levels=3), 1e-2, seed=0)
    eps = float(np.linalg.norm(p.e))
    hyb = solve(p.a, p.b, SolverConfig(method="flsqr-r", maxiter=args.maxiter, x_true=p.x_true, transform=p.psi,
                                       weights=WeightPolicy(tau1_rel=1e-4, clip=True),
                                       param=ParamPolicy(kind="dp_exact", eps=eps),
                                       stagnation_window=args.maxiter + 1))
    print(f"flsqr-r (dp)  best err {hyb.best_rel_err:.4f} at {hyb.best_iter}, final lambda {hyb.final_lambda:.3g}")
    lo, hi, num = args.grid
    for lam in np.logspace(np.log10(lo), np.log10(hi), int(num)):
        run = run_fista(p.a, p.b, FistaConfig(lam=lam, maxiter=args.maxiter, x_true=p.x_true, transform=p.psi))
        print(f"fista lambda {lam:9.3g}  best err {run.best_rel_err:.4f} at {run.best_iter}")


if __name__ == "__main__":
    main()
