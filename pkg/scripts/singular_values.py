"""Ritz-type singular value estimates from the flexible Golub-Kahan process.

For ``Z_k = Q_k R_k`` the singular values of ``M_k R_k^{-1}`` equal those of
``A Q_k``; this script compares them with the leading singular values of A on
the heat problem, with and without flexible reweighting.

    python scripts/singular_values.py --n 256 --k 20
"""

import argparse

import numpy as np

from flexkrylov import SolverConfig, WeightPolicy, solve
from flexkrylov.linop import to_dense
from flexkrylov.problems import add_noise, gen_heat
from flexkrylov.projsolve import approx_singular_values


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--k", type=int, default=20)
    ap.add_argument("--show", type=int, default=8)
    args = ap.parse_args()

    p = add_noise(gen_heat(args.n), 1e-4, seed=0)
    sigma = np.linalg.svd(to_dense(p.a), compute_uv=False)
    print("exact    " + " ".join(f"{s:.3e}" for s in sigma[: args.show]))
    for method in ("flsqr-r",):
        for label, weights in (("identity", WeightPolicy(p=2)), ("flexible", WeightPolicy(tau1_rel=0.1, clip=True))):
            run = solve(p.a, p.b, SolverConfig(method=method, maxiter=args.k, weights=weights,
                                               stagnation_window=args.k + 1))
            _, r = run.info["qr"]
            approx = approx_singular_values(run.info["state"].M, r)
            rel = np.abs(approx[: args.show] - sigma[: args.show]) / sigma[: args.show]
            print(f"{label:8s} " + " ".join(f"{s:.3e}" for s in approx[: args.show]))
            print(f"{'rel gap':8s} " + " ".join(f"{g:.1e}" for g in rel))


if __name__ == "__main__":
    main()
