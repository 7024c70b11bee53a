"""Sensitivity of the Moebius reduction to the number of cover sets k.

    python3 scripts/sweep_k.py --k 6 8 12 16 24 32
"""

import argparse

from fibered import PipelineConfig, run_fibered
from fibered.data_model import euclidean_distances
from fibered.datasets import gen_mobius
from fibered.diagnostics import diagnose


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1500)
    ap.add_argument("--k", type=int, nargs="+", default=[6, 8, 12, 16, 24, 32])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    data = gen_mobius(args.n, seed=args.seed)
    print("k,D,w1_trivial,tau,final_objective,kappa_min,avg_worst_case,avg_sigma")
    for k in args.k:
        try:
            res = run_fibered(data, PipelineConfig(k=k, d=2, seed=args.seed))
        except Exception as exc:
            print(f"{k},failed: {exc}")
            continue
        rep = diagnose(data.distances, euclidean_distances(res.embedding.coords),
                       res.cover.membership)
        avg = rep.averages()
        print(f"{k},{res.target_dim},{res.w1_trivial},{res.tau:.4f},"
              f"{res.alignment.final_objective:.4g},{rep.kappa.min():.4f},"
              f"{avg['worst_case']:.4g},{avg['sigma']:.4g}", flush=True)


if __name__ == "__main__":
    main()
