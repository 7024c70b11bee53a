"""Cut the Moebius base open and reduce into D = r + 1.

The loop of the base disappears; points within the band of the cut are
flagged as glued.

    python3 scripts/cut_unfold_demo.py --cut 0.25
"""

import argparse

import numpy as np

from fibered import PipelineConfig, run_fibered
from fibered.data_model import euclidean_distances
from fibered.datasets import gen_mobius
from fibered.pipeline import cut_unfold_dataset
from fibered.topology import geodesic_pd


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1500)
    ap.add_argument("--cut", type=float, default=0.0)
    ap.add_argument("--band", type=float, default=0.02)
    ap.add_argument("--landmarks", type=int, default=400)
    args = ap.parse_args()
    data = gen_mobius(args.n, seed=0)
    full = run_fibered(data, PipelineConfig(k=16, d=2))
    cut, mask = cut_unfold_dataset(data, args.cut, args.band)
    res = run_fibered(cut, PipelineConfig(k=16, d=2, cut_unfold=True, reach=1 / (2 * np.pi)))
    for label, r in (("full", full), ("cut", res)):
        _, score, _ = geodesic_pd(euclidean_distances(r.embedding.coords),
                                  landmarks=args.landmarks, max_dim=1)
        print(f"{label}: D = {r.target_dim}, dim-1 persistences "
              f"{np.round(score.persistences[1][:3], 3).tolist()}, "
              f"top gap {score.gap_after(1, 1):.2f}")
    print(f"{int(mask.sum())} of {args.n} points lie within {args.band} turns of the cut")


if __name__ == "__main__":
    main()
