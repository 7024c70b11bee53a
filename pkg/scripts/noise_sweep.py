"""How often the Moebius obstruction survives distance noise.

Noise is U[-m, m] per point pair, m a multiple of the median pairwise
distance eps.

    python3 scripts/noise_sweep.py --multiples 0 1 2 4 8 --seeds 5
"""

import argparse

import numpy as np

from fibered import PipelineConfig, run_fibered
from fibered.data_model import seeded_rng
from fibered.datasets import gen_mobius
from fibered.diagnostics import inject_distance_noise, median_distance


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1500)
    ap.add_argument("--multiples", type=float, nargs="+", default=[0, 1, 2, 4, 8])
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args()
    print("multiple,nontrivial,seeds,mean_death")
    for mult in args.multiples:
        hits, deaths = 0, []
        for seed in range(args.seeds):
            data = gen_mobius(args.n, seed=seed)
            eps = median_distance(data.distances)
            noisy = inject_distance_noise(data.distances, mult * eps, seeded_rng(seed, "noise"))
            res = run_fibered(data.with_distances(noisy), PipelineConfig(k=16, d=2, seed=seed))
            hits += res.w1_trivial is False
            deaths.append(res.obstruction.death)
        print(f"{mult:g},{hits},{args.seeds},{np.mean(deaths):.3f}", flush=True)


if __name__ == "__main__":
    main()
