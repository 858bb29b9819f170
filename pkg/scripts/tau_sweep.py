"""Heavy-tailed scenery: how the 90th percentile of |Z_n| / n**tau moves with n.

    python scripts/tau_sweep.py [--replicas 400] [--seeds 5]

For Pareto(beta) innovations and a lattice walk the fluctuations of Z_n live
on the scale n**(1 - 1/2 + 1/(2 beta)) (n**(5/6) for beta = 1.5), so the
normalized percentile decays only when tau exceeds that exponent.
"""
import argparse

from rwrs_lab.experiments import ExperimentConfig, run_theorem3
from rwrs_lab.scenery import SceneryModel
from rwrs_lab.walk import WalkModel


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--replicas", type=int, default=400)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--index", type=float, default=1.5)
    args = ap.parse_args()
    grid = (2**10, 2**12, 2**14, 2**16)
    scale = 0.5 + 1 / (2 * args.index)
    print(f"fluctuation exponent for index {args.index}: {scale:.4f}")
    for tau in (0.8, 0.85, 0.9, 1.0):
        slopes = []
        for s in range(args.seeds):
            c = ExperimentConfig(WalkModel.rademacher(), SceneryModel.heavy_tail(args.index), grid,
                                 replicas=args.replicas, base_seed=100 + s, mode="theorem3", tau=tau)
            slopes.append(run_theorem3(c, threads=4).slopes["p90_abs_norm"]["slope"])
        print(f"tau={tau:.2f}  p90 slope per seed: " + " ".join(f"{x:+.3f}" for x in slopes)
              + f"   predicted {scale - tau:+.3f}")


if __name__ == "__main__":
    main()
