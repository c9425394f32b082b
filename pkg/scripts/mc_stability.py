"""How many replicates until the secondary-case mean settles?

Runs one large batch of replicates and reports the first run count at which
adding another batch moves the running mean by less than the tolerance.
"""

import argparse
from abmsim.montecarlo import mc_stability
from abmsim.rng import SeedSpec
from abmsim.sir import SirParams, count_secondary_cases, min_horizon, run_epidemic


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--b", type=float, default=0.047)
    ap.add_argument("--runs", type=int, default=4000)
    ap.add_argument("--batch", type=int, default=50)
    ap.add_argument("--tol", type=float, nargs="+", default=[0.05, 0.01, 0.002])
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    params = SirParams(b=args.b)
    horizon = min_horizon(params)
    values = [count_secondary_cases(run_epidemic(params, horizon, SeedSpec(args.seed, i))) for i in range(args.runs)]
    print(f"b={args.b} runs={args.runs} batch={args.batch} mean={sum(values) / len(values):.4f}")
    for tol in args.tol:
        n = mc_stability(values, args.batch, tol)
        print(f"tol={tol:<6} stable at n={n if n is not None else 'not reached'}")


if __name__ == "__main__":
    main()
