"""Run the reference SIR ensemble and print its summary statistics."""

import argparse
import json

from abmsim.montecarlo import default_workers, estimate_r0, run_ensemble, sir_summary
from abmsim.sir import SirParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--b", type=float, default=0.047)
    ap.add_argument("--runs", type=int, default=500)
    ap.add_argument("--steps", type=int, default=120)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--scheme", choices=("global", "neighborhood"), default="global")
    args = ap.parse_args()

    params = SirParams(b=args.b, contact_scheme=args.scheme)
    ens = run_ensemble("sir", params, args.runs, args.steps, args.seed, workers=default_workers())
    summary = sir_summary(ens)
    summary["r0_mean"], summary["r0_se"] = estimate_r0(params, args.runs, args.seed)
    print(json.dumps(summary, indent=2))


if __name__ == "__main__":
    main()
