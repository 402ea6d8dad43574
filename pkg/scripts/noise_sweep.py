#!/usr/bin/env python3
"""Accuracy against multiplicative measurement noise on the observed states."""
from _common import ba_spec, base_parser, show, write

from degreedyn.evaluation import ExperimentConfig, run_experiment


def main():
    p = base_parser(__doc__)
    p.add_argument("--dynamics", default="epidemic",
                   choices=["ecological", "regulatory", "epidemic"])
    p.add_argument("--fraction", type=float, default=0.1)
    p.add_argument("--sigmas", type=float, nargs="+", default=[0.0, 0.05, 0.1, 0.2, 0.3])
    args = p.parse_args()
    cfg = ExperimentConfig(graph=ba_spec(args), dynamics={"family": args.dynamics},
                           fractions=[args.fraction], sigmas=args.sigmas,
                           repetitions=args.reps, seed=args.seed)
    rep = run_experiment(cfg, jobs=args.jobs)
    show(rep.rows, ["estimator", "sigma"])
    print("wrote", write(rep, args.out, f"noise_{args.dynamics}"))


if __name__ == "__main__":
    main()
