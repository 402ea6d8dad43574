#!/usr/bin/env python3
"""Accuracy of ZeroTopo, TopoPlus and TopoPlus+Round against the edge-sampling fraction."""
from _common import ba_spec, base_parser, show, write

from degreedyn.evaluation import ExperimentConfig, run_experiment


def main():
    p = base_parser(__doc__)
    p.add_argument("--dynamics", default="epidemic",
                   choices=["ecological", "regulatory", "epidemic"])
    p.add_argument("--fractions", type=float, nargs="+", default=[0.1, 0.2, 0.3])
    args = p.parse_args()
    cfg = ExperimentConfig(graph=ba_spec(args), dynamics={"family": args.dynamics},
                           fractions=args.fractions, repetitions=args.reps, seed=args.seed)
    rep = run_experiment(cfg, jobs=args.jobs)
    show(rep.rows, ["estimator", "fraction"])
    print("wrote", write(rep, args.out, f"fractions_{args.dynamics}"))


if __name__ == "__main__":
    main()
