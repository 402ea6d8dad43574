#!/usr/bin/env python3
"""TopoPlus accuracy under uniform-edge and random-walk sampling."""
from _common import ba_spec, base_parser, show, write

from degreedyn.evaluation import ExperimentConfig, run_experiment


def main():
    p = base_parser(__doc__)
    p.add_argument("--dynamics", default="epidemic",
                   choices=["ecological", "regulatory", "epidemic"])
    p.add_argument("--fractions", type=float, nargs="+", default=[0.1, 0.2, 0.3])
    args = p.parse_args()
    for sampler in ("uniform", "random_walk"):
        cfg = ExperimentConfig(graph=ba_spec(args), dynamics={"family": args.dynamics},
                               fractions=args.fractions, sampler=sampler,
                               estimators=["topoplus", "round"], repetitions=args.reps,
                               seed=args.seed)
        rep = run_experiment(cfg, jobs=args.jobs)
        print(f"[{sampler}]")
        show(rep.rows, ["estimator", "fraction"])
        print("wrote", write(rep, args.out, f"sampler_{sampler}_{args.dynamics}"))


if __name__ == "__main__":
    main()
