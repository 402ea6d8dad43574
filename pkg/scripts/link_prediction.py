#!/usr/bin/env python3
"""AA and PA link prediction with sampled, estimated and true degrees."""
import os

from _common import base_parser

from degreedyn.dynamics import DynamicsModel
from degreedyn.evaluation import ground_truth
from degreedyn.graph import gen_barabasi_albert, load_edge_list
from degreedyn.linkpred import linkpred_experiment


def main():
    p = base_parser(__doc__, reps=50)
    p.add_argument("--graph", help="edge list; a BA graph is generated when omitted")
    p.add_argument("--dynamics", default="epidemic",
                   choices=["ecological", "regulatory", "epidemic"])
    p.add_argument("--p", type=float, default=0.01)
    p.add_argument("--estimator", default="topoplus", choices=["zerotopo", "topoplus", "round"])
    args = p.parse_args()
    g = load_edge_list(args.graph) if args.graph else gen_barabasi_albert(args.n, args.attach, args.seed)
    model = DynamicsModel.default(args.dynamics)
    x = ground_truth(g, model)
    rep = linkpred_experiment(g, x, model, args.p, args.estimator, reps=args.reps, seed=args.seed,
                              network=os.path.basename(args.graph) if args.graph else "ba")
    for r in rep.rows:
        print(f"{r['metric']:>3} {r['variant']:>8}  AUC {r['auc_mean']:.4f} +- {r['auc_std']:.4f}")
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"linkpred_{args.dynamics}.csv")
    with open(path, "w") as fh:
        fh.write(rep.csv_text())
    print("wrote", path)


if __name__ == "__main__":
    main()
