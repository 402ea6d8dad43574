"""Helpers shared by the experiment scripts."""
import argparse
import os


def base_parser(description, reps=20):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--n", type=int, default=500, help="BA graph size")
    p.add_argument("--attach", type=int, default=3, help="BA edges per new vertex")
    p.add_argument("--reps", type=int, default=reps)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", default="results", help="output directory")
    return p


def ba_spec(args):
    return {"generator": "ba", "n": args.n, "attach": args.attach, "seed": args.seed}


def write(report, out_dir, name):
    os.makedirs(out_dir, exist_ok=True)
    prefix = os.path.join(out_dir, name)
    report.write(prefix + ".csv", prefix + ".json")
    return prefix + ".csv"


def show(rows, keys):
    cols = keys + ["accuracy_mean", "accuracy_std"]
    print("  ".join(f"{c:>14}" for c in cols))
    for r in rows:
        print("  ".join(f"{r[c]:>14.4f}" if isinstance(r[c], float) else f"{r[c]:>14}"
                        for c in cols))
