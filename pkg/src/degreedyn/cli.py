"""Command line: generate | simulate | sample | estimate | evaluate | linkpred.

Exit codes: 0 success, 1 usage/config error, 2 I/O error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import yaml

from .dynamics import DynamicsModel, initial_state
from .estimators import ESTIMATORS, EstimateResult, EstimationError, FixedPointOptions, estimate
from .evaluation import ExperimentConfig, ground_truth, run_experiment
from .graph import EdgeListError, gen_barabasi_albert, gen_erdos_renyi, gen_regular, \
    load_edge_list, save_edge_list
from .linkpred import METRICS, VARIANTS, linkpred_experiment
from .sampling import SAMPLERS, load_subgraph, save_subgraph
from .solver import SolverOptions, SteadyStateError, load_states, save_states, simulate_full

log = logging.getLogger("degreedyn")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _check_output(path, force):
    if path and os.path.exists(path) and not force:
        raise UsageError(f"{path} exists (use --force to overwrite)")


def _model_from_args(args) -> DynamicsModel:
    params = {}
    for item in args.param or []:
        key, _, val = item.partition("=")
        if not _:
            raise UsageError(f"--param expects NAME=VALUE, got {item!r}")
        params[key] = float(val)
    try:
        return DynamicsModel.from_dict({"family": args.dynamics, "params": params})
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None


def _load_config(path) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise UsageError(f"{path}: config must be a mapping")
    return data


def cmd_generate(args):
    _check_output(args.output, args.force)
    try:
        if args.model == "ba":
            g = gen_barabasi_albert(args.n, args.attach, args.seed)
        elif args.model == "er":
            g = gen_erdos_renyi(args.n, args.m, args.seed)
        else:
            g = gen_regular(args.n, args.k, args.seed)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    if args.output:
        save_edge_list(g, args.output)
    else:
        sys.stdout.write("".join(f"{u} {v}\n" for u, v in g.edges))
    log.info("generated %s", g)


def cmd_simulate(args):
    _check_output(args.output, args.force)
    g = load_edge_list(args.graph)
    model = _model_from_args(args)
    x0 = initial_state(model) if args.x0 is None else args.x0
    x = simulate_full(g, model, x0, SolverOptions(steady_tol=args.steady_tol))
    save_states(x, args.output)
    log.info("steady state for %s written to %s", g, args.output)


def cmd_sample(args):
    g = load_edge_list(args.graph)
    edge_path, vert_path = args.output + ".edges", args.output + ".vertices"
    for p in (edge_path, vert_path):
        _check_output(p, args.force)
    try:
        sub = SAMPLERS[args.sampler](g, args.fraction, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    save_subgraph(sub, edge_path, vert_path)
    if sub.shortfall:
        log.warning("random walk collected only %d edges", sub.m)


def write_estimate(res: EstimateResult, states, path, model: DynamicsModel, extra: dict):
    summary = {"method": res.method, "x_eff": res.x_eff, "beta": res.beta,
               "iterations": res.iterations, "converged": res.converged,
               "inestimable": int(res.inestimable.sum()), "clamped": res.clamped,
               "dynamics": model.to_dict(), **extra}
    with open(path, "w") as fh:
        for k, v in summary.items():
            fh.write(f"# {k}: {json.dumps(v)}\n")
        fh.write("vertex,state,sampled_degree,d_real,delta_real,d,delta_hat,inestimable\n")
        for i in range(len(states)):
            fh.write(f"{i},{states[i]!r},{res.sampled_degrees[i]},{res.d_real[i]!r},"
                     f"{res.delta_real[i]!r},{res.d[i]},{res.delta_hat[i]},"
                     f"{int(res.inestimable[i])}\n")


def cmd_estimate(args):
    _check_output(args.output, args.force)
    states = load_states(args.states)
    model = _model_from_args(args)
    sub = None
    if args.subgraph:
        sub = load_subgraph(args.subgraph + ".edges", args.subgraph + ".vertices", len(states))
    elif args.estimator in ("topoplus", "round"):
        log.warning("no subgraph given: %s runs on the empty subgraph", args.estimator)
    fp = FixedPointOptions(fp_tol=args.fp_tol, max_iters=args.max_iters)
    res = estimate(args.estimator, states, sub, model, fp, SolverOptions())
    write_estimate(res, states, args.output, model, {"seed": args.seed})


def cmd_evaluate(args):
    raw = _load_config(args.config)
    output = raw.pop("output", None)
    jobs = raw.pop("jobs", None)
    overrides = {"repetitions": args.reps, "seed": args.seed, "cache_dir": args.cache_dir}
    raw.update({k: v for k, v in overrides.items() if v is not None})
    output = args.output or output
    jobs = args.jobs or jobs or os.cpu_count() or 1
    if not output:
        raise UsageError("no output prefix: pass -o or set 'output' in the config")
    try:
        cfg = ExperimentConfig.from_dict(raw)
    except (ValueError, TypeError, KeyError) as exc:
        raise UsageError(f"invalid config: {exc}") from None
    csv_path, json_path = output + ".csv", output + ".json"
    for p in (csv_path, json_path):
        _check_output(p, args.force)
    report = run_experiment(cfg, jobs=jobs)
    report.meta["effective_config"] = {**cfg.to_dict(), "output": output}
    report.write(csv_path, json_path)


def cmd_linkpred(args):
    _check_output(args.output, args.force)
    g = load_edge_list(args.graph)
    model = _model_from_args(args)
    if args.states:
        states = load_states(args.states, g.n)
    else:
        states = ground_truth(g, model, args.x0, SolverOptions(), args.cache_dir)
    try:
        rep = linkpred_experiment(g, states, model, args.p, args.estimator, args.metrics,
                                  args.variants, args.reps, args.seed,
                                  network=args.network or os.path.basename(args.graph))
    except ValueError as exc:
        if "empty positive set" in str(exc):
            raise UsageError(str(exc)) from None
        raise
    with open(args.output, "w") as fh:
        fh.write(rep.csv_text())


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="degreedyn", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sp = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def dyn(q):
        q.add_argument("--dynamics", required=True, choices=["ecological", "regulatory", "epidemic"])
        q.add_argument("--param", action="append", metavar="NAME=VALUE",
                       help="override a dynamics parameter (repeatable)")

    q = sp.add_parser("generate", help="write a synthetic edge list")
    q.add_argument("--model", required=True, choices=["ba", "er", "regular"])
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--attach", type=int, default=3)
    q.add_argument("--m", type=int)
    q.add_argument("--k", type=int)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("-o", "--output")
    q.add_argument("--force", action="store_true")
    q.set_defaults(func=cmd_generate)

    q = sp.add_parser("simulate", help="integrate the network dynamics to a steady state")
    q.add_argument("--graph", required=True)
    dyn(q)
    q.add_argument("--x0", type=float)
    q.add_argument("--steady-tol", type=float, default=SolverOptions().steady_tol)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("-o", "--output", required=True)
    q.add_argument("--force", action="store_true")
    q.set_defaults(func=cmd_simulate)

    q = sp.add_parser("sample", help="sample a subgraph")
    q.add_argument("--graph", required=True)
    q.add_argument("--sampler", choices=sorted(SAMPLERS), default="uniform")
    q.add_argument("--fraction", type=float, required=True)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("-o", "--output", required=True, help="prefix for .edges/.vertices files")
    q.add_argument("--force", action="store_true")
    q.set_defaults(func=cmd_sample)

    q = sp.add_parser("estimate", help="estimate degrees from a states file")
    q.add_argument("--states", required=True)
    dyn(q)
    q.add_argument("--subgraph", help="prefix of .edges/.vertices files from 'sample'")
    q.add_argument("--estimator", choices=ESTIMATORS, default="topoplus")
    q.add_argument("--fp-tol", type=float, default=FixedPointOptions().fp_tol)
    q.add_argument("--max-iters", type=int, default=FixedPointOptions().max_iters)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("-o", "--output", required=True)
    q.add_argument("--force", action="store_true")
    q.set_defaults(func=cmd_estimate)

    q = sp.add_parser("evaluate", help="run an experiment grid from a YAML config")
    q.add_argument("--config", required=True)
    q.add_argument("--reps", type=int)
    q.add_argument("--seed", type=int)
    q.add_argument("--jobs", type=int)
    q.add_argument("--cache-dir")
    q.add_argument("-o", "--output", help="prefix for .csv/.json outputs")
    q.add_argument("--force", action="store_true")
    q.set_defaults(func=cmd_evaluate)

    q = sp.add_parser("linkpred", help="AA/PA link-prediction AUC")
    q.add_argument("--graph", required=True)
    dyn(q)
    q.add_argument("--states")
    q.add_argument("--x0", type=float)
    q.add_argument("--p", type=float, default=0.01)
    q.add_argument("--estimator", choices=ESTIMATORS, default="topoplus")
    q.add_argument("--metrics", nargs="+", choices=METRICS, default=list(METRICS))
    q.add_argument("--variants", nargs="+", choices=VARIANTS, default=list(VARIANTS))
    q.add_argument("--reps", type=int, default=10)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--network")
    q.add_argument("--cache-dir")
    q.add_argument("-o", "--output", required=True)
    q.add_argument("--force", action="store_true")
    q.set_defaults(func=cmd_linkpred)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        print(f"degreedyn: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, EdgeListError) as exc:
        print(f"degreedyn: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SteadyStateError, EstimationError, FloatingPointError) as exc:
        print(f"degreedyn: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
