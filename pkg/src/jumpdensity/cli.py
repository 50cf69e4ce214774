"""Command-line front end.

Subcommands: simulate, stats, density, bessel, trees, wilson, and the
verification family (verify-thm1, verify-prop1, verify-ray-knight,
verify-total-mass, marginal). Structured results are printed as JSON
(and optionally written to --out); verification subcommands can append a
CSV row for aggregation. Exit status: 0 success / verification passed,
1 verification failed, 2 configuration or validation error.

The seed defaults to the JUMPDENSITY_SEED environment variable, then 0.
"""

import argparse
import csv
import datetime
import json
import math
import os
import sys

import numpy as np

from . import _kernels, density, pathstats, trees, verify, wilson
from .bessel import bessel_i, log_bessel_i
from .errors import JumpdensityError
from .graph import load_graph
from .simulate import FixedTime, InverseLocalTime, simulate_batch


def _default_seed():
    env = os.environ.get("JUMPDENSITY_SEED")
    return int(env) if env else 0


def _resolve_seed(args):
    return args.seed if args.seed is not None else _default_seed()


def _edge_key_pairs(doc):
    """{"a->b": v} -> {("a", "b"): v}."""
    out = {}
    for key, v in doc.items():
        u, _, w = key.partition("->")
        if not w:
            raise JumpdensityError("edge key %r must look like 'u->v'" % key)
        out[(u, w)] = v
    return out


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _tree_spec(doc):
    return {"root": doc["root"], "edges": [tuple(e) for e in doc["edges"]]}


def _cell_from_doc(doc):
    bounds = {lab: (float(lo), float(hi))
              for lab, (lo, hi) in doc["bounds"].items()}
    return verify.LocalTimeCell(bounds=bounds, dependent=doc.get("dependent"))


def _emit(doc, args):
    doc = dict(doc)
    doc["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    text = json.dumps(doc, indent=2, sort_keys=True)
    print(text)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    if getattr(args, "csv", None):
        rows = {k: v for k, v in doc.items() if not isinstance(v, (dict, list))}
        new = not os.path.exists(args.csv)
        with open(args.csv, "a", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=sorted(rows))
            if new:
                writer.writeheader()
            writer.writerow(rows)


def _stopping_rule(args):
    if args.sigma is not None and args.inverse_local_time:
        raise JumpdensityError("give either --sigma or --inverse-local-time")
    if args.sigma is not None:
        return FixedTime(args.sigma)
    if args.inverse_local_time:
        site, _, u = args.inverse_local_time.partition(":")
        if not u:
            raise JumpdensityError(
                "--inverse-local-time needs the form site:budget")
        return InverseLocalTime(site, float(u))
    raise JumpdensityError("a stopping rule is required")


# -- subcommand bodies -----------------------------------------------------


def _cmd_simulate(args):
    g = load_graph(args.graph)
    rule = _stopping_rule(args)
    seed = _resolve_seed(args)
    records = []
    for path in simulate_batch(g, args.start, rule, seed, args.n):
        records.append(json.dumps({
            "start": args.start,
            "horizon": path.horizon,
            "events": [[t, g.labels[j]]
                       for t, j in zip(path.times.tolist(),
                                       path.targets.tolist())],
        }))
    text = "\n".join(records) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_stats(args):
    from .simulate import JumpPath
    g = load_graph(args.graph)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        with open(args.infile) as fh:
            for line in fh:
                doc = json.loads(line)
                times = np.array([e[0] for e in doc["events"]])
                targets = np.array(
                    [g.vertex_index(e[1]) for e in doc["events"]],
                    dtype=np.int32)
                path = JumpPath(g, g.vertex_index(doc["start"]), times,
                                targets, float(doc["horizon"]), validate=True)
                s = pathstats.path_statistics(path)
                tree = s["tree"]
                record = {
                    "ell": s["ell"].values.tolist(),
                    "k": {"%s->%s" % (g.labels[i], g.labels[j]): int(c)
                          for (i, j), c in zip(g.directed_edges(),
                                               s["k"].counts) if c},
                    "a": {"%s->%s" % (g.labels[i], g.labels[j]): int(c)
                          for (i, j), c in zip(g.directed_edges(),
                                               s["a"].values) if c},
                    "tree": {
                        "root": g.labels[tree.root],
                        "edges": sorted([g.labels[i], g.labels[j]]
                                        for i, j in tree.edges()),
                    },
                }
                out.write(json.dumps(record) + "\n")
    finally:
        if args.out:
            out.close()
    return 0


def _cmd_density(args):
    g = load_graph(args.graph)
    doc = _load_json(args.outcome)
    tree = verify.as_tree(g, _tree_spec(doc["tree"]))
    kwargs = {}
    if "current" in doc:
        kwargs["current"] = verify.as_current(g, _edge_key_pairs(doc["current"]))
    if "counts" in doc:
        kwargs["counts"] = verify.as_counts(g, _edge_key_pairs(doc["counts"]))
    outcome = density.JointOutcome(g, doc["i0"], doc["i1"], doc["ell"],
                                   tree, **kwargs)
    if args.mode == "thm1":
        logv = density.theorem1_log_density(g, outcome)
    elif args.mode == "prop1":
        logv = density.prop1_log_density(g, outcome)
    else:
        logv = density.sum_prop1_over_k(g, outcome, truncation=args.M)
    _emit({"mode": args.mode, "log_density": logv,
           "density": 0.0 if math.isinf(logv) else math.exp(logv)}, args)
    return 0


def _cmd_bessel(args):
    if args.log:
        value = log_bessel_i(args.nu, args.z)
    else:
        value = bessel_i(args.nu, args.z)
    print(repr(value))
    return 0


def _cmd_trees(args):
    g = load_graph(args.graph)
    total = trees.weighted_tree_sum(g, args.root)
    doc = {"weighted_tree_sum": total}
    if args.enumerate:
        enumerated = trees.enumerate_spanning_trees(g, args.root)
        doc["n_trees"] = len(enumerated)
        doc["trees"] = [
            sorted([g.labels[i], g.labels[j]] for i, j in t.edges())
            for t in enumerated
        ]
    _emit(doc, args)
    return 0


def _cmd_wilson(args):
    g = load_graph(args.graph)
    kappa = _load_json(args.kappa)
    kg = wilson.KilledGraph(g, kappa)
    order = args.order.split(",")
    seed = _resolve_seed(args)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        for r in range(args.n):
            sample = wilson.wilson_sample(kg, order, seed, r)
            record = {
                "parent": {g.labels[i]: (g.labels[p] if p >= 0 else None)
                           for i, p in enumerate(sample.parent.tolist())},
                "loops": [[g.labels[x] for x in loop]
                          for loop in sample.loops],
                "local_times": {lab: t for lab, t in
                                zip(g.labels, sample.local_times.tolist())},
            }
            out.write(json.dumps(record) + "\n")
    finally:
        if args.out:
            out.close()
    return 0


def _verify_exit(report, args):
    _emit(report.to_dict(), args)
    return 0 if report.passed else 1


def _cmd_verify_thm1(args):
    g = load_graph(args.graph)
    t = _load_json(args.target)
    cell = _cell_from_doc(_load_json(args.cell))
    report = verify.verify_theorem1(
        g, t["i0"], float(t["sigma"]),
        _edge_key_pairs(t["current"]), _tree_spec(t["tree"]), cell,
        args.n, _resolve_seed(args), z_threshold=args.z_threshold,
        n_quad=args.quad_nodes, threads=args.threads)
    return _verify_exit(report, args)


def _cmd_verify_prop1(args):
    g = load_graph(args.graph)
    t = _load_json(args.target)
    cell = _cell_from_doc(_load_json(args.cell))
    report = verify.verify_prop1(
        g, t["i0"], float(t["sigma"]),
        _edge_key_pairs(t["counts"]), _tree_spec(t["tree"]), cell,
        args.n, _resolve_seed(args), z_threshold=args.z_threshold,
        n_quad=args.quad_nodes, threads=args.threads)
    return _verify_exit(report, args)


def _cmd_verify_ray_knight(args):
    g = load_graph(args.graph)
    t = _load_json(args.target)
    cell = _cell_from_doc(_load_json(args.cell))
    report = verify.verify_ray_knight(
        g, t["i0"], float(t["u"]), cell, args.n, _resolve_seed(args),
        z_threshold=args.z_threshold, n_quad=args.quad_nodes,
        threads=args.threads)
    return _verify_exit(report, args)


def _cmd_verify_total_mass(args):
    g = load_graph(args.graph)
    t = _load_json(args.target)
    report = verify.verify_total_mass(
        g, t["i0"], t["i1"], float(t["sigma"]), args.n, _resolve_seed(args),
        cycle_truncation=args.M, z_threshold=args.z_threshold,
        n_quad=args.quad_nodes, threads=args.threads)
    return _verify_exit(report, args)


def _cmd_marginal(args):
    g = load_graph(args.graph)
    t = _load_json(args.target)
    logv = verify.marginal_local_time_density(
        g, t["i0"], t["i1"], t["ell"], cycle_truncation=args.M)
    _emit({"log_density": logv,
           "density": 0.0 if math.isinf(logv) else math.exp(logv)}, args)
    return 0


# -- parser ----------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(
        prog="jumpdensity",
        description="Markov jump processes on weighted graphs: simulation, "
                    "path functionals, and density verification "
                    "(kernel backend: %s)." % _kernels.BACKEND)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, graph=True, seeded=True, reporting=True):
        if graph:
            p.add_argument("--graph", required=True, help="graph JSON file")
        if seeded:
            p.add_argument("--seed", type=int, default=None,
                           help="base seed (default: $JUMPDENSITY_SEED or 0)")
            p.add_argument("--threads", type=int, default=1,
                           help="worker threads; results are identical "
                                "for any value")
        if reporting:
            p.add_argument("--out", help="also write the JSON report here")
            p.add_argument("--csv", help="append a CSV summary row here")

    p = sub.add_parser("simulate", help="sample trajectories to JSONL")
    common(p, reporting=False)
    p.add_argument("--start", required=True)
    p.add_argument("--sigma", type=float, help="fixed time horizon")
    p.add_argument("--inverse-local-time", metavar="SITE:U",
                   help="stop when the local time at SITE reaches U")
    p.add_argument("-n", type=int, default=1)
    p.add_argument("--out", help="output JSONL path (default stdout)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("stats", help="extract path functionals from JSONL")
    common(p, seeded=False, reporting=False)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", help="output JSONL path (default stdout)")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("density", help="evaluate a joint density")
    common(p, seeded=False)
    p.add_argument("--outcome", required=True, help="outcome JSON file")
    p.add_argument("--mode", choices=["thm1", "prop1", "sum"],
                   default="thm1")
    p.add_argument("--M", type=int, default=density.DEFAULT_TRUNCATION,
                   help="series truncation for --mode sum")
    p.set_defaults(func=_cmd_density)

    p = sub.add_parser("bessel", help="modified Bessel function of the "
                                      "first kind, integer order")
    p.add_argument("--nu", type=int, required=True)
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--log", action="store_true", help="return ln I")
    p.set_defaults(func=_cmd_bessel)

    p = sub.add_parser("trees", help="spanning-tree weight sum / enumeration")
    common(p, seeded=False)
    p.add_argument("--root", required=True)
    p.add_argument("--enumerate", action="store_true")
    p.add_argument("--count", action="store_true",
                   help="weighted sum only (default)")
    p.set_defaults(func=_cmd_trees)

    p = sub.add_parser("wilson", help="loop-erased forest sampling "
                                      "under killing")
    common(p, reporting=False)
    p.add_argument("--kappa", required=True,
                   help="JSON file of per-vertex killing rates")
    p.add_argument("--order", required=True,
                   help="comma-separated vertex order")
    p.add_argument("-n", type=int, default=1)
    p.add_argument("--out", help="output JSONL path (default stdout)")
    p.set_defaults(func=_cmd_wilson)

    def verify_common(p):
        common(p)
        p.add_argument("--target", required=True, help="target JSON file")
        p.add_argument("-n", type=int, default=100_000)
        p.add_argument("--z-threshold", type=float,
                       default=verify.DEFAULT_Z_THRESHOLD)
        p.add_argument("--quad-nodes", type=int,
                       default=verify.DEFAULT_QUAD_NODES)

    p = sub.add_parser("verify-thm1",
                       help="Monte Carlo check of the joint "
                            "(current, local times, tree) density")
    verify_common(p)
    p.add_argument("--cell", required=True, help="cell JSON file")
    p.set_defaults(func=_cmd_verify_thm1)

    p = sub.add_parser("verify-prop1",
                       help="Monte Carlo check of the exact-counts density")
    verify_common(p)
    p.add_argument("--cell", required=True)
    p.set_defaults(func=_cmd_verify_prop1)

    p = sub.add_parser("verify-ray-knight",
                       help="Monte Carlo check of the stopped local-time "
                            "density on a tree graph")
    verify_common(p)
    p.add_argument("--cell", required=True)
    p.set_defaults(func=_cmd_verify_ray_knight)

    p = sub.add_parser("verify-total-mass",
                       help="check the density's total mass against the "
                            "endpoint probability")
    verify_common(p)
    p.add_argument("--M", type=int, default=verify.DEFAULT_CYCLE_TRUNCATION,
                   help="cycling-number truncation")
    p.set_defaults(func=_cmd_verify_total_mass)

    p = sub.add_parser("marginal",
                       help="local-time marginal density (summed over "
                            "trees and currents)")
    common(p, seeded=False)
    p.add_argument("--target", required=True,
                   help="JSON file with i0, i1, ell")
    p.add_argument("--M", type=int, default=verify.DEFAULT_CYCLE_TRUNCATION)
    p.set_defaults(func=_cmd_marginal)

    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except JumpdensityError as exc:
        sys.stderr.write("error: %s: %s\n" % (type(exc).__name__, exc))
        return 2
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        sys.stderr.write("error: %s: %s\n" % (type(exc).__name__, exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
