"""Command-line interface.

Sub-commands: ``sample`` (draw one sub-graph), ``pace`` (community
pipeline), ``cp``/``cp-full`` (core-periphery pipeline and whole-graph
baseline), ``generate`` (block-model graphs), ``score`` (metrics over
files), ``theory`` (closed-form coverage evaluators), ``experiment``
(simulation settings), and ``real`` (real-data reports).

Per-node outputs (labels, scores, sampled nodes) go to standard output;
scalar summaries go to standard error so stdout stays machine-readable.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from typing import List, Optional

import numpy as np

from . import coreperiphery, harness, metrics, theory
from .community import run_pace
from .generators import SbmSpec, generate_sbm
from .graph import read_edge_list, read_labels, write_edge_list, write_labels
from .sampling import SCHEMES, sample


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphdnc",
        description="Graph sub-sampling, divide-and-conquer community and "
                    "core-periphery detection, and coverage theory.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw one sub-graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--scheme", required=True, choices=SCHEMES)
    p.add_argument("--target", required=True, type=int)
    p.add_argument("--seed", required=True, type=int)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("pace", help="divide-and-conquer community detection")
    p.add_argument("--graph", required=True)
    p.add_argument("--k", required=True, type=int)
    p.add_argument("--q", required=True, type=float)
    p.add_argument("--b", required=True, type=int)
    p.add_argument("--scheme", required=True, choices=SCHEMES)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--truth")
    p.set_defaults(func=_cmd_pace)

    p = sub.add_parser("cp", help="divide-and-conquer core-periphery scoring")
    p.add_argument("--graph", required=True)
    p.add_argument("--q", required=True, type=float)
    p.add_argument("--b", required=True, type=int)
    p.add_argument("--scheme", required=True, choices=SCHEMES)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--truth")
    p.set_defaults(func=_cmd_cp)

    p = sub.add_parser("cp-full", help="whole-graph core-periphery baseline")
    p.add_argument("--graph", required=True)
    p.set_defaults(func=_cmd_cp_full)

    p = sub.add_parser("generate", help="draw a block-model graph")
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--blocks", required=True,
                   help="comma-separated block sizes summing to n")
    p.add_argument("--p", required=True,
                   help="comma-separated probabilities: full K*K row-major "
                        "matrix or upper triangle row by row")
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--labels-out",
                   help="truth label path (default: OUT.labels)")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("score", help="metrics over label/score files")
    p.add_argument("--metric", required=True,
                   choices=("ari", "auc", "q", "jaccard", "delta",
                            "delta-tilde"))
    p.add_argument("--pred", help="label/score file being evaluated")
    p.add_argument("--truth", help="reference label file")
    p.add_argument("--graph", help="edge list (modularity only)")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("theory", help="closed-form coverage evaluators")
    p.add_argument("--scheme", required=True, choices=SCHEMES)
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--k", required=True, type=int)
    p.add_argument("--p11", required=True, type=float)
    p.add_argument("--p12", required=True, type=float)
    p.add_argument("--p22", required=True, type=float)
    p.add_argument("--q", required=True, type=float)
    p.add_argument("--mc-reps", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_theory)

    p = sub.add_parser("experiment", help="run a simulation setting")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--setting", type=int, choices=range(1, 13))
    p.add_argument("--scale", choices=("desk", "paper"), default="desk")
    p.add_argument("--schemes", help="comma-separated scheme subset")
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true",
                   help="also write wall times to timing.csv")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("real", help="real-data report on an edge list")
    p.add_argument("--task", required=True, choices=("community", "cp"))
    p.add_argument("--graph", required=True)
    p.add_argument("--schemes", default=",".join(SCHEMES))
    p.add_argument("--k", type=int, default=2,
                   help="community count (community task)")
    p.add_argument("--q", required=True, type=float)
    p.add_argument("--b", required=True, type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--truth", help="truth labels (community task)")
    p.add_argument("--full", action="store_true",
                   help="include the whole-graph optimizer (cp task)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_real)
    return parser


def _cmd_sample(args) -> int:
    g = read_edge_list(args.graph)
    sub = sample(g, args.scheme, args.target, args.seed)
    print(" ".join(str(v) for v in sub.parent_ids))
    local_to_parent = sub.parent_ids
    for u, v in sub.graph.edges:
        print(f"{local_to_parent[u]} {local_to_parent[v]}")
    return 0


def _cmd_pace(args) -> int:
    g = read_edge_list(args.graph)
    result = run_pace(g, args.k, args.q, args.b, args.scheme, args.seed)
    print("node,label")
    for node in range(g.n):
        print(f"{node},{result.labels[node]}")
    print(f"q {metrics.modularity(g, result.labels)!r}", file=sys.stderr)
    if args.truth:
        truth = read_labels(args.truth, g.n)
        mask = truth >= 0
        value = metrics.ari(result.labels[mask], truth[mask])
        print(f"ari {value!r}", file=sys.stderr)
    return 0


def _cmd_cp(args) -> int:
    g = read_edge_list(args.graph)
    score = coreperiphery.run_cp(g, args.q, args.b, args.scheme, args.seed)
    sweep = coreperiphery.binarize_by_sweep(g, score.c_hat)
    print("node,score")
    c_hat = score.c_hat
    for node in range(g.n):
        print(f"{node},{float(c_hat[node])!r}")
    print(f"k {sweep.k}", file=sys.stderr)
    print(f"be {sweep.rho!r}", file=sys.stderr)
    if args.truth:
        truth = read_labels(args.truth, g.n)
        print(f"auc {metrics.auc(c_hat, truth)!r}", file=sys.stderr)
    return 0


def _cmd_cp_full(args) -> int:
    g = read_edge_list(args.graph)
    labels = coreperiphery.optimize_core_labels(g)
    print("node,core")
    for node in range(g.n):
        print(f"{node},{labels[node]}")
    print(f"k {int(labels.sum())}", file=sys.stderr)
    print(f"be {coreperiphery.be_metric(g, labels)!r}", file=sys.stderr)
    return 0


def _parse_probability_matrix(text: str, k: int) -> np.ndarray:
    vals = [float(v) for v in text.split(",") if v.strip() != ""]
    if len(vals) == k * k:
        return np.asarray(vals, dtype=np.float64).reshape(k, k)
    if len(vals) == k * (k + 1) // 2:
        p = np.zeros((k, k))
        pos = 0
        for i in range(k):
            for j in range(i, k):
                p[i, j] = p[j, i] = vals[pos]
                pos += 1
        return p
    raise ValueError(f"need {k * k} (full) or {k * (k + 1) // 2} (upper "
                     f"triangle) probabilities, got {len(vals)}")


def _cmd_generate(args) -> int:
    blocks = tuple(int(v) for v in args.blocks.split(","))
    p = _parse_probability_matrix(args.p, len(blocks))
    spec = SbmSpec(n=args.n, block_sizes=blocks, p=p)
    g, labels = generate_sbm(spec, args.seed)
    write_edge_list(g, args.out)
    labels_path = args.labels_out or args.out + ".labels"
    write_labels(labels, labels_path)
    print(f"nodes {g.n}", file=sys.stderr)
    print(f"edges {g.m}", file=sys.stderr)
    print(f"labels {labels_path}", file=sys.stderr)
    return 0


def _max_node_id(path: str) -> int:
    """Largest first-column node id in a per-node file (-1 if empty)."""
    top = -1
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith(("#", "%")):
                continue
            top = max(top, int(line.split()[0]))
    return top


def _read_score_file(path: str) -> np.ndarray:
    """Per-node values as 'node value' lines, dense over 0..max id."""
    nodes: List[int] = []
    vals: List[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith(("#", "%")):
                continue
            a, b = line.split()[:2]
            nodes.append(int(a))
            vals.append(float(b))
    out = np.zeros(max(nodes) + 1 if nodes else 0, dtype=np.float64)
    out[np.asarray(nodes, dtype=np.int64)] = vals
    return out


def _cmd_score(args) -> int:
    metric = args.metric
    if metric == "q":
        if not (args.graph and args.pred):
            raise ValueError("modularity needs --graph and --pred")
        g = read_edge_list(args.graph)
        labels = read_labels(args.pred, g.n)
        value = metrics.modularity(g, labels)
    elif metric in ("ari", "delta", "delta-tilde", "auc", "jaccard"):
        if not (args.pred and args.truth):
            raise ValueError(f"{metric} needs --pred and --truth")
        if metric == "auc":
            scores = _read_score_file(args.pred)
            truth = read_labels(args.truth, scores.shape[0])
            value = metrics.auc(scores, truth)
        elif metric == "delta":
            scores = _read_score_file(args.pred)
            truth = read_labels(args.truth, scores.shape[0])
            value = metrics.misclustering_cp(scores, truth)
        else:
            n = max(_max_node_id(args.pred), _max_node_id(args.truth)) + 1
            pred = read_labels(args.pred, n)
            truth = read_labels(args.truth, n)
            if metric == "ari":
                value = metrics.ari(pred, truth)
            elif metric == "jaccard":
                value = metrics.jaccard(np.flatnonzero(pred == 1),
                                        np.flatnonzero(truth == 1))
            else:
                value = _delta_tilde_from_labels(pred, truth)
    print(repr(float(value)))
    return 0


def _delta_tilde_from_labels(pred: np.ndarray, truth: np.ndarray) -> float:
    """Squared-difference rate between the two partitions' pair indicators."""
    same_pred = pred[:, None] == pred[None, :]
    same_truth = truth[:, None] == truth[None, :]
    n = pred.shape[0]
    return float(np.count_nonzero(same_pred != same_truth)) / (n * n)


def _cmd_theory(args) -> int:
    params = theory.CpSbmParams(n=args.n, k=args.k, p11=args.p11,
                                p12=args.p12, p22=args.p22, q=args.q)
    if args.scheme in ("bfs", "dfs"):
        raise ValueError(f"no closed-form coverage for scheme '{args.scheme}'")
    if args.scheme == "rw":
        e_l = theory.rw_expected_core_nodes(params, params.walk_length)
        xi_val = e_l / (args.q * args.k)
        print(f"xi_effective {xi_val!r}")
    else:
        print(f"xi {theory.xi(args.scheme, params)!r}")
        print(f"xi_limit {theory.xi_limit(args.scheme, params)!r}")
    uncovered = theory.expected_uncovered_core_fraction(args.scheme, params)
    print(f"expected_uncovered_core_fraction {uncovered!r}")
    if args.mc_reps > 0:
        spec = SbmSpec(n=args.n, block_sizes=(args.k, args.n - args.k),
                       p=np.array([[args.p11, args.p12],
                                   [args.p12, args.p22]]))
        mean, se = theory.mc_expected_core_sampled(spec, args.scheme, args.q,
                                                   args.mc_reps, args.seed)
        print(f"mc_mean {mean!r}")
        print(f"mc_se {se!r}")
    return 0


def _cmd_experiment(args) -> int:
    if (args.config is None) == (args.setting is None):
        raise ValueError("give exactly one of --config or --setting")
    if args.config:
        config = harness.ExperimentConfig.from_json(args.config)
        if args.reps is not None:
            config = _replace(config, reps=args.reps)
        if args.schemes:
            config = _replace(config, schemes=tuple(args.schemes.split(",")))
    else:
        schemes = tuple(args.schemes.split(",")) if args.schemes else SCHEMES
        config = harness.setting_config(args.setting, args.scale,
                                        seed=args.seed, reps=args.reps,
                                        schemes=schemes)
    workers = harness.resolve_workers(args.workers)
    rows, timing_rows = harness.run_setting(config, workers=workers,
                                            timing=args.timing)
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "results.csv")
    harness.write_results(rows, out_path)
    print(f"rows {len(rows)}", file=sys.stderr)
    print(f"results {out_path}", file=sys.stderr)
    if args.timing:
        timing_path = os.path.join(args.out, "timing.csv")
        harness.write_timings(timing_rows, timing_path)
        print(f"timing {timing_path}", file=sys.stderr)
    return 0


def _replace(config, **kw):
    return dataclasses.replace(config, **kw)


def _cmd_real(args) -> int:
    schemes = tuple(args.schemes.split(","))
    os.makedirs(args.out, exist_ok=True)
    report_path = os.path.join(args.out, "report.csv")
    if args.task == "community":
        rows = harness.run_real_community(args.graph, schemes, args.k, args.q,
                                          args.b, args.seed,
                                          truth_path=args.truth)
        has_ari = any("ari" in row for row in rows)
        header = ["method", "size", "q"] + (["ari"] if has_ari else [])
        with open(report_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                cells = [str(row["method"]), repr(row["size"]), repr(row["q"])]
                if has_ari:
                    cells.append(repr(row["ari"]))
                fh.write(",".join(cells) + "\n")
    else:
        rows, jac, names = harness.run_real_cp(args.graph, schemes, args.q,
                                               args.b, args.seed,
                                               include_full=args.full)
        with open(report_path, "w", encoding="utf-8", newline="") as fh:
            fh.write("method,k,be\n")
            for row in rows:
                fh.write(f"{row['method']},{row['k']},{row['be']!r}\n")
        jac_path = os.path.join(args.out, "jaccard.csv")
        with open(jac_path, "w", encoding="utf-8", newline="") as fh:
            fh.write("method," + ",".join(names) + "\n")
            for name, row in zip(names, jac):
                fh.write(name + "," + ",".join(repr(v) for v in row) + "\n")
        print(f"jaccard {jac_path}", file=sys.stderr)
    print(f"report {report_path}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
