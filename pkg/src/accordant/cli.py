"""Command line entry point: ``accordant {fit,feasible,compare,oracle,synth}``.

Exit codes: 0 ok, 1 internal error, 2 infeasible, 3 ingestion error,
4 oracle budget exceeded, 64 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import analysis
from .engine import akmeans_restarts, feasible_k_range
from .io import (
    Component,
    IngestConfig,
    IngestionError,
    SplitRule,
    SynthSpec,
    generate,
    load_csv,
    random_instance,
    write_csv,
    write_result,
)
from .model import AccordanceParams, GroupedDataset, InfeasibleError, ParameterError, is_rt_accordant
from .oracle import BudgetExceeded, optimal_accordant, optimal_unconstrained

log = logging.getLogger("accordant")

EXIT_OK, EXIT_INTERNAL, EXIT_INFEASIBLE, EXIT_INGEST, EXIT_BUDGET, EXIT_USAGE = 0, 1, 2, 3, 4, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_data(p, required=True):
    p.add_argument("data", nargs=None if required else "?", help="CSV file with a header row")
    p.add_argument("--group-col", default="group", help="name or 0-based index of the group column")
    p.add_argument("--standardize", action="store_true", help="z-score features after encoding")


def _add_params(p):
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--tau", type=int, default=300)
    p.add_argument("--delta", type=float, default=1e-7)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init", choices=["uniform", "distinct-groups"], default="distinct-groups")
    p.add_argument("--workers", type=int, default=None, help="threads for restarts")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="accordant", description="Accordant k-means clustering")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="cluster a CSV file and write a result JSON")
    _add_data(p)
    _add_params(p)
    p.add_argument("--algo", choices=["akmeans", "kmeans"], default="akmeans")
    p.add_argument("--out", default="result.json")
    p.add_argument("--no-timing", action="store_true", help="write wall_ms as 0 for byte-identical reruns")

    p = sub.add_parser("feasible", help="largest k admitting an accordant clustering")
    _add_data(p, required=False)
    p.add_argument("--sizes", help="comma-separated group sizes instead of a data file")
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--upto", type=int, default=None, help="print verdicts for k = 1..UPTO")

    p = sub.add_parser("compare", help="akmeans vs kmeans over many seeds")
    _add_data(p)
    _add_params(p)
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--algos", default="akmeans,kmeans")
    p.add_argument("--out", default=None, help="CSV table path (stdout when omitted)")

    p = sub.add_parser("oracle", help="compare akmeans with the exhaustive optimum")
    _add_data(p, required=False)
    _add_params(p)
    p.add_argument("--batch", type=int, default=0, help="number of random instances instead of a data file")
    p.add_argument("--n", type=int, default=10, help="points per random instance")
    p.add_argument("--m", type=int, default=2, help="groups per random instance")
    p.add_argument("--rho", type=int, default=2, help="dimension of random instances")
    p.add_argument("--tolerance", type=float, default=0.05, help="relative gap counted as a match")

    p = sub.add_parser("synth", help="write a Gaussian-blob dataset and its planted labels")
    p.add_argument("--centers", required=True, help="semicolon-separated centers, e.g. '0,0;10,0'")
    p.add_argument("--std", type=float, default=1.0)
    p.add_argument("--count", type=int, default=100, help="points per component")
    p.add_argument("--groups", default=None, help="comma-separated group per component")
    p.add_argument("--split", action="append", default=[],
                   help="COMPONENT:AXIS:THRESHOLD:LOW:HIGH, may repeat")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV path; planted labels go to <stem>.planted.csv")
    return parser


def _group_col(value: str):
    return int(value) if value.lstrip("-").isdigit() else value


def _load(args) -> GroupedDataset:
    return load_csv(args.data, IngestConfig(group_column=_group_col(args.group_col), standardize=args.standardize))


def _params(args, dataset: GroupedDataset) -> AccordanceParams:
    try:
        params = AccordanceParams(
            k=args.k, r=args.r, t=args.t, tau=args.tau, delta=args.delta,
            restarts=args.restarts, seed=args.seed, init_mode=args.init,
        )
        params.check_against(dataset)
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc
    return params


def _metrics(dataset, assignment) -> dict:
    out = {}
    for name, fn in (("silhouette", analysis.silhouette), ("davies_bouldin", analysis.davies_bouldin)):
        try:
            out[name] = fn(dataset, assignment)
        except analysis.MetricUndefinedError:
            pass
    return out


def cmd_fit(args) -> int:
    dataset = _load(args)
    params = _params(args, dataset)
    start = time.perf_counter()
    result = akmeans_restarts(dataset, params, algo=args.algo, workers=args.workers)
    wall_ms = 0.0 if args.no_timing else (time.perf_counter() - start) * 1000
    doc = write_result(result, params, dataset, args.out, _metrics(dataset, result.assignment), wall_ms,
                       extra={"algo": args.algo})
    groups = ", ".join(f"{g['label']}->{g['cluster']} ({g['fraction']:.3f})" for g in doc["accordant_groups"])
    print(f"{args.algo}: sse={result.sse:.6f} iterations={result.iterations} "
          f"accordant_groups=[{groups}] out={args.out}")
    return EXIT_OK


def cmd_feasible(args) -> int:
    if args.sizes:
        try:
            sizes = [int(s) for s in args.sizes.split(",")]
        except ValueError as exc:
            raise UsageError(f"bad --sizes: {exc}") from exc
        if any(s < 1 for s in sizes):
            raise UsageError("group sizes must be positive")
        dataset = GroupedDataset(np.zeros((sum(sizes), 1)), np.repeat(np.arange(len(sizes)), sizes))
    elif args.data:
        dataset = _load(args)
    else:
        raise UsageError("give a data file or --sizes")
    if not 1 <= args.r <= dataset.m:
        raise UsageError(f"r must lie in 1..m (m={dataset.m}), got {args.r}")
    if not 0 <= args.t <= 1:
        raise UsageError("t must lie in [0, 1]")
    max_k = feasible_k_range(dataset, args.r, args.t)
    print(f"N = {dataset.n}, m = {dataset.m}, r = {args.r}, t = {args.t}")
    print(f"max k = {max_k}")
    upto = min(args.upto if args.upto else max_k + 1, dataset.n + 1)
    for k in range(1, upto + 1):
        print(f"k = {k}: {'feasible' if k <= max_k else 'infeasible'}")
    return EXIT_OK


def compare_table(dataset, base: AccordanceParams, seeds: int, algos) -> list[dict]:
    """Per-algorithm SSE statistics over ``seeds`` runs.

    Only runs whose output is (r, t)-accordant enter the SSE mean; the 95%
    half-width uses the normal approximation.
    """
    rows = []
    for algo in algos:
        sses, ok = [], 0
        for s in range(seeds):
            params = AccordanceParams(**{**base.__dict__, "seed": base.seed + s})
            run = akmeans_restarts(dataset, params, algo=algo)
            if is_rt_accordant(run.assignment, dataset, base.r, base.t):
                ok += 1
                sses.append(run.sse)
        mean = float(np.mean(sses)) if sses else None
        half = 1.96 * float(np.std(sses, ddof=1)) / math.sqrt(len(sses)) if len(sses) > 1 else None
        rows.append({"algo": algo, "runs": seeds, "accordant_fraction": ok / seeds,
                     "mean_sse": mean, "ci_half_width": half})
    return rows


def cmd_compare(args) -> int:
    if args.seeds < 2:
        raise UsageError("--seeds must be >= 2")
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    if any(a not in ("akmeans", "kmeans") for a in algos):
        raise UsageError("--algos accepts akmeans and kmeans")
    dataset = _load(args)
    params = _params(args, dataset)
    rows = compare_table(dataset, params, args.seeds, algos)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["algo", "runs", "accordant_fraction", "mean_sse", "ci_half_width"])
    for row in rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row.values()])
    if args.out:
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
    sys.stdout.write(buf.getvalue())
    return EXIT_OK


def _oracle_one(dataset, params, workers=None) -> dict:
    if params.t == 0 or params.r == 0:
        best = optimal_unconstrained(dataset, params.k)
    else:
        best = optimal_accordant(dataset, params.k, params.r, params.t)
    if not best.feasible:
        raise InfeasibleError(params.k, feasible_k_range(dataset, params.r, params.t))
    run = akmeans_restarts(dataset, params, workers=workers)
    gap = (run.sse - best.sse) / best.sse if best.sse > 0 else (0.0 if run.sse <= 1e-12 else math.inf)
    dist = analysis.clustering_distance(best.assignment, run.assignment, params.k).distance
    return {"oracle_sse": best.sse, "akmeans_sse": run.sse, "gap": gap, "dist": dist}


def cmd_oracle(args) -> int:
    if args.batch:
        rng = np.random.Generator(np.random.PCG64(args.seed))
        within = 0
        for b in range(args.batch):
            dataset = random_instance(rng, args.n, args.m, args.rho)
            params = _params(args, dataset)
            params = AccordanceParams(**{**params.__dict__, "seed": args.seed + b})
            rep = _oracle_one(dataset, params, args.workers)
            within += rep["gap"] <= args.tolerance
            print(f"instance {b}: oracle_sse={rep['oracle_sse']:.6f} akmeans_sse={rep['akmeans_sse']:.6f} "
                  f"gap={rep['gap']:.4%} dist={rep['dist']:.3f}")
        print(f"within {args.tolerance:.0%}: {within}/{args.batch} = {within / args.batch:.3f}")
        return EXIT_OK
    if not args.data:
        raise UsageError("give a data file or --batch")
    dataset = _load(args)
    rep = _oracle_one(dataset, _params(args, dataset), args.workers)
    print(f"oracle_sse={rep['oracle_sse']:.6f} akmeans_sse={rep['akmeans_sse']:.6f} "
          f"gap={rep['gap']:.4%} dist={rep['dist']:.3f}")
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        centers = [tuple(float(v) for v in c.split(",")) for c in args.centers.split(";") if c.strip()]
        groups = tuple(int(g) for g in args.groups.split(",")) if args.groups else None
        splits = []
        for s in args.split:
            comp, axis, thr, low, high = s.split(":")
            splits.append(SplitRule(int(comp), int(axis), float(thr), int(low), int(high)))
        spec = SynthSpec(tuple(Component(c, args.std, args.count) for c in centers), groups, tuple(splits), args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    dataset, planted = generate(spec)
    out = Path(args.out)
    write_csv(dataset, out)
    sidecar = out.with_name(out.stem + ".planted.csv")
    sidecar.write_text("planted\n" + "".join(f"{p}\n" for p in planted), encoding="utf-8")
    print(f"wrote {dataset.n} points, {dataset.m} groups, {len(centers)} components to {out} (+ {sidecar.name})")
    return EXIT_OK


COMMANDS = {"fit": cmd_fit, "feasible": cmd_feasible, "compare": cmd_compare, "oracle": cmd_oracle, "synth": cmd_synth}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"accordant: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleError as exc:
        print(f"accordant: infeasible: {exc} (max k = {exc.max_k})", file=sys.stderr)
        return EXIT_INFEASIBLE
    except IngestionError as exc:
        print(f"accordant: ingestion error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except BudgetExceeded as exc:
        print(f"accordant: {exc} (required budget {exc.required})", file=sys.stderr)
        return EXIT_BUDGET
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"accordant: error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
