"""Command line interface: batch analysis, mining, recommendations,
encapsulation, and the HTTP service."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .corpus import NoReadablePaths, preprocess, run_pipeline
from .encapsulate import find_clone_plans, encapsulate, metrics_delta
from .graphs import GraphError, parse_project, serialize_project
from .metrics import TooFewSamples, compute_report, metrics_table_csv, select_metrics
from .mining import StructuralTable
from .recommend import recommend

TABLE_ENV_VAR = "VPLA_TABLE"


def _cmd_analyze(args) -> int:
    try:
        corpus, manifest = preprocess(args.paths, expand_params=args.expand_params)
    except NoReadablePaths as exc:
        print(f"error: no projects ({exc})", file=sys.stderr)
        return 1
    if args.strict and manifest.dropped_faulty:
        print(
            f"error: {manifest.dropped_faulty} faulty project(s): "
            + ", ".join(manifest.faulty_files),
            file=sys.stderr,
        )
        return 2
    reports = [compute_report(g) for g in corpus]
    csv_text = metrics_table_csv(reports)
    if args.output:
        Path(args.output).write_text(csv_text, encoding="utf-8")
    else:
        sys.stdout.write(csv_text)
    if len(reports) >= 3:
        try:
            selection = select_metrics(reports, eps=args.eps, tau=args.tau)
        except TooFewSamples:
            selection = None
        if selection is not None:
            report = json.dumps(selection.as_dict(), indent=2, sort_keys=True)
            if args.selection_report:
                Path(args.selection_report).write_text(report + "\n", encoding="utf-8")
            else:
                print(report, file=sys.stderr)
    return 0


def _cmd_mine(args) -> int:
    try:
        table, manifest = run_pipeline(
            args.paths,
            minsup=args.minsup,
            max_pattern_nodes=args.max_pattern_nodes,
            table_path=args.output,
            manifest_path=args.manifest,
            expand_params=args.expand_params,
        )
    except NoReadablePaths as exc:
        print(f"error: no projects ({exc})", file=sys.stderr)
        return 1
    print(
        f"mined {len(table.rows)} rules from {manifest.retained} project(s) "
        f"-> {args.output}",
        file=sys.stderr,
    )
    return 0


def _load_table(path: str | None) -> StructuralTable:
    table_path = path or os.environ.get(TABLE_ENV_VAR)
    if not table_path:
        raise SystemExit(f"error: no table given (use --table or ${TABLE_ENV_VAR})")
    return StructuralTable.from_json(Path(table_path).read_text(encoding="utf-8"))


def _cmd_recommend(args) -> int:
    graph = parse_project(Path(args.project).read_text(encoding="utf-8"))
    table = _load_table(args.table)
    recs = recommend(graph, args.node, table, k=args.k)
    for i, rec in enumerate(recs, start=1):
        print(
            f"{i}. {rec.candidate_type} ({rec.candidate_kind})"
            f"  ged={rec.min_ged:g}  confidence={rec.summed_confidence:.3f}"
        )
    if not recs:
        print("no recommendations (empty table or no rules)", file=sys.stderr)
    return 0


def _cmd_encapsulate(args) -> int:
    graph = parse_project(Path(args.project).read_text(encoding="utf-8"))
    plans = find_clone_plans(graph, min_occurrences=args.min_occurrences)
    if not plans:
        print("no repetitive structures found", file=sys.stderr)
        return 0
    plan = plans[0]
    rewritten, composite = encapsulate(graph, plan)
    delta = metrics_delta(graph, rewritten)
    out = args.output or args.project
    Path(out).write_text(
        json.dumps(serialize_project(rewritten), sort_keys=True, indent=2),
        encoding="utf-8",
    )
    print(f"encapsulated {len(plan.occurrences)} occurrence(s) as {composite.type_id}")
    for name in ("halstead_length", "halstead_vocabulary", "cyclomatic"):
        print(f"  {name}: {delta.before.value(name):g} -> {delta.after.value(name):g}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    table = None
    table_path = args.table or os.environ.get(TABLE_ENV_VAR)
    if table_path:
        table = StructuralTable.from_json(Path(table_path).read_text(encoding="utf-8"))
    app = create_app(table)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vpla", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="compute metrics over projects, emit CSV")
    p.add_argument("paths", nargs="+", help="project files or directories")
    p.add_argument("-o", "--output", help="CSV output path (default: stdout)")
    p.add_argument("--selection-report", help="write metric-selection JSON here")
    p.add_argument("--strict", action="store_true", help="exit 2 on any faulty project")
    p.add_argument("--eps", type=float, default=1e-9, help="variance floor")
    p.add_argument("--tau", type=float, default=0.85, help="correlation threshold")
    p.add_argument("--expand-params", action="store_true")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("mine", help="mine a corpus into a structural table")
    p.add_argument("paths", nargs="+")
    p.add_argument("--minsup", type=int, default=None)
    p.add_argument("--max-pattern-nodes", type=int, default=6)
    p.add_argument("-o", "--output", required=True, help="table.json output path")
    p.add_argument("--manifest", help="manifest.json output path")
    p.add_argument("--expand-params", action="store_true")
    p.set_defaults(func=_cmd_mine)

    p = sub.add_parser("recommend", help="next-block recommendations for a node")
    p.add_argument("project")
    p.add_argument("--node", required=True)
    p.add_argument("--table", help=f"structural table (default ${TABLE_ENV_VAR})")
    p.add_argument("-k", type=int, default=5)
    p.set_defaults(func=_cmd_recommend)

    p = sub.add_parser("encapsulate", help="replace the best clone by a composite block")
    p.add_argument("project")
    p.add_argument("--min-occurrences", type=int, default=2)
    p.add_argument("-o", "--output", help="rewritten project path (default: in place)")
    p.set_defaults(func=_cmd_encapsulate)

    p = sub.add_parser("serve", help="run the assistance HTTP service")
    p.add_argument("--table", help=f"structural table (default ${TABLE_ENV_VAR})")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
