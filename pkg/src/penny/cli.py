"""Command-line front end.

Exit codes: 0 success, 1 analysis or pricing failure (including bad
usage), 2 unresolved assumptions. Documents go to standard output;
diagnostics go to standard error, as JSON lines when --json is set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from .assumptions import assemble
from .errors import PennyError, UnresolvedAssumption
from .estimator import compare_catalogs, monthly_cost
from .export import (
    canon,
    compare_table,
    graph_doc,
    rational_str,
    render_dot,
    render_report,
    report_doc,
    report_table,
)
from .extract import analyze_source
from .graph import factor_catalogue
from .money import display_usd
from .pricing import bind, load_catalog
from .simulate import simulate_month
from .source import SourceFile

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; 2 means unresolved assumptions
    here, so usage failures are remapped to 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="penny", description="Cost analysis for cloud programs")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", parents=[], description="Emit the cost graph")
    analyze.add_argument("file")
    analyze.add_argument("--format", choices=("json", "dot"), default="json")
    analyze.add_argument("--json", action="store_true", help="JSON-line diagnostics")

    cost = sub.add_parser("cost", description="Monthly cost report")
    cost.add_argument("file")
    cost.add_argument("--catalog", required=True)
    cost.add_argument("--month", type=int, default=1)
    cost.add_argument("--assume", action="append", default=[], metavar="KEY=VALUE")
    cost.add_argument("--strict", action="store_true", help="unknown --assume keys fail")
    cost.add_argument("--json", action="store_true")

    compare = sub.add_parser("compare", description="Same program, several catalogs")
    compare.add_argument("file")
    compare.add_argument("--catalog", action="append", required=True)
    compare.add_argument("--month", type=int, default=1)
    compare.add_argument("--assume", action="append", default=[], metavar="KEY=VALUE")
    compare.add_argument("--strict", action="store_true")
    compare.add_argument("--json", action="store_true")

    simulate = sub.add_parser("simulate", description="Discrete-event check of the analytic model")
    simulate.add_argument("file")
    simulate.add_argument("--catalog", required=True)
    simulate.add_argument("--month", type=int, default=1)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--assume", action="append", default=[], metavar="KEY=VALUE")
    simulate.add_argument("--strict", action="store_true")
    simulate.add_argument("--json", action="store_true")

    serve = sub.add_parser("serve", description="Run the HTTP service")
    serve.add_argument("--listen", default=os.environ.get("PENNY_LISTEN", "127.0.0.1:8000"))
    serve.add_argument("--catalog-dir", default=os.environ.get("PENNY_CATALOG_DIR"))
    serve.add_argument("--ui-origin", default=None)

    return parser


def _diag(doc: dict, json_mode: bool) -> None:
    if json_mode:
        print(json.dumps(doc, sort_keys=True), file=sys.stderr)
    else:
        parts = [doc.get("message", doc.get("error", "error"))]
        if "keys" in doc:
            parts.append("keys: " + ", ".join(doc["keys"]))
        if "span" in doc and doc["span"]:
            parts.append(f"at line {doc['span']['line']} col {doc['span']['col']}")
        print("penny: " + "; ".join(str(p) for p in parts), file=sys.stderr)


def _parse_value(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        pass
    if text == "true":
        return True
    if text == "false":
        return False
    return text


def _parse_assumes(pairs: list[str]) -> dict:
    out: dict = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise PennyError(f"--assume expects KEY=VALUE, got {pair!r}")
        out[key] = _parse_value(value)
    return out


def _load_analysis(path: str, overrides: dict, strict: bool, json_mode: bool):
    """Parse + extract + assumption assembly shared by the cost-bearing
    commands. Unknown override keys warn, or fail under --strict."""
    source = SourceFile(text=Path(path).read_text(encoding="utf-8"), path=path, version=1)
    _, graph = analyze_source(source)
    known = {row.key for row in factor_catalogue(graph, overrides)}
    unknown = sorted(set(overrides) - known)
    if unknown:
        doc = {
            "error": "UnknownAssumption",
            "message": "unknown assumption keys: " + ", ".join(unknown),
            "keys": unknown,
        }
        if strict:
            raise PennyError(doc["message"], keys=unknown)
        _diag(doc, json_mode)
    return graph, assemble(graph, overrides)


def _cmd_analyze(args: argparse.Namespace) -> int:
    source = SourceFile(text=Path(args.file).read_text(encoding="utf-8"), path=args.file, version=1)
    _, graph = analyze_source(source)
    if args.format == "dot":
        sys.stdout.write(render_dot(graph))
    else:
        sys.stdout.write(canon(graph_doc(graph, source.version)))
    return 0


def _cmd_cost(args: argparse.Namespace) -> int:
    overrides = _parse_assumes(args.assume)
    graph, assumptions = _load_analysis(args.file, overrides, args.strict, args.json)
    if args.month < 1:
        raise PennyError(f"--month must be >= 1, got {args.month}")
    catalog = load_catalog(args.catalog)
    model = bind(graph, catalog)
    report = monthly_cost(model, assumptions, args.month)
    if args.json:
        sys.stdout.write(render_report(report))
    else:
        sys.stdout.write(report_table(report))
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    overrides = _parse_assumes(args.assume)
    graph, assumptions = _load_analysis(args.file, overrides, args.strict, args.json)
    if args.month < 1:
        raise PennyError(f"--month must be >= 1, got {args.month}")
    catalogs = [load_catalog(path) for path in args.catalog]
    for catalog in catalogs:
        bind(graph, catalog)
    comparisons = compare_catalogs(graph, assumptions, catalogs, args.month)
    if args.json:
        doc = {
            "month": args.month,
            "baseline": comparisons[0].vendor if comparisons else None,
            "comparisons": [
                {
                    "vendor": comp.vendor,
                    "total_micro_usd": comp.total_micro_usd,
                    "total_display": display_usd(comp.total_micro_usd),
                    "node_deltas": dict(comp.node_deltas),
                }
                for comp in comparisons
            ],
        }
        sys.stdout.write(canon(doc))
    else:
        sys.stdout.write(compare_table(comparisons))
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    overrides = _parse_assumes(args.assume)
    graph, assumptions = _load_analysis(args.file, overrides, args.strict, args.json)
    if args.month < 1:
        raise PennyError(f"--month must be >= 1, got {args.month}")
    catalog = load_catalog(args.catalog)
    model = bind(graph, catalog)
    simulated = simulate_month(model, assumptions, args.month, seed=args.seed)
    analytic = monthly_cost(model, assumptions, args.month)
    count_deltas = {
        node_id: simulated.counts[node_id] - analytic.counts.get(node_id, Fraction(0))
        for node_id in simulated.counts
        if simulated.counts[node_id] != analytic.counts.get(node_id, Fraction(0))
    }
    if args.json:
        doc = {
            "report": report_doc(simulated),
            "analytic_total_micro_usd": analytic.total_micro_usd,
            "total_delta_micro_usd": simulated.total_micro_usd - analytic.total_micro_usd,
            "count_deltas": {k: rational_str(v) for k, v in sorted(count_deltas.items())},
        }
        sys.stdout.write(canon(doc))
    else:
        sys.stdout.write(report_table(simulated))
        delta = simulated.total_micro_usd - analytic.total_micro_usd
        sys.stdout.write(f"\nanalytic total {display_usd(analytic.total_micro_usd)}  delta {display_usd(delta)}\n")
        for node_id, diff in sorted(count_deltas.items()):
            sys.stdout.write(f"count delta {node_id}: {rational_str(diff)}\n")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    host, sep, port_text = args.listen.rpartition(":")
    if not sep or not host or not port_text.isdigit():
        raise PennyError(f"--listen must be host:port, got {args.listen!r}")
    app = create_app(catalog_dir=args.catalog_dir, ui_origin=args.ui_origin)
    uvicorn.run(app, host=host, port=int(port_text), log_level="warning")
    return 0


_COMMANDS = {
    "analyze": _cmd_analyze,
    "cost": _cmd_cost,
    "compare": _cmd_compare,
    "simulate": _cmd_simulate,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    json_mode = getattr(args, "json", False)
    try:
        return _COMMANDS[args.command](args)
    except UnresolvedAssumption as err:
        _diag(err.to_doc(), json_mode)
        return 2
    except PennyError as err:
        _diag(err.to_doc(), json_mode)
        return 1
    except OSError as err:
        _diag({"error": "IOError", "message": str(err)}, json_mode)
        return 1


if __name__ == "__main__":
    sys.exit(main())
