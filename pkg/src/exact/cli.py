"""Command-line entry points: analyze, graph, xref, serve."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .datamodel import build_conceptual_model, load_synonyms
from .logic import build_dependency_model
from .reporting import (
    UnknownProcedureError,
    build_bundle,
    canonical_json,
    dependency_subgraph,
    export_bundle_json,
    export_class_diagram,
    export_dependency_dot,
)
from .service import AnalysisService, XrefError, serve
from .vba import parse_module
from .workbook import BundleError, load_bundle


def _proc_filename(dotted: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "._-" else "_" for ch in dotted)


def cmd_analyze(args: argparse.Namespace) -> int:
    try:
        wb = load_bundle(args.bundle_dir)
    except BundleError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    synonyms = None
    if args.synonyms:
        try:
            synonyms = load_synonyms(args.synonyms)
        except (OSError, ValueError) as exc:
            print(f"cannot load synonym dictionary: {exc}", file=sys.stderr)
            return 2

    asts = [parse_module(m.name, m.kind.value, m.source) for m in wb.modules]
    dep_model = build_dependency_model(wb, asts)
    conceptual = build_conceptual_model(wb, synonyms)
    bundle = build_bundle(wb, dep_model, conceptual)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "analysis.json").write_text(export_bundle_json(bundle), encoding="utf-8")
    (out_dir / "structure.json").write_text(canonical_json(bundle.structure), encoding="utf-8")
    (out_dir / "model.puml").write_text(export_class_diagram(conceptual, "plantuml"), encoding="utf-8")
    (out_dir / "model.dot").write_text(export_class_diagram(conceptual, "dot"), encoding="utf-8")
    (out_dir / "deps.dot").write_text(export_dependency_dot(dep_model), encoding="utf-8")
    for proc in dep_model.procedures:
        dot = export_dependency_dot(dep_model, proc.id.dotted)
        (out_dir / f"deps-{_proc_filename(proc.id.dotted)}.dot").write_text(dot, encoding="utf-8")

    errors = [d for d in bundle.diagnostics if d.severity == "error"]
    for diag in bundle.diagnostics:
        stream = sys.stderr if diag.severity == "error" else sys.stdout
        line = "" if diag.line is None else f":{diag.line}"
        print(f"[{diag.severity}] {diag.source}{line}: {diag.message}", file=stream)
    print(f"analysis written to {out_dir}")
    return 1 if errors else 0


def cmd_graph(args: argparse.Namespace) -> int:
    try:
        service = AnalysisService.load(args.out_dir)
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    try:
        if args.format == "dot":
            output = export_dependency_dot(service.bundle.dependencies, args.proc)
        else:
            output = canonical_json(dependency_subgraph(service.bundle.dependencies, args.proc))
    except UnknownProcedureError as exc:
        print(f"unknown procedure {exc.dotted!r}; known procedures:", file=sys.stderr)
        for dotted in exc.known:
            print(f"  {dotted}", file=sys.stderr)
        return 2
    sys.stdout.write(output)
    return 0


def cmd_xref(args: argparse.Namespace) -> int:
    try:
        service = AnalysisService.load(args.out_dir)
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    try:
        result = service.xref(args.cell)
    except XrefError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    sys.stdout.write(canonical_json(result.to_dict()))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    try:
        serve(args.out_dir, port=args.port, host=args.host, ui_dir=args.ui)
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot start server on port {args.port}: {exc}", file=sys.stderr)
        return 2
    return 0


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exact",
        description="Reverse-engineer workbook structure, VBA dependencies, and a conceptual data model from a snapshot bundle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_analyze = sub.add_parser("analyze", help="analyze a snapshot bundle directory")
    p_analyze.add_argument("bundle_dir", help="directory containing workbook.json and modules/")
    p_analyze.add_argument("-o", "--out", dest="out_dir", required=True, help="output directory")
    p_analyze.add_argument("--synonyms", help="JSON synonym dictionary for association detection")
    p_analyze.set_defaults(func=cmd_analyze)

    p_graph = sub.add_parser("graph", help="print a procedure's dependency graph")
    p_graph.add_argument("out_dir", help="directory holding analysis.json")
    p_graph.add_argument("--proc", required=True, help="procedure id, Module.Name")
    p_graph.add_argument("--format", choices=("dot", "json"), default="dot")
    p_graph.set_defaults(func=cmd_graph)

    p_xref = sub.add_parser("xref", help="find procedures reading/writing a cell")
    p_xref.add_argument("out_dir", help="directory holding analysis.json")
    p_xref.add_argument("--cell", required=True, help="sheet-qualified cell, e.g. Data!B2")
    p_xref.set_defaults(func=cmd_xref)

    p_serve = sub.add_parser("serve", help="serve the analysis over HTTP (read-only)")
    p_serve.add_argument("out_dir", help="directory holding analysis.json")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--ui", help="directory of UI assets to serve at / (default: <out>/ui if present)")
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_arg_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
