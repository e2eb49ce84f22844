"""``cgpl`` command line.

Exit codes: 0 success, 1 conflicts or composition errors, 2 malformed
input (markers, DSL syntax, unresolved signatures), 3 I/O problems.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .composer import compose, plan, provenance_json, write_variant
from .errors import CgplError, CgplIOError, CompositionError, InputError
from .pcl import find_pcl, read_pcl
from .pipeline import check_config, load_product_line
from .stats import COLUMNS, compute_stats
from .validator import export_dot

EXIT_OK, EXIT_CONFLICT, EXIT_INPUT, EXIT_IO = 0, 1, 2, 3


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, CgplIOError):
        return EXIT_IO
    if isinstance(exc, InputError):
        return EXIT_INPUT
    if isinstance(exc, CompositionError):
        return EXIT_CONFLICT
    return EXIT_INPUT


class Reporter:
    """Human-readable diagnostics on stderr, optionally colored."""

    def __init__(self, stream=None):
        self.stream = stream or sys.stderr
        mode = os.environ.get("CGPL_COLOR", "auto").lower()
        self.color = mode != "never" and (mode == "always" or self.stream.isatty())

    def _paint(self, code: str, text: str) -> str:
        return f"\033[{code}m{text}\033[0m" if self.color else text

    def error(self, text: str):
        print(f"{self._paint('1;31', 'error:')} {text}", file=self.stream)

    def warning(self, text: str):
        print(f"{self._paint('1;33', 'warning:')} {text}", file=self.stream)

    def info(self, text: str):
        print(text, file=self.stream)


def _error_json(exc: CgplError) -> dict:
    d = {"kind": type(exc).__name__, "message": exc.message,
         "path": str(exc.path) if exc.path is not None else None,
         "line": exc.span.start_line if exc.span else None,
         "column": exc.span.start_col if exc.span else None}
    return d


def _warning_json(w) -> dict:
    path, span, message = w
    return {"path": path, "line": span.start_line if span else None, "message": message}


def _node_json(node) -> dict:
    return {"layer": node.color, "signature": str(node.signature)}


def _resolve_pcl(args) -> Path:
    if args.pcl:
        return Path(args.pcl)
    return find_pcl(args.root)


def _emit_json(payload: dict):
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _load(args, rep: Reporter):
    session = load_product_line(args.root)
    cfg = read_pcl(_resolve_pcl(args))
    graph, result = check_config(session.product_line, cfg)
    return session, cfg, graph, result


def _report_result(rep, result, warnings):
    for w in warnings:
        rep.warning(f"{w[0]}{':' + str(w[1]) if w[1] else ''}: {w[2]}")
    for w in result.warnings:
        rep.warning(w)
    for c in result.conflicts:
        rep.error(c.describe())
        for node in c.witnesses:
            ref = None
            for e in result.graph.edges if result.graph else ():
                if e.source == node and e.refinement.span is not None:
                    ref = e.refinement
                    break
            if ref is not None:
                rep.info(f"  {node}: declared in layers.ldl:{ref.span} ('{ref}')")


def cmd_validate(args) -> int:
    rep = Reporter()
    payload = {"command": "validate", "ok": False, "closure": [], "conflicts": [],
               "warnings": [], "errors": []}
    try:
        session, cfg, graph, result = _load(args, rep)
    except CgplError as exc:
        code = exit_code_for(exc)
        rep.error(str(exc))
        payload.update(errors=[_error_json(exc)], exit_code=code)
        if args.json:
            _emit_json(payload)
        return code
    code = EXIT_OK if result.ok else EXIT_CONFLICT
    _report_result(rep, result, session.warnings)
    n = len(result.closure)
    rep.info(f"{cfg.generator_name}: {n} layer{'s' if n != 1 else ''} in closure "
             f"({', '.join(result.closure)}); "
             + ("no conflicts" if result.ok else f"{len(result.conflicts)} conflict(s)"))
    payload.update(
        ok=result.ok, exit_code=code, generator=cfg.generator_name, closure=list(result.closure),
        conflicts=[{"kind": c.kind.value, "witnesses": [_node_json(n) for n in c.witnesses]}
                   for c in result.conflicts],
        warnings=[_warning_json(w) for w in session.warnings]
        + [{"path": None, "line": None, "message": w} for w in result.warnings])
    if args.json:
        _emit_json(payload)
    return code


def cmd_compose(args) -> int:
    rep = Reporter()
    payload = {"command": "compose", "ok": False, "errors": [], "warnings": []}
    try:
        session, cfg, graph, result = _load(args, rep)
        _report_result(rep, result, session.warnings)
        if not result.ok:
            payload.update(exit_code=EXIT_CONFLICT, closure=list(result.closure),
                           conflicts=[{"kind": c.kind.value,
                                       "witnesses": [_node_json(n) for n in c.witnesses]}
                                      for c in result.conflicts])
            if args.json:
                _emit_json(payload)
            return EXIT_CONFLICT
        pl = session.product_line
        cplan = plan(pl, result)
        artifacts = compose(pl, cfg, result, keep_markers=args.keep_markers,
                            warnings=session.warnings, cplan=cplan)
        output = Path(args.output) if args.output else Path(cfg.output)
        if args.dry_run:
            doc = {"generator": cfg.generator_name, "output_dir": str(output),
                   "plan": cplan.to_json(),
                   "provenance": json.loads(provenance_json(artifacts))}
            _emit_json(doc)
            return EXIT_OK
        summary = write_variant(artifacts, output)
    except CgplError as exc:
        code = exit_code_for(exc)
        for e in getattr(exc, "errors", [exc]):
            rep.error(str(e))
        payload.update(exit_code=code, errors=[_error_json(e) for e in getattr(exc, "errors", [exc])])
        if args.json:
            _emit_json(payload)
        return code
    if args.json:
        payload.update(ok=True, exit_code=EXIT_OK, generator=cfg.generator_name,
                       closure=list(result.closure), output_dir=summary["output_dir"],
                       files=summary["files"], provenance=summary["provenance"],
                       warnings=[_warning_json(w) for w in session.warnings])
        _emit_json(payload)
    else:
        n = len(summary["files"])
        print(f"{cfg.generator_name}: {n} file{'s' if n != 1 else ''} written to {summary['output_dir']}")
    return EXIT_OK


def cmd_graph(args) -> int:
    rep = Reporter()
    try:
        session, cfg, graph, result = _load(args, rep)
    except CgplError as exc:
        rep.error(str(exc))
        return exit_code_for(exc)
    _report_result(rep, result, session.warnings)
    sys.stdout.write(export_dot(graph, result))
    return EXIT_OK if result.ok else EXIT_CONFLICT


def cmd_stats(args) -> int:
    rep = Reporter()
    try:
        session = load_product_line(args.root, require_ldl=False)
    except CgplError as exc:
        rep.error(str(exc))
        return exit_code_for(exc)
    report = compute_stats(session.product_line)
    if args.json:
        _emit_json(report.to_json())
    else:
        sys.stdout.write(report.format_table())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cgpl", description="Compose code-generator product lines from template layers.")
    parser.add_argument("--version", action="version", version=f"cgpl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, pcl=True, json_flag=True):
        p.add_argument("--root", type=Path, default=Path.cwd(),
                       help="product-line root (default: current directory)")
        if pcl:
            p.add_argument("pcl", nargs="?",
                           help="product configuration (default: the only *.pcl in the root)")
        if json_flag:
            p.add_argument("--json", action="store_true", help="machine-readable output on stdout")

    p = sub.add_parser("validate", help="check the layer closure for refinement conflicts")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compose", help="compose and write the generator variant")
    common(p)
    p.add_argument("--output", help="output directory (overrides the configuration)")
    p.add_argument("--keep-markers", action="store_true",
                   help="keep comment region markers so the variant can serve as a layer")
    p.add_argument("--dry-run", action="store_true",
                   help="print plan and provenance as JSON, write nothing")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("graph", help="print the refinement graph in Graphviz DOT")
    common(p, json_flag=False)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser(
        "stats", help="per-layer size metrics",
        description="Per-layer metrics: " + ", ".join(h for _, h in COLUMNS)
        + ". TLOC/HLOC count non-blank lines (whitespace-only lines are blank) "
          "of template/helper files.")
    common(p, pcl=False)
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
