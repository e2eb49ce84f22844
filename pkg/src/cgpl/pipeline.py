"""Convenience wiring of scan -> LDL -> bind -> validate -> compose."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .composer import ComposedArtifact, CompositionPlan, compose, plan
from .dialect import DialectConfig
from .ldl import LDL_FILE, bind, read_ldl
from .model import ProductConfig, ProductLine
from .pcl import read_pcl
from .scanner import ScanReport, scan_product_line
from .validator import RefinementGraph, ValidationResult, build_graph, validate


@dataclass
class Session:
    product_line: ProductLine
    report: ScanReport
    warnings: list = field(default_factory=list)


def load_product_line(root: Path | str, dialect: Optional[DialectConfig] = None, *,
                      require_ldl: bool = True) -> Session:
    pl, report = scan_product_line(root, dialect)
    warnings = [(w.path, w.span, w.message) for w in report.warnings]
    if require_ldl or (Path(root) / LDL_FILE).exists():
        pl = bind(pl, read_ldl(root), warnings)
    return Session(pl, report, warnings)


def check_config(pl: ProductLine, cfg: ProductConfig) -> tuple[RefinementGraph, ValidationResult]:
    graph = build_graph(pl, cfg.selected_layers)
    return graph, validate(graph)


def build_variant(root: Path | str, pcl_file: Path | str, *, keep_markers: bool = False
                  ) -> tuple[ValidationResult, Optional[CompositionPlan], list[ComposedArtifact]]:
    """Run the whole pipeline; composition is skipped when conflicts exist."""
    session = load_product_line(root)
    cfg = read_pcl(pcl_file)
    _, result = check_config(session.product_line, cfg)
    if not result.ok:
        return result, None, []
    cplan = plan(session.product_line, result)
    artifacts = compose(session.product_line, cfg, result, keep_markers=keep_markers,
                        warnings=session.warnings, cplan=cplan)
    return result, cplan, artifacts
