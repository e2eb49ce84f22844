"""Read a product-line directory into a :class:`ProductLine`."""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .dialect import DialectConfig, load_dialect, parse_artifact
from .errors import CgplIOError, DuplicateVR, MarkerMismatch, Span
from .model import Artifact, ArtifactKind, Layer, ProductLine, VariabilityRegion, VRKind

log = logging.getLogger(__name__)

PROVENANCE_FILE = "cgpl-provenance.json"


@dataclass(frozen=True)
class ScanWarning:
    path: str
    span: Optional[Span]
    message: str

    def __str__(self) -> str:
        where = self.path + (f":{self.span}" if self.span else "")
        return f"{where}: warning: {self.message}"


@dataclass
class ScanReport:
    layers_loaded: int = 0
    artifacts: Counter = field(default_factory=Counter)
    vrs: Counter = field(default_factory=Counter)
    warnings: list[ScanWarning] = field(default_factory=list)

    def warn(self, path, message, span=None):
        w = ScanWarning(str(path), span, message)
        log.debug("%s", w)
        self.warnings.append(w)


def scan_product_line(root_dir: Path | str, dialect: Optional[DialectConfig] = None
                      ) -> tuple[ProductLine, ScanReport]:
    """One layer per immediate subdirectory of ``root_dir``.

    Layer ``refines``/``refinements`` stay empty; binding a layer definition
    model fills them in. Directories that hold a composed variant (marked by
    the provenance sidecar) and hidden directories are skipped.
    """
    root = Path(root_dir)
    if not root.is_dir():
        raise CgplIOError("product-line root is not a directory", path=root)
    if dialect is None:
        dialect = load_dialect(root)
    report = ScanReport()
    layers = {}
    try:
        entries = sorted(p for p in root.iterdir() if p.is_dir())
    except OSError as exc:
        raise CgplIOError(str(exc), path=root) from None
    for layer_dir in entries:
        if layer_dir.name.startswith("."):
            continue
        if (layer_dir / PROVENANCE_FILE).exists():
            report.warn(layer_dir, "skipping composed variant directory")
            continue
        layers[layer_dir.name] = _scan_layer(layer_dir, dialect, report)
    if not layers:
        report.warn(root, "no layers found")
    report.layers_loaded = len(layers)
    return ProductLine(root, layers, dialect), report


def _scan_layer(layer_dir: Path, dialect: DialectConfig, report: ScanReport) -> Layer:
    artifacts = {}
    files = sorted(p for p in layer_dir.rglob("*") if p.is_file())
    for path in files:
        rel = path.relative_to(layer_dir).as_posix()
        if any(part.startswith(".") for part in Path(rel).parts):
            continue
        artifact = load_artifact(path, rel, dialect)
        artifacts[rel] = artifact
        report.artifacts[artifact.kind] += 1
        for vr in artifact.root_vr.walk():
            report.vrs[vr.kind] += 1
    return Layer(layer_dir.name, artifacts)


def load_artifact(path: Path, rel: str, dialect: DialectConfig) -> Artifact:
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CgplIOError(str(exc), path=path) from None
    kind = dialect.kind_for(rel)
    if kind is ArtifactKind.OPAQUE:
        # surrogateescape keeps arbitrary bytes recoverable
        text = data.decode("utf-8", "surrogateescape")
        root = VariabilityRegion(None, VRKind.WHOLE_ARTIFACT, (text,) if text else ())
        return Artifact(rel, kind, root)
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CgplIOError(f"not valid UTF-8 ({exc.reason} at byte {exc.start})", path=path) from None
    try:
        root = parse_artifact(text, dialect, kind)
        check_unique_siblings(root)
    except (MarkerMismatch, DuplicateVR) as exc:
        raise exc.located(path=path)
    return Artifact(rel, kind, root)


def check_unique_siblings(vr: VariabilityRegion) -> None:
    seen = {}
    for child in vr.children:
        key = (child.name, child.qualifier)
        if key in seen:
            raise DuplicateVR(f"duplicate region {child.name!r}"
                              + (f" for {child.qualifier}" if child.qualifier else "")
                              + f" (first at line {seen[key].span.start_line if seen[key].span else '?'})",
                              span=child.span)
        # unqualified twin of a qualified sibling cannot be told apart either
        for (name, qual), other in seen.items():
            if name == child.name and (qual is None or child.qualifier is None):
                raise DuplicateVR(f"duplicate region {child.name!r} needs distinct type qualifiers",
                                  span=child.span)
        seen[key] = child
        check_unique_siblings(child)
