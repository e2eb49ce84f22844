"""Static composition of a validated layer closure into a generator variant.

Every refining region is composed as a complete unit (its own nested
refinements and its own refiner applied first) before it is applied to the
region it refines. Along one chain this is the same as applying the
refinements base-most first, so the most derived layer has the last word.
"""
from __future__ import annotations

import json
import logging
import os
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath
from typing import Optional, Sequence, Union

from .dialect import DialectConfig, MarkerSet, _emit, split_lines
from .errors import (CgplIOError, CompositionError, DanglingSuper, NotValidated, PathCollision)
from .model import (Artifact, ArtifactKind, Op, ProductConfig, ProductLine, Segment, Signature,
                    VariabilityRegion, VRKind, VRLocation, region_at)
from .validator import Edge, RefinementGraph, ValidationResult, VRNode, build_graph

log = logging.getLogger(__name__)

PROVENANCE_FILE = "cgpl-provenance.json"


@dataclass(frozen=True)
class Step:
    """One applied refinement, for provenance."""

    layer: str
    refining: Signature
    refined: Signature
    op: Op

    def to_json(self) -> dict:
        return {"layer": self.layer, "refining": str(self.refining),
                "refined": str(self.refined), "op": self.op.value}


@dataclass(frozen=True)
class ComposedRegion:
    """A region plus the content attached around it by before/after."""

    region: VariabilityRegion
    before: tuple[Segment, ...] = ()
    after: tuple[Segment, ...] = ()
    steps: tuple[Step, ...] = ()

    def segments(self) -> tuple[Segment, ...]:
        return (*self.before, self.region, *self.after)


@dataclass(frozen=True)
class ComposedArtifact:
    relative_path: str
    content: str
    layer: str
    kind: ArtifactKind = ArtifactKind.TEMPLATE
    provenance: tuple[Step, ...] = ()

    @property
    def layers(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys([self.layer, *(s.layer for s in self.provenance)]))

    def provenance_record(self) -> dict:
        return {"path": self.relative_path, "layers": list(self.layers),
                "steps": [s.to_json() for s in self.provenance]}


@dataclass
class CompositionPlan:
    closure: tuple[str, ...]
    # base-most refined region -> chain of edges, base-most first
    per_target: dict[VRNode, tuple[Edge, ...]]
    emit_set: tuple[tuple[str, str], ...]
    fragment_set: tuple[tuple[str, str], ...]
    graph: RefinementGraph = field(repr=False)

    def to_json(self) -> dict:
        return {
            "closure": list(self.closure),
            "emit": [{"layer": l, "path": p} for l, p in self.emit_set],
            "fragments": [{"layer": l, "path": p} for l, p in self.fragment_set],
            "targets": [
                {"refined": str(t),
                 "chain": [{"layer": e.source.color, "refining": str(e.source.signature),
                            "refined": str(e.target.signature), "op": e.op.value} for e in chain]}
                for t, chain in self.per_target.items()
            ],
        }


# -- include-super expansion -----------------------------------------------------

def _merge(segments) -> list[Segment]:
    out: list[Segment] = []
    for seg in segments:
        if isinstance(seg, str):
            if not seg:
                continue
            if out and isinstance(out[-1], str):
                out[-1] += seg
                continue
        out.append(seg)
    return out


def expand_super(body: Sequence[Segment], original: Sequence[Segment],
                 markers: MarkerSet) -> tuple[list[Segment], int]:
    """Replace every include-super line (at any depth) by ``original``."""
    out, count = [], 0
    for seg in body:
        if isinstance(seg, VariabilityRegion):
            inner, n = expand_super(seg.body, original, markers)
            out.append(seg.with_body(inner) if n else seg)
            count += n
            continue
        for line in split_lines(seg):
            if markers.is_include_super(line.rstrip("\r\n")):
                out.extend(original)
                count += 1
            else:
                out.append(line)
    return _merge(out), count


def count_super(segments: Sequence[Segment], markers: MarkerSet) -> int:
    return expand_super(segments, (), markers)[1]


# -- composing one region --------------------------------------------------------

RefiningUnit = Union[VariabilityRegion, ComposedRegion]


def compose_vr(target: Union[VariabilityRegion, ComposedRegion],
               chain: Sequence[tuple[Op, RefiningUnit]],
               markers: Optional[MarkerSet] = None,
               warnings: Optional[list] = None) -> ComposedRegion:
    """Apply ``chain`` (base-most first) to ``target``.

    Replace swaps the body and keeps content already attached before/after;
    the include-super marker in a replacing body expands to the body it
    replaces. Before/after attach the refining body next to the target,
    outside its markers.
    """
    markers = markers or DialectConfig().template_markers
    state = target if isinstance(target, ComposedRegion) else ComposedRegion(target)
    for op, unit in chain:
        if isinstance(unit, VariabilityRegion):
            unit = ComposedRegion(unit)
        name = unit.region.name or "<artifact>"
        if op is Op.REPLACE:
            original = state.region.body
            body, n = expand_super(unit.region.body, original, markers)
            if n and not original:
                msg = (f"include-super in {name!r} expands to nothing: "
                       f"{state.region.name or 'the artifact'} is empty")
                log.debug("%s", msg)
                if warnings is not None:
                    warnings.append(msg)
            state = ComposedRegion(state.region.with_body(body),
                                   (*state.before, *unit.before),
                                   (*unit.after, *state.after), state.steps)
            continue
        content = (*unit.before, *unit.region.body, *unit.after)
        if count_super(content, markers):
            raise DanglingSuper(f"include-super in {name!r} used by a {op.value!r} refinement; "
                                "only replacing regions have original content")
        if op is Op.BEFORE:
            state = ComposedRegion(state.region, tuple(_merge((*state.before, *content))),
                                   state.after, state.steps)
        else:
            state = ComposedRegion(state.region, state.before,
                                   tuple(_merge((*content, *state.after))), state.steps)
    return state


# -- planning --------------------------------------------------------------------

def _include_mode(pl: ProductLine, edge: Edge) -> bool:
    return (pl.dialect.include_statement_format is not None
            and edge.op is not Op.REPLACE and edge.source.signature.is_whole_artifact)


def plan(pl: ProductLine, result: ValidationResult) -> CompositionPlan:
    if not result.ok:
        raise NotValidated("cannot compose: the selection has unresolved conflicts")
    graph = result.graph if result.graph is not None else build_graph(pl, result.closure)
    sources = set()
    for e in graph.edges:
        if _include_mode(pl, e):
            continue
        loc = graph.nodes[e.source]
        sources.add((loc.layer, loc.artifact))
    fragments, emit = [], []
    for layer_name in result.closure:
        for rel in sorted(pl.layer(layer_name).artifacts):
            (fragments if (layer_name, rel) in sources else emit).append((layer_name, rel))

    by_path: dict[str, list[str]] = {}
    for layer_name, rel in emit:
        by_path.setdefault(rel, []).append(layer_name)
    for rel in sorted(by_path):
        if len(by_path[rel]) > 1:
            raise PathCollision(rel, by_path[rel])

    incoming = {e.target: e for e in graph.edges}
    source_nodes = {e.source for e in graph.edges}
    per_target = {}
    for node in sorted(incoming, key=lambda n: n.sort_key):
        if node in source_nodes:
            continue
        chain, cur = [], node
        while cur in incoming:
            chain.append(incoming[cur])
            cur = incoming[cur].source
        per_target[node] = tuple(chain)
    return CompositionPlan(tuple(result.closure), per_target, tuple(emit), tuple(fragments), graph)


# -- composing the variant ---------------------------------------------------------

class _Composer:
    def __init__(self, pl: ProductLine, cplan: CompositionPlan, warnings: Optional[list]):
        self.pl = pl
        self.plan = cplan
        self.warnings = warnings
        self.graph = cplan.graph
        self.node_at = {loc: node for node, loc in self.graph.nodes.items()}
        self.refiner = {e.target: e for e in self.graph.edges}
        self.memo: dict[VRLocation, ComposedRegion] = {}

    def markers_for(self, loc: VRLocation) -> MarkerSet:
        kind = self.pl.layer(loc.layer).artifacts[loc.artifact].kind
        return self.pl.dialect.markers(kind)

    def region(self, loc: VRLocation) -> ComposedRegion:
        if loc in self.memo:
            return self.memo[loc]
        vr = region_at(self.pl, loc)
        body, steps, child = [], [], 0
        for seg in vr.body:
            if isinstance(seg, str):
                body.append(seg)
                continue
            composed = self.region(VRLocation(loc.layer, loc.artifact, (*loc.index_path, child)))
            child += 1
            body.extend(composed.segments())
            steps.extend(composed.steps)
        base = vr.with_body(_merge(body)) if steps else vr
        state = ComposedRegion(base, steps=tuple(steps))
        node = self.node_at.get(loc)
        edge = self.refiner.get(node) if node is not None else None
        if edge is not None:
            state = self.apply(state, edge)
        self.memo[loc] = state
        return state

    def apply(self, state: ComposedRegion, edge: Edge) -> ComposedRegion:
        src_loc = self.graph.nodes[edge.source]
        step = Step(edge.source.color, edge.source.signature, edge.target.signature, edge.op)
        if _include_mode(self.pl, edge):
            path = PurePosixPath(src_loc.artifact)
            directive = self.pl.dialect.include_statement_format.format(
                path=str(path.with_suffix("")), name=path.stem)
            unit = ComposedRegion(VariabilityRegion(None, VRKind.WHOLE_ARTIFACT, (directive + "\n",)))
        else:
            unit = self.region(src_loc)
        try:
            out = compose_vr(state, [(edge.op, unit)], self.markers_for(src_loc), self.warnings)
        except CompositionError as exc:
            exc.message += f" [{edge.source} {edge.op.value} {edge.target}]"
            raise
        return ComposedRegion(out.region, out.before, out.after,
                              (*state.steps, *unit.steps, step))

    def artifact(self, layer: str, rel: str, keep_markers: bool) -> ComposedArtifact:
        artifact: Artifact = self.pl.layer(layer).artifacts[rel]
        composed = self.region(VRLocation(layer, rel, ()))
        markers = self.pl.dialect.markers(artifact.kind)
        out: list[str] = []
        for seg in composed.segments():
            if isinstance(seg, str):
                out.append(seg)
            else:
                _emit(seg, markers, out, not keep_markers)
        return ComposedArtifact(rel, "".join(out), layer, artifact.kind, composed.steps)


def compose(pl: ProductLine, cfg: Optional[ProductConfig], result: ValidationResult, *,
            keep_markers: bool = False, warnings: Optional[list] = None,
            cplan: Optional[CompositionPlan] = None) -> list[ComposedArtifact]:
    """Compose every emitted artifact of the closure, sorted by path.

    Comment-style region markers are stripped unless ``keep_markers``.
    Errors from all artifacts are collected and raised together.
    """
    if cfg is not None and tuple(result.closure[:len(cfg.selected_layers)]) != cfg.selected_layers:
        raise NotValidated("validation result does not belong to this configuration")
    cplan = cplan or plan(pl, result)
    composer = _Composer(pl, cplan, warnings)
    composed, errors = [], []
    for layer, rel in cplan.emit_set:
        try:
            composed.append(composer.artifact(layer, rel, keep_markers))
        except CompositionError as exc:
            errors.append(exc.located(path=f"{layer}/{rel}"))
    if errors:
        if len(errors) == 1:
            raise errors[0]
        err = CompositionError("; ".join(str(e) for e in errors))
        err.errors = errors
        raise err
    return sorted(composed, key=lambda a: a.relative_path)


# -- writing ---------------------------------------------------------------------------

def provenance_json(artifacts: Sequence[ComposedArtifact]) -> str:
    records = [a.provenance_record() for a in sorted(artifacts, key=lambda a: a.relative_path)]
    return json.dumps(records, indent=2) + "\n"


def write_variant(artifacts: Sequence[ComposedArtifact], output_dir: Path | str) -> dict:
    """Write the variant under ``output_dir``, replacing its previous content.

    Files go to a sibling temporary directory first which is then swapped
    in, so readers never observe a half-written tree.
    """
    output_dir = Path(output_dir)
    if output_dir.exists() and not output_dir.is_dir():
        raise CgplIOError("output path exists and is not a directory", path=output_dir)
    parent = output_dir.absolute().parent
    try:
        parent.mkdir(parents=True, exist_ok=True)
        tmp = Path(tempfile.mkdtemp(prefix=f".{output_dir.name}.", dir=parent))
    except OSError as exc:
        raise CgplIOError(str(exc), path=output_dir) from None
    written = []
    try:
        for a in sorted(artifacts, key=lambda a: a.relative_path):
            target = tmp / a.relative_path
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(a.content.encode("utf-8", "surrogateescape"))
            written.append(a.relative_path)
        (tmp / PROVENANCE_FILE).write_text(provenance_json(artifacts), encoding="utf-8")
        os.chmod(tmp, 0o755)
        backup = None
        if output_dir.exists():
            backup = Path(tempfile.mkdtemp(prefix=f".{output_dir.name}.old.", dir=parent))
            os.rename(output_dir, backup / "tree")
        os.rename(tmp, output_dir)
        if backup is not None:
            shutil.rmtree(backup, ignore_errors=True)
    except OSError as exc:
        shutil.rmtree(tmp, ignore_errors=True)
        raise CgplIOError(str(exc), path=output_dir) from None
    return {"output_dir": str(output_dir), "files": written, "provenance": PROVENANCE_FILE}
