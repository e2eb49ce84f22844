"""Domain types shared by the scanner, the DSL front ends, the validator and
the composer. Nothing in here touches the file system.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from pathlib import Path, PurePosixPath
from typing import TYPE_CHECKING, Iterator, Mapping, Optional, Sequence, Union

from .errors import AmbiguousVR, Span, UnknownArtifact, UnknownLayer, UnknownVR

if TYPE_CHECKING:
    from .dialect import DialectConfig

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def is_identifier(text: str) -> bool:
    return bool(IDENT_RE.fullmatch(text))


class VRKind(str, enum.Enum):
    CONTENT_BLOCK = "ContentBlock"
    EMPTY_BLOCK = "EmptyBlock"
    WHOLE_ARTIFACT = "WholeArtifact"


class MarkerStyle(str, enum.Enum):
    """How a region is delimited in its artifact.

    ``BLOCK`` markers belong to the template language (e.g. Xpand DEFINE) and
    survive composition; ``COMMENT`` markers only exist to name the region.
    """

    BLOCK = "block"
    COMMENT = "comment"


class ArtifactKind(str, enum.Enum):
    TEMPLATE = "Template"
    HELPER = "Helper"
    OPAQUE = "Opaque"


class Op(str, enum.Enum):
    REPLACE = "replaces"
    BEFORE = "before"
    AFTER = "after"

    @property
    def label(self) -> str:
        return {"replaces": "Replace", "before": "Before", "after": "After"}[self.value]


@dataclass(frozen=True)
class VRStep:
    """One element of a region path: a name plus an optional type qualifier."""

    name: str
    qualifier: Optional[str] = None

    def __post_init__(self):
        if not is_identifier(self.name):
            raise ValueError(f"invalid region name {self.name!r}")
        if self.qualifier is not None and not is_identifier(self.qualifier):
            raise ValueError(f"invalid type qualifier {self.qualifier!r}")

    def __str__(self) -> str:
        return self.name if self.qualifier is None else f"{self.name}#{self.qualifier}"


@dataclass(frozen=True)
class Signature:
    """Address of a variability region inside one layer.

    ``artifact_path`` is the layer-relative path of the artifact without its
    file extension; ``vr_path`` descends through nested regions and is empty
    for the whole-artifact region.
    """

    artifact_path: tuple[str, ...]
    vr_path: tuple[VRStep, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "artifact_path", tuple(self.artifact_path))
        steps = tuple(s if isinstance(s, VRStep) else VRStep(*_split_step(s)) for s in self.vr_path)
        object.__setattr__(self, "vr_path", steps)
        if not self.artifact_path:
            raise ValueError("signature needs at least one artifact path segment")
        for seg in self.artifact_path:
            if not is_identifier(seg):
                raise ValueError(f"invalid artifact path segment {seg!r}")

    @property
    def type_qualifier(self) -> Optional[str]:
        return self.vr_path[-1].qualifier if self.vr_path else None

    @property
    def is_whole_artifact(self) -> bool:
        return not self.vr_path

    def __str__(self) -> str:
        text = ".".join(self.artifact_path)
        if self.vr_path:
            text += ":" + ".".join(str(s) for s in self.vr_path)
        return text

    @classmethod
    def parse(cls, text: str) -> "Signature":
        from .ldl import parse_signature

        return parse_signature(text)


def _split_step(text: str) -> tuple[str, Optional[str]]:
    name, _, qual = text.partition("#")
    return name, (qual or None)


Segment = Union[str, "VariabilityRegion"]


@dataclass(frozen=True)
class VariabilityRegion:
    """A designated region of an artifact.

    ``body`` interleaves literal text with child regions in source order. The
    marker text and span are kept for byte-exact serialization and
    diagnostics but do not take part in equality.
    """

    name: Optional[str]
    kind: VRKind
    body: tuple[Segment, ...] = ()
    qualifier: Optional[str] = None
    style: Optional[MarkerStyle] = None
    open_marker: Optional[str] = field(default=None, compare=False)
    close_marker: Optional[str] = field(default=None, compare=False)
    # whitespace between the markers of an EmptyBlock
    filler: str = field(default="", compare=False)
    span: Optional[Span] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))
        if self.kind is VRKind.EMPTY_BLOCK and self.body:
            raise ValueError(f"empty block {self.name!r} cannot have a body")
        if self.kind is VRKind.WHOLE_ARTIFACT:
            if self.style is not None:
                raise ValueError("whole-artifact regions have no markers")
        elif self.style is None or self.name is None:
            raise ValueError("nested regions need a name and a marker style")

    @property
    def children(self) -> tuple["VariabilityRegion", ...]:
        return tuple(s for s in self.body if isinstance(s, VariabilityRegion))

    def children_named(self, name: str, qualifier: Optional[str] = None) -> list["VariabilityRegion"]:
        return [c for c in self.children
                if c.name == name and (qualifier is None or c.qualifier == qualifier)]

    def walk(self) -> Iterator["VariabilityRegion"]:
        """Pre-order traversal including self."""
        yield self
        for child in self.children:
            yield from child.walk()

    def literal_text(self) -> str:
        """Body text with nested regions flattened and all markers dropped."""
        return "".join(s if isinstance(s, str) else s.literal_text() for s in self.body)

    def with_body(self, body: Sequence[Segment]) -> "VariabilityRegion":
        body = tuple(body)
        kind = self.kind
        if kind is VRKind.EMPTY_BLOCK and body:
            kind = VRKind.CONTENT_BLOCK
        return replace(self, body=body, kind=kind, filler="")


@dataclass(frozen=True)
class Artifact:
    relative_path: str
    kind: ArtifactKind
    root_vr: VariabilityRegion

    def __post_init__(self):
        if self.root_vr.kind is not VRKind.WHOLE_ARTIFACT:
            raise ValueError("artifact root must be a whole-artifact region")
        if self.kind is ArtifactKind.OPAQUE:
            body = self.root_vr.body
            if len(body) > 1 or any(not isinstance(s, str) for s in body):
                raise ValueError("opaque artifacts hold a single literal segment")

    @property
    def stem_path(self) -> tuple[str, ...]:
        p = PurePosixPath(self.relative_path)
        return (*p.parent.parts, p.stem) if str(p.parent) != "." else (p.stem,)

    @property
    def name(self) -> str:
        return PurePosixPath(self.relative_path).stem


@dataclass(frozen=True)
class Refinement:
    op: Op
    refining: Signature
    refined: Signature
    # layer the refined side was bound to; None until bound
    refined_layer: Optional[str] = None
    span: Optional[Span] = field(default=None, compare=False)

    def __str__(self) -> str:
        return f"{self.refining} {self.op.value} {self.refined}"


@dataclass(frozen=True)
class Layer:
    name: str
    artifacts: Mapping[str, Artifact] = field(default_factory=dict)
    refines: tuple[str, ...] = ()
    refinements: tuple[Refinement, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "refines", tuple(self.refines))
        object.__setattr__(self, "refinements", tuple(self.refinements))
        if self.refinements and not self.refines:
            raise ValueError(f"layer {self.name!r} has refinements but refines no layer")

    def __hash__(self):
        return hash((self.name, self.refines, self.refinements))

    def find_artifact(self, artifact_path: Sequence[str]) -> Artifact:
        key = tuple(artifact_path)
        hits = [a for a in self.artifacts.values() if a.stem_path == key]
        if not hits:
            raise UnknownArtifact(f"no artifact {'.'.join(key)!r} in layer {self.name!r}")
        if len(hits) > 1:
            names = ", ".join(sorted(a.relative_path for a in hits))
            raise AmbiguousVR(f"artifact {'.'.join(key)!r} in layer {self.name!r} is ambiguous: {names}")
        return hits[0]


@dataclass(frozen=True)
class ProductConfig:
    generator_name: str
    selected_layers: tuple[str, ...]
    output_dir: Optional[str] = None

    DEFAULT_OUTPUT = "gen"

    def __post_init__(self):
        object.__setattr__(self, "selected_layers", tuple(self.selected_layers))
        if not self.selected_layers:
            raise ValueError("at least one layer must be selected")
        if len(set(self.selected_layers)) != len(self.selected_layers):
            raise ValueError("selected layers contain duplicates")

    @property
    def output(self) -> str:
        return self.output_dir if self.output_dir is not None else self.DEFAULT_OUTPUT


@dataclass(frozen=True)
class ProductLine:
    root_dir: Path
    layers: Mapping[str, Layer]
    dialect: "DialectConfig"

    def __post_init__(self):
        for layer in self.layers.values():
            for target in layer.refines:
                if target not in self.layers:
                    raise UnknownLayer(target)

    def layer(self, name: str) -> Layer:
        try:
            return self.layers[name]
        except KeyError:
            raise UnknownLayer(name) from None


@dataclass(frozen=True)
class VRLocation:
    """Where a resolved region lives: layer, artifact and child indices."""

    layer: str
    artifact: str
    index_path: tuple[int, ...] = ()


def resolve(pl: ProductLine, sig: Signature, within: str) -> VariabilityRegion:
    return locate(pl, sig, within)[1]


def locate(pl: ProductLine, sig: Signature, within: str) -> tuple[VRLocation, VariabilityRegion]:
    layer = pl.layer(within)
    artifact = layer.find_artifact(sig.artifact_path)
    vr = artifact.root_vr
    indices = []
    for depth, step in enumerate(sig.vr_path):
        candidates = [(i, c) for i, c in enumerate(vr.children)
                      if c.name == step.name and (step.qualifier is None or c.qualifier == step.qualifier)]
        where = f"{'.'.join(sig.artifact_path)}:{'.'.join(str(s) for s in sig.vr_path[:depth + 1])}"
        if not candidates:
            raise UnknownVR(f"no region {where!r} in layer {within!r}")
        if len(candidates) > 1:
            quals = sorted(str(c.qualifier) for _, c in candidates)
            raise AmbiguousVR(f"region {where!r} in layer {within!r} is ambiguous "
                              f"(qualifiers: {', '.join(quals)}); add #Type")
        i, vr = candidates[0]
        indices.append(i)
    return VRLocation(within, artifact.relative_path, tuple(indices)), vr


def region_at(pl: ProductLine, loc: VRLocation) -> VariabilityRegion:
    vr = pl.layer(loc.layer).artifacts[loc.artifact].root_vr
    for i in loc.index_path:
        vr = vr.children[i]
    return vr


def signature_of(artifact: Union[Artifact, str, Sequence[str]],
                 chain: Sequence[Union[VariabilityRegion, str, VRStep]] = ()) -> Signature:
    """Canonical signature for a region reached through ``chain``.

    Qualifiers are emitted only where a same-named sibling would otherwise make
    the address ambiguous (which needs a real :class:`Artifact`); plain names
    are taken as-is.
    """
    if isinstance(artifact, Artifact):
        path = artifact.stem_path
        current: Optional[VariabilityRegion] = artifact.root_vr
    else:
        if isinstance(artifact, str):
            p = PurePosixPath(artifact)
            parts = [*p.parent.parts] if str(p.parent) != "." else []
            path = (*parts, p.stem if p.suffix else p.name)
        else:
            path = tuple(artifact)
        current = None
    steps = []
    for item in chain:
        if isinstance(item, VRStep):
            steps.append(item)
            current = None
            continue
        if isinstance(item, str):
            steps.append(VRStep(*_split_step(item)))
            current = None
            continue
        needs_qualifier = current is not None and len(current.children_named(item.name)) > 1
        steps.append(VRStep(item.name, item.qualifier if needs_qualifier else None))
        current = item
    return Signature(path, tuple(steps))


def signature_at(pl: ProductLine, loc: VRLocation) -> Signature:
    artifact = pl.layer(loc.layer).artifacts[loc.artifact]
    chain = []
    vr = artifact.root_vr
    for i in loc.index_path:
        vr = vr.children[i]
        chain.append(vr)
    return signature_of(artifact, chain)
