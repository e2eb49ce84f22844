"""Marker dialects: how variability regions are written inside artifacts.

A dialect is a set of line patterns. A line is a marker only if the whole
line (ignoring surrounding whitespace) matches one pattern; anything else is
literal text. Marker lines delimit regions and are not part of region
bodies, so parsing then serializing reproduces the input byte for byte.
"""
from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterator, Optional

import yaml

from .errors import CgplIOError, InputError, MarkerMismatch, Span
from .model import ArtifactKind, MarkerStyle, VariabilityRegion, VRKind

DIALECT_FILE = "cgpl.dialect"

_LINE_RE = re.compile(r"[^\r\n]*(?:\r\n|\r|\n)|[^\r\n]+\Z")


def split_lines(text: str) -> list[str]:
    """Split keeping line terminators; ``"".join`` of the result is ``text``."""
    return _LINE_RE.findall(text)


def _strip_eol(line: str) -> tuple[str, str]:
    content = line.rstrip("\r\n")
    return content, line[len(content):]


@dataclass(frozen=True)
class MarkerSet:
    """Compiled markers for one artifact kind. ``block_*`` may be absent."""

    comment_vr_begin: re.Pattern
    comment_vr_end: re.Pattern
    include_super: re.Pattern
    block_open: Optional[re.Pattern]
    block_close: Optional[re.Pattern]
    comment_vr_begin_format: str
    comment_vr_end_format: str
    include_super_format: str
    block_open_format: Optional[str]
    block_open_typed_format: Optional[str]
    block_close_format: Optional[str]

    def classify(self, content: str) -> Optional[tuple[str, Optional[str], Optional[str]]]:
        """Return ``(marker_kind, name, type)`` for a marker line, else None."""
        hits = []
        for kind, pattern in (("block_open", self.block_open), ("block_close", self.block_close),
                              ("begin", self.comment_vr_begin), ("end", self.comment_vr_end),
                              ("super", self.include_super)):
            if pattern is None:
                continue
            m = pattern.fullmatch(content)
            if m:
                groups = m.groupdict()
                hits.append((kind, groups.get("name"), groups.get("type")))
        if len(hits) > 1:
            kinds = ", ".join(h[0] for h in hits)
            raise MarkerMismatch(f"line matches several marker kinds ({kinds})")
        if not hits or hits[0][0] == "super":
            return None
        return hits[0]

    def is_include_super(self, content: str) -> bool:
        return self.include_super.fullmatch(content) is not None

    def render_open(self, vr: VariabilityRegion) -> str:
        if vr.style is MarkerStyle.BLOCK:
            if self.block_open_format is None:
                raise ValueError("dialect has no block markers for this artifact kind")
            if vr.qualifier is not None:
                return self.block_open_typed_format.format(name=vr.name, type=vr.qualifier) + "\n"
            return self.block_open_format.format(name=vr.name) + "\n"
        return self.comment_vr_begin_format.format(name=vr.name) + "\n"

    def render_close(self, vr: VariabilityRegion) -> str:
        if vr.style is MarkerStyle.BLOCK:
            return self.block_close_format.format(name=vr.name) + "\n"
        return self.comment_vr_end_format.format(name=vr.name) + "\n"


def _compile(pattern: Optional[str]) -> Optional[re.Pattern]:
    if pattern is None:
        return None
    if not pattern:
        raise InputError("dialect patterns must be non-empty")
    try:
        return re.compile(r"\s*(?:" + pattern + r")\s*")
    except re.error as exc:
        raise InputError(f"invalid dialect pattern {pattern!r}: {exc}") from None


@dataclass(frozen=True)
class DialectConfig:
    """Marker patterns and file-extension routing.

    Patterns are regular expressions matched against a whole line. Region
    names are captured by the group ``name``; block type qualifiers by
    ``type``. The ``*_format`` strings render markers for regions that were
    built in memory rather than parsed.
    """

    block_open: str = r"\[DEFINE\s+(?P<name>[A-Za-z_]\w*)(?:\s+FOR\s+(?P<type>[A-Za-z_]\w*))?\s*\]"
    block_close: str = r"\[ENDDEFINE\]"
    comment_vr_begin: str = r"\[REM\]\s*BEGIN\s+VR:(?P<name>[A-Za-z_]\w*)\s*\[ENDREM\]"
    comment_vr_end: str = r"\[REM\]\s*END\s+VR:(?P<name>[A-Za-z_]\w*)\s*\[ENDREM\]"
    include_super: str = r"\[REM\]\s*\[\s*INCLUDE\s*-\s*SUPER\s*\]\s*\[ENDREM\]"
    template_extensions: tuple[str, ...] = ("xpt",)
    helper_extensions: tuple[str, ...] = ("java",)
    helper_comment_vr_begin: str = r"//\s*BEGIN\s+VR:(?P<name>[A-Za-z_]\w*)"
    helper_comment_vr_end: str = r"//\s*END\s+VR:(?P<name>[A-Za-z_]\w*)"
    helper_include_super: str = r"//\s*INCLUDE\s*-\s*SUPER"
    block_open_format: str = "[DEFINE {name}]"
    block_open_typed_format: str = "[DEFINE {name} FOR {type}]"
    block_close_format: str = "[ENDDEFINE]"
    comment_vr_begin_format: str = "[REM]BEGIN VR:{name}[ENDREM]"
    comment_vr_end_format: str = "[REM]END VR:{name}[ENDREM]"
    include_super_format: str = "[REM][INCLUDE-SUPER][ENDREM]"
    helper_comment_vr_begin_format: str = "// BEGIN VR:{name}"
    helper_comment_vr_end_format: str = "// END VR:{name}"
    helper_include_super_format: str = "// INCLUDE-SUPER"
    # when set, whole-artifact before/after emit this directive instead of
    # inlining the refining artifact; receives {path} and {name}
    include_statement_format: Optional[str] = None

    def __post_init__(self):
        for f in ("template_extensions", "helper_extensions"):
            exts = tuple(e.lstrip(".") for e in getattr(self, f))
            object.__setattr__(self, f, exts)
        overlap = set(self.template_extensions) & set(self.helper_extensions)
        if overlap:
            raise InputError(f"extensions used for both templates and helpers: {sorted(overlap)}")
        # compile eagerly so bad patterns fail at load time
        self.template_markers, self.helper_markers  # noqa: B018

    @cached_property
    def template_markers(self) -> MarkerSet:
        return MarkerSet(
            comment_vr_begin=_compile(self.comment_vr_begin),
            comment_vr_end=_compile(self.comment_vr_end),
            include_super=_compile(self.include_super),
            block_open=_compile(self.block_open),
            block_close=_compile(self.block_close),
            comment_vr_begin_format=self.comment_vr_begin_format,
            comment_vr_end_format=self.comment_vr_end_format,
            include_super_format=self.include_super_format,
            block_open_format=self.block_open_format,
            block_open_typed_format=self.block_open_typed_format,
            block_close_format=self.block_close_format,
        )

    @cached_property
    def helper_markers(self) -> MarkerSet:
        return MarkerSet(
            comment_vr_begin=_compile(self.helper_comment_vr_begin),
            comment_vr_end=_compile(self.helper_comment_vr_end),
            include_super=_compile(self.helper_include_super),
            block_open=None,
            block_close=None,
            comment_vr_begin_format=self.helper_comment_vr_begin_format,
            comment_vr_end_format=self.helper_comment_vr_end_format,
            include_super_format=self.helper_include_super_format,
            block_open_format=None,
            block_open_typed_format=None,
            block_close_format=None,
        )

    def markers(self, kind: ArtifactKind = ArtifactKind.TEMPLATE) -> MarkerSet:
        if kind is ArtifactKind.HELPER:
            return self.helper_markers
        return self.template_markers

    def kind_for(self, path: Path | str) -> ArtifactKind:
        suffix = Path(path).suffix.lstrip(".")
        if suffix in self.template_extensions:
            return ArtifactKind.TEMPLATE
        if suffix in self.helper_extensions:
            return ArtifactKind.HELPER
        return ArtifactKind.OPAQUE

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for k in ("template_extensions", "helper_extensions"):
            d[k] = list(d[k])
        return d


def load_dialect(root: Path | str) -> DialectConfig:
    """Read ``cgpl.dialect`` (YAML mapping) from ``root``; defaults if absent."""
    path = Path(root) / DIALECT_FILE
    if not path.exists():
        return DialectConfig()
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise CgplIOError(str(exc), path=path) from None
    except (UnicodeDecodeError, yaml.YAMLError) as exc:
        raise InputError(f"cannot read dialect config: {exc}", path=path) from None
    if data is None:
        return DialectConfig()
    if not isinstance(data, dict):
        raise InputError("dialect config must be a mapping", path=path)
    known = {f.name for f in dataclasses.fields(DialectConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise InputError(f"unknown dialect keys: {', '.join(unknown)}", path=path)
    for k in ("template_extensions", "helper_extensions"):
        if k in data:
            if not isinstance(data[k], list):
                raise InputError(f"{k} must be a list", path=path)
            data[k] = tuple(data[k])
    try:
        return DialectConfig(**data)
    except InputError as exc:
        raise exc.located(path=path)


# -- parsing -----------------------------------------------------------------

@dataclass
class _Frame:
    name: Optional[str]
    style: Optional[MarkerStyle]
    qualifier: Optional[str] = None
    open_marker: Optional[str] = None
    line: int = 0
    col: int = 0
    body: list = field(default_factory=list)

    def add_text(self, text: str):
        if self.body and isinstance(self.body[-1], str):
            self.body[-1] += text
        else:
            self.body.append(text)


def _describe(frame: _Frame) -> str:
    if frame.style is MarkerStyle.BLOCK:
        return f"block {frame.name!r}"
    return f"region {frame.name!r}"


def parse_artifact(text: str, dialect: DialectConfig,
                   kind: ArtifactKind = ArtifactKind.TEMPLATE) -> VariabilityRegion:
    """Parse ``text`` into its whole-artifact region.

    Raises :class:`MarkerMismatch` for unbalanced or crossing markers.
    """
    markers = dialect.markers(kind)
    root = _Frame(None, None)
    stack = [root]
    lineno = 0
    for lineno, line in enumerate(split_lines(text), 1):
        content, _ = _strip_eol(line)
        try:
            hit = markers.classify(content)
        except MarkerMismatch as exc:
            raise exc.located(span=Span(lineno, 1, lineno, len(content) + 1))
        if hit is None:
            stack[-1].add_text(line)
            continue
        marker, name, qual = hit
        col = len(content) - len(content.lstrip()) + 1
        here = Span(lineno, col, lineno, len(content.rstrip()) + 1)
        if marker in ("block_open", "begin"):
            style = MarkerStyle.BLOCK if marker == "block_open" else MarkerStyle.COMMENT
            if name is None:
                raise MarkerMismatch("opening marker has no region name", span=here)
            stack.append(_Frame(name, style, qual, line, lineno, col))
            continue
        top = stack[-1]
        if marker == "block_close":
            if top.style is MarkerStyle.BLOCK:
                _close(stack, line, lineno, here)
                continue
            if top is root:
                raise MarkerMismatch("block close without an open block", span=here)
            raise MarkerMismatch(f"block close crosses {_describe(top)} opened at line {top.line}",
                                 name=top.name, span=here)
        # comment region end
        if top.style is MarkerStyle.COMMENT and top.name == name:
            _close(stack, line, lineno, here)
            continue
        if any(f.style is MarkerStyle.COMMENT and f.name == name for f in stack):
            raise MarkerMismatch(f"END VR:{name} crosses {_describe(top)} opened at line {top.line}",
                                 name=name, span=here)
        raise MarkerMismatch(f"END VR:{name} without matching BEGIN", name=name, span=here)
    if len(stack) > 1:
        top = stack[-1]
        raise MarkerMismatch(f"{_describe(top)} opened at line {top.line} is never closed",
                             name=top.name, span=Span(top.line, top.col, top.line, top.col))
    end_line = max(lineno, 1)
    return VariabilityRegion(None, VRKind.WHOLE_ARTIFACT, tuple(root.body),
                             span=Span(1, 1, end_line, 1))


def _close(stack: list[_Frame], close_line: str, lineno: int, here: Span) -> None:
    frame = stack.pop()
    body = frame.body
    filler = ""
    kind = VRKind.CONTENT_BLOCK
    if not body or (len(body) == 1 and isinstance(body[0], str) and not body[0].strip()):
        kind = VRKind.EMPTY_BLOCK
        filler = body[0] if body else ""
        body = []
    vr = VariabilityRegion(
        frame.name, kind, tuple(body), frame.qualifier, frame.style,
        open_marker=frame.open_marker, close_marker=close_line, filler=filler,
        span=Span(frame.line, frame.col, lineno, here.end_col),
    )
    stack[-1].body.append(vr)


# -- serialization -------------------------------------------------------------

def serialize_artifact(root: VariabilityRegion, dialect: DialectConfig,
                       kind: ArtifactKind = ArtifactKind.TEMPLATE, *,
                       strip_comment_markers: bool = False) -> str:
    """Inverse of :func:`parse_artifact`.

    With ``strip_comment_markers`` the comment-style region markers are
    dropped; block markers are part of the template language and always kept.
    """
    out: list[str] = []
    _emit(root, dialect.markers(kind), out, strip_comment_markers)
    return "".join(out)


def _emit(vr: VariabilityRegion, markers: MarkerSet, out: list[str], strip: bool) -> None:
    show = vr.kind is not VRKind.WHOLE_ARTIFACT and not (strip and vr.style is MarkerStyle.COMMENT)
    if show:
        out.append(vr.open_marker if vr.open_marker is not None else markers.render_open(vr))
        out.append(vr.filler)
    for seg in vr.body:
        if isinstance(seg, str):
            out.append(seg)
        else:
            _emit(seg, markers, out, strip)
    if show:
        out.append(vr.close_marker if vr.close_marker is not None else markers.render_close(vr))


def iter_lines_with_super(text: str, markers: MarkerSet) -> Iterator[tuple[str, bool]]:
    for line in split_lines(text):
        yield line, markers.is_include_super(_strip_eol(line)[0])
