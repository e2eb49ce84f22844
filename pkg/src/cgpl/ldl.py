"""Layer Definition Language: which layer refines which, and how.

    layer factoryVariant refines baseVariant {
        base.ClassWithFact:FurtherMethods replaces base.Class:FurtherMethods;
        ClassCopyright before Class;
    }
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .errors import (AmbiguousVR, CgplIOError, DslSyntaxError, InputError, InvalidRefinement,
                     ResolutionError,
                     SelfRefinement, Span, UnknownArtifact, UnknownLayer, UnknownVR)
from .lexing import TokenStream, tokenize
from .model import Op, ProductLine, Refinement, Signature, VRStep, locate

log = logging.getLogger(__name__)

LDL_FILE = "layers.ldl"
KEYWORDS = ("layer", "refines", "replaces", "before", "after")
_OPS = {op.value: op for op in Op}


@dataclass(frozen=True)
class LayerEntry:
    layer_name: str
    refined_layer_names: tuple[str, ...]
    clauses: tuple[Refinement, ...] = ()
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class LayerDefinitionModel:
    entries: tuple[LayerEntry, ...] = ()

    def __post_init__(self):
        names = [e.layer_name for e in self.entries]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise InputError(f"layer defined more than once: {', '.join(dupes)}")

    def entry(self, name: str) -> Optional[LayerEntry]:
        return next((e for e in self.entries if e.layer_name == name), None)


# -- parsing -------------------------------------------------------------------

def parse_ldl(text: str) -> LayerDefinitionModel:
    ts = TokenStream(tokenize(text, KEYWORDS))
    entries = []
    seen = {}
    while not ts.at("EOF"):
        if not ts.at_keyword("layer"):
            ts.fail(["'layer'", "end of input"])
        entry = _entry(ts)
        if entry.layer_name in seen:
            raise DslSyntaxError(f"layer {entry.layer_name!r} already defined at line "
                                 f"{seen[entry.layer_name].start_line}", span=entry.span)
        seen[entry.layer_name] = entry.span
        entries.append(entry)
    return LayerDefinitionModel(tuple(entries))


def _entry(ts: TokenStream) -> LayerEntry:
    start = ts.advance()
    name = ts.expect("ID", what="layer name").value
    ts.expect("KEYWORD", "refines", what="'refines'")
    targets = [ts.expect("ID", what="layer name").value]
    while ts.at(","):
        ts.advance()
        targets.append(ts.expect("ID", what="layer name").value)
    ts.expect("{", what="'{'")
    clauses = []
    while not ts.at("}"):
        if not ts.at("ID"):
            ts.fail(["signature", "'}'"])
        clauses.append(_clause(ts))
    ts.advance()
    return LayerEntry(name, tuple(targets), tuple(clauses), span=start.span)


def _clause(ts: TokenStream) -> Refinement:
    first = ts.current
    refining = _signature(ts)
    if not ts.at_keyword(*KEYWORDS[2:]):
        ts.fail(["'replaces'", "'before'", "'after'"] + (["'.'", "':'"] if not refining.vr_path else ["'.'"]))
    op = _OPS[ts.advance().value]
    refined = _signature(ts)
    ts.expect(";", what="';'")
    return Refinement(op, refining, refined, span=first.span)


def _signature(ts: TokenStream) -> Signature:
    path = [ts.expect("ID", what="signature").value]
    while ts.at("."):
        ts.advance()
        path.append(ts.expect("ID", what="identifier").value)
    steps = []
    if ts.at(":"):
        ts.advance()
        steps.append(_qualified(ts))
        while ts.at("."):
            ts.advance()
            steps.append(_qualified(ts))
    return Signature(tuple(path), tuple(steps))


def _qualified(ts: TokenStream) -> VRStep:
    name = ts.expect("ID", what="region name").value
    qual = None
    if ts.at("#"):
        ts.advance()
        qual = ts.expect("ID", what="type name").value
    return VRStep(name, qual)


def parse_signature(text: str) -> Signature:
    ts = TokenStream(tokenize(text, KEYWORDS))
    sig = _signature(ts)
    ts.expect("EOF", what="end of input")
    return sig


def format_ldl(model: LayerDefinitionModel) -> str:
    out = []
    for entry in model.entries:
        out.append(f"layer {entry.layer_name} refines {', '.join(entry.refined_layer_names)} {{\n")
        for c in entry.clauses:
            out.append(f"  {c.refining} {c.op.value} {c.refined};\n")
        out.append("}\n")
    return "".join(out)


def read_ldl(root: Path | str) -> LayerDefinitionModel:
    path = Path(root) / LDL_FILE
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise CgplIOError("layer definition model not found", path=path) from None
    except (OSError, UnicodeDecodeError) as exc:
        raise CgplIOError(str(exc), path=path) from None
    try:
        return parse_ldl(text)
    except InputError as exc:
        raise exc.located(path=path)


# -- binding -----------------------------------------------------------------

_SPECIFICITY = {AmbiguousVR: 3, UnknownVR: 2, UnknownArtifact: 1}


def bind(pl: ProductLine, model: LayerDefinitionModel, warnings: Optional[list] = None,
         source: Optional[Path | str] = None) -> ProductLine:
    """Attach ``refines`` and refinement lists from ``model`` to the layers.

    Refined signatures resolve against the refined layers in declaration
    order; the first hit wins and further hits are reported as warnings.
    Returns a new product line.
    """
    source = source if source is not None else pl.root_dir / LDL_FILE
    layers = dict(pl.layers)
    for entry in model.entries:
        if entry.layer_name not in pl.layers:
            raise UnknownLayer(entry.layer_name, path=source, span=entry.span)
        for target in entry.refined_layer_names:
            if target == entry.layer_name:
                raise SelfRefinement(f"layer {target!r} cannot refine itself",
                                     path=source, span=entry.span)
            if target not in pl.layers:
                raise UnknownLayer(target, path=source, span=entry.span)
        bound = []
        pairs = {}
        for clause in entry.clauses:
            try:
                src, _ = locate(pl, clause.refining, entry.layer_name)
                refined_layer = _resolve_refined(pl, clause, entry, warnings, source)
                tgt, _ = locate(pl, clause.refined, refined_layer)
            except ResolutionError as exc:
                raise exc.located(path=source, span=clause.span)
            if (src, tgt) in pairs:
                raise InvalidRefinement(
                    f"'{clause}' repeats the region pair of line {pairs[src, tgt].start_line}",
                    path=source, span=clause.span)
            pairs[src, tgt] = clause.span or Span(0, 0, 0, 0)
            bound.append(replace(clause, refined_layer=refined_layer))
        layers[entry.layer_name] = replace(pl.layers[entry.layer_name],
                                           refines=entry.refined_layer_names,
                                           refinements=tuple(bound))
    return replace(pl, layers=layers)


def _resolve_refined(pl, clause, entry, warnings, source) -> str:
    hits, errors = [], []
    for target in entry.refined_layer_names:
        try:
            locate(pl, clause.refined, target)
        except ResolutionError as exc:
            errors.append(exc)
        else:
            hits.append(target)
    if not hits:
        best = max(errors, key=lambda e: _SPECIFICITY.get(type(e), 0))
        if len(errors) > 1:
            best.message += f" (searched layers: {', '.join(entry.refined_layer_names)})"
        raise best
    if len(hits) > 1:
        msg = (f"{clause.refined} exists in layers {', '.join(hits)}; "
               f"using {hits[0]!r} (first in refines list)")
        log.debug("%s", msg)
        if warnings is not None:
            warnings.append((str(source), clause.span, msg))
    return hits[0]
