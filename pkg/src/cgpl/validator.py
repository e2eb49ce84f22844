"""Refinement graph construction, automatic layer selection and conflict checks.

Vertices are variability regions colored by the layer that owns them; an
edge points from the refining region to the refined one. A selection is
valid when the graph is acyclic and no region has more than one refiner.
"""
from __future__ import annotations

import enum
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import InputError
from .model import Op, ProductLine, Refinement, Signature, VRLocation, locate, signature_at


@dataclass(frozen=True)
class VRNode:
    signature: Signature
    color: str

    def __str__(self) -> str:
        return f"{self.signature}@{self.color}"

    @property
    def sort_key(self) -> tuple[str, str]:
        return (self.color, str(self.signature))


@dataclass(frozen=True)
class Edge:
    source: VRNode
    target: VRNode
    op: Op
    refinement: Refinement = field(compare=False)

    @property
    def sort_key(self):
        return (self.source.sort_key, self.target.sort_key, self.op.value)


@dataclass
class RefinementGraph:
    selected: tuple[str, ...]
    nodes: dict[VRNode, VRLocation] = field(default_factory=dict)
    edges: list[Edge] = field(default_factory=list)
    # layers whose refinements were expanded, in processing order
    processed_colors: list[str] = field(default_factory=list)

    def add_node(self, node: VRNode, loc: VRLocation) -> None:
        self.nodes.setdefault(node, loc)

    def add_edge(self, edge: Edge) -> None:
        if edge not in self.edges:
            self.edges.append(edge)

    def successors(self) -> dict[VRNode, list[VRNode]]:
        succ = {n: [] for n in self.nodes}
        for e in sorted(self.edges, key=lambda e: e.sort_key):
            succ[e.source].append(e.target)
        return succ

    def refiners_of(self, node: VRNode) -> list[Edge]:
        return [e for e in self.edges if e.target == node]

    @property
    def colors(self) -> set[str]:
        return {n.color for n in self.nodes}


class ConflictKind(str, enum.Enum):
    CYCLE = "Cycle"
    MULTIPLE_REFINERS = "MultipleRefiners"


@dataclass(frozen=True)
class Conflict:
    """``witnesses`` is a closed cycle (first == last) for ``CYCLE`` and
    ``(refined, refiner1, refiner2, ...)`` for ``MULTIPLE_REFINERS``."""

    kind: ConflictKind
    witnesses: tuple[VRNode, ...]

    def __post_init__(self):
        if self.kind is ConflictKind.CYCLE:
            assert len(self.witnesses) >= 2 and self.witnesses[0] == self.witnesses[-1]
        else:
            assert len(self.witnesses) >= 3

    @property
    def refined(self) -> Optional[VRNode]:
        return self.witnesses[0] if self.kind is ConflictKind.MULTIPLE_REFINERS else None

    @property
    def refiners(self) -> tuple[VRNode, ...]:
        return self.witnesses[1:] if self.kind is ConflictKind.MULTIPLE_REFINERS else ()

    def describe(self) -> str:
        if self.kind is ConflictKind.CYCLE:
            return "refinement cycle: " + " -> ".join(str(n) for n in self.witnesses)
        return (f"{self.refined} is refined by {len(self.refiners)} regions: "
                + ", ".join(str(n) for n in self.refiners))


@dataclass(frozen=True)
class ValidationResult:
    closure: tuple[str, ...]
    conflicts: tuple[Conflict, ...] = ()
    warnings: tuple[str, ...] = ()
    graph: Optional[RefinementGraph] = field(default=None, compare=False, repr=False)

    @property
    def ok(self) -> bool:
        return not self.conflicts


def build_graph(pl: ProductLine, selected: Sequence[str]) -> RefinementGraph:
    """Expand the refinements of the selected layers, then of every layer
    that shows up as a vertex color, until nothing new is found."""
    for name in selected:
        pl.layer(name)
    graph = RefinementGraph(tuple(selected))
    queue = deque(dict.fromkeys(selected))
    known = set(queue)
    while queue:
        color = queue.popleft()
        graph.processed_colors.append(color)
        found = set()
        for ref in pl.layer(color).refinements:
            if ref.refined_layer is None:
                raise InputError(f"refinement '{ref}' in layer {color!r} is not bound")
            src_loc, _ = locate(pl, ref.refining, color)
            tgt_loc, _ = locate(pl, ref.refined, ref.refined_layer)
            src = VRNode(signature_at(pl, src_loc), color)
            tgt = VRNode(signature_at(pl, tgt_loc), ref.refined_layer)
            graph.add_node(src, src_loc)
            graph.add_node(tgt, tgt_loc)
            graph.add_edge(Edge(src, tgt, ref.op, ref))
            if tgt.color not in known:
                found.add(tgt.color)
        for c in sorted(found):
            known.add(c)
            queue.append(c)
    return graph


def strongly_connected_components(succ: dict) -> list[list]:
    """Tarjan's algorithm, iterative. Components come out in reverse
    topological order; vertices are visited in ``succ`` iteration order."""
    index, low = {}, {}
    on_stack = set()
    stack, result = [], []
    counter = 0
    for root in succ:
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                result.append(comp)
    return result


def _cycle_through(start, members: set, succ: dict) -> list:
    """Shortest cycle from ``start`` back to itself inside one component (BFS)."""
    parent = {start: None}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in succ[v]:
            if w not in members:
                continue
            if w == start:
                path = [v]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                path.reverse()
                return path + [start]
            if w not in parent:
                parent[w] = v
                queue.append(w)
    raise AssertionError("component without a cycle")


def find_cycles(succ: dict, key=lambda n: n) -> list[list]:
    """One witness cycle per cyclic strongly connected component."""
    cycles = []
    for comp in strongly_connected_components(succ):
        members = set(comp)
        if len(comp) == 1 and comp[0] not in succ[comp[0]]:
            continue
        start = min(comp, key=key)
        ordered = {v: sorted(succ[v], key=key) for v in comp}
        cycles.append(_cycle_through(start, members, ordered))
    return sorted(cycles, key=lambda c: [key(v) for v in c])


def validate(graph: RefinementGraph) -> ValidationResult:
    succ = graph.successors()
    conflicts = [Conflict(ConflictKind.CYCLE, tuple(c))
                 for c in find_cycles(succ, key=lambda n: n.sort_key)]
    incoming = defaultdict(set)
    for e in graph.edges:
        incoming[e.target].add(e.source)
    for target in sorted(incoming, key=lambda n: n.sort_key):
        sources = incoming[target]
        if len(sources) >= 2:
            ordered = sorted(sources, key=lambda n: n.sort_key)
            conflicts.append(Conflict(ConflictKind.MULTIPLE_REFINERS, (target, *ordered)))

    warnings = []
    layer_succ = defaultdict(set)
    for e in graph.edges:
        layer_succ[e.source.color].add(e.target.color)
    layer_succ = {c: sorted(layer_succ.get(c, ())) for c in sorted(graph.colors | set(layer_succ))}
    for cycle in find_cycles(layer_succ):
        warnings.append("layers refine each other in a cycle: " + " -> ".join(cycle))

    closure = list(graph.processed_colors)
    for c in sorted(graph.colors):
        if c not in closure:
            closure.append(c)
    return ValidationResult(tuple(closure), tuple(conflicts), tuple(warnings), graph)


def check(pl: ProductLine, selected: Sequence[str]) -> tuple[RefinementGraph, ValidationResult]:
    graph = build_graph(pl, selected)
    return graph, validate(graph)


# -- DOT export --------------------------------------------------------------

_PALETTE = ("#cdb4f5", "#ffc89a", "#a7c7f2", "#b8e6b0", "#f5e49c", "#f2a7b8",
            "#c2c2c2", "#9de0dc")


def _dot_id(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(graph: RefinementGraph, result: Optional[ValidationResult] = None) -> str:
    """Graphviz digraph of the refinement graph; conflicts drawn in red."""
    colors = sorted(graph.colors)
    fill = {c: _PALETTE[i % len(_PALETTE)] for i, c in enumerate(colors)}
    bad_nodes, bad_edges = set(), set()
    for conflict in (result.conflicts if result else ()):
        w = conflict.witnesses
        bad_nodes.update(w)
        if conflict.kind is ConflictKind.CYCLE:
            bad_edges.update(zip(w, w[1:]))
        else:
            bad_edges.update((src, w[0]) for src in w[1:])
    legend = "// legend: " + (", ".join(f"{c}={fill[c]}" for c in colors) or "no layers") \
        + "; red outline = conflict\n"
    if not graph.nodes:
        return legend + "digraph cgpl {}\n"
    lines = [legend, "digraph cgpl {\n", "  rankdir=BT;\n",
             "  node [shape=box, style=\"rounded,filled\", fontname=\"Helvetica\"];\n"]
    for node in sorted(graph.nodes, key=lambda n: n.sort_key):
        label = _dot_id(str(node.signature))[:-1] + "\\n[" + _dot_id(node.color)[1:-1] + ']"'
        attrs = [f"label={label}", f"fillcolor={_dot_id(fill[node.color])}"]
        if node in bad_nodes:
            attrs += ['color="red"', "penwidth=2"]
        lines.append(f"  {_dot_id(str(node))} [{', '.join(attrs)}];\n")
    for e in sorted(graph.edges, key=lambda e: e.sort_key):
        attrs = [f"label={_dot_id(e.op.value)}"]
        if (e.source, e.target) in bad_edges:
            attrs += ['color="red"', "penwidth=2"]
        lines.append(f"  {_dot_id(str(e.source))} -> {_dot_id(str(e.target))} [{', '.join(attrs)}];\n")
    lines.append("}\n")
    return "".join(lines)
