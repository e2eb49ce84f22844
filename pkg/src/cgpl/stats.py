"""Size metrics per layer: template and helper lines of code plus counts of
(refined) blocks and helper regions."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from .dialect import serialize_artifact, split_lines
from .model import ArtifactKind, MarkerStyle, ProductLine, VRLocation, locate

# (field, column header)
COLUMNS = (
    ("tloc", "TLOC"),
    ("define_count", "Number DEFINE"),
    ("refined_define_count", "Number refined DEFINE"),
    ("hloc", "HLOC"),
    ("helper_count", "Number helper"),
    ("refined_helper_count", "Number refined helper"),
)


@dataclass
class StatsRow:
    layer: str
    tloc: int = 0
    define_count: int = 0
    refined_define_count: int = 0
    hloc: int = 0
    helper_count: int = 0
    refined_helper_count: int = 0

    def __iadd__(self, other: "StatsRow") -> "StatsRow":
        for f in fields(self):
            if f.name != "layer":
                setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))
        return self


@dataclass
class StatsReport:
    rows: list[StatsRow]
    totals: StatsRow

    def to_json(self) -> dict:
        return {"columns": [header for _, header in COLUMNS],
                "rows": [asdict(r) for r in self.rows],
                "totals": asdict(self.totals)}

    def format_table(self) -> str:
        header = ["Layer", *(h for _, h in COLUMNS)]
        body = [[r.layer, *(str(getattr(r, f)) for f, _ in COLUMNS)]
                for r in (*self.rows, self.totals)]
        widths = [max(len(row[i]) for row in (header, *body)) for i in range(len(header))]

        def fmt(row):
            return "  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                             for i, (c, w) in enumerate(zip(row, widths))).rstrip()

        lines = [fmt(header), fmt(["-" * w for w in widths])]
        lines += [fmt(r) for r in body[:-1]]
        lines += [fmt(["-" * w for w in widths]), fmt(body[-1])]
        return "\n".join(lines) + "\n"


def count_nonblank(text: str) -> int:
    return sum(1 for line in split_lines(text) if line.strip())


def compute_stats(pl: ProductLine) -> StatsReport:
    """Lines are non-blank lines (whitespace-only lines excluded). A block or
    helper region counts as refined when at least one bound refinement of any
    layer targets it directly."""
    targeted = set()
    for layer in pl.layers.values():
        for ref in layer.refinements:
            if ref.refined_layer is not None:
                targeted.add(locate(pl, ref.refined, ref.refined_layer)[0])
    rows = []
    for name in sorted(pl.layers):
        row = StatsRow(name)
        for rel, artifact in sorted(pl.layers[name].artifacts.items()):
            if artifact.kind is ArtifactKind.OPAQUE:
                continue
            nonblank = count_nonblank(serialize_artifact(artifact.root_vr, pl.dialect, artifact.kind))
            for loc, vr in _walk_nested(name, rel, artifact.root_vr, ()):
                refined = loc in targeted
                if artifact.kind is ArtifactKind.TEMPLATE and vr.style is MarkerStyle.BLOCK:
                    row.define_count += 1
                    row.refined_define_count += refined
                elif artifact.kind is ArtifactKind.HELPER:
                    row.helper_count += 1
                    row.refined_helper_count += refined
            if artifact.kind is ArtifactKind.TEMPLATE:
                row.tloc += nonblank
            else:
                row.hloc += nonblank
        rows.append(row)
    totals = StatsRow("total")
    for r in rows:
        totals += r
    return StatsReport(rows, totals)


def _walk_nested(layer, rel, vr, path):
    for i, child in enumerate(vr.children):
        loc = VRLocation(layer, rel, (*path, i))
        yield loc, child
        yield from _walk_nested(layer, rel, child, loc.index_path)
