"""Product Configuration Language.

    generator FactoryGenerator {
        output = "gen";
        layers = "factoryVariant";
    }
"""
from __future__ import annotations

from pathlib import Path

from .errors import CgplIOError, DslSyntaxError, EmptySelection, InputError
from .lexing import TokenStream, quote, tokenize
from .model import ProductConfig

KEYWORDS = ("generator", "output", "layers")


def parse_pcl(text: str) -> ProductConfig:
    ts = TokenStream(tokenize(text, KEYWORDS))
    ts.expect("KEYWORD", "generator", what="'generator'")
    name = ts.expect("ID", what="generator name").value
    ts.expect("{", what="'{'")
    output = None
    if ts.at_keyword("output"):
        ts.advance()
        ts.expect("=", what="'='")
        output = ts.expect("STRING", what="string").value
        ts.expect(";", what="';'")
    elif not ts.at_keyword("layers"):
        ts.fail(["'output'", "'layers'"])
    ts.expect("KEYWORD", "layers", what="'layers'")
    ts.expect("=", what="'='")
    first = ts.expect("STRING", what="string")
    layers = [first.value]
    spans = [first.span]
    while ts.at(","):
        ts.advance()
        tok = ts.expect("STRING", what="string")
        layers.append(tok.value)
        spans.append(tok.span)
    ts.expect(";", what="';'")
    ts.expect("}", what="'}'")
    ts.expect("EOF", what="end of input")

    selected = [name for name in layers if name]
    if not selected:
        raise EmptySelection("at least one layer must be selected", span=first.span)
    if len(selected) != len(layers):
        idx = layers.index("")
        raise DslSyntaxError("empty layer name in selection", span=spans[idx])
    seen = set()
    for layer, span in zip(layers, spans):
        if layer in seen:
            raise DslSyntaxError(f"layer {layer!r} selected twice", span=span)
        seen.add(layer)
    return ProductConfig(name, tuple(layers), output)


def format_pcl(cfg: ProductConfig) -> str:
    lines = [f"generator {cfg.generator_name} {{\n"]
    if cfg.output_dir is not None:
        lines.append(f"  output = {quote(cfg.output_dir)};\n")
    lines.append(f"  layers = {', '.join(quote(n) for n in cfg.selected_layers)};\n")
    lines.append("}\n")
    return "".join(lines)


def read_pcl(path: Path | str) -> ProductConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise CgplIOError("product configuration not found", path=path) from None
    except (OSError, UnicodeDecodeError) as exc:
        raise CgplIOError(str(exc), path=path) from None
    try:
        return parse_pcl(text)
    except InputError as exc:
        raise exc.located(path=path)


def find_pcl(root: Path | str) -> Path:
    """The unique ``*.pcl`` file in ``root``."""
    found = sorted(Path(root).glob("*.pcl"))
    if len(found) != 1:
        what = "no" if not found else f"{len(found)}"
        raise CgplIOError(f"expected exactly one *.pcl file, found {what}; pass one explicitly",
                          path=Path(root))
    return found[0]
