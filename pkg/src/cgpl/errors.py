"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`CgplError`.
The CLI maps the three families below onto its exit codes.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional


@dataclass(frozen=True)
class Span:
    """1-based line/column range in a source file."""

    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __str__(self) -> str:
        return f"{self.start_line}:{self.start_col}"


class CgplError(Exception):
    """Base class; carries an optional source location."""

    def __init__(self, message: str, *, path: Optional[Path | str] = None,
                 span: Optional[Span] = None):
        super().__init__(message)
        self.message = message
        self.path = path
        self.span = span

    def __str__(self) -> str:
        where = ""
        if self.path is not None:
            where = f"{self.path}:"
            if self.span is not None:
                where += f"{self.span}:"
            where += " "
        elif self.span is not None:
            where = f"{self.span}: "
        return f"{where}{self.message}"

    def located(self, path=None, span=None) -> "CgplError":
        """Fill in location fields that are still unset and return self."""
        if self.path is None and path is not None:
            self.path = path
        if self.span is None and span is not None:
            self.span = span
        return self


# -- I/O (exit 3) -----------------------------------------------------------

class CgplIOError(CgplError):
    pass


# -- input errors: scanning, parsing, binding (exit 2) ----------------------

class InputError(CgplError):
    pass


class MarkerMismatch(InputError):
    def __init__(self, message, *, name=None, **kw):
        super().__init__(message, **kw)
        self.name = name


class DuplicateVR(InputError):
    pass


class DslSyntaxError(InputError):
    """Syntax error in an LDL or PCL model; ``expected`` lists the acceptable tokens."""

    def __init__(self, message, *, expected=(), **kw):
        super().__init__(message, **kw)
        self.expected = tuple(sorted(set(expected)))


class EmptySelection(InputError):
    pass


class ResolutionError(InputError):
    pass


class UnknownArtifact(ResolutionError):
    pass


class UnknownVR(ResolutionError):
    pass


class AmbiguousVR(ResolutionError):
    pass


class UnknownLayer(InputError):
    def __init__(self, layer: str, **kw):
        super().__init__(f"unknown layer {layer!r}", **kw)
        self.layer = layer


class SelfRefinement(InputError):
    pass


class InvalidRefinement(InputError):
    pass


# -- composition errors (exit 1) --------------------------------------------

class CompositionError(CgplError):
    pass


class PathCollision(CompositionError):
    def __init__(self, relative_path: str, layers, **kw):
        layers = tuple(layers)
        super().__init__(
            f"{relative_path} is emitted by more than one layer: {', '.join(layers)}", **kw)
        self.relative_path = relative_path
        self.layers = layers


class DanglingSuper(CompositionError):
    pass


class NotValidated(CompositionError):
    pass
