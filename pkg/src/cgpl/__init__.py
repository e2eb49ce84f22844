"""Code-generator product lines: layered templates with variability regions,
refinement validation and static composition."""

__version__ = "0.1.0"

from .composer import (ComposedArtifact, ComposedRegion, CompositionPlan, compose, compose_vr,
                       plan, write_variant)
from .dialect import DialectConfig, load_dialect, parse_artifact, serialize_artifact
from .ldl import LayerDefinitionModel, bind, format_ldl, parse_ldl
from .model import (Artifact, ArtifactKind, Layer, Op, ProductConfig, ProductLine, Refinement,
                    Signature, VariabilityRegion, VRKind, VRStep, resolve, signature_of)
from .pcl import format_pcl, parse_pcl
from .scanner import ScanReport, scan_product_line
from .stats import compute_stats
from .validator import (Conflict, ConflictKind, RefinementGraph, ValidationResult, VRNode,
                        build_graph, export_dot, validate)

__all__ = [
    "Artifact", "ArtifactKind", "ComposedArtifact", "ComposedRegion", "CompositionPlan",
    "Conflict", "ConflictKind", "DialectConfig", "Layer", "LayerDefinitionModel", "Op",
    "ProductConfig", "ProductLine", "Refinement", "RefinementGraph", "ScanReport", "Signature",
    "ValidationResult", "VariabilityRegion", "VRKind", "VRNode", "VRStep", "bind", "build_graph",
    "compose", "compose_vr", "compute_stats", "export_dot", "format_ldl", "format_pcl",
    "load_dialect", "parse_artifact", "parse_ldl", "parse_pcl", "plan", "resolve",
    "scan_product_line", "serialize_artifact", "signature_of", "validate", "write_variant",
]
