"""Spectral sensitivity of embedded graphs to heavy-tailed vertex noise."""
from __future__ import annotations

from .ctpl import CtplParams, RadialSample, autotune_tempering, ctpl_pdf, levy_pdf, sample_radius
from .graph import EmbeddedGraph, WeightKernel, apply_vertex_noise, check_constraints, laplacian
from .metrics import DistanceSample, Oracle, S3iResult, s3i, s3i_replicated
from .motifs import MotifConfiguration, MotifInstance, canonical_motif, extremal_displacement, greedy_tiling
from .reference import build_reference_graph
from .repair import RepairLog, detect_violations, repair
from .spectral import PerturbationCertificate, Spectrum, spectral_distance, spectrum, wasserstein2

__version__ = "0.1.0"

__all__ = [
    "CtplParams",
    "DistanceSample",
    "EmbeddedGraph",
    "MotifConfiguration",
    "MotifInstance",
    "Oracle",
    "PerturbationCertificate",
    "RadialSample",
    "RepairLog",
    "S3iResult",
    "Spectrum",
    "WeightKernel",
    "apply_vertex_noise",
    "autotune_tempering",
    "build_reference_graph",
    "canonical_motif",
    "check_constraints",
    "ctpl_pdf",
    "detect_violations",
    "extremal_displacement",
    "greedy_tiling",
    "laplacian",
    "levy_pdf",
    "repair",
    "s3i",
    "s3i_replicated",
    "sample_radius",
    "spectral_distance",
    "spectrum",
    "wasserstein2",
]
