"""Exact solver for recursively determinate bivariate truncated moment problems."""
from .extend import NotApplicable, analyze, extend_step, run_chain
from .measure import measure_from_flat, verify_measure
from .moment import MomentSequence, build_moment_matrix, moments_from_atoms
from .relations import detect_rd, kernel_relations

__all__ = [
    "MomentSequence",
    "NotApplicable",
    "analyze",
    "build_moment_matrix",
    "detect_rd",
    "extend_step",
    "kernel_relations",
    "measure_from_flat",
    "moments_from_atoms",
    "run_chain",
    "verify_measure",
]
