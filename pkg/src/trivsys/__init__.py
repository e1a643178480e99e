"""Feedback invariants, trivialisability and normal forms of control-affine systems."""

from .catalog import CatalogEntry, CatalogError, generate
from .classify import check_rectifiability_conditions, check_trivialisable, classify_family
from .feedback import Diffeomorphism, FeedbackTransform, apply_feedback, predict_transformed_structure, pushforward
from .geometry import Chart, VectorField, lie_bracket
from .invariants import canonicalize, compute_invariants, verify_kappa_nu_relation
from .structure import ControlSystem, check_assumptions, compute_structure_functions
from .expr import SamplePlan

__all__ = [
    "CatalogEntry",
    "CatalogError",
    "Chart",
    "ControlSystem",
    "Diffeomorphism",
    "FeedbackTransform",
    "SamplePlan",
    "VectorField",
    "apply_feedback",
    "canonicalize",
    "check_assumptions",
    "check_rectifiability_conditions",
    "check_trivialisable",
    "classify_family",
    "compute_invariants",
    "compute_structure_functions",
    "generate",
    "lie_bracket",
    "predict_transformed_structure",
    "pushforward",
    "verify_kappa_nu_relation",
]
