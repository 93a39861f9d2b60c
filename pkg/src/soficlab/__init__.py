"""Finite sofic approximations of finitely generated groups and their coarse geometry."""
from __future__ import annotations

__version__ = "0.1.0"

from .actions import AlmostAction, finite_core, good_set, repair_connected, sigma_elem, sigma_of
from .amenability import (
    ProbField,
    amenable_mass_estimate,
    folner_search,
    functional_check,
    hyperfinite_partition,
    propA_to_folner,
)
from .coarse import compare_families, invariant_profile, neighborhood_growth_check, verify_qi
from .errors import ConvergenceError, ResourceLimitError
from .generators import (
    ApproximationFamily,
    folner_approximation,
    mixed_family,
    quotient_approximation,
    random_permutation_approximation,
    random_permutation_family,
)
from .graph import LabeledGraph
from .groups import DirectProduct, FiniteCyclicPower, FreeAbelian, FreeGroup, SymmetricGroup, Word, cayley_ball
from .local_stats import ball_distribution, bs_defect, canonical_code, decode_code, extract_ball
from .spectral import cheeger_sweep, expander_certificate, laplacian, spectral_gap, verify_cnd

__all__ = [
    "AlmostAction", "ApproximationFamily", "ConvergenceError", "DirectProduct", "FiniteCyclicPower",
    "FreeAbelian", "FreeGroup", "LabeledGraph", "ProbField", "ResourceLimitError", "SymmetricGroup", "Word",
    "amenable_mass_estimate", "ball_distribution", "bs_defect", "canonical_code", "cayley_ball",
    "cheeger_sweep", "compare_families", "decode_code", "expander_certificate", "extract_ball",
    "finite_core", "folner_approximation", "folner_search", "functional_check", "good_set",
    "hyperfinite_partition", "invariant_profile", "laplacian", "mixed_family", "neighborhood_growth_check",
    "propA_to_folner", "quotient_approximation", "random_permutation_approximation",
    "random_permutation_family", "repair_connected", "sigma_elem", "sigma_of", "spectral_gap",
    "verify_cnd", "verify_qi",
]
