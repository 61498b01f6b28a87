"""Exact computations with Stokes data and perverse-sheaf presentations."""

from .exactplane import Direction, GaussianRational, Q
from .linalg import MatQ, Subspace
from .presentation import Constr0Presentation, total_monodromy, validate
from .costokes import (StokesData, build_arc_subsheaf, circle_cohomology,
                       extract_stokes_data, filtration_stalk,
                       good_interval_splitting, realize_presentation)
from .decomp import (compare_decompositions, rebase_presentation,
                     stokes_decomposition, transport_stability,
                     trivial_stokes_check, vanishing_cycle_decomposition)

__all__ = [
    "Direction", "GaussianRational", "Q", "MatQ", "Subspace",
    "Constr0Presentation", "total_monodromy", "validate",
    "StokesData", "build_arc_subsheaf", "circle_cohomology", "extract_stokes_data",
    "filtration_stalk", "good_interval_splitting", "realize_presentation",
    "compare_decompositions", "rebase_presentation", "stokes_decomposition",
    "transport_stability", "trivial_stokes_check", "vanishing_cycle_decomposition",
]
