"""Finite-dimensional noncommutative L_p spaces: Lamperti operators, dilations, maximal norms."""

from .algebra import AlgElement, FiniteVNA, lp_norm, trace
from .dilation import convex_n_dilation, shift_dilation, simultaneous_apply, verify_isometry
from .gallery import GalleryCase, involution_example, jlm_operator, random_lamperti, run_case, schur_mixed_unitary
from .lamperti import decompose, doubly_lamperti_factor, is_completely_lamperti, kernel_projections, rho_of
from .maximal import (SolverOptions, ergodic_averages, maximal_ergodic_report, maximal_norm_pos,
                      mean_ergodic_projection, oracle_commuting, oracle_grid_2x2, two_sided_averages)
from .operators import LpOperator, adjoint, apply, choi_cp_check, compose, conjugation, kraus, opnorm_lower, schur

__all__ = [
    "AlgElement", "FiniteVNA", "lp_norm", "trace",
    "convex_n_dilation", "shift_dilation", "simultaneous_apply", "verify_isometry",
    "GalleryCase", "involution_example", "jlm_operator", "random_lamperti", "run_case", "schur_mixed_unitary",
    "decompose", "doubly_lamperti_factor", "is_completely_lamperti", "kernel_projections", "rho_of",
    "SolverOptions", "ergodic_averages", "maximal_ergodic_report", "maximal_norm_pos",
    "mean_ergodic_projection", "oracle_commuting", "oracle_grid_2x2", "two_sided_averages",
    "LpOperator", "adjoint", "apply", "choi_cp_check", "compose", "conjugation", "kraus",
    "opnorm_lower", "schur",
]
