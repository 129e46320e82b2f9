"""Dyadic harmonic analysis toolkit: Haar shifts, local mean oscillation
decompositions, A_p weights and weighted operator norms on dyadic grids."""

from .dyadic import (ROOT, DyadicInterval, GridConfig, StepFunction, average, interval_relations,
                     refine, unpad, zero_pad_embed)
from .errors import ComputationError, DyadicError, ValidationError
from .haar import (HaarShiftSpec, TruncationPolicy, adjoint_spec, apply_shift, assemble_matrix,
                   dyadic_hilbert_spec, haar_expand, haar_function, named_spec, random_spec,
                   weak11_constant)
from .kernels import BACKEND
from .lerner import (LernerDecomposition, decompose, oscillation_rhs, shift_domination,
                     verify_decomposition)
from .petermichl import hilbert_compare, petermichl_average
from .rearrangement import (local_mean_oscillation, local_sharp_maximal_dyadic, median,
                            median_interval, rearrangement_at)
from .sweep import SweepRow, lp_lower_probe, run_sweep
from .weighted import (ApReport, NormReport, ap_constant, dyadic_maximal,
                       maximal_weighted_norm_lb, power_weight, weighted_dyadic_maximal,
                       weighted_operator_norm)

__version__ = "0.1.0"

__all__ = [
    "ROOT", "DyadicInterval", "GridConfig", "StepFunction", "average", "interval_relations",
    "refine", "unpad", "zero_pad_embed", "ComputationError", "DyadicError", "ValidationError",
    "HaarShiftSpec", "TruncationPolicy", "adjoint_spec", "apply_shift", "assemble_matrix",
    "dyadic_hilbert_spec", "haar_expand", "haar_function", "named_spec", "random_spec",
    "weak11_constant", "BACKEND", "LernerDecomposition", "decompose", "oscillation_rhs",
    "shift_domination", "verify_decomposition", "hilbert_compare", "petermichl_average",
    "local_mean_oscillation", "local_sharp_maximal_dyadic", "median", "median_interval",
    "rearrangement_at", "SweepRow", "lp_lower_probe", "run_sweep", "ApReport", "NormReport",
    "ap_constant", "dyadic_maximal", "maximal_weighted_norm_lb", "power_weight",
    "weighted_dyadic_maximal", "weighted_operator_norm",
]
