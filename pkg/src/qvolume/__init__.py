"""Hilbert-Schmidt volume ratios and Bell detectability for bipartite
quantum state families: PPT fractions via Newton-identity positivity
tests, nested-ball product estimation and hit-and-run sampling."""

from ._backend import BACKEND
from .basis import (
    FAMILY_NAMES,
    OperatorBasis,
    StateFamily,
    coords_to_matrix,
    generalized_gell_mann_basis,
    make_family,
    matrix_to_coords,
)
from .bell import (
    CgSetting,
    ChshSetting,
    OptimizerConfig,
    TwoQubitBloch,
    bloch_decompose,
    bloch_from_coords,
    cg_min_over_v,
    cg_value,
    chsh_value,
    violates_12m,
    violates_cg_bell_diagonal,
    violates_cg_optimized,
    violates_chsh,
)
from .errors import (
    DegenerateDirectionError,
    InsufficientStatisticsError,
    InvalidConfigError,
    InvalidInputError,
    QVolumeError,
    UnknownFamilyError,
)
from .positivity import (
    is_psd_eigen,
    is_psd_newton,
    mehta_radius,
    newton_coefficients,
    outer_radius,
    power_traces,
)
from .ptrans import is_ppt, partial_transpose, ppt_bits_batch
from .rng import RngStream
from .samplers import (
    MultiphaseConfig,
    PREDICATE_NAMES,
    estimate_predicate_ratios,
    hit_and_run_ratio,
    iterate_chain_coords,
    multiphase_estimate,
    muller_ball_sample,
)
from .stats import RatioEstimate, block_statistics, repetition_statistics

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    "FAMILY_NAMES",
    "OperatorBasis",
    "StateFamily",
    "make_family",
    "coords_to_matrix",
    "matrix_to_coords",
    "generalized_gell_mann_basis",
    "TwoQubitBloch",
    "ChshSetting",
    "CgSetting",
    "OptimizerConfig",
    "bloch_decompose",
    "bloch_from_coords",
    "chsh_value",
    "cg_value",
    "cg_min_over_v",
    "violates_chsh",
    "violates_12m",
    "violates_cg_bell_diagonal",
    "violates_cg_optimized",
    "QVolumeError",
    "UnknownFamilyError",
    "InvalidInputError",
    "InvalidConfigError",
    "InsufficientStatisticsError",
    "DegenerateDirectionError",
    "is_psd_newton",
    "is_psd_eigen",
    "power_traces",
    "newton_coefficients",
    "mehta_radius",
    "outer_radius",
    "partial_transpose",
    "is_ppt",
    "ppt_bits_batch",
    "RngStream",
    "MultiphaseConfig",
    "PREDICATE_NAMES",
    "multiphase_estimate",
    "hit_and_run_ratio",
    "estimate_predicate_ratios",
    "iterate_chain_coords",
    "muller_ball_sample",
    "RatioEstimate",
    "block_statistics",
    "repetition_statistics",
]
