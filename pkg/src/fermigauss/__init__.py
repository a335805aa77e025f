"""Gaussian fermionic states as covariance matrices and as Jordan-Wigner vectors."""

from .channels import (
    GaussianChannel,
    apply_channel_cm,
    cj_cm,
    compose_channels,
    glu_channel,
    gsep_triviality_probe,
    is_product_channel,
)
from .gfs_cm import (
    Bipartition,
    CovarianceMatrix,
    LocalOrthogonalSet,
    apply_local_orthogonal,
    correlation_rank,
    is_s2pi_separable_cm,
    thermal_cm,
    two_copies,
    validate_cm,
    wick_moment,
)
from .glu_standard import glu_equivalent, standard_form, validate_3mode_standard_form
from .jw_fock import cm_from_state, is_gaussian_operator, is_gaussian_pure
from .locc_sim import ghz3_protocol, run_protocol, sep_feasibility, verify_deterministic
from .matalg import antisymmetric_normal_form, pfaffian, svd2_so
from .slocc import classify_3mode, classify_4mode_seed, normal_form_iterate

__version__ = "0.1.0"

__all__ = [
    "Bipartition", "CovarianceMatrix", "GaussianChannel", "LocalOrthogonalSet",
    "antisymmetric_normal_form", "apply_channel_cm", "apply_local_orthogonal", "cj_cm",
    "classify_3mode", "classify_4mode_seed", "cm_from_state", "compose_channels",
    "correlation_rank", "ghz3_protocol", "glu_channel", "glu_equivalent",
    "gsep_triviality_probe", "is_gaussian_operator", "is_gaussian_pure", "is_product_channel",
    "is_s2pi_separable_cm", "normal_form_iterate", "pfaffian", "run_protocol",
    "sep_feasibility", "standard_form", "svd2_so", "thermal_cm", "two_copies",
    "validate_3mode_standard_form", "validate_cm", "verify_deterministic", "wick_moment",
]
