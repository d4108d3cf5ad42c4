"""Compound matrices, log norms of compounds and k-contraction certificates."""

from ._validation import DomainError
from .certify import (
    Certificate,
    JacobianSampler,
    certify_direct,
    certify_tau,
    eigsum_necessary_check,
    hopfield_certify,
    hurwitz_via_2compound,
    local_stability_compound_free,
    ltv_smith_certify,
    search_diagonal_weights,
    trace_dominance,
)
from .compounds import (
    additive_compound,
    apply_similarity_compound,
    minor,
    multiplicative_compound,
    parallelotope_volume,
)
from .duality import (
    DualityMatrix,
    additive_duality_residual,
    build_U,
    commutation_residual,
    conjugate_by_U,
    exp_compound_via_duality,
    kth_adjugate,
    mu_duality_equality,
)
from .dynamics import (
    HopfieldModel,
    Trajectory,
    convergence_experiment,
    find_equilibrium,
    integrate,
    ltv_rotation_example,
)
from .lexidx import complement, generate_sequences, rank, signature, unrank
from .lognorms import (
    LogNormSpec,
    TauSpec,
    dual_exponent,
    mu,
    mu_compound_direct,
    normalized_mu_monotone,
    tau,
    tau_upper_bounds_mu,
)

__version__ = "0.1.0"
