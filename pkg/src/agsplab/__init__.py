"""agsplab: a numerical laboratory for subspace geometry, approximate
ground-space projectors, and degenerate-case entanglement bounds."""

from .agsp import (
    Agsp,
    BipartiteAgsp,
    Pap,
    apply_to_subspace,
    chebyshev_agsp,
    error_reduction_check,
    operator_schmidt,
    pap_apply,
    pap_from_agsp,
    synth_agsp,
    validate_agsp,
)
from .bipartite import (
    EntropyPartition,
    SchmidtData,
    dyadic_entropy_bound,
    entanglement_entropy,
    left_compare,
    schmidt,
    spectrum_entropy,
    tail_bound_check,
)
from .bootstrap import (
    BootstrapParams,
    BootstrapTrace,
    BoundParams,
    bootstrap_run,
    derived_dim_constant,
    explicit_bound,
    frustrated_run,
    geometric_tail,
    haar_subspace,
    max_entropy_estimate,
    randlem_params,
    reduce_dimension,
    reduction_dim,
)
from .hamiltonians import ToyHamiltonian, ground_space, ising_chain, random_degenerate_target
from .subspace import (
    LiftingOperator,
    OverlapReport,
    Subspace,
    TransitionMap,
    compare,
    delta_close,
    lifting_operator,
    orthonormalize,
    overlap_symmetry_check,
    projected_image,
    rotate_subspace,
    transition_map,
)

__version__ = "0.1.0"

__all__ = [
    "Agsp",
    "BipartiteAgsp",
    "BootstrapParams",
    "BootstrapTrace",
    "BoundParams",
    "EntropyPartition",
    "LiftingOperator",
    "OverlapReport",
    "Pap",
    "SchmidtData",
    "Subspace",
    "ToyHamiltonian",
    "TransitionMap",
    "apply_to_subspace",
    "bootstrap_run",
    "chebyshev_agsp",
    "compare",
    "delta_close",
    "derived_dim_constant",
    "dyadic_entropy_bound",
    "entanglement_entropy",
    "error_reduction_check",
    "explicit_bound",
    "frustrated_run",
    "geometric_tail",
    "ground_space",
    "haar_subspace",
    "ising_chain",
    "left_compare",
    "lifting_operator",
    "max_entropy_estimate",
    "operator_schmidt",
    "orthonormalize",
    "overlap_symmetry_check",
    "pap_apply",
    "pap_from_agsp",
    "projected_image",
    "randlem_params",
    "random_degenerate_target",
    "reduce_dimension",
    "reduction_dim",
    "rotate_subspace",
    "schmidt",
    "spectrum_entropy",
    "synth_agsp",
    "tail_bound_check",
    "transition_map",
    "validate_agsp",
]
