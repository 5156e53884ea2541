"""Dynamical entropy and decoherence rates of periodically measured quantum maps."""

from .entropy import (
    BoundsReport,
    CorrelationMatrix,
    EntropyTrace,
    alf_partial_entropy,
    decoherence_entropy,
    free_independence_probe,
    mean_decoherence_entropy,
    omega_state,
    production_rates,
    purification,
    state_correlation,
    theorem2_bounds,
    time_refined_partition,
    tracial_correlation,
)
from .matcore import hermitian_spectrum, hs_norm, trace_norm, von_neumann_entropy
from .partition import (
    PartitionOfUnity,
    apply_channel,
    measured_step,
    momentum_partition,
    refine,
    rotate_partition,
)
from .sampling import haar_unitary, random_pure_state
from .torus import (
    TorusQuantization,
    baker_unitary,
    coherent_state,
    dft_matrix,
    husimi_of_operator,
    quantize_observable,
    translation_operators,
)

__all__ = [
    "BoundsReport",
    "CorrelationMatrix",
    "EntropyTrace",
    "PartitionOfUnity",
    "TorusQuantization",
    "alf_partial_entropy",
    "apply_channel",
    "baker_unitary",
    "coherent_state",
    "decoherence_entropy",
    "dft_matrix",
    "free_independence_probe",
    "haar_unitary",
    "hermitian_spectrum",
    "hs_norm",
    "husimi_of_operator",
    "mean_decoherence_entropy",
    "measured_step",
    "momentum_partition",
    "omega_state",
    "production_rates",
    "purification",
    "quantize_observable",
    "random_pure_state",
    "refine",
    "rotate_partition",
    "state_correlation",
    "theorem2_bounds",
    "time_refined_partition",
    "trace_norm",
    "tracial_correlation",
    "translation_operators",
    "von_neumann_entropy",
]

__version__ = "0.1.0"
