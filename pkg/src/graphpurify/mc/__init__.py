from .core import (
    BandaidSpec,
    GraphContext,
    IndependentSampler,
    NoiseModel,
    TableSampler,
    apply_mcnot,
    mcnot_vectors,
    pauli_toggle,
)
