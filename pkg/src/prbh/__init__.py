"""Perfectly reflecting black-hole channel as a weighted direct sum of qubit cloners."""

from .channel_model import (
    CapacityEstimate,
    ClonerDistribution,
    MassIndicator,
    TruncationCapExceeded,
    build_distribution,
    capacity_series,
    cloner_probability,
    quantum_capacity,
    tail_mass,
)
from .density_model import (
    DensityCurve,
    cdf_exact,
    cdf_small_y,
    chi_square_pdf,
    density_curve,
    f_density,
    fit_distance,
)
from .fading_model import (
    CoefficientVector,
    RngStream,
    SampleBatch,
    build_coefficient_vector,
    exponential_pdf,
    fit_batch,
    ks_critical_value,
    ks_statistic,
    rayleigh_pdf,
    sample_complex_gaussian,
    sample_phasor_sum,
    total_probability_check,
)
from .state_sim import (
    BlochVector,
    Block,
    BlockDensityMatrix,
    SpinGenerators,
    channel_apply,
    cloner_output,
    mixed_input_outputs,
    su2_generators,
    xi_block,
)

__version__ = "0.1.0"
