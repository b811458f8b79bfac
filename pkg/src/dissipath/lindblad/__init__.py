"""Filtered jump operators and dissipative propagation."""
from .filters import (
    FilterSpec,
    dirichlet_envelope,
    filter_fourier_coeffs,
    filter_response,
    square_wave_coeff_exact,
    time_support,
)
from .jumps import FilteredJump, KickSpec, LindbladGenerator, build_filtered_jump, kick_schedule, to_eigenbasis
from .steppers import (
    DensityState,
    apply_exact_step,
    apply_strang_step,
    channel_hygiene,
    lindblad_superoperator,
    qdrift_step,
    square_wave_jump,
    superoperator_step,
)
