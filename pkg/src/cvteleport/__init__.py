"""Fock-space simulation of continuous-variable teleportation with photon-subtracted entanglement."""

from cvteleport.analysis import (
    PhaseSpaceGrid,
    fringe_visibility,
    quadrature_distribution,
    wigner_function,
)
from cvteleport.conditioning import (
    SubtractionEvent,
    entanglement_entropy,
    entanglement_sweep,
    fock_reduction_amplitude,
    subtract_photons,
    subtract_photons_tmsv,
    tmsv_entropy,
)
from cvteleport.numerics import (
    QuadratureGrid,
    associated_laguerre,
    gauss_legendre,
    log_factorial,
    oscillator_eigenfunction,
    oscillator_eigenfunctions,
)
from cvteleport.states import (
    DensityMatrix,
    SingleModeState,
    TwoModeState,
    coherent_state,
    mean_photon_number,
    norm_squared,
    normalize,
    odd_cat_state,
    two_mode_squeezed_vacuum,
)
from cvteleport.teleport import (
    ConvergenceError,
    HomodyneOutcome,
    KernelMatrix,
    averaged_density_matrix,
    averaged_fidelity,
    conditional_fidelity,
    kernel_B,
    kernel_C,
    kernel_D,
    outcome_probability_density,
    teleport_oracle,
    teleported_coefficients,
)

__version__ = "0.1.0"
