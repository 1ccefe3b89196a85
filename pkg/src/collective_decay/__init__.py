"""Collective spontaneous emission and dipole-dipole shifts of multilevel atoms.

N atoms with a J=0 -> J=1 transition (three degenerate excited Zeeman states)
share a single excitation. The package builds the collective decay and
dispersive coupling matrices, checks the dispersive couplings obtained from
the full dipole Hamiltonian against the rotating-wave result with the
frequency integral extended to negative frequencies, and evolves the
amplitudes both with the effective Markovian generator and with an explicit
discretized-mode simulation.
"""

__version__ = "0.1.0"

from .couplings import (CouplingCoefficients, LambShift, Variant, coupling_b,
                        coupling_coefficients, coupling_g_closed, coupling_g_pv,
                        lamb_shift_regularized)
from .dynamics import (EffectiveGenerator, EigenmodeSet, TrajectoryResult, build_generator,
                       eigenmodes, evolve)
from .ensemble import ChannelIndex, Ensemble, channel, channel_from_flat, make_ensemble
from .errors import (CollectiveDecayError, ConvergenceError, DegenerateGeometry, DomainError,
                     FitError, NumericalError, ValidationError)
from .geometry import (AngularQuadrature, DyadicTensor, PolarizationFrame,
                       angular_average_projector, angular_transform_to_tau, gamma_dyadic,
                       polarization_frame, polarization_sum, product_quadrature, tau_dyadic)
from .microsim import ModeGrid, build_mode_grid, extract_rate_and_shift, microsim_run
from .pv import PVQuadratureSpec, pv_integral

__all__ = [
    "AngularQuadrature", "ChannelIndex", "CollectiveDecayError", "ConvergenceError",
    "CouplingCoefficients", "DegenerateGeometry", "DomainError", "DyadicTensor",
    "EffectiveGenerator", "EigenmodeSet", "Ensemble", "FitError", "LambShift", "ModeGrid",
    "NumericalError", "PVQuadratureSpec", "PolarizationFrame", "TrajectoryResult",
    "ValidationError", "Variant", "angular_average_projector", "angular_transform_to_tau",
    "build_generator", "build_mode_grid", "channel", "channel_from_flat", "coupling_b",
    "coupling_coefficients", "coupling_g_closed", "coupling_g_pv", "eigenmodes", "evolve",
    "extract_rate_and_shift", "gamma_dyadic", "lamb_shift_regularized", "make_ensemble",
    "microsim_run", "polarization_frame", "polarization_sum", "product_quadrature",
    "pv_integral", "tau_dyadic",
]
