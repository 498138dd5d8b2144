"""Holonomic gate engine for dressed trapped-ion qubits.

A qubit is encoded in the twofold-degenerate ground level of a resonant
atom-mode coupling; displacing and squeezing the mode around closed
loops enacts non-abelian holonomies on the code space.  The package
builds every object in that construction (connections, curvatures,
transported gates, the adiabatic limit, error sensitivities) and checks
each closed form against an independent numerical oracle.
"""

from .controlframe import (ControlPoint1Q, ControlPoint2Q, control_unitary,
                           displacement, squeeze, two_mode_displace,
                           two_mode_squeeze)
from .fock import FockOperator, FockSpace, annihilation, creation, \
    expm_antihermitian, pauli, tensor
from .geometry import (connection_analytic, connection_numeric,
                       curvature_analytic, curvature_numeric)
from .holonomy import (HolonomyResult, Loop, calibrate, closed_form_gate,
                       gate_distance, gate_sequence, sigma_area, transport)
from .jcmodel import (JCParams, dressed_state, jc_hamiltonian, logical_basis,
                      measurement_phase, measurement_pulse,
                      readout_probabilities)
from .resilience import ErrorModel, delta_sigma, monte_carlo_gate_error, \
    perturbed_loop, sensitivity_surface

__version__ = "0.1.0"

__all__ = [
    "ControlPoint1Q", "ControlPoint2Q", "ErrorModel", "FockOperator",
    "FockSpace", "HolonomyResult", "JCParams", "Loop", "annihilation",
    "calibrate", "closed_form_gate", "connection_analytic",
    "connection_numeric", "control_unitary", "creation", "curvature_analytic",
    "curvature_numeric", "delta_sigma", "displacement", "dressed_state",
    "expm_antihermitian", "gate_distance", "gate_sequence", "jc_hamiltonian",
    "logical_basis", "measurement_phase", "measurement_pulse",
    "monte_carlo_gate_error", "pauli", "perturbed_loop",
    "readout_probabilities", "sensitivity_surface", "sigma_area", "squeeze",
    "tensor", "transport", "two_mode_displace", "two_mode_squeeze",
]
