"""qqqsim: qubit-qutrit-qubit circuit simulator and parameter toolkit.

Derives effective spin-model parameters from superconducting circuit
element values and simulates pulse-level protocols (STIRAP, GHZ
preparation, CCZ/Toffoli, CSWAP, holonomic and Deutsch gates) with
optional dissipation.
"""

__version__ = "1.0.0"

from .circuit_model import (CircuitParams, SpinModelParams, derive_spin_model,
                            load_circuit_json)
from .dynamics import (CollapseSet, IntegratorOptions, PulseEnvelope,
                       Trajectory, propagate)
from .errors import (ConfigError, IntegrationError, InvalidParameterError,
                     QqqError)
from .hilbert import BasisLabel, basis_state, build_static_hamiltonian
from .protocols import Protocol, Segment
from .runner import run_config, run_protocol, sweep_config

__all__ = [
    "__version__",
    "CircuitParams", "SpinModelParams", "derive_spin_model", "load_circuit_json",
    "CollapseSet", "IntegratorOptions", "PulseEnvelope", "Trajectory", "propagate",
    "ConfigError", "IntegrationError", "InvalidParameterError", "QqqError",
    "BasisLabel", "basis_state", "build_static_hamiltonian",
    "Protocol", "Segment",
    "run_config", "run_protocol", "sweep_config",
]
