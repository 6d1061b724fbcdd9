"""Operators and states on the 12-dimensional qubit x qutrit x qubit space.

Basis ordering is left-qubit major, right-qubit minor:
index = qL*6 + qM*2 + qR with down = 0, up = 1 for the outer qubits and
qM in {0, 1, 2}.  String labels look like "d0d", "u2u".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit_model import SpinModelParams
from .errors import InvalidParameterError

DIM = 12

_QUBIT_CHARS = "du"
_QUTRIT_CHARS = "012"


@dataclass(frozen=True)
class BasisLabel:
    """One basis state of the composite system."""

    qL: int  # 0 = down, 1 = up
    qM: int  # 0, 1, 2
    qR: int

    def __post_init__(self):
        if self.qL not in (0, 1) or self.qR not in (0, 1) or self.qM not in (0, 1, 2):
            raise InvalidParameterError(f"invalid basis label ({self.qL},{self.qM},{self.qR})")

    @property
    def index(self) -> int:
        return self.qL * 6 + self.qM * 2 + self.qR

    def __str__(self) -> str:
        return _QUBIT_CHARS[self.qL] + _QUTRIT_CHARS[self.qM] + _QUBIT_CHARS[self.qR]

    @classmethod
    def from_index(cls, i: int) -> "BasisLabel":
        if not 0 <= i < DIM:
            raise InvalidParameterError(f"basis index {i} out of range")
        return cls(qL=i // 6, qM=(i % 6) // 2, qR=i % 2)

    @classmethod
    def from_string(cls, s: str) -> "BasisLabel":
        if len(s) != 3 or s[0] not in _QUBIT_CHARS or s[1] not in _QUTRIT_CHARS \
                or s[2] not in _QUBIT_CHARS:
            raise InvalidParameterError(f"invalid basis label string {s!r}")
        return cls(qL=_QUBIT_CHARS.index(s[0]), qM=_QUTRIT_CHARS.index(s[1]),
                   qR=_QUBIT_CHARS.index(s[2]))


ALL_LABELS = tuple(BasisLabel.from_index(i) for i in range(DIM))
LABEL_STRINGS = tuple(str(lb) for lb in ALL_LABELS)


def basis_state(label) -> np.ndarray:
    """Unit vector for a basis label (BasisLabel, index, or "u0d" string)."""
    if isinstance(label, str):
        label = BasisLabel.from_string(label)
    idx = label.index if isinstance(label, BasisLabel) else int(label)
    psi = np.zeros(DIM, dtype=complex)
    psi[idx] = 1.0
    return psi


def _kron3(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    return np.kron(np.kron(a, b), c)


_I2 = np.eye(2, dtype=complex)
_I3 = np.eye(3, dtype=complex)
_SZ = np.diag([-1.0, 1.0]).astype(complex)       # down = index 0 -> eigenvalue -1
_SM = np.array([[0, 1], [0, 0]], dtype=complex)  # lowering |down><up|
_SP = _SM.conj().T

_P1 = np.diag([0.0, 1.0, 0.0]).astype(complex)
_P2 = np.diag([0.0, 0.0, 1.0]).astype(complex)
_M01 = np.zeros((3, 3), dtype=complex); _M01[0, 1] = 1.0  # |0><1|
_M12 = np.zeros((3, 3), dtype=complex); _M12[1, 2] = 1.0  # |1><2|
_NUM3 = np.diag([0.0, 1.0, 2.0]).astype(complex)

# Full-space single-site operators.
SZ_L = _kron3(_SZ, _I3, _I2)
SZ_R = _kron3(_I2, _I3, _SZ)
SM_L = _kron3(_SM, _I3, _I2)
SM_R = _kron3(_I2, _I3, _SM)
P1_M = _kron3(_I2, _P1, _I2)
P2_M = _kron3(_I2, _P2, _I2)
LOWER_M01 = _kron3(_I2, _M01, _I2)   # |0><1| on the qutrit
LOWER_M12 = _kron3(_I2, _M12, _I2)   # |1><2| on the qutrit

EXCITATION_NUMBER = ((SZ_L + np.eye(DIM)) / 2.0 + _kron3(_I2, _NUM3, _I2)
                     + (SZ_R + np.eye(DIM)) / 2.0)

# Raising operator of each drive channel; envelope*carrier multiplies these
# and the Hermitian conjugate is added.
CHANNEL_RAISING = {
    "L": SM_L.conj().T,
    "R": SM_R.conj().T,
    "M01": LOWER_M01.conj().T,
    "M12": LOWER_M12.conj().T,
}


def build_static_hamiltonian(sp: SpinModelParams) -> np.ndarray:
    """Drive-free Hamiltonian in rad/s: Z energies, qutrit ladder energies,
    excitation-exchange couplings and the conditional-shift couplings."""
    H = (0.5 * sp.DeltaL * SZ_L
         + sp.DeltaM * P1_M
         + (sp.DeltaM + sp.deltaM) * P2_M
         + 0.5 * sp.DeltaR * SZ_R)
    exch = (sp.J_LM01 * SM_L @ LOWER_M01.conj().T
            + sp.J_RM01 * SM_R @ LOWER_M01.conj().T
            + sp.J_LM12 * SM_L @ LOWER_M12.conj().T
            + sp.J_RM12 * SM_R @ LOWER_M12.conj().T)
    H = H + exch + exch.conj().T
    cond = sp.D1 * P1_M + sp.D2 * P2_M
    H = H + sp.Jz_LM * SZ_L @ cond + sp.Jz_RM * SZ_R @ cond
    return H


_H_SINGLE = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)
HADAMARD_RIGHT = _kron3(_I2, _I3, _H_SINGLE)


def hadamard_right(state: np.ndarray) -> np.ndarray:
    """Instantaneous ideal Hadamard, (X+Z)/sqrt(2), on the right qubit."""
    if state.ndim == 1:
        return HADAMARD_RIGHT @ state
    return HADAMARD_RIGHT @ state @ HADAMARD_RIGHT.conj().T


def hadamard_basis_labels() -> tuple[str, str]:
    """Right-qubit Hadamard-basis names: |0_H> = (|d>+|u>)/sqrt(2), |1_H> = (|d>-|u>)/sqrt(2)."""
    return ("0_H", "1_H")
