"""Fidelity metrics, gate-process evaluation and sweep result assembly."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .hilbert import DIM, LABEL_STRINGS, BasisLabel, basis_state

# superposition probes used (with the basis states) for the open-system
# average gate fidelity: |+/-> on each outer qubit and the (0,1)/(0,2)
# qutrit pairs
_SQ2 = np.sqrt(2.0)


def _probe_states():
    probes = []
    for sign in (1.0, -1.0):
        probes.append((basis_state("d0d") + sign * basis_state("u0d")) / _SQ2)
        probes.append((basis_state("d0d") + sign * basis_state("d0u")) / _SQ2)
        probes.append((basis_state("d0d") + sign * basis_state("d1d")) / _SQ2)
        probes.append((basis_state("d0d") + sign * basis_state("d2d")) / _SQ2)
    return probes


def state_fidelity(state, target: np.ndarray) -> float:
    """<target|rho|target> for a density matrix, |<target|psi>|^2 for a
    state vector."""
    state = np.asarray(state)
    target = np.asarray(target)
    if target.ndim != 1 or target.shape[0] != state.shape[0]:
        raise InvalidParameterError("dimension mismatch between state and target")
    if state.ndim == 1:
        return float(abs(np.vdot(target, state))**2)
    return float(np.real(np.vdot(target, state @ target)))


def leakage(state, computational_indices) -> float:
    """Population outside the given computational indices."""
    state = np.asarray(state)
    pops = np.abs(state)**2 if state.ndim == 1 else np.real(np.diag(state))
    keep = np.zeros(len(pops), bool)
    keep[list(computational_indices)] = True
    return float(pops[~keep].sum())


def process_fidelity(U_sim: np.ndarray, U_ideal: np.ndarray,
                     subspace=None) -> float:
    """|Tr(U_ideal' U_sim)|^2 / d^2 over the given subspace (all 12 states
    by default); insensitive to a global phase of either argument."""
    if subspace is not None:
        idx = np.asarray(list(subspace))
        U_sim = U_sim[np.ix_(idx, idx)]
        U_ideal = U_ideal[np.ix_(idx, idx)]
    d = U_sim.shape[0]
    dev = np.abs(U_sim @ U_sim.conj().T - np.eye(d)).max()
    if dev > 1e-2:
        raise InvalidParameterError(
            f"simulated propagator deviates from unitarity by {dev:.2e} "
            "on the comparison subspace")
    return float(abs(np.trace(U_ideal.conj().T @ U_sim))**2 / d**2)


def average_state_fidelity(apply_channel, U_ideal: np.ndarray) -> float:
    """Open-system gate figure: mean output fidelity over the 12 basis
    states and 8 fixed superposition probes.  apply_channel maps an input
    state vector to the final density matrix (or vector)."""
    inputs = [basis_state(i) for i in range(DIM)] + _probe_states()
    vals = []
    for psi in inputs:
        out = apply_channel(psi)
        vals.append(state_fidelity(out, U_ideal @ psi))
    return float(np.mean(vals))


@dataclass
class FidelityReport:
    state_fidelity: float | None = None
    process_fidelity: float | None = None
    leakage: float | None = None
    per_state: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "state_fidelity": self.state_fidelity,
            "process_fidelity": self.process_fidelity,
            "leakage": self.leakage,
            "per_state": self.per_state,
        }


@dataclass
class SweepResult:
    parameter: str
    values: list
    observables: list          # names, one series per observable
    results: dict              # name -> list of floats (None on failure)
    errors: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        lines = ["param,value,observable,result"]
        for name in self.observables:
            series = self.results[name]
            for v, r in zip(self.values, series):
                res = "nan" if r is None else f"{r:.9g}"
                lines.append(f"{self.parameter},{v:.9g},{name},{res}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def final_observable(trajectory, populations_row, name: str,
                     fidelity_value=None) -> float:
    """Extract one scalar from a finished run: p_<label> or fidelity."""
    if name == "fidelity":
        if fidelity_value is None:
            raise InvalidParameterError("run has no fidelity target")
        return float(fidelity_value)
    if name.startswith("p_"):
        idx = BasisLabel.from_string(name[2:]).index
        return float(populations_row[idx])
    raise InvalidParameterError(
        f"unknown observable {name!r}; expected 'fidelity' or 'p_<label>' "
        f"with label in {LABEL_STRINGS}")
