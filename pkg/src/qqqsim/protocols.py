"""Pulse schedules for the gate and state-preparation protocols, plus the
closed-form oracles used to cross-check the numerical propagator.

Every builder returns a Protocol: a list of segments (timed evolutions
under some spin parameters, or instantaneous ideal unitaries), an initial
state, and optionally a target state and ideal unitary.  Targets and
ideal unitaries are defined in a frame that removes per-basis-state free
phases; each segment carries its frame energies (by default the diagonal
of its static Hamiltonian, overridden with carrier-ladder values for
protocols whose target phase is referenced to the drive).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import expm

from .circuit_model import SpinModelParams
from .dynamics import PulseEnvelope, gaussian_truncated_area_factor
from .errors import InvalidParameterError
from .hilbert import (BasisLabel, DIM, HADAMARD_RIGHT, basis_state,
                      build_static_hamiltonian)

TWO_PI = 2.0 * math.pi
SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------------------
# protocol containers

@dataclass(frozen=True)
class Segment:
    """A timed evolution interval under fixed spin parameters."""

    sp: SpinModelParams
    schedule: tuple
    duration: float
    frame: np.ndarray | None = None  # per-basis-state frame energies [rad/s]

    def frame_energies(self) -> np.ndarray:
        if self.frame is not None:
            return self.frame
        return np.diag(build_static_hamiltonian(self.sp)).real


@dataclass(frozen=True)
class InstantUnitary:
    """An idealized zero-duration operation (e.g. a software Hadamard)."""

    U: np.ndarray
    label: str = ""


@dataclass
class Protocol:
    kind: str
    segments: list
    initial: np.ndarray
    target: np.ndarray | None = None
    ideal_unitary: np.ndarray | None = None
    observables: tuple = ()
    notes: dict = field(default_factory=dict)
    # basis indices the ideal dynamics occupies; population elsewhere is
    # leakage, and process fidelity is evaluated on this subspace
    comp_indices: tuple | None = None

    def total_duration(self) -> float:
        return sum(s.duration for s in self.segments if isinstance(s, Segment))


# ---------------------------------------------------------------------------
# spectroscopy helpers

def _indices(*labels) -> tuple:
    return tuple(BasisLabel.from_string(s).index for s in labels)


COMPUTATIONAL_8 = tuple(i for i in range(DIM) if BasisLabel.from_index(i).qM != 1)
QUTRIT_ONE_BLOCK = tuple(i for i in range(DIM) if BasisLabel.from_index(i).qM == 1)


def _eigensystem(sp: SpinModelParams):
    H0 = build_static_hamiltonian(sp)
    energies, V = np.linalg.eigh(H0)
    return energies, V


def eigen_gap(sp: SpinModelParams, label_from, label_to) -> float:
    """Transition frequency between the eigenstates of largest overlap with
    two basis labels.  This is the resonant carrier frequency including
    dispersive shifts from the exchange couplings."""
    energies, V = _eigensystem(sp)
    ia = BasisLabel.from_string(label_from).index if isinstance(label_from, str) \
        else label_from
    ib = BasisLabel.from_string(label_to).index if isinstance(label_to, str) \
        else label_to
    ka = int(np.argmax(np.abs(V[ia, :])))
    kb = int(np.argmax(np.abs(V[ib, :])))
    if ka == kb:
        raise InvalidParameterError(
            f"states {label_from} and {label_to} map to the same eigenstate")
    for lab, k in ((label_from, ka), (label_to, kb)):
        if abs(V[:, k][BasisLabel.from_string(lab).index if isinstance(lab, str) else lab])**2 < 0.6:
            warnings.warn(f"basis state {lab} is strongly hybridized; carrier "
                          "assignment by overlap is unreliable", stacklevel=2)
    return float(energies[kb] - energies[ka])


def eigen_frame(sp: SpinModelParams) -> np.ndarray:
    """Per-basis-state free-evolution energies: each basis state is
    assigned the eigenenergy of its best-matching eigenstate (a one-to-one
    assignment maximizing total overlap).  For quasi-diagonal spectra this
    removes the dispersive shifts that diag(H0) misses; it is not
    meaningful inside resonantly hybridized blocks."""
    from scipy.optimize import linear_sum_assignment
    energies, V = _eigensystem(sp)
    rows, cols = linear_sum_assignment(-np.abs(V)**2)
    assigned = np.empty(DIM, dtype=int)
    assigned[rows] = cols
    frame = energies[assigned].copy()
    # a basis state split across two near-degenerate eigenstates precesses
    # at their mean energy, not at whichever one the assignment picked
    tol = TWO_PI * 5e6
    parent = list(range(DIM))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(DIM):
        for j in range(i + 1, DIM):
            hybridized = (abs(V[j, assigned[i]])**2 > 0.01
                          or abs(V[i, assigned[j]])**2 > 0.01)
            if hybridized and abs(frame[i] - frame[j]) < tol:
                parent[find(i)] = find(j)
    for root in set(find(i) for i in range(DIM)):
        members = [i for i in range(DIM) if find(i) == root]
        if len(members) > 1:
            frame[members] = np.mean(frame[members])
    return frame


def _qutrit_labels(sector: str) -> tuple[str, str, str]:
    """Basis labels of the qutrit ladder for fixed outer-qubit states,
    sector given as two characters like "dd" or "uu"."""
    lq, rq = sector[0], sector[1]
    return (lq + "0" + rq, lq + "1" + rq, lq + "2" + rq)


def qutrit_carriers(sp: SpinModelParams, sector: str) -> tuple[float, float]:
    """(omega01, omega12) carrier frequencies for the qutrit transitions
    with the outer qubits in the given sector (includes the conditional
    dispersive shifts, which is the selectivity mechanism of the gates)."""
    s0, s1, s2 = _qutrit_labels(sector)
    return eigen_gap(sp, s0, s1), eigen_gap(sp, s1, s2)


def _mean(a, b):
    return 0.5 * (a + b)


def _sym_j12(sp):
    return _mean(sp.J_LM12, sp.J_RM12)


def _carrier_ladder_frame(sp: SpinModelParams, sector: str,
                          w01: float, w12: float) -> np.ndarray:
    """Frame energies equal to diag(H0) except that, within the driven
    sector's qutrit ladder, levels 1 and 2 sit at carrier offsets above
    level 0.  Target-state phases are then referenced to the drive."""
    frame = eigen_frame(sp)
    s0, s1, s2 = _qutrit_labels(sector)
    i0 = BasisLabel.from_string(s0).index
    frame[BasisLabel.from_string(s1).index] = frame[i0] + w01
    frame[BasisLabel.from_string(s2).index] = frame[i0] + w01 + w12
    return frame


# ---------------------------------------------------------------------------
# STIRAP half passage

def stirap_half_schedule(sp: SpinModelParams, omega_peak: float,
                         sigma: float, delay: float) -> Protocol:
    """Two overlapping gaussian pulses in counter-intuitive order (the 1-2
    pulse first), both switched off abruptly at their crossing, leaving
    the qutrit in (|0> + |2>)/sqrt(2) with the outer qubits down."""
    if omega_peak <= 0 or sigma <= 0 or delay <= 0:
        raise InvalidParameterError("omega_peak, sigma and delay must be positive")
    w01, w12 = qutrit_carriers(sp, "dd")
    c2 = 4.0 * sigma
    c1 = c2 + delay
    t_cross = _mean(c1, c2)  # equal peaks and widths cross midway
    if t_cross <= c2:
        raise InvalidParameterError("pulse crossing precedes the first pulse center")
    # the 0-1 pulse carries phase pi so the dark state continuously maps
    # |0> onto +|2| rather than -|2>
    p12 = PulseEnvelope(channel="M12", shape="gaussian", amplitude=omega_peak,
                        t_start=0.0, t_stop=t_cross, carrier_freq=w12,
                        center=c2, sigma=sigma)
    p01 = PulseEnvelope(channel="M01", shape="gaussian", amplitude=omega_peak,
                        t_start=0.0, t_stop=t_cross, carrier_freq=w01,
                        carrier_phase=math.pi, center=c1, sigma=sigma)
    target = (basis_state("d0d") + basis_state("d2d")) / SQRT2
    frame = _carrier_ladder_frame(sp, "dd", w01, w12)
    seg = Segment(sp=sp, schedule=(p12, p01), duration=t_cross, frame=frame)
    return Protocol(kind="stirap_half", segments=[seg],
                    initial=basis_state("d0d"), target=target,
                    observables=("p_d0d", "p_d1d", "p_d2d", "fidelity"),
                    notes={"omega01": w01, "omega12": w12, "t_cross": t_cross},
                    comp_indices=_indices("d0d", "d2d"))


# ---------------------------------------------------------------------------
# two-photon dissociation of the qutrit double excitation

def _sector_energies(sp: SpinModelParams):
    return np.diag(build_static_hamiltonian(sp)).real


def dissociation_config(sp: SpinModelParams, t_max_factor: float = 4.0) -> Protocol:
    """Drive-free conversion |d2d> -> |u0u> via the two-photon resonance.

    deltaM is adjusted so that the energy of |d2d> matches |u0u> including
    the unequal second-order shifts from the off-resonant intermediate
    states; the evolution time is the first population maximum of |u0u>,
    found by a bounded scan.
    """
    d = _sector_energies(sp)
    ia, ib = BasisLabel.from_string("d2d").index, BasisLabel.from_string("u0u").index
    i1, i2 = BasisLabel.from_string("u1d").index, BasisLabel.from_string("d1u").index
    if abs(d[ia] - d[i1]) < 10 * abs(sp.J_LM12) or abs(d[ib] - d[i1]) < 10 * abs(sp.J_RM01):
        raise InvalidParameterError("intermediate states too close to resonance "
                                    "for a second-order dissociation treatment")

    adjusted = sp
    for _ in range(4):
        d = _sector_energies(adjusted)
        shift_a = (adjusted.J_LM12**2 / (d[ia] - d[i1])
                   + adjusted.J_RM12**2 / (d[ia] - d[i2]))
        shift_b = (adjusted.J_RM01**2 / (d[ib] - d[i1])
                   + adjusted.J_LM01**2 / (d[ib] - d[i2]))
        mismatch = (d[ia] + shift_a) - (d[ib] + shift_b)
        adjusted = replace(adjusted, deltaM=adjusted.deltaM - mismatch)

    # effective two-photon rate sets the scan window
    d = _sector_energies(adjusted)
    g_eff = abs(adjusted.J_LM12 * adjusted.J_RM01 / (d[ia] - d[i1])) \
        + abs(adjusted.J_RM12 * adjusted.J_LM01 / (d[ia] - d[i2]))
    if g_eff == 0:
        raise InvalidParameterError("vanishing two-photon coupling")

    energies, V = _eigensystem(adjusted)
    psi0 = V.conj().T @ basis_state("d2d")

    def p_transfer(t):
        amp = V[ib, :] @ (np.exp(-1j * energies * t) * psi0)
        return abs(amp)**2

    t_hi = t_max_factor * math.pi / g_eff
    grid = np.linspace(0.0, t_hi, 4001)
    vals = np.array([p_transfer(t) for t in grid])
    # smooth away the fast ripple at the intermediate-state detuning, then
    # take the earliest envelope maximum with near-complete transfer;
    # waiting for a marginally higher later revival only costs coherence
    w = 15
    kernel = np.ones(w) / w
    smooth = np.convolve(vals, kernel, mode="same")
    k = int(np.argmax(smooth))
    interior = np.nonzero((smooth[1:-1] > smooth[:-2]) & (smooth[1:-1] >= smooth[2:])
                          & (smooth[1:-1] >= 0.95))[0] + 1
    if interior.size:
        k = int(interior[0])
    lo = grid[max(k - w, 0)]
    hi = grid[min(k + w, len(grid) - 1)]
    # golden-section refinement of the maximum
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, dd_ = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = p_transfer(c), p_transfer(dd_)
    for _ in range(80):
        if fc > fd:
            b, dd_, fd = dd_, c, fc
            c = b - invphi * (b - a)
            fc = p_transfer(c)
        else:
            a, c, fc = c, dd_, fd
            dd_ = a + invphi * (b - a)
            fd = p_transfer(dd_)
    t_peak = _mean(a, b)

    # calibrate the frame of the destination state so the transferred
    # amplitude comes out real positive (fixes the Bell-state phase when
    # starting from a superposition with the spectator ground state)
    amp = V[ib, :] @ (np.exp(-1j * energies * t_peak) * psi0)
    frame = _sector_energies(adjusted).copy()
    chi = float(np.angle(amp * np.exp(1j * frame[ib] * t_peak)))
    frame[ib] -= chi / t_peak

    seg = Segment(sp=adjusted, schedule=(), duration=t_peak, frame=frame)
    return Protocol(kind="dissociation", segments=[seg],
                    initial=basis_state("d2d"), target=basis_state("u0u"),
                    observables=("p_d2d", "p_u0u", "p_u1d", "p_d1u", "fidelity"),
                    notes={"deltaM_shift": adjusted.deltaM - sp.deltaM,
                           "t_peak": t_peak, "g_eff": g_eff,
                           "p_peak_closed": p_transfer(t_peak)},
                    comp_indices=_indices("d2d", "u0u"))


# ---------------------------------------------------------------------------
# GHZ preparation

def ghz_pipulse_schedule(sp: SpinModelParams, omega1: float) -> Protocol:
    """Weak pi pulse resonant only with the both-qubits-up 0-1 transition,
    turning (|d0d> + |u0u>)/sqrt(2) into (|d0d> - i|u1u>)/sqrt(2)."""
    if omega1 <= 0:
        raise InvalidParameterError("omega1 must be positive")
    jz = abs(_mean(sp.Jz_LM, sp.Jz_RM))
    if jz > 0 and omega1 > jz / 3.0:
        warnings.warn("omega1 exceeds |Jz|/3: the pi pulse is not selective "
                      "on the both-up sector", stacklevel=2)
    w01, w12 = qutrit_carriers(sp, "uu")
    T = math.pi / omega1
    pulse = PulseEnvelope(channel="M01", shape="square", amplitude=omega1,
                          t_start=0.0, t_stop=T, carrier_freq=w01)
    initial = (basis_state("d0d") + basis_state("u0u")) / SQRT2
    target = (basis_state("d0d") - 1j * basis_state("u1u")) / SQRT2
    frame = _carrier_ladder_frame(sp, "uu", w01, w12)
    seg = Segment(sp=sp, schedule=(pulse,), duration=T, frame=frame)
    return Protocol(kind="ghz_pipulse", segments=[seg], initial=initial,
                    target=target,
                    observables=("p_d0d", "p_u0u", "p_u1u", "fidelity"),
                    notes={"carrier": w01},
                    comp_indices=_indices("d0d", "u0u", "u1u"))


def ghz_direct_condition(n: int, m: int, J01: float, D2: float = 1.0,
                         general: bool = False):
    """Zz coupling and evolution time putting equal weight on the stayed
    and transferred components of the exchange-block evolution.

    Simplified form (equal couplings, unit conditional shifts):
    Jz = 2 J / sqrt(4 n^2/m^2 - 1), t = n pi / lambda.  The general form
    returns D2*Jz = 2 sqrt(6) J01 / sqrt((n pi / c_n)^2 - 1) with
    c_n = arccos((-1)^(n+1)/8).
    """
    if n < 1 or int(n) != n:
        raise InvalidParameterError("n must be a positive integer")
    if general:
        c_n = math.acos((-1.0)**(n + 1) / 8.0)
        arg = (n * math.pi / c_n)**2 - 1.0
        jz = 2.0 * math.sqrt(6.0) * J01 / (D2 * math.sqrt(arg))
        lam = math.sqrt(4.0 * (math.sqrt(2.0) * J01)**2 + (D2 * jz)**2)
        return jz, n * math.pi / lam
    if m < 1 or m % 2 == 0:
        raise InvalidParameterError("m must be a positive odd integer")
    arg = 4.0 * n**2 / m**2 - 1.0
    if arg <= 0:
        raise InvalidParameterError(
            f"infeasible indices n={n}, m={m}: requires n > m/2")
    jz = 2.0 * J01 / math.sqrt(arg)
    lam = math.sqrt(4.0 * J01**2 + jz**2)
    return jz, n * math.pi / lam


def exchange_block_hamiltonian(J: float, Jz: float) -> np.ndarray:
    """4x4 Hamiltonian of the closed-form entangling analysis in the basis
    {|d2d>, |d1u>, |u1d>, |u0u>}: both end states sit 2*Jz below the
    intermediates and each end state couples to both intermediates with J."""
    return np.array([[-2 * Jz, J, J, 0],
                     [J, 0, 0, J],
                     [J, 0, 0, J],
                     [0, J, J, -2 * Jz]], dtype=complex)


def dissociation_analytics(J: float, Jz: float, t: float) -> tuple[float, float]:
    """Closed-form stay/transfer probabilities of the exchange block."""
    lam = math.sqrt(4.0 * J * J + Jz * Jz)
    cj, cl = math.cos(Jz * t), math.cos(lam * t)
    sj, sl = math.sin(Jz * t), math.sin(lam * t)
    r = Jz / lam if lam > 0 else 0.0
    p_stay = 0.25 * (cj + cl)**2 + 0.25 * (sj + r * sl)**2
    p_transfer = 0.25 * (cj - cl)**2 + 0.25 * (sj - r * sl)**2
    return p_stay, p_transfer


def ghz_direct_spin_model(J: float, Jz: float,
                          omega_ladder: float = TWO_PI * 5e9) -> SpinModelParams:
    """Symmetric spin parameters whose {d2d, d1u, u1d, u0u} sector realizes
    exchange_block_hamiltonian exactly: equal couplings, unit conditional
    shifts, and detunings retuned so both end states sit 2*Jz below the
    intermediates (DeltaL = DeltaR = deltaM = DeltaM - 2*Jz)."""
    return SpinModelParams(
        DeltaL=omega_ladder - 2 * Jz, DeltaM=omega_ladder,
        deltaM=omega_ladder - 2 * Jz, DeltaR=omega_ladder - 2 * Jz,
        J_LM01=J, J_RM01=J, J_LM12=J, J_RM12=J,
        Jz_LM=Jz, Jz_RM=Jz, D1=1.0, D2=1.0)


def ghz_direct_protocol(J: float, n: int = 1, m: int = 1) -> Protocol:
    """Drive-free evolution of |d2d> to an equal superposition with |u0u>
    at the closed-form condition."""
    jz, t = ghz_direct_condition(n, m, J)
    sp = ghz_direct_spin_model(J, jz)
    Hb = exchange_block_hamiltonian(J, jz)
    amps = expm(-1j * Hb * t)[:, 0]
    target = (amps[0] * basis_state("d2d") + amps[1] * basis_state("d1u")
              + amps[2] * basis_state("u1d") + amps[3] * basis_state("u0u"))
    idx0 = BasisLabel.from_string("d2d").index
    frame = np.full(DIM, _sector_energies(sp)[idx0])
    seg = Segment(sp=sp, schedule=(), duration=t, frame=frame)
    return Protocol(kind="ghz_direct", segments=[seg],
                    initial=basis_state("d2d"), target=target,
                    observables=("p_d2d", "p_u0u", "fidelity"),
                    notes={"Jz": jz, "t": t},
                    comp_indices=_indices("d2d", "d1u", "u1d", "u0u"))


# ---------------------------------------------------------------------------
# CCZ and Toffoli

def ideal_ccz() -> np.ndarray:
    U = np.eye(DIM, dtype=complex)
    i = BasisLabel.from_string("u0u").index
    U[i, i] = -1.0
    return U


def ccz_schedule(sp: SpinModelParams, omega1: float) -> Protocol:
    """Square 2*pi pulse resonant with the both-up 0-1 transition; |u0u>
    acquires a -1 while every other state is off resonance."""
    if omega1 <= 0:
        raise InvalidParameterError("omega1 must be positive")
    jz = abs(_mean(sp.Jz_LM, sp.Jz_RM))
    if jz > 0 and omega1 > jz / 3.0:
        warnings.warn("omega1 exceeds |Jz|/3: the conditional phase is not "
                      "selective on the both-up sector", stacklevel=2)
    w01, w12 = qutrit_carriers(sp, "uu")
    T = TWO_PI / omega1
    pulse = PulseEnvelope(channel="M01", shape="square", amplitude=omega1,
                          t_start=0.0, t_stop=T, carrier_freq=w01)
    initial = np.kron(
        np.kron(np.array([1, 1]) / SQRT2, np.array([1, 0, 0])),
        np.array([1, 1]) / SQRT2).astype(complex)
    target = ideal_ccz() @ initial
    seg = Segment(sp=sp, schedule=(pulse,), duration=T, frame=eigen_frame(sp))
    return Protocol(kind="ccz", segments=[seg], initial=initial, target=target,
                    ideal_unitary=ideal_ccz(),
                    observables=("p_u0u", "p_u0d", "p_d0u", "p_d0d", "fidelity"),
                    notes={"carrier": w01, "duration": T},
                    comp_indices=COMPUTATIONAL_8)


def toffoli(sp: SpinModelParams, omega1: float) -> Protocol:
    """CCNOT via Hadamard conjugation of the conditional phase: the right
    qubit flips when the left qubit is up and the qutrit is in |0>."""
    ccz = ccz_schedule(sp, omega1)
    segments = [InstantUnitary(HADAMARD_RIGHT, "hadamard_right"),
                *ccz.segments,
                InstantUnitary(HADAMARD_RIGHT, "hadamard_right")]
    ideal = HADAMARD_RIGHT @ ideal_ccz() @ HADAMARD_RIGHT
    initial = basis_state("u0d")
    return Protocol(kind="toffoli", segments=segments, initial=initial,
                    target=ideal @ initial, ideal_unitary=ideal,
                    observables=("p_u0d", "p_u0u", "fidelity"),
                    notes=ccz.notes, comp_indices=COMPUTATIONAL_8)


# ---------------------------------------------------------------------------
# CSWAP (controlled swap via the qutrit |1> manifold)

def cswap_block_propagator(J12: float, t: float) -> np.ndarray:
    """Closed-form propagator of the resonant 3-state exchange chain
    [[0,J,0],[J,0,J],[0,J,0]] in the basis {|u1d>, |d2d>, |d1u>}."""
    c = math.cos(SQRT2 * J12 * t)
    s = math.sin(SQRT2 * J12 * t)
    return np.array([
        [0.5 * (c + 1), -1j * s / SQRT2, 0.5 * (c - 1)],
        [-1j * s / SQRT2, c, -1j * s / SQRT2],
        [0.5 * (c - 1), -1j * s / SQRT2, 0.5 * (c + 1)],
    ], dtype=complex)


def cswap_stage1_schedule(sp: SpinModelParams) -> Protocol:
    """Drive-free resonant exchange for T = pi/(sqrt(2) J12): the outer
    qubits swap (with a -1) when the qutrit is in |1>, via |d2d>."""
    j12 = _sym_j12(sp)
    if j12 == 0:
        raise InvalidParameterError("stage 1 requires a nonzero 1-2 exchange coupling")
    d = _sector_energies(sp)
    det = abs(d[BasisLabel.from_string("d2d").index]
              - d[BasisLabel.from_string("u1d").index])
    if det > abs(j12) / 10.0:
        warnings.warn("exchange resonance violated by more than J12/10; "
                      "stage-1 swap will be imperfect", stacklevel=2)
    T = math.pi / (SQRT2 * abs(j12))
    # spectators precess at their eigen-shifted energies, but the two
    # resonantly hybridized exchange triples evolve about their common
    # bare energy (the splitting is the gate itself, not free evolution)
    frame = eigen_frame(sp)
    for triple in (("u1d", "d2d", "d1u"), ("u2d", "u1u", "d2u")):
        idx = [BasisLabel.from_string(s).index for s in triple]
        frame[idx] = np.mean(d[idx])
    seg = Segment(sp=sp, schedule=(), duration=T, frame=frame)
    return Protocol(kind="cswap_stage1", segments=[seg],
                    initial=basis_state("u1d"),
                    target=-basis_state("d1u"),
                    observables=("p_u1d", "p_d1u", "p_d2d", "fidelity"),
                    notes={"T": T, "J12": j12},
                    comp_indices=_indices("u1d", "d2d", "d1u"))


def ideal_cswap() -> np.ndarray:
    """The realized controlled swap: outer qubits exchanged when the qutrit
    is in |1>, with a -1 on the whole qutrit-|1> block (a qutrit-local
    phase left over from the two-stage construction)."""
    U = np.zeros((DIM, DIM), dtype=complex)
    for i in range(DIM):
        lb = BasisLabel.from_index(i)
        if lb.qM == 1:
            j = BasisLabel(qL=lb.qR, qM=1, qR=lb.qL).index
            U[j, i] = -1.0
        else:
            U[i, i] = 1.0
    return U


def bloch_state(theta: float, phi: float) -> np.ndarray:
    """Qubit state cos(theta/2)|down> + e^{i phi} sin(theta/2)|up>."""
    return np.array([math.cos(theta / 2.0),
                     complex(math.cos(phi), math.sin(phi)) * math.sin(theta / 2.0)])


def cswap_input_state(theta1, phi1, theta2, phi2) -> np.ndarray:
    """Product input with the qutrit in |1> (swap active)."""
    return np.kron(np.kron(bloch_state(theta1, phi1), np.array([0, 1, 0])),
                   bloch_state(theta2, phi2)).astype(complex)


def cswap_full(sp_stage1: SpinModelParams, sp_stage2: SpinModelParams,
               omega2: float, initial: np.ndarray | None = None) -> Protocol:
    """Two-stage controlled swap: resonant exchange, then a selective 2*pi
    pulse on the both-down 1-2 transition that fixes the sign of |d1d>."""
    stage1 = cswap_stage1_schedule(sp_stage1)
    if omega2 <= 0:
        raise InvalidParameterError("omega2 must be positive")
    jz2 = abs(_mean(sp_stage2.Jz_LM, sp_stage2.Jz_RM))
    shift = 2.0 * abs(sp_stage2.D2 - sp_stage2.D1) * jz2
    if shift > 0 and omega2 > shift / 3.0:
        warnings.warn("omega2 exceeds the conditional-shift selectivity margin "
                      "of the stage-2 pulse", stacklevel=2)
    w12 = eigen_gap(sp_stage2, "d1d", "d2d")
    T2 = TWO_PI / omega2
    pulse = PulseEnvelope(channel="M12", shape="square", amplitude=omega2,
                          t_start=0.0, t_stop=T2, carrier_freq=w12)
    seg2 = Segment(sp=sp_stage2, schedule=(pulse,), duration=T2,
                   frame=eigen_frame(sp_stage2))
    if initial is None:
        initial = cswap_input_state(math.pi / 4, 3 * math.pi / 4,
                                    3 * math.pi / 4, 3 * math.pi / 4)
    ideal = ideal_cswap()
    return Protocol(kind="cswap_full", segments=[*stage1.segments, seg2],
                    initial=initial, target=ideal @ initial,
                    ideal_unitary=ideal,
                    observables=("p_u1d", "p_d1u", "p_d1d", "p_u1u", "fidelity"),
                    notes={"T1": stage1.notes["T"], "T2": T2, "carrier2": w12},
                    comp_indices=QUTRIT_ONE_BLOCK)


# ---------------------------------------------------------------------------
# holonomic single-loop gate and the Deutsch composition

@dataclass(frozen=True)
class HolonomicParams:
    """Rotation parameters for the single-loop gate on (|0>, |2>).

    a = e^{i phi} sin(theta/2) and b = cos(theta/2) split a shared
    2*pi-area envelope between the 0-1 and 1-2 transitions; the peak
    amplitude is solved from tau (full truncated-gaussian support)."""

    theta: float
    phi: float
    tau: float

    def __post_init__(self):
        if self.tau <= 0:
            raise InvalidParameterError("tau must be positive")

    @property
    def a(self) -> complex:
        return complex(math.cos(self.phi), math.sin(self.phi)) * math.sin(self.theta / 2.0)

    @property
    def b(self) -> float:
        return math.cos(self.theta / 2.0)

    @property
    def sigma(self) -> float:
        return self.tau / 8.0  # support spans +-4 sigma

    @property
    def omega_peak(self) -> float:
        return TWO_PI / (self.sigma * gaussian_truncated_area_factor())


def holonomic_ideal(theta: float, phi: float) -> np.ndarray:
    """The single-loop rotation on (|0>, |2>): an involution mixing the two
    encoded states through the angle theta with azimuthal phase phi."""
    c, s = math.cos(theta), math.sin(theta)
    e = complex(math.cos(phi), math.sin(phi))
    return np.array([[c, e * s], [e.conjugate() * s, -c]], dtype=complex)


def _embed_qutrit_02(U2: np.ndarray, sector: str) -> np.ndarray:
    """Embed a 2x2 unitary on the (|0>, |2>) qutrit levels of one
    outer-qubit sector into the full space (identity elsewhere)."""
    s0, _, s2 = _qutrit_labels(sector)
    i0 = BasisLabel.from_string(s0).index
    i2 = BasisLabel.from_string(s2).index
    U = np.eye(DIM, dtype=complex)
    U[i0, i0] = U2[0, 0]
    U[i0, i2] = U2[0, 1]
    U[i2, i0] = U2[1, 0]
    U[i2, i2] = U2[1, 1]
    return U


def holonomic_schedule(hp: HolonomicParams, sp: SpinModelParams,
                       sector: str = "uu",
                       initial: np.ndarray | None = None) -> Protocol:
    """Simultaneous 2*pi-area gaussian pulses on the 0-1 and 1-2
    transitions of one outer-qubit sector, realizing holonomic_ideal on
    (|0>, |2>) of that sector.  With sector "uu" the carriers are shifted
    by the conditional coupling, so the rotation is doubly controlled."""
    w01, w12 = qutrit_carriers(sp, sector)
    sigma = hp.sigma
    center = hp.tau / 2.0
    amp = hp.omega_peak
    # the drive couples 0.5*Omega01*e^{-i phase01} into |1><0|, so putting
    # the bright state at (-a, b) on (|0>, |2>) requires phase01 = arg(-a);
    # the resulting loop is exactly holonomic_ideal on the encoded pair
    a_bright = -hp.a
    pulses = []
    if abs(a_bright) > 0:
        pulses.append(PulseEnvelope(
            channel="M01", shape="gaussian_truncated",
            amplitude=abs(a_bright) * amp, t_start=0.0, t_stop=hp.tau,
            carrier_freq=w01, carrier_phase=math.atan2(a_bright.imag, a_bright.real),
            center=center, sigma=sigma))
    if abs(hp.b) > 0:
        pulses.append(PulseEnvelope(
            channel="M12", shape="gaussian_truncated",
            amplitude=abs(hp.b) * amp, t_start=0.0, t_stop=hp.tau,
            carrier_freq=w12, carrier_phase=0.0 if hp.b >= 0 else math.pi,
            center=center, sigma=sigma))
    ideal = _embed_qutrit_02(holonomic_ideal(hp.theta, hp.phi), sector)
    s0, _, s2 = _qutrit_labels(sector)
    if initial is None:
        initial = basis_state(s0)
    frame = _carrier_ladder_frame(sp, sector, w01, w12)
    i0_c = BasisLabel.from_string(s0).index
    i2_c = BasisLabel.from_string(s2).index
    seg = Segment(sp=sp, schedule=tuple(pulses), duration=hp.tau, frame=frame)
    kind = "controlled_holonomic" if sector == "uu" else "holonomic"
    return Protocol(kind=kind, segments=[seg], initial=initial,
                    target=ideal @ initial, ideal_unitary=ideal,
                    observables=("p_" + s0, "p_" + s2, "fidelity"),
                    notes={"omega_peak": amp, "sigma": sigma,
                           "omega01": w01, "omega12": w12},
                    comp_indices=(i0_c, i2_c))


def deutsch_ideal(theta: float) -> np.ndarray:
    """Composition of the controlled rotations U(pi/2, theta) after
    U(0, 0): identity except an X-like rotation by theta between the
    encoded pair of the both-up sector."""
    c, s = math.cos(theta), math.sin(theta)
    return _embed_qutrit_02(np.array([[c, -1j * s], [-1j * s, c]], dtype=complex),
                            "uu")


def deutsch_compose(theta: float, sp: SpinModelParams, tau: float,
                    initial: np.ndarray | None = None) -> Protocol:
    """Two consecutive controlled holonomic loops realizing the
    doubly-controlled rotation by theta."""
    first = holonomic_schedule(HolonomicParams(theta=0.0, phi=0.0, tau=tau), sp,
                               sector="uu")
    second = holonomic_schedule(HolonomicParams(theta=theta, phi=math.pi / 2.0,
                                                tau=tau), sp, sector="uu")
    if initial is None:
        initial = basis_state("u0u")
    ideal = deutsch_ideal(theta)
    return Protocol(kind="deutsch", segments=[*first.segments, *second.segments],
                    initial=initial, target=ideal @ initial,
                    ideal_unitary=ideal,
                    observables=("p_u0u", "p_u2u", "fidelity"),
                    notes={**second.notes, "theta": theta},
                    comp_indices=_indices("u0u", "u2u"))
