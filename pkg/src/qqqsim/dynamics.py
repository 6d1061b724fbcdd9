"""Time evolution under the spin model with microwave drives and dissipation.

The propagator works in the interaction picture of the static Hamiltonian:
with H0 = V E V', the state chi = e^{+iEt} V' psi obeys an equation whose
coefficients oscillate only at drive detunings (rotating-wave mode), so a
fixed-step RK4 integrator with a modest number of steps is accurate even
though the bare energy scale is tens of GHz.  Collapse operators are
expressed in the eigenbasis and grouped by transition frequency; each
group's interaction-picture phase is global and drops out of its
dissipator, making the dissipative generator time independent (a secular
approximation whose neglected cross terms rotate at MHz scales against
dissipation rates of order 1/T1 ~ 3e4 / s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .circuit_model import SpinModelParams
from .errors import InvalidParameterError, IntegrationError
from .hilbert import CHANNEL_RAISING, DIM, LABEL_STRINGS, LOWER_M01, LOWER_M12, \
    SM_L, SM_R, SZ_L, SZ_R, build_static_hamiltonian, _kron3, _I2

DEFAULT_T1 = 31e-6
DEFAULT_T2 = 35e-6

_GAUSS_CUT = 4.0                      # gaussian_truncated support is +-4 sigma
_GAUSS_FLOOR = math.exp(-0.5 * _GAUSS_CUT**2)


@dataclass(frozen=True)
class PulseEnvelope:
    """One drive pulse on a single channel.

    amplitude is the peak Rabi angular frequency in rad/s; times in
    seconds; carrier_freq in rad/s.  For gaussian shapes, center/sigma
    define the bell; the envelope is zero outside [t_start, t_stop].
    """

    channel: str
    shape: str
    amplitude: float
    t_start: float
    t_stop: float
    carrier_freq: float
    carrier_phase: float = 0.0
    center: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        if self.channel not in CHANNEL_RAISING:
            raise InvalidParameterError(
                f"unknown drive channel {self.channel!r}; "
                f"expected one of {sorted(CHANNEL_RAISING)}")
        if self.shape not in ("square", "gaussian", "gaussian_truncated"):
            raise InvalidParameterError(f"unknown pulse shape {self.shape!r}")
        if not self.t_start < self.t_stop:
            raise InvalidParameterError("pulse requires t_start < t_stop")
        if self.amplitude < 0:
            raise InvalidParameterError("pulse amplitude must be >= 0")
        if self.shape != "square" and self.sigma <= 0:
            raise InvalidParameterError("gaussian pulse requires sigma > 0")

    def envelope(self, t: float) -> float:
        """Instantaneous envelope amplitude in rad/s (zero outside support)."""
        if not self.t_start <= t <= self.t_stop:
            return 0.0
        if self.shape == "square":
            return self.amplitude
        x = (t - self.center) / self.sigma
        g = math.exp(-0.5 * x * x)
        if self.shape == "gaussian":
            return self.amplitude * g
        if abs(x) >= _GAUSS_CUT:
            return 0.0
        # shifted so the pulse starts and ends exactly at zero amplitude
        return self.amplitude * (g - _GAUSS_FLOOR) / (1.0 - _GAUSS_FLOOR)

    def area(self) -> float:
        """Integral of the envelope over its support (radians)."""
        from scipy.integrate import quad
        val, _ = quad(self.envelope, self.t_start, self.t_stop, limit=400)
        return val


def gaussian_truncated_area_factor() -> float:
    """Area of a unit-peak truncated gaussian divided by sigma."""
    from scipy.special import erf
    full = math.sqrt(2.0 * math.pi) * erf(_GAUSS_CUT / math.sqrt(2.0))
    return (full - 2.0 * _GAUSS_CUT * _GAUSS_FLOOR) / (1.0 - _GAUSS_FLOOR)


@dataclass(frozen=True)
class CollapseSet:
    """Relaxation (T1) and total dephasing (T2) times in seconds.

    Pure dephasing rate is 1/T_phi = 1/T2 - 1/(2 T1); T2 may not exceed
    2 T1.  Channels: sigma- relaxation and sigma_z dephasing on each outer
    qubit; |0><1| and sqrt(2)|1><2| ladder relaxation plus diag(0,1,2)
    dephasing on the qutrit.
    """

    T1: float = DEFAULT_T1
    T2: float = DEFAULT_T2

    def __post_init__(self):
        if self.T1 <= 0 or self.T2 <= 0:
            raise InvalidParameterError("T1 and T2 must be positive")
        if self.T2 > 2.0 * self.T1 * (1 + 1e-12):
            raise InvalidParameterError(
                f"T2 = {self.T2} exceeds 2*T1 = {2*self.T1}: negative pure-dephasing rate")

    @property
    def dephasing_rate(self) -> float:
        return max(1.0 / self.T2 - 1.0 / (2.0 * self.T1), 0.0)

    def operators(self) -> list[np.ndarray]:
        g1 = 1.0 / self.T1
        gphi = self.dephasing_rate
        nm = np.diag([0.0, 1.0, 2.0]).astype(complex)
        num_m = _kron3(_I2, nm, _I2)
        ops = [
            math.sqrt(g1) * SM_L,
            math.sqrt(g1) * SM_R,
            math.sqrt(g1) * LOWER_M01,
            math.sqrt(2.0 * g1) * LOWER_M12,
        ]
        if gphi > 0:
            ops += [
                math.sqrt(gphi / 2.0) * SZ_L,
                math.sqrt(gphi / 2.0) * SZ_R,
                math.sqrt(gphi / 2.0) * num_m,
            ]
        return ops


@dataclass(frozen=True)
class IntegratorOptions:
    """Propagation controls.

    carrier_mode "rwa" keeps only co-rotating drive terms; "cosine" keeps
    the full cos(wt) carrier.  Steps resolve the slowest retained drive
    frequency with points_per_period samples and, in cosine mode, the
    fastest counter-rotating frequency with points_per_fast_period.
    """

    carrier_mode: str = "rwa"
    points_per_period: int = 80
    points_per_fast_period: int = 32
    max_step: float = math.inf
    element_threshold: float = 0.02
    store_states: bool = False

    def __post_init__(self):
        if self.carrier_mode not in ("rwa", "cosine"):
            raise InvalidParameterError(f"unknown carrier mode {self.carrier_mode!r}")
        if self.points_per_period < 4 or self.points_per_fast_period < 4:
            raise InvalidParameterError("need at least 4 integration points per period")


@dataclass
class Trajectory:
    """Populations (and optionally states) on the output time grid.

    states, when stored, are in the model frame (the frame of the spin
    parameters); fidelity is filled in by the protocol runner.
    """

    times: np.ndarray
    populations: np.ndarray
    states: list | None = None
    fidelity: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def final_state(self):
        if self.states is None:
            raise InvalidParameterError("trajectory was run without store_states")
        return self.states[-1]


def expectation(state, observable: np.ndarray):
    """<O> for a state vector or density matrix; series for a Trajectory."""
    import warnings as _warnings
    if not np.allclose(observable, observable.conj().T, atol=1e-12):
        _warnings.warn("observable is not Hermitian; returning complex value",
                       stacklevel=2)
        hermitian = False
    else:
        hermitian = True

    def one(s):
        if s.ndim == 1:
            val = np.vdot(s, observable @ s)
        else:
            val = np.trace(observable @ s)
        return val.real if hermitian else val

    if isinstance(state, Trajectory):
        if state.states is None:
            raise InvalidParameterError("trajectory was run without store_states")
        return np.array([one(s) for s in state.states])
    return one(np.asarray(state))


def lindblad_rhs(rho: np.ndarray, H: np.ndarray, collapse: CollapseSet | None) -> np.ndarray:
    """d(rho)/dt of the master equation with the given collapse channels."""
    out = -1j * (H @ rho - rho @ H)
    if collapse is not None:
        for L in collapse.operators():
            Ld = L.conj().T
            LdL = Ld @ L
            out += L @ rho @ Ld - 0.5 * (LdL @ rho + rho @ LdL)
    return out


def _secular_collapse_groups(ops, V, energies, tol=1e3):
    """Collapse operators in the eigenbasis, split into fixed-frequency parts.

    Elements of V' L V are grouped by their transition frequency E_i - E_j
    (within tol rad/s); each group evolves with a single global phase in
    the interaction picture, so its dissipator is time independent.
    """
    groups = []
    for L in ops:
        B = V.conj().T @ L @ V
        idx = np.argwhere(np.abs(B) > 1e-14 * max(np.abs(B).max(), 1e-300))
        if idx.size == 0:
            continue
        freqs = np.array([energies[i] - energies[j] for i, j in idx])
        order = np.argsort(freqs)
        used = np.zeros(len(idx), bool)
        for oi in order:
            if used[oi]:
                continue
            members = np.abs(freqs - freqs[oi]) <= tol
            A = np.zeros((DIM, DIM), dtype=complex)
            for (i, j), m in zip(idx, members):
                if m:
                    A[i, j] = B[i, j]
            used |= members
            groups.append(A)
    return groups


class _Dissipator:
    """Time-independent secular dissipator in the eigenbasis."""

    def __init__(self, groups):
        self.A = np.array(groups) if groups else np.zeros((0, DIM, DIM), complex)
        self.Ad = self.A.conj().transpose(0, 2, 1).copy()
        self.M = 0.5 * np.einsum("kji,kjl->il", self.A.conj(), self.A) \
            if groups else np.zeros((DIM, DIM), complex)

    def __call__(self, chi):
        out = -(self.M @ chi + chi @ self.M)
        if len(self.A):
            out += np.matmul(np.matmul(self.A, chi), self.Ad).sum(axis=0)
        return out

    def superoperator(self):
        d = DIM
        ident = np.eye(d)
        S = -(np.kron(self.M, ident) + np.kron(ident, self.M.T))
        for A in self.A:
            S += np.kron(A, A.conj())
        return S


def _drive_matrix(pulses, Xs, t, mode):
    """Sum of channel raising operators weighted by envelope*carrier at t."""
    M = None
    for p, X in zip(pulses, Xs):
        env = p.envelope(t)
        if env == 0.0:
            continue
        ph = p.carrier_freq * t + p.carrier_phase
        w = 0.5 * env * complex(math.cos(ph), -math.sin(ph)) if mode == "rwa" \
            else env * math.cos(ph)
        M = w * X if M is None else M + w * X
    return M


def _select_step(pulses, Xs, energies, options, t_span):
    """Fixed RK4 step from the retained drive frequency content."""
    slow = 0.0
    fast = 0.0
    shortest = math.inf
    for p, X in zip(pulses, Xs):
        shortest = min(shortest, p.t_stop - p.t_start)
        mags = np.abs(X)
        thr = options.element_threshold * mags.max()
        ii, jj = np.nonzero(mags > thr)
        gaps = energies[ii] - energies[jj]
        slow = max(slow, float(np.abs(gaps - p.carrier_freq).max()), p.amplitude)
        if options.carrier_mode == "cosine":
            fast = max(fast, float(np.abs(gaps + p.carrier_freq).max()))
        if p.shape != "square":
            slow = max(slow, 2.0 / p.sigma)
    h = options.max_step
    if slow > 0:
        h = min(h, 2.0 * math.pi / (options.points_per_period * slow))
    if fast > 0:
        h = min(h, 2.0 * math.pi / (options.points_per_fast_period * fast))
    if shortest < math.inf:
        h = min(h, shortest / 200.0)
    if h <= 0 or (t_span > 0 and h < 1e-16 * t_span):
        raise IntegrationError(f"integration step underflow (h = {h:.3e} s)")
    return h


def _check_state(chi, density, where):
    if density:
        tr = float(np.trace(chi).real)
        if abs(tr - 1.0) > 1e-6:
            raise IntegrationError(f"trace drifted to {tr!r} at t = {where:.3e} s")
        if np.abs(chi - chi.conj().T).max() > 1e-8:
            raise IntegrationError(f"density matrix lost Hermiticity at t = {where:.3e} s")
        if np.linalg.eigvalsh((chi + chi.conj().T) / 2).min() < -1e-6:
            raise IntegrationError(f"density matrix lost positivity at t = {where:.3e} s")
    else:
        nrm = float(np.linalg.norm(chi))
        if abs(nrm - 1.0) > 1e-9:
            raise IntegrationError(f"state norm drifted to {nrm!r} at t = {where:.3e} s")


def propagate(initial, sp: SpinModelParams, schedule, collapse=None,
              t_grid=None, options: IntegratorOptions | None = None) -> Trajectory:
    """Evolve a state vector (collapse None) or density matrix on t_grid.

    Returns a Trajectory with populations at every grid time; the grid
    must be strictly increasing and starts the evolution at t_grid[0].
    """
    options = options or IntegratorOptions()
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 1:
        raise InvalidParameterError("t_grid must be a 1-d array of times")
    if len(t_grid) > 1 and not np.all(np.diff(t_grid) > 0):
        raise InvalidParameterError("t_grid must be strictly increasing")
    initial = np.asarray(initial, dtype=complex)
    density = collapse is not None or initial.ndim == 2
    if initial.ndim == 1 and density:
        initial = np.outer(initial, initial.conj())

    H0 = build_static_hamiltonian(sp)
    energies, V = np.linalg.eigh(H0)
    Vd = V.conj().T

    pulses = list(schedule)
    Xs = [Vd @ CHANNEL_RAISING[p.channel] @ V for p in pulses]

    diss = None
    if collapse is not None:
        diss = _Dissipator(_secular_collapse_groups(collapse.operators(), V, energies))

    # interaction-picture initial condition (phases are 1 at t_grid[0] by
    # measuring the phase clock from the first grid time)
    t0 = t_grid[0]
    chi = Vd @ initial @ V if density else Vd @ initial

    span = t_grid[-1] - t_grid[0]
    h = _select_step(pulses, Xs, energies, options, span) if pulses else math.inf

    edges = set()
    for p in pulses:
        for e in (p.t_start, p.t_stop):
            if t_grid[0] < e < t_grid[-1]:
                edges.add(e)
    checkpoints = np.unique(np.concatenate([t_grid, np.array(sorted(edges))])) \
        if edges else t_grid
    grid_set = {float(t) for t in t_grid}

    mode = options.carrier_mode

    def rhs(t, x):
        u = np.exp(1j * energies * (t - t0))
        M = _drive_matrix(pulses, Xs, t, mode)
        if M is None:
            Hd = None
        else:
            Hd = (u[:, None] * u.conj()[None, :]) * M
            Hd = Hd + Hd.conj().T
        if density:
            out = np.zeros_like(x) if Hd is None else -1j * (Hd @ x - x @ Hd)
            if diss is not None:
                out = out + diss(x)
            return out
        if Hd is None:
            return np.zeros_like(x)
        return -1j * (Hd @ x)

    free_cache = {}

    def free_dissipative_step(x, dt):
        key = round(dt, 18)
        if key not in free_cache:
            free_cache[key] = expm(diss.superoperator() * dt)
        return free_cache[key] @ x.reshape(-1)

    times_out = []
    pops_out = []
    states_out = [] if options.store_states else None

    def record(t, x):
        u = np.exp(-1j * energies * (t - t0))
        if density:
            rho = (V * u) @ x @ (V * u).conj().T
            pops = np.abs(np.diag(rho).real)
            state = rho
        else:
            psi = (V * u) @ x
            pops = np.abs(psi)**2
            state = psi
        times_out.append(t)
        pops_out.append(pops)
        if states_out is not None:
            states_out.append(state)

    _check_state(chi, density, t0)
    record(t0, chi)

    t = t0
    for tb in checkpoints[1:]:
        seg = tb - t
        active = any(p.t_start < tb and p.t_stop > t for p in pulses)
        if not active:
            if density and diss is not None:
                chi = free_dissipative_step(chi, seg).reshape(DIM, DIM)
            # closed system: chi is constant in the interaction picture
            t = tb
        else:
            n = max(1, int(math.ceil(seg / h)))
            dt = seg / n
            for k in range(n):
                tk = t + k * dt
                k1 = rhs(tk, chi)
                k2 = rhs(tk + dt / 2, chi + dt / 2 * k1)
                k3 = rhs(tk + dt / 2, chi + dt / 2 * k2)
                k4 = rhs(tk + dt, chi + dt * k3)
                chi = chi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t = tb
        if float(tb) in grid_set:
            _check_state(chi, density, tb)
            record(tb, chi)

    meta = {
        "carrier_mode": mode,
        "step_s": None if h == math.inf else h,
        "density": density,
        "n_pulses": len(pulses),
    }
    return Trajectory(times=np.array(times_out), populations=np.array(pops_out),
                      states=states_out, metadata=meta)


def trajectory_to_csv(traj: Trajectory, path) -> None:
    """Write `t_ns,p_d0d,...,p_u2u[,fidelity]` rows with 9 significant digits."""
    header = "t_ns," + ",".join("p_" + s for s in LABEL_STRINGS)
    with_fid = traj.fidelity is not None
    if with_fid:
        header += ",fidelity"
    lines = [header]
    for k, t in enumerate(traj.times):
        row = [f"{t * 1e9:.9g}"] + [f"{p:.9g}" for p in traj.populations[k]]
        if with_fid:
            row.append(f"{traj.fidelity[k]:.9g}")
        lines.append(",".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def rotating_frame_phases(sp: SpinModelParams, duration: float) -> np.ndarray:
    """Per-basis-state free phases exp(+i diag(H0) T) used to compare
    simulated evolution against ideal gates defined without trivial
    diagonal precession."""
    return np.exp(1j * np.diag(build_static_hamiltonian(sp)).real * duration)
