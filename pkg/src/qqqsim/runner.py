"""Protocol execution: JSON config parsing, segment chaining, trajectory
assembly, fidelity reporting and parameter sweeps.

This is the layer shared by the command-line interface and the tests.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import protocols
from .analysis import (FidelityReport, SweepResult, final_observable, leakage,
                       process_fidelity, state_fidelity)
from .circuit_model import SpinModelParams
from .dynamics import (CollapseSet, IntegratorOptions, Trajectory, propagate)
from .errors import ConfigError, InvalidParameterError, QqqError
from .hilbert import DIM, LABEL_STRINGS, BasisLabel, basis_state
from .protocols import InstantUnitary, Protocol, Segment
from .units import ghz_to_rad, mhz_to_rad

PROTOCOL_KINDS = ("stirap_half", "dissociation", "ghz_pipulse", "ghz_direct",
                  "ccz", "toffoli", "cswap_stage1", "cswap_full", "holonomic",
                  "controlled_holonomic", "deutsch")

_CONFIG_KEYS = {"kind", "spin", "spin_stage2", "omega1_MHz", "omega2_MHz",
                "theta_rad", "phi_rad", "sigma_ns", "tau_ns", "delay_ns",
                "n", "m", "J_MHz", "collapse", "carrier_mode", "initial",
                "n_points"}

_DEFAULT_N_POINTS = 401


@dataclass
class RunResult:
    trajectory: Trajectory
    final_state: np.ndarray          # model frame
    final_state_rot: np.ndarray      # free phases removed
    protocol: Protocol
    report: FidelityReport | None = None
    config: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# config ingestion

def _load_json(path):
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc


def _spin_from_entry(entry, base_dir) -> SpinModelParams:
    if isinstance(entry, str):
        path = entry if os.path.isabs(entry) else os.path.join(base_dir, entry)
        entry = _load_json(path)
    if not isinstance(entry, dict):
        raise ConfigError("spin entry must be an object or a file path")
    return SpinModelParams.from_json_dict(entry)


def _initial_from_entry(entry) -> np.ndarray:
    if isinstance(entry, str):
        return basis_state(entry)
    if isinstance(entry, dict):
        psi = np.zeros(DIM, dtype=complex)
        for label, amp in entry.items():
            if not (isinstance(amp, list) and len(amp) == 2):
                raise ConfigError("initial-state amplitudes must be [re, im] pairs")
            psi[BasisLabel.from_string(label).index] = complex(amp[0], amp[1])
        nrm = np.linalg.norm(psi)
        if nrm < 1e-12:
            raise ConfigError("initial state has zero norm")
        return psi / nrm
    raise ConfigError("initial must be a basis label or a label->[re,im] map")


def parse_protocol_config(cfg: dict, base_dir: str = ".") -> tuple[Protocol, CollapseSet | None, IntegratorOptions, int]:
    """Build a Protocol plus run settings from a config dictionary."""
    if not isinstance(cfg, dict):
        raise ConfigError("protocol config must be a JSON object")
    unknown = sorted(set(cfg) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError("unknown config key(s): " + ", ".join(unknown))
    kind = cfg.get("kind")
    if kind not in PROTOCOL_KINDS:
        raise ConfigError(f"kind must be one of {PROTOCOL_KINDS}, got {kind!r}")

    def num(key, default=None, required=False):
        if key not in cfg:
            if required:
                raise ConfigError(f"{kind} config requires key {key!r}")
            return default
        v = cfg[key]
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ConfigError(f"config key {key!r} must be a number")
        return float(v)

    sp = None
    if "spin" in cfg:
        sp = _spin_from_entry(cfg["spin"], base_dir)
    elif kind != "ghz_direct":
        raise ConfigError(f"{kind} config requires a 'spin' entry")

    try:
        if kind == "stirap_half":
            proto = protocols.stirap_half_schedule(
                sp, omega_peak=mhz_to_rad(num("omega1_MHz", 20.0)),
                sigma=num("sigma_ns", 150.0) * 1e-9,
                delay=num("delay_ns", 180.0) * 1e-9)
        elif kind == "dissociation":
            proto = protocols.dissociation_config(sp)
        elif kind == "ghz_pipulse":
            proto = protocols.ghz_pipulse_schedule(sp, mhz_to_rad(num("omega1_MHz", 1.0)))
        elif kind == "ghz_direct":
            if "J_MHz" in cfg:
                J = mhz_to_rad(num("J_MHz"))
            elif sp is not None:
                J = abs(sp.J_LM01)
            else:
                raise ConfigError("ghz_direct requires 'J_MHz' or a 'spin' entry")
            proto = protocols.ghz_direct_protocol(J, n=int(num("n", 1)),
                                                  m=int(num("m", 1)))
        elif kind == "ccz":
            proto = protocols.ccz_schedule(sp, mhz_to_rad(num("omega1_MHz", 6.0)))
        elif kind == "toffoli":
            proto = protocols.toffoli(sp, mhz_to_rad(num("omega1_MHz", 6.0)))
        elif kind == "cswap_stage1":
            proto = protocols.cswap_stage1_schedule(sp)
        elif kind == "cswap_full":
            if "spin_stage2" not in cfg:
                raise ConfigError("cswap_full requires 'spin_stage2' (the retuned "
                                  "off-resonant parameters for the sign-fix pulse)")
            sp2 = _spin_from_entry(cfg["spin_stage2"], base_dir)
            proto = protocols.cswap_full(sp, sp2,
                                         omega2=mhz_to_rad(num("omega2_MHz", 10.0)))
        elif kind in ("holonomic", "controlled_holonomic"):
            hp = protocols.HolonomicParams(theta=num("theta_rad", 0.0),
                                           phi=num("phi_rad", 0.0),
                                           tau=num("tau_ns", 215.0) * 1e-9)
            sector = "uu" if kind == "controlled_holonomic" else "dd"
            proto = protocols.holonomic_schedule(hp, sp, sector=sector)
        elif kind == "deutsch":
            proto = protocols.deutsch_compose(num("theta_rad", 0.0), sp,
                                              tau=num("tau_ns", 215.0) * 1e-9)
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from exc

    if "initial" in cfg:
        psi0 = _initial_from_entry(cfg["initial"])
        proto.initial = psi0
        if proto.ideal_unitary is not None:
            proto.target = proto.ideal_unitary @ psi0
        elif proto.target is not None and kind not in ("stirap_half",):
            proto.target = None  # custom start invalidates the built-in target

    collapse = None
    if "collapse" in cfg and cfg["collapse"] is not None:
        c = cfg["collapse"]
        if not isinstance(c, dict) or set(c) - {"T1_us", "T2_us"}:
            raise ConfigError("collapse must be null or {T1_us, T2_us}")
        try:
            collapse = CollapseSet(T1=float(c.get("T1_us", 31.0)) * 1e-6,
                                   T2=float(c.get("T2_us", 35.0)) * 1e-6)
        except InvalidParameterError as exc:
            raise ConfigError(str(exc)) from exc

    mode = cfg.get("carrier_mode", "rwa")
    try:
        options = IntegratorOptions(carrier_mode=mode, store_states=True)
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from exc

    n_points = cfg.get("n_points", _DEFAULT_N_POINTS)
    if not isinstance(n_points, int) or n_points < 2:
        raise ConfigError("n_points must be an integer >= 2")
    return proto, collapse, options, n_points


# ---------------------------------------------------------------------------
# execution

def _grid_for(duration: float, n_points: int) -> np.ndarray:
    return np.linspace(0.0, duration, n_points)


def run_protocol(proto: Protocol, collapse=None, options=None,
                 n_points=_DEFAULT_N_POINTS, initial=None) -> RunResult:
    """Chain the protocol's segments, recording populations on a shared
    grid and the fidelity against the target in the free-phase-removed
    frame."""
    options = options or IntegratorOptions(store_states=True)
    if not options.store_states:
        raise InvalidParameterError("run_protocol requires store_states")
    state = np.asarray(proto.initial if initial is None else initial,
                       dtype=complex)
    total = proto.total_duration()
    timed = [s for s in proto.segments if isinstance(s, Segment)]
    n_min = 8
    times_all, pops_all, states_all, frames_all = [], [], [], []
    phases = np.zeros(DIM)
    t_offset = 0.0
    for seg in proto.segments:
        if isinstance(seg, InstantUnitary):
            D = np.exp(1j * phases)
            if state.ndim == 1:
                state = D.conj() * (seg.U @ (D * state))
            else:
                M = (D.conj()[:, None] * seg.U) * D[None, :]
                state = M @ state @ M.conj().T
            # refresh the last recorded sample so the jump is visible
            if times_all:
                pops = np.abs(state)**2 if state.ndim == 1 \
                    else np.real(np.diag(state))
                pops_all[-1] = pops
                states_all[-1] = state
            continue
        frac = seg.duration / total if total > 0 else 1.0
        n_pts = max(n_min, int(round(frac * n_points)))
        grid = _grid_for(seg.duration, n_pts)
        traj = propagate(state, seg.sp, seg.schedule, collapse, grid, options)
        frame = seg.frame_energies()
        start = 1 if times_all else 0
        for k in range(start, len(traj.times)):
            times_all.append(t_offset + traj.times[k])
            pops_all.append(traj.populations[k])
            states_all.append(traj.states[k])
            frames_all.append(phases + frame * traj.times[k])
        state = traj.states[-1]
        phases = phases + frame * seg.duration
        t_offset += seg.duration

    if not times_all:  # zero timed segments
        times_all = [0.0]
        pops_all = [np.abs(state)**2 if state.ndim == 1 else np.real(np.diag(state))]
        states_all = [state]
        frames_all = [phases.copy()]

    fidelity = None
    if proto.target is not None:
        fidelity = np.empty(len(times_all))
        for k, (s, ph) in enumerate(zip(states_all, frames_all)):
            D = np.exp(1j * ph)
            if s.ndim == 1:
                fidelity[k] = state_fidelity(D * s, proto.target)
            else:
                fidelity[k] = state_fidelity((D[:, None] * s) * D.conj()[None, :],
                                             proto.target)

    traj = Trajectory(times=np.array(times_all), populations=np.array(pops_all),
                      states=states_all, fidelity=fidelity,
                      metadata={"kind": proto.kind,
                                "carrier_mode": options.carrier_mode,
                                "n_segments": len(timed)})
    D = np.exp(1j * phases)
    final = states_all[-1]
    final_rot = D * final if final.ndim == 1 \
        else (D[:, None] * final) * D.conj()[None, :]
    return RunResult(trajectory=traj, final_state=final,
                     final_state_rot=final_rot, protocol=proto)


def simulated_unitary(proto: Protocol, options=None) -> np.ndarray:
    """Closed-system propagator of the protocol in the free-phase-removed
    frame, column by column over the basis states."""
    cols = []
    for i in range(DIM):
        res = run_protocol(proto, collapse=None, options=options, n_points=2,
                           initial=basis_state(i))
        cols.append(res.final_state_rot)
    return np.array(cols).T


def build_report(proto: Protocol, result: RunResult, collapse,
                 options=None) -> FidelityReport:
    rep = FidelityReport()
    if proto.target is not None:
        rep.state_fidelity = state_fidelity(result.final_state_rot, proto.target)
    if proto.ideal_unitary is not None and collapse is None:
        rep.process_fidelity = process_fidelity(simulated_unitary(proto, options),
                                                proto.ideal_unitary,
                                                subspace=proto.comp_indices)
    comp = list(proto.comp_indices) if proto.comp_indices is not None \
        else list(range(DIM))
    rep.leakage = leakage(result.final_state, comp)
    pops = result.trajectory.populations[-1]
    rep.per_state = {lbl: float(pops[k]) for k, lbl in enumerate(LABEL_STRINGS)}
    return rep


def run_config(cfg: dict, base_dir: str = ".", carrier_override=None,
               collapse_override="config", want_report=False) -> RunResult:
    proto, collapse, options, n_points = parse_protocol_config(cfg, base_dir)
    if carrier_override is not None:
        options = IntegratorOptions(carrier_mode=carrier_override,
                                    store_states=True)
    if collapse_override != "config":
        collapse = collapse_override
    result = run_protocol(proto, collapse, options, n_points)
    result.config = cfg
    if want_report:
        result.report = build_report(proto, result, collapse, options)
    return result


# ---------------------------------------------------------------------------
# sweeps

def parse_grid(text: str) -> np.ndarray:
    """Parse 'a:b:n' with endpoints as numbers or multiples of pi."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must be 'start:stop:count', got {text!r}")

    def endpoint(s):
        s = s.strip().lower()
        try:
            if s.endswith("pi"):
                head = s[:-2].rstrip("*").strip()
                return (float(head) if head else 1.0) * math.pi
            return float(s)
        except ValueError as exc:
            raise ConfigError(f"bad grid endpoint {s!r}") from exc

    a, b = endpoint(parts[0]), endpoint(parts[1])
    try:
        n = int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad grid count {parts[2]!r}") from exc
    if n < 1:
        raise ConfigError("grid count must be >= 1")
    return np.linspace(a, b, n) if n > 1 else np.array([a])


def addressable_params(cfg: dict) -> list[str]:
    numeric = [k for k in cfg if isinstance(cfg[k], (int, float))
               and not isinstance(cfg[k], bool)]
    extra = [k for k in ("omega1_MHz", "omega2_MHz", "theta_rad", "phi_rad",
                         "sigma_ns", "tau_ns", "delay_ns", "J_MHz")
             if k not in numeric]
    return sorted(numeric + extra)


def sweep_config(cfg: dict, parameter: str, grid, base_dir: str = ".") -> SweepResult:
    """One protocol run per grid value of the parameter; failures are
    recorded and the sweep continues."""
    if parameter not in _CONFIG_KEYS or parameter in ("kind", "spin",
                                                      "spin_stage2", "collapse",
                                                      "carrier_mode", "initial"):
        raise ConfigError(
            f"parameter {parameter!r} is not sweepable; addressable: "
            + ", ".join(addressable_params(cfg)))
    grid = np.asarray(grid, dtype=float)
    observables = None
    results = {}
    errors = {}
    for k, value in enumerate(grid):
        point = dict(cfg)
        point[parameter] = float(value)
        try:
            res = run_config(point, base_dir)
            proto = res.protocol
            if observables is None:
                observables = [o for o in proto.observables
                               if o != "fidelity" or proto.target is not None]
                results = {o: [] for o in observables}
            fid = res.trajectory.fidelity[-1] if res.trajectory.fidelity is not None else None
            for o in observables:
                results[o].append(final_observable(
                    res.trajectory, res.trajectory.populations[-1], o, fid))
        except QqqError as exc:
            errors[float(value)] = str(exc)
            if observables is not None:
                for o in observables:
                    results[o].append(None)
    if observables is None:
        observables = []
    return SweepResult(parameter=parameter, values=[float(v) for v in grid],
                       observables=observables, results=results, errors=errors)
