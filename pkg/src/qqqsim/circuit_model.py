"""Circuit-element values to effective qubit-qutrit-qubit spin parameters.

The pipeline goes raw element values -> reduced units -> harmonic-mode
quantization constants -> bare middle-mode (qutrit) spectrum -> optional
drive-dressed qutrit -> the ten couplings/energies of the spin model.

All intermediate quantities live in the hbar = 1, rad/s convention of
:mod:`qqqsim.units`.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, replace

from .errors import (
    ConfigError,
    DegenerateDressingError,
    InvalidParameterError,
    NonTransmonRegimeError,
)
from .units import (
    flux_phase,
    ghz_to_rad,
    inductive_scale,
    mhz_to_rad,
    rad_to_ghz,
    rad_to_mhz,
    reduced_capacitance,
)

SQRT2 = math.sqrt(2.0)

CIRCUIT_JSON_KEYS = (
    "L1_nH", "Ltilde1_nH", "L2_nH", "Ltilde2_nH",
    "C1_fF", "C2_fF", "Cext_fF",
    "EJ1_GHz", "EJ2_GHz", "EJq1_GHz", "EJq2_GHz", "EJq3_GHz",
    "PhiSigma1_Phi0", "PhiSigma2_Phi0",
    "Aext_dimensionless", "omega_ext_GHz", "drive_on",
)


@dataclass(frozen=True)
class CircuitParams:
    """Raw circuit-element values.

    Inductances in nH, capacitances in fF, Josephson energies as
    frequencies E_J/2pi in GHz, fluxes in units of Phi0.  ``Aext`` is the
    dimensionless drive amplitude A_ext*(4*alpha2*Csigma)^(1/4);
    ``omega_ext_GHz`` is the drive frequency omega/2pi.
    """

    L1: float
    Ltilde1: float
    L2: float
    Ltilde2: float
    C1: float
    C2: float
    Cext: float
    EJ1: float
    EJ2: float
    EJq1: float
    EJq2: float
    EJq3: float
    PhiSigma1: float
    PhiSigma2: float
    Aext: float = 0.0
    omega_ext_GHz: float = 0.0
    drive_on: bool = False

    def __post_init__(self):
        for name in ("L1", "Ltilde1", "L2", "Ltilde2", "C1", "C2", "Cext",
                     "EJ1", "EJ2", "EJq1", "EJq2", "EJq3"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value!r}")
            if value <= 0:
                raise InvalidParameterError(f"{name} must be positive, got {value!r}")
        if self.drive_on and self.omega_ext_GHz <= 0:
            raise InvalidParameterError("omega_ext_GHz must be positive when drive_on")


@dataclass(frozen=True)
class ReducedCircuit:
    """Circuit parameters in the internal rad/s convention.

    ``ellX`` fields are the 1/(8L) coefficients restored to
    phi0^2/(8 L hbar); ``Ct*`` are reduced capacitances; fluxes are
    phases; Josephson energies are angular frequencies.
    """

    ell_L1: float
    ell_Lt1: float
    ell_L2: float
    ell_Lt2: float
    Ct1: float
    Ct2: float
    Ctext: float
    EJ1: float
    EJ2: float
    EJq1: float
    EJq2: float
    EJq3: float
    phi1: float
    phi2: float
    Aext: float
    omega_ext: float
    drive_on: bool


@dataclass(frozen=True)
class QuantizationConstants:
    """Harmonic/quartic coefficients of the three circuit modes.

    ``Tq1``/``Tq2``/``Text`` are the middle-mode harmonic spacing, quartic
    scale and drive coupling (renamed from the coherence-time-colliding
    T1/T2/T_ext notation).
    """

    alpha1: float
    alpha2: float
    alpha3: float
    beta1: float
    beta2: float
    beta3: float
    Ctilde1: float
    Ctilde2: float  # total middle-mode capacitance C1+C2+Cext, reduced
    Ctilde3: float
    Tq1: float
    Tq2: float
    Text: float
    reduced: ReducedCircuit


@dataclass(frozen=True)
class DrivenQutritModel:
    """Bare + drive-dressed middle-mode spectrum and matrix elements."""

    E0: float
    E1: float
    E2: float
    xi: float
    delta_det: float
    Delta_mix: float
    gamma: float
    k0: float
    k2: float
    C00: float
    C02: float
    C22: float
    D1: float
    D2: float
    Eprime0: float
    Eprime1: float
    Eprime2: float
    # mixing factors reused by the coupling formulas
    r01: float          # Delta / sqrt(Delta^2 + (delta/2 - gamma)^2), ->1 undriven
    r12: float          # (delta/2 + gamma) / (2*gamma), ->1 undriven


@dataclass(frozen=True)
class SpinModelParams:
    """The energies and couplings of the effective spin Hamiltonian (rad/s)."""

    DeltaL: float
    DeltaM: float
    deltaM: float
    DeltaR: float
    J_LM01: float
    J_RM01: float
    J_LM12: float
    J_RM12: float
    Jz_LM: float
    Jz_RM: float
    D1: float
    D2: float
    frame_omega: float = 0.0

    def to_json_dict(self) -> dict:
        return {
            "DeltaL_GHz": rad_to_ghz(self.DeltaL),
            "DeltaM_GHz": rad_to_ghz(self.DeltaM),
            "deltaM_GHz": rad_to_ghz(self.deltaM),
            "DeltaR_GHz": rad_to_ghz(self.DeltaR),
            "J_LM01_MHz": rad_to_mhz(self.J_LM01),
            "J_RM01_MHz": rad_to_mhz(self.J_RM01),
            "J_LM12_MHz": rad_to_mhz(self.J_LM12),
            "J_RM12_MHz": rad_to_mhz(self.J_RM12),
            "Jz_LM_MHz": rad_to_mhz(self.Jz_LM),
            "Jz_RM_MHz": rad_to_mhz(self.Jz_RM),
            "D1": self.D1,
            "D2": self.D2,
            "frame_GHz": rad_to_ghz(self.frame_omega),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SpinModelParams":
        try:
            return cls(
                DeltaL=ghz_to_rad(d["DeltaL_GHz"]),
                DeltaM=ghz_to_rad(d["DeltaM_GHz"]),
                deltaM=ghz_to_rad(d["deltaM_GHz"]),
                DeltaR=ghz_to_rad(d["DeltaR_GHz"]),
                J_LM01=mhz_to_rad(d["J_LM01_MHz"]),
                J_RM01=mhz_to_rad(d["J_RM01_MHz"]),
                J_LM12=mhz_to_rad(d["J_LM12_MHz"]),
                J_RM12=mhz_to_rad(d["J_RM12_MHz"]),
                Jz_LM=mhz_to_rad(d["Jz_LM_MHz"]),
                Jz_RM=mhz_to_rad(d["Jz_RM_MHz"]),
                D1=float(d["D1"]),
                D2=float(d["D2"]),
                frame_omega=ghz_to_rad(d.get("frame_GHz", 0.0)),
            )
        except KeyError as exc:
            raise ConfigError(f"spin-model JSON missing key {exc.args[0]!r}") from exc


def circuit_from_json_dict(d: dict) -> CircuitParams:
    missing = [k for k in CIRCUIT_JSON_KEYS if k not in d]
    if missing:
        raise ConfigError("circuit JSON missing key(s): " + ", ".join(missing))
    unknown = [k for k in d if k not in CIRCUIT_JSON_KEYS]
    if unknown:
        raise ConfigError("circuit JSON has unknown key(s): " + ", ".join(unknown))
    if not isinstance(d["drive_on"], bool):
        raise ConfigError("drive_on must be a JSON boolean")
    for k in CIRCUIT_JSON_KEYS[:-1]:
        if not isinstance(d[k], (int, float)) or isinstance(d[k], bool):
            raise ConfigError(f"circuit JSON key {k!r} must be a number")
    try:
        return CircuitParams(
            L1=d["L1_nH"], Ltilde1=d["Ltilde1_nH"],
            L2=d["L2_nH"], Ltilde2=d["Ltilde2_nH"],
            C1=d["C1_fF"], C2=d["C2_fF"], Cext=d["Cext_fF"],
            EJ1=d["EJ1_GHz"], EJ2=d["EJ2_GHz"],
            EJq1=d["EJq1_GHz"], EJq2=d["EJq2_GHz"], EJq3=d["EJq3_GHz"],
            PhiSigma1=d["PhiSigma1_Phi0"], PhiSigma2=d["PhiSigma2_Phi0"],
            Aext=d["Aext_dimensionless"], omega_ext_GHz=d["omega_ext_GHz"],
            drive_on=d["drive_on"],
        )
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from exc


def load_circuit_json(path) -> CircuitParams:
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return circuit_from_json_dict(d)


def to_reduced_units(cp: CircuitParams) -> ReducedCircuit:
    """Convert nH/fF/GHz/Phi0 inputs to the internal rad/s convention."""
    if not cp.drive_on and cp.Aext != 0.0:
        warnings.warn("drive_on is false; Aext is ignored", stacklevel=2)
    return ReducedCircuit(
        ell_L1=inductive_scale(cp.L1 * 1e-9) / 8.0,
        ell_Lt1=inductive_scale(cp.Ltilde1 * 1e-9) / 8.0,
        ell_L2=inductive_scale(cp.L2 * 1e-9) / 8.0,
        ell_Lt2=inductive_scale(cp.Ltilde2 * 1e-9) / 8.0,
        Ct1=reduced_capacitance(cp.C1 * 1e-15),
        Ct2=reduced_capacitance(cp.C2 * 1e-15),
        Ctext=reduced_capacitance(cp.Cext * 1e-15),
        EJ1=ghz_to_rad(cp.EJ1),
        EJ2=ghz_to_rad(cp.EJ2),
        EJq1=ghz_to_rad(cp.EJq1),
        EJq2=ghz_to_rad(cp.EJq2),
        EJq3=ghz_to_rad(cp.EJq3),
        phi1=flux_phase(cp.PhiSigma1),
        phi2=flux_phase(cp.PhiSigma2),
        Aext=cp.Aext if cp.drive_on else 0.0,
        omega_ext=ghz_to_rad(cp.omega_ext_GHz) if cp.drive_on else 0.0,
        drive_on=cp.drive_on,
    )


def quantization_constants(rp: ReducedCircuit) -> QuantizationConstants:
    """Mode stiffnesses, quartic scales and middle-mode drive coupling."""
    cos1 = math.cos(rp.phi1 / 2.0)
    cos2 = math.cos(rp.phi2 / 2.0)

    alpha1 = rp.ell_L1 + rp.ell_Lt1 + rp.EJq1 / 8.0 + rp.EJ1 / 4.0 * cos1
    beta1 = rp.EJq1 / 384.0 + rp.EJ1 / 192.0 * cos1
    alpha2 = (rp.ell_L1 + rp.ell_Lt1 + rp.ell_L2 + rp.ell_Lt2
              + rp.EJq2 / 2.0 + rp.EJ1 / 4.0 * cos1 + rp.EJ2 / 4.0 * cos2)
    beta2 = rp.EJq2 / 24.0 + (rp.EJ1 * cos1 + rp.EJ2 * cos2) / 192.0
    alpha3 = rp.ell_L2 + rp.ell_Lt2 + rp.EJq3 / 8.0 + rp.EJ2 / 4.0 * cos2

    beta3 = rp.EJq3 / 384.0 + rp.EJ2 / 192.0 * cos2

    for name, val in (("alpha1", alpha1), ("alpha2", alpha2), ("alpha3", alpha3)):
        if val <= 0:
            raise NonTransmonRegimeError(
                f"{name} = {val:.3e} rad/s <= 0: mode has no real harmonic frequency")

    Ct1 = rp.Ct1
    Ct3 = rp.Ct2
    Ct_sigma = rp.Ct1 + rp.Ct2 + rp.Ctext

    for name, a, b, c in (("mode 1", alpha1, beta1, Ct1),
                          ("mode 2", alpha2, beta2, Ct_sigma),
                          ("mode 3", alpha3, beta3, Ct3)):
        quartic = abs(b) / (4.0 * a * c)
        harmonic = math.sqrt(4.0 * a / c)
        if quartic > 0.1 * harmonic:
            warnings.warn(
                f"{name}: quartic scale is {quartic / harmonic:.1%} of the "
                "harmonic spacing; outside the transmon regime", stacklevel=2)

    Tq1 = math.sqrt(4.0 * alpha2 / Ct_sigma)
    Tq2 = beta2 / (4.0 * alpha2 * Ct_sigma)
    if rp.drive_on:
        Text = rp.Ctext * rp.Aext * rp.omega_ext / Ct_sigma
    else:
        Text = 0.0

    return QuantizationConstants(
        alpha1=alpha1, alpha2=alpha2, alpha3=alpha3,
        beta1=beta1, beta2=beta2, beta3=beta3,
        Ctilde1=Ct1, Ctilde2=Ct_sigma, Ctilde3=Ct3,
        Tq1=Tq1, Tq2=Tq2, Text=Text, reduced=rp)


def bare_qutrit_spectrum(q: QuantizationConstants) -> tuple[float, float, float]:
    """Eigenenergies of the truncated quartic middle mode."""
    if q.Tq1 <= 0:
        raise InvalidParameterError("Tq1 must be positive")
    s = q.Tq1 - 18.0 * q.Tq2
    root = math.sqrt(s * s + 72.0 * q.Tq2**2)
    return s - root, q.Tq1 - 12.0 * q.Tq2, s + root


def driven_qutrit_mixing(q: QuantizationConstants) -> DrivenQutritModel:
    """Dress the bare qutrit with the external drive (if any)."""
    E0, E1, E2 = bare_qutrit_spectrum(q)
    Tq2 = q.Tq2
    den0 = 72.0 * Tq2**2 + E0**2
    den2 = 72.0 * Tq2**2 + E2**2
    k0 = SQRT2 * (6.0 * Tq2 - E0) / math.sqrt(den0)
    k2 = -SQRT2 * (6.0 * Tq2 - E2) / math.sqrt(den2)
    C00 = 1.0 - 4.0 * E0 * (6.0 * Tq2 - E0) / den0
    C22 = 1.0 - 4.0 * E2 * (6.0 * Tq2 - E2) / den2
    C02 = (4.0 * E0 * E2 - 12.0 * Tq2 * (E0 + E2)) / math.sqrt(den0 * den2)

    xi = (E2 - E1) - (E1 - E0)
    omega_ext = q.reduced.omega_ext
    delta = E2 - E1 - omega_ext

    if q.Text == 0.0:
        # Undriven branch: primed states coincide with the bare ones; the
        # generic expressions below are 0/0 here.
        gamma = abs(delta) / 2.0
        if q.reduced.drive_on and delta < 0:
            warnings.warn("delta < 0: dressed labels would swap; treating as "
                          "undriven bare states", stacklevel=2)
        return DrivenQutritModel(
            E0=E0, E1=E1, E2=E2, xi=xi, delta_det=delta, Delta_mix=0.0,
            gamma=gamma, k0=k0, k2=k2, C00=C00, C02=C02, C22=C22,
            D1=3.0 - C00, D2=C22 - C00,
            Eprime0=xi - 1.5 * delta, Eprime1=-gamma, Eprime2=gamma,
            r01=1.0, r12=1.0)

    Delta = q.Text / 2.0 * SQRT2 * (E2 + 6.0 * Tq2) / math.sqrt(den2)
    if delta == 0.0 and Delta == 0.0:
        raise DegenerateDressingError("delta = 0 with zero drive mixing")
    if delta < 0:
        warnings.warn(
            "delta < 0 (drive above the bare 1-2 transition): dressed-state "
            "labels no longer match the bare ones", stacklevel=2)
    gap01 = E1 - E0 - omega_ext
    if gap01 != 0.0 and abs(delta) > abs(gap01) / 5.0:
        warnings.warn(
            "two-level dressing approximation marginal: |delta| is within a "
            "factor 5 of the 0-1 detuning", stacklevel=2)

    gamma = 0.5 * math.sqrt(delta**2 + 4.0 * Delta**2)
    # gamma - delta/2 via the cancellation-free identity
    # (gamma - delta/2)(gamma + delta/2) = Delta^2.
    gp = gamma + delta / 2.0
    gm = Delta**2 / gp if gp != 0.0 else gamma
    r01 = Delta / math.sqrt(Delta**2 + gm * gm)
    r12 = gp / (2.0 * gamma)
    D1 = (3.0 * Delta**2 + C22 * gm * gm) / (Delta**2 + gm * gm) - C00
    D2 = (3.0 * Delta**2 + C22 * gp * gp) / (Delta**2 + gp * gp) - C00

    return DrivenQutritModel(
        E0=E0, E1=E1, E2=E2, xi=xi, delta_det=delta, Delta_mix=Delta,
        gamma=gamma, k0=k0, k2=k2, C00=C00, C02=C02, C22=C22, D1=D1, D2=D2,
        Eprime0=xi - 1.5 * delta, Eprime1=-gamma, Eprime2=gamma,
        r01=r01, r12=r12)


def derive_spin_model(cp: CircuitParams) -> SpinModelParams:
    """Full pipeline: raw circuit values to spin-model parameters."""
    rp = to_reduced_units(cp)
    q = quantization_constants(rp)
    dq = driven_qutrit_mixing(q)

    cos1 = math.cos(rp.phi1 / 2.0)
    cos2 = math.cos(rp.phi2 / 2.0)
    prodL = q.alpha1 * q.alpha2 * q.Ctilde1 * q.Ctilde2
    prodR = q.alpha3 * q.alpha2 * q.Ctilde3 * q.Ctilde2
    gL = rp.EJ1 * cos1 / math.sqrt(prodL)
    gR = rp.EJ2 * cos2 / math.sqrt(prodR)
    omega_ext = rp.omega_ext

    DeltaL = (-3.0 * q.beta1 / (q.alpha1 * q.Ctilde1)
              + math.sqrt(4.0 * q.alpha1 / q.Ctilde1)
              - dq.C00 / 64.0 * gL - omega_ext)
    DeltaR = (-3.0 * q.beta3 / (q.alpha3 * q.Ctilde3)
              + math.sqrt(4.0 * q.alpha3 / q.Ctilde3)
              - dq.C00 / 64.0 * gR - omega_ext)
    DeltaM = (dq.Eprime1 - dq.Eprime0) - dq.D1 / 64.0 * (gL + gR)
    deltaM = (dq.Eprime2 - dq.Eprime1) - (dq.D2 - dq.D1) / 64.0 * (gL + gR)

    xL = rp.ell_L1 - rp.ell_Lt1
    xR = rp.ell_L2 - rp.ell_Lt2
    J_LM01 = xL * dq.k0 * dq.r01 / (2.0 * prodL**0.25)
    J_RM01 = xR * dq.k0 * dq.r01 / (2.0 * prodR**0.25)
    J_LM12 = xL * dq.k2 * dq.r12 / (2.0 * prodL**0.25)
    J_RM12 = xR * dq.k2 * dq.r12 / (2.0 * prodR**0.25)
    Jz_LM = -gL / 128.0
    Jz_RM = -gR / 128.0

    return SpinModelParams(
        DeltaL=DeltaL, DeltaM=DeltaM, deltaM=deltaM, DeltaR=DeltaR,
        J_LM01=J_LM01, J_RM01=J_RM01, J_LM12=J_LM12, J_RM12=J_RM12,
        Jz_LM=Jz_LM, Jz_RM=Jz_RM, D1=dq.D1, D2=dq.D2,
        frame_omega=omega_ext if rp.drive_on else 0.0)


def mirrored(cp: CircuitParams) -> CircuitParams:
    """Swap the left and right halves of the circuit."""
    return replace(
        cp, L1=cp.L2, L2=cp.L1, Ltilde1=cp.Ltilde2, Ltilde2=cp.Ltilde1,
        C1=cp.C2, C2=cp.C1, EJ1=cp.EJ2, EJ2=cp.EJ1,
        EJq1=cp.EJq3, EJq3=cp.EJq1,
        PhiSigma1=cp.PhiSigma2, PhiSigma2=cp.PhiSigma1)
