"""Unit conventions and physical constants.

Internal convention: hbar = 1, all energies are angular frequencies in
rad/s.  Inductive energy scales enter as phi0^2/(L*hbar) and capacitances
as the reduced value C*phi0^2/hbar (units s/rad), with phi0 = Phi0/(2*pi)
the reduced flux quantum.  External fluxes are carried as phases,
2*pi*(Phi/Phi0).
"""

import math

from scipy import constants

TWO_PI = 2.0 * math.pi

# phi0^2 / hbar = hbar / (4 e^2), in SI (value ~1027.06).
PHI0_SQ_OVER_HBAR = constants.hbar / (4.0 * constants.e**2)


def ghz_to_rad(f_ghz: float) -> float:
    """Frequency in GHz (f = omega/2pi) to angular frequency in rad/s."""
    return TWO_PI * f_ghz * 1e9


def mhz_to_rad(f_mhz: float) -> float:
    return TWO_PI * f_mhz * 1e6


def rad_to_ghz(omega: float) -> float:
    return omega / TWO_PI / 1e9


def rad_to_mhz(omega: float) -> float:
    return omega / TWO_PI / 1e6


def inductive_scale(l_henry: float) -> float:
    """Reduced inductive energy phi0^2/(L*hbar) in rad/s."""
    return PHI0_SQ_OVER_HBAR / l_henry


def reduced_capacitance(c_farad: float) -> float:
    """Reduced capacitance C*phi0^2/hbar in s/rad."""
    return c_farad * PHI0_SQ_OVER_HBAR


def flux_phase(phi_over_phi0: float) -> float:
    """External flux in units of Phi0 to the phase entering the cosines."""
    return TWO_PI * phi_over_phi0
