"""Conversions between the internal unit (the collective coupling g) and SI/μeV."""
import math

from scipy import constants

SPEED_OF_LIGHT = constants.c
# hbar in μeV·s
HBAR_UEV_S = constants.hbar / constants.e * 1e6


def collective_coupling(g_single, n_nodes):
    """g = g0 * sqrt(N)."""
    return g_single * math.sqrt(n_nodes)


def to_uev(value, g_uev):
    """Energy in units of g -> μeV."""
    return value * g_uev


def from_uev(value_uev, g_uev):
    return value_uev / g_uev


def fsr_angular(length_m):
    """Free spectral range c / 2L in s^-1 (treated as an angular frequency)."""
    if not length_m > 0:
        raise ValueError("cavity length must be > 0")
    return SPEED_OF_LIGHT / (2.0 * length_m)


def fsr_uev(length_m):
    """hbar * c / 2L in μeV."""
    return HBAR_UEV_S * fsr_angular(length_m)
