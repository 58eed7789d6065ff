"""Physical constants and unit conversions shared by all modules.

Conventions: frequencies are stored internally as angular frequency (rad/s);
user-facing I/O is in Hz. Powers are watts internally, dBm at interfaces.
Units are documented in names (``_hz``, ``_w``, ``_dbm``) rather than enforced
by a unit system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import scipy.constants

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhysConstants:
    """Fundamental constants used by the chain and calibration formulas."""

    hbar: float  # reduced Planck constant, J*s
    elementary_charge: float  # C

    def __post_init__(self):
        if not (self.hbar > 0 and self.elementary_charge > 0):
            raise ValueError("physical constants must be positive")


CODATA = PhysConstants(
    hbar=scipy.constants.hbar,
    elementary_charge=scipy.constants.e,
)

HBAR = CODATA.hbar


def dbm_to_watts(p_dbm: float) -> float:
    """Convert dBm to watts: 1e-3 * 10^(p/10)."""
    if not math.isfinite(p_dbm):
        raise ValueError(f"power must be finite, got {p_dbm}")
    return 1e-3 * 10.0 ** (p_dbm / 10.0)


def watts_to_dbm(p_w: float) -> float:
    """Convert watts to dBm; inverse of dbm_to_watts."""
    if not (math.isfinite(p_w) and p_w > 0):
        raise ValueError(f"power must be finite and positive, got {p_w}")
    return 10.0 * math.log10(p_w / 1e-3)


def db_to_ratio(db: float) -> float:
    """Convert decibels to a linear power ratio: 10^(db/10)."""
    if not math.isfinite(db):
        raise ValueError(f"value must be finite, got {db}")
    return 10.0 ** (db / 10.0)


def ratio_to_db(ratio: float) -> float:
    """Convert a linear power ratio to decibels; inverse of db_to_ratio."""
    if not (math.isfinite(ratio) and ratio > 0):
        raise ValueError(f"ratio must be finite and positive, got {ratio}")
    return 10.0 * math.log10(ratio)


def photon_flux(p_w: float, omega: float) -> float:
    """Photon flux (photons/s) of power ``p_w`` at angular frequency ``omega``.

    Divides the power by the photon energy hbar*omega.
    """
    if omega <= 0:
        raise ValueError(f"angular frequency must be positive, got {omega}")
    if p_w < 0:
        raise ValueError(f"power must be non-negative, got {p_w}")
    return p_w / (HBAR * omega)


def hz_to_angular(f_hz: float) -> float:
    """Linear frequency (Hz) to angular frequency (rad/s)."""
    return TWO_PI * f_hz


def angular_to_hz(omega: float) -> float:
    """Angular frequency (rad/s) to linear frequency (Hz)."""
    return omega / TWO_PI
