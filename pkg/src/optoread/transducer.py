"""Steady-state three-mode model of the piezo-optomechanical transducer.

The conversion chain microwave resonator <-> mechanics <-> optics is solved
in the frequency domain with one complex susceptibility per mode,

    chi_x^{-1} = kappa_x/2 - i (omega - omega_x),

electromechanical coupling fixed by the cooperativity ``c_em`` and
optomechanical coupling by ``c_om_per_watt * pump power``. The conversion
resonance is placed at the tabulated peak frequency ``omega_p`` (the
piezo-mechanical hybridization offset from the bare mechanical mode is
absorbed there), and the mechanical linewidth entering the spectral model
carries the calibrated ``width_scale`` factor. The photon-number conversion
efficiency of the chain is

    eta(omega) = |sqrt(kappa_ee * kappa_oe) g_em g_om chi_e chi_m chi_o / D|^2,
    D = 1 + g_em^2 chi_e chi_m + g_om^2 chi_m chi_o,

which reduces on resonance to eta_e eta_o 4 C_em C_om / (1 + C_em + C_om)^2.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .device import BackactionTable, DeviceParams
from .units import angular_to_hz


@dataclass(frozen=True)
class PumpConfig:
    """Optical pump drive: power and detuning from the optical resonance.

    ``detuning`` is the pump frequency minus the optical resonance (rad/s);
    red-detuned operation has detuning < 0. ``detuning=None`` selects the
    nominal red-detuned point, minus the mechanical resonance frequency.
    """

    power: float  # W
    detuning: float | None = None

    def __post_init__(self):
        if self.power < 0:
            raise ValueError("pump power must be >= 0")

    def resolved_detuning(self, dev: DeviceParams) -> float:
        if self.detuning is None:
            return -dev.transducer.omega_m
        offset = self.detuning + dev.transducer.omega_m
        if abs(offset) > 3 * dev.transducer.kappa_o:
            raise ValueError("pump detuning outside the supported red-detuned regime")
        return self.detuning


@dataclass(frozen=True)
class EfficiencySpectrum:
    """Conversion efficiency sampled on a signal-frequency grid."""

    frequencies: np.ndarray  # rad/s, ascending
    eta: np.ndarray
    pump: PumpConfig = field(repr=False, default=PumpConfig(0.0))

    def peak(self) -> tuple[float, float]:
        """(frequency rad/s, eta) of the maximum-efficiency point."""
        i = int(np.argmax(self.eta))
        return float(self.frequencies[i]), float(self.eta[i])

    def bandwidth_3db(self) -> float:
        """Full width (rad/s) of the band within 3 dB of the peak.

        Crossings are linearly interpolated between grid points.
        """
        eta = np.asarray(self.eta, dtype=float)
        freqs = np.asarray(self.frequencies, dtype=float)
        half = eta.max() / 2.0
        above = eta >= half
        idx = np.where(above)[0]
        if len(idx) == 0:
            return 0.0
        lo, hi = idx[0], idx[-1]
        f_lo = freqs[lo]
        if lo > 0:
            frac = (half - eta[lo - 1]) / (eta[lo] - eta[lo - 1])
            f_lo = freqs[lo - 1] + frac * (freqs[lo] - freqs[lo - 1])
        f_hi = freqs[hi]
        if hi < len(freqs) - 1:
            frac = (eta[hi] - half) / (eta[hi] - eta[hi + 1])
            f_hi = freqs[hi] + frac * (freqs[hi + 1] - freqs[hi])
        return float(f_hi - f_lo)


def optical_backaction(dev: DeviceParams, pump: PumpConfig,
                       extrapolate: bool = False) -> tuple[float, float]:
    """Pump-induced microwave-resonator change (frequency shift, extra loss).

    Interpolates the device back-action table at ``pump.power``. With
    ``extrapolate=False`` powers outside the table raise; otherwise the
    endpoints are held.
    """
    table: BackactionTable = dev.backaction
    powers = np.asarray(table.pump_powers_w)
    p = pump.power
    if not extrapolate and (p < powers[0] or p > powers[-1]):
        raise ValueError(
            f"pump power {p} W outside back-action table range "
            f"[{powers[0]}, {powers[-1]}] W")
    p = min(max(p, powers[0]), powers[-1])
    shift = float(np.interp(p, powers, np.asarray(table.freq_shift)))
    loss = float(np.interp(p, powers, np.asarray(table.extra_loss)))
    return shift, loss


def _chain_amplitude(dev: DeviceParams, pump: PumpConfig, omega_sig, delta_e,
                     backaction: bool):
    t = dev.transducer
    kappa_m_eff = t.kappa_m * t.width_scale
    kappa_e = t.kappa_e
    omega_e = t.omega_p + delta_e
    if backaction:
        shift, loss = optical_backaction(dev, pump, extrapolate=True)
        omega_e = omega_e + shift
        kappa_e = kappa_e + loss

    c_om = t.c_om_per_watt * pump.power
    g_em2 = t.c_em * t.kappa_e * kappa_m_eff / 4.0
    g_om2 = c_om * t.kappa_o * kappa_m_eff / 4.0

    omega_sig = np.asarray(omega_sig, dtype=float)
    # sideband detuning from the optical resonance, in the pump frame
    delta_opt = omega_sig + pump.resolved_detuning(dev)
    chi_e = 1.0 / (kappa_e / 2.0 - 1j * (omega_sig - omega_e))
    chi_m = 1.0 / (kappa_m_eff / 2.0 - 1j * (omega_sig - t.omega_p))
    chi_o = 1.0 / (t.kappa_o / 2.0 - 1j * delta_opt)
    denom = 1.0 + g_em2 * chi_e * chi_m + g_om2 * chi_m * chi_o
    amp = np.sqrt(t.kappa_ee * t.eta_o * t.kappa_o * g_em2 * g_om2)
    return amp * chi_e * chi_m * chi_o / denom


def conversion_efficiency(dev: DeviceParams, pump: PumpConfig, omega_sig,
                          delta_e: float = 0.0, backaction: bool = False):
    """Bidirectional photon-number conversion efficiency at ``omega_sig``.

    ``delta_e`` detunes the microwave resonator from the peak conversion
    frequency. Up- and down-conversion magnitudes of the linear chain are
    equal, so a single number covers both directions. Optical back-action
    on the microwave resonator is applied only when requested; the shipped
    calibration already reflects the operating pump.
    """
    if pump.power == 0.0:
        omega_sig = np.asarray(omega_sig, dtype=float)
        return float(0.0) if omega_sig.ndim == 0 else np.zeros_like(omega_sig)
    t = _chain_amplitude(dev, pump, omega_sig, delta_e, backaction)
    eta = np.abs(t) ** 2
    return float(eta) if eta.ndim == 0 else eta


def efficiency_spectrum(dev: DeviceParams, pump: PumpConfig, freq_grid,
                        delta_e: float = 0.0, backaction: bool = False) -> EfficiencySpectrum:
    """Pointwise conversion efficiency over an ascending frequency grid (rad/s)."""
    freq_grid = np.asarray(freq_grid, dtype=float)
    if freq_grid.size == 0:
        raise ValueError("frequency grid must not be empty")
    if np.any(np.diff(freq_grid) <= 0):
        raise ValueError("frequency grid must be sorted ascending")
    eta = conversion_efficiency(dev, pump, freq_grid, delta_e, backaction)
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    return EfficiencySpectrum(frequencies=freq_grid, eta=eta, pump=pump)


def coil_tuned_frequency(omega_0: float, tuning_coeff: float, current: float) -> float:
    """Microwave resonance under coil current: omega_0 - tuning_coeff * I^2."""
    return omega_0 - tuning_coeff * current**2


def write_spectrum_csv(spectrum: EfficiencySpectrum, path: str | Path):
    """Export a spectrum as CSV with columns frequency_hz, eta, eta_db."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frequency_hz", "eta", "eta_db"])
        for omega, eta in zip(spectrum.frequencies, spectrum.eta):
            eta_db = 10.0 * np.log10(eta) if eta > 0 else float("-inf")
            writer.writerow([f"{angular_to_hz(omega):.12g}", f"{eta:.12g}", f"{eta_db:.12g}"])
