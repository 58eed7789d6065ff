"""Calibration pipelines: four-port VNA efficiency extraction, Stark-shift
line-attenuation calibration, and thermal-noise calibration.

Each procedure is a pure function designed to round-trip against synthetic
data generated from the corresponding forward model.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .device import DeviceParams
from .qubit import stark_shift
from .units import HBAR, dbm_to_watts, hz_to_angular


@dataclass(frozen=True)
class VnaRecord:
    """Scattering magnitudes of a four-port transduction measurement.

    ``two_alpha`` corrects for nonzero rejection of the unused optical
    sideband in the heterodyne demodulation (a measured scalar, distinct
    from the LO sideband power fraction in SetupParams).
    """

    s_eo: np.ndarray  # upconversion magnitude per frequency
    s_oe: np.ndarray  # downconversion magnitude
    s_ee: np.ndarray  # microwave reflection magnitude
    s_oo: np.ndarray  # optical reflection magnitude
    two_alpha: float = 1.3

    def __post_init__(self):
        if self.two_alpha <= 0:
            raise ValueError("two_alpha must be > 0")
        lengths = {np.size(self.s_eo), np.size(self.s_oe), np.size(self.s_ee), np.size(self.s_oo)}
        if len(lengths) != 1:
            raise ValueError("scattering records must have equal length")
        for name in ("s_eo", "s_oe", "s_ee", "s_oo"):
            if np.any(np.asarray(getattr(self, name)) < 0):
                raise ValueError(f"{name} magnitudes must be >= 0")


def vna_efficiency(rec: VnaRecord) -> np.ndarray:
    """Photon-number conversion efficiency from four-port scattering data.

    eta = two_alpha * |S_eo| |S_oe| / (|S_ee| |S_oo|). Points with zero
    reflection denominator are marked NaN instead of failing the record.
    """
    s_ee = np.asarray(rec.s_ee, dtype=float)
    s_oo = np.asarray(rec.s_oo, dtype=float)
    numerator = rec.two_alpha * np.asarray(rec.s_eo, dtype=float) * np.asarray(rec.s_oe, dtype=float)
    denominator = s_ee * s_oo
    with np.errstate(divide="ignore", invalid="ignore"):
        eta = np.where(denominator > 0, numerator / np.where(denominator > 0, denominator, 1.0), np.nan)
    return eta


def synthetic_vna_record(eta: np.ndarray, two_alpha: float = 1.3,
                         gain_e: float = 1.0, gain_o: float = 1.0) -> VnaRecord:
    """Forward model for round-trip tests: consistent S records for a known eta.

    Chain gains cancel in the four-port ratio, so arbitrary ``gain_e`` /
    ``gain_o`` leave the extracted efficiency unchanged.
    """
    eta = np.asarray(eta, dtype=float)
    s_ee = np.full_like(eta, gain_e)
    s_oo = np.full_like(eta, gain_o)
    cross = np.sqrt(eta / two_alpha * gain_e * gain_o)
    return VnaRecord(s_eo=cross, s_oe=cross, s_ee=s_ee, s_oo=s_oo, two_alpha=two_alpha)


@dataclass(frozen=True)
class StarkDataset:
    """Two-tone spectroscopy rows: room-temperature readout power vs qubit frequency."""

    powers_rt_w: np.ndarray  # strictly increasing, W
    qubit_freqs: np.ndarray  # rad/s

    def __post_init__(self):
        p = np.asarray(self.powers_rt_w, dtype=float)
        if p.size < 3:
            raise ValueError("need at least 3 rows")
        if np.any(np.diff(p) <= 0):
            raise ValueError("powers must be strictly increasing")
        if np.size(self.qubit_freqs) != p.size:
            raise ValueError("powers and frequencies must have equal length")


def load_stark_csv(path: str | Path) -> StarkDataset:
    """Read a Stark dataset CSV with columns power_dbm, qubit_freq_hz."""
    powers = []
    freqs = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(row for row in fh if not row.startswith("#"))
        if reader.fieldnames is None or set(reader.fieldnames) < {"power_dbm", "qubit_freq_hz"}:
            raise ValueError("stark CSV needs columns power_dbm, qubit_freq_hz")
        for row in reader:
            powers.append(dbm_to_watts(float(row["power_dbm"])))
            freqs.append(hz_to_angular(float(row["qubit_freq_hz"])))
    order = np.argsort(powers)
    return StarkDataset(powers_rt_w=np.asarray(powers)[order],
                        qubit_freqs=np.asarray(freqs)[order])


def photons_per_watt_at_input(dev: DeviceParams) -> float:
    """Intracavity photons per watt of on-resonance drive at the resonator input."""
    q = dev.qubit
    return 4.0 / (HBAR * q.omega_r_dressed) * q.kappa_ree / q.kappa_re**2


def stark_attenuation(dev: DeviceParams, ds: StarkDataset,
                      extra_offset_db: float = 0.0) -> tuple[float, float]:
    """Cryogenic line attenuation from the power-dependent qubit frequency.

    The qubit frequency shifts down by 2 chi per intracavity photon; a
    linear fit of frequency vs room-temperature power over the lowest-power
    half of the dataset (where the response is linear) yields photons per
    room-temperature watt and hence the attenuation. ``extra_offset_db``
    adds known insertion losses not captured by the Stark method itself.

    Returns (attenuation_db, standard_error_db).
    """
    n = ds.powers_rt_w.size
    half = max(3, (n + 1) // 2)
    p = np.asarray(ds.powers_rt_w[:half], dtype=float)
    f = np.asarray(ds.qubit_freqs[:half], dtype=float)
    coeffs, cov = np.polyfit(p, f, 1, cov=True)
    slope = float(coeffs[0])
    slope_sigma = float(math.sqrt(max(cov[0, 0], 0.0)))
    shift_per_photon = stark_shift(1.0, dev.qubit.chi)
    atten_linear = abs(slope) / (shift_per_photon * photons_per_watt_at_input(dev))
    if atten_linear <= 0 or not math.isfinite(atten_linear):
        raise ValueError("dataset slope does not yield a positive attenuation")
    attenuation_db = -10.0 * math.log10(atten_linear) + extra_offset_db
    sigma_db = 10.0 / math.log(10.0) * (slope_sigma / abs(slope)) if slope != 0 else math.inf
    return attenuation_db, sigma_db


def synthetic_stark_dataset(dev: DeviceParams, attenuation_db: float,
                            powers_rt_w: np.ndarray,
                            noise_fraction: float = 0.0,
                            noise_values: np.ndarray | None = None) -> StarkDataset:
    """Forward model for round-trip tests: frequencies under a known attenuation.

    Noise is multiplicative on the frequency shift: shift * (1 + fraction * eps)
    with eps standard-normal values supplied by the caller.
    """
    powers_rt_w = np.asarray(powers_rt_w, dtype=float)
    atten = 10.0 ** (-attenuation_db / 10.0)
    n_bar = photons_per_watt_at_input(dev) * atten * powers_rt_w
    shift = np.array([stark_shift(n, dev.qubit.chi) for n in n_bar])
    if noise_fraction and noise_values is not None:
        shift = shift * (1.0 + noise_fraction * np.asarray(noise_values))
    return StarkDataset(powers_rt_w=powers_rt_w, qubit_freqs=dev.qubit.omega_q - shift)


def thermal_calibration(tone_power_rt_dbm: float, attenuation_db: float,
                        snr_measured_db: float) -> float:
    """Thermal noise-equivalent power (dBm) from the calibration-tone chain.

    Input power = room-temperature tone minus line attenuation; the NEP sits
    ``snr_measured_db`` below the input power. Pure dB arithmetic.
    """
    for name, value in (("tone_power_rt_dbm", tone_power_rt_dbm),
                        ("attenuation_db", attenuation_db),
                        ("snr_measured_db", snr_measured_db)):
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite")
    return tone_power_rt_dbm - attenuation_db - snr_measured_db


def scale_thermal_noise(reference_nep_w: float, eta_ref: float,
                        eta_new: float) -> tuple[float, float]:
    """Input-referred thermal NEP at a new conversion efficiency.

    The measured output thermal noise power scales with the conversion
    efficiency, but referring it to the transducer input divides the same
    factor out, so the input-referred NEP is unchanged. Returns
    (input_referred_nep_w, output_power_scaling).
    """
    if eta_ref <= 0 or eta_new <= 0:
        raise ValueError("efficiencies must be > 0")
    return reference_nep_w, eta_new / eta_ref
