"""End-to-end detection-chain model: photon bookkeeping, noise budget, and
Monte-Carlo single-shot IQ generation for the microwave-only and optical
readout paths.

Added noise is expressed as an input-referred photon number at the
transducer microwave port. The heterodyne shot-noise term is
2 / (alpha * eta_c * eta_t); mechanical thermal noise enters through the
calibrated noise-equivalent power (efficiency-independent once referred to
the input); amplifier noise applies to the microwave path only; the
unexplained excess term is a configuration value passed through unchanged.
Single shots are the state-dependent resonator response scaled so the
cluster separation over the per-axis noise deviation equals the SNR, plus
circular Gaussian noise.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .device import DeviceParams, SetupParams
from .qubit import (DemolitionConfig, QubitState, SwitchingConfig,
                    demolition_response, switching_outcomes)
from .rng import SeedSpec, normal_pair, uniforms
from .transducer import PumpConfig, conversion_efficiency
from .units import HBAR, dbm_to_watts, watts_to_dbm


class ReadoutPath(enum.Enum):
    MICROWAVE_ONLY = "microwave_only"
    OPTICAL = "optical"


@dataclass(frozen=True)
class ChainConfig:
    """One readout configuration: pulse timing, drive powers, and noise knobs.

    ``omega_signal`` is the readout carrier (rad/s), normally the bare
    resonator frequency. ``eta_t_override`` pins the transduction efficiency
    at the signal frequency instead of evaluating the transducer model
    (used by measured-efficiency fixtures).
    """

    path: ReadoutPath
    readout_power_at_resonator: float  # W
    pulse_duration: float  # s
    integration_window: float  # s
    rest_time: float  # s
    pump: PumpConfig
    setup: SetupParams
    omega_signal: float  # rad/s
    excess_noise_photons: float = 0.0
    eta_t_override: float | None = None

    def __post_init__(self):
        if self.integration_window > self.pulse_duration:
            raise ValueError("integration window must not exceed pulse duration")
        if self.integration_window <= 0:
            raise ValueError("integration window must be > 0")
        if self.rest_time < 0:
            raise ValueError("rest time must be >= 0")
        if self.readout_power_at_resonator < 0:
            raise ValueError("readout power must be >= 0")
        if self.excess_noise_photons < 0:
            raise ValueError("excess noise photons must be >= 0")
        if self.omega_signal <= 0:
            raise ValueError("signal frequency must be > 0")


@dataclass(frozen=True)
class NoiseBudget:
    """Input-referred added-noise components, in photon-number units."""

    shot_photons: float
    thermal_photons: float
    amplifier_photons: float
    excess_photons: float
    total_photons: float
    total_dbm_per_hz: float

    def to_dict(self) -> dict:
        return {
            "shot_photons": self.shot_photons,
            "thermal_photons": self.thermal_photons,
            "amplifier_photons": self.amplifier_photons,
            "excess_photons": self.excess_photons,
            "total_photons": self.total_photons,
            "total_dbm_per_hz": self.total_dbm_per_hz,
        }


class IQShot(NamedTuple):
    """One demodulated single-shot outcome (arbitrary demodulation units)."""

    i: float
    q: float
    prepared: QubitState
    index: int


def added_shot_noise(alpha: float, eta_c: float, eta_t: float) -> float:
    """Heterodyne shot noise referred to the transducer microwave input.

    n_add = 2 / (alpha * eta_c * eta_t), with alpha the LO sideband factor,
    eta_c the optical collection efficiency and eta_t the transduction
    efficiency.
    """
    for name, value in (("alpha", alpha), ("eta_c", eta_c), ("eta_t", eta_t)):
        if not 0 < value <= 1:
            raise ValueError(f"{name} must lie in (0,1], got {value}")
    return 2.0 / (alpha * eta_c * eta_t)


def thermal_noise_equivalent_power(p_in: float, snr_measured: float) -> float:
    """Thermal NEP from a calibration tone: P_th = P_in / SNR (linear watts)."""
    if p_in <= 0 or snr_measured <= 0:
        raise ValueError("input power and SNR must be > 0")
    return p_in / snr_measured


def resolve_eta_t(dev: DeviceParams, cfg: ChainConfig) -> float:
    """Transduction efficiency at the signal frequency for this configuration."""
    if cfg.eta_t_override is not None:
        return cfg.eta_t_override
    return float(conversion_efficiency(dev, cfg.pump, cfg.omega_signal))


def noise_budget(dev: DeviceParams, cfg: ChainConfig, eta_t_at_signal: float) -> NoiseBudget:
    """Component-wise input-referred added noise for the configured path.

    The thermal term uses the calibrated NEP reference: the output thermal
    power scales with conversion efficiency but referring it back to the
    input divides that scaling out again, so the input-referred value is
    efficiency-independent (see calib.scale_thermal_noise).
    """
    if cfg.path is ReadoutPath.OPTICAL:
        shot = added_shot_noise(cfg.setup.sideband_alpha, cfg.setup.eta_od, eta_t_at_signal)
        nep_w = dbm_to_watts(dev.noise.thermal_nep_dbm)
        thermal = nep_w / (HBAR * cfg.omega_signal * dev.noise.thermal_bandwidth_hz)
        amplifier = 0.0
    else:
        shot = 0.0
        thermal = 0.0
        amplifier = cfg.setup.hemt_added_photons
    excess = cfg.excess_noise_photons
    total = shot + thermal + amplifier + excess
    total_dbm_per_hz = watts_to_dbm(total * HBAR * cfg.omega_signal)
    return NoiseBudget(shot_photons=shot, thermal_photons=thermal,
                       amplifier_photons=amplifier, excess_photons=excess,
                       total_photons=total, total_dbm_per_hz=total_dbm_per_hz)


def signal_photons(cfg: ChainConfig) -> float:
    """Photon number in the integration window: P * t_int / (hbar omega)."""
    return cfg.readout_power_at_resonator * cfg.integration_window / (HBAR * cfg.omega_signal)


def detected_signal_photons(cfg: ChainConfig, eta_t: float) -> float:
    """Optical-side detected signal photons: input photons * eta_t * eta_c."""
    return signal_photons(cfg) * eta_t * cfg.setup.eta_od


def snr(n_signal: float, n_added: float) -> float:
    """Amplitude signal-to-noise ratio sqrt(n_signal / n_added)."""
    if n_signal <= 0 or n_added <= 0:
        raise ValueError("photon numbers must be > 0")
    return math.sqrt(n_signal / n_added)


def duty_cycle_average_power(p_peak: float, t_on: float, t_period: float) -> tuple[float, float]:
    """(duty fraction, average power) of a pulsed drive."""
    if not 0 < t_on <= t_period:
        raise ValueError("need 0 < t_on <= t_period")
    duty = t_on / t_period
    return duty, duty * p_peak


def chain_snr(dev: DeviceParams, cfg: ChainConfig) -> tuple[float, NoiseBudget]:
    """SNR and budget for a configuration, resolving eta_t from the model."""
    eta_t = resolve_eta_t(dev, cfg)
    budget = noise_budget(dev, cfg, eta_t)
    return snr(signal_photons(cfg), budget.total_photons), budget


def generate_iq(mu0: complex, mu1: complex, n_shots: int, prepared: QubitState,
                seed: SeedSpec, switching: SwitchingConfig,
                start_index: int = 0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw IQ samples around state-dependent means with unit circular noise.

    Returns (i, q, measured_state) arrays. Deterministic in
    (seed, shot index); invariant under chunking of the index range.
    """
    u = uniforms(seed, start_index, n_shots, draws=3)
    states = np.full(n_shots, prepared.value, dtype=int)
    states = switching_outcomes(states, switching, seed, start_index, u_flip=u[:, 0])
    z_i, z_q = normal_pair(u[:, 1], u[:, 2])
    mu = np.where(states == 1, mu1, mu0)
    return mu.real + z_i, mu.imag + z_q, states


def shot_means(dev: DeviceParams, cfg: ChainConfig, demo: DemolitionConfig,
               snr_value: float) -> tuple[complex, complex]:
    """Mean IQ vectors for the two prepared states at the given SNR.

    Directions come from the complex demolition response of each state;
    the pair is scaled so |mu1 - mu0| equals snr (per-axis noise sigma = 1).
    """
    p_in = cfg.readout_power_at_resonator
    t0 = demolition_response(dev, demo, cfg.omega_signal, p_in, QubitState.GROUND)
    t1 = demolition_response(dev, demo, cfg.omega_signal, p_in, QubitState.EXCITED)
    diff = abs(t1 - t0)
    if diff == 0:
        return 0j, 0j
    scale = snr_value / diff
    return scale * t0, scale * t1


def generate_shots(dev: DeviceParams, cfg: ChainConfig, demo: DemolitionConfig,
                   n_shots: int, prepared: QubitState, seed: SeedSpec,
                   switching: SwitchingConfig = SwitchingConfig()) -> list[IQShot]:
    """Monte-Carlo single shots for one prepared state.

    Per shot: apply the switching outcome, take the measured state's
    demolition response, scale to the chain SNR, add circular Gaussian
    noise. Bit-reproducible for a fixed seed.
    """
    if n_shots <= 0:
        raise ValueError("n_shots must be > 0")
    snr_value, _ = chain_snr(dev, cfg)
    mu0, mu1 = shot_means(dev, cfg, demo, snr_value)
    i, q, _ = generate_iq(mu0, mu1, n_shots, prepared, seed, switching)
    return [IQShot(float(i[k]), float(q[k]), prepared, k) for k in range(n_shots)]


def shots_to_arrays(shots) -> tuple[np.ndarray, np.ndarray]:
    """(n, 2) IQ array and 0/1 prepared-state labels from IQShot sequences."""
    iq = np.array([(s.i, s.q) for s in shots], dtype=float)
    labels = np.array([s.prepared.value for s in shots], dtype=int)
    return iq, labels


def with_pump_power(cfg: ChainConfig, power_w: float) -> ChainConfig:
    """Copy of a configuration with a different optical pump power."""
    return replace(cfg, pump=PumpConfig(power_w, cfg.pump.detuning))
