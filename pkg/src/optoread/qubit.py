"""Dispersive qubit-resonator physics and the high-power readout response.

Covers the intracavity photon number of the driven readout resonator, the
photon-number (AC Stark) shift of the qubit, textbook two-level trajectory
formulas (Rabi chevron, Ramsey, T1 decay), and a phenomenological model of
the high-power "demolition" readout: the resonator response snaps from its
dressed, qubit-state-dependent frequency to the bare frequency once the
intracavity photon number crosses a state-dependent critical value.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .device import DeviceParams
from .rng import SeedSpec, uniforms
from .units import HBAR, angular_to_hz


class QubitState(enum.Enum):
    GROUND = 0
    EXCITED = 1


@dataclass(frozen=True)
class DemolitionConfig:
    """Critical photon numbers of the bare-regime crossover, per qubit state.

    The resonator center frequency interpolates logistically in log photon
    number between the dressed and bare values. Defaults put the excited
    state fully in the bare regime at the optimal-readout intracavity photon
    number (~8.8e3) while the ground state is just reaching its crossover,
    which places the largest signal-voltage difference at the bare resonator
    frequency near the optimal readout power.
    """

    n_crit_ground: float = 8800.0
    n_crit_excited: float = 2200.0
    crossover_width: float = 0.1  # in ln(photon number)

    def __post_init__(self):
        if not (self.n_crit_ground > 0 and self.n_crit_excited > 0):
            raise ValueError("critical photon numbers must be > 0")
        if self.n_crit_ground == self.n_crit_excited:
            raise ValueError("critical photon numbers must differ between states")
        if not self.crossover_width > 0:
            raise ValueError("crossover width must be > 0")

    def n_crit(self, state: QubitState) -> float:
        return self.n_crit_excited if state is QubitState.EXCITED else self.n_crit_ground


@dataclass(frozen=True)
class SwitchingConfig:
    """Per-state probability of an uncontrolled state flip during readout."""

    p_flip_ground: float = 0.13
    p_flip_excited: float = 0.13

    def __post_init__(self):
        for p in (self.p_flip_ground, self.p_flip_excited):
            if not 0.0 <= p <= 1.0:
                raise ValueError("switch probabilities must lie in [0,1]")

    def p_flip(self, state: QubitState) -> float:
        return self.p_flip_excited if state is QubitState.EXCITED else self.p_flip_ground


NO_SWITCHING = SwitchingConfig(0.0, 0.0)


def intracavity_photons(dev: DeviceParams, p_in: float) -> float:
    """Steady-state photon number of the resonantly driven readout resonator.

    n = (4 / hbar omega_0) (kappa_ext / kappa_tot^2) P_in, with omega_0 the
    dressed resonator frequency.
    """
    if p_in < 0:
        raise ValueError("input power must be >= 0")
    q = dev.qubit
    return 4.0 / (HBAR * q.omega_r_dressed) * q.kappa_ree / q.kappa_re**2 * p_in


def stark_shift(n_bar: float, chi: float) -> float:
    """Qubit frequency shift (rad/s, magnitude) at photon number ``n_bar``.

    Delta = 2 * n_bar * chi. The qubit frequency moves down with increasing
    readout power; callers subtract the returned magnitude.
    """
    if n_bar < 0:
        raise ValueError("photon number must be >= 0")
    return 2.0 * n_bar * chi


def rabi_excited_prob(detuning: float, duration: float, rabi_rate: float) -> float:
    """Excited-state probability after a square drive of length ``duration``.

    P = Omega^2/(Omega^2+Delta^2) sin^2(sqrt(Omega^2+Delta^2) t / 2).
    """
    if duration < 0:
        raise ValueError("duration must be >= 0")
    if rabi_rate <= 0:
        raise ValueError("rabi rate must be > 0")
    omega_gen2 = rabi_rate**2 + detuning**2
    return rabi_rate**2 / omega_gen2 * math.sin(math.sqrt(omega_gen2) * duration / 2.0) ** 2


def ramsey_excited_prob(delay: float, detuning: float, t2_star: float,
                        phase: float = 0.0) -> float:
    """Ramsey fringe: P = [1 + exp(-delay/T2*) cos(detuning*delay + phase)] / 2."""
    if delay < 0:
        raise ValueError("delay must be >= 0")
    if t2_star <= 0:
        raise ValueError("t2_star must be > 0")
    return 0.5 * (1.0 + math.exp(-delay / t2_star) * math.cos(detuning * delay + phase))


def t1_excited_prob(delay: float, t1: float) -> float:
    """Longitudinal decay: P = exp(-delay/T1)."""
    if delay < 0:
        raise ValueError("delay must be >= 0")
    if t1 <= 0:
        raise ValueError("t1 must be > 0")
    return math.exp(-delay / t1)


def _resonator_center(dev: DeviceParams, demo: DemolitionConfig, n_bar,
                      state: QubitState):
    """State- and power-dependent resonator center frequency (rad/s).

    Dressed value is omega_r' + chi for the ground state and omega_r' - chi
    for the excited state; the bare value is omega_r. The logistic crossover
    runs in ln(n_bar).
    """
    q = dev.qubit
    sign = 1.0 if state is QubitState.GROUND else -1.0
    dressed = q.omega_r_dressed + sign * q.chi
    n_bar = np.asarray(n_bar, dtype=float)
    with np.errstate(divide="ignore"):
        x = (np.log(np.maximum(n_bar, 1e-300)) - math.log(demo.n_crit(state)))
    bare_fraction = np.where(n_bar > 0, 1.0 / (1.0 + np.exp(-x / demo.crossover_width)), 0.0)
    return dressed + (q.omega_r - dressed) * bare_fraction


def demolition_response(dev: DeviceParams, demo: DemolitionConfig, omega_probe,
                        p_in: float, state: QubitState):
    """Complex transmission of the side-coupled readout resonator.

    S(omega) = 1 - (kappa_ree/kappa_re) / (1 + 2i (omega - center)/kappa_re)
    with the center given by the demolition crossover. |S| ranges from
    kappa_rei/kappa_re on resonance to 1 far away.
    """
    q = dev.qubit
    n_bar = intracavity_photons(dev, p_in)
    center = _resonator_center(dev, demo, n_bar, state)
    omega_probe = np.asarray(omega_probe, dtype=float)
    s = np.asarray(1.0 - (q.kappa_ree / q.kappa_re)
                   / (1.0 + 2j * (omega_probe - center) / q.kappa_re))
    return complex(s) if s.ndim == 0 else s


def switching_outcome(state: QubitState, switching: SwitchingConfig,
                      seed: SeedSpec, index: int) -> QubitState:
    """Apply an uncontrolled state flip with the configured probability.

    Deterministic in (seed, index); uses draw slot 0 of the index.
    """
    u = uniforms(seed, index, 1, draws=1)[0, 0]
    if u < switching.p_flip(state):
        return QubitState.EXCITED if state is QubitState.GROUND else QubitState.GROUND
    return state


def switching_outcomes(states: np.ndarray, switching: SwitchingConfig,
                       seed: SeedSpec, start_index: int,
                       u_flip: np.ndarray | None = None) -> np.ndarray:
    """Vectorized switching for an array of 0/1 state labels.

    ``u_flip`` may supply the slot-0 uniforms for the index range so callers
    that already drew the per-shot block do not draw twice.
    """
    states = np.asarray(states, dtype=int)
    if u_flip is None:
        u_flip = uniforms(seed, start_index, len(states), draws=1)[:, 0]
    p = np.where(states == 1, switching.p_flip_excited, switching.p_flip_ground)
    return np.where(u_flip < p, 1 - states, states)


def _write_trajectory_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.12g}" for v in row])


def export_chevron_csv(path: str | Path, detunings, durations, rabi_rate: float):
    """Noiseless Rabi-chevron probabilities, columns detuning_hz, duration_s, p_excited."""
    rows = [(angular_to_hz(d), t, rabi_excited_prob(d, t, rabi_rate))
            for d in detunings for t in durations]
    _write_trajectory_csv(path, ["detuning_hz", "duration_s", "p_excited"], rows)


def export_ramsey_csv(path: str | Path, delays, detuning: float, t2_star: float,
                      phase: float = 0.0):
    """Noiseless Ramsey fringe, columns delay_s, p_excited."""
    rows = [(t, ramsey_excited_prob(t, detuning, t2_star, phase)) for t in delays]
    _write_trajectory_csv(path, ["delay_s", "p_excited"], rows)


def export_t1_csv(path: str | Path, delays, t1: float):
    """Noiseless T1 decay, columns delay_s, p_excited."""
    rows = [(t, t1_excited_prob(t, t1)) for t in delays]
    _write_trajectory_csv(path, ["delay_s", "p_excited"], rows)
