"""Scenario layer: composes the model modules into named experiments and
writes their underlying data.

A scenario is a JSON document selecting one or more runners (efficiency_map,
readout_map, single_shot, coherence_stats, chevron_and_ramsey), a device
file, a chain configuration, and per-runner sweep blocks. Every run writes
the fully resolved configuration next to its data so outputs are
self-describing, and all randomness is addressed through the scenario seed,
making re-runs byte-identical and independent of worker scheduling.
"""

from __future__ import annotations

import copy
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import stats

from .chain import (ChainConfig, ReadoutPath, chain_snr, duty_cycle_average_power,
                    generate_iq, noise_budget, resolve_eta_t, shot_means,
                    signal_photons, snr as snr_of)
from .device import DeviceParams, default_paper_device, load_device_params
from .estimate import (DecisionBoundary, fidelity_report, fit_damped_cosine,
                       fit_exponential, lda_boundary)
from .qubit import (DemolitionConfig, QubitState, SwitchingConfig,
                    demolition_response, rabi_excited_prob, ramsey_excited_prob,
                    switching_outcomes, t1_excited_prob)
from .rng import SeedSpec, normal_pair, uniforms
from .transducer import PumpConfig, conversion_efficiency, efficiency_spectrum
from .units import TWO_PI, angular_to_hz, dbm_to_watts, hz_to_angular

RUNNER_NAMES = ("efficiency_map", "readout_map", "single_shot",
                "coherence_stats", "chevron_and_ramsey")

DEFAULT_CONFIG: dict = {
    "name": "unnamed",
    "runs": [],
    "device_file": None,
    "seed": {"master_seed": 20240601, "stream_id": 0},
    "n_shots": 10000,
    "n_repeats": 401,
    "calibration_shots": 2000,
    "chain": {
        "path": "microwave_only",
        "readout_power_dbm": -105.8,
        "pulse_duration_s": 14e-6,
        "integration_window_s": 13.2e-6,
        "rest_time_s": 250e-6,
        "pump_power_w": 0.0,
        "pump_detuning_hz": None,
        "excess_noise_photons": None,
        "eta_t_override": None,
        "signal_frequency_hz": None,
    },
    "demolition": {
        "n_crit_ground": 8800.0,
        "n_crit_excited": 2200.0,
        "crossover_width": 0.1,
    },
    "switching": {"p_flip_ground": 0.13, "p_flip_excited": 0.13},
    "efficiency_map": {
        "enabled": True,
        "freq_span_hz": 30e6,
        "freq_points": 241,
        "detuning_min_hz": -25e6,
        "detuning_max_hz": 25e6,
        "detuning_points": 11,
    },
    "power_sweep": {
        "pump_powers_w": [],
        "freq_span_hz": 30e6,
        "freq_points": 241,
    },
    "readout_map": {
        "freq_min_hz": 5.1933e9,
        "freq_max_hz": 5.2001e9,
        "freq_points": 137,
        "power_min_dbm": -125.0,
        "power_max_dbm": -90.0,
        "power_points": 71,
    },
    "single_shot": {"enabled": True},
    "pump_sweep": {
        "pump_powers_w": [],
        "n_shots": 10000,
    },
    "coherence": {
        "quantities": ["t1", "t2_star"],
        "n_shots_per_point": 120,
        "t1_delay_max_s": 250e-6,
        "t1_delay_points": 30,
        "ramsey_delay_max_s": 25e-6,
        "ramsey_delay_points": 50,
        "ramsey_detuning_hz": 250e3,
        "pump_off": {"t1_s": None, "t2_star_s": None},
        "pump_on": {"t1_s": None, "t2_star_s": None},
    },
    "chevron": {
        "enabled": True,
        "detuning_span_hz": 4e6,
        "detuning_points": 41,
        "duration_max_s": 2.5e-6,
        "duration_points": 41,
        "rabi_rate_hz": 1e6,
        "n_shots_per_point": 200,
    },
    "ramsey": {
        "enabled": True,
        "delay_max_s": 20e-6,
        "delay_points": 81,
        "detuning_hz": 250e3,
        "phase_rad": 0.0,
        "n_shots_per_point": 200,
    },
}


class ScenarioError(ValueError):
    """Raised for malformed scenario files or overrides."""


@dataclass(frozen=True)
class Scenario:
    """A resolved scenario: name, requested runners, full configuration."""

    name: str
    runs: tuple
    config: dict

    def seed(self) -> SeedSpec:
        s = self.config["seed"]
        return SeedSpec(int(s["master_seed"]), int(s["stream_id"]))

    def device(self) -> DeviceParams:
        path = self.config.get("device_file")
        return load_device_params(path) if path else default_paper_device()

    def demolition(self) -> DemolitionConfig:
        d = self.config["demolition"]
        return DemolitionConfig(n_crit_ground=d["n_crit_ground"],
                                n_crit_excited=d["n_crit_excited"],
                                crossover_width=d["crossover_width"])

    def switching(self) -> SwitchingConfig:
        s = self.config["switching"]
        return SwitchingConfig(p_flip_ground=s["p_flip_ground"],
                               p_flip_excited=s["p_flip_excited"])

    def chain_config(self, dev: DeviceParams) -> ChainConfig:
        c = self.config["chain"]
        path = ReadoutPath(c["path"])
        omega_signal = (hz_to_angular(c["signal_frequency_hz"])
                        if c["signal_frequency_hz"] else dev.qubit.omega_r)
        excess = c["excess_noise_photons"]
        if excess is None:
            excess = dev.noise.excess_photons_ref if path is ReadoutPath.OPTICAL else 0.0
        detuning = c["pump_detuning_hz"]
        pump = PumpConfig(c["pump_power_w"],
                          hz_to_angular(detuning) if detuning is not None else None)
        return ChainConfig(
            path=path,
            readout_power_at_resonator=dbm_to_watts(c["readout_power_dbm"]),
            pulse_duration=c["pulse_duration_s"],
            integration_window=c["integration_window_s"],
            rest_time=c["rest_time_s"],
            pump=pump,
            setup=dev.setup,
            omega_signal=omega_signal,
            excess_noise_photons=excess,
            eta_t_override=c["eta_t_override"],
        )


def _merge_defaults(defaults: dict, overrides: dict, path: str = "") -> dict:
    merged = copy.deepcopy(defaults)
    for key, value in overrides.items():
        where = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ScenarioError(f"unknown scenario key: {where}")
        if isinstance(defaults[key], dict) and isinstance(value, dict):
            merged[key] = _merge_defaults(defaults[key], value, where)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def scenario_dir() -> Path:
    return Path(resources.files("optoread").joinpath("data/scenarios"))


def list_scenarios() -> list[str]:
    """Names of the scenarios shipped with the package."""
    return sorted(p.stem for p in scenario_dir().glob("*.json"))


def load_scenario(name_or_path: str, overrides: dict | None = None) -> Scenario:
    """Load a scenario by packaged name or file path and resolve defaults."""
    path = Path(name_or_path)
    if not path.exists():
        candidate = scenario_dir() / f"{name_or_path}.json"
        if not candidate.exists():
            raise ScenarioError(f"unknown scenario: {name_or_path}")
        path = candidate
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file {path} is not valid JSON: {exc}") from exc
    if overrides:
        raw = _apply_overrides(raw, overrides)
    config = _merge_defaults(DEFAULT_CONFIG, raw)
    runs = tuple(config["runs"])
    for run in runs:
        if run not in RUNNER_NAMES:
            raise ScenarioError(f"unknown runner: {run}")
    if not runs:
        raise ScenarioError("scenario requests no runners")
    return Scenario(name=config["name"], runs=runs, config=config)


def _apply_overrides(raw: dict, overrides: dict) -> dict:
    """Apply dotted-path overrides (e.g. chain.pump_power_w=31e-6)."""
    raw = copy.deepcopy(raw)
    for dotted, value in overrides.items():
        keys = dotted.split(".")
        node_defaults = DEFAULT_CONFIG
        for key in keys[:-1]:
            if not isinstance(node_defaults, dict) or key not in node_defaults:
                raise ScenarioError(f"unknown override key: {dotted}")
            node_defaults = node_defaults[key]
        if not isinstance(node_defaults, dict) or keys[-1] not in node_defaults:
            raise ScenarioError(f"unknown override key: {dotted}")
        node = raw
        for key in keys[:-1]:
            node = node.setdefault(key, {})
            if not isinstance(node, dict):
                raise ScenarioError(f"override path collides with a value: {dotted}")
        node[keys[-1]] = value
    return raw


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _write_csv(path: Path, scenario: Scenario, header: list[str], rows):
    with open(path, "w", newline="") as fh:
        fh.write(f"# scenario: {scenario.name}\n")
        seed = scenario.seed()
        fh.write(f"# seed: {seed.master_seed}/{seed.stream_id}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(v) for v in row) + "\n")


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return f"{float(value):.12g}"


def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _chunks(n: int, n_chunks: int):
    size = max(1, -(-n // max(n_chunks, 1)))
    return [(start, min(start + size, n)) for start in range(0, n, size)]


def _map_ordered(fn, items, threads: int):
    """Apply fn over items, optionally in a thread pool, preserving order."""
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------

def _readout_notch_factor(dev: DeviceParams, omega) -> np.ndarray:
    """Power transmission of the readout-resonator notch at its bare frequency.

    The dip observed in the conversion spectrum sits at the bare resonator
    frequency, in front of the transducer; this factor reproduces it for the
    exported line cut.
    """
    q = dev.qubit
    s = 1.0 - (q.kappa_ree / q.kappa_re) / (1.0 + 2j * (np.asarray(omega) - q.omega_r) / q.kappa_re)
    return np.abs(s) ** 2


def run_efficiency_map(scenario: Scenario, out_dir: Path, threads: int = 1) -> dict:
    """Conversion-efficiency map over (signal frequency, resonator detuning),
    plus the pump-power sweep when the scenario carries that block."""
    dev = scenario.device()
    cfg = scenario.config
    pump = scenario.chain_config(dev).pump
    report: dict = {}

    if cfg["efficiency_map"]["enabled"]:
        block = cfg["efficiency_map"]
        center = dev.transducer.omega_p
        freqs = center + TWO_PI * np.linspace(-block["freq_span_hz"] / 2,
                                              block["freq_span_hz"] / 2,
                                              int(block["freq_points"]))
        detunings = TWO_PI * np.linspace(block["detuning_min_hz"], block["detuning_max_hz"],
                                         int(block["detuning_points"]))

        def one_row(delta_e):
            return efficiency_spectrum(dev, pump, freqs, delta_e=delta_e)

        spectra = _map_ordered(one_row, list(detunings), threads)
        rows = []
        for delta_e, spec in zip(detunings, spectra):
            for omega, eta in zip(spec.frequencies, spec.eta):
                rows.append((angular_to_hz(delta_e), angular_to_hz(omega), eta,
                             10 * np.log10(eta) if eta > 0 else float("-inf")))
        _write_csv(out_dir / "efficiency_map.csv", scenario,
                   ["detuning_hz", "frequency_hz", "eta", "eta_db"], rows)

        center_spec = spectra[int(np.argmin(np.abs(detunings)))]
        peak_omega, peak_eta = center_spec.peak()
        notch = _readout_notch_factor(dev, center_spec.frequencies)
        linecut_rows = [
            (angular_to_hz(omega), eta, 10 * np.log10(eta) if eta > 0 else float("-inf"),
             eta * nf)
            for omega, eta, nf in zip(center_spec.frequencies, center_spec.eta, notch)]
        _write_csv(out_dir / "efficiency_linecut.csv", scenario,
                   ["frequency_hz", "eta", "eta_db", "eta_with_notch"], linecut_rows)

        peak_per_detuning = np.array([s.peak()[1] for s in spectra])
        report["efficiency_map"] = {
            "peak_eta": peak_eta,
            "peak_eta_db": 10 * np.log10(peak_eta),
            "peak_frequency_hz": angular_to_hz(peak_omega),
            "bandwidth_3db_hz": angular_to_hz(center_spec.bandwidth_3db()),
            "detuning_variation_db": float(10 * np.log10(peak_per_detuning.max()
                                                         / peak_per_detuning.min())),
        }

    if cfg["power_sweep"]["pump_powers_w"]:
        block = cfg["power_sweep"]
        powers = [float(p) for p in block["pump_powers_w"]]
        center = dev.transducer.omega_p
        freqs = center + TWO_PI * np.linspace(-block["freq_span_hz"] / 2,
                                              block["freq_span_hz"] / 2,
                                              int(block["freq_points"]))

        def one_power(power):
            spec = efficiency_spectrum(dev, PumpConfig(power, pump.detuning), freqs)
            eta_readout = conversion_efficiency(dev, PumpConfig(power, pump.detuning),
                                                dev.qubit.omega_r)
            return spec.peak()[1], float(eta_readout)

        values = _map_ordered(one_power, powers, threads)
        rows = [(p, pk, 10 * np.log10(pk), er, 10 * np.log10(er) if er > 0 else float("-inf"))
                for p, (pk, er) in zip(powers, values)]
        _write_csv(out_dir / "power_sweep.csv", scenario,
                   ["pump_power_w", "eta_peak", "eta_peak_db", "eta_readout", "eta_readout_db"],
                   rows)
        peaks = np.array([v[0] for v in values])
        slope = float(np.polyfit(np.log10(powers), np.log10(peaks), 1)[0])
        report["power_sweep"] = {
            "loglog_slope": slope,
            "eta_peak_at_max_power": float(peaks[int(np.argmax(powers))]),
        }
    return report


def run_readout_map(scenario: Scenario, out_dir: Path, threads: int = 1) -> dict:
    """Readout signal-voltage grids for both prepared states over
    (probe frequency, readout power), with the difference-map maximum."""
    dev = scenario.device()
    demo = scenario.demolition()
    block = scenario.config["readout_map"]
    freqs = TWO_PI * np.linspace(block["freq_min_hz"], block["freq_max_hz"],
                                 int(block["freq_points"]))
    powers_dbm = np.linspace(block["power_min_dbm"], block["power_max_dbm"],
                             int(block["power_points"]))

    def one_power(p_dbm):
        p_w = dbm_to_watts(p_dbm)
        amp = np.sqrt(p_w)
        t0 = demolition_response(dev, demo, freqs, p_w, QubitState.GROUND)
        t1 = demolition_response(dev, demo, freqs, p_w, QubitState.EXCITED)
        return np.abs(t0) * amp, np.abs(t1) * amp, np.abs(t1 - t0) * amp

    grids = _map_ordered(one_power, list(powers_dbm), threads)
    rows = []
    best = (None, None, -1.0)
    for p_dbm, (v0, v1, diff) in zip(powers_dbm, grids):
        for k, omega in enumerate(freqs):
            rows.append((angular_to_hz(omega), p_dbm, v0[k], v1[k], diff[k]))
        j = int(np.argmax(diff))
        if diff[j] > best[2]:
            best = (angular_to_hz(freqs[j]), float(p_dbm), float(diff[j]))
    _write_csv(out_dir / "readout_map.csv", scenario,
               ["frequency_hz", "power_dbm", "v_ground", "v_excited", "v_difference"],
               rows)
    return {"readout_map": {
        "argmax_frequency_hz": best[0],
        "argmax_power_dbm": best[1],
        "max_v_difference": best[2],
    }}


def _generate_state_shots(dev, cfg, demo, switching, n_shots, seed, threads):
    """(iq, measured) for both prepared states, chunk-invariant under threads."""
    snr_value, budget = chain_snr(dev, cfg)
    mu0, mu1 = shot_means(dev, cfg, demo, snr_value)
    out = {}
    for state, tag in ((QubitState.GROUND, "ground"), (QubitState.EXCITED, "excited")):
        stream = seed.substream(f"shots/{tag}")

        def one_chunk(bounds, state=state, stream=stream):
            start, stop = bounds
            i, q, measured = generate_iq(mu0, mu1, stop - start, state, stream,
                                         switching, start_index=start)
            return i, q, measured

        parts = _map_ordered(one_chunk, _chunks(n_shots, threads), threads)
        i = np.concatenate([p[0] for p in parts])
        q = np.concatenate([p[1] for p in parts])
        measured = np.concatenate([p[2] for p in parts])
        out[state] = (np.column_stack([i, q]), measured)
    return out, snr_value, budget


def run_single_shot(scenario: Scenario, out_dir: Path, threads: int = 1) -> dict:
    """Single-shot IQ statistics and fidelity for the configured path, and
    the pump-power sweep of F / SNR / added noise when requested."""
    dev = scenario.device()
    demo = scenario.demolition()
    switching = scenario.switching()
    cfg = scenario.chain_config(dev)
    seed = scenario.seed()
    report: dict = {}

    if scenario.config["single_shot"]["enabled"]:
        n_shots = int(scenario.config["n_shots"])
        shots, snr_model, budget = _generate_state_shots(
            dev, cfg, demo, switching, n_shots, seed, threads)
        iq0, _ = shots[QubitState.GROUND]
        iq1, _ = shots[QubitState.EXCITED]
        boundary = lda_boundary(iq0, iq1)
        rep = fidelity_report(iq0, iq1, boundary)
        rows = []
        for state, (iq, _) in ((0, shots[QubitState.GROUND]), (1, shots[QubitState.EXCITED])):
            for k in range(len(iq)):
                rows.append((state * n_shots + k, state, iq[k, 0], iq[k, 1]))
        _write_csv(out_dir / "shots.csv", scenario,
                   ["index", "prepared_state", "i", "q"], rows)
        duty, p_avg = duty_cycle_average_power(
            cfg.pump.power if cfg.path is ReadoutPath.OPTICAL else cfg.readout_power_at_resonator,
            cfg.pulse_duration, cfg.pulse_duration + cfg.rest_time)
        report["single_shot"] = {
            "path": cfg.path.value,
            "fidelity": rep.fidelity,
            "p_0_given_1": rep.p_0_given_1,
            "p_1_given_0": rep.p_1_given_0,
            "snr_fit": rep.snr,
            "snr_model": snr_model,
            "signal_photons": signal_photons(cfg),
            "noise_budget": budget.to_dict(),
            "counts": rep.counts,
            "boundary": {"normal": [float(v) for v in boundary.normal],
                         "offset": boundary.offset},
            "duty_cycle": duty,
            "average_power_w": p_avg,
        }

    sweep_powers = [float(p) for p in scenario.config["pump_sweep"]["pump_powers_w"]]
    if sweep_powers:
        report["pump_sweep"] = _run_pump_sweep(scenario, dev, demo, switching, cfg,
                                               seed, sweep_powers, out_dir, threads)
    return report


def _run_pump_sweep(scenario, dev, demo, switching, cfg, seed, powers, out_dir, threads):
    """F, SNR, and added noise versus optical pump power.

    The transduction efficiency at each power scales the configured anchor
    by the transducer model's power dependence; the excess-noise anchor is
    referred with the device's configured exponent on the efficiency ratio.
    """
    n_shots = int(scenario.config["pump_sweep"]["n_shots"])
    eta_ref = resolve_eta_t(dev, cfg)
    model_ref = float(conversion_efficiency(dev, cfg.pump, cfg.omega_signal))
    exponent = dev.noise.excess_referral_exponent
    rows = []
    for power in powers:
        pump = PumpConfig(power, cfg.pump.detuning)
        model_eta = float(conversion_efficiency(dev, pump, cfg.omega_signal))
        eta_t = eta_ref * model_eta / model_ref if model_ref > 0 else model_eta
        excess = cfg.excess_noise_photons * (eta_ref / eta_t) ** exponent
        point_cfg = ChainConfig(path=cfg.path,
                                readout_power_at_resonator=cfg.readout_power_at_resonator,
                                pulse_duration=cfg.pulse_duration,
                                integration_window=cfg.integration_window,
                                rest_time=cfg.rest_time, pump=pump, setup=cfg.setup,
                                omega_signal=cfg.omega_signal,
                                excess_noise_photons=excess, eta_t_override=eta_t)
        budget = noise_budget(dev, point_cfg, eta_t)
        snr_model = snr_of(signal_photons(point_cfg), budget.total_photons)
        point_seed = seed.substream(f"pump_sweep/{power:.6e}")
        shots, _, _ = _generate_state_shots(dev, point_cfg, demo, switching,
                                            n_shots, point_seed, threads)
        iq0, _ = shots[QubitState.GROUND]
        iq1, _ = shots[QubitState.EXCITED]
        rep = fidelity_report(iq0, iq1, lda_boundary(iq0, iq1))
        rows.append((power, eta_t, budget.total_photons, snr_model, rep.snr, rep.fidelity))
    _write_csv(out_dir / "pump_sweep.csv", scenario,
               ["pump_power_w", "eta_t", "n_add_photons", "snr_model", "snr_fit", "fidelity"],
               rows)
    return {
        "powers_w": [r[0] for r in rows],
        "eta_t": [r[1] for r in rows],
        "n_add_photons": [r[2] for r in rows],
        "snr_model": [r[3] for r in rows],
        "snr_fit": [r[4] for r in rows],
        "fidelity": [r[5] for r in rows],
    }


def _train_boundary(dev, cfg, demo, switching, seed, n_cal) -> DecisionBoundary:
    """Decision boundary from dedicated calibration shots of both states."""
    shots, _, _ = _generate_state_shots(dev, cfg, demo, switching, n_cal,
                                        seed.substream("calibration"), threads=1)
    return lda_boundary(shots[QubitState.GROUND][0], shots[QubitState.EXCITED][0])


def _estimate_probabilities(dev, cfg, demo, switching, boundary, seed_stream,
                            p_true: np.ndarray, n_shots_per_point: int) -> np.ndarray:
    """Per-point excited-state probability estimated through the readout model.

    For each grid point, n shots are prepared with the point's true excited
    probability (draw slot 3), passed through switching (slot 0) and the IQ
    noise model (slots 1-2), and classified with the trained boundary; the
    estimate is the classified fraction.
    """
    snr_value, _ = chain_snr(dev, cfg)
    mu0, mu1 = shot_means(dev, cfg, demo, snr_value)
    n_points = len(p_true)
    total = n_points * n_shots_per_point
    u = uniforms(seed_stream, 0, total, draws=4)
    p_rep = np.repeat(np.asarray(p_true, dtype=float), n_shots_per_point)
    prepared = (u[:, 3] < p_rep).astype(int)
    measured = switching_outcomes(prepared, switching, seed_stream, 0, u_flip=u[:, 0])
    z_i, z_q = normal_pair(u[:, 1], u[:, 2])
    mu = np.where(measured == 1, mu1, mu0)
    iq = np.column_stack([mu.real + z_i, mu.imag + z_q])
    labels = boundary.classify(iq)
    return labels.reshape(n_points, n_shots_per_point).mean(axis=1)


def run_chevron_and_ramsey(scenario: Scenario, out_dir: Path, threads: int = 1) -> dict:
    """Rabi-chevron and Ramsey probability grids estimated shot-by-shot
    through the configured readout path (so readout infidelity visibly
    reduces the fringe contrast)."""
    dev = scenario.device()
    demo = scenario.demolition()
    switching = scenario.switching()
    cfg = scenario.chain_config(dev)
    seed = scenario.seed()
    boundary = _train_boundary(dev, cfg, demo, switching, seed,
                               int(scenario.config["calibration_shots"]))
    report: dict = {}

    if scenario.config["chevron"]["enabled"]:
        block = scenario.config["chevron"]
        detunings = TWO_PI * np.linspace(-block["detuning_span_hz"] / 2,
                                         block["detuning_span_hz"] / 2,
                                         int(block["detuning_points"]))
        durations = np.linspace(0.0, block["duration_max_s"], int(block["duration_points"]))
        rabi_rate = TWO_PI * block["rabi_rate_hz"]
        n_per = int(block["n_shots_per_point"])

        def one_row(k):
            p_true = np.array([rabi_excited_prob(detunings[k], t, rabi_rate)
                               for t in durations])
            return _estimate_probabilities(dev, cfg, demo, switching, boundary,
                                           seed.substream(f"chevron/{k}"), p_true, n_per)

        rows_est = _map_ordered(one_row, list(range(len(detunings))), threads)
        rows = []
        for k, est in enumerate(rows_est):
            for t, p in zip(durations, est):
                rows.append((angular_to_hz(detunings[k]), t, p))
        _write_csv(out_dir / "chevron.csv", scenario,
                   ["detuning_hz", "duration_s", "p_excited"], rows)
        report["chevron"] = {
            "detuning_points": len(detunings),
            "duration_points": len(durations),
            "rabi_rate_hz": block["rabi_rate_hz"],
            "n_shots_per_point": n_per,
        }

    if scenario.config["ramsey"]["enabled"]:
        block = scenario.config["ramsey"]
        delays = np.linspace(0.0, block["delay_max_s"], int(block["delay_points"]))
        detuning = TWO_PI * block["detuning_hz"]
        n_per = int(block["n_shots_per_point"])
        p_true = np.array([ramsey_excited_prob(t, detuning, dev.qubit.t2_star,
                                               block["phase_rad"]) for t in delays])
        est = _estimate_probabilities(dev, cfg, demo, switching, boundary,
                                      seed.substream("ramsey"), p_true, n_per)
        _write_csv(out_dir / "ramsey.csv", scenario,
                   ["delay_s", "p_excited"], list(zip(delays, est)))
        fit = fit_damped_cosine(delays, est)
        report["ramsey"] = {
            "detuning_hz": block["detuning_hz"],
            "fitted_detuning_hz": abs(fit["detuning"]) / TWO_PI,
            "fitted_t2_star_s": fit["t2_star"],
            "fit_converged": fit.converged,
            "n_shots_per_point": n_per,
        }
    return report


def run_coherence_stats(scenario: Scenario, out_dir: Path, threads: int = 1) -> dict:
    """Distributions of fitted T1 / T2* over repeated simulated measurements,
    with the optical pump on and off."""
    dev = scenario.device()
    demo = scenario.demolition()
    switching = scenario.switching()
    cfg = scenario.chain_config(dev)
    seed = scenario.seed()
    block = scenario.config["coherence"]
    n_repeats = int(scenario.config["n_repeats"])
    n_per = int(block["n_shots_per_point"])
    boundary = _train_boundary(dev, cfg, demo, switching, seed,
                               int(scenario.config["calibration_shots"]))

    truth = {}
    for pump_state in ("pump_off", "pump_on"):
        params = block[pump_state]
        truth[pump_state] = {
            "t1": params["t1_s"] if params["t1_s"] else dev.qubit.t1,
            "t2_star": params["t2_star_s"] if params["t2_star_s"] else dev.qubit.t2_star,
        }

    delays = {
        "t1": np.linspace(0.0, block["t1_delay_max_s"], int(block["t1_delay_points"])),
        "t2_star": np.linspace(0.0, block["ramsey_delay_max_s"],
                               int(block["ramsey_delay_points"])),
    }
    ramsey_detuning = TWO_PI * block["ramsey_detuning_hz"]

    rows = []
    summary: dict = {}
    for quantity in block["quantities"]:
        grid = delays[quantity]
        values = {}
        for pump_state in ("pump_off", "pump_on"):
            true_value = truth[pump_state][quantity]
            if quantity == "t1":
                p_true = np.array([t1_excited_prob(t, true_value) for t in grid])
            else:
                p_true = np.array([ramsey_excited_prob(t, ramsey_detuning, true_value)
                                   for t in grid])

            def one_repeat(r, p_true=p_true, quantity=quantity, pump_state=pump_state):
                stream = seed.substream(f"coherence/{quantity}/{pump_state}/{r}")
                est = _estimate_probabilities(dev, cfg, demo, switching, boundary,
                                              stream, p_true, n_per)
                if quantity == "t1":
                    fit = fit_exponential(grid, est)
                    return fit["t1"], fit.sigma_of("t1"), fit.converged
                fit = fit_damped_cosine(grid, est)
                return fit["t2_star"], fit.sigma_of("t2_star"), fit.converged

            results = _map_ordered(one_repeat, list(range(n_repeats)), threads)
            fitted = np.array([r[0] for r in results])
            ok = np.array([r[2] for r in results], dtype=bool)
            values[pump_state] = fitted[ok]
            for r, (value, sigma, converged) in enumerate(results):
                rows.append((quantity, pump_state, r, value, sigma, converged))
            summary.setdefault(quantity, {})[pump_state] = {
                "mean_s": float(np.mean(fitted[ok])) if ok.any() else float("nan"),
                "std_s": float(np.std(fitted[ok], ddof=1)) if ok.sum() > 1 else float("nan"),
                "true_s": truth[pump_state][quantity],
                "n_fits": int(ok.sum()),
                "n_failed": int((~ok).sum()),
            }
        test = stats.ttest_ind(values["pump_off"], values["pump_on"], equal_var=False)
        summary[quantity]["two_sample_p_value"] = float(test.pvalue)
        _write_histogram(out_dir / f"coherence_hist_{quantity}.csv", scenario,
                         values["pump_off"], values["pump_on"])

    _write_csv(out_dir / "coherence_fits.csv", scenario,
               ["quantity", "pump_state", "repeat", "value_s", "sigma_s", "converged"],
               rows)
    return {"coherence_stats": summary}


def _write_histogram(path, scenario, off_values, on_values, bins: int = 25):
    both = np.concatenate([off_values, on_values])
    lo, hi = float(both.min()), float(both.max())
    if lo == hi:
        lo, hi = lo - 0.5 * abs(lo or 1.0), hi + 0.5 * abs(hi or 1.0)
    edges = np.linspace(lo, hi, bins + 1)
    count_off, _ = np.histogram(off_values, bins=edges)
    count_on, _ = np.histogram(on_values, bins=edges)
    rows = [(edges[k], edges[k + 1], count_off[k], count_on[k]) for k in range(bins)]
    _write_csv(path, scenario, ["bin_lo_s", "bin_hi_s", "count_off", "count_on"], rows)


RUNNERS = {
    "efficiency_map": run_efficiency_map,
    "readout_map": run_readout_map,
    "single_shot": run_single_shot,
    "coherence_stats": run_coherence_stats,
    "chevron_and_ramsey": run_chevron_and_ramsey,
}


def run_scenario(scenario: Scenario, out_root: str | Path, threads: int = 1) -> Path:
    """Execute every runner a scenario requests into out_root/<name>/.

    Writes the resolved configuration, per-runner CSV data, and a combined
    report.json; returns the run directory.
    """
    out_dir = Path(out_root) / scenario.name
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "resolved_config.json", scenario.config)
    report: dict = {"scenario": scenario.name, "runs": list(scenario.runs)}
    for run in scenario.runs:
        report.update(RUNNERS[run](scenario, out_dir, threads=threads))
    _write_json(out_dir / "report.json", report)
    return out_dir
