"""Figure rendering for scenario run directories.

Reads the delimited outputs a run produced and renders one PNG per dataset
next to them. Rendering is optional (the CSV/JSON data is the primary
artifact) and deterministic: fixed figure geometry, no timestamps.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 130


def _load_csv(path: Path) -> dict[str, np.ndarray]:
    with open(path) as fh:
        lines = [line for line in fh if not line.startswith("#")]
    header = lines[0].strip().split(",")
    data = np.array([[_cell(v) for v in line.strip().split(",")] for line in lines[1:]])
    return {name: data[:, k] for k, name in enumerate(header)}


def _cell(value: str) -> float:
    try:
        return float(value)
    except ValueError:
        return float("nan")


def _save(fig, path: Path):
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_efficiency_map(run_dir: Path) -> list[Path]:
    out = []
    map_path = run_dir / "efficiency_map.csv"
    if map_path.exists():
        cols = _load_csv(map_path)
        detunings = np.unique(cols["detuning_hz"])
        freqs = np.unique(cols["frequency_hz"])
        grid = cols["eta_db"].reshape(len(detunings), len(freqs))
        fig, ax = plt.subplots(figsize=(6, 4))
        mesh = ax.pcolormesh(freqs / 1e9, detunings / 1e6, grid, shading="nearest")
        fig.colorbar(mesh, ax=ax, label="conversion efficiency (dB)")
        ax.set_xlabel("signal frequency (GHz)")
        ax.set_ylabel("resonator detuning (MHz)")
        path = run_dir / "efficiency_map.png"
        _save(fig, path)
        out.append(path)
    cut_path = run_dir / "efficiency_linecut.csv"
    if cut_path.exists():
        cols = _load_csv(cut_path)
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(cols["frequency_hz"] / 1e9, cols["eta_db"], label="chain model")
        with np.errstate(divide="ignore"):
            ax.plot(cols["frequency_hz"] / 1e9, 10 * np.log10(cols["eta_with_notch"]),
                    ":", label="with readout-resonator notch")
        ax.set_xlabel("signal frequency (GHz)")
        ax.set_ylabel("conversion efficiency (dB)")
        ax.legend()
        path = run_dir / "efficiency_linecut.png"
        _save(fig, path)
        out.append(path)
    sweep_path = run_dir / "power_sweep.csv"
    if sweep_path.exists():
        cols = _load_csv(sweep_path)
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.loglog(cols["pump_power_w"] * 1e6, cols["eta_peak"], "o-", label="peak")
        ax.loglog(cols["pump_power_w"] * 1e6, cols["eta_readout"], "s-",
                  label="at readout resonator")
        ax.set_xlabel("optical pump power (uW)")
        ax.set_ylabel("conversion efficiency")
        ax.legend()
        path = run_dir / "power_sweep.png"
        _save(fig, path)
        out.append(path)
    return out


def render_readout_map(run_dir: Path) -> list[Path]:
    map_path = run_dir / "readout_map.csv"
    if not map_path.exists():
        return []
    cols = _load_csv(map_path)
    freqs = np.unique(cols["frequency_hz"])
    powers = np.unique(cols["power_dbm"])
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.6), sharey=True)
    for ax, key, title in zip(axes, ("v_excited", "v_ground", "v_difference"),
                              ("|1> prepared", "|0> prepared", "difference")):
        grid = cols[key].reshape(len(powers), len(freqs))
        mesh = ax.pcolormesh(freqs / 1e9, powers, grid, shading="nearest")
        fig.colorbar(mesh, ax=ax)
        ax.set_title(title)
        ax.set_xlabel("probe frequency (GHz)")
    axes[0].set_ylabel("readout power (dBm)")
    path = run_dir / "readout_map.png"
    _save(fig, path)
    return [path]


def render_single_shot(run_dir: Path) -> list[Path]:
    out = []
    shots_path = run_dir / "shots.csv"
    if shots_path.exists():
        cols = _load_csv(shots_path)
        prepared = cols["prepared_state"].astype(int)
        report = json.loads((run_dir / "report.json").read_text())
        fig, (ax_iq, ax_hist) = plt.subplots(1, 2, figsize=(10, 4))
        for state, color, label in ((0, "C0", "|0> prepared"), (1, "C3", "|1> prepared")):
            mask = prepared == state
            ax_iq.plot(cols["i"][mask], cols["q"][mask], ".", ms=1.5, alpha=0.4,
                       color=color, label=label)
        ax_iq.set_xlabel("I (arb.)")
        ax_iq.set_ylabel("Q (arb.)")
        ax_iq.axis("equal")
        ax_iq.legend(markerscale=8)
        boundary = report.get("single_shot", {}).get("boundary")
        if boundary:
            normal = np.array(boundary["normal"])
            offset = boundary["offset"]
            iq = np.column_stack([cols["i"], cols["q"]])
            projection = iq @ normal - offset
            for state, color in ((0, "C0"), (1, "C3")):
                ax_hist.hist(projection[prepared == state], bins=80, alpha=0.6, color=color)
            ax_hist.axvline(0.0, color="k", ls="--", lw=1)
            ax_hist.set_xlabel("distance to decision boundary")
            ax_hist.set_ylabel("counts")
            ax_hist.set_yscale("log")
        path = run_dir / "shots.png"
        _save(fig, path)
        out.append(path)
    sweep_path = run_dir / "pump_sweep.csv"
    if sweep_path.exists():
        cols = _load_csv(sweep_path)
        fig, (ax_f, ax_n) = plt.subplots(1, 2, figsize=(10, 4))
        power_uw = cols["pump_power_w"] * 1e6
        ax_f.semilogx(power_uw, cols["fidelity"], "o-", color="C0")
        ax_f.set_xlabel("optical pump power (uW)")
        ax_f.set_ylabel("readout fidelity", color="C0")
        ax_snr = ax_f.twinx()
        ax_snr.semilogx(power_uw, cols["snr_fit"], "s-", color="C1")
        ax_snr.set_ylabel("SNR", color="C1")
        ax_n.loglog(power_uw, cols["n_add_photons"], "o-")
        ax_n.set_xlabel("optical pump power (uW)")
        ax_n.set_ylabel("added noise (photons)")
        path = run_dir / "pump_sweep.png"
        _save(fig, path)
        out.append(path)
    return out


def render_coherence(run_dir: Path) -> list[Path]:
    out = []
    for quantity, label in (("t1", "T1"), ("t2_star", "T2*")):
        hist_path = run_dir / f"coherence_hist_{quantity}.csv"
        if not hist_path.exists():
            continue
        cols = _load_csv(hist_path)
        centers = 0.5 * (cols["bin_lo_s"] + cols["bin_hi_s"]) * 1e6
        width = (cols["bin_hi_s"] - cols["bin_lo_s"]) * 1e6
        fig, ax = plt.subplots(figsize=(5.5, 4))
        ax.bar(centers, cols["count_off"], width=width, alpha=0.6, label="pump off")
        ax.bar(centers, cols["count_on"], width=width, alpha=0.6, label="pump on")
        ax.set_xlabel(f"fitted {label} (us)")
        ax.set_ylabel("counts")
        ax.legend()
        path = run_dir / f"coherence_{quantity}.png"
        _save(fig, path)
        out.append(path)
    return out


def render_chevron_and_ramsey(run_dir: Path) -> list[Path]:
    out = []
    chevron_path = run_dir / "chevron.csv"
    if chevron_path.exists():
        cols = _load_csv(chevron_path)
        detunings = np.unique(cols["detuning_hz"])
        durations = np.unique(cols["duration_s"])
        grid = cols["p_excited"].reshape(len(detunings), len(durations))
        fig, ax = plt.subplots(figsize=(6, 4))
        mesh = ax.pcolormesh(durations * 1e6, detunings / 1e6, grid, shading="nearest")
        fig.colorbar(mesh, ax=ax, label="estimated P(|1>)")
        ax.set_xlabel("drive duration (us)")
        ax.set_ylabel("drive detuning (MHz)")
        path = run_dir / "chevron.png"
        _save(fig, path)
        out.append(path)
    ramsey_path = run_dir / "ramsey.csv"
    if ramsey_path.exists():
        cols = _load_csv(ramsey_path)
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(cols["delay_s"] * 1e6, cols["p_excited"], "o-", ms=3)
        ax.set_xlabel("Ramsey delay (us)")
        ax.set_ylabel("estimated P(|1>)")
        path = run_dir / "ramsey.png"
        _save(fig, path)
        out.append(path)
    return out


def render_run(run_dir: str | Path) -> list[Path]:
    """Render every figure supported by the data present in a run directory."""
    run_dir = Path(run_dir)
    rendered = []
    rendered += render_efficiency_map(run_dir)
    rendered += render_readout_map(run_dir)
    rendered += render_single_shot(run_dir)
    rendered += render_coherence(run_dir)
    rendered += render_chevron_and_ramsey(run_dir)
    return rendered
