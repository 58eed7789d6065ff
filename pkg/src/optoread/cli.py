"""Command-line interface: scenario simulation, calibrations, fits, budgets.

Exit status: 0 on success, 1 on validation errors (bad flags, unknown
scenarios or override keys, malformed files), 2 on runtime or fit failures.
Diagnostics go to stderr; data goes to files and stdout only.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .calib import load_stark_csv, stark_attenuation
from .chain import ChainConfig, ReadoutPath, noise_budget, resolve_eta_t
from .device import DeviceError, default_paper_device, load_device_params
from .estimate import (fit_bimodal_gaussian, fit_damped_cosine, fit_exponential,
                       fit_lorentzian, fit_notch_resonator)
from .experiments import ScenarioError, list_scenarios, load_scenario, run_scenario
from .transducer import PumpConfig


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optoread",
        description="Simulator and estimation toolkit for optical qubit readout "
                    "through a piezo-optomechanical transducer.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario and write its data")
    sim.add_argument("--scenario", required=True,
                     help="packaged scenario name or path to a scenario JSON file")
    sim.add_argument("--out", default="runs", help="output root directory")
    sim.add_argument("--seed", type=int, default=None,
                     help="override the scenario master seed")
    sim.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE",
                     help="dotted-path override into the scenario JSON, "
                          "e.g. chain.pump_power_w=31e-6 (repeatable)")
    sim.add_argument("--threads", type=int, default=1,
                     help="worker threads (no effect on outputs)")
    sim.add_argument("--no-plots", action="store_true",
                     help="skip rendering PNG figures next to the CSV data")

    cal = sub.add_parser("calibrate", help="run a calibration pipeline")
    cal_sub = cal.add_subparsers(dest="pipeline", required=True)
    stark = cal_sub.add_parser("stark", help="line attenuation from Stark-shift data")
    stark.add_argument("--input", required=True,
                       help="CSV with columns power_dbm, qubit_freq_hz")
    stark.add_argument("--device", default=None, help="device JSON file")
    stark.add_argument("--offset-db", type=float, default=0.0,
                       help="additional insertion losses to add to the fitted value")

    fit = sub.add_parser("fit", help="fit a model to CSV data")
    fit.add_argument("model", choices=["lorentzian", "exponential", "damped_cosine",
                                       "notch", "bimodal"])
    fit.add_argument("--input", required=True, help="input CSV file")
    fit.add_argument("--out", default=None, help="write the fit JSON here instead of stdout")

    budget = sub.add_parser("budget", help="input-referred added-noise budget")
    budget.add_argument("--device", default=None, help="device JSON file")
    budget.add_argument("--path", choices=["microwave_only", "optical"],
                        default="optical")
    budget.add_argument("--pump-power", type=float, default=31e-6,
                        help="optical pump power in W")
    budget.add_argument("--eta-t", type=float, default=None,
                        help="transduction efficiency override at the signal frequency")
    budget.add_argument("--excess", type=float, default=None,
                        help="excess noise photons (default: device value on the "
                             "optical path, 0 on the microwave path)")
    budget.add_argument("--alpha", type=float, default=None,
                        help="override the setup sideband factor (what-if budgets)")
    budget.add_argument("--eta-c", type=float, default=None,
                        help="override the optical collection efficiency")
    budget.add_argument("--readout-power-dbm", type=float, default=-105.8)
    budget.add_argument("--integration-window", type=float, default=13.2e-6,
                        help="integration window in s")

    sub.add_parser("list-scenarios", help="list the scenarios shipped with the package")
    return parser


def _cmd_simulate(args) -> int:
    overrides = {}
    for item in args.overrides:
        if "=" not in item:
            raise ScenarioError(f"override must look like key=value: {item}")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        overrides[key.strip()] = value
    if args.seed is not None:
        overrides["seed.master_seed"] = args.seed
    scenario = load_scenario(args.scenario, overrides)
    print(f"running scenario {scenario.name} "
          f"(runs: {', '.join(scenario.runs)})", file=sys.stderr)
    run_dir = run_scenario(scenario, args.out, threads=max(args.threads, 1))
    if not args.no_plots:
        from .plots import render_run
        rendered = render_run(run_dir)
        print(f"rendered {len(rendered)} figure(s)", file=sys.stderr)
    print(f"outputs in {run_dir}", file=sys.stderr)
    sys.stdout.write((run_dir / "report.json").read_text())
    return 0


def _cmd_calibrate_stark(args) -> int:
    dev = load_device_params(args.device) if args.device else default_paper_device()
    dataset = load_stark_csv(args.input)
    attenuation_db, sigma_db = stark_attenuation(dev, dataset, args.offset_db)
    payload = {
        "attenuation_db": attenuation_db,
        "sigma_db": sigma_db,
        "offset_db": args.offset_db,
        "n_rows": int(dataset.powers_rt_w.size),
        "input": str(args.input),
    }
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def _read_xy_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(line for line in fh if not line.startswith("#"))]
    header = rows[0]
    data = np.array([[float(v) for v in row] for row in rows[1:]])
    return header, data


def _cmd_fit(args) -> int:
    header, data = _read_xy_csv(args.input)
    if args.model == "notch":
        if len(header) < 3:
            raise ValueError("notch fit needs columns frequency, re, im")
        result = fit_notch_resonator(data[:, 0], data[:, 1] + 1j * data[:, 2])
    elif args.model == "bimodal":
        result = fit_bimodal_gaussian(data[:, 0])
    else:
        fitters = {"lorentzian": fit_lorentzian, "exponential": fit_exponential,
                   "damped_cosine": fit_damped_cosine}
        result = fitters[args.model](data[:, 0], data[:, 1])
    payload = result.to_dict()
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if not result.converged:
        print(f"fit did not converge: {result.flag or 'no flag'}", file=sys.stderr)
        return 2
    return 0


def _cmd_budget(args) -> int:
    from dataclasses import replace

    dev = load_device_params(args.device) if args.device else default_paper_device()
    path = ReadoutPath(args.path)
    excess = args.excess
    if excess is None:
        excess = dev.noise.excess_photons_ref if path is ReadoutPath.OPTICAL else 0.0
    setup = dev.setup
    if args.alpha is not None:
        setup = replace(setup, sideband_alpha=args.alpha)
    if args.eta_c is not None:
        setup = replace(setup, eta_od=args.eta_c)
    from .units import dbm_to_watts
    cfg = ChainConfig(
        path=path,
        readout_power_at_resonator=dbm_to_watts(args.readout_power_dbm),
        pulse_duration=max(args.integration_window, 14e-6),
        integration_window=args.integration_window,
        rest_time=250e-6,
        pump=PumpConfig(args.pump_power),
        setup=setup,
        omega_signal=dev.qubit.omega_r,
        excess_noise_photons=excess,
        eta_t_override=args.eta_t,
    )
    eta_t = resolve_eta_t(dev, cfg)
    budget = noise_budget(dev, cfg, eta_t)
    payload = budget.to_dict()
    payload["eta_t"] = eta_t
    payload["path"] = path.value
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; the CLI contract wants 1
        return 0 if exc.code == 0 else 1
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "calibrate":
            return _cmd_calibrate_stark(args)
        if args.command == "fit":
            return _cmd_fit(args)
        if args.command == "budget":
            return _cmd_budget(args)
        if args.command == "list-scenarios":
            for name in list_scenarios():
                print(name)
            return 0
    except (DeviceError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failures
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    parser.error(f"unknown command {args.command}")
    return 1


if __name__ == "__main__":
    sys.exit(main())
