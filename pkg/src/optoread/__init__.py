"""Simulator and estimation toolkit for optical qubit readout through a
piezo-optomechanical microwave-to-optics transducer."""

__version__ = "0.1.0"

from .device import DeviceParams, default_paper_device, load_device_params
from .rng import SeedSpec
from .transducer import PumpConfig, conversion_efficiency, efficiency_spectrum
from .qubit import DemolitionConfig, QubitState, SwitchingConfig
from .chain import ChainConfig, IQShot, NoiseBudget, ReadoutPath, generate_shots, noise_budget
from .estimate import (FidelityReport, FitResult, fidelity_report, fidelity_vs_snr,
                       lda_boundary)
from .experiments import Scenario, list_scenarios, load_scenario, run_scenario

__all__ = [
    "ChainConfig", "DemolitionConfig", "DeviceParams", "FidelityReport",
    "FitResult", "IQShot", "NoiseBudget", "PumpConfig", "QubitState",
    "ReadoutPath", "Scenario", "SeedSpec", "SwitchingConfig",
    "conversion_efficiency", "default_paper_device", "efficiency_spectrum",
    "fidelity_report", "fidelity_vs_snr", "generate_shots", "lda_boundary",
    "list_scenarios", "load_device_params", "load_scenario", "noise_budget",
    "run_scenario",
]
