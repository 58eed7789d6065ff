"""Device and setup parameter registry.

Holds every transducer, qubit/resonator, and detection-setup parameter as a
validated, file-loadable set. Device files are JSON with frequencies and
rates in Hz (linear, matching how the quantities are usually tabulated); the
loader converts to angular units. The shipped ``device_paper.json`` carries
the reference parameter set plus the calibrated model constants (``c_em``,
``c_om_per_watt``, ``width_scale``, excess-noise anchor).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

from .units import TWO_PI, angular_to_hz, hz_to_angular


class DeviceError(ValueError):
    """Raised for schema or invariant violations in device files."""


@dataclass(frozen=True)
class TransducerParams:
    """Piezo-optomechanical transducer parameters (angular units, rad/s).

    ``c_em`` is the electromechanical cooperativity and ``c_om_per_watt``
    the optomechanical cooperativity per watt of optical pump power; both
    are calibrated model constants, not directly measured quantities.
    ``width_scale`` rescales the mechanical linewidth inside the spectral
    model so the conversion bandwidth matches the measured value.
    """

    omega_m: float  # mechanical resonance
    omega_o: float  # optical resonance
    omega_p: float  # peak conversion frequency
    kappa_m: float  # mechanical linewidth
    kappa_ee: float  # microwave external coupling
    kappa_ei: float  # microwave internal loss
    kappa_o: float  # total optical loss
    eta_o: float  # optical coupling fraction
    c_em: float
    c_om_per_watt: float
    width_scale: float = 1.0

    @property
    def kappa_e(self) -> float:
        """Total microwave loss rate."""
        return self.kappa_ee + self.kappa_ei

    @property
    def eta_e(self) -> float:
        """Microwave external coupling fraction kappa_ee / kappa_e."""
        return self.kappa_ee / self.kappa_e

    def validate(self):
        for name in ("omega_m", "omega_o", "omega_p", "kappa_m", "kappa_ee",
                     "kappa_ei", "kappa_o", "c_em", "c_om_per_watt", "width_scale"):
            if not getattr(self, name) > 0:
                raise DeviceError(f"transducer.{name} must be > 0")
        if not 0 < self.eta_o <= 1:
            raise DeviceError("transducer.eta_o out of (0,1]")
        if not 0 < self.eta_e < 1:
            raise DeviceError("transducer eta_e = kappa_ee/kappa_e out of (0,1)")


@dataclass(frozen=True)
class QubitParams:
    """Qubit and readout-resonator parameters (angular units, rad/s; times s)."""

    omega_r: float  # bare readout resonator frequency
    omega_r_dressed: float
    omega_q: float
    kappa_ree: float  # resonator external rate
    kappa_rei: float  # resonator internal rate
    chi: float  # dispersive shift
    g: float  # qubit-resonator coupling
    t1: float
    t2_star: float

    @property
    def kappa_re(self) -> float:
        """Total readout-resonator linewidth."""
        return self.kappa_ree + self.kappa_rei

    def validate(self):
        for name in ("omega_r", "omega_r_dressed", "omega_q", "kappa_ree",
                     "kappa_rei", "chi", "g", "t1", "t2_star"):
            if not getattr(self, name) > 0:
                raise DeviceError(f"qubit.{name} must be > 0")
        if not self.t2_star <= 2 * self.t1:
            raise DeviceError("qubit.t2_star must satisfy t2_star <= 2*t1")


@dataclass(frozen=True)
class SetupParams:
    """Detection-chain efficiencies and noise levels.

    ``sideband_alpha`` is the local-oscillator sideband power fraction of
    the heterodyne scheme (|J1(beta)|^2 / 2 for a phase EOM at optimal
    modulation depth, ~0.17). It is distinct from the factor-two-corrected
    sideband-rejection term used in VNA efficiency extraction (see calib).
    ``hemt_added_photons`` is the amplifier-chain noise referred to the
    readout-resonator output; the resonator insertion loss is folded in.
    """

    eta_fiber: float
    eta_od: float  # optical output detection efficiency (collection)
    eta_tod: float  # total optical detection efficiency
    line_attenuation_db: float
    sideband_alpha: float
    hemt_added_photons: float

    def validate(self):
        for name in ("eta_fiber", "eta_od", "eta_tod"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise DeviceError(f"setup.{name} out of (0,1]")
        if not self.eta_tod <= self.eta_od:
            raise DeviceError("setup.eta_tod must not exceed setup.eta_od")
        if not 0 < self.sideband_alpha <= 0.5:
            raise DeviceError("setup.sideband_alpha out of (0,0.5]")
        if not self.line_attenuation_db > 0:
            raise DeviceError("setup.line_attenuation_db must be > 0")
        if not self.hemt_added_photons >= 0:
            raise DeviceError("setup.hemt_added_photons must be >= 0")


@dataclass(frozen=True)
class NoiseCalib:
    """Noise-budget calibration anchors.

    The thermal reference is the measured noise-equivalent power of the
    mechanical mode; it is input-referred and therefore independent of the
    conversion efficiency. The excess term anchors the unexplained noise
    component at a reference pump power; in pump sweeps it is referred with
    exponent ``excess_referral_exponent`` on the efficiency ratio (a pure
    config knob, not a physical claim).
    """

    thermal_nep_dbm: float
    thermal_bandwidth_hz: float
    thermal_ref_pump_power_w: float
    excess_photons_ref: float
    excess_ref_pump_power_w: float
    excess_referral_exponent: float
    transducer_emission_dbm: float

    def validate(self):
        if not self.thermal_bandwidth_hz > 0:
            raise DeviceError("noise.thermal_bandwidth_hz must be > 0")
        if not self.excess_photons_ref >= 0:
            raise DeviceError("noise.excess_photons_ref must be >= 0")
        if not self.excess_ref_pump_power_w > 0:
            raise DeviceError("noise.excess_ref_pump_power_w must be > 0")


@dataclass(frozen=True)
class BackactionTable:
    """Optical back-action on the microwave resonator, tabulated vs pump power.

    Shifts are <= 0 (resonance pulled down) and extra losses >= 0; values
    between table points are linearly interpolated.
    """

    pump_powers_w: tuple
    freq_shift: tuple  # rad/s, <= 0
    extra_loss: tuple  # rad/s, >= 0

    def validate(self):
        n = len(self.pump_powers_w)
        if len(self.freq_shift) != n or len(self.extra_loss) != n:
            raise DeviceError("backaction table columns must have equal length")
        if n < 2:
            raise DeviceError("backaction table needs at least two rows")
        if list(self.pump_powers_w) != sorted(self.pump_powers_w):
            raise DeviceError("backaction.pump_powers_w must be sorted ascending")
        if any(s > 0 for s in self.freq_shift):
            raise DeviceError("backaction.freq_shift_hz entries must be <= 0")
        if any(l < 0 for l in self.extra_loss):
            raise DeviceError("backaction.extra_loss_hz entries must be >= 0")


@dataclass(frozen=True)
class DeviceParams:
    """Composite of all device, qubit, setup and calibration parameters."""

    transducer: TransducerParams
    qubit: QubitParams
    setup: SetupParams
    noise: NoiseCalib
    backaction: BackactionTable

    def validate(self):
        self.transducer.validate()
        self.qubit.validate()
        self.setup.validate()
        self.noise.validate()
        self.backaction.validate()


_ANGULAR_SECTIONS = {
    "transducer": {
        "omega_m_hz": "omega_m", "omega_o_hz": "omega_o", "omega_p_hz": "omega_p",
        "kappa_m_hz": "kappa_m", "kappa_ee_hz": "kappa_ee", "kappa_ei_hz": "kappa_ei",
        "kappa_o_hz": "kappa_o", "eta_o": "eta_o", "c_em": "c_em",
        "c_om_per_watt": "c_om_per_watt", "width_scale": "width_scale",
    },
    "qubit": {
        "omega_r_hz": "omega_r", "omega_r_dressed_hz": "omega_r_dressed",
        "omega_q_hz": "omega_q", "kappa_ree_hz": "kappa_ree", "kappa_rei_hz": "kappa_rei",
        "chi_hz": "chi", "g_hz": "g", "t1_s": "t1", "t2_star_s": "t2_star",
    },
}

_PLAIN_SECTIONS = {
    "setup": SetupParams,
    "noise": NoiseCalib,
}


def _parse_section(section: str, raw: dict, mapping: dict, cls):
    kwargs = {}
    for file_key, attr in mapping.items():
        if file_key not in raw:
            raise DeviceError(f"device file missing field {section}.{file_key}")
        value = float(raw[file_key])
        kwargs[attr] = hz_to_angular(value) if file_key.endswith("_hz") else value
    unknown = set(raw) - set(mapping)
    if unknown:
        raise DeviceError(f"unknown field {section}.{sorted(unknown)[0]}")
    return cls(**kwargs)


def _parse_plain(section: str, raw: dict, cls):
    names = [f.name for f in fields(cls)]
    for name in names:
        if name not in raw:
            raise DeviceError(f"device file missing field {section}.{name}")
    unknown = set(raw) - set(names)
    if unknown:
        raise DeviceError(f"unknown field {section}.{sorted(unknown)[0]}")
    return cls(**{name: float(raw[name]) for name in names})


def device_from_dict(doc: dict) -> DeviceParams:
    """Build and validate DeviceParams from a parsed device-file dict."""
    expected = {"transducer", "qubit", "setup", "noise", "backaction"}
    missing = expected - set(doc)
    if missing:
        raise DeviceError(f"device file missing section {sorted(missing)[0]}")
    unknown = set(doc) - expected
    if unknown:
        raise DeviceError(f"unknown section {sorted(unknown)[0]}")

    transducer = _parse_section("transducer", doc["transducer"],
                                _ANGULAR_SECTIONS["transducer"], TransducerParams)
    qubit = _parse_section("qubit", doc["qubit"], _ANGULAR_SECTIONS["qubit"], QubitParams)
    setup = _parse_plain("setup", doc["setup"], SetupParams)
    noise = _parse_plain("noise", doc["noise"], NoiseCalib)

    ba_raw = doc["backaction"]
    for key in ("pump_powers_w", "freq_shift_hz", "extra_loss_hz"):
        if key not in ba_raw:
            raise DeviceError(f"device file missing field backaction.{key}")
    unknown = set(ba_raw) - {"pump_powers_w", "freq_shift_hz", "extra_loss_hz"}
    if unknown:
        raise DeviceError(f"unknown field backaction.{sorted(unknown)[0]}")
    backaction = BackactionTable(
        pump_powers_w=tuple(float(v) for v in ba_raw["pump_powers_w"]),
        freq_shift=tuple(hz_to_angular(float(v)) for v in ba_raw["freq_shift_hz"]),
        extra_loss=tuple(hz_to_angular(float(v)) for v in ba_raw["extra_loss_hz"]),
    )

    dev = DeviceParams(transducer=transducer, qubit=qubit, setup=setup,
                       noise=noise, backaction=backaction)
    dev.validate()
    return dev


def device_to_dict(dev: DeviceParams) -> dict:
    """Serialize DeviceParams back to the canonical Hz-domain file form."""
    doc: dict = {"transducer": {}, "qubit": {}, "setup": {}, "noise": {}, "backaction": {}}
    for section, mapping in _ANGULAR_SECTIONS.items():
        obj = getattr(dev, section)
        for file_key, attr in mapping.items():
            value = getattr(obj, attr)
            doc[section][file_key] = angular_to_hz(value) if file_key.endswith("_hz") else value
    for section, cls in _PLAIN_SECTIONS.items():
        obj = getattr(dev, section)
        doc[section] = {f.name: getattr(obj, f.name) for f in fields(cls)}
    doc["backaction"] = {
        "pump_powers_w": list(dev.backaction.pump_powers_w),
        "freq_shift_hz": [angular_to_hz(v) for v in dev.backaction.freq_shift],
        "extra_loss_hz": [angular_to_hz(v) for v in dev.backaction.extra_loss],
    }
    return doc


def load_device_params(path: str | Path) -> DeviceParams:
    """Load and validate a JSON device file."""
    path = Path(path)
    if not path.exists():
        raise DeviceError(f"device file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DeviceError(f"device file {path} is not valid JSON: {exc}") from exc
    return device_from_dict(doc)


def save_device_params(dev: DeviceParams, path: str | Path):
    """Write DeviceParams in the canonical file form."""
    Path(path).write_text(json.dumps(device_to_dict(dev), indent=2, sort_keys=True) + "\n")


def paper_device_path() -> Path:
    """Path of the packaged reference device file."""
    return Path(resources.files("optoread").joinpath("data/device_paper.json"))


def default_paper_device() -> DeviceParams:
    """The reference parameter set shipped with the package."""
    return load_device_params(paper_device_path())
