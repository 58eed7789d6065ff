import json

import pytest

from optoread.device import (DeviceError, default_paper_device, device_from_dict,
                             device_to_dict, load_device_params, paper_device_path,
                             save_device_params)
from optoread.units import TWO_PI


@pytest.fixture(scope="module")
def dev():
    return default_paper_device()


@pytest.fixture()
def doc():
    return json.loads(paper_device_path().read_text())


def test_default_device_passes_validation(dev):
    dev.validate()


def test_derived_microwave_rates(dev):
    assert dev.transducer.kappa_e == pytest.approx(TWO_PI * 23.6e6, rel=1e-12)
    assert dev.transducer.eta_e == pytest.approx(0.517, abs=5e-4)


def test_derived_resonator_linewidth(dev):
    assert dev.qubit.kappa_re == pytest.approx(TWO_PI * 500e3, rel=1e-12)


def test_reference_values(dev):
    assert dev.transducer.omega_m == pytest.approx(TWO_PI * 5.19442e9, rel=1e-12)
    assert dev.qubit.chi == pytest.approx(TWO_PI * 512e3, rel=1e-12)
    assert dev.setup.eta_tod == 0.17
    assert dev.setup.line_attenuation_db == 74.5


def test_round_trip_serialization(dev, tmp_path):
    path = tmp_path / "device.json"
    save_device_params(dev, path)
    again = load_device_params(path)
    assert device_to_dict(again) == device_to_dict(dev)


def test_efficiency_out_of_range_rejected(doc):
    doc["setup"]["eta_fiber"] = 1.4
    with pytest.raises(DeviceError, match="eta_fiber"):
        device_from_dict(doc)


def test_missing_field_names_field(doc):
    del doc["transducer"]["kappa_m_hz"]
    with pytest.raises(DeviceError, match="kappa_m_hz"):
        device_from_dict(doc)


def test_unknown_field_rejected(doc):
    doc["qubit"]["kappa_bogus_hz"] = 1.0
    with pytest.raises(DeviceError, match="kappa_bogus_hz"):
        device_from_dict(doc)


def test_unknown_section_rejected(doc):
    doc["extra_section"] = {}
    with pytest.raises(DeviceError, match="extra_section"):
        device_from_dict(doc)


@pytest.mark.parametrize("section,field,bad", [
    ("transducer", "kappa_ee_hz", -1.0),
    ("transducer", "eta_o", 1.5),
    ("qubit", "chi_hz", 0.0),
    ("qubit", "t1_s", -1e-6),
    ("setup", "eta_od", 0.0),
    ("setup", "sideband_alpha", 0.9),
    ("noise", "excess_photons_ref", -5.0),
])
def test_single_field_perturbations_rejected(doc, section, field, bad):
    doc[section][field] = bad
    with pytest.raises(DeviceError):
        device_from_dict(doc)


def test_t2_star_bound(doc):
    doc["qubit"]["t2_star_s"] = 3 * doc["qubit"]["t1_s"]
    with pytest.raises(DeviceError, match="t2_star"):
        device_from_dict(doc)


def test_backaction_table_validation(doc):
    doc["backaction"]["freq_shift_hz"] = [0.0, 1e3, -2e3, -3e3]
    with pytest.raises(DeviceError, match="freq_shift"):
        device_from_dict(doc)


def test_missing_file_raises():
    with pytest.raises(DeviceError, match="not found"):
        load_device_params("/nonexistent/device.json")
