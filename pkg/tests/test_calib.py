import numpy as np
import pytest

from optoread.calib import (StarkDataset, VnaRecord, load_stark_csv,
                            photons_per_watt_at_input, scale_thermal_noise,
                            stark_attenuation, synthetic_stark_dataset,
                            synthetic_vna_record, thermal_calibration, vna_efficiency)
from optoread.chain import ChainConfig, ReadoutPath, noise_budget
from optoread.device import default_paper_device
from optoread.rng import SeedSpec, normals
from optoread.transducer import PumpConfig, conversion_efficiency, efficiency_spectrum
from optoread.units import HBAR, TWO_PI, dbm_to_watts, watts_to_dbm


@pytest.fixture(scope="module")
def dev():
    return default_paper_device()


def test_vna_zero_cross_terms():
    rec = VnaRecord(s_eo=np.zeros(5), s_oe=np.zeros(5), s_ee=np.ones(5),
                    s_oo=np.ones(5), two_alpha=1.3)
    assert np.all(vna_efficiency(rec) == 0.0)


def test_vna_inverts_forward_model(dev):
    grid = dev.transducer.omega_p + TWO_PI * np.linspace(-10e6, 10e6, 101)
    eta_true = efficiency_spectrum(dev, PumpConfig(3.1e-6), grid).eta
    rec = synthetic_vna_record(eta_true, two_alpha=1.3, gain_e=17.3, gain_o=0.021)
    recovered = vna_efficiency(rec)
    assert np.allclose(recovered, eta_true, rtol=1e-10)


def test_vna_operating_fixture(dev):
    eta_true = np.array([conversion_efficiency(dev, PumpConfig(3.1e-6),
                                               dev.transducer.omega_p)])
    rec = synthetic_vna_record(eta_true, two_alpha=1.3)
    eta_db = 10 * np.log10(vna_efficiency(rec)[0])
    assert eta_db == pytest.approx(-24.8, abs=0.3)


def test_vna_zero_denominator_marks_point():
    rec = VnaRecord(s_eo=np.ones(3), s_oe=np.ones(3),
                    s_ee=np.array([1.0, 0.0, 1.0]), s_oo=np.ones(3))
    eta = vna_efficiency(rec)
    assert np.isnan(eta[1])
    assert np.isfinite(eta[0]) and np.isfinite(eta[2])


def test_vna_record_validation():
    with pytest.raises(ValueError):
        VnaRecord(s_eo=np.ones(3), s_oe=np.ones(4), s_ee=np.ones(3), s_oo=np.ones(3))
    with pytest.raises(ValueError):
        VnaRecord(s_eo=-np.ones(3), s_oe=np.ones(3), s_ee=np.ones(3), s_oo=np.ones(3))


@pytest.mark.parametrize("attenuation_db", [60.0, 70.0, 74.5, 80.0])
def test_stark_round_trip_with_noise(dev, attenuation_db):
    powers = 1e-3 * 10 ** (np.linspace(-45.0, -25.0, 24) / 10.0)
    eps = normals(SeedSpec(1234, int(attenuation_db * 10)), 0, len(powers))
    ds = synthetic_stark_dataset(dev, attenuation_db, powers,
                                 noise_fraction=0.01, noise_values=eps)
    recovered, sigma = stark_attenuation(dev, ds)
    assert recovered == pytest.approx(attenuation_db, abs=0.5)
    assert sigma < 0.5


def test_stark_noiseless_exact(dev):
    powers = 1e-3 * 10 ** (np.linspace(-45.0, -25.0, 12) / 10.0)
    ds = synthetic_stark_dataset(dev, 74.5, powers)
    recovered, _ = stark_attenuation(dev, ds)
    assert recovered == pytest.approx(74.5, abs=0.01)


def test_stark_power_doubling_shifts_3db(dev):
    powers = 1e-3 * 10 ** (np.linspace(-45.0, -25.0, 12) / 10.0)
    ds = synthetic_stark_dataset(dev, 74.5, powers)
    doubled = StarkDataset(powers_rt_w=2.0 * ds.powers_rt_w, qubit_freqs=ds.qubit_freqs)
    base, _ = stark_attenuation(dev, ds)
    shifted, _ = stark_attenuation(dev, doubled)
    assert shifted - base == pytest.approx(10 * np.log10(2.0), abs=1e-9)


def test_stark_offset_applied(dev):
    powers = 1e-3 * 10 ** (np.linspace(-45.0, -25.0, 12) / 10.0)
    ds = synthetic_stark_dataset(dev, 73.8, powers)
    with_offset, _ = stark_attenuation(dev, ds, extra_offset_db=0.7)
    assert with_offset == pytest.approx(74.5, abs=0.01)


def test_stark_csv_round_trip(dev, tmp_path):
    powers = 1e-3 * 10 ** (np.linspace(-40.0, -30.0, 8) / 10.0)
    ds = synthetic_stark_dataset(dev, 70.0, powers)
    path = tmp_path / "stark.csv"
    lines = ["power_dbm,qubit_freq_hz"]
    for p, f in zip(ds.powers_rt_w, ds.qubit_freqs):
        lines.append(f"{watts_to_dbm(p):.10f},{f / TWO_PI:.6f}")
    path.write_text("\n".join(lines) + "\n")
    loaded = load_stark_csv(path)
    recovered, _ = stark_attenuation(dev, loaded)
    assert recovered == pytest.approx(70.0, abs=0.01)


def test_stark_dataset_validation():
    with pytest.raises(ValueError):
        StarkDataset(powers_rt_w=np.array([1e-6, 1e-6, 2e-6]),
                     qubit_freqs=np.ones(3))
    with pytest.raises(ValueError):
        StarkDataset(powers_rt_w=np.array([1e-6, 2e-6]), qubit_freqs=np.ones(2))


def test_thermal_calibration_chain():
    assert thermal_calibration(-22.7, 74.5, 56.7) == pytest.approx(-153.9, abs=0.05)
    assert thermal_calibration(-22.7, 74.5, 0.0) == pytest.approx(-97.2, abs=1e-12)
    base = thermal_calibration(-22.7, 74.5, 56.7)
    assert thermal_calibration(-22.7, 84.5, 56.7) == pytest.approx(base - 10.0, abs=1e-12)


def test_thermal_calibration_db_arithmetic_properties():
    rng = np.random.default_rng(8)
    for _ in range(200):
        tone, att, snr_db = rng.uniform(-60, 0), rng.uniform(40, 90), rng.uniform(0, 80)
        value = thermal_calibration(tone, att, snr_db)
        assert value == pytest.approx(tone - att - snr_db, abs=1e-12)
        # order of the two subtractions is immaterial
        assert value == pytest.approx(thermal_calibration(tone - att, 0.0, snr_db), abs=1e-12)
    with pytest.raises(ValueError):
        thermal_calibration(float("nan"), 74.5, 56.7)


def test_scale_thermal_noise_cancellation():
    nep = dbm_to_watts(-153.9)
    same, scale = scale_thermal_noise(nep, 0.01, 0.01)
    assert same == nep and scale == 1.0
    same, scale = scale_thermal_noise(nep, 0.01, 0.02)
    assert same == nep
    assert scale == pytest.approx(2.0, rel=1e-12)
    with pytest.raises(ValueError):
        scale_thermal_noise(nep, 0.0, 0.01)


def test_thermal_referral_consistency_with_budget(dev):
    # budget thermal photons == NEP / (hbar omega_e B) within 1%
    cfg = ChainConfig(path=ReadoutPath.OPTICAL,
                      readout_power_at_resonator=dbm_to_watts(-105.8),
                      pulse_duration=14e-6, integration_window=13.2e-6,
                      rest_time=250e-6, pump=PumpConfig(15.5e-6), setup=dev.setup,
                      omega_signal=dev.qubit.omega_r, excess_noise_photons=0.0,
                      eta_t_override=0.01)
    budget = noise_budget(dev, cfg, eta_t_at_signal=0.01)
    nep_w = dbm_to_watts(thermal_calibration(-22.7, 74.5, 56.7))
    expected = nep_w / (HBAR * dev.qubit.omega_r * dev.noise.thermal_bandwidth_hz)
    assert budget.thermal_photons == pytest.approx(expected, rel=0.01)


def test_photons_per_watt_matches_eq(dev):
    q = dev.qubit
    expected = 4.0 / (HBAR * q.omega_r_dressed) * q.kappa_ree / q.kappa_re**2
    assert photons_per_watt_at_input(dev) == expected
