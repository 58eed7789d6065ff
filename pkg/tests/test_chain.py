import math

import numpy as np
import pytest

from optoread.chain import (ChainConfig, ReadoutPath, added_shot_noise, chain_snr,
                            detected_signal_photons, duty_cycle_average_power,
                            generate_iq, generate_shots, noise_budget, resolve_eta_t,
                            shots_to_arrays, signal_photons, snr,
                            thermal_noise_equivalent_power, with_pump_power)
from optoread.device import default_paper_device
from optoread.estimate import fidelity_report, fidelity_vs_snr, lda_boundary
from optoread.qubit import NO_SWITCHING, DemolitionConfig, QubitState, SwitchingConfig
from optoread.rng import SeedSpec
from optoread.transducer import PumpConfig
from optoread.units import dbm_to_watts, watts_to_dbm


@pytest.fixture(scope="module")
def dev():
    return default_paper_device()


def microwave_config(dev):
    return ChainConfig(path=ReadoutPath.MICROWAVE_ONLY,
                       readout_power_at_resonator=dbm_to_watts(-105.8),
                       pulse_duration=14e-6, integration_window=13.2e-6,
                       rest_time=250e-6, pump=PumpConfig(0.0), setup=dev.setup,
                       omega_signal=dev.qubit.omega_r)


def optical_config(dev, excess=None, eta_t=0.02):
    if excess is None:
        excess = dev.noise.excess_photons_ref
    return ChainConfig(path=ReadoutPath.OPTICAL,
                       readout_power_at_resonator=dbm_to_watts(-105.8),
                       pulse_duration=14e-6, integration_window=13.2e-6,
                       rest_time=250e-6, pump=PumpConfig(31e-6), setup=dev.setup,
                       omega_signal=dev.qubit.omega_r,
                       excess_noise_photons=excess, eta_t_override=eta_t)


def test_added_shot_noise_formula_limit():
    assert added_shot_noise(1.0, 1.0, 1.0) == 2.0


def test_added_shot_noise_paper_point():
    value = added_shot_noise(0.17, 0.43, 0.02)
    assert value == pytest.approx(2.0 / (0.17 * 0.43 * 0.02), rel=1e-12)
    assert value == pytest.approx(1.37e3, rel=5e-3)


def test_added_shot_noise_inverse_linearity():
    assert added_shot_noise(0.17, 0.43, 0.01) == pytest.approx(
        2 * added_shot_noise(0.17, 0.43, 0.02), rel=1e-12)


def test_added_shot_noise_rejects_nonpositive():
    for args in ((0.0, 0.5, 0.5), (0.5, -1.0, 0.5), (0.5, 0.5, 0.0)):
        with pytest.raises(ValueError):
            added_shot_noise(*args)


def test_thermal_nep_from_tone():
    p_in = dbm_to_watts(-97.2)
    nep = thermal_noise_equivalent_power(p_in, 10 ** (56.7 / 10))
    assert watts_to_dbm(nep) == pytest.approx(-153.9, abs=1e-9)
    assert thermal_noise_equivalent_power(p_in, 1.0) == p_in
    ten_db = thermal_noise_equivalent_power(p_in, 10.0)
    assert watts_to_dbm(p_in) - watts_to_dbm(ten_db) == pytest.approx(10.0, abs=1e-12)


def test_microwave_budget_total(dev):
    budget = noise_budget(dev, microwave_config(dev), eta_t_at_signal=1.0)
    assert budget.total_photons == pytest.approx(17.0, rel=1e-12)
    assert budget.shot_photons == 0.0
    assert budget.thermal_photons == 0.0


def test_optical_budget_total_at_default_excess(dev):
    cfg = optical_config(dev)
    budget = noise_budget(dev, cfg, eta_t_at_signal=0.02)
    assert budget.total_photons == pytest.approx(1e4, rel=0.3)
    assert budget.total_photons == pytest.approx(1e4, rel=1e-4)  # anchored by construction


def test_optical_budget_shot_dominates_without_excess(dev):
    cfg = optical_config(dev, excess=0.0)
    budget = noise_budget(dev, cfg, eta_t_at_signal=0.02)
    assert budget.shot_photons == pytest.approx(1.37e3, rel=5e-3)
    assert budget.thermal_photons < 0.01 * budget.shot_photons
    assert budget.total_photons == pytest.approx(budget.shot_photons, rel=1e-3)


def test_budget_additivity_random_configs(dev):
    rng = np.random.default_rng(3)
    for _ in range(200):
        excess = rng.uniform(0.0, 1e5)
        eta_t = rng.uniform(1e-4, 1.0)
        cfg = optical_config(dev, excess=excess, eta_t=eta_t)
        budget = noise_budget(dev, cfg, eta_t_at_signal=eta_t)
        parts = (budget.shot_photons, budget.thermal_photons,
                 budget.amplifier_photons, budget.excess_photons)
        assert all(p >= 0 for p in parts)
        assert budget.total_photons == pytest.approx(sum(parts), rel=1e-15)


def test_signal_photons_operating_point(dev):
    cfg = microwave_config(dev)
    n = signal_photons(cfg)
    assert n == pytest.approx(1.0e5, rel=0.02)
    zero = ChainConfig(path=cfg.path, readout_power_at_resonator=0.0,
                       pulse_duration=cfg.pulse_duration,
                       integration_window=cfg.integration_window,
                       rest_time=cfg.rest_time, pump=cfg.pump, setup=cfg.setup,
                       omega_signal=cfg.omega_signal)
    assert signal_photons(zero) == 0.0
    double = ChainConfig(path=cfg.path,
                         readout_power_at_resonator=cfg.readout_power_at_resonator,
                         pulse_duration=2 * cfg.pulse_duration,
                         integration_window=2 * cfg.integration_window,
                         rest_time=cfg.rest_time, pump=cfg.pump, setup=cfg.setup,
                         omega_signal=cfg.omega_signal)
    assert signal_photons(double) == pytest.approx(2 * n, rel=1e-15)


def test_snr_values():
    assert snr(1.1e5, 17.0) == pytest.approx(math.sqrt(1.1e5 / 17.0), rel=1e-15)
    assert snr(1.1e5, 17.0) == pytest.approx(80.0, abs=1.0)
    assert snr(1.1e5, 1e4) == pytest.approx(3.3, abs=0.05)
    assert snr(123.0, 123.0) == 1.0


def test_snr_ratio_between_operating_points(dev):
    snr_mw, _ = chain_snr(dev, microwave_config(dev))
    snr_opt, _ = chain_snr(dev, optical_config(dev))
    assert 20.0 <= snr_mw / snr_opt <= 30.0


def test_duty_cycle_average_power():
    duty, p_avg = duty_cycle_average_power(31e-6, 14e-6, 264e-6)
    assert duty == pytest.approx(0.0530, abs=2e-4)
    assert p_avg == pytest.approx(1.64e-6, abs=0.02e-6)
    assert duty_cycle_average_power(5.0, 1e-6, 1e-6) == (1.0, 5.0)
    assert duty_cycle_average_power(0.0, 1e-6, 2e-6)[1] == 0.0
    with pytest.raises(ValueError):
        duty_cycle_average_power(1.0, 2e-6, 1e-6)


def test_photon_bookkeeping(dev):
    cfg = optical_config(dev)
    eta_t = resolve_eta_t(dev, cfg)
    detected = detected_signal_photons(cfg, eta_t)
    expected = signal_photons(cfg) * eta_t * dev.setup.eta_od
    assert detected == pytest.approx(expected, rel=1e-12)


def test_eta_t_override_and_model_resolution(dev):
    cfg = optical_config(dev)
    assert resolve_eta_t(dev, cfg) == 0.02
    cfg_model = optical_config(dev, eta_t=None)
    eta_model = resolve_eta_t(dev, cfg_model)
    assert 0.001 < eta_model < 0.02  # transducer model at the readout frequency


def test_generate_shots_reproducible(dev):
    cfg = microwave_config(dev)
    demo = DemolitionConfig()
    seed = SeedSpec(31337, 4)
    a = generate_shots(dev, cfg, demo, 500, QubitState.GROUND, seed)
    b = generate_shots(dev, cfg, demo, 500, QubitState.GROUND, seed)
    assert a == b
    iq, labels = shots_to_arrays(a)
    assert iq.shape == (500, 2)
    assert np.all(labels == 0)
    assert len({shot.index for shot in a}) == 500


def test_generate_iq_chunk_invariance(dev):
    seed = SeedSpec(999, 2)
    switching = SwitchingConfig(0.2, 0.2)
    mu0, mu1 = -1.5 + 0j, 1.5 + 0j
    i_all, q_all, m_all = generate_iq(mu0, mu1, 400, QubitState.EXCITED, seed, switching)
    i_a, q_a, m_a = generate_iq(mu0, mu1, 150, QubitState.EXCITED, seed, switching)
    i_b, q_b, m_b = generate_iq(mu0, mu1, 250, QubitState.EXCITED, seed, switching,
                                start_index=150)
    assert np.array_equal(i_all, np.concatenate([i_a, i_b]))
    assert np.array_equal(q_all, np.concatenate([q_a, q_b]))
    assert np.array_equal(m_all, np.concatenate([m_a, m_b]))


def test_noiseless_limit_perfect_fidelity(dev):
    # vanishing added noise: clusters collapse to points and F = 1
    seed = SeedSpec(5150, 0)
    snr_huge = 1e6
    i0, q0, _ = generate_iq(-snr_huge / 2 + 0j, snr_huge / 2 + 0j, 2000,
                            QubitState.GROUND, seed.substream("g"), NO_SWITCHING)
    i1, q1, _ = generate_iq(-snr_huge / 2 + 0j, snr_huge / 2 + 0j, 2000,
                            QubitState.EXCITED, seed.substream("e"), NO_SWITCHING)
    iq0 = np.column_stack([i0, q0])
    iq1 = np.column_stack([i1, q1])
    report = fidelity_report(iq0, iq1, lda_boundary(iq0, iq1))
    assert report.fidelity == 1.0
    assert np.std(i0) / snr_huge < 1e-3  # clusters are points on the SNR scale


def test_microwave_fixture_fidelity(dev):
    cfg = microwave_config(dev)
    demo = DemolitionConfig()
    seed = SeedSpec(617, 0)
    shots0 = generate_shots(dev, cfg, demo, 10_000, QubitState.GROUND, seed.substream("g"))
    shots1 = generate_shots(dev, cfg, demo, 10_000, QubitState.EXCITED, seed.substream("e"))
    report = fidelity_report(shots0, shots1, lda_boundary(shots0, shots1))
    assert report.fidelity == pytest.approx(0.87, abs=0.02)
    assert report.snr == pytest.approx(80.0, abs=8.0)


def test_optical_fixture_fidelity(dev):
    cfg = optical_config(dev)
    demo = DemolitionConfig()
    seed = SeedSpec(618, 0)
    shots0 = generate_shots(dev, cfg, demo, 10_000, QubitState.GROUND, seed.substream("g"))
    shots1 = generate_shots(dev, cfg, demo, 10_000, QubitState.EXCITED, seed.substream("e"))
    report = fidelity_report(shots0, shots1, lda_boundary(shots0, shots1))
    assert report.fidelity == pytest.approx(0.81, abs=0.03)
    assert report.snr == pytest.approx(3.3, abs=0.5)


def test_closed_loop_matches_analytic_fidelity_light():
    # two SNR points; the acceptance suite runs the full five-point version
    seed = SeedSpec(20240601, 77)
    for target_snr in (1.0, 3.0):
        mu0, mu1 = -target_snr / 2 + 0j, target_snr / 2 + 0j
        i0, q0, _ = generate_iq(mu0, mu1, 100_000, QubitState.GROUND,
                                seed.substream(f"g{target_snr}"), NO_SWITCHING)
        i1, q1, _ = generate_iq(mu0, mu1, 100_000, QubitState.EXCITED,
                                seed.substream(f"e{target_snr}"), NO_SWITCHING)
        iq0 = np.column_stack([i0, q0])
        iq1 = np.column_stack([i1, q1])
        report = fidelity_report(iq0, iq1, lda_boundary(iq0, iq1))
        assert report.fidelity == pytest.approx(fidelity_vs_snr(target_snr), abs=0.005)


def test_chain_config_validation(dev):
    with pytest.raises(ValueError, match="integration window"):
        ChainConfig(path=ReadoutPath.OPTICAL, readout_power_at_resonator=1e-14,
                    pulse_duration=10e-6, integration_window=11e-6, rest_time=0.0,
                    pump=PumpConfig(1e-6), setup=dev.setup,
                    omega_signal=dev.qubit.omega_r)
    with pytest.raises(ValueError, match="rest time"):
        ChainConfig(path=ReadoutPath.OPTICAL, readout_power_at_resonator=1e-14,
                    pulse_duration=10e-6, integration_window=9e-6, rest_time=-1.0,
                    pump=PumpConfig(1e-6), setup=dev.setup,
                    omega_signal=dev.qubit.omega_r)


def test_with_pump_power_helper(dev):
    cfg = optical_config(dev)
    cfg2 = with_pump_power(cfg, 62e-6)
    assert cfg2.pump.power == 62e-6
    assert cfg2.integration_window == cfg.integration_window
