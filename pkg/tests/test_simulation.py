import math

import numpy as np
import pytest

from conftest import make_config
from src.channel import UserLocation, far_steering, near_steering
from src.codebooks import build_far_codebook, build_polar_codebook, threshold_distance
from src.simulation import (THREADS_ENV, Simulator, SweepReport, achievable_rate, db_to_linear, draw_user,
                            linear_to_db, reference_snr, run_distance_sweep, run_snr_sweep, scheme_role, trial_rng,
                            tx_power_for_snr, worker_count)

SMALL = make_config(16)
SMALL_SCHEMES = ["perfect-csi", "exhaustive", "two-phase", "far-field"]


def test_db_conversions():
    assert linear_to_db(100.0) == pytest.approx(20.0)
    assert db_to_linear(-72.0) == pytest.approx(10 ** -7.2)

def test_reference_snr(reference_cfg):
    expected = 1.0 * 10 ** -7.2 * 256 / (10.0 ** 2 * 1e-10)
    assert reference_snr(reference_cfg, 10.0) == pytest.approx(expected, rel=1e-12)
    assert reference_snr(reference_cfg, 20.0) == pytest.approx(reference_snr(reference_cfg, 10.0) / 4, rel=1e-12)

    with pytest.raises(ValueError):
        reference_snr(reference_cfg, 0.0)

def test_noiseless_link_has_no_reference_snr(reference_cfg):
    noiseless = reference_cfg.replace(noise_power=0.0)
    loc = UserLocation(0.1, 4.0)

    with pytest.raises(ValueError, match="noiseless"):
        reference_snr(noiseless, 4.0)
    with pytest.raises(ValueError, match="noiseless"):
        achievable_rate(loc, near_steering(loc, noiseless), noiseless)

@pytest.mark.parametrize("snr_db,distance", [(-10.0, 3.0), (0.0, 10.0), (20.0, 55.5)])
def test_tx_power_inverts_reference_snr(reference_cfg, snr_db, distance):
    power = tx_power_for_snr(reference_cfg, db_to_linear(snr_db), distance)
    assert reference_snr(reference_cfg.replace(tx_power=power), distance) == pytest.approx(db_to_linear(snr_db), rel=1e-12)

def test_achievable_rate(reference_cfg):
    loc = UserLocation(0.25, 1.0)
    b = near_steering(loc, reference_cfg)
    perfect = achievable_rate(loc, b, reference_cfg)

    assert perfect == pytest.approx(math.log2(1 + reference_snr(reference_cfg, 1.0)), rel=1e-12)
    assert achievable_rate(loc, far_steering(0.25, reference_cfg), reference_cfg) < perfect

    u = np.ones(256, dtype=complex) / 16
    orthogonal = u - np.vdot(b, u) * b
    orthogonal /= np.linalg.norm(orthogonal)
    assert achievable_rate(loc, orthogonal, reference_cfg) == pytest.approx(0.0, abs=1e-9)

def test_draw_user():
    g = np.random.default_rng(3)
    assert draw_user(g, 5.0, 0.6) == UserLocation(0.6, 5.0)

    users = [draw_user(g, (3.0, 103.0)) for _ in range(10_000)]
    assert abs(np.mean([u.theta for u in users])) < 0.02
    assert all(3.0 <= u.distance <= 103.0 for u in users)
    assert all(-1.0 <= u.theta <= 1.0 for u in users)

    with pytest.raises(ValueError):
        draw_user(g, (5.0, 1.0))

def test_trial_streams_are_independent_and_repeatable():
    a = trial_rng(7, 0, 3, 0).standard_normal(4)
    np.testing.assert_array_equal(a, trial_rng(7, 0, 3, 0).standard_normal(4))
    assert not np.array_equal(a, trial_rng(7, 0, 4, 0).standard_normal(4))
    assert not np.array_equal(a, trial_rng(7, 1, 3, 0).standard_normal(4))
    assert scheme_role("two-phase") != scheme_role("exhaustive")
    assert scheme_role("far-field") >= 1

def test_worker_count(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert worker_count() == 3

    monkeypatch.setenv(THREADS_ENV, "0")
    assert worker_count() >= 1

    monkeypatch.setenv(THREADS_ENV, "many")
    assert worker_count() >= 1

def test_sweep_report_rejects_zero_trials():
    with pytest.raises(ValueError):
        SweepReport("snr", [0.0], ["exhaustive"], 0, 0)

def test_empty_sweeps_are_rejected():
    simulator = Simulator(SMALL, SMALL_SCHEMES, workers=1)
    with pytest.raises(ValueError):
        simulator.run_snr_sweep([], 10, 0)
    with pytest.raises(ValueError):
        simulator.run_distance_sweep([], 10, 0)
    with pytest.raises(ValueError):
        simulator.run_distance_sweep([5.0, -1.0], 10, 0)
    with pytest.raises(ValueError):
        Simulator(SMALL, [], workers=1)

def test_snr_sweep_statistics():
    snr_points = [-5.0, 10.0, 25.0]
    report = run_snr_sweep(SMALL, snr_points, 40, SMALL_SCHEMES, seed=11, workers=1)

    assert report.values == snr_points
    assert report.metadata["user_distance_m"] == "10.0"
    for point, snr_db in enumerate(snr_points):
        assert report.rate["perfect-csi"][point] == pytest.approx(math.log2(1 + db_to_linear(snr_db)), rel=1e-9)
        assert report.success_rate["perfect-csi"][point] == 1.0
        assert report.overhead["exhaustive"][point] == 16 * 6
        assert report.overhead["two-phase"][point] == 16 + 3 * 6
        assert report.overhead["far-field"][point] == 16

    for scheme in SMALL_SCHEMES:
        assert all(0.0 <= p <= 1.0 for p in report.success_rate[scheme])
        assert all(r >= 0.0 for r in report.rate[scheme])

def test_success_rate_matches_trial_records():
    report = run_distance_sweep(SMALL, [0.5, 2.0, 8.0], 30, SMALL_SCHEMES, seed=2, workers=2)

    for point, records in enumerate(report.records):
        assert len(records) == 30
        for scheme in SMALL_SCHEMES:
            successes = sum(1 for record in records if record.selected[scheme] == record.oracle)
            assert report.success_rate[scheme][point] == successes / len(records)
            assert report.rate[scheme][point] == float(np.mean([record.rates[scheme] for record in records]))

def test_sweeps_are_deterministic_across_worker_counts():
    first = run_distance_sweep(SMALL, [1.0, 4.0], 25, SMALL_SCHEMES, seed=9, workers=1)
    second = run_distance_sweep(SMALL, [1.0, 4.0], 25, SMALL_SCHEMES, seed=9, workers=4)

    assert first.success_rate == second.success_rate
    assert first.rate == second.rate
    assert [[r.truth for r in point] for point in first.records] == [[r.truth for r in point] for point in second.records]

def test_adding_a_scheme_keeps_other_schemes_noise():
    alone = run_snr_sweep(SMALL, [0.0], 30, ["two-phase"], seed=4, workers=1)
    together = run_snr_sweep(SMALL, [0.0], 30, ["far-field", "two-phase"], seed=4, workers=1)
    assert alone.rate["two-phase"] == together.rate["two-phase"]

def test_progress_counts_every_trial():
    ticks = []
    Simulator(SMALL, ["far-field"], workers=2, progress=lambda done, total: ticks.append((done, total))).run_snr_sweep([0.0, 5.0], 7, 0)

    assert len(ticks) == 14
    assert sorted(done for done, _ in ticks) == list(range(1, 15))
    assert {total for _, total in ticks} == {14}


HIGH_SNR_SCHEMES = ["perfect-csi", "exhaustive", "two-phase", "two-phase-k1", "far-field"]

def high_snr_sweep(distance: float):
    cfg = make_config(128)
    simulator = Simulator(cfg, HIGH_SNR_SCHEMES, build_far_codebook(cfg), build_polar_codebook(cfg))
    return simulator.run_snr_sweep([20.0], 500, seed=2024, distance=distance)

@pytest.fixture(scope="module")
def high_snr_report():
    return high_snr_sweep(10.0)

@pytest.fixture(scope="module")
def near_field_high_snr_report():
    return high_snr_sweep(1.0)

def assert_rates_ordered(report, schemes):
    rates = [report.rate[scheme][0] for scheme in schemes]
    for better, worse in zip(rates, rates[1:]):
        assert better >= worse * 0.99

@pytest.mark.slow
def test_two_phase_success_close_to_exhaustive_at_high_snr(high_snr_report):
    assert abs(high_snr_report.success_rate["two-phase"][0] - high_snr_report.success_rate["exhaustive"][0]) <= 0.05

@pytest.mark.slow
def test_rate_ordering_inside_threshold_distance(near_field_high_snr_report):
    assert threshold_distance(make_config(128)) > 1.0
    assert_rates_ordered(near_field_high_snr_report, HIGH_SNR_SCHEMES)
    assert near_field_high_snr_report.rate["two-phase"][0] > near_field_high_snr_report.rate["far-field"][0] * 1.05

@pytest.mark.slow
def test_polar_schemes_track_far_field_beyond_threshold_distance(high_snr_report):
    # N = 128 puts a 10 m user past Z_delta, so the best codeword is always on the s = 0 layer
    assert threshold_distance(make_config(128)) < 10.0
    records = high_snr_report.records[0]
    assert np.mean([record.oracle.distance_index == 0 for record in records]) >= 0.99

    assert_rates_ordered(high_snr_report, ["perfect-csi", "exhaustive", "two-phase", "two-phase-k1"])
    for scheme in ("exhaustive", "two-phase", "two-phase-k1"):
        assert high_snr_report.rate[scheme][0] == pytest.approx(high_snr_report.rate["far-field"][0], rel=0.02)

@pytest.mark.slow
def test_distance_sweep_trends():
    cfg = make_config(128)
    schemes = ["perfect-csi", "exhaustive", "two-phase", "far-field"]
    distances = [3.0, 10.0, 30.0, 60.0, 103.0]
    report = run_distance_sweep(cfg, distances, 300, schemes, seed=31)

    assert report.metadata["tx_power_dbm"] == "30.0"
    for scheme in schemes:
        rates = report.rate[scheme]
        for near, far in zip(rates, rates[1:]):
            assert far <= near * 1.02

@pytest.mark.slow
def test_distant_users_get_the_same_rate_from_every_scheme_with_clean_pilots():
    cfg = make_config(128, tx_power=100.0) # 50 dBm
    report = run_distance_sweep(cfg, [103.0], 300, ["exhaustive", "two-phase", "far-field"], seed=31)

    for scheme in ("exhaustive", "two-phase"):
        assert report.rate[scheme][0] == pytest.approx(report.rate["far-field"][0], rel=0.02)

@pytest.mark.slow
def test_two_phase_beats_ls_estimation_at_moderate_snr():
    report = run_snr_sweep(make_config(128), [15.0], 300, ["two-phase", "ls-estimation"], seed=5)
    assert report.rate["two-phase"][0] > report.rate["ls-estimation"][0] * 1.2
