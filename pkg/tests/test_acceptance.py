"""Reference operating points of the figure presets (slow)."""

import pytest

from engine import Scenario, build, replicate, run
from lora_phy import SpreadingFactor
from oracle import aloha_check, fuzz_disagreements
from sweep import SweepPoint, SweepSpec, emit_figures_data, figure_calibration, preset, run_sweep

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def calibrated():
    return figure_calibration(Scenario(duration_s=600.0, replications=10, base_seed=1))


def point(base, h, theta, gain, period=60.0):
    return SweepSpec(base=base).scenario_for(SweepPoint(h, theta, gain, period))


def test_low_orbit_gain10_all_dr5(calibrated):
    for theta in (5.0, 10.0, 15.0):
        agg = replicate(point(calibrated, 200.0, theta, 10.0))
        assert agg.dr_distribution == pytest.approx((0, 0, 0, 0, 0, 1.0))
        assert agg.avg_data_rate_bps == (5470.0, 0.0)


def test_high_orbit_gain10_modal_dr2(calibrated):
    agg = replicate(point(calibrated, 700.0, 5.0, 10.0))
    shares = agg.dr_distribution
    assert max(range(6), key=lambda dr: shares[dr]) == 2


def test_prr_bands_gain5(calibrated):
    for h in (200.0, 300.0):
        assert replicate(point(calibrated, h, 5.0, 5.0)).prr[0] >= 0.98
    assert replicate(point(calibrated, 700.0, 5.0, 5.0)).prr[0] == pytest.approx(0.69, abs=0.10)
    assert replicate(point(calibrated, 700.0, 15.0, 5.0)).prr[0] <= 0.15


def test_prr_falls_with_offered_load(calibrated):
    prrs = [replicate(point(calibrated, 700.0, 10.0, 10.0, p)).prr[0] for p in (60.0, 30.0, 10.0)]
    assert prrs[0] > prrs[1] > prrs[2]


@pytest.mark.parametrize("h", [500.0, 700.0])
def test_prr_falls_with_density(calibrated, h):
    base = point(calibrated, h, 10.0, 5.0)
    prrs = [replicate(base.replace(density_per_km2=rho)).prr[0] for rho in (0.005, 0.01, 0.04)]
    assert prrs[0] >= prrs[1] >= prrs[2]
    assert prrs[0] - prrs[2] > 0.2


@pytest.mark.parametrize("h", [500.0, 700.0])
def test_prr_falls_with_beamwidth(calibrated, h):
    prrs = [replicate(point(calibrated, h, theta, 5.0)).prr[0] for theta in (5.0, 10.0, 15.0)]
    assert prrs[0] >= prrs[1] >= prrs[2]
    assert prrs[0] - prrs[2] > 0.2


def test_more_devices_with_wider_beam(calibrated):
    counts = [len(build(point(calibrated, 700.0, theta, 5.0)).devices) for theta in (5.0, 10.0, 15.0)]
    assert counts[0] < counts[1] < counts[2]
    assert counts[2] == 267


def test_oracle_fuzz_equivalence():
    assert fuzz_disagreements(seed=2024, n_traces=1000, max_packets=20) == 0


@pytest.mark.parametrize("n,sf,period", [
    (5, SpreadingFactor.SF8, 60.0),
    (20, SpreadingFactor.SF10, 60.0),
    (50, SpreadingFactor.SF12, 30.0),
])
def test_aloha_matches_closed_form(n, sf, period):
    check = aloha_check(n, sf, period, replications=50, base=Scenario(duration_s=600.0, base_seed=1))
    assert check.passed, check


def test_preset_output_is_reproducible(tmp_path):
    base = Scenario(duration_s=120.0, replications=2, base_seed=5)
    spec = preset("gain5", base)[0]
    emit_figures_data(run_sweep(spec), "gain5", tmp_path / "a")
    emit_figures_data(run_sweep(spec, workers=2), "gain5", tmp_path / "b")
    for name in ("dr_distribution_g5.csv", "avg_rate_g5.csv", "prr_g5.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_single_run_matches_its_replication(calibrated):
    scenario = point(calibrated, 500.0, 10.0, 5.0)
    assert replicate(scenario).runs[3] == run(build(scenario, 3))
