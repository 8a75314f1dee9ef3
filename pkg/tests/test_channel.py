import logging
import math

import numpy as np
import pytest

from channel import (
    RURAL_LOS_SHADOWING,
    ChannelParams,
    assign_sf,
    draw_shadowing,
    fspl,
    link_budget,
    scintillation_loss,
)
from errors import ConfigError, GeometryError
from geometry import GroundPosition, SatelliteConfig, coverage_radius, locate
from lora_phy import RadioParams, SpreadingFactor, sensitivity


def overhead(altitude_km):
    return locate(SatelliteConfig(altitude_km, 5), GroundPosition(0.0))


def test_fspl_examples():
    assert fspl(200, 868e6) == pytest.approx(137.24, abs=0.01)
    assert fspl(1931.6, 868e6) == pytest.approx(156.94, abs=0.01)


def test_fspl_doubling_distance():
    assert fspl(400, 868e6) - fspl(200, 868e6) == pytest.approx(20 * math.log10(2), abs=1e-9)


def test_fspl_rejects_non_positive_distance():
    with pytest.raises(GeometryError):
        fspl(0, 868e6)


def test_scintillation_examples():
    assert scintillation_loss(4e9, 1.1) == pytest.approx(1.1 / math.sqrt(2))
    assert scintillation_loss(868e6, 1.1) == pytest.approx(7.69, abs=0.01)


def test_scintillation_decreasing_in_frequency():
    losses = [scintillation_loss(f, 1.1) for f in np.linspace(100e6, 10e9, 30)]
    assert all(a > b for a, b in zip(losses, losses[1:]))


def test_scintillation_warns_above_validity_latitude(caplog):
    with caplog.at_level(logging.WARNING):
        scintillation_loss(868e6, 1.1, latitude_deg=45.0)
    assert "only valid up to 20" in caplog.text


def test_shadowing_zero_sigma():
    rng = np.random.default_rng(0)
    assert draw_shadowing(rng, 0.0) == 0.0
    assert not np.any(draw_shadowing(rng, 0.0, size=10))


def test_zero_sigma_still_advances_the_stream():
    zero_first = np.random.default_rng(11)
    draw_shadowing(zero_first, 0.0)
    after_zero = draw_shadowing(zero_first, 1.79)

    plain = np.random.default_rng(11)
    draw_shadowing(plain, 1.79)
    assert after_zero == draw_shadowing(plain, 1.79)


def test_zero_sigma_table_entry_keeps_other_draws():
    elevations = np.radians([30.0, 60.0, 80.0])
    flat = ChannelParams(shadowing_table=((10.0, 1.0), (90.0, 1.0)))
    dip = ChannelParams(shadowing_table=((10.0, 1.0), (55.0, 1.0), (60.0, 0.0), (65.0, 1.0), (90.0, 1.0)))

    def draws(channel):
        rng = np.random.default_rng(4)
        return [draw_shadowing(rng, channel.shadowing_sigma(e)) for e in elevations]

    a, b = draws(flat), draws(dip)
    assert b[1] == 0.0
    assert (a[0], a[2]) == (b[0], b[2])


@pytest.mark.parametrize("altitude_km", [200, 300, 400, 500, 600, 700])
@pytest.mark.parametrize("gains", [(0.0, 5.0), (0.0, 10.0)])
def test_narrow_beam_without_shadowing_spans_one_sf_step(altitude_km, gains):
    sat = SatelliteConfig(altitude_km, 5)
    channel = ChannelParams(shadowing_sigma_db=0.0)
    offsets = np.linspace(0.0, coverage_radius(sat), 25)
    ranks = [
        13 if sf is None else int(sf)
        for sf in (
            assign_sf(link_budget(locate(sat, GroundPosition(float(d))), channel, RadioParams(), gains))
            for d in offsets
        )
    ]
    assert max(ranks) - min(ranks) <= 1


def test_shadowing_statistics():
    draws = draw_shadowing(np.random.default_rng(5), 1.79, size=100_000)
    assert draws.std() == pytest.approx(1.79, rel=0.02)
    assert draws.mean() == pytest.approx(0.0, abs=0.02)


def test_shadowing_table_interpolates_in_elevation():
    channel = ChannelParams(shadowing_table=RURAL_LOS_SHADOWING)
    assert channel.shadowing_sigma(math.radians(15)) == pytest.approx((1.79 + 1.14) / 2)
    assert channel.shadowing_sigma(math.radians(5)) == pytest.approx(1.79)
    assert channel.shadowing_sigma(math.radians(90)) == pytest.approx(0.72)
    assert ChannelParams().shadowing_sigma(math.radians(45)) == 1.79


def test_shadowing_table_must_be_ascending():
    with pytest.raises(ConfigError):
        ChannelParams(shadowing_table=((20.0, 1.0), (10.0, 1.0)))


def test_link_budget_examples():
    radio = RadioParams()
    budget = link_budget(overhead(200), ChannelParams(), radio, (0.0, 10.0))
    assert budget.fspl_db == pytest.approx(137.24, abs=0.01)
    assert budget.rx_power_dbm == pytest.approx(-120.93, abs=0.01)

    budget5 = link_budget(overhead(200), ChannelParams(), radio, (0.0, 5.0))
    assert budget.rx_power_dbm - budget5.rx_power_dbm == pytest.approx(5.0, abs=1e-12)


def test_link_budget_is_additive_in_losses():
    radio = RadioParams()
    geo = overhead(500)
    base = link_budget(geo, ChannelParams(), radio, (2.0, 3.0))
    clutter = link_budget(geo, ChannelParams(clutter_loss_db=4.5), radio, (2.0, 3.0))
    margin = link_budget(geo, ChannelParams(extra_margin_db=5.0), radio, (2.0, 3.0))
    shadowed = link_budget(geo, ChannelParams(), radio, (2.0, 3.0), shadowing_db=-1.5)

    assert base.rx_power_dbm - clutter.rx_power_dbm == pytest.approx(4.5, abs=1e-12)
    assert base.rx_power_dbm - margin.rx_power_dbm == pytest.approx(5.0, abs=1e-12)
    assert shadowed.rx_power_dbm - base.rx_power_dbm == pytest.approx(1.5, abs=1e-12)
    assert base.total_path_loss_db == pytest.approx(base.fspl_db + base.atmospheric_loss_db)
    assert base.rx_power_dbm == pytest.approx(14.0 + 5.0 - base.total_path_loss_db)


def test_assign_sf_examples():
    assert assign_sf(-120.9) is SpreadingFactor.SF7
    assert assign_sf(-131.0) is SpreadingFactor.SF8
    assert assign_sf(-142.5) is SpreadingFactor.SF12
    assert assign_sf(-143.0) is None


def test_assign_sf_monotone():
    powers = np.linspace(-150, -110, 400)
    sfs = [assign_sf(p) for p in powers]
    ranks = [13 if sf is None else int(sf) for sf in sfs]
    assert all(a >= b for a, b in zip(ranks, ranks[1:]))


def test_assign_sf_is_lowest_feasible():
    for p in np.linspace(-142.5, -110, 200):
        sf = assign_sf(p)
        assert p >= sensitivity(sf)
        if sf > SpreadingFactor.SF7:
            assert p < sensitivity(SpreadingFactor(sf - 1))
