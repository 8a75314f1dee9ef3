"""
engine.py

Deterministic simulation core.

  build()      -> place devices, draw shadowing, assign SFs and phases
  run()        -> generate uplink traffic, resolve it at the gateway, tally
  replicate()  -> independent replications + mean / 95% half-widths

Every random draw comes from a named substream seeded by
(base_seed, replication_index, stream), so changing one knob never
perturbs an unrelated draw.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from channel import ChannelParams, LinkBudget, assign_sf, draw_shadowing, link_budget, MAX_SCINTILLATION_LATITUDE_DEG
from configuration import BASE_SEED, DURATION_S, REPLICATIONS
from errors import ConfigError
from gateway import GatewayReceiver, ReceptionConfig
from geometry import (
    GroundPosition,
    SatelliteConfig,
    coverage_radius,
    device_count,
    expected_device_count,
    locate,
    sample_positions,
    service_area,
)
from lora_phy import RadioParams, SpreadingFactor, time_on_air
from metrics import collect
from traffic_mac import (
    EndDevice,
    Transmission,
    apply_duty_cycle,
    channel_select,
    device_transmissions,
    draw_phase,
    schedule_traffic,
)

logger = logging.getLogger(__name__)

STREAMS = {
    "placement": 0,
    "shadowing": 1,
    "phases": 2,
    "channels": 3,
}

EU868_DEFAULT_CHANNELS_HZ = (868.1e6, 868.3e6, 868.5e6)

Z_95 = 1.959963984540054


# -------------------------------
# Scenario
# -------------------------------
@dataclass(frozen=True)
class Scenario:
    satellite: SatelliteConfig = field(default_factory=lambda: SatelliteConfig(500.0, 10.0))
    channel: ChannelParams = field(default_factory=ChannelParams)
    radio: RadioParams = field(default_factory=RadioParams)
    reception: ReceptionConfig = field(default_factory=ReceptionConfig)
    tx_gain_dbi: float = 0.0
    rx_gain_dbi: float = 5.0
    density_per_km2: float = 0.01
    period_s: float = 60.0
    duration_s: float = DURATION_S
    replications: int = REPLICATIONS
    base_seed: int = BASE_SEED
    duty_cycle: float | None = None
    channel_plan_hz: tuple[float, ...] = EU868_DEFAULT_CHANNELS_HZ
    latitude_deg: float = 0.0
    longitude_deg: float = 0.0
    airtime_model: str = "table"
    timing_advance: bool = False
    prr_counts_suppressed: bool = True

    def __post_init__(self):
        if not self.duration_s > 0:
            raise ConfigError("duration must be > 0", key="duration_s")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1", key="replications")
        if self.density_per_km2 < 0:
            raise ConfigError("density must be >= 0", key="density_per_km2")
        if not self.period_s > 0:
            raise ConfigError("period must be > 0", key="period_s")
        if self.base_seed < 0:
            raise ConfigError("base seed must be >= 0", key="base_seed")
        if self.duty_cycle is not None and not 0 < self.duty_cycle <= 1:
            raise ConfigError("duty cycle must be in (0, 1] or off", key="duty_cycle")
        if not self.channel_plan_hz:
            raise ConfigError("channel plan is empty", key="channel_plan_hz")
        if not -90 <= self.latitude_deg <= 90:
            raise ConfigError("latitude must be in [-90, 90]", key="latitude_deg")
        if self.airtime_model not in ("table", "computed"):
            raise ConfigError("airtime model must be table or computed", key="airtime_model")
        if self.channel.carrier_hz != self.radio.carrier_hz:
            raise ConfigError("channel and radio carriers differ", key="carrier_hz")

    @property
    def gains(self) -> tuple[float, float]:
        return self.tx_gain_dbi, self.rx_gain_dbi

    @property
    def total_gain_dbi(self) -> float:
        return self.tx_gain_dbi + self.rx_gain_dbi

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)


def substream(base_seed: int, replication_index: int, name: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([base_seed, replication_index, STREAMS[name]]))


# -------------------------------
# Materialised run
# -------------------------------
@dataclass
class MaterializedRun:
    scenario: Scenario
    replication_index: int
    coverage_radius_km: float
    service_area_km2: float
    expected_devices: float
    devices: list[EndDevice]
    budgets: dict[int, LinkBudget] = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return self.scenario.base_seed

    @property
    def infeasible_devices(self) -> list[EndDevice]:
        return [d for d in self.devices if not d.feasible]


@dataclass(frozen=True)
class RunResult:
    replication_index: int
    seed: int
    device_count: int
    expected_device_count: float
    coverage_radius_km: float
    service_area_km2: float
    sent: int
    received: int
    prr: float | None
    dr_distribution: tuple[float, ...] | None
    infeasible_share: float | None
    avg_data_rate_bps: float | None
    goodput_bps: float
    outcome_counts: dict[str, int]


def _warn_scintillation_validity(scenario: Scenario):
    if abs(scenario.latitude_deg) > MAX_SCINTILLATION_LATITUDE_DEG:
        logger.warning(
            "⚠️ scintillation model is only valid up to %.0f deg latitude (footprint at %.1f deg)",
            MAX_SCINTILLATION_LATITUDE_DEG,
            scenario.latitude_deg,
        )


def build(scenario: Scenario, replication_index: int = 0) -> MaterializedRun:
    sat = scenario.satellite
    rc = coverage_radius(sat)
    area = service_area(rc)
    n = device_count(scenario.density_per_km2, area)

    _warn_scintillation_validity(scenario)

    placement = substream(scenario.base_seed, replication_index, "placement")
    shadowing = substream(scenario.base_seed, replication_index, "shadowing")
    phases = substream(scenario.base_seed, replication_index, "phases")

    devices = []
    budgets = {}
    for device_id, pos in enumerate(sample_positions(placement, n, rc)):
        geo = locate(sat, pos)
        shadow = draw_shadowing(shadowing, scenario.channel.shadowing_sigma(geo.elevation_rad))
        budget = link_budget(geo, scenario.channel, scenario.radio, scenario.gains, shadow)
        budgets[device_id] = budget

        devices.append(EndDevice(
            id=device_id,
            position=pos,
            elevation_rad=geo.elevation_rad,
            slant_range_km=geo.slant_range_km,
            sf=assign_sf(budget),
            period_s=scenario.period_s,
            rx_power_dbm=budget.rx_power_dbm,
            phase_s=draw_phase(phases, scenario.period_s),
        ))

    run = MaterializedRun(
        scenario=scenario,
        replication_index=replication_index,
        coverage_radius_km=rc,
        service_area_km2=area,
        expected_devices=expected_device_count(scenario.density_per_km2, area),
        devices=devices,
        budgets=budgets,
    )
    if run.infeasible_devices:
        logger.info(
            "%d of %d devices have no feasible SF (h=%.0f km, gain=%.1f dBi)",
            len(run.infeasible_devices), n, sat.altitude_km, scenario.total_gain_dbi,
        )
    return run


def build_homogeneous(
    scenario: Scenario,
    n_devices: int,
    sf: SpreadingFactor,
    rx_power_dbm: float = -120.0,
    replication_index: int = 0,
) -> MaterializedRun:
    """n devices at the sub-satellite point, all on one SF and one received power."""
    sat = scenario.satellite
    rc = coverage_radius(sat)
    phases = substream(scenario.base_seed, replication_index, "phases")

    devices = [
        EndDevice(
            id=i,
            position=GroundPosition(0.0, 0.0),
            elevation_rad=math.pi / 2,
            slant_range_km=sat.altitude_km,
            sf=SpreadingFactor(sf),
            period_s=scenario.period_s,
            rx_power_dbm=rx_power_dbm,
            phase_s=draw_phase(phases, scenario.period_s),
        )
        for i in range(n_devices)
    ]
    return MaterializedRun(
        scenario=scenario,
        replication_index=replication_index,
        coverage_radius_km=rc,
        service_area_km2=service_area(rc),
        expected_devices=float(n_devices),
        devices=devices,
    )


# -------------------------------
# Run
# -------------------------------
def airtimes(scenario: Scenario) -> dict[SpreadingFactor, float]:
    if scenario.airtime_model == "table" and not scenario.radio.matches_table:
        logger.warning(
            "⚠️ table airtimes assume 125 kHz / 32 B; scenario uses %.0f Hz / %d B",
            scenario.radio.bandwidth_hz, scenario.radio.payload_bytes,
        )
    return {sf: time_on_air(scenario.radio, sf, scenario.airtime_model) for sf in SpreadingFactor}


def generate_traffic(materialized: MaterializedRun) -> list[Transmission]:
    scenario = materialized.scenario
    channels = substream(scenario.base_seed, materialized.replication_index, "channels")
    phases = substream(scenario.base_seed, materialized.replication_index, "phases")
    toa = airtimes(scenario)

    transmissions = []
    for device in sorted(materialized.devices, key=lambda d: d.id):
        if not device.feasible:
            continue
        starts = schedule_traffic(phases, device, scenario.duration_s)
        picks = channel_select(channels, scenario.channel_plan_hz, size=len(starts))
        transmissions.extend(
            device_transmissions(device, starts, toa[device.sf], picks, scenario.timing_advance)
        )
    return transmissions


def run(materialized: MaterializedRun) -> RunResult:
    scenario = materialized.scenario

    transmissions = generate_traffic(materialized)
    apply_duty_cycle(transmissions, scenario.duty_cycle)
    GatewayReceiver(transmissions, scenario.reception).resolve()

    metrics = collect(
        transmissions,
        [d.sf for d in materialized.devices],
        scenario.radio.payload_bytes,
        scenario.duration_s,
        count_suppressed=scenario.prr_counts_suppressed,
    )

    n = len(materialized.devices)
    return RunResult(
        replication_index=materialized.replication_index,
        seed=materialized.seed,
        device_count=n,
        expected_device_count=materialized.expected_devices,
        coverage_radius_km=materialized.coverage_radius_km,
        service_area_km2=materialized.service_area_km2,
        sent=metrics.sent,
        received=metrics.received,
        prr=metrics.prr,
        dr_distribution=metrics.dr_distribution,
        infeasible_share=len(materialized.infeasible_devices) / n if n else None,
        avg_data_rate_bps=metrics.avg_data_rate_bps,
        goodput_bps=metrics.goodput_bps,
        outcome_counts=metrics.outcome_counts,
    )


# -------------------------------
# Replications
# -------------------------------
def mean_and_half_width(values) -> tuple[float | None, float | None]:
    """Mean and normal-approximation 95% half-width, ignoring undefined values."""
    defined = np.asarray([v for v in values if v is not None], dtype=float)
    if defined.size == 0:
        return None, None
    if defined.size == 1:
        return float(defined[0]), 0.0
    return float(defined.mean()), float(Z_95 * defined.std(ddof=1) / math.sqrt(defined.size))


@dataclass(frozen=True)
class AggregateResult:
    scenario: Scenario
    runs: tuple[RunResult, ...]

    @property
    def device_count(self) -> int:
        return self.runs[0].device_count

    @property
    def coverage_radius_km(self) -> float:
        return self.runs[0].coverage_radius_km

    @property
    def sent(self) -> int:
        return sum(r.sent for r in self.runs)

    @property
    def received(self) -> int:
        return sum(r.received for r in self.runs)

    @property
    def outcome_counts(self) -> dict[str, int]:
        totals: dict[str, int] = {}
        for r in self.runs:
            for k, v in r.outcome_counts.items():
                totals[k] = totals.get(k, 0) + v
        return totals

    @property
    def prr(self):
        return mean_and_half_width(r.prr for r in self.runs)

    @property
    def avg_data_rate_bps(self):
        return mean_and_half_width(r.avg_data_rate_bps for r in self.runs)

    @property
    def goodput_bps(self):
        return mean_and_half_width(r.goodput_bps for r in self.runs)

    @property
    def infeasible_share(self):
        return mean_and_half_width(r.infeasible_share for r in self.runs)

    @property
    def dr_distribution(self) -> tuple[float, ...] | None:
        shares = [r.dr_distribution for r in self.runs if r.dr_distribution is not None]
        if not shares:
            return None
        return tuple(float(v) for v in np.mean(np.asarray(shares), axis=0))


def replicate(scenario: Scenario) -> AggregateResult:
    runs = tuple(run(build(scenario, i)) for i in range(scenario.replications))
    return AggregateResult(scenario=scenario, runs=runs)
