"""
oracle.py

Brute-force reference implementations used to cross-check the fast
reception path and the simulated PRR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from engine import Scenario, airtimes, build_homogeneous, run
from errors import OracleError
from gateway import GatewayReceiver, ReceptionConfig
from lora_phy import RATE_TABLE, LoraRate, SpreadingFactor, table_time_on_air
from traffic_mac import Outcome, Transmission

MAX_ORACLE_TRACE = 50


def oracle_receive(
    trace: list[Transmission],
    config: ReceptionConfig | None = None,
    rate_table: dict[SpreadingFactor, LoraRate] = RATE_TABLE,
) -> list[Outcome]:
    """Outcomes for ``trace``, in the trace's own order."""
    if len(trace) > MAX_ORACLE_TRACE:
        raise OracleError(f"oracle traces are capped at {MAX_ORACLE_TRACE} packets, got {len(trace)}")
    config = config or ReceptionConfig()

    ordered = sorted(trace, key=lambda t: (t.arrival_start, t.device_id, t.start_tx))
    on_air = [t for t in ordered if t.outcome is not Outcome.SUPPRESSED_DUTY_CYCLE]

    def audible(t):
        return t.rx_power_dbm >= rate_table[t.sf].sensitivity_dbm

    # admission: replay arrivals in order, counting admitted packets still on air
    admitted = []
    for t in on_air:
        if not audible(t):
            continue
        busy = 0
        for a in admitted:
            if a.arrival_end > t.arrival_start:
                busy += 1
        if busy < config.demodulator_paths:
            admitted.append(t)

    verdicts = {}
    for t in on_air:
        if not audible(t):
            verdicts[id(t)] = Outcome.LOST_SENSITIVITY
            continue
        if not any(a is t for a in admitted):
            verdicts[id(t)] = Outcome.LOST_NO_DEMODULATOR
            continue

        energy = {}
        for o in on_air:
            if o is t or o.channel_index != t.channel_index:
                continue
            if not (o.arrival_start < t.arrival_end and t.arrival_start < o.arrival_end):
                continue
            if config.capture_mode == "power":
                weight = t.airtime
            else:
                weight = min(t.arrival_end, o.arrival_end) - max(t.arrival_start, o.arrival_start)
            if weight <= 0:
                continue
            energy[o.sf] = energy.get(o.sf, 0.0) + 10 ** (o.rx_power_dbm / 10) * weight

        survives = True
        for sf, e in energy.items():
            margin = t.rx_power_dbm - 10 * math.log10(e / t.airtime)
            if margin < config.isolation.threshold(t.sf, sf):
                survives = False
        verdicts[id(t)] = Outcome.RECEIVED if survives else Outcome.LOST_INTERFERENCE

    return [verdicts.get(id(t), Outcome.SUPPRESSED_DUTY_CYCLE) for t in trace]


def oracle_aloha_prr(n_devices: int, airtime: float, period: float) -> float:
    """Unslotted-ALOHA survival with no capture: (1 - 2T/p)^(n-1), clamped at 0."""
    if n_devices <= 1:
        return 1.0
    base = max(0.0, 1.0 - 2.0 * airtime / period)
    return base ** (n_devices - 1)


# -------------------------------
# Verification runs
# -------------------------------
def random_trace(rng: np.random.Generator, n_packets: int, horizon_s: float = 5.0, n_channels: int = 2) -> list[Transmission]:
    """Random mixed-SF trace with continuous times and powers (no ties)."""
    sfs = rng.integers(7, 13, size=n_packets)
    starts = rng.uniform(0.0, horizon_s, size=n_packets)
    delays = rng.uniform(0.0015, 0.01, size=n_packets)
    powers = rng.uniform(-145.0, -110.0, size=n_packets)
    channels = rng.integers(0, n_channels, size=n_packets)
    return [
        Transmission(
            device_id=i,
            start_tx=float(starts[i]),
            airtime=table_time_on_air(SpreadingFactor(int(sfs[i]))),
            sf=SpreadingFactor(int(sfs[i])),
            channel_index=int(channels[i]),
            arrival_start=float(starts[i] + delays[i]),
            rx_power_dbm=float(powers[i]),
        )
        for i in range(n_packets)
    ]


def fuzz_disagreements(
    seed: int,
    n_traces: int = 1000,
    max_packets: int = 20,
    config: ReceptionConfig | None = None,
) -> int:
    """Packets on which the gateway and the oracle disagree, over random traces."""
    config = config or ReceptionConfig(demodulator_paths=3)
    rng = np.random.default_rng(seed)
    disagreements = 0
    for _ in range(n_traces):
        trace = random_trace(rng, int(rng.integers(0, max_packets + 1)))
        receiver = GatewayReceiver(trace, config)
        fast = [receiver.receive(t) for t in trace]
        disagreements += sum(a is not b for a, b in zip(fast, oracle_receive(trace, config)))
    return disagreements


@dataclass(frozen=True)
class AlohaCheck:
    n_devices: int
    sf: SpreadingFactor
    period_s: float
    expected: float
    simulated: float
    standard_error: float
    replications: int

    @property
    def model_error(self) -> float:
        # binomial floor: a batch with no survivor at all has zero sample error
        return math.sqrt(self.expected * (1 - self.expected) / (self.replications * self.n_devices))

    @property
    def passed(self) -> bool:
        return abs(self.simulated - self.expected) <= 3 * max(self.standard_error, self.model_error)


def aloha_scenario(period_s: float, base: Scenario | None = None) -> Scenario:
    """Single channel, unlimited demodulators, all-or-nothing capture."""
    base = base or Scenario()
    return base.replace(
        period_s=period_s,
        channel_plan_hz=base.channel_plan_hz[:1],
        reception=ReceptionConfig(
            isolation=base.reception.isolation,
            demodulator_paths=math.inf,
            capture_mode="power",
        ),
        duty_cycle=None,
    )


def aloha_check(n_devices: int, sf: SpreadingFactor, period_s: float, replications: int = 50, base: Scenario | None = None) -> AlohaCheck:
    scenario = aloha_scenario(period_s, base)
    prrs = [
        run(build_homogeneous(scenario, n_devices, sf, replication_index=i)).prr
        for i in range(replications)
    ]
    values = np.asarray([p for p in prrs if p is not None], dtype=float)
    se = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return AlohaCheck(
        n_devices=n_devices,
        sf=SpreadingFactor(sf),
        period_s=period_s,
        expected=oracle_aloha_prr(n_devices, airtimes(scenario)[SpreadingFactor(sf)], period_s),
        simulated=float(values.mean()),
        standard_error=se,
        replications=replications,
    )
