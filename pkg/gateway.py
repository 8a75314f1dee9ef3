"""
gateway.py

Packet reception at the satellite gateway.

A packet is received only if it passes three gates, in order:
  1. sensitivity     -> rx power at or above the SF's gateway sensitivity
  2. demodulator     -> a free reception path when its preamble arrives
  3. interference    -> for every interferer SF, the equalised
                        interfering power stays below the rejection margin
"""

from __future__ import annotations

import bisect
import heapq
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from errors import ConfigError
from lora_phy import RATE_TABLE, LoraRate, SpreadingFactor
from traffic_mac import Outcome, Transmission

SF_ORDER = tuple(SpreadingFactor)

# Co-/inter-SF rejection thresholds [dB]; rows desired SF7..12, cols interferer SF7..12
DEFAULT_ISOLATION_DB = (
    (6, -16, -18, -19, -19, -20),
    (-24, 6, -20, -22, -22, -22),
    (-27, -27, 6, -23, -25, -25),
    (-30, -30, -30, 6, -26, -28),
    (-33, -33, -33, -33, 6, -29),
    (-36, -36, -36, -36, -36, 6),
)

CAPTURE_MODES = ("energy", "power")


# -------------------------------
# Types
# -------------------------------
@dataclass(frozen=True)
class IsolationMatrix:
    thresholds_db: tuple[tuple[float, ...], ...] = DEFAULT_ISOLATION_DB

    def __post_init__(self):
        table = np.asarray(self.thresholds_db, dtype=float)
        if table.shape != (6, 6):
            raise ConfigError(f"isolation matrix must be 6x6, got {table.shape}", key="isolation_matrix")
        if not np.all(np.isfinite(table)):
            raise ConfigError("isolation matrix entries must be finite", key="isolation_matrix")
        object.__setattr__(self, "thresholds_db", tuple(tuple(float(v) for v in row) for row in table))

    @classmethod
    def with_capture_margin(cls, margin_db: float) -> "IsolationMatrix":
        rows = [list(r) for r in DEFAULT_ISOLATION_DB]
        for i in range(6):
            rows[i][i] = margin_db
        return cls(tuple(tuple(r) for r in rows))

    def threshold(self, desired: SpreadingFactor, interferer: SpreadingFactor) -> float:
        return self.thresholds_db[int(desired) - 7][int(interferer) - 7]


@dataclass(frozen=True)
class ReceptionConfig:
    isolation: IsolationMatrix = field(default_factory=IsolationMatrix)
    demodulator_paths: float = 8
    capture_mode: str = "energy"

    def __post_init__(self):
        if not self.demodulator_paths >= 1:
            raise ConfigError("demodulator paths must be >= 1", key="demodulator_paths")
        if self.demodulator_paths != math.inf and self.demodulator_paths != int(self.demodulator_paths):
            raise ConfigError("demodulator paths must be an integer or inf", key="demodulator_paths")
        if self.capture_mode not in CAPTURE_MODES:
            raise ConfigError(
                f"capture mode must be one of {', '.join(CAPTURE_MODES)}", key="capture_mode"
            )


# -------------------------------
# Gate helpers
# -------------------------------
def overlap_duration(a: Transmission, b: Transmission) -> float:
    return min(a.arrival_end, b.arrival_end) - max(a.arrival_start, b.arrival_start)


def overlaps(a: Transmission, b: Transmission) -> bool:
    return a.arrival_start < b.arrival_end and b.arrival_start < a.arrival_end


def overlap_set(target: Transmission, transmissions: list[Transmission]) -> list[Transmission]:
    """Same-channel transmissions whose arrival window intersects the target's."""
    return [
        t for t in transmissions
        if t is not target
        and t.channel_index == target.channel_index
        and overlaps(target, t)
    ]


def interference_verdict(
    target: Transmission,
    overlappers: list[Transmission],
    isolation: IsolationMatrix,
    capture_mode: str = "energy",
) -> bool:
    """True when the target survives every interferer SF group."""
    energy_by_sf: dict[SpreadingFactor, float] = defaultdict(float)
    for other in overlappers:
        if capture_mode == "power":
            weight = target.airtime
        else:
            weight = overlap_duration(target, other)
        if weight <= 0:
            continue
        energy_by_sf[other.sf] += 10 ** (other.rx_power_dbm / 10) * weight

    for sf, energy in energy_by_sf.items():
        equalized_dbm = 10 * math.log10(energy / target.airtime)
        if target.rx_power_dbm - equalized_dbm < isolation.threshold(target.sf, sf):
            return False
    return True


def demodulator_admission(arrivals: list[Transmission], paths: float) -> list[bool]:
    """Greedy path allocation over arrivals sorted by (arrival_start, device_id)."""
    busy_until: list[float] = []
    admitted = []
    for tx in arrivals:
        while busy_until and busy_until[0] <= tx.arrival_start:
            heapq.heappop(busy_until)
        if len(busy_until) < paths:
            heapq.heappush(busy_until, tx.arrival_end)
            admitted.append(True)
        else:
            admitted.append(False)
    return admitted


# -------------------------------
# Receiver
# -------------------------------
class GatewayReceiver:
    """
    Reception context over one run's trace.

    Overlap queries use per-channel arrival-sorted lists and a bisect
    window bounded by the longest airtime on air.
    """

    def __init__(
        self,
        transmissions: list[Transmission],
        config: ReceptionConfig | None = None,
        rate_table: dict[SpreadingFactor, LoraRate] = RATE_TABLE,
    ):
        self.config = config or ReceptionConfig()
        self.rate_table = rate_table

        on_air = sorted((t for t in transmissions if t.transmitted), key=Transmission.order_key)
        self._on_air = on_air

        self._by_channel: dict[int, list[Transmission]] = defaultdict(list)
        for t in on_air:
            self._by_channel[t.channel_index].append(t)
        self._starts = {ch: [t.arrival_start for t in txs] for ch, txs in self._by_channel.items()}
        self._max_airtime = max((t.airtime for t in on_air), default=0.0)

        audible = [t for t in on_air if self.above_sensitivity(t)]
        flags = demodulator_admission(audible, self.config.demodulator_paths)
        self._admitted = {id(t) for t, ok in zip(audible, flags) if ok}

    def above_sensitivity(self, tx: Transmission) -> bool:
        return tx.rx_power_dbm >= self.rate_table[tx.sf].sensitivity_dbm

    def admitted(self, tx: Transmission) -> bool:
        return id(tx) in self._admitted

    def overlappers(self, target: Transmission) -> list[Transmission]:
        txs = self._by_channel.get(target.channel_index, [])
        starts = self._starts.get(target.channel_index, [])
        lo = bisect.bisect_left(starts, target.arrival_start - self._max_airtime)
        hi = bisect.bisect_left(starts, target.arrival_end)
        return [
            t for t in txs[lo:hi]
            if t is not target and t.arrival_end > target.arrival_start
        ]

    def receive(self, target: Transmission) -> Outcome:
        if not target.transmitted:
            return Outcome.SUPPRESSED_DUTY_CYCLE
        if not self.above_sensitivity(target):
            return Outcome.LOST_SENSITIVITY
        if not self.admitted(target):
            return Outcome.LOST_NO_DEMODULATOR
        if not interference_verdict(
            target, self.overlappers(target), self.config.isolation, self.config.capture_mode
        ):
            return Outcome.LOST_INTERFERENCE
        return Outcome.RECEIVED

    def resolve(self) -> list[Transmission]:
        for tx in self._on_air:
            tx.outcome = self.receive(tx)
        return self._on_air


def receive(target: Transmission, context: GatewayReceiver) -> Outcome:
    return context.receive(target)
