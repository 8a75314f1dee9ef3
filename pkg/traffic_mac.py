"""
traffic_mac.py

Class-A end devices: periodic application traffic, unslotted-ALOHA
channel access and the optional duty-cycle restriction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from configuration import SPEED_OF_LIGHT
from errors import ConfigError
from geometry import GroundPosition
from lora_phy import SpreadingFactor


class Outcome(str, Enum):
    PENDING = "pending"
    RECEIVED = "received"
    LOST_SENSITIVITY = "lost_sensitivity"
    LOST_INTERFERENCE = "lost_interference"
    LOST_NO_DEMODULATOR = "lost_no_demodulator"
    SUPPRESSED_DUTY_CYCLE = "suppressed_duty_cycle"


FINAL_OUTCOMES = tuple(o for o in Outcome if o is not Outcome.PENDING)


# -------------------------------
# Types
# -------------------------------
@dataclass
class EndDevice:
    id: int
    position: GroundPosition
    elevation_rad: float
    slant_range_km: float
    sf: SpreadingFactor | None
    period_s: float
    rx_power_dbm: float = float("-inf")
    channel_index: int = 0
    phase_s: float | None = None
    next_tx_time: float | None = None

    def __post_init__(self):
        if not self.period_s > 0:
            raise ConfigError("period must be > 0", key="period_s")

    @property
    def propagation_delay_s(self) -> float:
        return self.slant_range_km * 1000.0 / SPEED_OF_LIGHT

    @property
    def feasible(self) -> bool:
        return self.sf is not None


@dataclass
class Transmission:
    device_id: int
    start_tx: float
    airtime: float
    sf: SpreadingFactor
    channel_index: int
    arrival_start: float
    rx_power_dbm: float
    outcome: Outcome = Outcome.PENDING
    arrival_end: float = field(init=False)

    def __post_init__(self):
        self.arrival_end = self.arrival_start + self.airtime

    @property
    def transmitted(self) -> bool:
        return self.outcome is not Outcome.SUPPRESSED_DUTY_CYCLE

    def order_key(self):
        return (self.arrival_start, self.device_id, self.start_tx)


# -------------------------------
# Traffic generation
# -------------------------------
def draw_phase(rng: np.random.Generator, period_s: float) -> float:
    return float(rng.uniform(0.0, period_s))


def schedule_traffic(rng: np.random.Generator, device: EndDevice, sim_duration: float) -> np.ndarray:
    """Start times phase, phase + p, ... strictly before sim_duration.

    The phase is drawn on [0, p) the first time a device is scheduled and
    kept on the device afterwards.
    """
    if device.phase_s is None:
        device.phase_s = draw_phase(rng, device.period_s)

    phase = device.phase_s
    if phase >= sim_duration:
        return np.empty(0)

    count = math.ceil((sim_duration - phase) / device.period_s)
    starts = phase + device.period_s * np.arange(count)
    starts = starts[starts < sim_duration]
    device.next_tx_time = float(starts[0]) if len(starts) else None
    return starts


def duty_cycle_lockout(airtime: float, limit_fraction: float) -> float:
    """Off-time imposed after a transmission of the given airtime."""
    if not 0 < limit_fraction <= 1:
        raise ConfigError("duty cycle must be in (0, 1]", key="duty_cycle")
    return airtime * (1.0 / limit_fraction - 1.0)


def apply_duty_cycle(transmissions: list[Transmission], limit_fraction: float | None) -> list[Transmission]:
    """Mark transmissions that start inside a device's post-transmission lockout.

    ``limit_fraction=None`` disables the restriction.
    """
    if limit_fraction is None:
        return transmissions

    free_at: dict[int, float] = {}
    for tx in sorted(transmissions, key=lambda t: (t.device_id, t.start_tx)):
        if tx.start_tx < free_at.get(tx.device_id, -math.inf):
            tx.outcome = Outcome.SUPPRESSED_DUTY_CYCLE
            continue
        free_at[tx.device_id] = tx.start_tx + tx.airtime + duty_cycle_lockout(tx.airtime, limit_fraction)
    return transmissions


def channel_select(rng: np.random.Generator, plan, size=None):
    """Uniform channel index per transmission."""
    if len(plan) == 0:
        raise ConfigError("channel plan is empty", key="channel_plan_hz")
    draw = rng.integers(0, len(plan), size=size)
    return int(draw) if size is None else draw


def device_transmissions(
    device: EndDevice,
    starts: np.ndarray,
    airtime: float,
    channels,
    timing_advance: bool = False,
) -> list[Transmission]:
    """Build the uplink packets of one device.

    With timing advance the device starts early by its own propagation
    delay so the packet reaches the gateway at the nominal instant. A
    nominal instant earlier than the delay cannot be advanced past t=0;
    that packet starts at 0 and arrives one delay late.
    """
    delay = device.propagation_delay_s
    shift = -delay if timing_advance else 0.0

    out = []
    for start, ch in zip(starts, channels):
        start_tx = max(float(start) + shift, 0.0)
        out.append(Transmission(
            device_id=device.id,
            start_tx=start_tx,
            airtime=airtime,
            sf=device.sf,
            channel_index=int(ch),
            arrival_start=start_tx + delay,
            rx_power_dbm=device.rx_power_dbm,
        ))
    return out
