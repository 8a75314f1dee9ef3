"""
lora_phy.py

LoRa modulation constants: SF/DR mapping, nominal bit rates, gateway
sensitivities, chirp rate and time-on-air.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

from errors import AirtimeError, ConfigError

MAX_PAYLOAD_BYTES = 255

# Reference-table airtimes hold for this configuration only
TABLE_BANDWIDTH_HZ = 125_000
TABLE_PAYLOAD_BYTES = 32


class SpreadingFactor(IntEnum):
    SF7 = 7
    SF8 = 8
    SF9 = 9
    SF10 = 10
    SF11 = 11
    SF12 = 12

    @property
    def dr_index(self) -> int:
        return 12 - int(self)

    @classmethod
    def from_dr(cls, dr_index: int) -> "SpreadingFactor":
        return cls(12 - dr_index)


@dataclass(frozen=True)
class LoraRate:
    sf: SpreadingFactor
    dr_index: int
    bit_rate_bps: float
    sensitivity_dbm: float
    time_on_air_ms_32B: float


RATE_TABLE: dict[SpreadingFactor, LoraRate] = {
    row.sf: row
    for row in (
        LoraRate(SpreadingFactor.SF7, 5, 5470.0, -130.0, 74.0),
        LoraRate(SpreadingFactor.SF8, 4, 3125.0, -132.5, 136.0),
        LoraRate(SpreadingFactor.SF9, 3, 1760.0, -135.0, 247.0),
        LoraRate(SpreadingFactor.SF10, 2, 980.0, -137.5, 493.0),
        LoraRate(SpreadingFactor.SF11, 1, 440.0, -140.0, 888.0),
        LoraRate(SpreadingFactor.SF12, 0, 250.0, -142.5, 1777.0),
    )
}


@dataclass(frozen=True)
class RadioParams:
    bandwidth_hz: float = 125_000.0
    carrier_hz: float = 868e6
    tx_power_dbm: float = 14.0
    payload_bytes: int = 32
    preamble_symbols: int = 8
    explicit_header: bool = True
    crc_on: bool = True
    coding_rate_index: int = 1

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise ConfigError("bandwidth must be > 0", key="bandwidth_hz")
        if not self.carrier_hz > 0:
            raise ConfigError("carrier frequency must be > 0", key="carrier_hz")
        if not 1 <= self.payload_bytes <= MAX_PAYLOAD_BYTES:
            raise ConfigError(f"payload must be in [1, {MAX_PAYLOAD_BYTES}] bytes", key="payload_bytes")
        if self.preamble_symbols < 0:
            raise ConfigError("preamble must be >= 0 symbols", key="preamble_symbols")
        if not 1 <= self.coding_rate_index <= 4:
            raise ConfigError("coding rate index must be in [1, 4]", key="coding_rate_index")

    @property
    def matches_table(self) -> bool:
        return self.bandwidth_hz == TABLE_BANDWIDTH_HZ and self.payload_bytes == TABLE_PAYLOAD_BYTES


# -------------------------------
# Table lookups
# -------------------------------
def chirp_rate(sf: SpreadingFactor, bandwidth_hz: float) -> float:
    return bandwidth_hz / 2 ** int(sf)


def table_time_on_air(sf: SpreadingFactor) -> float:
    """Reference airtime in seconds (125 kHz, 32-byte payload)."""
    return RATE_TABLE[SpreadingFactor(sf)].time_on_air_ms_32B / 1000.0


def nominal_bit_rate(sf: SpreadingFactor) -> float:
    """Nominal data rate in bit/s."""
    return RATE_TABLE[SpreadingFactor(sf)].bit_rate_bps


def sensitivity(sf: SpreadingFactor) -> float:
    return RATE_TABLE[SpreadingFactor(sf)].sensitivity_dbm


# -------------------------------
# Generic airtime calculator
# -------------------------------
def low_data_rate_optimize(sf: SpreadingFactor, bandwidth_hz: float) -> bool:
    # mandated for SF11/SF12 at 125 kHz
    return int(sf) >= 11 and bandwidth_hz <= 125_000


def payload_symbols(params: RadioParams, sf: SpreadingFactor, payload_bytes: int) -> int:
    sf = int(sf)
    de = 1 if low_data_rate_optimize(sf, params.bandwidth_hz) else 0
    ih = 0 if params.explicit_header else 1
    crc = 1 if params.crc_on else 0

    numerator = 8 * payload_bytes - 4 * sf + 28 + 16 * crc - 20 * ih
    blocks = math.ceil(numerator / (4 * (sf - 2 * de)))
    return 8 + max(0, blocks * (params.coding_rate_index + 4))


def computed_time_on_air(params: RadioParams, sf: SpreadingFactor, payload_bytes: int | None = None) -> float:
    """Semtech airtime formula, in seconds."""
    if payload_bytes is None:
        payload_bytes = params.payload_bytes
    if not 0 <= payload_bytes <= MAX_PAYLOAD_BYTES:
        raise AirtimeError(
            f"payload of {payload_bytes} bytes does not fit one LoRa frame (0..{MAX_PAYLOAD_BYTES})"
        )

    t_sym = 2 ** int(sf) / params.bandwidth_hz
    n_preamble = params.preamble_symbols + 4.25
    return (n_preamble + payload_symbols(params, sf, payload_bytes)) * t_sym


def time_on_air(params: RadioParams, sf: SpreadingFactor, model: str = "table") -> float:
    if model == "table":
        return table_time_on_air(sf)
    if model == "computed":
        return computed_time_on_air(params, sf)
    raise ConfigError(f"unknown airtime model '{model}' (table | computed)", key="airtime_model")
