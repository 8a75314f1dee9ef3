"""
channel.py

Ground-to-satellite link budget: free-space path loss, ionospheric
scintillation, clutter loss, log-normal shadowing, antenna gains and the
resulting spreading-factor assignment.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from configuration import SPEED_OF_LIGHT
from errors import ConfigError, GeometryError
from geometry import GeometryResult
from lora_phy import RATE_TABLE, LoraRate, RadioParams, SpreadingFactor

logger = logging.getLogger(__name__)

# Scintillation model validity limit
MAX_SCINTILLATION_LATITUDE_DEG = 20.0

SCINTILLATION_REFERENCE_GHZ = 4.0

# Shadowing spread vs elevation, rural LOS (deg -> dB)
RURAL_LOS_SHADOWING = (
    (10.0, 1.79),
    (20.0, 1.14),
    (30.0, 1.14),
    (40.0, 0.92),
    (50.0, 1.42),
    (60.0, 1.56),
    (70.0, 0.85),
    (80.0, 0.72),
    (90.0, 0.72),
)

SHADOWING_PROFILES = {
    "rural-los": RURAL_LOS_SHADOWING,
}


# -------------------------------
# Types
# -------------------------------
@dataclass(frozen=True)
class ChannelParams:
    carrier_hz: float = 868e6
    scintillation_pfluc_db: float = 1.1
    clutter_loss_db: float = 0.0
    shadowing_sigma_db: float = 1.79
    shadowing_table: tuple[tuple[float, float], ...] | None = None
    extra_margin_db: float = 0.0

    def __post_init__(self):
        if not self.carrier_hz > 0:
            raise ConfigError("carrier frequency must be > 0", key="carrier_hz")
        if self.scintillation_pfluc_db < 0:
            raise ConfigError("scintillation fluctuation must be >= 0", key="scintillation_pfluc_db")
        if self.clutter_loss_db < 0:
            raise ConfigError("clutter loss must be >= 0", key="clutter_loss_db")
        if self.shadowing_sigma_db < 0:
            raise ConfigError("shadowing sigma must be >= 0", key="shadowing_sigma_db")
        if self.extra_margin_db < 0:
            raise ConfigError("extra margin must be >= 0", key="extra_margin_db")
        if self.shadowing_table is not None:
            if not self.shadowing_table:
                raise ConfigError("shadowing table is empty", key="shadowing_table")
            elevations = [e for e, _ in self.shadowing_table]
            if elevations != sorted(elevations):
                raise ConfigError("shadowing table elevations must be ascending", key="shadowing_table")
            if any(s < 0 for _, s in self.shadowing_table):
                raise ConfigError("shadowing table sigmas must be >= 0", key="shadowing_table")

    def shadowing_sigma(self, elevation_rad: float) -> float:
        if self.shadowing_table is None:
            return self.shadowing_sigma_db
        elevations, sigmas = zip(*self.shadowing_table)
        return float(np.interp(math.degrees(elevation_rad), elevations, sigmas))


@dataclass(frozen=True)
class LinkBudget:
    fspl_db: float
    atmospheric_loss_db: float
    clutter_loss_db: float
    shadowing_db: float
    total_path_loss_db: float
    tx_power_dbm: float
    tx_gain_dbi: float
    rx_gain_dbi: float
    rx_power_dbm: float
    wavelength_m: float
    extra_margin_db: float = 0.0


# -------------------------------
# Loss terms
# -------------------------------
def wavelength(carrier_hz: float) -> float:
    return SPEED_OF_LIGHT / carrier_hz


def fspl(distance_km: float, carrier_hz: float) -> float:
    """20 log10(4 pi d / lambda), d in km."""
    if not distance_km > 0:
        raise GeometryError(f"path loss needs a positive distance, got {distance_km} km")
    if not carrier_hz > 0:
        raise GeometryError(f"path loss needs a positive carrier, got {carrier_hz} Hz")
    return 20 * math.log10(4 * math.pi * distance_km * 1000.0 / wavelength(carrier_hz))


def scintillation_loss(carrier_hz: float, pfluc_db: float = 1.1, latitude_deg: float | None = None) -> float:
    """Ionospheric scintillation loss scaled from the 4 GHz reference fluctuation."""
    if latitude_deg is not None and abs(latitude_deg) > MAX_SCINTILLATION_LATITUDE_DEG:
        logger.warning(
            "⚠️ scintillation model is only valid up to %.0f deg latitude (scenario at %.1f deg)",
            MAX_SCINTILLATION_LATITUDE_DEG,
            latitude_deg,
        )
    ratio = (carrier_hz / 1e9) / SCINTILLATION_REFERENCE_GHZ
    return ratio ** -1.5 * pfluc_db / math.sqrt(2)


def draw_shadowing(rng: np.random.Generator, sigma_db: float, size=None):
    """Zero-mean Gaussian draw in dB (log-normal in linear scale).

    The stream always advances by one standard normal per value, so a zero
    sigma does not shift later draws.
    """
    draw = rng.standard_normal(size) * sigma_db
    return float(draw) if size is None else draw


# -------------------------------
# Budget
# -------------------------------
def link_budget(
    geometry: GeometryResult,
    channel: ChannelParams,
    radio: RadioParams,
    gains: tuple[float, float],
    shadowing_db: float = 0.0,
    latitude_deg: float | None = None,
) -> LinkBudget:
    tx_gain, rx_gain = gains

    free_space = fspl(geometry.slant_range_km, channel.carrier_hz)
    atmospheric = scintillation_loss(channel.carrier_hz, channel.scintillation_pfluc_db, latitude_deg)
    path_loss = free_space + atmospheric + channel.clutter_loss_db + shadowing_db

    return LinkBudget(
        fspl_db=free_space,
        atmospheric_loss_db=atmospheric,
        clutter_loss_db=channel.clutter_loss_db,
        shadowing_db=shadowing_db,
        total_path_loss_db=path_loss,
        tx_power_dbm=radio.tx_power_dbm,
        tx_gain_dbi=tx_gain,
        rx_gain_dbi=rx_gain,
        rx_power_dbm=radio.tx_power_dbm + tx_gain + rx_gain - path_loss - channel.extra_margin_db,
        wavelength_m=wavelength(channel.carrier_hz),
        extra_margin_db=channel.extra_margin_db,
    )


def assign_sf(
    budget: LinkBudget | float,
    rate_table: dict[SpreadingFactor, LoraRate] = RATE_TABLE,
) -> SpreadingFactor | None:
    """Lowest SF whose sensitivity the received power meets; None when even SF12 fails."""
    rx_power = budget.rx_power_dbm if isinstance(budget, LinkBudget) else float(budget)
    for sf in sorted(rate_table):
        if rx_power >= rate_table[sf].sensitivity_dbm:
            return sf
    return None
