"""
geometry.py

Satellite footprint, device placement, elevation angle and slant range
on a spherical Earth. The satellite sits at the zenith of the footprint
centre for the whole run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from errors import ConfigError, GeometryError

EARTH_RADIUS_KM = 6371.0


# -------------------------------
# Types
# -------------------------------
@dataclass(frozen=True)
class SatelliteConfig:
    altitude_km: float
    beamwidth_deg: float
    earth_radius_km: float = EARTH_RADIUS_KM

    def __post_init__(self):
        if not self.altitude_km > 0:
            raise ConfigError("altitude must be > 0", key="altitude_km")
        if not 0 < self.beamwidth_deg < 180:
            raise ConfigError("beamwidth must be in (0, 180)", key="beamwidth_deg")
        if not self.earth_radius_km > 0:
            raise ConfigError("earth radius must be > 0", key="earth_radius_km")
        rc = coverage_radius(self)
        horizon = horizon_offset(self)
        if rc > horizon:
            raise ConfigError(
                f"footprint exceeds the horizon at h={self.altitude_km:g} km "
                f"(radius {rc:.1f} km > {horizon:.1f} km)",
                key="beamwidth_deg",
            )


@dataclass(frozen=True)
class GroundPosition:
    offset_km: float
    azimuth_rad: float = 0.0

    def __post_init__(self):
        if self.offset_km < 0:
            raise GeometryError(f"offset must be >= 0, got {self.offset_km}")
        if not 0 <= self.azimuth_rad < 2 * math.pi:
            raise GeometryError(f"azimuth must be in [0, 2pi), got {self.azimuth_rad}")


@dataclass(frozen=True)
class GeometryResult:
    elevation_rad: float
    slant_range_km: float
    coverage_radius_km: float
    service_area_km2: float


# -------------------------------
# Footprint
# -------------------------------
def coverage_radius(sat: SatelliteConfig) -> float:
    """R_c = tan(theta / 2) * h."""
    return _coverage_radius(sat.altitude_km, sat.beamwidth_deg)


def _coverage_radius(altitude_km, beamwidth_deg):
    if beamwidth_deg >= 180 or beamwidth_deg < 0:
        raise GeometryError(f"beamwidth {beamwidth_deg} deg has no finite footprint")
    return math.tan(math.radians(beamwidth_deg) / 2) * altitude_km


def service_area(coverage_radius_km: float) -> float:
    return math.pi * coverage_radius_km ** 2


def expected_device_count(density_per_km2: float, area_km2: float) -> float:
    return density_per_km2 * area_km2


def device_count(density_per_km2: float, area_km2: float) -> int:
    """Nearest integer to rho * A, ties rounded up."""
    return int(math.floor(expected_device_count(density_per_km2, area_km2) + 0.5))


def horizon_offset(sat: SatelliteConfig) -> float:
    """Great-circle distance from the sub-satellite point to the geometric horizon."""
    r = sat.earth_radius_km
    return r * math.acos(r / (r + sat.altitude_km))


# -------------------------------
# Elevation / slant range
# -------------------------------
def slant_range_from_elevation(sat: SatelliteConfig, elevation_rad: float) -> float:
    r = sat.earth_radius_km
    h = sat.altitude_km
    s = math.sin(elevation_rad)
    return math.sqrt(r * r * s * s + h * h + 2 * h * r) - r * s


def elevation_from_offset(sat: SatelliteConfig, pos: GroundPosition) -> float:
    r = sat.earth_radius_km
    if pos.offset_km > horizon_offset(sat):
        raise GeometryError(
            f"offset {pos.offset_km:.3f} km is beyond the horizon "
            f"({horizon_offset(sat):.3f} km at h={sat.altitude_km} km)"
        )
    gamma = pos.offset_km / r
    alpha = math.atan2(math.cos(gamma) - r / (r + sat.altitude_km), math.sin(gamma))
    return min(max(alpha, 0.0), math.pi / 2)


def chord_distance(sat: SatelliteConfig, pos: GroundPosition) -> float:
    """Law-of-cosines distance between a ground point and the satellite."""
    r = sat.earth_radius_km
    rs = r + sat.altitude_km
    gamma = pos.offset_km / r
    return math.sqrt(r * r + rs * rs - 2 * r * rs * math.cos(gamma))


def locate(sat: SatelliteConfig, pos: GroundPosition) -> GeometryResult:
    rc = coverage_radius(sat)
    alpha = elevation_from_offset(sat, pos)
    return GeometryResult(
        elevation_rad=alpha,
        slant_range_km=slant_range_from_elevation(sat, alpha),
        coverage_radius_km=rc,
        service_area_km2=service_area(rc),
    )


# -------------------------------
# Placement
# -------------------------------
def sample_positions(rng: np.random.Generator, n: int, coverage_radius_km: float) -> list[GroundPosition]:
    """n positions uniform over the footprint disk."""
    if n <= 0:
        return []
    u = rng.random(n)
    v = rng.random(n)
    offsets = coverage_radius_km * np.sqrt(u)
    azimuths = 2 * math.pi * v
    return [GroundPosition(float(o), float(a)) for o, a in zip(offsets, azimuths)]


# -------------------------------
# ECEF
# -------------------------------
def _ecef(radius_km, lat_rad, lon_rad):
    return np.array([
        radius_km * math.cos(lat_rad) * math.cos(lon_rad),
        radius_km * math.cos(lat_rad) * math.sin(lon_rad),
        radius_km * math.sin(lat_rad),
    ])


def satellite_ecef(sat: SatelliteConfig, latitude_deg: float = 0.0, longitude_deg: float = 0.0) -> np.ndarray:
    return _ecef(
        sat.earth_radius_km + sat.altitude_km,
        math.radians(latitude_deg),
        math.radians(longitude_deg),
    )


def ground_lat_lon(sat: SatelliteConfig, pos: GroundPosition, latitude_deg: float = 0.0, longitude_deg: float = 0.0):
    """Latitude/longitude (deg) of a point at (offset, azimuth) from the footprint centre.

    Azimuth is measured clockwise from north.
    """
    lat1 = math.radians(latitude_deg)
    lon1 = math.radians(longitude_deg)
    delta = pos.offset_km / sat.earth_radius_km
    az = pos.azimuth_rad

    lat2 = math.asin(
        math.sin(lat1) * math.cos(delta) + math.cos(lat1) * math.sin(delta) * math.cos(az)
    )
    lon2 = lon1 + math.atan2(
        math.sin(az) * math.sin(delta) * math.cos(lat1),
        math.cos(delta) - math.sin(lat1) * math.sin(lat2),
    )
    return math.degrees(lat2), math.degrees(lon2)


def ground_ecef(sat: SatelliteConfig, pos: GroundPosition, latitude_deg: float = 0.0, longitude_deg: float = 0.0) -> np.ndarray:
    lat, lon = ground_lat_lon(sat, pos, latitude_deg, longitude_deg)
    return _ecef(sat.earth_radius_km, math.radians(lat), math.radians(lon))
