"""
scenario_config.py

Flat key=value scenario / sweep files (read with python-dotenv).

    # reference point
    altitude_km=500
    beamwidth_deg=10
    total_gain_dbi=5

Unknown keys are hard errors; missing keys take the documented defaults.
A file with any sweep axis key (altitudes_km, beamwidths_deg,
total_gains_dbi, periods_s) loads as a SweepSpec, otherwise as a Scenario.
"""

from __future__ import annotations

import difflib
import math
from pathlib import Path

from dotenv import dotenv_values

from channel import SHADOWING_PROFILES, ChannelParams
from engine import Scenario
from errors import ConfigError
from gateway import IsolationMatrix, ReceptionConfig
from geometry import SatelliteConfig
from lora_phy import RadioParams
from sweep import SweepSpec

SCENARIO_KEYS = (
    "altitude_km",
    "beamwidth_deg",
    "earth_radius_km",
    "latitude_deg",
    "longitude_deg",
    "tx_power_dbm",
    "bandwidth_hz",
    "carrier_hz",
    "channel_plan_hz",
    "payload_bytes",
    "preamble_symbols",
    "explicit_header",
    "crc_on",
    "coding_rate_index",
    "scintillation_pfluc_db",
    "clutter_loss_db",
    "shadowing_sigma_db",
    "shadowing_table",
    "extra_margin_db",
    "total_gain_dbi",
    "tx_gain_dbi",
    "rx_gain_dbi",
    "density_per_km2",
    "period_s",
    "duration_s",
    "replications",
    "base_seed",
    "isolation_matrix",
    "demodulator_paths",
    "capture_mode",
    "duty_cycle",
    "prr_counts_suppressed",
    "airtime_model",
    "timing_advance",
)

SWEEP_AXIS_KEYS = ("altitudes_km", "beamwidths_deg", "total_gains_dbi", "periods_s")
SWEEP_KEYS = SWEEP_AXIS_KEYS + ("output", "format")

KNOWN_KEYS = SCENARIO_KEYS + SWEEP_KEYS

BOOLEANS = {
    "true": True,
    "yes": True,
    "on": True,
    "1": True,
    "false": False,
    "no": False,
    "off": False,
    "0": False,
}


# -------------------------------
# Value parsers
# -------------------------------
def _float(key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"expected a number, got '{raw}'", key=key) from None


def _int(key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"expected an integer, got '{raw}'", key=key) from None


def _bool(key, raw):
    value = BOOLEANS.get(raw.strip().lower())
    if value is None:
        raise ConfigError(f"expected true/false, got '{raw}'", key=key)
    return value


def _floats(key, raw):
    items = [s.strip() for s in raw.split(",") if s.strip()]
    if not items:
        raise ConfigError("expected a comma-separated list of numbers", key=key)
    return tuple(_float(key, s) for s in items)


def _shadowing_table(key, raw):
    name = raw.strip().lower()
    if name in ("", "none"):
        return None
    if name in SHADOWING_PROFILES:
        return SHADOWING_PROFILES[name]
    pairs = []
    for item in raw.split(","):
        elev, sep, sigma = item.partition(":")
        if not sep:
            raise ConfigError(
                f"expected elevation:sigma pairs or one of {', '.join(SHADOWING_PROFILES)}, got '{item.strip()}'",
                key=key,
            )
        pairs.append((_float(key, elev), _float(key, sigma)))
    return tuple(pairs)


def _isolation(key, raw):
    values = [s for s in raw.replace(";", ",").split(",") if s.strip()]
    if len(values) != 36:
        raise ConfigError(f"isolation matrix needs 36 values (6x6), got {len(values)}", key=key)
    numbers = [_float(key, v) for v in values]
    return IsolationMatrix(tuple(tuple(numbers[r * 6:(r + 1) * 6]) for r in range(6)))


def _paths(key, raw):
    if raw.strip().lower() in ("inf", "unlimited"):
        return math.inf
    value = _float(key, raw)
    return int(value) if value.is_integer() else value


def _duty_cycle(key, raw):
    if raw.strip().lower() in ("off", "none", "false", ""):
        return None
    return _float(key, raw)


# -------------------------------
# Reading
# -------------------------------
def _key_lines(path: Path) -> dict[str, int]:
    lines = {}
    for number, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("export "):
            stripped = stripped[len("export "):]
        key = stripped.split("=", 1)[0].strip()
        lines.setdefault(key, number)
    return lines


def _suggest(key):
    match = difflib.get_close_matches(key, KNOWN_KEYS, n=1)
    return f" (did you mean '{match[0]}'?)" if match else ""


def load_config(path, overrides: dict[str, str] | None = None) -> Scenario | SweepSpec:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")

    lines = _key_lines(path)
    values = dict(dotenv_values(path))
    values.update(overrides or {})

    try:
        return from_mapping(values)
    except ConfigError as e:
        if e.line is None and e.key in lines:
            raise ConfigError(e.message, key=e.key, line=lines[e.key]) from None
        raise


def from_mapping(values: dict[str, str | None]) -> Scenario | SweepSpec:
    for key, raw in values.items():
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown key{_suggest(key)}", key=key)
        if raw is None:
            raise ConfigError("expected key=value", key=key)

    scenario = _scenario(values)
    if not any(k in values for k in SWEEP_AXIS_KEYS):
        if "output" in values or "format" in values:
            raise ConfigError("output/format only apply to sweep files", key="output" if "output" in values else "format")
        return scenario

    def axis(key, fallback):
        return _floats(key, values[key]) if key in values else fallback

    return SweepSpec(
        base=scenario,
        altitudes_km=axis("altitudes_km", (scenario.satellite.altitude_km,)),
        beamwidths_deg=axis("beamwidths_deg", (scenario.satellite.beamwidth_deg,)),
        total_gains_dbi=axis("total_gains_dbi", (scenario.total_gain_dbi,)),
        periods_s=axis("periods_s", (scenario.period_s,)),
        output=values.get("output"),
        format=values.get("format", "csv"),
    )


def _gains(values, defaults: Scenario):
    has_split = "tx_gain_dbi" in values or "rx_gain_dbi" in values
    if "total_gain_dbi" in values and not has_split:
        return 0.0, _float("total_gain_dbi", values["total_gain_dbi"])

    tx = _float("tx_gain_dbi", values["tx_gain_dbi"]) if "tx_gain_dbi" in values else defaults.tx_gain_dbi
    rx = _float("rx_gain_dbi", values["rx_gain_dbi"]) if "rx_gain_dbi" in values else defaults.rx_gain_dbi
    if "total_gain_dbi" in values and not math.isclose(tx + rx, _float("total_gain_dbi", values["total_gain_dbi"])):
        raise ConfigError("total gain disagrees with tx_gain_dbi + rx_gain_dbi", key="total_gain_dbi")
    return tx, rx


def _scenario(values) -> Scenario:
    defaults = Scenario()

    def get(key, parse, fallback):
        return parse(key, values[key]) if key in values else fallback

    carrier = get("carrier_hz", _float, defaults.radio.carrier_hz)

    sat = SatelliteConfig(
        altitude_km=get("altitude_km", _float, defaults.satellite.altitude_km),
        beamwidth_deg=get("beamwidth_deg", _float, defaults.satellite.beamwidth_deg),
        earth_radius_km=get("earth_radius_km", _float, defaults.satellite.earth_radius_km),
    )
    radio = RadioParams(
        bandwidth_hz=get("bandwidth_hz", _float, defaults.radio.bandwidth_hz),
        carrier_hz=carrier,
        tx_power_dbm=get("tx_power_dbm", _float, defaults.radio.tx_power_dbm),
        payload_bytes=get("payload_bytes", _int, defaults.radio.payload_bytes),
        preamble_symbols=get("preamble_symbols", _int, defaults.radio.preamble_symbols),
        explicit_header=get("explicit_header", _bool, defaults.radio.explicit_header),
        crc_on=get("crc_on", _bool, defaults.radio.crc_on),
        coding_rate_index=get("coding_rate_index", _int, defaults.radio.coding_rate_index),
    )
    channel = ChannelParams(
        carrier_hz=carrier,
        scintillation_pfluc_db=get("scintillation_pfluc_db", _float, defaults.channel.scintillation_pfluc_db),
        clutter_loss_db=get("clutter_loss_db", _float, defaults.channel.clutter_loss_db),
        shadowing_sigma_db=get("shadowing_sigma_db", _float, defaults.channel.shadowing_sigma_db),
        shadowing_table=get("shadowing_table", _shadowing_table, defaults.channel.shadowing_table),
        extra_margin_db=get("extra_margin_db", _float, defaults.channel.extra_margin_db),
    )
    reception = ReceptionConfig(
        isolation=get("isolation_matrix", _isolation, defaults.reception.isolation),
        demodulator_paths=get("demodulator_paths", _paths, defaults.reception.demodulator_paths),
        capture_mode=values.get("capture_mode", defaults.reception.capture_mode).strip(),
    )
    tx_gain, rx_gain = _gains(values, defaults)

    return Scenario(
        satellite=sat,
        channel=channel,
        radio=radio,
        reception=reception,
        tx_gain_dbi=tx_gain,
        rx_gain_dbi=rx_gain,
        density_per_km2=get("density_per_km2", _float, defaults.density_per_km2),
        period_s=get("period_s", _float, defaults.period_s),
        duration_s=get("duration_s", _float, defaults.duration_s),
        replications=get("replications", _int, defaults.replications),
        base_seed=get("base_seed", _int, defaults.base_seed),
        duty_cycle=get("duty_cycle", _duty_cycle, defaults.duty_cycle),
        channel_plan_hz=get("channel_plan_hz", _floats, defaults.channel_plan_hz),
        latitude_deg=get("latitude_deg", _float, defaults.latitude_deg),
        longitude_deg=get("longitude_deg", _float, defaults.longitude_deg),
        airtime_model=values.get("airtime_model", defaults.airtime_model).strip(),
        timing_advance=get("timing_advance", _bool, defaults.timing_advance),
        prr_counts_suppressed=get("prr_counts_suppressed", _bool, defaults.prr_counts_suppressed),
    )


# -------------------------------
# Writing
# -------------------------------
def _num(v):
    if v == math.inf:
        return "inf"
    return repr(float(v)) if isinstance(v, float) else str(v)


def _flag(v):
    return "true" if v else "false"


def dump_config(scenario: Scenario) -> str:
    """Every scenario key, in load_config's format."""
    table = scenario.channel.shadowing_table
    iso = scenario.reception.isolation.thresholds_db
    fields = {
        "altitude_km": _num(scenario.satellite.altitude_km),
        "beamwidth_deg": _num(scenario.satellite.beamwidth_deg),
        "earth_radius_km": _num(scenario.satellite.earth_radius_km),
        "latitude_deg": _num(scenario.latitude_deg),
        "longitude_deg": _num(scenario.longitude_deg),
        "tx_power_dbm": _num(scenario.radio.tx_power_dbm),
        "bandwidth_hz": _num(scenario.radio.bandwidth_hz),
        "carrier_hz": _num(scenario.radio.carrier_hz),
        "channel_plan_hz": ",".join(_num(f) for f in scenario.channel_plan_hz),
        "payload_bytes": _num(scenario.radio.payload_bytes),
        "preamble_symbols": _num(scenario.radio.preamble_symbols),
        "explicit_header": _flag(scenario.radio.explicit_header),
        "crc_on": _flag(scenario.radio.crc_on),
        "coding_rate_index": _num(scenario.radio.coding_rate_index),
        "scintillation_pfluc_db": _num(scenario.channel.scintillation_pfluc_db),
        "clutter_loss_db": _num(scenario.channel.clutter_loss_db),
        "shadowing_sigma_db": _num(scenario.channel.shadowing_sigma_db),
        "shadowing_table": "none" if table is None else ",".join(f"{_num(e)}:{_num(s)}" for e, s in table),
        "extra_margin_db": _num(scenario.channel.extra_margin_db),
        "tx_gain_dbi": _num(scenario.tx_gain_dbi),
        "rx_gain_dbi": _num(scenario.rx_gain_dbi),
        "density_per_km2": _num(scenario.density_per_km2),
        "period_s": _num(scenario.period_s),
        "duration_s": _num(scenario.duration_s),
        "replications": _num(scenario.replications),
        "base_seed": _num(scenario.base_seed),
        "isolation_matrix": ";".join(",".join(_num(v) for v in row) for row in iso),
        "demodulator_paths": _num(scenario.reception.demodulator_paths),
        "capture_mode": scenario.reception.capture_mode,
        "duty_cycle": "off" if scenario.duty_cycle is None else _num(scenario.duty_cycle),
        "prr_counts_suppressed": _flag(scenario.prr_counts_suppressed),
        "airtime_model": scenario.airtime_model,
        "timing_advance": _flag(scenario.timing_advance),
    }
    return "".join(f"{k}={v}\n" for k, v in fields.items())


def parse_overrides(pairs) -> dict[str, str]:
    """``--set key=value`` flags to a mapping."""
    out = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep:
            raise ConfigError(f"override '{pair}' is not key=value")
        out[key.strip()] = value.strip()
    return out
