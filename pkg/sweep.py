"""
sweep.py

Scenario sweeps over (altitude, beamwidth, gain, period), the named
figure presets, and CSV / JSON result emission.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import multiprocessing as mp
from dataclasses import dataclass, field, replace
from pathlib import Path

from channel import SHADOWING_PROFILES
from engine import AggregateResult, Scenario, replicate
from errors import ConfigError
from geometry import SatelliteConfig

logger = logging.getLogger(__name__)

FIGURE_ALTITUDES_KM = (200.0, 300.0, 400.0, 500.0, 600.0, 700.0)
FIGURE_BEAMWIDTHS_DEG = (5.0, 10.0, 15.0)
FIGURE_PERIODS_S = (60.0, 30.0, 10.0)

# Extra loss that reproduces the published DR allocations
FIGURE_EXTRA_MARGIN_DB = 5.0

FORMATS = ("csv", "json")

COLUMNS = (
    "altitude_km",
    "beamwidth_deg",
    "total_gain_dbi",
    "period_s",
    "row_type",
    "replication",
    "seed",
    "device_count",
    "coverage_radius_km",
    "prr",
    "prr_half_width",
    "avg_data_rate_bps",
    "avg_data_rate_half_width",
    "goodput_bps",
    "dr_share_0",
    "dr_share_1",
    "dr_share_2",
    "dr_share_3",
    "dr_share_4",
    "dr_share_5",
    "infeasible_share",
    "sent",
    "received",
    "lost_sensitivity",
    "lost_interference",
    "lost_no_demodulator",
    "suppressed_duty_cycle",
    "error",
)


# -------------------------------
# Sweep definition
# -------------------------------
@dataclass(frozen=True)
class SweepPoint:
    altitude_km: float
    beamwidth_deg: float
    total_gain_dbi: float
    period_s: float


@dataclass(frozen=True)
class SweepSpec:
    base: Scenario = field(default_factory=Scenario)
    altitudes_km: tuple[float, ...] = (500.0,)
    beamwidths_deg: tuple[float, ...] = (10.0,)
    total_gains_dbi: tuple[float, ...] = (5.0,)
    periods_s: tuple[float, ...] = (60.0,)
    output: str | None = None
    format: str = "csv"

    def __post_init__(self):
        for key in ("altitudes_km", "beamwidths_deg", "total_gains_dbi", "periods_s"):
            if not getattr(self, key):
                raise ConfigError("sweep axis must not be empty", key=key)
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {', '.join(FORMATS)}", key="format")

    def points(self) -> list[SweepPoint]:
        return [
            SweepPoint(h, theta, g, p)
            for g, p, theta, h in itertools.product(
                self.total_gains_dbi, self.periods_s, self.beamwidths_deg, self.altitudes_km
            )
        ]

    def scenario_for(self, point: SweepPoint) -> Scenario:
        base = self.base
        # only the sum enters the budget; keep the base tx gain
        return base.replace(
            satellite=SatelliteConfig(point.altitude_km, point.beamwidth_deg, base.satellite.earth_radius_km),
            rx_gain_dbi=point.total_gain_dbi - base.tx_gain_dbi,
            period_s=point.period_s,
        )


# -------------------------------
# Presets
# -------------------------------
def figure_calibration(scenario: Scenario) -> Scenario:
    return scenario.replace(
        channel=replace(
            scenario.channel,
            extra_margin_db=FIGURE_EXTRA_MARGIN_DB,
            shadowing_table=SHADOWING_PROFILES["rural-los"],
        )
    )


PRESET_FILES = {
    "coverage": ("coverage.csv",),
    "gain5": ("dr_distribution_g5.csv", "avg_rate_g5.csv", "prr_g5.csv"),
    "gain10": ("dr_distribution_g10.csv", "avg_rate_g10.csv", "prr_g10.csv"),
    "period": ("prr_period.csv",),
}
PRESET_FILES["figures"] = tuple(f for files in PRESET_FILES.values() for f in files)

PRESETS = tuple(PRESET_FILES)


def preset(name: str, base: Scenario | None = None) -> list[SweepSpec]:
    """Sweep(s) behind one of the named figure configurations."""
    base = figure_calibration(base or Scenario())

    def grid(gain):
        return SweepSpec(
            base=base,
            altitudes_km=FIGURE_ALTITUDES_KM,
            beamwidths_deg=FIGURE_BEAMWIDTHS_DEG,
            total_gains_dbi=(gain,),
            periods_s=(60.0,),
        )

    period = SweepSpec(
        base=base,
        altitudes_km=FIGURE_ALTITUDES_KM,
        beamwidths_deg=(10.0,),
        total_gains_dbi=(10.0,),
        periods_s=FIGURE_PERIODS_S,
    )

    if name in ("coverage", "gain5"):
        return [grid(5.0)]
    if name == "gain10":
        return [grid(10.0)]
    if name == "period":
        return [period]
    if name == "figures":
        # the p=60 s column of the period grid is already part of the gain-10 grid
        rest = tuple(p for p in FIGURE_PERIODS_S if p != 60.0)
        return [grid(5.0), grid(10.0), replace(period, periods_s=rest)]
    raise ConfigError(f"unknown preset '{name}' (choose from {', '.join(PRESETS)})", key="preset")


# -------------------------------
# Running
# -------------------------------
@dataclass(frozen=True)
class PointResult:
    point: SweepPoint
    aggregate: AggregateResult | None
    error: str | None = None


def _run_point(args) -> PointResult:
    spec, point = args
    try:
        return PointResult(point, replicate(spec.scenario_for(point)))
    except Exception as e:
        # a failed point must not stop the sweep
        logger.error("❌ sweep point %s failed: %s", point, e)
        return PointResult(point, None, f"{type(e).__name__}: {e}")


def run_points(spec: SweepSpec, workers: int = 1) -> list[PointResult]:
    """Run every point; results come back in axis order whatever the completion order."""
    jobs = [(spec, p) for p in spec.points()]
    logger.info("📡 sweep of %d points x %d replications", len(jobs), spec.base.replications)

    if workers <= 1 or len(jobs) <= 1:
        return [_run_point(j) for j in jobs]

    with mp.Pool(min(workers, len(jobs))) as pool:
        return pool.map(_run_point, jobs)


def _base_row(point: SweepPoint) -> dict:
    return {
        "altitude_km": point.altitude_km,
        "beamwidth_deg": point.beamwidth_deg,
        "total_gain_dbi": point.total_gain_dbi,
        "period_s": point.period_s,
    }


def _dr_columns(shares) -> dict:
    return {f"dr_share_{i}": (shares[i] if shares is not None else None) for i in range(6)}


def _outcome_columns(counts: dict) -> dict:
    return {k: counts.get(k, 0) for k in (
        "lost_sensitivity", "lost_interference", "lost_no_demodulator", "suppressed_duty_cycle"
    )}


def rows_for(result: PointResult) -> list[dict]:
    """One row per replication followed by the aggregate row."""
    if result.aggregate is None:
        row = dict.fromkeys(COLUMNS)
        row.update(_base_row(result.point), row_type="aggregate", error=result.error)
        return [row]

    agg = result.aggregate
    rows = []
    for r in agg.runs:
        row = dict.fromkeys(COLUMNS)
        row.update(_base_row(result.point))
        row.update(
            row_type="replication",
            replication=r.replication_index,
            seed=r.seed,
            device_count=r.device_count,
            coverage_radius_km=r.coverage_radius_km,
            prr=r.prr,
            avg_data_rate_bps=r.avg_data_rate_bps,
            goodput_bps=r.goodput_bps,
            infeasible_share=r.infeasible_share,
            sent=r.sent,
            received=r.received,
        )
        row.update(_dr_columns(r.dr_distribution))
        row.update(_outcome_columns(r.outcome_counts))
        rows.append(row)

    prr_mean, prr_hw = agg.prr
    rate_mean, rate_hw = agg.avg_data_rate_bps
    row = dict.fromkeys(COLUMNS)
    row.update(_base_row(result.point))
    row.update(
        row_type="aggregate",
        seed=agg.scenario.base_seed,
        device_count=agg.device_count,
        coverage_radius_km=agg.coverage_radius_km,
        prr=prr_mean,
        prr_half_width=prr_hw,
        avg_data_rate_bps=rate_mean,
        avg_data_rate_half_width=rate_hw,
        goodput_bps=agg.goodput_bps[0],
        infeasible_share=agg.infeasible_share[0],
        sent=agg.sent,
        received=agg.received,
    )
    row.update(_dr_columns(agg.dr_distribution))
    row.update(_outcome_columns(agg.outcome_counts))
    rows.append(row)
    return rows


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[dict]:
    rows = []
    for result in run_points(spec, workers):
        rows.extend(rows_for(result))
    return rows


def failed_points(rows: list[dict]) -> int:
    return sum(1 for r in rows if r.get("error"))


# -------------------------------
# Emission
# -------------------------------
def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_csv(rows: list[dict], columns=COLUMNS) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def to_json(rows: list[dict], columns=COLUMNS) -> str:
    return json.dumps([{c: row.get(c) for c in columns} for row in rows], indent=2)


def write_results(rows: list[dict], path, fmt: str = "csv", force: bool = False) -> Path:
    path = Path(path)
    if path.exists() and not force:
        raise FileExistsError(f"{path} exists (use --force to overwrite)")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_csv(rows) if fmt == "csv" else to_json(rows))
    return path


# -------------------------------
# Figure data
# -------------------------------
def _aggregates(rows):
    return [r for r in rows if r["row_type"] == "aggregate"]


def _select(rows, gain=None, period=None):
    seen = set()
    out = []
    for r in _aggregates(rows):
        if gain is not None and r["total_gain_dbi"] != gain:
            continue
        if period is not None and r["period_s"] != period:
            continue
        key = (r["altitude_km"], r["beamwidth_deg"], r["total_gain_dbi"], r["period_s"])
        if key in seen:
            continue
        seen.add(key)
        out.append(r)
    return out


def figure_tables(rows: list[dict], preset_name: str) -> dict[str, tuple[tuple, list[dict]]]:
    """Tidy per-panel tables: filename -> (columns, rows)."""
    tables = {}
    axes = ("altitude_km", "beamwidth_deg")

    def add(filename, columns, selected):
        tables[filename] = (columns, selected)

    wanted = PRESET_FILES[preset_name]
    if "coverage.csv" in wanted:
        add("coverage.csv", axes + ("coverage_radius_km", "device_count"), _select(rows, gain=5.0, period=60.0))
    for gain, tag in ((5.0, "g5"), (10.0, "g10")):
        selected = _select(rows, gain=gain, period=60.0)
        if f"dr_distribution_{tag}.csv" in wanted:
            add(f"dr_distribution_{tag}.csv",
                axes + tuple(f"dr_share_{i}" for i in range(6)) + ("infeasible_share",), selected)
        if f"avg_rate_{tag}.csv" in wanted:
            add(f"avg_rate_{tag}.csv", axes + ("avg_data_rate_bps", "avg_data_rate_half_width"), selected)
        if f"prr_{tag}.csv" in wanted:
            add(f"prr_{tag}.csv", axes + ("prr", "prr_half_width", "sent", "received"), selected)
    if "prr_period.csv" in wanted:
        add("prr_period.csv", ("altitude_km", "period_s", "prr", "prr_half_width", "sent", "received"),
            [r for r in _select(rows, gain=10.0) if r["beamwidth_deg"] == 10.0])
    return tables


def check_figure_targets(preset_name: str, out_dir, force: bool = False) -> list[Path]:
    """Paths a preset will write; raises when any exists and force is off."""
    targets = [Path(out_dir) / name for name in PRESET_FILES[preset_name]]
    existing = [p for p in targets if p.exists()]
    if existing and not force:
        raise FileExistsError(
            f"{', '.join(str(p) for p in existing)} already exist (use --force to overwrite)"
        )
    return targets


def emit_figures_data(rows: list[dict], preset_name: str, out_dir, force: bool = False) -> list[Path]:
    out_dir = Path(out_dir)
    tables = figure_tables(rows, preset_name)
    check_figure_targets(preset_name, out_dir, force)

    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, (columns, selected) in tables.items():
        path = out_dir / name
        path.write_text(to_csv(selected, columns))
        written.append(path)
    return written
