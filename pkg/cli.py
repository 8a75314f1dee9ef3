#!/usr/bin/env python3
"""
cli.py

    python cli.py run scenario.env --set period_s=30
    python cli.py sweep sweep.env --workers 4 --output results/sweep.csv
    python cli.py presets figures --out-dir results
    python cli.py verify
    python cli.py toa --payload 51

Exit codes: 0 success, 1 configuration error, 2 failed sweep points or
failed verification.
"""

from __future__ import annotations

import logging
import sys
from argparse import ArgumentParser
from pathlib import Path

from tabulate import tabulate

from configuration import LOG_LEVEL, OUTPUT_DIR, WORKERS
from engine import Scenario, replicate
from errors import ConfigError, SimulationError
from lora_phy import RATE_TABLE, RadioParams, SpreadingFactor, computed_time_on_air
from oracle import aloha_check, fuzz_disagreements
from scenario_config import from_mapping, load_config, parse_overrides
from sweep import (
    PRESETS,
    SweepSpec,
    check_figure_targets,
    emit_figures_data,
    failed_points,
    preset,
    run_sweep,
    write_results,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARTIAL = 2

ALOHA_CASES = (
    (5, SpreadingFactor.SF8, 60.0),
    (20, SpreadingFactor.SF10, 60.0),
    (50, SpreadingFactor.SF12, 30.0),
)


def _fmt(value, digits=4):
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.{digits}f}"
    return value


# -------------------------------
# Loading
# -------------------------------
def _load(path, overrides):
    overrides = parse_overrides(overrides)
    if path is None:
        return from_mapping(overrides)
    return load_config(path, overrides)


def _as_sweep(loaded) -> SweepSpec:
    if isinstance(loaded, SweepSpec):
        return loaded
    return SweepSpec(
        base=loaded,
        altitudes_km=(loaded.satellite.altitude_km,),
        beamwidths_deg=(loaded.satellite.beamwidth_deg,),
        total_gains_dbi=(loaded.total_gain_dbi,),
        periods_s=(loaded.period_s,),
    )


# -------------------------------
# run
# -------------------------------
def cmd_run(args) -> int:
    loaded = _load(args.config, args.set)
    if isinstance(loaded, SweepSpec):
        raise ConfigError("file defines sweep axes; use the 'sweep' command")
    scenario: Scenario = loaded

    print(f"📡 Running h={scenario.satellite.altitude_km:g} km, θ={scenario.satellite.beamwidth_deg:g}°, "
          f"gain={scenario.total_gain_dbi:g} dBi, p={scenario.period_s:g} s "
          f"({scenario.replications} replications)")
    agg = replicate(scenario)

    prr, prr_hw = agg.prr
    rate, rate_hw = agg.avg_data_rate_bps
    goodput, _ = agg.goodput_bps
    infeasible, _ = agg.infeasible_share
    print("\n📊 RESULT\n")
    print(tabulate(
        [
            ["Coverage radius [km]", _fmt(agg.coverage_radius_km, 2)],
            ["Devices", agg.device_count],
            ["PRR", f"{_fmt(prr)} ± {_fmt(prr_hw)}"],
            ["Avg data rate [bit/s]", f"{_fmt(rate, 1)} ± {_fmt(rate_hw, 1)}"],
            ["Goodput [bit/s]", _fmt(goodput, 2)],
            ["Infeasible share", _fmt(infeasible)],
            ["Sent / received", f"{agg.sent} / {agg.received}"],
        ],
        headers=["Metric", "Value"],
        tablefmt="psql",
    ))

    shares = agg.dr_distribution
    if shares is not None:
        print("\n📶 DR DISTRIBUTION\n")
        print(tabulate(
            [[f"DR{dr}", f"SF{12 - dr}", _fmt(share)] for dr, share in enumerate(shares)],
            headers=["DR", "SF", "Share"],
            tablefmt="psql",
        ))

    print("\n🧾 OUTCOMES\n")
    print(tabulate(sorted(agg.outcome_counts.items()), headers=["Outcome", "Packets"], tablefmt="psql"))
    return EXIT_OK


# -------------------------------
# sweep / presets
# -------------------------------
def _print_plan(specs: list[SweepSpec]):
    points = [p for spec in specs for p in spec.points()]
    print(f"\n🗺️ SWEEP PLAN ({len(points)} points)\n")
    print(tabulate(
        [[p.altitude_km, p.beamwidth_deg, p.total_gain_dbi, p.period_s] for p in points],
        headers=["Altitude [km]", "Beamwidth [°]", "Gain [dBi]", "Period [s]"],
        tablefmt="psql",
    ))


def _print_summary(rows):
    aggregates = [r for r in rows if r["row_type"] == "aggregate"]
    print(tabulate(
        [
            [r["altitude_km"], r["beamwidth_deg"], r["total_gain_dbi"], r["period_s"],
             r["device_count"], _fmt(r["prr"]), _fmt(r["avg_data_rate_bps"], 1), r["error"] or ""]
            for r in aggregates
        ],
        headers=["h [km]", "θ [°]", "G [dBi]", "p [s]", "Devices", "PRR", "Rate [bit/s]", "Error"],
        tablefmt="psql",
    ))


def _finish(rows) -> int:
    failed = failed_points(rows)
    if failed:
        print(f"⚠️ {failed} sweep point(s) failed; see the error column")
        return EXIT_PARTIAL
    print("✅ Sweep complete")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = _as_sweep(_load(args.config, args.set))
    output = args.output or spec.output
    fmt = args.format or spec.format

    _print_plan([spec])
    if args.dry_run:
        return EXIT_OK

    if output and Path(output).exists() and not args.force:
        raise FileExistsError(f"{output} exists (use --force to overwrite)")

    rows = run_sweep(spec, args.workers)
    _print_summary(rows)
    if output:
        path = write_results(rows, output, fmt, force=args.force)
        print(f"💾 Wrote {len(rows)} rows to {path}")
    return _finish(rows)


def cmd_presets(args) -> int:
    base = None
    if args.config or args.set:
        base = _load(args.config, args.set)
        if isinstance(base, SweepSpec):
            base = base.base
    specs = preset(args.name, base)

    _print_plan(specs)
    if args.dry_run:
        return EXIT_OK

    check_figure_targets(args.name, args.out_dir, force=args.force)
    rows = []
    for spec in specs:
        rows.extend(run_sweep(spec, args.workers))
    _print_summary(rows)

    for path in emit_figures_data(rows, args.name, args.out_dir, force=args.force):
        print(f"💾 {path}")
    return _finish(rows)


# -------------------------------
# verify
# -------------------------------
def cmd_verify(args) -> int:
    ok = True

    print(f"🔎 Fuzzing {args.traces} traces of up to {args.packets} packets against the oracle")
    disagreements = fuzz_disagreements(args.seed, args.traces, args.packets)
    if disagreements:
        ok = False
        print(f"❌ {disagreements} packet(s) disagree with the oracle")
    else:
        print("✅ Gateway and oracle agree on every packet")

    print(f"\n🔎 ALOHA check over {args.replications} replications\n")
    base = Scenario(base_seed=args.seed)
    checks = [aloha_check(n, sf, p, args.replications, base) for n, sf, p in ALOHA_CASES]
    print(tabulate(
        [
            [c.n_devices, c.sf.name, c.period_s, _fmt(c.expected, 5), _fmt(c.simulated, 5),
             _fmt(c.standard_error, 5), "✅" if c.passed else "❌"]
            for c in checks
        ],
        headers=["Devices", "SF", "Period [s]", "Closed form", "Simulated", "Std. error", "Pass"],
        tablefmt="psql",
    ))
    ok = ok and all(c.passed for c in checks)
    return EXIT_OK if ok else EXIT_PARTIAL


# -------------------------------
# toa
# -------------------------------
def cmd_toa(args) -> int:
    radio = RadioParams(
        bandwidth_hz=args.bandwidth,
        payload_bytes=args.payload,
        preamble_symbols=args.preamble,
        explicit_header=not args.implicit_header,
        crc_on=not args.no_crc,
        coding_rate_index=args.coding_rate,
    )
    rows = []
    for sf in SpreadingFactor:
        rows.append([
            sf.name,
            f"DR{sf.dr_index}",
            _fmt(computed_time_on_air(radio, sf) * 1000, 2),
            RATE_TABLE[sf].time_on_air_ms_32B,
        ])
    print(f"\n⏱️ TIME ON AIR ({args.payload} B, {args.bandwidth:g} Hz, CR 4/{args.coding_rate + 4})\n")
    print(tabulate(rows, headers=["SF", "DR", "Computed [ms]", "Table, 32 B [ms]"], tablefmt="psql"))
    return EXIT_OK


# -------------------------------
# CLI
# -------------------------------
def add_config_args(p):
    p.add_argument("config", nargs="?", help="Scenario or sweep file (key=value)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="Override a config key (repeatable)")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser("LoRa-over-LEO uplink simulator")
    sub = parser.add_subparsers(dest="cmd")

    p = sub.add_parser("run", help="Run one scenario")
    add_config_args(p)

    p = sub.add_parser("sweep", help="Run the cross-product of sweep axes")
    add_config_args(p)
    p.add_argument("--dry-run", action="store_true", help="Print the point plan without running")
    p.add_argument("--workers", type=int, default=WORKERS)
    p.add_argument("--output", help="Result file (overrides the file's output key)")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--force", action="store_true", help="Overwrite an existing result file")

    p = sub.add_parser("presets", help="Reproduce a figure configuration")
    p.add_argument("name", choices=PRESETS)
    add_config_args(p)
    p.add_argument("--out-dir", default=OUTPUT_DIR)
    p.add_argument("--dry-run", action="store_true")
    p.add_argument("--workers", type=int, default=WORKERS)
    p.add_argument("--force", action="store_true", help="Overwrite existing figure files")

    p = sub.add_parser("verify", help="Cross-check the gateway and the PRR against the oracles")
    p.add_argument("--traces", type=int, default=1000)
    p.add_argument("--packets", type=int, default=20)
    p.add_argument("--replications", type=int, default=50)
    p.add_argument("--seed", type=int, default=1)

    p = sub.add_parser("toa", help="Airtime calculator")
    p.add_argument("--payload", type=int, default=32)
    p.add_argument("--bandwidth", type=float, default=125_000.0)
    p.add_argument("--coding-rate", type=int, default=1, choices=[1, 2, 3, 4])
    p.add_argument("--preamble", type=int, default=8)
    p.add_argument("--implicit-header", action="store_true")
    p.add_argument("--no-crc", action="store_true")

    return parser


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "presets": cmd_presets,
    "verify": cmd_verify,
    "toa": cmd_toa,
}


def main(argv=None) -> int:
    logging.basicConfig(level=LOG_LEVEL, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    parser = build_parser()
    args = parser.parse_args(argv)
    handler = COMMANDS.get(args.cmd)
    if handler is None:
        parser.print_help()
        return EXIT_CONFIG

    try:
        return handler(args)
    except (SimulationError, FileExistsError) as e:
        print(f"❌ {e}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
