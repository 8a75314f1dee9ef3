"""
metrics.py

Evaluation quantities: packet reception ratio, DR distribution,
average data rate and goodput.

Undefined values (no packets sent, no served device) are None, never NaN.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from lora_phy import RATE_TABLE, LoraRate, SpreadingFactor
from traffic_mac import Outcome

N_DR = 6


@dataclass(frozen=True)
class MetricSet:
    sent: int
    received: int
    prr: float | None
    dr_distribution: tuple[float, ...] | None
    avg_data_rate_bps: float | None
    goodput_bps: float
    outcome_counts: dict[str, int]


def prr(sent: int, received: int) -> float | None:
    if received > sent:
        raise ValueError(f"received ({received}) exceeds sent ({sent})")
    if sent == 0:
        return None
    return received / sent


def dr_distribution(sfs) -> tuple[float, ...] | None:
    """Share of served devices per DR index 0..5; infeasible (None) entries are skipped."""
    served = [SpreadingFactor(sf) for sf in sfs if sf is not None]
    if not served:
        return None
    counts = Counter(sf.dr_index for sf in served)
    total = len(served)
    return tuple(counts.get(dr, 0) / total for dr in range(N_DR))


def avg_data_rate(
    dr_shares: tuple[float, ...] | None,
    rate_table: dict[SpreadingFactor, LoraRate] = RATE_TABLE,
) -> float | None:
    """Share-weighted nominal bit rate, bit/s."""
    if dr_shares is None:
        return None
    return sum(
        share * rate_table[SpreadingFactor.from_dr(dr)].bit_rate_bps
        for dr, share in enumerate(dr_shares)
    )


def goodput(received: int, payload_bytes: int, duration_s: float) -> float:
    return received * 8 * payload_bytes / duration_s


def count_outcomes(transmissions) -> dict[str, int]:
    counts = {o.value: 0 for o in Outcome if o is not Outcome.PENDING}
    for tx in transmissions:
        counts[tx.outcome.value] += 1
    return counts


def collect(
    transmissions,
    device_sfs,
    payload_bytes: int,
    duration_s: float,
    count_suppressed: bool = True,
    rate_table: dict[SpreadingFactor, LoraRate] = RATE_TABLE,
) -> MetricSet:
    counts = count_outcomes(transmissions)
    sent = sum(counts.values())
    if not count_suppressed:
        sent -= counts[Outcome.SUPPRESSED_DUTY_CYCLE.value]
    received = counts[Outcome.RECEIVED.value]

    shares = dr_distribution(device_sfs)
    return MetricSet(
        sent=sent,
        received=received,
        prr=prr(sent, received),
        dr_distribution=shares,
        avg_data_rate_bps=avg_data_rate(shares, rate_table),
        goodput_bps=goodput(received, payload_bytes, duration_s),
        outcome_counts=counts,
    )
