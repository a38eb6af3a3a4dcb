"""Latency under load: many simultaneous orders against one CSP."""

from __future__ import annotations

import time
from typing import Any, Optional, Sequence

from ..netbus import PHASES
from .config import ConfigInvalid, ScenarioConfig
from .report import DISCLAIMER, _stats
from .scenario import build_world, run_order

DEFAULT_COUNTS = (10, 100, 1000, 10000)
# Each parallel order needs its own robot; a small table keeps enrolment cheap.
BENCH_CRP_DB_SIZE = 8
FLATNESS_BOUND = 2.0


def check_counts(counts: Sequence[int]) -> list[int]:
    counts = list(counts)
    if not counts:
        raise ConfigInvalid("need at least one order count")
    if any(isinstance(c, bool) or not isinstance(c, int) or not 1 <= c <= 100_000 for c in counts):
        raise ConfigInvalid("order counts must be integers in [1, 100000]")
    if any(b <= a for a, b in zip(counts, counts[1:])):
        raise ConfigInvalid("order counts must be strictly ascending")
    return counts


def bench_row(config: ScenarioConfig, count: int) -> dict[str, Any]:
    """Run ``count`` orders that all start at simulated time zero."""
    cfg = config.replace(
        customers=count, orders_per_customer=1, robot_pool_size=count,
        crp_db_size=min(config.crp_db_size, BENCH_CRP_DB_SIZE),
    )
    t0 = time.perf_counter()
    world = build_world(cfg)
    setup_s = time.perf_counter() - t0
    pids = list(world.csp.catalog)
    e2e, per_phase, accepted = [], {p: [] for p in PHASES}, 0
    t1 = time.perf_counter()
    for i, wallet in enumerate(world.wallets):
        r = run_order(world, wallet, pids[i % len(pids)], customer=i, start_ms=0, release=False)
        accepted += r.accepted
        if r.end_to_end_ms is not None:
            e2e.append(r.end_to_end_ms)
        for p, v in r.phases.items():
            if v.latency_ms is not None:
                per_phase[p].append(v.latency_ms)
        world.bus.log.clear()  # only latencies are kept at this scale
    run_s = time.perf_counter() - t1
    return {
        "orders": count,
        "accepted": accepted,
        "end_to_end_ms": _stats(e2e),
        "phases_ms": {p: _stats(v) for p, v in per_phase.items()},
        "wall_clock_s": {"setup": setup_s, "run": run_s, "per_order_ms": 1e3 * run_s / count},
    }


def bench_throughput(
    config: ScenarioConfig, counts: Sequence[int] = DEFAULT_COUNTS, profile: Optional[str] = None
) -> dict[str, Any]:
    counts = check_counts(counts)
    if profile is not None:
        config = config.replace(profile=profile)
    rows = [bench_row(config, c) for c in counts]
    first, last = rows[0]["end_to_end_ms"]["median"], rows[-1]["end_to_end_ms"]["median"]
    ratio = (last / first) if first else None
    assertions = {
        "all_orders_accepted": all(r["accepted"] == r["orders"] for r in rows),
        "latency_flat": ratio is not None and ratio <= FLATNESS_BOUND,
    }
    return {
        "kind": "bench",
        "config": config.to_dict(),
        "counts": counts,
        "rows": rows,
        "median_ratio": ratio,
        "flatness_bound": FLATNESS_BOUND,
        "assertions": assertions,
        "passed": all(assertions.values()),
        "disclaimer": DISCLAIMER,
    }
