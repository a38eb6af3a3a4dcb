"""Median simulated end-to-end latency against the number of parallel orders.

    python3 scripts/throughput.py [--orders 10,100,1000,10000] [--seed N]
"""

import argparse

from courier.courierctl import ScenarioConfig, bench_throughput
from courier.courierctl.bench import DEFAULT_COUNTS


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--orders", default=",".join(map(str, DEFAULT_COUNTS)))
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    counts = [int(c) for c in args.orders.split(",")]
    report = bench_throughput(ScenarioConfig(seed=args.seed), counts)
    print(f"{'orders':>7} {'accepted':>9} {'median ms':>10} {'p95 ms':>8} {'wall ms/order':>14}")
    for row in report["rows"]:
        e2e = row["end_to_end_ms"]
        print(f"{row['orders']:>7} {row['accepted']:>9} {e2e['median']:>10} {e2e['p95']:>8} "
              f"{row['wall_clock_s']['per_order_ms']:>14.2f}")
    print(f"\nmedian ratio {report['median_ratio']:.3f} (bound {report['flatness_bound']}); passed={report['passed']}")
    print(report["disclaimer"])


if __name__ == "__main__":
    main()
