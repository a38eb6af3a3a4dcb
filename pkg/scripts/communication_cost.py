"""Per-phase and per-message communication cost of one honest order.

    python3 scripts/communication_cost.py [--seed N] [--profile default|timestamped|wire]
"""

import argparse

from courier.courierctl import ScenarioConfig, run_scenario
from courier.netbus import PROFILES


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--profile", choices=sorted(PROFILES), default="default")
    args = ap.parse_args()
    report = run_scenario(ScenarioConfig(seed=args.seed, profile=args.profile))
    cost = report["communication_cost"]
    print(f"profile: {cost['profile']}")
    for phase, v in cost["phases"].items():
        ref = "-" if v["reference_bits"] is None else v["reference_bits"]
        print(f"\n{phase}: {v['bits']} bits (resummed {v['resummed_bits']}, wire {v['wire_bits']}, reference {ref})")
        for m in v["messages"]:
            print(f"  {m['kind']:<8} {m['sender']:>24} -> {m['receiver']:<24} {m['bits']:>5}")


if __name__ == "__main__":
    main()
