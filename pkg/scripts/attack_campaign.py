"""Run the named attack suite over consecutive seeds and print one line per attack.

    python3 scripts/attack_campaign.py [--runs 100] [--seed N]
"""

import argparse

from courier.courierctl import ATTACKS, ScenarioConfig, run_attack_campaign


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    report = run_attack_campaign(ScenarioConfig(seed=args.seed), list(ATTACKS), args.runs)
    for a in report["attacks"]:
        print(f"{a['name']:<22} {'rejected' if a['rejected'] else 'ACCEPTED'}  {a['detail']}")
    print(f"\n{report['rejected']}/{report['total']} attacks rejected; passed={report['passed']}")


if __name__ == "__main__":
    main()
