import csv
import io
import json

import jsonschema
import pytest

from courier.courierctl import (
    ATTACKS,
    ConfigInvalid,
    ScenarioConfig,
    bench_throughput,
    build_world,
    run_attack_campaign,
    run_attack_suite,
    run_order,
    run_scenario,
    validate_report,
)
from courier.courierctl.attacks import parse_suite
from courier.courierctl.bench import check_counts
from courier.courierctl.cli import main
from courier.courierctl.report import orders_csv, resum_bits
from courier.netbus import PHASES, PROFILES


def strip_timing(report):
    out = dict(report)
    out.pop("timings_ms", None)
    return out


@pytest.mark.parametrize("change", [
    {"customers": 0},
    {"freshness_window_ms": 0},
    {"crp_db_size": 0},
    {"seed": -1},
    {"customers": True},
    {"latency_min_ms": 20, "latency_max_ms": 10},
    {"latency_max_ms": 3000},
    {"profile": "nope"},
    {"adversary": "sabotage"},
    {"curve": "P-384"},
    {"robot_verification": "during"},
])
def test_config_rejects_bad_values(change):
    with pytest.raises(ConfigInvalid):
        ScenarioConfig(**change)


def test_config_json_round_trip(tmp_path):
    cfg = ScenarioConfig(seed=7, customers=3, adversary="drop")
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert ScenarioConfig.load(path) == cfg
    with pytest.raises(ConfigInvalid):
        ScenarioConfig.from_dict({"seed": 1, "colour": "red"})


def test_scenario_report_is_schema_valid_and_passes():
    report = run_scenario(ScenarioConfig(seed=3, customers=2, orders_per_customer=2))
    validate_report(report)
    assert report["passed"] and report["summary"]["accepted"] == 4
    assert report["communication_cost"]["phases"]["order"]["bits"] == 448
    assert all(report["assertions"].values())


def test_schema_rejects_a_broken_report():
    report = run_scenario(ScenarioConfig(seed=3))
    del report["orders"]
    with pytest.raises(jsonschema.ValidationError):
        validate_report(report)


def test_same_seed_same_report_except_timings():
    cfg = ScenarioConfig(seed=11, customers=2)
    assert strip_timing(run_scenario(cfg)) == strip_timing(run_scenario(cfg))
    other = strip_timing(run_scenario(cfg.replace(seed=12)))
    assert other["orders"] != strip_timing(run_scenario(cfg))["orders"]


def test_robot_verification_before_customer_verification():
    report = run_scenario(ScenarioConfig(seed=5, robot_verification="before"))
    assert report["passed"]


def test_dropped_message_times_out_and_nothing_is_accepted():
    report = run_scenario(ScenarioConfig(seed=4, adversary="drop"))
    assert report["summary"]["accepted"] == 0
    assert report["assertions"]["adversary_never_accepted"]
    order = report["orders"][0]
    assert order["phases"]["order"]["status"] == "timeout"
    assert order["phases"]["order"]["reason"] == "timeout"


@pytest.mark.parametrize("policy", ["modify", "replay", "inject", "drop-all"])
def test_active_adversaries_never_get_an_order_accepted(policy):
    report = run_scenario(ScenarioConfig(seed=9, adversary=policy))
    assert report["summary"]["accepted"] == 0 and report["passed"]


def test_resummation_oracle_agrees_with_bus_accounting():
    world = build_world(ScenarioConfig(seed=2))
    r = run_order(world, world.wallets[0], next(iter(world.csp.catalog)), customer=0)
    from courier.netbus import phase_cost

    for name, profile in PROFILES.items():
        for phase in PHASES:
            assert resum_bits(r.records, phase, profile) == phase_cost(r.records, phase, profile)


def test_orders_csv_has_a_row_per_phase():
    report = run_scenario(ScenarioConfig(seed=3, customers=2))
    rows = list(csv.reader(io.StringIO(orders_csv(report))))
    assert len(rows) == 1 + 2 * len(PHASES)


def test_each_attack_is_rejected():
    report = run_attack_suite(ScenarioConfig(seed=3))
    validate_report(report)
    assert report["rejected"] == report["total"] == len(ATTACKS)


def test_empty_attack_suite_passes_vacuously():
    report = run_attack_suite(ScenarioConfig(), [])
    assert report["passed"] and report["vacuous"] and report["total"] == 0


def test_unknown_attack_name():
    with pytest.raises(ConfigInvalid):
        parse_suite("replay,teleport")
    with pytest.raises(ConfigInvalid):
        run_attack_suite(ScenarioConfig(), ["teleport"])


def test_attack_campaign_over_seeds():
    report = run_attack_campaign(ScenarioConfig(seed=20), ["replay", "puf-swap"], 2)
    validate_report(report)
    assert report["passed"] and [r["seed"] for r in report["runs"]] == [20, 21]


def test_bench_single_count_and_ordering():
    report = bench_throughput(ScenarioConfig(seed=1), [5])
    validate_report(report)
    assert len(report["rows"]) == 1 and report["median_ratio"] == 1.0
    with pytest.raises(ConfigInvalid):
        check_counts([10, 5])
    with pytest.raises(ConfigInvalid):
        check_counts([])


def test_bench_small_counts_are_flat():
    report = bench_throughput(ScenarioConfig(seed=1), [5, 50])
    assert report["passed"] and report["rows"][1]["accepted"] == 50


def test_cli_exit_codes(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["run", "--seed", "3", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["kind"] == "scenario"
    assert main(["attack", "--suite", "replay", "--out", str(tmp_path / "a.json")]) == 0
    assert main(["bench", "--orders", "3,6", "--out", str(tmp_path / "b.json")]) == 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"customers": 0}))
    assert main(["run", "--config", str(bad)]) == 2
    assert main(["bench", "--orders", "9,3"]) == 2
    assert main(["attack", "--suite", "teleport"]) == 2
    err = capsys.readouterr().err
    assert "invalid configuration" in err


def test_cli_failure_exit_code(tmp_path, monkeypatch):
    import courier.courierctl.cli as cli

    real = cli.run_scenario

    def failing(cfg):
        report = real(cfg)
        report["assertions"]["honest_orders_complete"] = False
        report["passed"] = False
        return report

    monkeypatch.setattr(cli, "run_scenario", failing)
    assert main(["run", "--out", str(tmp_path / "x.json")]) == 1
