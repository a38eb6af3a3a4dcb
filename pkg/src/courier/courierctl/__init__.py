"""Command-line harness: scenarios, attacks, benchmarks and their reports."""

from .attacks import ATTACKS, AttackResult, run_attack_campaign, run_attack_suite
from .bench import bench_throughput
from .config import ConfigInvalid, ScenarioConfig
from .report import run_scenario, validate_report
from .scenario import OrderResult, World, build_world, run_order

__all__ = [
    "ATTACKS",
    "AttackResult",
    "run_attack_campaign",
    "run_attack_suite",
    "bench_throughput",
    "ConfigInvalid",
    "ScenarioConfig",
    "run_scenario",
    "validate_report",
    "OrderResult",
    "World",
    "build_world",
    "run_order",
]
