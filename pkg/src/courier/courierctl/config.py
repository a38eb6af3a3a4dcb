"""Scenario configuration, loaded from JSON with the same field names."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from ..cryptokit import CURVES
from ..netbus import PROFILES, parse_policy


class ConfigInvalid(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 42
    customers: int = 1
    orders_per_customer: int = 1
    freshness_window_ms: int = 2000
    crp_db_size: int = 1000
    robot_pool_size: int = 1
    adversary: str = "passive"
    profile: str = "default"
    latency_min_ms: int = 5
    latency_max_ms: int = 15
    robot_verification: str = "after"  # relative to customer verification
    curve: str = "P-256"

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        bounds = {
            "seed": (0, 2**63 - 1),
            "customers": (1, 100_000),
            "orders_per_customer": (1, 1_000),
            "freshness_window_ms": (1, 600_000),
            "crp_db_size": (1, 100_000),
            "robot_pool_size": (1, 100_000),
            "latency_min_ms": (0, 60_000),
            "latency_max_ms": (0, 60_000),
        }
        for name, (lo, hi) in bounds.items():
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or not lo <= v <= hi:
                raise ConfigInvalid(f"{name} must be an integer in [{lo}, {hi}], got {v!r}")
        if self.latency_min_ms > self.latency_max_ms:
            raise ConfigInvalid("latency_min_ms exceeds latency_max_ms")
        if self.crp_db_size * self.robot_pool_size > 20_000_000:
            raise ConfigInvalid("crp_db_size * robot_pool_size is too large to enrol")
        if self.latency_max_ms >= self.freshness_window_ms:
            raise ConfigInvalid("per-hop latency must stay below the freshness window")
        if self.profile not in PROFILES:
            raise ConfigInvalid(f"unknown accounting profile {self.profile!r}")
        if self.robot_verification not in ("before", "after"):
            raise ConfigInvalid("robot_verification must be 'before' or 'after'")
        if self.curve not in CURVES:
            raise ConfigInvalid(f"unknown curve {self.curve!r}")
        try:
            parse_policy(self.adversary)
        except ValueError as exc:
            raise ConfigInvalid(str(exc)) from None

    @property
    def total_orders(self) -> int:
        return self.customers * self.orders_per_customer

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def replace(self, **changes: Any) -> "ScenarioConfig":
        try:
            return dataclasses.replace(self, **changes)
        except TypeError as exc:
            raise ConfigInvalid(str(exc)) from None

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScenarioConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigInvalid(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: Path | str) -> "ScenarioConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigInvalid("config file must hold a JSON object")
        return cls.from_dict(data)
