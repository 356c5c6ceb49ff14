"""One place for every tolerance, constant and threshold.

A config file is a JSON object whose keys are a subset of the fields below;
missing keys keep their defaults and unknown keys are an error.  Reports
embed the resolved config.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .extract import LEDGER_CONSTANT, ExtractConfig
from .factor import DEFAULT_TOL
from .structure import GREEDY_SEEDS, RECT_EXACT_MAX_SIDE, TD_EXACT_MAX_DIM, TD_NODE_BUDGET


@dataclass(frozen=True)
class Config:
    tol: float = DEFAULT_TOL  # absolute, on entries and norms
    ledger_constant: float = LEDGER_CONSTANT  # C in (F - Π/2) / (C (40λ⁴)^d)
    td_exact_max_dim: int = TD_EXACT_MAX_DIM  # exact TD search when max(m, n) <= this
    td_node_budget: int = TD_NODE_BUDGET  # memo states for one exact try above it
    rect_exact_max_side: int = RECT_EXACT_MAX_SIDE  # exact rectangle when min(m, n) <= this
    greedy_seeds: int = GREEDY_SEEDS
    als_iters: int = 2000
    als_restarts: int = 8
    als_polish_steps: int = 60
    als_polish_max_entries: int = 20_000_000

    def __post_init__(self):
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")
        if self.ledger_constant <= 0:
            raise ValueError("ledger_constant must be positive")
        for name in ("td_exact_max_dim", "td_node_budget", "rect_exact_max_side", "greedy_seeds",
                     "als_iters", "als_restarts", "als_polish_steps", "als_polish_max_entries"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    def extract_config(self) -> ExtractConfig:
        return ExtractConfig(
            ledger_constant=self.ledger_constant,
            td_exact_max_dim=self.td_exact_max_dim,
            td_node_budget=self.td_node_budget,
            rect_exact_max_side=self.rect_exact_max_side,
            greedy_seeds=self.greedy_seeds,
        )

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "Config":
        if not isinstance(obj, dict):
            raise ValueError("config must be a JSON object")
        known = {f.name: f.type for f in fields(cls)}
        unknown = sorted(set(obj) - set(known))
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        base = cls()
        values = {}
        for key, value in obj.items():
            default = getattr(base, key)
            if isinstance(default, int) and not isinstance(value, bool) and isinstance(value, int):
                values[key] = value
            elif isinstance(default, float) and isinstance(value, (int, float)) and not isinstance(value, bool):
                values[key] = float(value)
            else:
                raise ValueError(f"config key {key!r} has the wrong type")
        return replace(base, **values)


def load_config(path: str | Path | None) -> Config:
    if path is None:
        return Config()
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc.msg}, line {exc.lineno})") from None
    return Config.from_json(obj)
