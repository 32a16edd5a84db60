"""Experiment configuration: flat ``key=value`` files and validation."""
from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from typing import Mapping

OUTPUT_DIR_ENV = "NETCREATE_OUTPUT_DIR"

GENERATORS = ("complete", "lower_bound", "gnp")
MODELS = ("cooperative", "unilateral")
POLICIES = ("round_robin", "random", "greedy")
CHECKS = ("equilibrium", "lemmas", "poa")


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the field."""

    def __init__(self, field_name: str, reason: str):
        super().__init__(f"{field_name}: {reason}")
        self.field = field_name
        self.reason = reason


def parse_rational(text: str, field_name: str = "alpha") -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(field_name, f"not a rational number: {text!r}") from exc


def read_config_file(path: str | Path) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}", f"expected key=value, got {raw.strip()!r}")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


@dataclass
class ExperimentConfig:
    host_file: str | None = None
    generator: str | None = None
    n: int | None = None
    k: int | None = None
    l: int | None = None
    p: float | None = None
    graph_seed: int = 0
    model: str = "cooperative"
    alphas: list = field(default_factory=list)  # Fraction entries or the string "suggested"
    init: str = "empty"
    policy: str = "round_robin"
    seed: int = 0
    max_steps: int | None = None
    checks: list[str] = field(default_factory=lambda: list(CHECKS))
    output_dir: str | None = None
    name: str = "experiment"
    optimum_cap: int = 20
    jobs: int = 1

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)} | {"alpha"}
        cfg = cls()
        for key, raw in values.items():
            if raw is None:
                continue
            if key not in known:
                raise ConfigError(key, "unknown configuration key")
            text = str(raw) if not isinstance(raw, (list, tuple)) else raw
            if key in ("alpha", "alphas"):
                items = text if isinstance(text, (list, tuple)) else [t for t in text.split(",") if t.strip()]
                cfg.alphas = [
                    "suggested" if str(t).strip() == "suggested" else parse_rational(str(t), key) for t in items
                ]
            elif key == "checks":
                items = text if isinstance(text, (list, tuple)) else text.split(",")
                cfg.checks = [c.strip() for c in items if c.strip()]
            elif key in ("n", "k", "l", "graph_seed", "seed", "max_steps", "optimum_cap", "jobs"):
                try:
                    setattr(cfg, key, int(text))
                except ValueError as exc:
                    raise ConfigError(key, f"expected an integer, got {text!r}") from exc
            elif key == "p":
                try:
                    cfg.p = float(text)
                except ValueError as exc:
                    raise ConfigError(key, f"expected a probability, got {text!r}") from exc
            else:
                setattr(cfg, key, text)
        return cfg

    @property
    def resolved_output_dir(self) -> Path:
        return Path(self.output_dir or os.environ.get(OUTPUT_DIR_ENV) or ".")

    def validate(self) -> None:
        if (self.host_file is None) == (self.generator is None):
            raise ConfigError("host", "exactly one of host_file or generator is required")
        if self.generator is not None:
            if self.generator not in GENERATORS:
                raise ConfigError("generator", f"unknown generator {self.generator!r}; choose from {GENERATORS}")
            need = {"complete": ("n",), "lower_bound": ("k", "l"), "gnp": ("n", "p")}[self.generator]
            for name in need:
                if getattr(self, name) is None:
                    raise ConfigError(name, f"required by generator {self.generator!r}")
        if self.model not in MODELS:
            raise ConfigError("model", f"unknown model {self.model!r}")
        if not self.alphas:
            raise ConfigError("alpha", "at least one value is required")
        if "suggested" in self.alphas:
            if self.generator != "lower_bound":
                raise ConfigError("alpha", "'suggested' is only defined for the lower_bound generator")
            if len(self.alphas) != 1:
                raise ConfigError("alpha", "'suggested' cannot be combined with a sweep list")
        else:
            if any(a < 0 for a in self.alphas):
                raise ConfigError("alpha", "values must be nonnegative")
            if any(b <= a for a, b in zip(self.alphas, self.alphas[1:])):
                raise ConfigError("alpha", "sweep list must be strictly increasing")
        if self.policy not in POLICIES:
            raise ConfigError("policy", f"unknown policy {self.policy!r}")
        bad = [c for c in self.checks if c not in CHECKS]
        if bad:
            raise ConfigError("checks", f"unknown checks {bad}")
        kind, _, arg = self.init.partition(":")
        if kind not in ("empty", "host-complete", "g2", "file") or (kind == "file") != bool(arg):
            raise ConfigError("init", f"expected empty, host-complete, g2 or file:<path>, got {self.init!r}")
        if kind == "g2" and self.generator != "lower_bound":
            raise ConfigError("init", "g2 requires the lower_bound generator")
        if self.max_steps is not None and self.max_steps < 1:
            raise ConfigError("max_steps", "must be positive")
        if self.jobs < 1:
            raise ConfigError("jobs", "must be positive")
