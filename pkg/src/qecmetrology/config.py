"""Run configuration files (JSON) for the command-line tool."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

__all__ = [
    "ConfigError",
    "QfiParams",
    "SweepParams",
    "OptimizeParams",
    "CodesParams",
    "VerifyParams",
    "ScenarioParams",
    "RunConfig",
    "PARAMS",
    "load_config",
]


class ConfigError(ValueError):
    pass


@dataclass
class QfiParams:
    model: str = "dephased-ghz"
    N: int = 2
    p: float = 0.9
    t: Optional[float] = None
    oracle: Optional[bool] = None

    def validate(self):
        if self.model not in ("dephased-ghz", "depolarized-ghz"):
            raise ConfigError(f"unknown model {self.model!r}")
        if self.N < 1:
            raise ConfigError("N must be >= 1")
        lo = 0.5 if self.model == "dephased-ghz" else 0.0
        if not lo <= self.p <= 1.0:
            raise ConfigError(f"p must lie in [{lo}, 1]")
        if self.t is not None and self.t < 0:
            raise ConfigError("t must be >= 0")


@dataclass
class SweepParams:
    n_values: list = field(default_factory=lambda: [1, 10, 100, 1000])
    m_policy: str = "fixed"
    m: int = 3
    mode: str = "frequency"
    gamma: float = 0.01
    p: Optional[float] = None
    t0: float = 1.0
    t_max: float = 1.0
    numeric: bool = True
    workers: int = 1
    plot: bool = False

    def validate(self):
        if not self.n_values:
            raise ConfigError("empty N grid")
        if any(int(n) != n or n < 1 for n in self.n_values):
            raise ConfigError("N values must be positive integers")
        self.n_values = [int(n) for n in self.n_values]


@dataclass
class OptimizeParams:
    N: int = 100
    m: int = 3
    gamma: float = 1.0
    t_max: Optional[float] = None
    t_min: Optional[float] = None

    def validate(self):
        if self.N < 1 or self.m < 1 or self.m % 2 == 0:
            raise ConfigError("need N >= 1 and odd m >= 1")
        if not self.gamma > 0:
            raise ConfigError("gamma must be > 0")


@dataclass
class CodesParams:
    p_values: list = field(default_factory=lambda: [0.9, 0.99, 0.999])
    m_values: list = field(default_factory=lambda: [1, 3, 5, 7, 9, 11])
    levels: int = 2

    def validate(self):
        if any(not 0 <= p <= 1 for p in self.p_values):
            raise ConfigError("p values must lie in [0, 1]")
        if any(m < 1 or m % 2 == 0 for m in self.m_values):
            raise ConfigError("m values must be odd and >= 1")
        if self.levels < 0:
            raise ConfigError("levels must be >= 0")


@dataclass
class VerifyParams:
    checks: list = field(default_factory=list)
    m: list = field(default_factory=list)
    tolerance_scale: float = 1.0

    def validate(self):
        from .checks import CHECKS

        bad = [c for c in self.checks if c not in CHECKS]
        if bad:
            raise ConfigError(f"unknown checks {bad}; choose from {sorted(CHECKS)}")
        if not self.tolerance_scale >= 0:
            raise ConfigError("tolerance scale must be >= 0")


@dataclass
class ScenarioParams:
    kind: str = "I"
    N: int = 2
    m: int = 3
    noise: str = "dephasing"
    p: Optional[float] = None
    gamma: Optional[float] = None
    t: float = 1.0
    theta: float = 0.1
    lam: Optional[float] = None
    code: Optional[dict] = None
    trotter_steps: int = 20
    noise_qubits: str = "all"

    def validate(self):
        if self.kind not in ("I", "II", "demo"):
            raise ConfigError(f"unknown scenario kind {self.kind!r}")
        if self.noise not in ("dephasing", "depolarizing", "transversal"):
            raise ConfigError(f"unknown noise {self.noise!r}")
        if self.p is not None and self.gamma is not None:
            raise ConfigError("give p or gamma, not both")
        if self.code is not None:
            from .codes import CodeSpec

            try:
                CodeSpec.from_dict(self.code)
            except (ValueError, KeyError, TypeError) as exc:
                raise ConfigError(f"bad code: {exc}") from exc


PARAMS = {
    "qfi": QfiParams,
    "sweep": SweepParams,
    "optimize-time": OptimizeParams,
    "codes": CodesParams,
    "verify": VerifyParams,
    "scenario": ScenarioParams,
}

_TOP_KEYS = {"command", "params", "output_dir", "seed", "format"}
FORMATS = ("csv", "json", "text")


def _params_from(cls, data: dict):
    if not isinstance(data, dict):
        raise ConfigError("params must be a mapping")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown keys for {cls.__name__}: {sorted(unknown)}")
    obj = cls(**data)
    obj.validate()
    return obj


@dataclass
class RunConfig:
    command: str
    params: Any = None
    output_dir: Optional[str] = None
    seed: int = 0
    format: str = "csv"

    def __post_init__(self):
        if self.command not in PARAMS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.params is None:
            self.params = PARAMS[self.command]()
        elif isinstance(self.params, dict):
            self.params = _params_from(PARAMS[self.command], self.params)
        elif not isinstance(self.params, PARAMS[self.command]):
            raise ConfigError("params do not match the command")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "params": dataclasses.asdict(self.params),
            "output_dir": self.output_dir,
            "seed": self.seed,
            "format": self.format,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - _TOP_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "command" not in d:
            raise ConfigError("config needs a command")
        return cls(d["command"], d.get("params") or {}, d.get("output_dir"), d.get("seed", 0), d.get("format", "csv"))

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc

    def with_overrides(self, overrides: dict) -> "RunConfig":
        """Copy with the non-None entries of ``overrides`` replacing parameter values."""
        data = dataclasses.asdict(self.params)
        for k, v in overrides.items():
            if v is None:
                continue
            if k not in data:
                raise ConfigError(f"{k!r} is not a parameter of {self.command}")
            data[k] = v
        return RunConfig(self.command, data, self.output_dir, self.seed, self.format)


def load_config(path: str | Path) -> RunConfig:
    return RunConfig.from_json(Path(path).read_text(encoding="utf-8"))
