"""Run configuration: a flat ``key = value`` file, environment and CLI flags.

Precedence, highest first: explicit CLI flag, ``ESCARGOT_PREC`` (precision
only), config file, built-in default.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields
from pathlib import Path

ENV_PREC = "ESCARGOT_PREC"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    n0: int = 10
    n1: int = 12
    log10_a3: float = 100.0
    n_max: int = 40
    prec: int = 0  # 0: automatic per-index policy
    samples: int = 64
    k_max: int = 5  # depth of the T2 direct check
    out: str = "out"
    region: str = ""
    resolution: str = "64x64"
    n: int = 0  # orbit start index, 0: N1
    depth: int = 3
    steps: int = 4  # render iteration budget
    disc_lo: int = 0  # 0: N1
    disc_hi: int = 0  # 0: last index the policy keeps at <= max_disc_prec digits
    max_disc_prec: int = 200

    def __post_init__(self):
        self.validate()

    def validate(self) -> "RunConfig":
        if self.n0 < 4 or self.n0 % 2:
            raise ConfigError(f"n0 must be an even integer >= 4, got {self.n0}")
        if self.n1 < self.n0 + 2:
            raise ConfigError(f"n1 must be >= n0 + 2, got n0={self.n0} n1={self.n1}")
        if self.n_max <= self.n1:
            raise ConfigError(f"n_max must exceed n1, got n1={self.n1} n_max={self.n_max}")
        if self.log10_a3 < 10:
            raise ConfigError(f"log10_a3 must be >= 10, got {self.log10_a3}")
        if self.prec < 0 or 0 < self.prec < 4:
            raise ConfigError(f"prec must be 0 (auto) or >= 4, got {self.prec}")
        if self.samples < 8:
            raise ConfigError(f"samples must be >= 8, got {self.samples}")
        if self.k_max < 1 or self.depth < 0 or self.steps < 1:
            raise ConfigError("k_max and steps must be >= 1 and depth >= 0")
        if self.max_disc_prec < 30:
            raise ConfigError("max_disc_prec must be >= 30")
        parse_resolution(self.resolution)
        return self

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def with_overrides(self, **kw) -> "RunConfig":
        return dataclasses.replace(self, **kw)


def parse_resolution(text: str) -> tuple[int, int]:
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise ConfigError(f"resolution must look like WxH, got {text!r}") from None
    if not (1 <= w <= 4096 and 1 <= h <= 4096):
        raise ConfigError(f"resolution out of range: {text}")
    return w, h


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def coerce(key: str, value: str):
    kind = _TYPES[key]
    try:
        if kind in ("int", int):
            return int(value)
        if kind in ("float", float):
            return float(value)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {value!r}") from None
    return value


def normalise_key(key: str) -> str:
    k = key.strip().lower().replace("-", "_")
    if k not in _TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    return k


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        k, v = line.split("=", 1)
        key = normalise_key(k)
        out[key] = coerce(key, v.strip())
    return out


def resolve(file_values: dict | None = None, cli_values: dict | None = None,
            environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    merged = dict(file_values or {})
    env = environ.get(ENV_PREC)
    if env not in (None, ""):
        merged["prec"] = coerce("prec", env)
    for k, v in (cli_values or {}).items():
        if v is not None:
            merged[normalise_key(k)] = v
    try:
        return RunConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def dump_config(cfg: RunConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in cfg.as_dict().items())
