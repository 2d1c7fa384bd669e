"""Flat ``key = value`` run configuration.

One setting per line; ``#`` starts a comment; blank lines are ignored.
Keys are case-sensitive and may appear at most once.  See the README for
the full list of keys and their defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

from .contact import FRICTION, LAWS, STICKY
from .errors import ConfigError, InvalidInputError
from .scenarios import SCENARIOS, TWO_BLOCK_END_TIME, TWO_BLOCK_K, ramp_time_for_displacement
from .toy1d import TAU_SWEEP
from .transfers import APIC, MODES

TOY_END_TIME = 40.0


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    mode: str = APIC
    law: str = FRICTION
    mu: float = 0.0
    iterations: int | None = None  # resolved to 1, or 0 for the sticky law
    k: int = 0
    h: float = 0.25
    dt: float | None = None  # scenario rule when unset
    tau: float | None = None  # equals dt when unset
    end_time: float | None = None  # scenario default when unset
    out: str = "out"
    snapshot_every: int = 100
    diagnostics_every: int = 10
    seed: int = 0
    taus: tuple = TAU_SWEEP

    def resolved(self) -> "RunConfig":
        """Validate and fill every default that depends on other settings."""
        cfg = self
        if cfg.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {cfg.scenario!r}; choose from {', '.join(SCENARIOS)}", "scenario")
        if cfg.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}", "mode")
        if cfg.law not in LAWS:
            raise ConfigError(f"law must be one of {', '.join(LAWS)}", "law")
        if not (math.isfinite(cfg.mu) and cfg.mu >= 0):
            raise ConfigError("friction coefficient must be non-negative", "mu")
        iterations = cfg.iterations
        if iterations is None:
            iterations = 0 if cfg.law == STICKY else 1
        if iterations < 0:
            raise ConfigError("augury iterations must be non-negative", "iterations")
        if (cfg.law == STICKY) != (iterations == 0):
            raise ConfigError("the sticky law goes with zero iterations and only with it", "iterations")
        if cfg.scenario == "two-block" and cfg.k not in TWO_BLOCK_K:
            raise ConfigError(f"k must be one of {TWO_BLOCK_K}", "k")
        if cfg.scenario == "ramp" and not cfg.h > 0:
            raise ConfigError("mesh size must be positive", "h")
        for key in ("dt", "tau", "end_time"):
            val = getattr(cfg, key)
            if val is not None and not (math.isfinite(val) and val > 0):
                raise ConfigError(f"{key} must be positive", key)
        for key in ("snapshot_every", "diagnostics_every"):
            if getattr(cfg, key) < 1:
                raise ConfigError(f"{key} must be at least 1", key)
        if not cfg.taus or any(not (math.isfinite(t) and t > 0) for t in cfg.taus):
            raise ConfigError("taus must be a non-empty list of positive numbers", "taus")
        if not cfg.out:
            raise ConfigError("output directory must not be empty", "out")

        dt = cfg.dt
        if dt is None and cfg.scenario == "two-block":
            dt = 1e-4 * 2.0**cfg.k
        elif dt is None and cfg.scenario == "ramp":
            h = 1.0 / 3.0 if abs(cfg.h - 0.33) < 1e-12 else cfg.h
            dt = 2.5e-5 * h
        end_time = cfg.end_time
        if end_time is None:
            end_time = {"two-block": TWO_BLOCK_END_TIME, "toy1d": TOY_END_TIME}.get(cfg.scenario)
        if end_time is None:
            # ramp: run until the rigid-body solution has moved one unit
            try:
                end_time = ramp_time_for_displacement(1.0, mu=cfg.mu)
            except InvalidInputError:
                raise ConfigError("the block does not slide at this mu; set end_time explicitly", "end_time") from None
        cfg = replace(cfg, iterations=iterations, dt=dt, end_time=end_time)
        if cfg.scenario != "toy1d" and cfg.tau is None:
            cfg = replace(cfg, tau=dt)
        return cfg


_FIELDS = {f.name: f for f in fields(RunConfig)}
_INT_KEYS = {"iterations", "k", "snapshot_every", "diagnostics_every", "seed"}
_FLOAT_KEYS = {"mu", "h", "dt", "tau", "end_time"}


def _convert(key, raw, line):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            val = float(raw)
            if not math.isfinite(val):
                raise ValueError(raw)
            return val
        if key == "taus":
            return tuple(float(t) for t in raw.replace(",", " ").split())
    except ValueError:
        kind = "integer" if key in _INT_KEYS else "number" if key in _FLOAT_KEYS else "list of numbers"
        raise ConfigError(f"expected {kind}, got {raw!r}", key, line) from None
    if key in ("mode", "law"):
        return raw.lower()
    return raw


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Parse configuration text, apply ``overrides`` and resolve defaults."""
    values, lines = {}, {}
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"expected 'key = value', got {content!r}", line=number)
        key, raw = (part.strip() for part in content.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError("unknown key", key, number)
        if key in values:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", key, number)
        if not raw:
            raise ConfigError("missing value", key, number)
        values[key] = _convert(key, raw, number)
        lines[key] = number
    for key, val in (overrides or {}).items():
        if val is not None:
            values[key] = val
            lines.pop(key, None)
    if "scenario" not in values:
        raise ConfigError("missing scenario", "scenario")
    try:
        return RunConfig(**values).resolved()
    except ConfigError as exc:
        if exc.line is None and exc.key in lines:
            raise ConfigError(exc.reason, exc.key, lines[exc.key]) from None
        raise


def format_config(cfg: RunConfig) -> str:
    """Render a config in the grammar accepted by :func:`parse_config`.

    Unset optional values are omitted, so the output re-parses to the same
    resolved config.
    """
    out = []
    for f in fields(RunConfig):
        val = getattr(cfg, f.name)
        if val is None:
            continue
        if f.name == "taus":
            val = ", ".join(repr(float(t)) for t in val)
        elif isinstance(val, float):
            val = repr(val)
        out.append(f"{f.name} = {val}")
    return "\n".join(out) + "\n"

