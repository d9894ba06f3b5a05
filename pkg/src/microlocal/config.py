"""Run configuration: INI sections of ``key = value`` pairs.

Every key has a default, so an empty file is a valid configuration.
Unknown sections or keys are rejected, and each value is range-checked
with the offending ``section.key`` named in the error.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

__all__ = ["ConfigError", "Config", "load_config", "parse_config", "config_hash"]


class ConfigError(ValueError):
    """Invalid configuration text or value."""


@dataclass(frozen=True)
class GridConfig:
    n: int = 1
    half_width: float = 8.0
    points: int = 0  # 0: the default size for the dimension


@dataclass(frozen=True)
class ConesConfig:
    directions: int = 360
    margin: float = 0.05


@dataclass(frozen=True)
class SeminormsConfig:
    N: tuple[int, ...] = (0, 2)
    k_max: float = 0.0  # 0: Nyquist frequency
    fit_lo: float = 16.0
    fit_hi: float = 0.0  # 0: 0.8 * k_max
    s_singular: float = 6.0
    s_regular: float = 8.0
    window: str = "bump"
    window_radius: float = 2.0


@dataclass(frozen=True)
class CounterexampleConfig:
    rho: float = 0.5
    M_max: int = 6
    layout: str = "spread"
    ratio: float = 0.45


@dataclass(frozen=True)
class DiagnosticsConfig:
    sentinel: float = 1e6
    cauchy_ratio: float = 0.01
    limit_ratio: float = 0.1


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0


@dataclass(frozen=True)
class Config:
    grid: GridConfig = field(default_factory=GridConfig)
    cones: ConesConfig = field(default_factory=ConesConfig)
    seminorms: SeminormsConfig = field(default_factory=SeminormsConfig)
    counterexample: CounterexampleConfig = field(default_factory=CounterexampleConfig)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    run: RunConfig = field(default_factory=RunConfig)

    def validate(self) -> "Config":
        """Raise :class:`ConfigError` on the first out-of-range value."""
        checks = [
            ("grid.n", self.grid.n in (1, 2), "must be 1 or 2"),
            ("grid.half_width", self.grid.half_width > 0, "must be positive"),
            (
                "grid.points",
                self.grid.points == 0 or (self.grid.points >= 8 and self.grid.points & (self.grid.points - 1) == 0),
                "must be 0 or a power of two >= 8",
            ),
            ("cones.directions", self.cones.directions >= 4, "must be at least 4"),
            ("cones.margin", 0 < self.cones.margin < 2, "must lie in (0, 2)"),
            ("seminorms.N", len(self.seminorms.N) > 0 and all(0 <= v <= 16 for v in self.seminorms.N), "entries must lie in [0, 16]"),
            ("seminorms.k_max", self.seminorms.k_max >= 0, "must be >= 0"),
            ("seminorms.fit_lo", self.seminorms.fit_lo > 0, "must be positive"),
            ("seminorms.fit_hi", self.seminorms.fit_hi == 0 or self.seminorms.fit_hi > self.seminorms.fit_lo, "must be 0 or above fit_lo"),
            ("seminorms.s_regular", self.seminorms.s_singular < self.seminorms.s_regular, "must exceed s_singular"),
            ("seminorms.window", self.seminorms.window in ("bump", "gauss"), "must be 'bump' or 'gauss'"),
            ("seminorms.window_radius", self.seminorms.window_radius > 0, "must be positive"),
            ("counterexample.rho", 0 < self.counterexample.rho < 1, "must lie in the open interval (0, 1)"),
            ("counterexample.M_max", 1 <= self.counterexample.M_max <= 12, "must lie in [1, 12]"),
            ("counterexample.layout", self.counterexample.layout in ("spread", "cluster"), "must be 'spread' or 'cluster'"),
            ("counterexample.ratio", 0 < self.counterexample.ratio < 0.5, "must lie in (0, 0.5)"),
            ("diagnostics.sentinel", self.diagnostics.sentinel > 0, "must be positive"),
            ("diagnostics.cauchy_ratio", 0 < self.diagnostics.cauchy_ratio < 1, "must lie in (0, 1)"),
            ("diagnostics.limit_ratio", 0 < self.diagnostics.limit_ratio < 1, "must lie in (0, 1)"),
            ("run.seed", self.run.seed >= 0, "must be >= 0"),
        ]
        for name, ok, msg in checks:
            if not ok:
                raise ConfigError(f"{name} {msg}")
        return self

    def replace(self, **sections) -> "Config":
        """Copy with some keys changed, given as ``section={key: value}``."""
        parts = {f.name: getattr(self, f.name) for f in fields(self)}
        for sec, upd in sections.items():
            parts[sec] = type(parts[sec])(**{**asdict(parts[sec]), **upd})
        return Config(**parts).validate()

    def to_dict(self) -> dict:
        return {f.name: asdict(getattr(self, f.name)) for f in fields(self)}

    def to_ini(self) -> str:
        """INI text that :func:`parse_config` turns back into this config."""
        lines = []
        for sec, vals in self.to_dict().items():
            lines.append(f"[{sec}]")
            for k, v in vals.items():
                if isinstance(v, (list, tuple)):
                    v = ", ".join(str(a) for a in v)
                elif isinstance(v, float):
                    v = repr(v)
                lines.append(f"{k} = {v}")
            lines.append("")
        return "\n".join(lines)


def _convert(section: str, key: str, raw: str, default):
    where = f"{section}.{key}"
    try:
        if isinstance(default, bool):
            return {"true": True, "false": False}[raw.strip().lower()]
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            return tuple(int(a) for a in raw.split(",") if a.strip())
        return raw.strip()
    except (ValueError, KeyError):
        raise ConfigError(f"{where}: cannot parse {raw!r} as {type(default).__name__}") from None


def parse_config(text: str) -> Config:
    """Parse INI text into a validated :class:`Config`."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys are case-sensitive (N, M_max)
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"parse error: {e}") from None
    base = Config()
    parts = {f.name: getattr(base, f.name) for f in fields(base)}
    for sec in cp.sections():
        if sec not in parts:
            raise ConfigError(f"unknown section [{sec}]")
        defaults = asdict(parts[sec])
        upd = {}
        for key, raw in cp.items(sec):
            if key not in defaults:
                raise ConfigError(f"unknown key {sec}.{key}")
            upd[key] = _convert(sec, key, raw, defaults[key])
        parts[sec] = type(parts[sec])(**{**defaults, **upd})
    return Config(**parts).validate()


def load_config(path) -> Config:
    """Read and validate a config file."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config(p.read_text())


def config_hash(cfg: Config) -> str:
    """SHA-256 of the canonical JSON form of the config."""
    blob = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
