"""Run configuration shared by the command-line tools.

Config files are flat ``key = value`` text; ``#`` starts a comment.
Tolerances are written ``tol.<name> = <value>``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

CONFIG_ENV = "CVTELEFID_CONFIG"

DEFAULT_TOLERANCES = {
    "tail_tol": 1e-12,
    "trace_tol": 1e-6,
    "prob_tol": 1e-3,
    "tol_herm": 1e-10,
    "tol_trace": 1e-8,
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    cutoff: int = 60
    cutoff_two_mode: int = 40
    gh_order: int = 20
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output_format: str = "csv"
    output_path: str | None = None
    deterministic_reduction: bool = False

    def __post_init__(self):
        if self.cutoff < 8:
            raise ConfigError(f"cutoff: must be >= 8, got {self.cutoff}")
        if self.cutoff_two_mode < 8:
            raise ConfigError(f"cutoff_two_mode: must be >= 8, got {self.cutoff_two_mode}")
        if self.gh_order < 2:
            raise ConfigError(f"gh_order: must be >= 2, got {self.gh_order}")
        if self.output_format not in ("csv", "json"):
            raise ConfigError(f"output_format: must be csv or json, got {self.output_format!r}")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerances: {', '.join(sorted(unknown))}")
        for name, value in self.tolerances.items():
            if not value > 0:
                raise ConfigError(f"tol.{name}: must be > 0, got {value}")
        merged = dict(DEFAULT_TOLERANCES)
        merged.update(self.tolerances)
        object.__setattr__(self, "tolerances", merged)

    def tol(self, name: str) -> float:
        return self.tolerances[name]

    def updated(self, **overrides) -> RunConfig:
        overrides = {k: v for k, v in overrides.items() if v is not None}
        tols = overrides.pop("tolerances", None)
        if tols:
            overrides["tolerances"] = {**self.tolerances, **tols}
        return replace(self, **overrides)


_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


def _coerce(key: str, raw: str):
    types = {f.name: f.type for f in fields(RunConfig)}
    kind = types[key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "bool":
            return _BOOL[raw.lower()]
    except (ValueError, KeyError):
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None
    if key == "output_path":
        return raw or None
    return raw


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines into ``RunConfig`` keyword arguments."""
    values: dict = {}
    tolerances: dict = {}
    names = {f.name for f in fields(RunConfig)} - {"tolerances"}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key.startswith("tol."):
            try:
                tolerances[key[4:]] = float(raw)
            except ValueError:
                raise ConfigError(f"{source}:{lineno}: {key}: cannot parse {raw!r}") from None
        elif key in names:
            values[key] = _coerce(key, raw)
        else:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
    if tolerances:
        values["tolerances"] = tolerances
    return values


def load_config(path: str | os.PathLike | None = None) -> RunConfig:
    """Config from ``path``, else ``$CVTELEFID_CONFIG``, else defaults."""
    if path is None:
        path = os.environ.get(CONFIG_ENV) or None
    if path is None:
        return RunConfig()
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc.strerror}") from None
    return RunConfig(**parse_config_text(text, str(p)))
