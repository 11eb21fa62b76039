"""Run configuration: an INI file with one section per stage.

Example::

    [input]
    path = prices.csv
    normalize = minmax

    [wavelet]
    filter = db2
    levels = 6

    [dmd]
    rank = 15
    top = 8

Unknown sections or keys are rejected, and every value is validated before
any computation starts. See ``RunConfig`` for the full key list.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass, fields, replace

from .dmd import POWER_KINDS
from .errors import ConfigError
from .ingest import MISSING_POLICIES, NORMALIZE_METHODS
from .wavelet import BOUNDARIES, FILTERS

SYNTH_PRESETS = ("price-cycles",)

# section -> {key: RunConfig field}
_LAYOUT = {
    "input": {"path": "input_path", "synth": "synth", "date_column": "date_column",
              "missing": "missing", "normalize": "normalize", "series": "series"},
    "stats": {"enabled": "stats", "alpha": "alpha"},
    "wavelet": {"enabled": "wavelet", "filter": "filter", "levels": "levels", "boundary": "boundary"},
    "multifractal": {"enabled": "multifractal", "pmin": "pmin", "pmax": "pmax", "pstep": "pstep",
                     "alpha_min": "alpha_min", "alpha_max": "alpha_max", "alpha_step": "alpha_step",
                     "fit_levels": "fit_levels", "tol": "concavity_tol"},
    "dmd": {"enabled": "dmd", "rank": "rank", "energy": "energy", "top": "top", "power": "power"},
    "output": {"dir": "out", "stack_gap": "stack_gap"},
    "run": {"seed": "seed"},
}


@dataclass(frozen=True)
class RunConfig:
    input_path: str | None = None
    synth: str | None = None
    date_column: str = "date"
    missing: str = "reject"
    normalize: str = "minmax"
    series: tuple | None = None
    stats: bool = True
    alpha: float = 0.05
    wavelet: bool = True
    filter: str = "haar"
    levels: int = 6
    boundary: str = "periodic"
    multifractal: bool = True
    pmin: float | None = None
    pmax: float = 5.0
    pstep: float = 0.25
    alpha_min: float = 0.0
    alpha_max: float = 1.5
    alpha_step: float = 0.01
    fit_levels: tuple | None = None
    concavity_tol: float = 1e-3
    dmd: bool = True
    rank: int | None = None
    energy: float | None = None
    top: int = 8
    power: str = "squared"
    out: str | None = None
    stack_gap: float = 1.2
    seed: int = 0

    def validated(self) -> "RunConfig":
        if (self.input_path is None) == (self.synth is None):
            raise ConfigError("give exactly one of [input] path or [input] synth")
        if self.synth is not None and self.synth not in SYNTH_PRESETS:
            raise ConfigError(f"unknown synth preset {self.synth!r}; choose from {SYNTH_PRESETS}")
        _choice("normalize", self.normalize, NORMALIZE_METHODS)
        _choice("missing", self.missing, MISSING_POLICIES)
        _choice("filter", self.filter, tuple(FILTERS))
        _choice("boundary", self.boundary, BOUNDARIES)
        _choice("power", self.power, POWER_KINDS)
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.levels < 1:
            raise ConfigError(f"levels must be >= 1, got {self.levels}")
        if self.pstep <= 0 or self.alpha_step <= 0:
            raise ConfigError("grid steps must be positive")
        if self.pmin is not None and self.pmin > self.pmax:
            raise ConfigError(f"pmin {self.pmin} exceeds pmax {self.pmax}")
        if self.alpha_min > self.alpha_max:
            raise ConfigError(f"alpha_min {self.alpha_min} exceeds alpha_max {self.alpha_max}")
        if self.fit_levels is not None:
            lo, hi = self.fit_levels
            if lo < 1 or hi > self.levels or hi - lo + 1 < 3:
                raise ConfigError(f"fit_levels {lo}:{hi} must span >= 3 levels inside 1..{self.levels}")
        elif self.multifractal and self.levels < 4:
            raise ConfigError("multifractal stage needs levels >= 4 for the default fit range 2..J-1")
        if self.rank is not None and self.energy is not None:
            raise ConfigError("give at most one of [dmd] rank and [dmd] energy")
        if self.rank is not None and self.rank < 0:
            raise ConfigError(f"rank must be >= 0, got {self.rank}")
        if self.energy is not None and not 0 < self.energy <= 1:
            raise ConfigError(f"energy must lie in (0, 1], got {self.energy}")
        if self.top < 0:
            raise ConfigError(f"top must be >= 0, got {self.top}")
        if self.stack_gap <= 0:
            raise ConfigError(f"stack_gap must be positive, got {self.stack_gap}")
        return self

    def with_overrides(self, **overrides) -> "RunConfig":
        clean = {k: v for k, v in overrides.items() if v is not None}
        unknown = set(clean) - {f.name for f in fields(self)}
        if unknown:
            raise ConfigError(f"unknown settings: {sorted(unknown)}")
        return replace(self, **clean)

    def digest(self) -> str:
        """Hash of every setting that affects results (the output directory does not)."""
        payload = asdict(self)
        payload.pop("out")
        blob = json.dumps(payload, sort_keys=True, default=list)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _choice(name, value, allowed):
    if value not in allowed:
        raise ConfigError(f"{name} must be one of {tuple(allowed)}, got {value!r}")


def parse_levels(text: str) -> tuple:
    try:
        lo, hi = (int(v) for v in str(text).split(":"))
    except ValueError:
        raise ConfigError(f"level range must look like 'a:b', got {text!r}") from None
    return lo, hi


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _convert(name: str, raw: str):
    kinds = {f.name: f.type for f in fields(RunConfig)}
    kind = kinds[name]
    raw = raw.strip()
    if name == "fit_levels":
        return parse_levels(raw)
    if name == "series":
        return tuple(s.strip() for s in raw.split(",") if s.strip())
    if kind.startswith("bool"):
        return _bool(raw)
    if kind.startswith("int"):
        return int(raw)
    if kind.startswith("float"):
        return float(raw)
    return raw


def config_from_text(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    values = {}
    for section in parser.sections():
        if section not in _LAYOUT:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in _LAYOUT[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            name = _LAYOUT[section][key]
            try:
                values[name] = _convert(name, raw)
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key}: {exc}") from None
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return config_from_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
