"""Experiment configuration: flat ``key = value`` text files plus overrides.

Lines are ``key = value``; ``#`` starts a comment.  Keys that do not belong to
the chosen experiment are rejected, naming the key.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .trainer import TrainConfig

EXPERIMENTS = ("awgn-peak", "mimo-peak", "cauchy-log", "cauchy-peak", "rayleigh")

# channel parameters accepted by each experiment, with defaults
CHANNEL_PARAMS: dict[str, dict[str, float]] = {
    "awgn-peak": {"A": 1.0},
    "mimo-peak": {"A": 1.0, "r2": 1.0},
    "cauchy-log": {"A": 2.0, "gamma": 1.0},
    "cauchy-peak": {"A": 1.0, "gamma": 1.0},
    "rayleigh": {"a": 1.0},
}

# experiment-level training defaults that override TrainConfig's.  The faster
# generator rate lets interior mass collapse into atoms (and separates the
# MIMO r2=3 clusters); the Cauchy peak run keeps the slower rates, since faster
# ones collapse its input onto one boundary point.  alpha=0.5 for the log
# constraint: its multiplier is exactly 1 at the optimum, so with alpha=1 the
# unit hinge would leave the objective flat past the budget.
_FAST = {"steps": 3000, "lr_disc": 1e-3, "lr_gen": 3e-3}
_SLOW = {"steps": 3000}
TRAIN_DEFAULTS: dict[str, dict[str, object]] = {
    "awgn-peak": dict(_FAST),
    "mimo-peak": dict(_FAST),
    "cauchy-log": {**_FAST, "alpha": 0.5},
    "cauchy-peak": dict(_SLOW),
    "rayleigh": dict(_FAST),
}

TRAIN_KEYS = tuple(f.name for f in dataclasses.fields(TrainConfig))
GENERAL_KEYS = ("experiment", "grid", "hidden", "eval_samples", "merge_tol")


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry when known."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    params: dict[str, float]
    train: TrainConfig
    grid: tuple[float, ...] | None = None
    hidden: tuple[int, ...] = (64, 64)
    eval_samples: int = 10_000
    merge_tol: float | None = None
    raw: dict[str, str] = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return self.train.seed

    def with_params(self, **params) -> ExperimentConfig:
        return dataclasses.replace(self, params={**self.params, **params})

    def with_seed(self, seed: int) -> ExperimentConfig:
        return dataclasses.replace(self, train=dataclasses.replace(self.train, seed=seed))


def parse_text(text: str, source: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        out[key] = value
    return out


def read_file(path) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    return parse_text(text, str(path))


def _as(kind, key: str, value: str):
    try:
        if kind is bool:
            low = value.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(value)
            return low in ("true", "1", "yes")
        return kind(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r} as {kind.__name__}", key) from None


def _floats(key: str, value: str) -> tuple[float, ...]:
    parts = [p for p in value.replace(",", " ").split() if p]
    if not parts:
        raise ConfigError(f"{key}: empty list", key)
    return tuple(_as(float, key, p) for p in parts)


def build(entries: dict[str, str]) -> ExperimentConfig:
    """Validate raw entries into an :class:`ExperimentConfig`."""
    entries = dict(entries)
    name = entries.get("experiment")
    if name is None:
        raise ConfigError("missing 'experiment' key", "experiment")
    if name not in EXPERIMENTS:
        raise ConfigError(f"experiment: unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}",
                          "experiment")
    params = dict(CHANNEL_PARAMS[name])
    train_kwargs: dict[str, object] = dict(TRAIN_DEFAULTS[name])
    types = {f.name: f.type for f in dataclasses.fields(TrainConfig)}
    grid = None
    hidden = (64, 64)
    eval_samples = 10_000
    merge_tol = None
    for key, value in entries.items():
        if key == "experiment":
            continue
        if key in params:
            params[key] = _as(float, key, value)
        elif key in TRAIN_KEYS:
            t = types[key]
            if "int" in t and "None" in t and value.lower() == "none":
                train_kwargs[key] = None
            elif "int" in t:
                train_kwargs[key] = _as(int, key, value)
            elif "float" in t and key != "dtype":
                train_kwargs[key] = _as(float, key, value)
            else:
                train_kwargs[key] = value
        elif key == "grid":
            if "A" not in params:
                raise ConfigError(f"grid: experiment {name!r} has no A parameter to sweep", key)
            grid = _floats(key, value)
            if any(g <= 0 for g in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
                raise ConfigError("grid: A values must be positive and strictly increasing", key)
        elif key == "hidden":
            hidden = tuple(int(h) for h in _floats(key, value))
            if not hidden or any(h < 1 for h in hidden):
                raise ConfigError("hidden: widths must be positive integers", key)
        elif key == "eval_samples":
            eval_samples = _as(int, key, value)
            if eval_samples < 1000:
                raise ConfigError("eval_samples: need at least 1000", key)
        elif key == "merge_tol":
            merge_tol = _as(float, key, value)
            if not merge_tol > 0:
                raise ConfigError("merge_tol: must be positive", key)
        else:
            raise ConfigError(f"unknown key {key!r} for experiment {name!r}", key)
    _check_params(name, params)
    try:
        train = TrainConfig(**train_kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"training parameters: {exc}") from exc
    return ExperimentConfig(name, params, train, grid, hidden, eval_samples, merge_tol, entries)


def _check_params(name: str, p: dict[str, float]) -> None:
    for key in ("A", "gamma", "r2", "a"):
        if key in p and not p[key] > 0:
            raise ConfigError(f"{key}: must be positive", key)
    if name == "cauchy-log" and p["A"] < p["gamma"]:
        raise ConfigError("A: the logarithmic constraint needs A >= gamma", "A")


def load(path=None, overrides: dict[str, str] | None = None, experiment: str | None = None) -> ExperimentConfig:
    """Read ``path`` (optional), apply overrides, validate."""
    entries = read_file(path) if path is not None else {}
    if experiment is not None:
        entries["experiment"] = experiment
    entries.update(overrides or {})
    return build(entries)
