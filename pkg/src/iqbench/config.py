"""Flat key-value run configuration.

Grammar: one `key = value` pair per line; blank lines and lines starting
with `#` are ignored.  Command-line flags override file values.  Unknown
keys are rejected by name, and every randomized subcommand requires an
explicit master seed (there is no wall-clock seeding anywhere).
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Optional

from .ndtm import (DEFAULT_ACTION_ALPHABET, DEFAULT_N_STATES, DEFAULT_OBS_ALPHABET,
                   DEFAULT_SMALL_STEP_BUDGET, MachineGenParams, TAPE_ALPHABET_SIZE)
from .world import LifeConfig


class ConfigError(ValueError):
    pass


class UnknownKey(ConfigError):
    pass


class InvalidValue(ConfigError):
    pass


class MissingSeed(ConfigError):
    pass


DEFAULT_SUITE_COUNT = 200
DEFAULT_THRESHOLD = 0.7


@dataclass(frozen=True)
class RunConfig:
    master_seed: Optional[int] = None
    suite: Optional[str] = None          # path to an existing suite file
    n_states: int = DEFAULT_N_STATES
    count: int = DEFAULT_SUITE_COUNT
    games: int = 100
    max_steps_per_game: int = 1000
    small_step_budget: int = DEFAULT_SMALL_STEP_BUDGET
    action_alphabet_size: int = DEFAULT_ACTION_ALPHABET
    obs_alphabet_size: int = DEFAULT_OBS_ALPHABET
    tape_alphabet_size: int = TAPE_ALPHABET_SIZE
    p_second_branch: float = 0.25
    p_emit: float = 0.5
    p_game_signal_given_emit: float = 0.05
    signal_split: tuple[float, float, float] = (0.4, 0.4, 0.2)
    agents: tuple[str, ...] = ()
    out_dir: str = "out"
    threshold: float = DEFAULT_THRESHOLD
    figures: bool = True
    gamma: float = 0.9
    horizon: int = 300
    c_max: int = 6
    samples_per_c: int = 20
    schedule: Optional[str] = None
    depth: int = 16
    tail_fraction: float = 0.5
    host: str = "127.0.0.1"
    port: int = 8351
    reveal: bool = False
    world: str = "trap"
    logs: bool = False

    def life_config(self) -> LifeConfig:
        return LifeConfig(games=self.games, max_steps_per_game=self.max_steps_per_game)

    def gen_params(self) -> MachineGenParams:
        return MachineGenParams(p_second_branch=self.p_second_branch, p_emit=self.p_emit,
                                p_game_signal_given_emit=self.p_game_signal_given_emit,
                                signal_split=self.signal_split)

    def require_seed(self) -> int:
        if self.master_seed is None:
            raise MissingSeed("an explicit master seed is required (master_seed key or --seed)")
        return self.master_seed


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _parse_split(value: str) -> tuple[float, float, float]:
    parts = tuple(float(x) for x in value.split(","))
    if len(parts) != 3:
        raise ValueError("signal_split needs exactly three probabilities")
    return parts


_PARSERS = {
    "master_seed": int, "suite": str, "n_states": int, "count": int,
    "games": int, "max_steps_per_game": int, "small_step_budget": int,
    "action_alphabet_size": int, "obs_alphabet_size": int, "tape_alphabet_size": int,
    "p_second_branch": float, "p_emit": float, "p_game_signal_given_emit": float,
    "signal_split": _parse_split,
    "agents": lambda v: tuple(s.strip() for s in v.split(",") if s.strip()),
    "out_dir": str, "threshold": float, "figures": _parse_bool,
    "gamma": float, "horizon": int, "c_max": int, "samples_per_c": int,
    "schedule": str, "depth": int, "tail_fraction": float,
    "host": str, "port": int, "reveal": _parse_bool, "world": str, "logs": _parse_bool,
}

assert set(_PARSERS) == {f.name for f in fields(RunConfig)}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise InvalidValue(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        if key not in _PARSERS:
            raise UnknownKey(f"{source}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _PARSERS[key](value)
        except (ValueError, TypeError) as exc:
            raise InvalidValue(f"{source}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def parse_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Build a RunConfig from an optional file plus override values
    (flags win over the file; both win over the documented defaults)."""
    values: dict = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            values.update(parse_config_text(fh.read(), source=str(path)))
    for key, value in (overrides or {}).items():
        if key not in _PARSERS:
            raise UnknownKey(f"unknown key {key!r}")
        if value is not None:
            values[key] = value
    try:
        return RunConfig(**values)
    except (TypeError, ValueError) as exc:
        raise InvalidValue(str(exc)) from exc


def write_config(config: RunConfig, path) -> None:
    """Lossless file form of a RunConfig (round-trips through parse_config)."""
    lines = []
    for f in fields(RunConfig):
        value = getattr(config, f.name)
        if value is None:
            continue
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, tuple):
            text = ",".join(repr(x) if isinstance(x, float) else str(x) for x in value)
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f"{f.name} = {text}")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
