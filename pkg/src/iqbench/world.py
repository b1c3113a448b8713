"""The agent-world interaction contract: big steps, games, lives, Success.

A *big step* is one action-in / observation-out exchange.  Observations
carry a symbol plus an optional game signal; a game ends on the first
Win/Loss/Draw signal, or is scored as a timeout draw when it reaches the
per-game step cap.  A *life* is a fixed number of games; world state is
never reset between games within a life.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Protocol, TextIO, runtime_checkable

from .rng import Stream, derive_seed

LIFEREC_FORMAT = "liferec/1"


class Signal(Enum):
    NONE = "N"
    WIN = "W"
    LOSS = "L"
    DRAW = "D"


@dataclass(frozen=True)
class Observation:
    symbol: int
    signal: Signal = Signal.NONE


BLANK_OBSERVATION = Observation(0, Signal.NONE)


class Outcome(Enum):
    WIN = "Win"
    LOSS = "Loss"
    DRAW = "Draw"
    TIMEOUT_DRAW = "TimeoutDraw"


_SIGNAL_OUTCOME = {Signal.WIN: Outcome.WIN, Signal.LOSS: Outcome.LOSS, Signal.DRAW: Outcome.DRAW}

REWARDS = {
    Outcome.WIN: Fraction(1),
    Outcome.LOSS: Fraction(0),
    Outcome.DRAW: Fraction(1, 2),
    Outcome.TIMEOUT_DRAW: Fraction(1, 2),
}


@dataclass(frozen=True)
class GameOutcome:
    outcome: Outcome
    length_steps: int


@dataclass(frozen=True)
class LifeConfig:
    """Life budget: `games` games of at most `max_steps_per_game` big steps."""

    games: int = 100
    max_steps_per_game: int = 1000

    def __post_init__(self):
        if self.games < 1 or self.max_steps_per_game < 1:
            raise ValueError("LifeConfig fields must be strictly positive")

    @property
    def total_step_budget(self) -> int:
        return self.games * self.max_steps_per_game


@dataclass
class LifeRecord:
    """One life: per-step trajectory plus per-game outcomes.

    `states` is filled only by worlds that expose their internal state
    (tabular worlds); it holds the state after each step, preceded by
    the initial state, so len(states) == len(steps) + 1 when present.
    """

    steps: list[tuple[int, Observation]]
    games: list[GameOutcome]
    seed: int
    world_id: str = "world"
    states: Optional[list] = None


@runtime_checkable
class WorldInterface(Protocol):
    """Stateful world driven one big step at a time.

    `begin_life(stream)` (re)initializes all internal state and hands
    the world its randomness stream; `step(action)` advances one big
    step and never halts before the life budget.  Implementations may
    additionally expose `world_id`, `state_trace` (tabular worlds) and
    `decoded_view()` (session reveal mode).
    """

    action_alphabet_size: int
    obs_alphabet_size: int

    def begin_life(self, stream: Stream) -> None: ...

    def step(self, action: int) -> Observation: ...


class AgentActionOutOfRange(RuntimeError):
    """Agent emitted an action outside the world's action alphabet."""


class WorldStepFailure(RuntimeError):
    """World violated its contract (raised, or emitted a bad observation)."""


class EmptyLife(ValueError):
    """Success is undefined for a life with no games."""


class LifeFinished(RuntimeError):
    """step() called after the life's game budget was exhausted."""


def reward_of(game: GameOutcome) -> Fraction:
    """Game reward: Win -> 1, Loss -> 0, Draw/TimeoutDraw -> 1/2."""
    return REWARDS[game.outcome]


def success(life: LifeRecord) -> Fraction:
    """Arithmetic mean of the life's game rewards, in [0, 1]."""
    if not life.games:
        raise EmptyLife("life has no games")
    return sum((reward_of(g) for g in life.games), Fraction(0)) / len(life.games)


@dataclass
class StepResult:
    observation: Observation
    game_over: Optional[GameOutcome]
    life_over: bool


class LifeRunner:
    """Incremental game/life bookkeeping over a world.

    Both `run_life` and the session service drive their lives through
    this class, so batch and interactive scoring cannot drift apart.
    """

    def __init__(self, world: WorldInterface, config: LifeConfig, world_stream: Stream,
                 record_steps: bool = True):
        self.world = world
        self.config = config
        self.record_steps = record_steps
        world.begin_life(world_stream)
        self.last_observation = BLANK_OBSERVATION
        self.steps: list[tuple[int, Observation]] = []
        self.games: list[GameOutcome] = []
        self.step_in_game = 0
        self._obs_limit = world.obs_alphabet_size

    @property
    def finished(self) -> bool:
        return len(self.games) >= self.config.games

    @property
    def banked_reward(self) -> Fraction:
        return sum((reward_of(g) for g in self.games), Fraction(0))

    def running_success(self) -> Fraction:
        if not self.games:
            return Fraction(0)
        return self.banked_reward / len(self.games)

    def step(self, action: int) -> StepResult:
        if self.finished:
            raise LifeFinished("life budget exhausted")
        if not (0 <= action < self.world.action_alphabet_size):
            raise AgentActionOutOfRange(
                f"action {action} outside [0, {self.world.action_alphabet_size})")
        try:
            obs = self.world.step(action)
        except Exception as exc:  # noqa: BLE001 - contract boundary
            raise WorldStepFailure(f"world raised {exc!r}") from exc
        if not isinstance(obs, Observation) or not (0 <= obs.symbol < self._obs_limit):
            raise WorldStepFailure(f"world emitted invalid observation {obs!r}")

        self.step_in_game += 1
        if self.record_steps:
            self.steps.append((action, obs))
        game_over: Optional[GameOutcome] = None
        if obs.signal is not Signal.NONE:
            game_over = GameOutcome(_SIGNAL_OUTCOME[obs.signal], self.step_in_game)
        elif self.step_in_game >= self.config.max_steps_per_game:
            game_over = GameOutcome(Outcome.TIMEOUT_DRAW, self.step_in_game)
        if game_over is not None:
            self.games.append(game_over)
            self.step_in_game = 0
        self.last_observation = obs
        return StepResult(obs, game_over, self.finished)

    def to_record(self, seed: int) -> LifeRecord:
        world_id = getattr(self.world, "world_id", "world")
        states = getattr(self.world, "state_trace", None)
        return LifeRecord(steps=self.steps, games=list(self.games), seed=seed,
                          world_id=world_id, states=list(states) if states is not None else None)


# Sub-stream indices of the life seed.  Changing these renumbers every
# recorded trajectory, so they are part of the liferec/1 format.
WORLD_SUBSTREAM = 0
AGENT_SUBSTREAM = 1


def run_life(world: WorldInterface, agent, config: LifeConfig, seed: int,
             record_steps: bool = True,
             streams: Optional[tuple[Stream, Stream]] = None) -> LifeRecord:
    """Run one full life of `agent` in `world`.

    World and agent randomness come from two independent sub-streams of
    `seed` (world: 0, agent: 1).  `streams` overrides the derivation;
    it exists for instrumentation in tests and should not be used
    otherwise.
    """
    if streams is None:
        world_stream = Stream(derive_seed(seed, WORLD_SUBSTREAM))
        agent_stream = Stream(derive_seed(seed, AGENT_SUBSTREAM))
    else:
        world_stream, agent_stream = streams
    runner = LifeRunner(world, config, world_stream, record_steps=record_steps)
    agent.begin_life(agent_stream)
    while not runner.finished:
        action = agent.act(runner.last_observation)
        if not isinstance(action, int) or not (0 <= action < world.action_alphabet_size):
            raise AgentActionOutOfRange(
                f"agent emitted {action!r}, alphabet size {world.action_alphabet_size}")
        runner.step(action)
    return runner.to_record(seed)


def write_liferecord(life: LifeRecord, out: TextIO) -> None:
    out.write(f"{LIFEREC_FORMAT}\n")
    out.write(f"world_id={life.world_id}\n")
    out.write(f"seed={life.seed}\n")
    out.write(f"n_steps={len(life.steps)}\n")
    out.write(f"n_games={len(life.games)}\n")
    for i, (action, obs) in enumerate(life.steps):
        out.write(f"s {i} {action} {obs.symbol} {obs.signal.value}\n")
    for j, game in enumerate(life.games):
        out.write(f"g {j} {game.outcome.value} {game.length_steps}\n")
    if life.states is not None:
        for i, state in enumerate(life.states):
            out.write(f"x {i} {state}\n")
    out.write("end\n")


class CorruptLifeRecord(ValueError):
    pass


def read_liferecord(inp: TextIO) -> LifeRecord:
    header = inp.readline().strip()
    if header != LIFEREC_FORMAT:
        raise CorruptLifeRecord(f"unsupported life record format {header!r}")
    meta: dict[str, str] = {}
    for _ in range(4):
        key, _, value = inp.readline().strip().partition("=")
        meta[key] = value
    try:
        n_steps, n_games = int(meta["n_steps"]), int(meta["n_games"])
        seed = int(meta["seed"])
        world_id = meta["world_id"]
    except (KeyError, ValueError) as exc:
        raise CorruptLifeRecord(f"bad life record header: {exc}") from exc
    steps: list[tuple[int, Observation]] = []
    games: list[GameOutcome] = []
    states: list = []
    saw_end = False
    for line in inp:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "end":
            saw_end = True
            break
        try:
            if parts[0] == "s":
                steps.append((int(parts[2]), Observation(int(parts[3]), Signal(parts[4]))))
            elif parts[0] == "g":
                games.append(GameOutcome(Outcome(parts[2]), int(parts[3])))
            elif parts[0] == "x":
                raw = parts[2]
                states.append(int(raw) if raw.lstrip("-").isdigit() else raw)
            else:
                raise CorruptLifeRecord(f"unknown record line {line!r}")
        except (IndexError, ValueError) as exc:
            raise CorruptLifeRecord(f"bad record line {line!r}") from exc
    if not saw_end or len(steps) != n_steps or len(games) != n_games:
        raise CorruptLifeRecord("truncated life record")
    return LifeRecord(steps=steps, games=games, seed=seed, world_id=world_id,
                      states=states if states else None)
