"""Human-as-agent sessions: a person lives one life in a test world, one
big step per request, scored by exactly the same bookkeeping as batch
runs (both drive a LifeRunner, so live and offline scores cannot drift).

Sessions are in memory, with an append-only JSON-lines journal per
session for crash recovery and offline rescoring.  Mutations on a session
are serialized by a non-blocking lock: of two simultaneous actions, one
applies and the other is rejected, never both.
"""
from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .agents import DeadAgent, RandomAgent
from .ndtm import read_suite_file
from .rng import Stream, derive_seed
from .world import (LifeConfig, LifeRunner, Observation, WORLD_SUBSTREAM,
                    run_life, success)
from .worlds import BitstreamWorld, OscillatingWorld, TicTacToeWorld, make_bitstream

SESSION_SCHEMA = "session/1"

HUMAN_DEFAULT_GAMES = 9
HUMAN_DEFAULT_MAX_STEPS = 20


class SessionError(Exception):
    code = "session_error"


class UnknownWorldSpec(SessionError):
    code = "unknown_world_spec"


class InvalidConfig(SessionError):
    code = "invalid_config"


class SessionNotFound(SessionError):
    code = "session_not_found"


class SessionFinished(SessionError):
    code = "session_finished"


class ActionOutOfRange(SessionError):
    code = "action_out_of_range"


class SessionBusy(SessionError):
    code = "session_busy"


def build_world(world_spec: dict):
    """World factory for session specs.

    Specs: {"world": "tictactoe", "opponent": "minimax"|"uniform_random"},
    {"world": "bitstream", "stream": "zeros"|"ones"|"alternating"|"random"|"file:<p>"},
    {"world": "oscillating"}, {"world": "suite", "path": <suite file>, "index": i}.
    """
    if not isinstance(world_spec, dict) or "world" not in world_spec:
        raise UnknownWorldSpec("world spec must be an object with a 'world' key")
    kind = world_spec["world"]
    if kind == "tictactoe":
        opponent = world_spec.get("opponent", "minimax")
        if opponent not in ("minimax", "uniform_random"):
            raise UnknownWorldSpec(f"unknown opponent {opponent!r}")
        return TicTacToeWorld(opponent)
    if kind == "bitstream":
        try:
            return BitstreamWorld(make_bitstream(world_spec.get("stream", "random")))
        except ValueError as exc:
            raise UnknownWorldSpec(str(exc)) from exc
    if kind == "oscillating":
        return OscillatingWorld()
    if kind == "suite":
        try:
            suite = read_suite_file(world_spec["path"])
            entry = suite.entries[int(world_spec.get("index", 0))]
        except (KeyError, IndexError, OSError, ValueError) as exc:
            raise UnknownWorldSpec(f"bad suite world spec: {exc}") from exc
        from .ndtm import MachineWorld
        return MachineWorld(entry.machine, world_id=f"suite:{entry.world_id}")
    raise UnknownWorldSpec(f"unknown world {kind!r}")


@dataclass
class Session:
    session_id: str
    world_spec: dict
    config: LifeConfig
    seed: int
    runner: LifeRunner
    reveal: bool
    history: list[dict] = field(default_factory=list)
    status: str = "active"
    lock: threading.Lock = field(default_factory=threading.Lock)
    journal_path: Optional[Path] = None

    def journal(self, record: dict) -> None:
        if self.journal_path is None:
            return
        with open(self.journal_path, "a", encoding="ascii") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def _observation_json(obs: Observation) -> dict:
    return {"symbol": obs.symbol, "signal": obs.signal.value}


def _game_json(game) -> dict:
    return {"outcome": game.outcome.value, "length_steps": game.length_steps}


class SessionManager:
    """All session state and the operations the wire API exposes."""

    def __init__(self, reveal: bool = False, journal_dir: Optional[Path] = None):
        self.reveal = reveal
        self.journal_dir = Path(journal_dir) if journal_dir else None
        if self.journal_dir is not None:
            self.journal_dir.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()

    # -- operations ---------------------------------------------------------

    def create_session(self, request: dict) -> dict:
        world_spec = request.get("world")
        world = build_world(world_spec if isinstance(world_spec, dict)
                            else {"world": world_spec})
        try:
            games = int(request.get("games", HUMAN_DEFAULT_GAMES))
            max_steps = int(request.get("max_steps_per_game", HUMAN_DEFAULT_MAX_STEPS))
            seed = int(request.get("seed", 0))
            config = LifeConfig(games=games, max_steps_per_game=max_steps)
        except (TypeError, ValueError) as exc:
            raise InvalidConfig(f"bad session config: {exc}") from exc
        session_id = uuid.uuid4().hex
        runner = LifeRunner(world, config, Stream(derive_seed(seed, WORLD_SUBSTREAM)))
        journal_path = (self.journal_dir / f"{session_id}.jsonl"
                        if self.journal_dir is not None else None)
        session = Session(session_id=session_id, world_spec=world_spec
                          if isinstance(world_spec, dict) else {"world": world_spec},
                          config=config, seed=seed, runner=runner, reveal=self.reveal,
                          journal_path=journal_path)
        with self._registry_lock:
            self._sessions[session_id] = session
        session.journal({"event": "created", "schema": SESSION_SCHEMA,
                         "world": session.world_spec, "games": games,
                         "max_steps_per_game": max_steps, "seed": seed})
        return self._summary(session)

    def _get(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise SessionNotFound(f"no session {session_id!r}") from None

    def post_action(self, session_id: str, action) -> dict:
        session = self._get(session_id)
        if not session.lock.acquire(blocking=False):
            raise SessionBusy("another action on this session is in flight")
        try:
            if session.status != "active":
                raise SessionFinished("session already finished")
            if not isinstance(action, int) or isinstance(action, bool) or not (
                    0 <= action < session.runner.world.action_alphabet_size):
                raise ActionOutOfRange(
                    f"action must be an integer in [0, "
                    f"{session.runner.world.action_alphabet_size})")
            result = session.runner.step(action)
            step_record = {
                "action": action,
                "observation": _observation_json(result.observation),
            }
            session.history.append(step_record)
            if result.life_over:
                session.status = "finished"
            session.journal({"event": "step", **step_record,
                             "game_over": _game_json(result.game_over)
                             if result.game_over else None})
            return {
                "schema": SESSION_SCHEMA,
                "session_id": session_id,
                "observation": _observation_json(result.observation),
                "game_event": _game_json(result.game_over) if result.game_over else None,
                "running_success": float(session.runner.running_success()),
                "running_success_exact": str(session.runner.running_success()),
                "games_done": len(session.runner.games),
                "games_total": session.config.games,
                "steps_remaining_in_game":
                    session.config.max_steps_per_game - session.runner.step_in_game,
                "status": session.status,
            }
        finally:
            session.lock.release()

    def get_session(self, session_id: str) -> dict:
        session = self._get(session_id)
        state = self._summary(session)
        state["history"] = list(session.history)
        state["games"] = [_game_json(g) for g in session.runner.games]
        if session.reveal:
            decoded = getattr(session.runner.world, "decoded_view", None)
            state["decoded_view"] = decoded() if decoded else None
            if isinstance(session.runner.world, BitstreamWorld):
                state["decoded_view"] = [h["observation"]["symbol"]
                                         for h in session.history]
        else:
            state["decoded_view"] = None
        return state

    def finish_session(self, session_id: str) -> dict:
        session = self._get(session_id)
        with session.lock:
            session.status = "finished"
            final = session.runner.running_success()
            baselines = self._baselines(session)
            session.journal({"event": "finished", "success": float(final),
                             "baselines": baselines})
            return {
                "schema": SESSION_SCHEMA,
                "session_id": session_id,
                "success": float(final),
                "success_exact": str(final),
                "games": [_game_json(g) for g in session.runner.games],
                "baselines": baselines,
            }

    # -- helpers ------------------------------------------------------------

    def _summary(self, session: Session) -> dict:
        runner = session.runner
        return {
            "schema": SESSION_SCHEMA,
            "session_id": session.session_id,
            "status": session.status,
            "world": session.world_spec,
            "action_count": runner.world.action_alphabet_size,
            "observation": _observation_json(runner.last_observation),
            "games_total": session.config.games,
            "games_done": len(runner.games),
            "max_steps_per_game": session.config.max_steps_per_game,
            "steps_remaining_in_game":
                session.config.max_steps_per_game - runner.step_in_game,
            "running_success": float(runner.running_success()),
            "running_success_exact": str(runner.running_success()),
            "reveal": session.reveal,
        }

    def _baselines(self, session: Session) -> dict:
        """Reference-agent mean success on the same world spec and seed."""
        out = {}
        for name, agent_ctor in (("random", RandomAgent), ("dead", DeadAgent)):
            world = build_world(session.world_spec)
            agent = (agent_ctor(world.action_alphabet_size)
                     if agent_ctor is RandomAgent else DeadAgent(0))
            life = run_life(world, agent, session.config, session.seed, record_steps=False)
            out[name] = float(success(life))
        return out


def rescore_journal(path) -> dict:
    """Offline rescoring: replay a session journal into the same world and
    verify the recorded trajectory; returns the success and game outcomes."""
    records = [json.loads(line) for line in Path(path).read_text().splitlines() if line]
    created = records[0]
    if created.get("event") != "created":
        raise ValueError("journal does not start with a created event")
    world = build_world(created["world"])
    config = LifeConfig(games=created["games"],
                        max_steps_per_game=created["max_steps_per_game"])
    runner = LifeRunner(world, config, Stream(derive_seed(created["seed"], WORLD_SUBSTREAM)))
    for record in records[1:]:
        if record.get("event") != "step":
            continue
        result = runner.step(record["action"])
        if _observation_json(result.observation) != record["observation"]:
            raise ValueError("journal does not replay: observation mismatch")
    return {
        "success": float(runner.running_success()),
        "success_exact": str(runner.running_success()),
        "games": [_game_json(g) for g in runner.games],
    }
