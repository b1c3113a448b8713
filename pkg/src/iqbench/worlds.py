"""Hand-built worlds: tabular worlds, Tic-Tac-Toe, bit prediction, traps,
the dyadic oscillating world, and the enumerable guessing-game family used
by the exact-planning agents.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

from .rng import Stream
from .world import Observation, Signal

FAMILY_FORMAT = "family/1"


class StreamExhausted(RuntimeError):
    """A bit source ran dry before the life ended."""


# ---------------------------------------------------------------------------
# Tabular worlds


@dataclass(frozen=True)
class ExplicitWorld:
    """Finite tabular world: stochastic transitions with emitted symbols.

    `transitions[(state, action)]` is a tuple of
    (probability, next_state, obs_symbol, signal) rows summing to 1.
    Game-terminal behavior (including reset-to-start edges) is encoded as
    ordinary rows carrying a Win/Loss/Draw signal.
    """

    name: str
    n_states: int
    start_state: int
    action_alphabet_size: int
    obs_alphabet_size: int
    transitions: dict[tuple[int, int], tuple[tuple[float, int, int, Signal], ...]]

    def __post_init__(self):
        for s in range(self.n_states):
            for a in range(self.action_alphabet_size):
                rows = self.transitions.get((s, a))
                if not rows:
                    raise ValueError(f"{self.name}: ({s}, {a}) has no outgoing rows")
                if abs(sum(r[0] for r in rows) - 1.0) > 1e-9:
                    raise ValueError(f"{self.name}: ({s}, {a}) probabilities do not sum to 1")
                for p, nxt, sym, _sig in rows:
                    if p <= 0 or not (0 <= nxt < self.n_states) or not (0 <= sym < self.obs_alphabet_size):
                        raise ValueError(f"{self.name}: bad row {(p, nxt, sym, _sig)}")


class ExplicitWorldSim:
    """Runtime for an ExplicitWorld; records the visited state trace."""

    def __init__(self, world: ExplicitWorld):
        self.spec = world
        self.world_id = world.name
        self.action_alphabet_size = world.action_alphabet_size
        self.obs_alphabet_size = world.obs_alphabet_size
        self.state = world.start_state
        self.state_trace: list[int] = [world.start_state]
        self._stream: Optional[Stream] = None

    def begin_life(self, stream: Stream) -> None:
        self.state = self.spec.start_state
        self.state_trace = [self.state]
        self._stream = stream

    def step(self, action: int) -> Observation:
        rows = self.spec.transitions[(self.state, action)]
        if len(rows) == 1:
            row = rows[0]
        else:
            u = self._stream.random()
            acc = 0.0
            row = rows[-1]
            for candidate in rows:
                acc += candidate[0]
                if u < acc:
                    row = candidate
                    break
        _, self.state, symbol, signal = row
        self.state_trace.append(self.state)
        return Observation(symbol, signal)


@dataclass(frozen=True)
class WorldFamily:
    """Finite list of tabular worlds with a prior over them."""

    worlds: tuple[ExplicitWorld, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.worlds) != len(self.weights) or not self.worlds:
            raise ValueError("family needs matching, non-empty worlds and weights")
        if any(w <= 0 for w in self.weights):
            raise ValueError("family weights must be positive")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("family weights must sum to 1")

    def __len__(self) -> int:
        return len(self.worlds)


def uniform_family(worlds: Sequence[ExplicitWorld]) -> WorldFamily:
    n = len(worlds)
    return WorldFamily(tuple(worlds), tuple(1.0 / n for _ in range(n)))


def trap_world() -> ExplicitWorld:
    """Two states: staying in G wins a 1-step game; action 1 falls into the
    absorbing trap T where every game is lost."""
    G, T = 0, 1
    return ExplicitWorld(
        name="trap", n_states=2, start_state=G,
        action_alphabet_size=2, obs_alphabet_size=2,
        transitions={
            (G, 0): ((1.0, G, 0, Signal.WIN),),
            (G, 1): ((1.0, T, 1, Signal.LOSS),),
            (T, 0): ((1.0, T, 1, Signal.LOSS),),
            (T, 1): ((1.0, T, 1, Signal.LOSS),),
        })


def win_on_action_world(winning_action: int = 1, action_alphabet_size: int = 2,
                        name: str = "controllable") -> ExplicitWorld:
    """1-step games, fully controlled by the agent: one action wins, the
    rest lose.  Useful for agents that deliberately oscillate."""
    rows = {}
    for a in range(action_alphabet_size):
        sig = Signal.WIN if a == winning_action else Signal.LOSS
        rows[(0, a)] = ((1.0, 0, 0, sig),)
    return ExplicitWorld(name=name, n_states=1, start_state=0,
                         action_alphabet_size=action_alphabet_size,
                         obs_alphabet_size=1, transitions=rows)


def constant_reward_world(signal: Signal = Signal.WIN, name: str = "always-win") -> ExplicitWorld:
    """Degenerate world: every big step ends a game with `signal`."""
    return ExplicitWorld(
        name=name, n_states=1, start_state=0, action_alphabet_size=1,
        obs_alphabet_size=1,
        transitions={(0, 0): ((1.0, 0, 0, signal),)})


def oracle_bandit_family(obs_count: int, action_count: int) -> WorldFamily:
    """One world per lookup table f: observations -> actions.

    Each big step is a 1-step game: the previous observation announced a
    challenge symbol, the action wins iff it equals f(challenge), and the
    emitted observation reveals the next (uniformly random) challenge.
    The first challenge is symbol 0, matching the blank initial
    observation every life starts from.  Table p maps challenge o to
    (p // action_count**o) % action_count.
    """
    worlds = []
    for p in range(action_count ** obs_count):
        f = [(p // (action_count ** o)) % action_count for o in range(obs_count)]
        rows = {}
        for s in range(obs_count):
            for a in range(action_count):
                sig = Signal.WIN if a == f[s] else Signal.LOSS
                rows[(s, a)] = tuple((1.0 / obs_count, s2, s2, sig) for s2 in range(obs_count))
        worlds.append(ExplicitWorld(
            name=f"bandit{obs_count}x{action_count}#{p}", n_states=obs_count,
            start_state=0, action_alphabet_size=action_count,
            obs_alphabet_size=obs_count, transitions=rows))
    return uniform_family(worlds)


def instruction_recall_world(cues: int = 2, action_alphabet_size: int = 3) -> ExplicitWorld:
    """Two-phase games that reward remembering the previous input.

    Step 1 of a game shows a cue symbol c in {1..cues} (no signal); step 2
    wins iff the action equals c.  An agent that conditions on nothing
    (dead, random, or a learner with an empty context) wins at most 1/cues
    of the games in expectation, while a learner whose context covers the
    previous (action, observation) pair can learn to win every game.
    """
    if action_alphabet_size < cues + 1:
        raise ValueError("need one action per cue plus a losing action")
    # state 0: about to show a cue; state 1..cues: cue c pending test
    rows = {}
    obs_count = cues + 1
    for a in range(action_alphabet_size):
        rows[(0, a)] = tuple((1.0 / cues, c, c, Signal.NONE) for c in range(1, cues + 1))
        for c in range(1, cues + 1):
            sig = Signal.WIN if a == c else Signal.LOSS
            rows[(c, a)] = ((1.0, 0, 0, sig),)
    return ExplicitWorld(name=f"recall{cues}", n_states=cues + 1, start_state=0,
                         action_alphabet_size=action_alphabet_size,
                         obs_alphabet_size=obs_count, transitions=rows)


# ---------------------------------------------------------------------------
# Bit prediction


class BitStream:
    """Pull-based source of bits; `reset` is called at each life start."""

    def reset(self, stream: Stream) -> None:  # noqa: ARG002 - sources may ignore it
        pass

    def next_bit(self) -> int:
        raise NotImplementedError


class ConstantBits(BitStream):
    def __init__(self, bit: int):
        self.bit = bit

    def next_bit(self) -> int:
        return self.bit


class AlternatingBits(BitStream):
    def __init__(self):
        self._i = 0

    def reset(self, stream: Stream) -> None:
        self._i = 0

    def next_bit(self) -> int:
        bit = self._i & 1
        self._i += 1
        return bit


class RandomBits(BitStream):
    """Fair coin drawn from the world's randomness stream."""

    def __init__(self):
        self._stream: Optional[Stream] = None

    def reset(self, stream: Stream) -> None:
        self._stream = stream

    def next_bit(self) -> int:
        return self._stream.randrange(2)


class FileBits(BitStream):
    """Bits from a file, most significant bit of each byte first."""

    def __init__(self, path):
        with open(path, "rb") as fh:
            self._data = fh.read()
        self._i = 0

    def reset(self, stream: Stream) -> None:
        self._i = 0

    def next_bit(self) -> int:
        byte, offset = divmod(self._i, 8)
        if byte >= len(self._data):
            raise StreamExhausted(f"bit source ended after {self._i} bits")
        self._i += 1
        return (self._data[byte] >> (7 - offset)) & 1


def make_bitstream(spec: str) -> BitStream:
    """Named generators: zeros, ones, alternating, random, file:<path>."""
    if spec == "zeros":
        return ConstantBits(0)
    if spec == "ones":
        return ConstantBits(1)
    if spec == "alternating":
        return AlternatingBits()
    if spec == "random":
        return RandomBits()
    if spec.startswith("file:"):
        return FileBits(spec[5:])
    raise ValueError(f"unknown bit stream {spec!r}")


class BitstreamWorld:
    """Guess-the-next-bit world; every big step is a 1-step game.

    The action is the guess for the current hidden bit; the observation
    reveals that bit, with a Win signal iff the guess matched.
    """

    def __init__(self, source: BitStream, world_id: str = "bitstream"):
        self.source = source
        self.world_id = world_id
        self.action_alphabet_size = 2
        self.obs_alphabet_size = 2
        self._stream: Optional[Stream] = None

    def begin_life(self, stream: Stream) -> None:
        self._stream = stream
        self.source.reset(stream)

    def step(self, action: int) -> Observation:
        bit = self.source.next_bit()
        return Observation(bit, Signal.WIN if action == bit else Signal.LOSS)


def bitstream_world(source: BitStream) -> BitstreamWorld:
    return BitstreamWorld(source)


# ---------------------------------------------------------------------------
# The dyadic oscillating world


class OscillatingWorld:
    """Agent-independent 1-step games in dyadic blocks: block i holds 2**i
    games, all won when i is even and all lost when i is odd, so the
    running mean forever swings between 1/3 and 2/3."""

    def __init__(self):
        self.world_id = "oscillating"
        self.action_alphabet_size = 2
        self.obs_alphabet_size = 1
        self._game = 0

    def begin_life(self, stream: Stream) -> None:
        self._game = 0

    def step(self, action: int) -> Observation:
        block = (self._game + 1).bit_length() - 1
        self._game += 1
        return Observation(0, Signal.WIN if block % 2 == 0 else Signal.LOSS)


def oscillating_world() -> OscillatingWorld:
    return OscillatingWorld()


# ---------------------------------------------------------------------------
# Tic-Tac-Toe


_LINES = ((0, 1, 2), (3, 4, 5), (6, 7, 8),
          (0, 3, 6), (1, 4, 7), (2, 5, 8),
          (0, 4, 8), (2, 4, 6))

AGENT_MARK = 1
OPPONENT_MARK = 2


def board_winner(board: tuple[int, ...]) -> int:
    """0 if no line is complete, else the mark owning a complete line."""
    for a, b, c in _LINES:
        if board[a] != 0 and board[a] == board[b] == board[c]:
            return board[a]
    return 0


def _minimax_value(board: tuple[int, ...], to_move: int) -> int:
    """Game value for the opponent (O): +1 O wins, 0 draw, -1 X wins."""
    winner = board_winner(board)
    if winner == OPPONENT_MARK:
        return 1
    if winner == AGENT_MARK:
        return -1
    if all(board):
        return 0
    values = []
    for cell in range(9):
        if board[cell] == 0:
            child = board[:cell] + (to_move,) + board[cell + 1:]
            values.append(_minimax_value(child, 3 - to_move))
    return max(values) if to_move == OPPONENT_MARK else min(values)


_minimax_cache: dict[tuple[tuple[int, ...], int], int] = {}


def minimax_value(board: tuple[int, ...], to_move: int) -> int:
    key = (board, to_move)
    if key not in _minimax_cache:
        _minimax_cache[key] = _minimax_value(board, to_move)
    return _minimax_cache[key]


def minimax_move(board: tuple[int, ...]) -> int:
    """Opponent's optimal move; ties broken toward the lowest cell."""
    best_cell, best_value = -1, -2
    for cell in range(9):
        if board[cell] == 0:
            child = board[:cell] + (OPPONENT_MARK,) + board[cell + 1:]
            value = minimax_value(child, AGENT_MARK)
            if value > best_value:
                best_cell, best_value = cell, value
    return best_cell


class TicTacToeWorld:
    """3x3 board against a fixed opponent; the agent moves first with X.

    Actions are cell indices.  Playing an occupied (or any illegal) cell
    loses the game on the spot.  The observation stream is deliberately
    over-coded: each big step reveals a single cell of the board, scanned
    in row-major order by the number of steps taken in the current game,
    rather than a decoded position.
    """

    def __init__(self, opponent: str = "uniform_random"):
        if opponent not in ("uniform_random", "minimax"):
            raise ValueError(f"unknown opponent {opponent!r}")
        self.opponent = opponent
        self.world_id = f"tictactoe:{opponent}"
        self.action_alphabet_size = 9
        self.obs_alphabet_size = 3
        self._stream: Optional[Stream] = None
        self._reset_board()

    def _reset_board(self) -> None:
        self.board: tuple[int, ...] = (0,) * 9
        self._scan = 0

    def begin_life(self, stream: Stream) -> None:
        self._stream = stream
        self._reset_board()

    def decoded_view(self) -> list[list[int]]:
        return [list(self.board[r * 3:r * 3 + 3]) for r in range(3)]

    def _opponent_move(self) -> int:
        if self.opponent == "minimax":
            return minimax_move(self.board)
        free = [c for c in range(9) if self.board[c] == 0]
        return free[self._stream.randrange(len(free))]

    def step(self, action: int) -> Observation:
        signal = Signal.NONE
        if self.board[action] != 0:
            signal = Signal.LOSS
        else:
            self.board = self.board[:action] + (AGENT_MARK,) + self.board[action + 1:]
            if board_winner(self.board) == AGENT_MARK:
                signal = Signal.WIN
            elif all(self.board):
                signal = Signal.DRAW
            else:
                cell = self._opponent_move()
                self.board = self.board[:cell] + (OPPONENT_MARK,) + self.board[cell + 1:]
                if board_winner(self.board) == OPPONENT_MARK:
                    signal = Signal.LOSS
                elif all(self.board):
                    signal = Signal.DRAW
        symbol = self.board[self._scan % 9]
        self._scan += 1
        if signal is not Signal.NONE:
            self._reset_board()
        return Observation(symbol, signal)


def tictactoe_world(opponent: str = "uniform_random") -> TicTacToeWorld:
    return TicTacToeWorld(opponent)


# ---------------------------------------------------------------------------
# Family files


def write_family(family: WorldFamily, path) -> None:
    doc = {
        "format": FAMILY_FORMAT,
        "weights": list(family.weights),
        "worlds": [
            {
                "name": w.name,
                "n_states": w.n_states,
                "start_state": w.start_state,
                "action_alphabet_size": w.action_alphabet_size,
                "obs_alphabet_size": w.obs_alphabet_size,
                "transitions": {
                    f"{s},{a}": [[p, nxt, sym, sig.value] for p, nxt, sym, sig in rows]
                    for (s, a), rows in sorted(w.transitions.items())
                },
            }
            for w in family.worlds
        ],
    }
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_family(path) -> WorldFamily:
    with open(path, "r", encoding="ascii") as fh:
        doc = json.load(fh)
    if doc.get("format") != FAMILY_FORMAT:
        raise ValueError(f"unsupported family format {doc.get('format')!r}")
    worlds = []
    for w in doc["worlds"]:
        transitions = {}
        for key, rows in w["transitions"].items():
            s, a = (int(x) for x in key.split(","))
            transitions[(s, a)] = tuple(
                (float(p), int(nxt), int(sym), Signal(sig)) for p, nxt, sym, sig in rows)
        worlds.append(ExplicitWorld(
            name=w["name"], n_states=int(w["n_states"]),
            start_state=int(w["start_state"]),
            action_alphabet_size=int(w["action_alphabet_size"]),
            obs_alphabet_size=int(w["obs_alphabet_size"]),
            transitions=transitions))
    return WorldFamily(tuple(worlds), tuple(float(x) for x in doc["weights"]))


def parse_family_spec(spec: str) -> WorldFamily:
    """A family file path, or the builtin shorthand `bandit:<obs>,<actions>`."""
    if spec.startswith("bandit:"):
        obs, _, actions = spec[len("bandit:"):].partition(",")
        return oracle_bandit_family(int(obs), int(actions))
    return read_family(spec)
