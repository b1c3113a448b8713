"""Test worlds generated by nondeterministic Turing machines of fixed size.

A machine's transition table maps (state, tape symbol, latched action) to
one or two equally probable branches.  Executing one big step means
running small steps until a branch emits an observation or the small-step
budget runs out.  All machines of a given size participate with equal
weight; the generator is symmetric under swapping Win and Loss, which is
what pins observation-oblivious agents to an expected success of 1/2.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, TextIO

from .rng import GENERATOR_NAME, Stream, derive_seed
from .world import Observation, Signal

SUITE_FORMAT = "suite/1"

TAPE_ALPHABET_SIZE = 4  # fixed default, blank = 0
DEFAULT_N_STATES = 20
DEFAULT_ACTION_ALPHABET = 3
DEFAULT_OBS_ALPHABET = 4
DEFAULT_SMALL_STEP_BUDGET = 100


class Branch(NamedTuple):
    next_state: int
    write: int
    head_move: int  # -1, 0, +1
    emit: Optional[Observation]


@dataclass(frozen=True)
class MachineGenParams:
    """Distribution the generator draws tables from.

    `signal_split` gives (Win, Loss, Draw) probabilities conditional on a
    branch carrying a game signal.  With the default equal Win and Loss
    shares the generated distribution is invariant under swap_win_loss,
    which is what pins observation-oblivious agents to an expected
    success of exactly 1/2; asymmetric splits are allowed for degenerate
    test worlds and give up that property.
    """

    p_second_branch: float = 0.25
    p_emit: float = 0.5
    p_game_signal_given_emit: float = 0.05
    signal_split: tuple[float, float, float] = (0.4, 0.4, 0.2)

    def __post_init__(self):
        probs = (self.p_second_branch, self.p_emit, self.p_game_signal_given_emit,
                 *self.signal_split)
        if any(not (0.0 <= p <= 1.0) for p in probs):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(sum(self.signal_split) - 1.0) > 1e-9:
            raise ValueError("signal_split must sum to 1")

    @property
    def swap_symmetric(self) -> bool:
        return self.signal_split[0] == self.signal_split[1]


@dataclass(frozen=True)
class WorldMachine:
    n_states: int
    action_alphabet_size: int
    obs_alphabet_size: int
    tape_alphabet_size: int
    small_step_budget: int
    # table[state][tape_symbol][action] -> tuple of 1 or 2 branches
    table: tuple[tuple[tuple[tuple[Branch, ...], ...], ...], ...]

    def validate(self) -> None:
        if len(self.table) != self.n_states:
            raise ValueError("table must have one row per state")
        for per_state in self.table:
            if len(per_state) != self.tape_alphabet_size:
                raise ValueError("table row must cover the tape alphabet")
            for per_symbol in per_state:
                if len(per_symbol) != self.action_alphabet_size:
                    raise ValueError("table cell must cover the action alphabet")
                for branches in per_symbol:
                    if not 1 <= len(branches) <= 2:
                        raise ValueError("each entry holds 1 or 2 branches")
                    for b in branches:
                        ok = (0 <= b.next_state < self.n_states
                              and 0 <= b.write < self.tape_alphabet_size
                              and b.head_move in (-1, 0, 1))
                        if b.emit is not None:
                            ok = ok and 0 <= b.emit.symbol < self.obs_alphabet_size
                        if not ok:
                            raise ValueError(f"branch out of range: {b}")


_SIGNALS = (Signal.WIN, Signal.LOSS, Signal.DRAW)


def _generate_branch(params: MachineGenParams, n_states: int, obs_alphabet: int,
                     tape_alphabet: int, stream: Stream) -> Branch:
    # Draw order is part of the reproducibility contract:
    # next_state, write, move, emit?, symbol, signal?, which signal.
    next_state = stream.randrange(n_states)
    write = stream.randrange(tape_alphabet)
    move = stream.randrange(3) - 1
    emit: Optional[Observation] = None
    if stream.random() < params.p_emit:
        symbol = stream.randrange(obs_alphabet)
        signal = Signal.NONE
        if stream.random() < params.p_game_signal_given_emit:
            u = stream.random()
            w, l, _ = params.signal_split
            if u < w:
                signal = Signal.WIN
            elif u < w + l:
                signal = Signal.LOSS
            else:
                signal = Signal.DRAW
        emit = Observation(symbol, signal)
    return Branch(next_state, write, move, emit)


def generate_machine(params: MachineGenParams, n_states: int, stream: Stream, *,
                     action_alphabet_size: int = DEFAULT_ACTION_ALPHABET,
                     obs_alphabet_size: int = DEFAULT_OBS_ALPHABET,
                     tape_alphabet_size: int = TAPE_ALPHABET_SIZE,
                     small_step_budget: int = DEFAULT_SMALL_STEP_BUDGET) -> WorldMachine:
    """Draw one machine: every (state, symbol, action) entry filled
    independently with 1 branch, or 2 with p_second_branch."""
    if n_states < 1:
        raise ValueError("n_states must be >= 1")
    table = []
    for _ in range(n_states):
        per_state = []
        for _ in range(tape_alphabet_size):
            per_symbol = []
            for _ in range(action_alphabet_size):
                n_branches = 2 if stream.random() < params.p_second_branch else 1
                branches = tuple(
                    _generate_branch(params, n_states, obs_alphabet_size,
                                     tape_alphabet_size, stream)
                    for _ in range(n_branches))
                per_symbol.append(branches)
            per_state.append(tuple(per_symbol))
        table.append(tuple(per_state))
    return WorldMachine(n_states=n_states, action_alphabet_size=action_alphabet_size,
                        obs_alphabet_size=obs_alphabet_size,
                        tape_alphabet_size=tape_alphabet_size,
                        small_step_budget=small_step_budget, table=tuple(table))


def swap_win_loss(machine: WorldMachine) -> WorldMachine:
    """Identical machine with every emitted Win and Loss exchanged."""
    flip = {Signal.WIN: Signal.LOSS, Signal.LOSS: Signal.WIN}

    def flip_branch(b: Branch) -> Branch:
        if b.emit is None or b.emit.signal not in flip:
            return b
        return b._replace(emit=Observation(b.emit.symbol, flip[b.emit.signal]))

    table = tuple(
        tuple(
            tuple(tuple(flip_branch(b) for b in branches) for branches in per_symbol)
            for per_symbol in per_state)
        for per_state in machine.table)
    return replace(machine, table=table)


class MachineWorld:
    """Runtime for a WorldMachine: two-sided tape, head, current state.

    Implements the world interface.  The small-step budget guarantees
    every big step terminates; running the budget out yields the blank
    observation (symbol 0, no signal).
    """

    def __init__(self, machine: WorldMachine, world_id: str = "machine"):
        self.machine = machine
        self.world_id = world_id
        self.action_alphabet_size = machine.action_alphabet_size
        self.obs_alphabet_size = machine.obs_alphabet_size
        self.current_state = 0
        self.tape: dict[int, int] = {}
        self.head = 0
        self._stream: Optional[Stream] = None

    def begin_life(self, stream: Stream) -> None:
        self.current_state = 0
        self.tape = {}
        self.head = 0
        self._stream = stream

    def step(self, action: int) -> Observation:
        table = self.machine.table
        budget = self.machine.small_step_budget
        stream = self._stream
        state = self.current_state
        tape = self.tape
        head = self.head
        for _ in range(budget):
            branches = table[state][tape.get(head, 0)][action]
            branch = branches[stream.randrange(len(branches))] if len(branches) > 1 else branches[0]
            tape[head] = branch.write
            head += branch.head_move
            state = branch.next_state
            if branch.emit is not None:
                self.current_state, self.head = state, head
                return branch.emit
        self.current_state, self.head = state, head
        return Observation(0, Signal.NONE)


@dataclass(frozen=True)
class SuiteEntry:
    """One test world of a suite.

    `seed_key` is the index fed to the life-seed derivation.  Generated
    suites use the entry's position; swap-closed paired suites give a
    machine and its swapped twin the same key so their lives replay the
    same randomness and the paired-swap identity holds exactly.
    """

    world_id: str
    seed_key: int
    machine: WorldMachine


@dataclass(frozen=True)
class Suite:
    master_seed: int
    n_states: int
    params: MachineGenParams
    action_alphabet_size: int
    obs_alphabet_size: int
    tape_alphabet_size: int
    small_step_budget: int
    entries: tuple[SuiteEntry, ...]
    generator: str = GENERATOR_NAME

    def __len__(self) -> int:
        return len(self.entries)


class InvalidCount(ValueError):
    pass


class FormatVersionMismatch(ValueError):
    pass


class CorruptSuite(ValueError):
    pass


def generate_suite(params: MachineGenParams, n_states: int, count: int, master_seed: int, *,
                   action_alphabet_size: int = DEFAULT_ACTION_ALPHABET,
                   obs_alphabet_size: int = DEFAULT_OBS_ALPHABET,
                   tape_alphabet_size: int = TAPE_ALPHABET_SIZE,
                   small_step_budget: int = DEFAULT_SMALL_STEP_BUDGET) -> Suite:
    """Machine i is drawn from the sub-stream i of the master seed."""
    if count < 1:
        raise InvalidCount(f"suite needs at least one machine, got {count}")
    entries = []
    for i in range(count):
        stream = Stream(derive_seed(master_seed, i))
        machine = generate_machine(params, n_states, stream,
                                   action_alphabet_size=action_alphabet_size,
                                   obs_alphabet_size=obs_alphabet_size,
                                   tape_alphabet_size=tape_alphabet_size,
                                   small_step_budget=small_step_budget)
        entries.append(SuiteEntry(world_id=str(i), seed_key=i, machine=machine))
    return Suite(master_seed=master_seed, n_states=n_states, params=params,
                 action_alphabet_size=action_alphabet_size,
                 obs_alphabet_size=obs_alphabet_size,
                 tape_alphabet_size=tape_alphabet_size,
                 small_step_budget=small_step_budget, entries=tuple(entries))


def swap_suite(suite: Suite) -> Suite:
    entries = tuple(SuiteEntry(e.world_id + "s", e.seed_key, swap_win_loss(e.machine))
                    for e in suite.entries)
    return replace(suite, entries=entries)


def swap_closed(suite: Suite) -> Suite:
    """Suite followed by its swapped twin; pairs share seed keys."""
    return replace(suite, entries=suite.entries + swap_suite(suite).entries)


def _emit_str(emit: Optional[Observation]) -> str:
    if emit is None:
        return "."
    return f"{emit.symbol}:{emit.signal.value}"


def _parse_emit(text: str) -> Optional[Observation]:
    if text == ".":
        return None
    sym, _, sig = text.partition(":")
    return Observation(int(sym), Signal(sig))


def write_suite(suite: Suite, out: TextIO) -> None:
    out.write(f"{SUITE_FORMAT}\n")
    out.write(f"generator={suite.generator}\n")
    out.write(f"master_seed={suite.master_seed}\n")
    out.write(f"n_states={suite.n_states}\n")
    out.write(f"action_alphabet_size={suite.action_alphabet_size}\n")
    out.write(f"obs_alphabet_size={suite.obs_alphabet_size}\n")
    out.write(f"tape_alphabet_size={suite.tape_alphabet_size}\n")
    out.write(f"small_step_budget={suite.small_step_budget}\n")
    out.write(f"p_second_branch={suite.params.p_second_branch!r}\n")
    out.write(f"p_emit={suite.params.p_emit!r}\n")
    out.write(f"p_game_signal_given_emit={suite.params.p_game_signal_given_emit!r}\n")
    split = ",".join(repr(p) for p in suite.params.signal_split)
    out.write(f"signal_split={split}\n")
    out.write(f"count={len(suite.entries)}\n")
    for entry in suite.entries:
        out.write(f"machine {entry.world_id} seed_key={entry.seed_key}\n")
        m = entry.machine
        for s in range(m.n_states):
            for g in range(m.tape_alphabet_size):
                for a in range(m.action_alphabet_size):
                    branches = " | ".join(
                        f"{b.next_state} {b.write} {b.head_move} {_emit_str(b.emit)}"
                        for b in m.table[s][g][a])
                    out.write(f"t {s} {g} {a}: {branches}\n")
        out.write("end\n")


def write_suite_file(suite: Suite, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        write_suite(suite, fh)


def _parse_branch(text: str) -> Branch:
    parts = text.split()
    if len(parts) != 4:
        raise CorruptSuite(f"bad branch {text!r}")
    return Branch(int(parts[0]), int(parts[1]), int(parts[2]), _parse_emit(parts[3]))


_HEADER_KEYS = ("generator", "master_seed", "n_states", "action_alphabet_size",
                "obs_alphabet_size", "tape_alphabet_size", "small_step_budget",
                "p_second_branch", "p_emit", "p_game_signal_given_emit",
                "signal_split", "count")


def read_suite(inp: TextIO) -> Suite:
    first = inp.readline().strip()
    if first != SUITE_FORMAT:
        raise FormatVersionMismatch(f"expected {SUITE_FORMAT!r}, found {first!r}")
    header: dict[str, str] = {}
    for key in _HEADER_KEYS:
        line = inp.readline().strip()
        k, _, v = line.partition("=")
        if k != key:
            raise CorruptSuite(f"expected header key {key!r}, found {line!r}")
        header[k] = v
    try:
        params = MachineGenParams(
            p_second_branch=float(header["p_second_branch"]),
            p_emit=float(header["p_emit"]),
            p_game_signal_given_emit=float(header["p_game_signal_given_emit"]),
            signal_split=tuple(float(x) for x in header["signal_split"].split(",")),
        )
        n_states = int(header["n_states"])
        action_ab = int(header["action_alphabet_size"])
        obs_ab = int(header["obs_alphabet_size"])
        tape_ab = int(header["tape_alphabet_size"])
        budget = int(header["small_step_budget"])
        count = int(header["count"])
        master_seed = int(header["master_seed"])
    except (ValueError, TypeError) as exc:
        raise CorruptSuite(f"bad header value: {exc}") from exc

    entries = []
    n_entries_expected = n_states * tape_ab * action_ab
    for _ in range(count):
        head_line = inp.readline().split()
        if len(head_line) != 3 or head_line[0] != "machine":
            raise CorruptSuite(f"expected machine header, found {head_line!r}")
        world_id = head_line[1]
        if not head_line[2].startswith("seed_key="):
            raise CorruptSuite(f"missing seed_key in {head_line!r}")
        seed_key = int(head_line[2].split("=", 1)[1])
        cells: dict[tuple[int, int, int], tuple[Branch, ...]] = {}
        for _ in range(n_entries_expected):
            line = inp.readline()
            if not line.startswith("t "):
                raise CorruptSuite(f"expected table line, found {line!r}")
            key_part, _, branch_part = line[2:].partition(":")
            s, g, a = (int(x) for x in key_part.split())
            branches = tuple(_parse_branch(b) for b in branch_part.split("|"))
            cells[(s, g, a)] = branches
        if inp.readline().strip() != "end":
            raise CorruptSuite("machine record not terminated")
        try:
            table = tuple(
                tuple(tuple(cells[(s, g, a)] for a in range(action_ab))
                      for g in range(tape_ab))
                for s in range(n_states))
        except KeyError as exc:
            raise CorruptSuite(f"missing table entry {exc}") from exc
        machine = WorldMachine(n_states=n_states, action_alphabet_size=action_ab,
                               obs_alphabet_size=obs_ab, tape_alphabet_size=tape_ab,
                               small_step_budget=budget, table=table)
        machine.validate()
        entries.append(SuiteEntry(world_id=world_id, seed_key=seed_key, machine=machine))
    return Suite(master_seed=master_seed, n_states=n_states, params=params,
                 action_alphabet_size=action_ab, obs_alphabet_size=obs_ab,
                 tape_alphabet_size=tape_ab, small_step_budget=budget,
                 entries=tuple(entries), generator=header["generator"])


def read_suite_file(path) -> Suite:
    with open(path, "r", encoding="ascii") as fh:
        return read_suite(fh)


def suite_from_string(text: str) -> Suite:
    return read_suite(io.StringIO(text))
