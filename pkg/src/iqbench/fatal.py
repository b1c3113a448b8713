"""Fatal-error analysis on tabular worlds, both ways it can be defined:
closed groups of world states that are strictly worse than the outside,
and steps after which the best achievable final success drops.

Both definitions need the optimal value function, computed by backward
induction over (world state, games remaining, step within game) with the
game bookkeeping folded into the state.  Analysis is restricted to
tabular worlds: machine-generated worlds have unbounded configuration
spaces.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .world import LifeConfig, LifeRecord, Outcome, Signal, reward_of
from .worlds import ExplicitWorld

AUDIT_FORMAT = "audit/1"

VALUE_TOLERANCE = 1e-9

_OUTCOME_REWARD = {Outcome.WIN: 1.0, Outcome.LOSS: 0.0, Outcome.DRAW: 0.5,
                   Outcome.TIMEOUT_DRAW: 0.5}


class WorldNotTabular(TypeError):
    pass


class StateSpaceTooLarge(ValueError):
    pass


class TrajectoryMismatch(ValueError):
    pass


MAX_DP_CELLS = 5_000_000


def _require_tabular(world) -> ExplicitWorld:
    if not isinstance(world, ExplicitWorld):
        raise WorldNotTabular(f"fatal analysis needs a tabular world, got {type(world).__name__}")
    return world


class ValueTable:
    """V[(g, j)][s]: best expected sum of remaining game rewards from
    state s with g games left, j steps already played in the current one.

    `mean_remaining` normalizes by the remaining games into [0, 1];
    `anticipated_success` adds banked rewards and normalizes by the full
    life, which is the number the step audit watches.
    """

    def __init__(self, world: ExplicitWorld, config: LifeConfig,
                 table: dict[tuple[int, int], list[float]]):
        self.world = world
        self.config = config
        self._table = table

    def expected_remaining(self, state: int, games_remaining: int, step_in_game: int) -> float:
        if games_remaining == 0:
            return 0.0
        return self._table[(games_remaining, step_in_game)][state]

    def mean_remaining(self, state: int, games_remaining: int, step_in_game: int = 0) -> float:
        if games_remaining == 0:
            return 0.0
        return self.expected_remaining(state, games_remaining, step_in_game) / games_remaining

    def anticipated_success(self, banked: Fraction, state: int, games_remaining: int,
                            step_in_game: int) -> float:
        future = self.expected_remaining(state, games_remaining, step_in_game)
        return (float(banked) + future) / self.config.games

    def start_value(self) -> float:
        """Optimal mean success of a whole fresh life."""
        return self.mean_remaining(self.world.start_state, self.config.games, 0)


def optimal_values(world: ExplicitWorld, config: LifeConfig) -> ValueTable:
    """Backward induction over the full life horizon.

    A row ending the game banks its reward and moves to (g - 1, 0); a row
    on the last allowed step banks the timeout draw; otherwise play
    continues within the game.
    """
    world = _require_tabular(world)
    G, L, S = config.games, config.max_steps_per_game, world.n_states
    if (G + 1) * L * S > MAX_DP_CELLS:
        raise StateSpaceTooLarge(
            f"{(G + 1) * L * S} DP cells exceed the bound {MAX_DP_CELLS}")
    table: dict[tuple[int, int], list[float]] = {}
    prev_games_start = [0.0] * S  # F[g-1][0][:]
    signal_reward = {Signal.WIN: 1.0, Signal.LOSS: 0.0, Signal.DRAW: 0.5}
    for g in range(1, G + 1):
        layer: list[list[float]] = [[0.0] * S for _ in range(L)]
        for j in range(L - 1, -1, -1):
            row_j = layer[j]
            next_row = layer[j + 1] if j + 1 < L else None
            for s in range(S):
                best = -1.0
                for a in range(world.action_alphabet_size):
                    total = 0.0
                    for p, s2, _sym, sig in world.transitions[(s, a)]:
                        if sig is not Signal.NONE:
                            total += p * (signal_reward[sig] + prev_games_start[s2])
                        elif next_row is None:  # step j+1 would exceed the cap
                            total += p * (0.5 + prev_games_start[s2])
                        else:
                            total += p * next_row[s2]
                    if total > best:
                        best = total
                row_j[s] = best
        for j in range(L):
            table[(g, j)] = layer[j]
        prev_games_start = layer[0]
    return ValueTable(world, config, table)


@dataclass(frozen=True)
class FatalGroup:
    states: frozenset[int]
    inside_value: float   # best mean life success achievable from inside
    outside_value: float  # best mean life success from the start state


def _strongly_connected_components(n_states: int, edges: dict[int, set[int]]) -> list[set[int]]:
    """Iterative Tarjan."""
    index_of: dict[int, int] = {}
    lowlink: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    components: list[set[int]] = []
    counter = 0
    for root in range(n_states):
        if root in index_of:
            continue
        work = [(root, iter(sorted(edges[root])))]
        index_of[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for child in it:
                if child not in index_of:
                    index_of[child] = lowlink[child] = counter
                    counter += 1
                    stack.append(child)
                    on_stack.add(child)
                    work.append((child, iter(sorted(edges[child]))))
                    advanced = True
                    break
                if child in on_stack:
                    lowlink[node] = min(lowlink[node], index_of[child])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
            if lowlink[node] == index_of[node]:
                component = set()
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.add(member)
                    if member == node:
                        break
                components.append(component)
    return components


def find_fatal_groups(world: ExplicitWorld, config: LifeConfig) -> list[FatalGroup]:
    """Closed groups you cannot leave under any action, kept only when
    their best achievable value is strictly below the start state's."""
    world = _require_tabular(world)
    edges: dict[int, set[int]] = {s: set() for s in range(world.n_states)}
    for (s, _a), rows in world.transitions.items():
        for _p, s2, _sym, _sig in rows:
            edges[s].add(s2)
    components = _strongly_connected_components(world.n_states, edges)
    values = optimal_values(world, config)
    outside = values.start_value()
    groups: list[FatalGroup] = []
    for component in components:
        if any(s2 not in component for s in component for s2 in edges[s]):
            continue  # has an exit, hence never fatal
        inside = max(values.mean_remaining(s, config.games, 0) for s in component)
        if inside < outside - VALUE_TOLERANCE:
            groups.append(FatalGroup(states=frozenset(component), inside_value=inside,
                                     outside_value=outside))
    groups.sort(key=lambda g: sorted(g.states))
    return groups


@dataclass(frozen=True)
class AuditFinding:
    step: int
    state: int          # state after the fatal step
    value_before: float
    value_after: float


def audit_life(world: ExplicitWorld, life: LifeRecord, config: LifeConfig) -> list[AuditFinding]:
    """Steps after which the best anticipated final success dropped.

    Requires the recorded state trajectory that tabular worlds attach to
    their life records.
    """
    world = _require_tabular(world)
    if life.states is None:
        raise TrajectoryMismatch("life record carries no state trajectory")
    if len(life.states) != len(life.steps) + 1:
        raise TrajectoryMismatch("state trajectory does not match the step count")
    if life.states[0] != world.start_state:
        raise TrajectoryMismatch("life did not start at the world's start state")
    if sum(g.length_steps for g in life.games) != len(life.steps):
        raise TrajectoryMismatch("game lengths do not cover the steps")
    if len(life.games) > config.games:
        raise TrajectoryMismatch("life has more games than the config allows")
    if any(not (0 <= s < world.n_states) for s in life.states):
        raise TrajectoryMismatch("trajectory visits states outside the world")

    values = optimal_values(world, config)
    game_end_steps = {}
    acc = 0
    for game in life.games:
        acc += game.length_steps
        game_end_steps[acc - 1] = game

    findings: list[AuditFinding] = []
    banked = Fraction(0)
    games_done = 0
    step_in_game = 0
    before = values.anticipated_success(banked, life.states[0], config.games, 0)
    for t in range(len(life.steps)):
        game = game_end_steps.get(t)
        if game is not None:
            banked += reward_of(game)
            games_done += 1
            step_in_game = 0
        else:
            step_in_game += 1
        after = values.anticipated_success(banked, life.states[t + 1],
                                           config.games - games_done, step_in_game)
        if after < before - VALUE_TOLERANCE:
            findings.append(AuditFinding(step=t, state=life.states[t + 1],
                                         value_before=before, value_after=after))
        before = after
    return findings


def anticipated_trajectory(world: ExplicitWorld, life: LifeRecord,
                           config: LifeConfig) -> list[float]:
    """Best anticipated final success at every step boundary (length
    steps + 1); the audit flags the places where this sequence drops."""
    world = _require_tabular(world)
    if life.states is None or len(life.states) != len(life.steps) + 1:
        raise TrajectoryMismatch("life record carries no usable state trajectory")
    values = optimal_values(world, config)
    game_end_steps = {}
    acc = 0
    for game in life.games:
        acc += game.length_steps
        game_end_steps[acc - 1] = game
    out = [values.anticipated_success(Fraction(0), life.states[0], config.games, 0)]
    banked = Fraction(0)
    games_done = 0
    step_in_game = 0
    for t in range(len(life.steps)):
        game = game_end_steps.get(t)
        if game is not None:
            banked += reward_of(game)
            games_done += 1
            step_in_game = 0
        else:
            step_in_game += 1
        out.append(values.anticipated_success(banked, life.states[t + 1],
                                              config.games - games_done, step_in_game))
    return out


def write_audit_csv(findings: Sequence[AuditFinding], path) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(f"# {AUDIT_FORMAT}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["step", "state", "value_before", "value_after"])
        for f in findings:
            writer.writerow([f.step, f.state, repr(f.value_before), repr(f.value_after)])
