"""Independent oracles used by the test suite.

These deliberately avoid the package's own planning code paths: the
bandit oracle enumerates belief trajectories directly over table subsets,
and the policy-enumeration oracle evaluates every time-dependent Markov
policy by forward probability propagation.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache

from iqbench.world import LifeConfig, Signal
from iqbench.worlds import ExplicitWorld


def bandit_tables(obs_count: int, action_count: int) -> list[tuple[int, ...]]:
    return [tuple((p // action_count ** o) % action_count for o in range(obs_count))
            for p in range(action_count ** obs_count)]


def bandit_majority_exact_mean_success(obs_count: int, action_count: int,
                                       games: int) -> Fraction:
    """Exact expected per-life mean success of the posterior-majority
    policy (ties to the lowest action) on the uniform bandit family.

    The posterior over tables stays uniform over the consistent subset,
    so the belief trajectory is a walk over subsets; challenges are
    uniform after the fixed first challenge 0.
    """
    tables = bandit_tables(obs_count, action_count)
    n = len(tables)
    total = Fraction(0)
    for f_star in tables:

        @lru_cache(maxsize=None)
        def expected_sum(consistent: frozenset, challenge: int, remaining: int) -> Fraction:
            if remaining == 0:
                return Fraction(0)
            counts = [0] * action_count
            for i in consistent:
                counts[tables[i][challenge]] += 1
            best_action = max(range(action_count), key=lambda a: (counts[a], -a))
            won = f_star[challenge] == best_action
            reward = Fraction(1) if won else Fraction(0)
            survivors = frozenset(
                i for i in consistent if (tables[i][challenge] == best_action) == won)
            future = sum(
                (expected_sum(survivors, c2, remaining - 1) for c2 in range(obs_count)),
                Fraction(0)) / obs_count
            return reward + future

        total += expected_sum(frozenset(range(n)), 0, games)
        expected_sum.cache_clear()
    return total / (n * games)


def enumerate_policy_value(world: ExplicitWorld, config: LifeConfig) -> float:
    """Optimal expected sum of game rewards by brute force: enumerate every
    deterministic time-dependent policy over reachable (time, state, games
    done, step-in-game) decision points and evaluate each by exact forward
    probability propagation.  Exponential; only for tiny worlds.
    """
    G, L = config.games, config.max_steps_per_game
    horizon = G * L
    signal_reward = {Signal.WIN: 1.0, Signal.LOSS: 0.0, Signal.DRAW: 0.5}

    # reachable bookkeeping nodes per time step, by breadth-first walk
    reachable: list[set[tuple[int, int, int]]] = [set() for _ in range(horizon)]
    frontier = {(world.start_state, 0, 0)}
    for t in range(horizon):
        nxt = set()
        for node in frontier:
            s, done, j = node
            if done >= G:
                continue
            reachable[t].add(node)
            for a in range(world.action_alphabet_size):
                for _p, s2, _sym, sig in world.transitions[(s, a)]:
                    if sig is not Signal.NONE or j + 1 >= L:
                        nxt.add((s2, done + 1, 0))
                    else:
                        nxt.add((s2, done, j + 1))
        frontier = nxt

    decision_points = [(t, node) for t in range(horizon) for node in sorted(reachable[t])]
    n_actions = world.action_alphabet_size
    best = -1.0
    for assignment in itertools.product(range(n_actions), repeat=len(decision_points)):
        policy = dict(zip(decision_points, assignment))
        dist = {(world.start_state, 0, 0): 1.0}
        value = 0.0
        for t in range(horizon):
            new_dist: dict[tuple[int, int, int], float] = {}
            for node, mass in dist.items():
                s, done, j = node
                if done >= G:
                    continue
                a = policy[(t, node)]
                for p, s2, _sym, sig in world.transitions[(s, a)]:
                    if sig is not Signal.NONE:
                        value += mass * p * signal_reward[sig]
                        key = (s2, done + 1, 0)
                    elif j + 1 >= L:
                        value += mass * p * 0.5
                        key = (s2, done + 1, 0)
                    else:
                        key = (s2, done, j + 1)
                    new_dist[key] = new_dist.get(key, 0.0) + mass * p
            dist = new_dist
        if value > best:
            best = value
    return best
