"""Reference agents: oblivious baselines, a frequency learner, the
absurdly slow policy enumerator, the world-memorizing specialist, and the
exactly-Bayes-optimal planner for tiny enumerable world families.

Every agent is a step device: it keeps internal state, receives one
observation per big step, and emits one action.  Per-life randomness
arrives through `begin_life`; construction fixes behavior only.
"""
from __future__ import annotations

from collections import deque
from typing import Callable, Optional

from .rng import Stream
from .world import Observation, Signal
from .worlds import WorldFamily, parse_family_spec

_SIGNAL_REWARD = {Signal.WIN: 1.0, Signal.LOSS: 0.0, Signal.DRAW: 0.5}

MAX_FAMILY_WORLDS = 128
MAX_FAMILY_STATES = 512
MAX_PLAN_HORIZON = 5


class FamilyTooLarge(ValueError):
    """Exact planning is only honest at desk scale; refuse anything bigger."""


class HorizonTooDeep(ValueError):
    pass


class Agent:
    """Base step device. Subclasses override `act`; `begin_life` resets
    internal state and installs the agent's randomness stream."""

    def begin_life(self, stream: Stream) -> None:
        self._stream = stream

    def act(self, observation: Observation) -> int:
        raise NotImplementedError


class RandomAgent(Agent):
    """Uniform action every step, input ignored."""

    def __init__(self, action_alphabet_size: int):
        self.action_alphabet_size = action_alphabet_size

    def act(self, observation: Observation) -> int:
        return self._stream.randrange(self.action_alphabet_size)


class DeadAgent(Agent):
    """One constant action forever, input ignored."""

    def __init__(self, action: int = 0):
        if action < 0:
            raise ValueError("action must be >= 0")
        self.action = action

    def act(self, observation: Observation) -> int:
        return self.action


class FrequencyLearner(Agent):
    """Greedy learner over game outcomes keyed by a short context.

    The context is the last `context_length` (action, observation symbol)
    pairs, the newest being the pair just completed by the incoming
    observation.  Every decision taken during a game is credited with
    that game's reward once its end signal is seen (timeouts carry no
    signal and are invisible, like to any other agent).  Exploration is
    epsilon-greedy with epsilon = 1/(1 + visits(context)) unless a fixed
    epsilon is given.
    """

    PENDING_CAP = 1000  # decisions a single unsignalled game may hold alive

    def __init__(self, action_alphabet_size: int, context_length: int = 2,
                 epsilon: Optional[float] = None):
        if context_length < 0:
            raise ValueError("context_length must be >= 0")
        self.action_alphabet_size = action_alphabet_size
        self.context_length = context_length
        self.epsilon = epsilon

    def begin_life(self, stream: Stream) -> None:
        super().begin_life(stream)
        self._context: deque = deque(maxlen=self.context_length)
        self._pending: deque = deque(maxlen=self.PENDING_CAP)
        self._reward_sum: dict = {}
        self._count: dict = {}
        self._visits: dict = {}
        self._last_action: Optional[int] = None

    def _credit(self, reward: float) -> None:
        while self._pending:
            key = self._pending.popleft()
            self._reward_sum[key] = self._reward_sum.get(key, 0.0) + reward
            self._count[key] = self._count.get(key, 0) + 1

    def act(self, observation: Observation) -> int:
        if self._last_action is not None:
            self._context.append((self._last_action, observation.symbol))
        if observation.signal is not Signal.NONE:
            self._credit(_SIGNAL_REWARD[observation.signal])
        context = tuple(self._context)
        visits = self._visits.get(context, 0)
        self._visits[context] = visits + 1
        eps = self.epsilon if self.epsilon is not None else 1.0 / (1.0 + visits)
        if self._stream.random() < eps:
            action = self._stream.randrange(self.action_alphabet_size)
        else:
            best_action, best_value = 0, -1.0
            for a in range(self.action_alphabet_size):
                count = self._count.get((context, a), 0)
                value = self._reward_sum[(context, a)] / count if count else 0.5
                if value > best_value:
                    best_action, best_value = a, value
            action = best_action
        self._pending.append((context, action))
        self._last_action = action
        return action


class RetardedAgent(Agent):
    """Exhaustive policy enumeration at a catastrophically slow schedule.

    Tier 1 holds the constant-action policies, tier 2 every lookup table
    from the last observation symbol to an action.  Each candidate is
    played for an epoch of signalled games that doubles at every switch
    (4, 8, 16, ...); once both tiers are exhausted the best-scoring
    policy (earliest on ties) is played forever.  Training is finite but
    beyond any realistic life at default alphabets.
    """

    def __init__(self, action_alphabet_size: int, obs_alphabet_size: int,
                 initial_epoch: int = 4):
        if initial_epoch < 1:
            raise ValueError("initial_epoch must be >= 1")
        self.action_alphabet_size = action_alphabet_size
        self.obs_alphabet_size = obs_alphabet_size
        self.initial_epoch = initial_epoch
        self.n_policies = action_alphabet_size + action_alphabet_size ** obs_alphabet_size

    def enumeration_horizon_games(self) -> int:
        """Signalled games consumed before the final policy is locked in."""
        return self.initial_epoch * ((1 << self.n_policies) - 1)

    def _policy_action(self, index: int, last_symbol: int) -> int:
        a = self.action_alphabet_size
        if index < a:
            return index
        table = index - a
        return (table // (a ** last_symbol)) % a

    def begin_life(self, stream: Stream) -> None:
        super().begin_life(stream)
        self._policy = 0
        self._epoch_len = self.initial_epoch
        self._games_in_epoch = 0
        self._epoch_reward = 0.0
        self._scores: list[float] = []
        self._best: Optional[int] = None
        self._last_symbol = 0
        self.epoch_lengths_completed: list[int] = []

    def _advance_policy(self) -> None:
        self._scores.append(self._epoch_reward / self._epoch_len)
        self.epoch_lengths_completed.append(self._epoch_len)
        self._policy += 1
        self._epoch_len *= 2
        self._games_in_epoch = 0
        self._epoch_reward = 0.0
        if self._policy >= self.n_policies:
            best = max(range(len(self._scores)), key=lambda i: (self._scores[i], -i))
            self._best = best

    def act(self, observation: Observation) -> int:
        if observation.signal is not Signal.NONE and self._best is None:
            self._epoch_reward += _SIGNAL_REWARD[observation.signal]
            self._games_in_epoch += 1
            if self._games_in_epoch >= self._epoch_len:
                self._advance_policy()
        self._last_symbol = observation.symbol
        index = self._best if self._best is not None else self._policy
        return self._policy_action(index, self._last_symbol)


# ---------------------------------------------------------------------------
# Exact planning over enumerable families

Belief = dict[tuple[int, int], float]  # (world index, world state) -> probability


def _check_family_bounds(family: WorldFamily) -> None:
    if len(family) > MAX_FAMILY_WORLDS or sum(w.n_states for w in family.worlds) > MAX_FAMILY_STATES:
        raise FamilyTooLarge(
            f"{len(family)} worlds / {sum(w.n_states for w in family.worlds)} states exceed "
            f"the exact-planning bounds ({MAX_FAMILY_WORLDS} worlds, {MAX_FAMILY_STATES} states)")


def prior_belief(family: WorldFamily) -> Belief:
    return {(w, family.worlds[w].start_state): family.weights[w] for w in range(len(family))}


def filter_belief(family: WorldFamily, belief: Belief, action: int,
                  observation: Observation) -> Belief:
    """Exact Bayes step: condition on the observation produced by `action`."""
    posterior: Belief = {}
    for (w, s), mass in belief.items():
        for p, s2, sym, sig in family.worlds[w].transitions[(s, action)]:
            if sym == observation.symbol and sig == observation.signal:
                key = (w, s2)
                posterior[key] = posterior.get(key, 0.0) + mass * p
    total = sum(posterior.values())
    if total <= 0.0:
        return {}
    return {k: v / total for k, v in posterior.items()}


def expectimax(family: WorldFamily, belief: Belief, horizon: int) -> tuple[float, int]:
    """Max expected sum of game rewards over the next `horizon` big steps.

    Returns (value, best action); ties break toward the lowest action.
    """
    if not belief:
        return 0.0, 0
    n_actions = family.worlds[0].action_alphabet_size
    best_value, best_action = -1.0, 0
    for a in range(n_actions):
        # joint mass per (observation, successor) so the recursion sees the
        # belief the agent would actually hold after observing
        by_obs: dict[Observation, dict[tuple[int, int], float]] = {}
        reward = 0.0
        for (w, s), mass in belief.items():
            for p, s2, sym, sig in family.worlds[w].transitions[(s, a)]:
                obs = Observation(sym, sig)
                cell = by_obs.setdefault(obs, {})
                cell[(w, s2)] = cell.get((w, s2), 0.0) + mass * p
                if sig is not Signal.NONE:
                    reward += mass * p * _SIGNAL_REWARD[sig]
        value = reward
        if horizon > 1:
            for obs, posterior in by_obs.items():
                weight = sum(posterior.values())
                if weight <= 0.0:
                    continue
                normalized = {k: v / weight for k, v in posterior.items()}
                future, _ = expectimax(family, normalized, horizon - 1)
                value += weight * future
        if value > best_value + 1e-12:
            best_value, best_action = value, a
    return best_value, best_action


class BayesOptimalAgent(Agent):
    """Exact Bayesian filtering plus expectimax over the posterior mixture.

    Feasible only for tiny families; size and depth bounds are enforced
    rather than pretending this scales.
    """

    def __init__(self, family: WorldFamily, horizon: int = 1):
        _check_family_bounds(family)
        if horizon < 1:
            raise ValueError("horizon must be >= 1")
        if horizon > MAX_PLAN_HORIZON:
            raise HorizonTooDeep(f"horizon {horizon} exceeds bound {MAX_PLAN_HORIZON}")
        self.family = family
        self.horizon = horizon

    def begin_life(self, stream: Stream) -> None:
        super().begin_life(stream)
        self.belief = prior_belief(self.family)
        self._last_action: Optional[int] = None

    def act(self, observation: Observation) -> int:
        if self._last_action is not None:
            self.belief = filter_belief(self.family, self.belief, self._last_action, observation)
            if not self.belief:
                # history impossible under every family member: restart the prior
                self.belief = prior_belief(self.family)
        _, action = expectimax(self.family, self.belief, self.horizon)
        self._last_action = action
        return action


class CrammingAgent(Agent):
    """Specialist for a fixed training family.

    Tracks, per training world, the distribution over its states that is
    consistent with the whole history; plays the expectimax action of the
    lowest-indexed still-consistent world, and falls back to a constant
    action once every training world has been contradicted.
    """

    def __init__(self, family: WorldFamily, horizon: int = 2, fallback_action: int = 0):
        _check_family_bounds(family)
        if horizon < 1:
            raise ValueError("horizon must be >= 1")
        if horizon > MAX_PLAN_HORIZON:
            raise HorizonTooDeep(f"horizon {horizon} exceeds bound {MAX_PLAN_HORIZON}")
        self.family = family
        self.horizon = horizon
        self.fallback_action = fallback_action
        self._singletons = [WorldFamily((w,), (1.0,)) for w in family.worlds]

    def begin_life(self, stream: Stream) -> None:
        super().begin_life(stream)
        self._beliefs: list[Belief] = [
            {(0, w.start_state): 1.0} for w in self.family.worlds]
        self._last_action: Optional[int] = None

    @property
    def consistent_world(self) -> Optional[int]:
        for i, belief in enumerate(self._beliefs):
            if belief:
                return i
        return None

    def act(self, observation: Observation) -> int:
        if self._last_action is not None:
            self._beliefs = [
                filter_belief(self._singletons[i], belief, self._last_action, observation)
                if belief else belief
                for i, belief in enumerate(self._beliefs)]
        chosen = self.consistent_world
        if chosen is None:
            action = self.fallback_action
        else:
            _, action = expectimax(self._singletons[chosen], self._beliefs[chosen], self.horizon)
        self._last_action = action
        return action


# ---------------------------------------------------------------------------
# Spec strings ("random", "dead:0", "freq:k=2", "retarded",
# "cram:<family>", "td5:<family>,h=2")

AgentFactory = Callable[[int, int], Agent]  # (action alphabet, obs alphabet) -> fresh agent


def random_agent() -> AgentFactory:
    return lambda actions, obs: RandomAgent(actions)


def dead_agent(action: int = 0) -> AgentFactory:
    return lambda actions, obs: DeadAgent(action)


def frequency_learner(context_length: int = 2, epsilon: Optional[float] = None) -> AgentFactory:
    return lambda actions, obs: FrequencyLearner(actions, context_length, epsilon)


def retarded_agent(initial_epoch: int = 4) -> AgentFactory:
    return lambda actions, obs: RetardedAgent(actions, obs, initial_epoch)


def build_cramming(family: WorldFamily, horizon: int = 2) -> AgentFactory:
    return lambda actions, obs: CrammingAgent(family, horizon)


def bayes_optimal_agent(family: WorldFamily, horizon: int = 1) -> AgentFactory:
    return lambda actions, obs: BayesOptimalAgent(family, horizon)


def _parse_kv(text: str, key: str, default: int) -> int:
    for part in text.split(","):
        k, _, v = part.partition("=")
        if k == key:
            return int(v)
    return default


def make_agent_factory(spec: str) -> AgentFactory:
    kind, _, rest = spec.partition(":")
    if kind == "random":
        return random_agent()
    if kind == "dead":
        return dead_agent(int(rest) if rest else 0)
    if kind == "freq":
        k = _parse_kv(rest, "k", 2) if rest else 2
        eps = None
        for part in rest.split(","):
            if part.startswith("eps="):
                eps = float(part[4:])
        return frequency_learner(k, eps)
    if kind == "retarded":
        epoch = _parse_kv(rest, "epoch", 4) if rest else 4
        return retarded_agent(epoch)
    if kind in ("cram", "td5"):
        if not rest:
            raise ValueError(f"{kind} needs a family spec, e.g. {kind}:bandit:2,3")
        if ",h=" in rest:
            family_part, _, h_part = rest.rpartition(",h=")
            horizon = int(h_part)
        else:
            family_part, horizon = rest, (2 if kind == "cram" else 1)
        family = parse_family_spec(family_part)
        return build_cramming(family, horizon) if kind == "cram" else \
            bayes_optimal_agent(family, horizon)
    raise ValueError(f"unknown agent spec {spec!r}")
