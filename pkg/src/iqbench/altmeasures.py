"""The rival discounted intelligence measures and their failure modes.

Implements, against this package's own world class: the per-step
discounted value; the naive universal sum whose per-complexity terms grow
without bound because machine counts grow exponentially; the corrected
per-complexity average whose 2^-c weights put the expected complexity at
exactly 2; and the bounded monotone success variant in which cumulative
success can never decrease.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .agents import AgentFactory
from .metrics import estimate_iq
from .ndtm import (DEFAULT_ACTION_ALPHABET, DEFAULT_OBS_ALPHABET, MachineGenParams,
                   MachineWorld, Suite, TAPE_ALPHABET_SIZE, generate_machine)
from .rng import Stream, derive_seed
from .world import (AGENT_SUBSTREAM, WORLD_SUBSTREAM, LifeConfig, LifeRunner,
                    Observation, Signal, WorldInterface, reward_of)

TERMS_FORMAT = "terms/1"
CORRECTED_FORMAT = "corrected/1"
SEPARATION_FORMAT = "sepreport/1"

_SIGNAL_REWARD = {Signal.WIN: 1.0, Signal.LOSS: 0.0, Signal.DRAW: 0.5}


@dataclass(frozen=True)
class DiscountParams:
    gamma: float = 0.9
    horizon: int = 300

    def __post_init__(self):
        if not (0.0 < self.gamma < 1.0):
            raise ValueError("gamma must lie strictly inside (0, 1)")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")


def discounted_value(agent, world: WorldInterface, params: DiscountParams, seed: int) -> float:
    """V = (1 - gamma) * sum over big steps of gamma^t * r_t.

    r_t is the reward of the game that ends on step t, else 0; the
    (1 - gamma) factor normalizes V into [0, 1].  No per-game step cap
    applies here: the horizon truncates everything.
    """
    world_stream = Stream(derive_seed(seed, WORLD_SUBSTREAM))
    agent_stream = Stream(derive_seed(seed, AGENT_SUBSTREAM))
    # games cannot outnumber steps; max_steps + 1 keeps timeouts unreachable
    config = LifeConfig(games=params.horizon, max_steps_per_game=params.horizon + 1)
    runner = LifeRunner(world, config, world_stream, record_steps=False)
    agent.begin_life(agent_stream)
    value = 0.0
    discount = 1.0 - params.gamma
    for _ in range(params.horizon):
        if runner.finished:
            break
        action = agent.act(runner.last_observation)
        result = runner.step(action)
        if result.game_over is not None:
            value += discount * float(reward_of(result.game_over))
        discount *= params.gamma
    return value


def machine_count(n_states: int, *, tape_alphabet_size: int = TAPE_ALPHABET_SIZE,
                  action_alphabet_size: int = DEFAULT_ACTION_ALPHABET,
                  obs_alphabet_size: int = DEFAULT_OBS_ALPHABET,
                  allow_emits: bool = True) -> int:
    """Exact number of distinct transition tables of the given size.

    Branch options B = next_state * write * move * emit variants; each of
    the n_states * tape * action entries holds either one branch (B ways)
    or an unordered pair (B * (B + 1) / 2 ways).
    """
    if n_states < 1:
        raise ValueError("n_states must be >= 1")
    emit_options = 1 + obs_alphabet_size * 4 if allow_emits else 1
    branch_options = n_states * tape_alphabet_size * 3 * emit_options
    per_entry = branch_options + branch_options * (branch_options + 1) // 2
    entries = n_states * tape_alphabet_size * action_alphabet_size
    return per_entry ** entries


def log2_machine_count(n_states: int, **kwargs) -> float:
    """log2 of machine_count; this is the growth that makes the naive
    universal sum diverge."""
    emit_options = 1 + kwargs.get("obs_alphabet_size", DEFAULT_OBS_ALPHABET) * 4 \
        if kwargs.get("allow_emits", True) else 1
    tape = kwargs.get("tape_alphabet_size", TAPE_ALPHABET_SIZE)
    actions = kwargs.get("action_alphabet_size", DEFAULT_ACTION_ALPHABET)
    branch_options = n_states * tape * 3 * emit_options
    per_entry = branch_options + branch_options * (branch_options + 1) // 2
    return n_states * tape * actions * math.log2(per_entry)


@dataclass(frozen=True)
class ComplexityTermRow:
    c: int
    log2_count: float
    mean_value: float
    log2_term: float  # log2(count) - c + log2(mean value); -inf when the mean is 0


@dataclass(frozen=True)
class ComplexityTermSeries:
    rows: tuple[ComplexityTermRow, ...]
    samples_per_c: int
    discount: DiscountParams


def _sample_mean_value(agent_factory: AgentFactory, c: int, samples: int, base_seed: int,
                       discount: DiscountParams, gen_params: MachineGenParams) -> float:
    total = 0.0
    for i in range(samples):
        machine = generate_machine(gen_params, c, Stream(derive_seed(base_seed, 2 * i)))
        world = MachineWorld(machine, world_id=f"c{c}#{i}")
        agent = agent_factory(world.action_alphabet_size, world.obs_alphabet_size)
        total += discounted_value(agent, world, discount, derive_seed(base_seed, 2 * i + 1))
    return total / samples


def naive_universal_terms(agent_factory: AgentFactory, c_range: Sequence[int],
                          samples_per_c: int, master_seed: int,
                          discount: DiscountParams = DiscountParams(),
                          gen_params: MachineGenParams = MachineGenParams()) -> ComplexityTermSeries:
    """Per-complexity terms count(c) * 2^-c * mean value, in log2 space.

    For any agent whose sampled mean value stays bounded away from zero
    the terms grow without bound, which is the divergence of the naive
    universal sum made visible.
    """
    rows = []
    for c in c_range:
        mean = _sample_mean_value(agent_factory, c, samples_per_c,
                                  derive_seed(master_seed, c), discount, gen_params)
        log2_count = log2_machine_count(c)
        log2_term = log2_count - c + math.log2(mean) if mean > 0 else -math.inf
        rows.append(ComplexityTermRow(c=c, log2_count=log2_count, mean_value=mean,
                                      log2_term=log2_term))
    return ComplexityTermSeries(rows=tuple(rows), samples_per_c=samples_per_c,
                                discount=discount)


@dataclass(frozen=True)
class CorrectedUniversalIq:
    value: float                 # normalized weighted mean, in [0, 1]
    expected_complexity: float   # mean complexity under the 2^-c weights
    unnormalized_sum: float      # the raw weighted sum, for comparison
    per_c_means: tuple[tuple[int, float], ...]


def expected_complexity_partial(c_max: int) -> Fraction:
    """Exact E[c] under weights 2^-c, c = 1..c_max (normalized)."""
    num = sum(Fraction(c, 2 ** c) for c in range(1, c_max + 1))
    den = sum(Fraction(1, 2 ** c) for c in range(1, c_max + 1))
    return num / den


def expected_complexity_limit() -> Fraction:
    """Closed form of sum c * x^c at x = 1/2: x / (1 - x)^2 = 2 exactly
    (the weights already sum to 1 in the limit)."""
    x = Fraction(1, 2)
    return x / (1 - x) ** 2


def corrected_universal_iq(agent_factory: AgentFactory, c_max: int, samples_per_c: int,
                           master_seed: int,
                           discount: DiscountParams = DiscountParams(),
                           gen_params: MachineGenParams = MachineGenParams()) -> CorrectedUniversalIq:
    """Average per complexity first, then weight by 2^-c.

    The weights form a (normalized) probability distribution whose mean
    complexity is 2; the measure is finite and bounded by 1 for every
    agent, unlike the naive sum.
    """
    if c_max < 1:
        raise ValueError("c_max must be >= 1")
    weighted = 0.0
    weight_total = 0.0
    per_c = []
    for c in range(1, c_max + 1):
        mean = _sample_mean_value(agent_factory, c, samples_per_c,
                                  derive_seed(master_seed, c), discount, gen_params)
        weight = 2.0 ** -c
        weighted += weight * mean
        weight_total += weight
        per_c.append((c, mean))
    return CorrectedUniversalIq(value=weighted / weight_total,
                                expected_complexity=float(expected_complexity_partial(c_max)),
                                unnormalized_sum=weighted,
                                per_c_means=tuple(per_c))


class MonotoneWorld:
    """Bounded-sum scoring: success only ever accumulates.

    Wins add min(remaining budget, budget/games); losses and draws add
    nothing, so cumulative success is non-decreasing and every win past
    the budget is worth zero (the professor has run out of top grades).
    Observations pass through unchanged.
    """

    def __init__(self, inner: WorldInterface, games: int, total_reward_budget=1):
        budget = Fraction(total_reward_budget)
        if not (0 < budget <= 1):
            raise ValueError("total_reward_budget must lie in (0, 1]")
        if games < 1:
            raise ValueError("games must be >= 1")
        self.inner = inner
        self.world_id = f"monotone:{getattr(inner, 'world_id', 'world')}"
        self.action_alphabet_size = inner.action_alphabet_size
        self.obs_alphabet_size = inner.obs_alphabet_size
        self.budget = budget
        self.increment = budget / games
        self.cumulative = Fraction(0)
        self.success_trace: list[Fraction] = []

    def begin_life(self, stream: Stream) -> None:
        self.inner.begin_life(stream)
        self.cumulative = Fraction(0)
        self.success_trace = []

    def step(self, action: int) -> Observation:
        obs = self.inner.step(action)
        if obs.signal is Signal.WIN:
            remaining = self.budget - self.cumulative
            self.cumulative += min(remaining, self.increment)
        self.success_trace.append(self.cumulative)
        return obs


def monotone_wrapper(world: WorldInterface, games: int, total_reward_budget=1) -> MonotoneWorld:
    return MonotoneWorld(world, games, total_reward_budget)


@dataclass(frozen=True)
class SeparationRow:
    agent: str
    measure: str
    value: float
    params: str


@dataclass(frozen=True)
class SeparationReport:
    rows: tuple[SeparationRow, ...]
    spreads: tuple[tuple[str, float], ...]  # per measure: max - min across agents


def separation_report(agent_specs: Sequence[str], suite: Suite, config: LifeConfig,
                      master_seed: int,
                      discount: DiscountParams = DiscountParams()) -> SeparationReport:
    """Side-by-side (agent x measure) table for the package IQ, the
    discounted value, and the monotone bounded-sum success."""
    from .agents import make_agent_factory
    from .world import run_life

    if len(agent_specs) < 2:
        raise ValueError("separation needs at least two agents")
    rows: list[SeparationRow] = []
    by_measure: dict[str, list[float]] = {}
    for spec in agent_specs:
        factory = make_agent_factory(spec)
        iq = estimate_iq(factory, suite, config, master_seed, agent_label=spec)
        discounted_total = 0.0
        monotone_total = Fraction(0)
        for entry in suite.entries:
            life_seed = derive_seed(master_seed, entry.seed_key)
            world = MachineWorld(entry.machine, world_id=entry.world_id)
            agent = factory(world.action_alphabet_size, world.obs_alphabet_size)
            discounted_total += discounted_value(agent, world, discount, life_seed)
            wrapped = MonotoneWorld(MachineWorld(entry.machine, world_id=entry.world_id),
                                    games=config.games)
            agent2 = factory(wrapped.action_alphabet_size, wrapped.obs_alphabet_size)
            run_life(wrapped, agent2, config, life_seed, record_steps=False)
            monotone_total += wrapped.cumulative
        n = len(suite.entries)
        values = {
            "bench_iq": float(iq.estimate),
            "discounted": discounted_total / n,
            "monotone": float(monotone_total / n),
        }
        params_desc = (f"games={config.games};max_steps={config.max_steps_per_game};"
                       f"gamma={discount.gamma};horizon={discount.horizon}")
        for measure, value in values.items():
            rows.append(SeparationRow(agent=spec, measure=measure, value=value,
                                      params=params_desc))
            by_measure.setdefault(measure, []).append(value)
    spreads = tuple((m, max(v) - min(v)) for m, v in by_measure.items())
    return SeparationReport(rows=tuple(rows), spreads=spreads)


def write_terms_csv(series: ComplexityTermSeries, path) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(f"# {TERMS_FORMAT}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["c", "log2_count", "mean_value", "log2_term",
                         "samples_per_c", "gamma", "horizon"])
        for row in series.rows:
            writer.writerow([row.c, repr(row.log2_count), repr(row.mean_value),
                             repr(row.log2_term), series.samples_per_c,
                             repr(series.discount.gamma), series.discount.horizon])


def write_corrected_csv(result: CorrectedUniversalIq, c_max: int, samples_per_c: int,
                        discount: DiscountParams, path) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(f"# {CORRECTED_FORMAT}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["value", "expected_complexity", "unnormalized_sum",
                         "c_max", "samples_per_c", "gamma", "horizon"])
        writer.writerow([repr(result.value), repr(result.expected_complexity),
                         repr(result.unnormalized_sum), c_max, samples_per_c,
                         repr(discount.gamma), discount.horizon])


def write_separation_csv(report: SeparationReport, path) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(f"# {SEPARATION_FORMAT}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["agent", "measure", "value", "params"])
        for row in report.rows:
            writer.writerow([row.agent, row.measure, repr(row.value), row.params])
        for measure, spread in report.spreads:
            writer.writerow(["__spread__", measure, repr(spread), ""])
