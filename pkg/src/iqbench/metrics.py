"""IQ estimation, the qualification threshold, and the parameter-free
limit construction.

IQ is the mean per-life Success over a suite of test worlds: one life per
world, a fresh agent per life, the life seed derived from the evaluation
master seed and the world's seed key.  The limit construction grows world
complexity and lifespan along a schedule and reports a finite tail-window
surrogate for the lower/upper limits of the running mean.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

from .agents import AgentFactory, DeadAgent
from .ndtm import MachineGenParams, MachineWorld, Suite, generate_machine
from .rng import Stream, derive_seed
from .world import LifeConfig, WorldInterface, reward_of, run_life, success
from .worlds import OscillatingWorld

IQ_THRESHOLD_DEFAULT = 0.7

IQREPORT_FORMAT = "iqreport/1"
PERWORLD_FORMAT = "perworld/1"
SERIES_FORMAT = "series/1"
LIMITS_FORMAT = "limits/1"
COMPARE_FORMAT = "compare/1"


class EmptySuite(ValueError):
    pass


class SeriesTooShort(ValueError):
    pass


@dataclass(frozen=True)
class ReportParams:
    """The parameter triple (plus bookkeeping) an estimate was computed
    under: world complexity, lifespan, and the small-step budget."""

    n_states: Optional[int]
    games: int
    max_steps_per_game: int
    small_step_budget: Optional[int]
    suite_size: int
    master_seed: int
    agent: str = ""


@dataclass(frozen=True)
class IqReport:
    estimate: Fraction
    per_world: tuple[tuple[str, Fraction], ...]
    stderr: float
    ci95: tuple[float, float]
    params: ReportParams

    def __post_init__(self):
        if not (0 <= self.estimate <= 1):
            raise ValueError("estimate must lie in [0, 1]")


WorldFactory = Callable[[], WorldInterface]


def _report_from_successes(successes: Sequence[tuple[str, Fraction]],
                           params: ReportParams) -> IqReport:
    values = [s for _, s in successes]
    estimate = sum(values, Fraction(0)) / len(values)
    if len(values) > 1:
        mean_f = float(estimate)
        var = sum((float(v) - mean_f) ** 2 for v in values) / (len(values) - 1)
        stderr = math.sqrt(var / len(values))
    else:
        stderr = 0.0
    ci = (max(0.0, float(estimate) - 1.96 * stderr),
          min(1.0, float(estimate) + 1.96 * stderr))
    return IqReport(estimate=estimate, per_world=tuple(successes), stderr=stderr,
                    ci95=ci, params=params)


def evaluate_worlds(agent_factory: AgentFactory, world_factories: Sequence[WorldFactory],
                    config: LifeConfig, master_seed: int, *,
                    seed_keys: Optional[Sequence[int]] = None,
                    world_ids: Optional[Sequence[str]] = None,
                    params: Optional[ReportParams] = None) -> IqReport:
    """One life per world; life i is seeded from (master_seed, seed key i)."""
    if not world_factories:
        raise EmptySuite("no worlds to evaluate")
    if seed_keys is None:
        seed_keys = range(len(world_factories))
    successes: list[tuple[str, Fraction]] = []
    for i, factory in enumerate(world_factories):
        world = factory()
        agent = agent_factory(world.action_alphabet_size, world.obs_alphabet_size)
        life_seed = derive_seed(master_seed, seed_keys[i])
        life = run_life(world, agent, config, life_seed, record_steps=False)
        world_id = world_ids[i] if world_ids else getattr(world, "world_id", str(i))
        successes.append((world_id, success(life)))
    if params is None:
        params = ReportParams(n_states=None, games=config.games,
                              max_steps_per_game=config.max_steps_per_game,
                              small_step_budget=None, suite_size=len(world_factories),
                              master_seed=master_seed)
    return _report_from_successes(successes, params)


def estimate_iq(agent_factory: AgentFactory, suite: Suite, config: LifeConfig,
                master_seed: int, agent_label: str = "") -> IqReport:
    if not suite.entries:
        raise EmptySuite("suite has no machines")
    factories = [
        (lambda e=e: MachineWorld(e.machine, world_id=e.world_id)) for e in suite.entries]
    params = ReportParams(n_states=suite.n_states, games=config.games,
                          max_steps_per_game=config.max_steps_per_game,
                          small_step_budget=suite.small_step_budget,
                          suite_size=len(suite.entries), master_seed=master_seed,
                          agent=agent_label)
    return evaluate_worlds(agent_factory, factories, config, master_seed,
                           seed_keys=[e.seed_key for e in suite.entries],
                           world_ids=[e.world_id for e in suite.entries], params=params)


def qualifies_as_ai(report: Union[IqReport, float, Fraction],
                    threshold: float = IQ_THRESHOLD_DEFAULT) -> bool:
    """Strictly greater than the threshold; the threshold itself fails.

    Float thresholds are read as their decimal literal (0.7 means 7/10
    exactly), so an exact estimate of 7/10 does not qualify.
    """
    estimate = report.estimate if isinstance(report, IqReport) else report
    exact_threshold = Fraction(str(threshold)) if isinstance(threshold, float) \
        else Fraction(threshold)
    return Fraction(estimate) > exact_threshold


@dataclass(frozen=True)
class ConvergenceSeries:
    """Per-life successes and running means along a growth schedule."""

    schedule: tuple[tuple[int, LifeConfig], ...]
    successes: tuple[Fraction, ...]
    running_means: tuple[Fraction, ...]

    def __post_init__(self):
        if not (len(self.schedule) == len(self.successes) == len(self.running_means)):
            raise ValueError("schedule, successes and running means must align")


def _running_means(values: Sequence[Fraction]) -> tuple[Fraction, ...]:
    means, total = [], Fraction(0)
    for i, v in enumerate(values, start=1):
        total += v
        means.append(total / i)
    return tuple(means)


def limit_iq_series(agent_factory: AgentFactory,
                    schedule: Sequence[tuple[int, LifeConfig]],
                    master_seed: int, *,
                    gen_params: MachineGenParams = MachineGenParams(),
                    action_alphabet_size: int = 3, obs_alphabet_size: int = 4,
                    tape_alphabet_size: int = 4,
                    small_step_budget: int = 100) -> ConvergenceSeries:
    """One freshly sampled world and one life per schedule entry.

    Entry k samples a machine of the scheduled size and runs one life at
    the scheduled lifespan; the intended use is a schedule growing in both
    coordinates, so the running mean approximates the limit IQ.
    """
    successes: list[Fraction] = []
    for k, (n_states, config) in enumerate(schedule):
        base = derive_seed(master_seed, k)
        machine = generate_machine(gen_params, n_states, Stream(derive_seed(base, 0)),
                                   action_alphabet_size=action_alphabet_size,
                                   obs_alphabet_size=obs_alphabet_size,
                                   tape_alphabet_size=tape_alphabet_size,
                                   small_step_budget=small_step_budget)
        world = MachineWorld(machine, world_id=f"limit{k}")
        agent = agent_factory(world.action_alphabet_size, world.obs_alphabet_size)
        life = run_life(world, agent, config, derive_seed(base, 1), record_steps=False)
        successes.append(success(life))
    return ConvergenceSeries(schedule=tuple(schedule), successes=tuple(successes),
                             running_means=_running_means(successes))


def liminf_limsup_new_iq(series: Union[ConvergenceSeries, Sequence[Fraction]],
                         tail_fraction: float = 0.5) -> tuple[Fraction, Fraction, Fraction]:
    """Finite-sample surrogate for the lower/upper limits of the running
    mean: min/max over the trailing window, and their midpoint as the
    parameter-free IQ."""
    means = getattr(series, "running_means", series)
    if len(means) < 4:
        raise SeriesTooShort(f"need at least 4 points, got {len(means)}")
    if not (0 < tail_fraction <= 1):
        raise ValueError("tail_fraction must lie in (0, 1]")
    start = min(len(means) - 1, int(math.floor(len(means) * (1 - tail_fraction))))
    window = [Fraction(m) for m in means[start:]]
    lower, upper = min(window), max(window)
    return lower, upper, (lower + upper) / 2


def oscillation_series(depth: int, seed: int = 0) -> ConvergenceSeries:
    """Running means of the dyadic oscillating world at block ends.

    Running mean i is the game-weighted mean success after blocks 0..i
    (2**(i+1) - 1 games), per the dyadic construction; the checkpoints
    alternate toward 2/3 and 1/3.  The success entries hold each block's
    own mean reward (1 for even blocks, 0 for odd ones).
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    total_games = (1 << (depth + 1)) - 1
    config = LifeConfig(games=total_games, max_steps_per_game=1)
    life = run_life(OscillatingWorld(), DeadAgent(0), config, seed, record_steps=False)
    rewards = [reward_of(g) for g in life.games]
    schedule, successes, means = [], [], []
    total = Fraction(0)
    block_total, block_games = Fraction(0), 0
    for g, reward in enumerate(rewards, start=1):
        total += reward
        block_total += reward
        block_games += 1
        if (g + 1) & g == 0:  # g == 2**(i+1) - 1, a block end
            schedule.append((1, LifeConfig(games=g, max_steps_per_game=1)))
            successes.append(block_total / block_games)
            means.append(total / g)
            block_total, block_games = Fraction(0), 0
    return ConvergenceSeries(schedule=tuple(schedule), successes=tuple(successes),
                             running_means=tuple(means))


@dataclass(frozen=True)
class PairedComparison:
    mean_a: Fraction
    mean_b: Fraction
    mean_diff: Fraction
    stderr_diff: float
    z: float


def paired_compare(factory_a: AgentFactory, factory_b: AgentFactory,
                   world_factories: Sequence[WorldFactory], config: LifeConfig,
                   master_seed: int,
                   seed_keys: Optional[Sequence[int]] = None) -> PairedComparison:
    """Per-world paired differences under shared life seeds."""
    report_a = evaluate_worlds(factory_a, world_factories, config, master_seed,
                               seed_keys=seed_keys)
    report_b = evaluate_worlds(factory_b, world_factories, config, master_seed,
                               seed_keys=seed_keys)
    diffs = [float(a - b) for (_, a), (_, b) in zip(report_a.per_world, report_b.per_world)]
    n = len(diffs)
    mean_diff = report_a.estimate - report_b.estimate
    if n > 1:
        mean_f = float(mean_diff)
        var = sum((d - mean_f) ** 2 for d in diffs) / (n - 1)
        stderr = math.sqrt(var / n)
    else:
        stderr = 0.0
    if stderr > 0:
        z = float(mean_diff) / stderr
    else:
        z = math.inf if mean_diff > 0 else (-math.inf if mean_diff < 0 else 0.0)
    return PairedComparison(mean_a=report_a.estimate, mean_b=report_b.estimate,
                            mean_diff=mean_diff, stderr_diff=stderr, z=z)


# ---------------------------------------------------------------------------
# Delimited output.  Every report file starts with a `# <name>/1` version
# line; floats are written with repr so files are byte-stable.


def _open_report(path):
    return open(path, "w", encoding="ascii", newline="")


def write_iq_report_csv(report: IqReport, path, threshold: float = IQ_THRESHOLD_DEFAULT) -> None:
    p = report.params
    with _open_report(path) as fh:
        fh.write(f"# {IQREPORT_FORMAT}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["agent", "estimate", "estimate_exact", "stderr", "ci_low", "ci_high",
                         "qualifies", "threshold", "n_states", "games", "max_steps_per_game",
                         "small_step_budget", "suite_size", "master_seed"])
        writer.writerow([
            p.agent, repr(float(report.estimate)), str(report.estimate),
            repr(report.stderr), repr(report.ci95[0]), repr(report.ci95[1]),
            str(qualifies_as_ai(report, threshold)).lower(), repr(threshold),
            p.n_states if p.n_states is not None else "",
            p.games, p.max_steps_per_game,
            p.small_step_budget if p.small_step_budget is not None else "",
            p.suite_size, p.master_seed])


def write_per_world_csv(report: IqReport, path) -> None:
    with _open_report(path) as fh:
        fh.write(f"# {PERWORLD_FORMAT}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["world_id", "success", "success_exact"])
        for world_id, value in report.per_world:
            writer.writerow([world_id, repr(float(value)), str(value)])


def write_series_csv(series: ConvergenceSeries, path) -> None:
    with _open_report(path) as fh:
        fh.write(f"# {SERIES_FORMAT}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["index", "n_states", "games", "max_steps_per_game",
                         "success", "running_mean"])
        for i, ((n_states, config), succ, mean) in enumerate(
                zip(series.schedule, series.successes, series.running_means)):
            writer.writerow([i, n_states, config.games, config.max_steps_per_game,
                             repr(float(succ)), repr(float(mean))])


def write_limits_csv(lower: Fraction, upper: Fraction, new_iq: Fraction,
                     tail_fraction: float, path) -> None:
    with _open_report(path) as fh:
        fh.write(f"# {LIMITS_FORMAT}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["lower", "upper", "new_iq", "tail_fraction"])
        writer.writerow([repr(float(lower)), repr(float(upper)),
                         repr(float(new_iq)), repr(tail_fraction)])


def write_compare_csv(reports: Sequence[IqReport], path,
                      threshold: float = IQ_THRESHOLD_DEFAULT) -> None:
    with _open_report(path) as fh:
        fh.write(f"# {COMPARE_FORMAT}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["agent", "estimate", "estimate_exact", "stderr",
                         "ci_low", "ci_high", "qualifies"])
        for report in reports:
            writer.writerow([report.params.agent, repr(float(report.estimate)),
                             str(report.estimate), repr(report.stderr),
                             repr(report.ci95[0]), repr(report.ci95[1]),
                             str(qualifies_as_ai(report, threshold)).lower()])
