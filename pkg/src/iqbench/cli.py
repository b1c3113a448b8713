"""Command-line harness: suite generation, evaluation, comparisons,
limit-IQ studies, rival-measure reports, fatal audits, the oscillation
demo, and the session server.

Exit codes: 0 success, 1 usage error, 2 runtime failure.  Randomized
subcommands refuse to run without an explicit master seed, and identical
(config, seed) inputs produce byte-identical suites, life logs and CSVs.
The IQBENCH_THREADS environment variable caps the worker pool used for
per-life parallelism; the output bytes never depend on it.
"""
from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from . import altmeasures, fatal, figures, metrics
from .agents import make_agent_factory
from .config import ConfigError, RunConfig, parse_config
from .metrics import ReportParams
from .ndtm import MachineWorld, Suite, generate_suite, read_suite_file, write_suite_file
from .rng import derive_seed
from .world import LifeConfig, run_life, success, write_liferecord
from .worlds import (ExplicitWorldSim, instruction_recall_world, parse_family_spec,
                     trap_world, win_on_action_world)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D401 - argparse hook
        raise UsageError(message)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--seed", type=int, dest="master_seed", help="master seed")
    parser.add_argument("--out", dest="out_dir", help="output directory")
    parser.add_argument("--suite", help="suite file path")
    parser.add_argument("--n-states", type=int, dest="n_states")
    parser.add_argument("--count", type=int)
    parser.add_argument("--games", type=int)
    parser.add_argument("--max-steps", type=int, dest="max_steps_per_game")
    parser.add_argument("--small-step-budget", type=int, dest="small_step_budget")
    parser.add_argument("--threshold", type=float)
    parser.add_argument("--figures", dest="figures", action="store_true", default=None)
    parser.add_argument("--no-figures", dest="figures", action="store_false", default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog="iqbench", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="subcommand")

    p = sub.add_parser("gen-suite", help="generate a test-world suite file")
    _add_common(p)

    p = sub.add_parser("eval", help="estimate one agent's IQ over a suite")
    _add_common(p)
    p.add_argument("--agent", default="random", help="agent spec, e.g. random, dead:0, freq:k=2")
    p.add_argument("--logs", action="store_true", default=None, help="write liferec/1 logs")

    p = sub.add_parser("compare", help="several agents, one suite, one report")
    _add_common(p)
    p.add_argument("--agents", help="comma-separated agent specs")

    p = sub.add_parser("limit-iq", help="growing-lifespan, growing-complexity series")
    _add_common(p)
    p.add_argument("--agent", default="random")
    p.add_argument("--schedule", help="entries n_states:games:max_steps, comma-separated")
    p.add_argument("--tail-fraction", type=float, dest="tail_fraction")

    p = sub.add_parser("alt-measures", help="rival discounted measures report")
    _add_common(p)
    p.add_argument("--agents", help="comma-separated agent specs")
    p.add_argument("--gamma", type=float)
    p.add_argument("--horizon", type=int)
    p.add_argument("--c-max", type=int, dest="c_max")
    p.add_argument("--samples-per-c", type=int, dest="samples_per_c")

    p = sub.add_parser("fatal-audit", help="fatal groups and value-drop audit of a life")
    _add_common(p)
    p.add_argument("--world", help="trap | recall | controllable | bandit:O,A#i | family.json#i")
    p.add_argument("--agent", default="random")

    p = sub.add_parser("oscillation-demo", help="dyadic world checkpoint means and limits")
    _add_common(p)
    p.add_argument("--depth", type=int)
    p.add_argument("--tail-fraction", type=float, dest="tail_fraction")

    p = sub.add_parser("serve", help="run the human session service")
    _add_common(p)
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--reveal", action="store_true", default=None)
    p.add_argument("--ui", help="browser client directory to serve at / (e.g. frontend/)")

    return parser


_CONFIG_KEYS = ("master_seed", "out_dir", "suite", "n_states", "count", "games",
                "max_steps_per_game", "small_step_budget", "threshold", "figures",
                "schedule", "tail_fraction", "depth", "gamma", "horizon", "c_max",
                "samples_per_c", "host", "port", "reveal", "world", "logs")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {}
    for key in _CONFIG_KEYS:
        if hasattr(args, key) and getattr(args, key) is not None:
            overrides[key] = getattr(args, key)
    if getattr(args, "agents", None):
        overrides["agents"] = tuple(s.strip() for s in args.agents.split(",") if s.strip())
    elif getattr(args, "agent", None):
        overrides["agents"] = (args.agent,)
    return parse_config(args.config, overrides)


def _load_or_generate_suite(config: RunConfig) -> Suite:
    if config.suite and Path(config.suite).exists():
        return read_suite_file(config.suite)
    return generate_suite(config.gen_params(), config.n_states, config.count,
                          config.require_seed(),
                          action_alphabet_size=config.action_alphabet_size,
                          obs_alphabet_size=config.obs_alphabet_size,
                          tape_alphabet_size=config.tape_alphabet_size,
                          small_step_budget=config.small_step_budget)


def _out_dir(config: RunConfig) -> Path:
    path = Path(config.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("IQBENCH_THREADS", "1")))
    except ValueError:
        return 1


def _life_worker(payload):
    machine, world_id, spec, games, max_steps, life_seed = payload
    factory = make_agent_factory(spec)
    world = MachineWorld(machine, world_id=world_id)
    agent = factory(world.action_alphabet_size, world.obs_alphabet_size)
    config = LifeConfig(games=games, max_steps_per_game=max_steps)
    life = run_life(world, agent, config, life_seed, record_steps=False)
    return world_id, success(life)


def _estimate(suite: Suite, spec: str, config: RunConfig) -> metrics.IqReport:
    """Same numbers as metrics.estimate_iq; per-life work optionally spread
    over IQBENCH_THREADS processes with an order-preserving reduce."""
    master_seed = config.require_seed()
    life_config = config.life_config()
    workers = _workers()
    if workers == 1:
        return metrics.estimate_iq(make_agent_factory(spec), suite, life_config,
                                   master_seed, agent_label=spec)
    payloads = [(e.machine, e.world_id, spec, life_config.games,
                 life_config.max_steps_per_game, derive_seed(master_seed, e.seed_key))
                for e in suite.entries]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        successes = list(pool.map(_life_worker, payloads, chunksize=8))
    params = ReportParams(n_states=suite.n_states, games=life_config.games,
                          max_steps_per_game=life_config.max_steps_per_game,
                          small_step_budget=suite.small_step_budget,
                          suite_size=len(suite.entries), master_seed=master_seed,
                          agent=spec)
    return metrics._report_from_successes(successes, params)


def _write_life_logs(suite: Suite, spec: str, config: RunConfig, out: Path) -> None:
    lives_dir = out / "lives"
    lives_dir.mkdir(exist_ok=True)
    factory = make_agent_factory(spec)
    for entry in suite.entries:
        world = MachineWorld(entry.machine, world_id=entry.world_id)
        agent = factory(world.action_alphabet_size, world.obs_alphabet_size)
        life = run_life(world, agent, config.life_config(),
                        derive_seed(config.require_seed(), entry.seed_key))
        with open(lives_dir / f"{entry.world_id}.liferec", "w", encoding="ascii",
                  newline="\n") as fh:
            write_liferecord(life, fh)


def cmd_gen_suite(config: RunConfig) -> int:
    suite = generate_suite(config.gen_params(), config.n_states, config.count,
                           config.require_seed(),
                           action_alphabet_size=config.action_alphabet_size,
                           obs_alphabet_size=config.obs_alphabet_size,
                           tape_alphabet_size=config.tape_alphabet_size,
                           small_step_budget=config.small_step_budget)
    path = Path(config.suite or (_out_dir(config) / "suite.txt"))
    path.parent.mkdir(parents=True, exist_ok=True)
    write_suite_file(suite, path)
    print(f"wrote {len(suite)} machines of size {suite.n_states} to {path}")
    return 0


def cmd_eval(config: RunConfig) -> int:
    suite = _load_or_generate_suite(config)
    spec = config.agents[0] if config.agents else "random"
    report = _estimate(suite, spec, config)
    out = _out_dir(config)
    metrics.write_iq_report_csv(report, out / "report.csv", config.threshold)
    metrics.write_per_world_csv(report, out / "per_world.csv")
    if config.logs:
        _write_life_logs(suite, spec, config, out)
    if config.figures:
        figures.render_eval_figure(report, out / "report.png", config.threshold)
    qualified = metrics.qualifies_as_ai(report, config.threshold)
    print(f"agent={spec} IQ={float(report.estimate):.4f} ({report.estimate}) "
          f"stderr={report.stderr:.4f} ci95=[{report.ci95[0]:.4f}, {report.ci95[1]:.4f}] "
          f"qualifies={'yes' if qualified else 'no'} (threshold {config.threshold})")
    print(f"params: n_states={report.params.n_states} games={report.params.games} "
          f"max_steps_per_game={report.params.max_steps_per_game} "
          f"small_step_budget={report.params.small_step_budget} "
          f"suite_size={report.params.suite_size} master_seed={report.params.master_seed}")
    return 0


def cmd_compare(config: RunConfig) -> int:
    if len(config.agents) < 2:
        raise UsageError("compare needs --agents with at least two specs")
    suite = _load_or_generate_suite(config)
    reports = [_estimate(suite, spec, config) for spec in config.agents]
    out = _out_dir(config)
    metrics.write_compare_csv(reports, out / "compare.csv", config.threshold)
    if config.figures:
        figures.render_compare_figure(reports, out / "compare.png", config.threshold)
    for report in reports:
        print(f"{report.params.agent:>24}  IQ={float(report.estimate):.4f} "
              f"ci95=[{report.ci95[0]:.4f}, {report.ci95[1]:.4f}]")
    return 0


def _parse_schedule(text: Optional[str]) -> list[tuple[int, LifeConfig]]:
    if not text:
        # a modest default ramp: complexity and lifespan grow together
        return [(2 + k // 4, LifeConfig(games=5 + 2 * k, max_steps_per_game=20 + 5 * k))
                for k in range(24)]
    schedule = []
    for part in text.split(","):
        pieces = part.strip().split(":")
        if len(pieces) != 3:
            raise UsageError(f"bad schedule entry {part!r} (want n_states:games:max_steps)")
        n_states, games, max_steps = (int(x) for x in pieces)
        schedule.append((n_states, LifeConfig(games=games, max_steps_per_game=max_steps)))
    return schedule


def cmd_limit_iq(config: RunConfig) -> int:
    spec = config.agents[0] if config.agents else "random"
    schedule = _parse_schedule(config.schedule)
    series = metrics.limit_iq_series(make_agent_factory(spec), schedule,
                                     config.require_seed(), gen_params=config.gen_params(),
                                     action_alphabet_size=config.action_alphabet_size,
                                     obs_alphabet_size=config.obs_alphabet_size,
                                     tape_alphabet_size=config.tape_alphabet_size,
                                     small_step_budget=config.small_step_budget)
    limits = metrics.liminf_limsup_new_iq(series, config.tail_fraction)
    out = _out_dir(config)
    metrics.write_series_csv(series, out / "series.csv")
    metrics.write_limits_csv(*limits, config.tail_fraction, out / "limits.csv")
    if config.figures:
        figures.render_series_figure(series, limits, out / "series.png",
                                     title=f"{spec}: limit IQ series")
    lower, upper, new_iq = (float(x) for x in limits)
    print(f"agent={spec} lives={len(schedule)} lower={lower:.4f} upper={upper:.4f} "
          f"new_iq={new_iq:.4f} (tail fraction {config.tail_fraction})")
    return 0


def cmd_alt_measures(config: RunConfig) -> int:
    agents = config.agents or ("random", "dead:0")
    if len(agents) < 2:
        raise UsageError("alt-measures needs at least two agent specs")
    discount = altmeasures.DiscountParams(gamma=config.gamma, horizon=config.horizon)
    seed = config.require_seed()
    out = _out_dir(config)

    terms = altmeasures.naive_universal_terms(
        make_agent_factory(agents[0]), range(1, config.c_max + 1), config.samples_per_c,
        seed, discount=discount, gen_params=config.gen_params())
    altmeasures.write_terms_csv(terms, out / "terms.csv")

    corrected = altmeasures.corrected_universal_iq(
        make_agent_factory(agents[0]), config.c_max, config.samples_per_c, seed,
        discount=discount, gen_params=config.gen_params())
    altmeasures.write_corrected_csv(corrected, config.c_max, config.samples_per_c,
                                    discount, out / "corrected.csv")

    suite = _load_or_generate_suite(config)
    separation = altmeasures.separation_report(agents, suite, config.life_config(),
                                               seed, discount=discount)
    altmeasures.write_separation_csv(separation, out / "separation.csv")

    if config.figures:
        figures.render_terms_figure(terms, out / "terms.png")
        figures.render_separation_figure(separation, out / "separation.png")

    print(f"naive log2 terms (c=1..{config.c_max}): "
          + ", ".join(f"{row.log2_term:.1f}" for row in terms.rows))
    print(f"corrected value={corrected.value:.4f} "
          f"expected_complexity={corrected.expected_complexity:.8f}")
    for measure, spread in separation.spreads:
        print(f"spread[{measure}] = {spread:.4f}")
    return 0


def _resolve_explicit_world(spec: str):
    if "#" in spec:
        family_part, _, index = spec.rpartition("#")
        return parse_family_spec(family_part).worlds[int(index)]
    if spec == "trap":
        return trap_world()
    if spec == "recall":
        return instruction_recall_world()
    if spec == "controllable":
        return win_on_action_world(winning_action=1, action_alphabet_size=2)
    raise UsageError(f"unknown world spec {spec!r}")


def cmd_fatal_audit(config: RunConfig) -> int:
    world_spec = _resolve_explicit_world(config.world)
    life_config = config.life_config()
    seed = config.require_seed()
    groups = fatal.find_fatal_groups(world_spec, life_config)
    spec = config.agents[0] if config.agents else "random"
    sim = ExplicitWorldSim(world_spec)
    agent = make_agent_factory(spec)(sim.action_alphabet_size, sim.obs_alphabet_size)
    life = run_life(sim, agent, life_config, seed)
    findings = fatal.audit_life(world_spec, life, life_config)
    out = _out_dir(config)
    fatal.write_audit_csv(findings, out / "audit.csv")
    if config.figures:
        trajectory = fatal.anticipated_trajectory(world_spec, life, life_config)
        figures.render_audit_figure(trajectory, findings, out / "audit.png")
    print(f"world={world_spec.name} fatal_groups={[sorted(g.states) for g in groups]}")
    print(f"agent={spec} life success={float(success(life)):.4f} "
          f"fatal_steps={[f.step for f in findings]}")
    return 0


def cmd_oscillation_demo(config: RunConfig) -> int:
    series = metrics.oscillation_series(config.depth, seed=config.master_seed or 0)
    limits = metrics.liminf_limsup_new_iq(series, config.tail_fraction)
    out = _out_dir(config)
    metrics.write_series_csv(series, out / "oscillation.csv")
    metrics.write_limits_csv(*limits, config.tail_fraction, out / "oscillation_limits.csv")
    if config.figures:
        figures.render_series_figure(series, limits, out / "oscillation.png",
                                     title="dyadic oscillating world")
    lower, upper, new_iq = (float(x) for x in limits)
    print(f"depth={config.depth} checkpoints={len(series.running_means)} "
          f"liminf~{lower:.4f} limsup~{upper:.4f} new_iq={new_iq:.4f}")
    return 0


def cmd_serve(config: RunConfig, ui_dir: Optional[str] = None) -> int:
    import uvicorn

    from .service import SessionManager
    from .webapi import create_app

    manager = SessionManager(reveal=config.reveal,
                             journal_dir=Path(config.out_dir) / "sessions")
    app = create_app(manager, ui_dir=ui_dir)
    print(f"session service on http://{config.host}:{config.port} "
          f"(reveal={'on' if config.reveal else 'off'}"
          + (f", ui={ui_dir}" if ui_dir else "") + ")")
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return 0


_COMMANDS = {
    "gen-suite": cmd_gen_suite,
    "eval": cmd_eval,
    "compare": cmd_compare,
    "limit-iq": cmd_limit_iq,
    "alt-measures": cmd_alt_measures,
    "fatal-audit": cmd_fatal_audit,
    "oscillation-demo": cmd_oscillation_demo,
    "serve": cmd_serve,
}


def dispatch(argv: Sequence[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 1
        config = _config_from_args(args)
        if args.command == "serve":
            return cmd_serve(config, ui_dir=args.ui)
        return _COMMANDS[args.command](config)
    except (UsageError, ConfigError) as exc:
        print(f"iqbench: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - tool boundary
        print(f"iqbench: failed: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
