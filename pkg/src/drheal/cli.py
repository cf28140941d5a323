"""Command-line interface.

Subcommands:

  train      train an agent on an original environment; writes the agent
             checkpoint, its pre-deployment activation traces, and (DQN)
             the replay buffer
  drift      sample drift specs into a JSON file
  evaluate   greedy evaluation of a checkpointed agent
  heal       run one healing method against one drift
  compare    full train/drift/heal matrix; writes runs/summary/quadrants
             CSVs and prints the comparison tables
  report     re-render tables from a summary (+ optional quadrants) CSV

Run ``drheal <subcommand> --help`` for flags and
``python -m drheal.config`` for the config-file schema.
"""

import argparse
import sys
from pathlib import Path

from . import config as config_mod
from .agents import load_agent, load_replay, save_agent, save_replay, train_dqn, train_ppo
from .envs import evaluate, is_solved, load_drifts, sample_drifts, save_drifts
from .harness import (
    ExperimentPlan,
    read_quadrants_csv,
    read_summary_csv,
    render_tables,
    report_to_csv_row,
    run_experiment,
)
from .harness.reporting import RUNS_COLUMNS, RUNS_FORMAT, write_curve_csv
from .healing import METHOD_DRDRL, METHOD_VANILLA_CL, heal_drdrl, heal_vanilla_cl
from .tracing import collect_observations, load_agent_traces, save_agent_traces, trace_agent_networks

METHOD_ALIASES = {"drdrl": METHOD_DRDRL, "cl": METHOD_VANILLA_CL,
                  "vanilla_cl": METHOD_VANILLA_CL}


def _artifact_stem(env_kind, agent_kind, seed):
    return f"{env_kind}-{agent_kind}-seed{seed}"


def cmd_train(args):
    cfg = config_mod.load_config(args.config, env_kind=args.env)
    env_spec = config_mod.build_env_spec(cfg)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.agent == "dqn":
        hp = config_mod.build_dqn_hyperparams(cfg)
        if args.episodes is not None:
            hp.max_train_episodes = args.episodes
        agent, outcome, replay = train_dqn(env_spec, hp, args.seed)
    else:
        hp = config_mod.build_ppo_hyperparams(cfg)
        if args.episodes is not None:
            hp.max_train_episodes = args.episodes
        agent, outcome = train_ppo(env_spec, hp, args.seed)
        replay = None

    stem = _artifact_stem(env_spec.kind, args.agent, args.seed)
    (out_dir / f"{stem}.agent").write_bytes(save_agent(agent))
    obs_set = collect_observations(
        agent, env_spec, cfg["experiment"]["trace_samples"], args.seed)
    traces = trace_agent_networks(agent, obs_set)
    (out_dir / f"{stem}.traces").write_bytes(save_agent_traces(traces))
    if replay is not None:
        (out_dir / f"{stem}.replay").write_bytes(save_replay(replay))

    print(f"trained {args.agent} on {env_spec.kind} (seed {args.seed}): "
          f"solved={outcome.solved} episodes={outcome.episodes_used} "
          f"avg_reward={outcome.final_avg_reward:.2f} "
          f"train_time={outcome.wall_time_seconds:.1f}s")
    print(f"artifacts: {out_dir / stem}.{{agent,traces"
          f"{',replay' if replay is not None else ''}}}")
    return 0


def cmd_drift(args):
    cfg = config_mod.load_config(args.config, env_kind=args.env)
    drifts = sample_drifts(
        cfg["env"]["kind"], config_mod.drift_ranges(cfg),
        args.intensity or cfg["drift"]["intensity"],
        args.count or cfg["drift"]["count"],
        args.seed if args.seed is not None else cfg["drift"]["seed"])
    save_drifts(args.out, drifts)
    print(f"wrote {len(drifts)} {cfg['env']['kind']} drifts to {args.out}")
    for d in drifts:
        print(f"  {d.drift_id}: {d.shifted.as_dict()}")
    return 0


def _load_drifted_spec(args, template):
    if args.drifts is None:
        return None, template
    drifts = load_drifts(args.drifts)
    if not (0 <= args.drift_index < len(drifts)):
        raise SystemExit(f"--drift-index out of range (file has {len(drifts)})")
    drift = drifts[args.drift_index]
    return drift, drift.drifted_spec(template=template)


def cmd_evaluate(args):
    agent = load_agent(Path(args.agent_checkpoint).read_bytes())
    template = agent.env_spec
    drift, spec = _load_drifted_spec(args, template)
    avg = evaluate(spec, agent, args.episodes, args.seed)
    solved = is_solved(spec, avg, use_tolerance=args.tolerance)
    label = f"drift {drift.drift_id}" if drift else "original spec"
    print(f"{spec.kind} ({label}): avg_reward={avg:.2f} over "
          f"{args.episodes} episodes; solved={solved} "
          f"(threshold {spec.effective_threshold(args.tolerance):.2f})")
    return 0


def cmd_heal(args):
    agent = load_agent(Path(args.agent_checkpoint).read_bytes())
    cfg = config_mod.load_config(args.config, env_kind=agent.env_spec.kind)
    healing = config_mod.build_healing_config(
        cfg, forget_rate=args.forget_rate, scale_rate=args.scale_rate,
        max_heal_episodes=args.budget)
    drift, drifted_spec = _load_drifted_spec(args, agent.env_spec)
    if drift is None:
        raise SystemExit("heal requires --drifts/--drift-index")

    replay = None
    if args.replay is not None:
        replay = load_replay(Path(args.replay).read_bytes(), seed=args.seed)

    method = METHOD_ALIASES[args.method]
    if method == METHOD_DRDRL:
        if args.traces is None:
            raise SystemExit("--method drdrl requires --traces")
        traces = load_agent_traces(Path(args.traces).read_bytes())
        report = heal_drdrl(agent, agent.env_spec, drifted_spec, traces,
                            healing, args.seed, replay=replay, drift=drift)
    else:
        report = heal_vanilla_cl(agent, drifted_spec, healing, args.seed,
                                 replay=replay, drift=drift)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"heal-{method}-{drift.drift_id}-seed{args.seed}"
    row_path = out_dir / f"{stem}.csv"
    with open(row_path, "w", newline="") as fh:
        fh.write(f"# format: {RUNS_FORMAT}\n")
        fh.write(",".join(RUNS_COLUMNS) + "\n")
        fh.write(",".join(report_to_csv_row(report, drifted_spec.kind)) + "\n")
    if args.curve:
        write_curve_csv(out_dir / f"{stem}-curve.csv", report)
    if report.healed_agent is not None:
        (out_dir / f"{stem}.agent").write_bytes(save_agent(report.healed_agent))

    print(f"{method} on {drifted_spec.kind} drift {drift.drift_id}: "
          f"adapted={report.adapted} episodes={report.fine_tune_episodes} "
          f"fine_tune_time={report.wall_time_seconds:.1f}s "
          f"avg_reward={report.final_avg_reward:.2f}")
    print(f"wrote {row_path}")
    return 0


def cmd_compare(args):
    cfg = config_mod.load_config(args.config)
    healing_configs = {}
    for kind in args.env:
        kind_cfg = (config_mod.load_config(args.config, env_kind=kind)
                    if args.config else config_mod.load_config(env_kind=kind))
        healing_configs[kind] = config_mod.build_healing_config(
            kind_cfg, max_heal_episodes=args.budget)
    plan = ExperimentPlan(
        env_kinds=list(args.env),
        agent_kinds=list(args.agent),
        seeds=args.seeds,
        drifts_per_cell=args.drifts,
        drift_intensity=args.intensity,
        heal_budget=args.budget or 300,
        healing_configs=healing_configs,
        dqn_hyperparams=config_mod.build_dqn_hyperparams(cfg),
        ppo_hyperparams=config_mod.build_ppo_hyperparams(cfg),
        trace_samples=cfg["experiment"]["trace_samples"],
        master_seed=args.seed,
        workers=args.workers,
        out_dir=args.out,
    )
    summary, _ = run_experiment(plan)
    out_dir = Path(args.out)
    print(render_tables(summary))
    for cell in summary.cells:
        for failure in cell.failures:
            print(f"[failure] {cell.env_kind}/{cell.agent_kind}: {failure}",
                  file=sys.stderr)
    print(f"wrote {out_dir}/runs.csv, summary.csv, quadrants.csv")
    return 0


def cmd_report(args):
    summary = read_summary_csv(args.summary)
    if args.quadrants:
        from .harness.experiment import QuadrantCounts
        for row in read_quadrants_csv(args.quadrants):
            try:
                cell = summary.cell(row["env_kind"], row["agent_kind"])
            except KeyError:
                continue
            cell.quadrants = QuadrantCounts(row["both"], row["drdrl_only"],
                                            row["cl_only"], row["neither"])
            cell.ar_drdrl_pct = row["ar_drdrl_pct"]
            cell.ar_cl_pct = row["ar_cl_pct"]
    print(render_tables(summary))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="drheal",
        description="Self-healing for deep RL agents on drifted environments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train an agent on an original env")
    p.add_argument("--env", required=True, choices=["cartpole", "mountaincar",
                                                    "acrobot"])
    p.add_argument("--agent", required=True, choices=["dqn", "ppo"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--episodes", type=int, default=None,
                   help="override max training episodes")
    p.add_argument("--config", default=None, help="YAML config file")
    p.add_argument("--out", default="artifacts", help="output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("drift", help="sample drift specs to JSON")
    p.add_argument("--env", required=True, choices=["cartpole", "mountaincar",
                                                    "acrobot"])
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--intensity", choices=["mild", "moderate", "severe"],
                   default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True, help="drift JSON path")
    p.set_defaults(func=cmd_drift)

    p = sub.add_parser("evaluate", help="greedy evaluation of a checkpoint")
    p.add_argument("--agent-checkpoint", required=True)
    p.add_argument("--drifts", default=None, help="drift JSON file")
    p.add_argument("--drift-index", type=int, default=0)
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", action="store_true",
                   help="apply the drift tolerance to the solve bar")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("heal", help="heal a trained agent on one drift")
    p.add_argument("--agent-checkpoint", required=True)
    p.add_argument("--traces", default=None,
                   help="agent traces file (required for drdrl)")
    p.add_argument("--replay", default=None,
                   help="replay buffer file (DQN reload)")
    p.add_argument("--drifts", required=True)
    p.add_argument("--drift-index", type=int, default=0)
    p.add_argument("--method", required=True, choices=sorted(METHOD_ALIASES))
    p.add_argument("--forget-rate", type=float, default=None)
    p.add_argument("--scale-rate", type=float, default=None)
    p.add_argument("--budget", type=int, default=None,
                   help="max fine-tuning episodes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--curve", action="store_true",
                   help="also write the per-episode reward curve CSV")
    p.add_argument("--config", default=None)
    p.add_argument("--out", default="artifacts")
    p.set_defaults(func=cmd_heal)

    p = sub.add_parser("compare", help="full drdrl-vs-CL experiment matrix")
    p.add_argument("--env", nargs="+", required=True,
                   choices=["cartpole", "mountaincar", "acrobot"])
    p.add_argument("--agent", nargs="+", required=True,
                   choices=["dqn", "ppo"])
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--drifts", type=int, default=6)
    p.add_argument("--intensity", choices=["mild", "moderate", "severe"],
                   default="moderate")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--config", default=None)
    p.add_argument("--out", default="results")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="render tables from summary CSVs")
    p.add_argument("--summary", required=True)
    p.add_argument("--quadrants", default=None)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
