"""Command-line entry point: single runs, batch experiments, report plots,
and the live session server."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import List, Optional

from . import sim
from .config import ENV_PREFIX, ConfigError, load_sim_config
from .estimation import estimated_level
from .sim import CONTROLLERS, DEFAULT_OPPONENTS, make_opponent, run_batch, run_episode


def _env_default(name: str, fallback=None, cast=str):
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None:
        return fallback
    return cast(raw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="raceduel",
        description=(
            "Two-robot racing duel simulator: a speed-handicapped leader blocks a "
            "chasing opponent. Options fall back to RACEDUEL_* environment "
            "variables, then to the config file, then to built-in defaults."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument(
            "--config",
            type=Path,
            default=_env_default("CONFIG", None, Path),
            help="YAML config file (sections: sim, planning, reward, estimation, tracking)",
        )
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            metavar="SECTION.KEY=VALUE",
            help="override one config entry (beats the config file); repeatable",
        )
        p.add_argument(
            "--out",
            type=Path,
            default=_env_default("OUT", None, Path),
            help="output directory",
        )

    run_p = sub.add_parser("run", help="run one episode and write its log")
    common(run_p)
    run_p.add_argument("--seed", type=int, default=_env_default("SEED", 0, int))
    run_p.add_argument(
        "--opponent",
        default=_env_default("OPPONENT", "constant:1"),
        help="constant:K | random | switcher | external:PATH",
    )
    run_p.add_argument(
        "--controller",
        choices=CONTROLLERS,
        default=_env_default("CONTROLLER", "mixing"),
    )

    batch_p = sub.add_parser("batch", help="run the full experiment grid")
    common(batch_p)
    batch_p.add_argument("--seed", type=int, default=_env_default("SEED", 0, int))
    batch_p.add_argument("--runs", type=int, default=_env_default("RUNS", 200, int))
    batch_p.add_argument(
        "--opponents",
        default=_env_default("OPPONENTS", ",".join(DEFAULT_OPPONENTS)),
        help="comma-separated opponent specs",
    )
    batch_p.add_argument(
        "--controllers",
        default=_env_default("CONTROLLERS", ",".join(CONTROLLERS)),
        help="comma-separated controller names",
    )
    batch_p.add_argument(
        "--workers",
        type=int,
        default=_env_default("WORKERS", os.cpu_count() or 1, int),
    )
    batch_p.add_argument(
        "--no-logs",
        action="store_true",
        help="skip per-episode logs, write only the summary",
    )

    report_p = sub.add_parser("report", help="render plots from episode logs")
    common(report_p)
    report_p.add_argument("--logs", type=Path, required=True, help="episode log directory")

    serve_p = sub.add_parser("serve", help="host live human-driven sessions")
    common(serve_p)
    serve_p.add_argument(
        "--serve-port", type=int, default=_env_default("SERVE_PORT", 8000, int)
    )
    serve_p.add_argument("--host", default=_env_default("HOST", "127.0.0.1"))
    serve_p.add_argument("--seed", type=int, default=_env_default("SEED", 0, int))
    return parser


def cmd_run(args) -> int:
    config = load_sim_config(args.config, args.overrides)
    model = make_opponent(args.opponent, args.seed, config)
    record = run_episode(config, args.controller, model, args.seed, opponent_name=args.opponent)
    out_dir = args.out or Path("out")
    name = f"{args.controller}_{args.opponent.replace(':', '-')}_{args.seed}.jsonl"
    record.write(out_dir / name)
    if record.aborted:
        print(f"episode aborted: {record.abort_reason}", file=sys.stderr)
        return 1
    print(record.outcome)
    print(f"collision: {record.collision}  end: {record.end_time:.1f} s")
    print(f"log: {out_dir / name}")
    print("cycle  t      est  potential  beliefs")
    for d in record.decisions:
        level = estimated_level(d.beliefs)
        beliefs = " ".join(f"{b:.2f}" for b in d.beliefs)
        print(f"{d.k // 5:>5}  {d.t:5.1f}  {level:>3}  {d.potential:9.2f}  [{beliefs}]")
    return 0


def cmd_batch(args) -> int:
    config = load_sim_config(args.config, args.overrides)
    out_dir = args.out or Path("out")
    out_dir.mkdir(parents=True, exist_ok=True)
    controllers = [c.strip() for c in args.controllers.split(",") if c.strip()]
    opponents = [o.strip() for o in args.opponents.split(",") if o.strip()]
    summary = run_batch(
        config,
        controllers=controllers,
        opponents=opponents,
        n_runs=args.runs,
        base_seed=args.seed,
        out_dir=None if args.no_logs else out_dir / "episodes",
        workers=args.workers,
    )
    summary.write_csv(out_dir / "summary.csv")
    print(summary.format_table())
    print(f"summary: {out_dir / 'summary.csv'}")
    return 0


def cmd_report(args) -> int:
    from .report import generate_report

    out_dir = args.out or (args.logs.parent / "report")
    files = generate_report(args.logs, out_dir)
    for path in files:
        print(path)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    config = load_sim_config(args.config, args.overrides)
    app = create_app(config=config, out_dir=args.out or Path("out"), seed=args.seed)
    uvicorn.run(app, host=args.host, port=args.serve_port, log_level="warning")
    return 0


_COMMANDS = {"run": cmd_run, "batch": cmd_batch, "report": cmd_report, "serve": cmd_serve}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
