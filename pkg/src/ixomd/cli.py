"""Command-line front end: `ixomd run ...` and `ixomd plot-data ...`.

`run` executes one config over its seeds and writes one CSV (and summary
JSON) per seed; with a single seed and no --out the CSV goes to stdout.
`plot-data` turns an emitted CSV into two whitespace-separated columns,
log10(episode) and log10(exploitability), ready for slope fitting.

Flags override entries of a JSON config file given via --config; both feed
the same RunConfig. Runs are deterministic per (config, seed); pass --timing
to fill the wall_ms column at the price of bytewise reproducibility.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .harness import (
    CheckpointError,
    ConfigError,
    RunConfig,
    emit_csv,
    parse_csv,
    plot_data_lines,
    run,
    run_config_from_dict,
)


def _parse_seeds(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(s) for s in text.split(",") if s.strip() != "")
    except ValueError:
        raise ConfigError(f"seeds must be a comma-separated list of integers, got {text!r}")


def _parse_probes(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(s) for s in text.split(",") if s.strip() != "")
    except ValueError:
        raise ConfigError(f"probes must be a comma-separated list of integers, got {text!r}")


def _parse_rate(text: str) -> float | str:
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"expected a number or 'auto', got {text!r}")


def _parse_eval_every(text: str) -> int | str:
    if text == "geom":
        return "geom"
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"eval-every must be an integer or 'geom', got {text!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ixomd",
        description="Self-play equilibrium learning under bandit feedback.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run a config over its seeds and emit CSVs")
    runp.add_argument("--config", help="JSON file with RunConfig fields; flags override")
    runp.add_argument("--game", help="kuhn | leduc | matrix:<file> | random:<params> | file:<path>")
    runp.add_argument("--episodes", type=int, help="number of self-play episodes T")
    runp.add_argument("--eta", type=_parse_rate, help="learning rate, or 'auto'")
    runp.add_argument("--gamma", type=_parse_rate, help="exploration bias, or 'auto' (0 disables)")
    runp.add_argument("--delta", type=float, help="bound confidence parameter (default 0.1)")
    runp.add_argument(
        "--eval-every", type=_parse_eval_every, dest="eval_every",
        help="probe stride, or 'geom' for powers of two (default)",
    )
    runp.add_argument("--seeds", type=_parse_seeds, help="comma-separated seed list")
    runp.add_argument(
        "--snapshot", action="store_true", default=None,
        help="store every iterate (small runs only)",
    )
    runp.add_argument("--out", help="output CSV path (single seed) or directory")
    runp.add_argument(
        "--opponent",
        help="selfplay | fixed:uniform | fixed:<policy.json> | scripted-adversary:<file>",
    )
    runp.add_argument("--checkpoint", help="write a resumable snapshot to this path")
    runp.add_argument(
        "--checkpoint-at", type=int, dest="checkpoint_at",
        help="stop after this episode and checkpoint (needs --checkpoint)",
    )
    runp.add_argument("--resume", help="continue from a checkpoint file")
    runp.add_argument("--probes", type=_parse_probes, help="explicit probe episodes")
    runp.add_argument(
        "--track-regret", dest="track_regret", choices=["auto", "on", "off"],
        help="empirical regret columns (default auto: on up to 10^5 episodes)",
    )
    runp.add_argument(
        "--timing", action="store_true", default=None,
        help="fill wall_ms (breaks bytewise determinism)",
    )
    runp.add_argument("--jobs", type=int, help="parallel seed workers (default 1)")

    plotp = sub.add_parser("plot-data", help="log10-log10 pairs from an emitted CSV")
    plotp.add_argument("csv", help="CSV file produced by `ixomd run`")
    plotp.add_argument("--out", help="write pairs here instead of stdout")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if args.config is not None:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config file {args.config}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"config file {args.config} must hold a JSON object")
    for name in (
        "game", "episodes", "eta", "gamma", "delta", "eval_every", "seeds",
        "snapshot", "out", "opponent", "checkpoint", "checkpoint_at",
        "resume", "probes", "track_regret", "timing", "jobs",
    ):
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    if data.get("track_regret") in ("auto", "on", "off"):
        data["track_regret"] = {"auto": None, "on": True, "off": False}[data["track_regret"]]
    if "game" not in data:
        raise ConfigError("--game is required (or provide it in --config)")
    if "episodes" not in data:
        raise ConfigError("--episodes is required (or provide it in --config)")
    return run_config_from_dict(data)


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    reports = run(cfg)
    for report in reports:
        if cfg.out is None and len(reports) == 1:
            sys.stdout.write(emit_csv(report))
        summary = report.summary()
        print(
            f"seed {report.seed}: {len(report.rows)} probes, "
            f"final exploitability {summary['final_exploitability']!r}"
            + (
                f" (episode {summary['final_episode']})"
                if report.rows
                else ""
            ),
            file=sys.stderr,
        )
    return 0


def _cmd_plot_data(args: argparse.Namespace) -> int:
    rows = parse_csv(Path(args.csv).read_text())
    lines = plot_data_lines(rows)
    text = "\n".join(lines) + ("\n" if lines else "")
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_plot_data(args)
    except (ValueError, OSError, CheckpointError) as e:
        # ConfigError, OpponentFileError, GameFileError and bad game/matrix
        # specs are ValueErrors; FileNotFoundError is an OSError.
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
