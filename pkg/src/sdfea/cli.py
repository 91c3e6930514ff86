"""Command line entry point: ``sdfea run | preset | verify | plotdata``.

Exit codes: 0 success, 3 invalid configuration, 4 file system or resume
conflict, 5 failed validation (a verify check or inconsistent plot data).
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import harness, verification

EXIT_OK = 0
EXIT_CONFIG = 3
EXIT_IO = 4
EXIT_VALIDATION = 5


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threads", type=int, help="worker threads (default: from config)")
    p.add_argument("--resume", action="store_true",
                   help="continue an interrupted run in an existing output directory")
    p.add_argument("--quiet", action="store_true", help="suppress progress output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdfea", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a TOML config")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--seed", type=int, help="override the master seed")
    run.add_argument("--out", type=Path, help="output directory (default: config 'out')")
    _add_run_options(run)

    preset = sub.add_parser("preset", help="run a built-in experiment")
    preset.add_argument("name", choices=["figure2"])
    preset.add_argument("--out", required=True, type=Path)
    preset.add_argument("--reduced", action="store_true",
                        help="k in {4,6,8,10,12} with 50 repetitions")
    preset.add_argument("--seed", type=int, help="override the master seed")
    preset.add_argument("--write-config-only", action="store_true",
                        help="write config.toml to --out and stop")
    _add_run_options(preset)

    verify = sub.add_parser("verify", help="run a validation suite")
    verify.add_argument("--suite", required=True, choices=sorted(verification.SUITES))

    plot = sub.add_parser("plotdata", help="turn summary.csv into a plot-ready table")
    plot.add_argument("--in", dest="indir", required=True, type=Path)
    plot.add_argument("--out", required=True, type=Path)
    return parser


def _execute(config: harness.ExperimentConfig, out: Path, args) -> int:
    result = harness.run_experiment(config, out, threads=args.threads, resume=args.resume,
                                    progress=not args.quiet)
    censored = sum(s.censored for s in result.summaries)
    print(f"{len(result.records)} runs, {len(result.summaries)} summary rows, "
          f"{censored} censored -> {out}")
    return EXIT_OK


def cmd_run(args) -> int:
    config = harness.load_config(args.config)
    if args.seed is not None:
        config = config.replace(seed=args.seed)
    out = args.out if args.out is not None else (Path(config.out) if config.out else None)
    if out is None:
        raise harness.ConfigError("out", "no output directory: pass --out or set 'out'")
    return _execute(config, out, args)


def cmd_preset(args) -> int:
    config = harness.figure2_preset(reduced=args.reduced)
    if args.seed is not None:
        config = config.replace(seed=args.seed)
    if args.write_config_only:
        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / "config.toml"
        path.write_text(harness.dump_config(config), encoding="utf-8")
        print(path)
        return EXIT_OK
    return _execute(config, args.out, args)


def cmd_verify(args) -> int:
    results = verification.run_suite(args.suite)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        note = " (retried)" if r.retried else ""
        print(f"{status} {r.name}: {r.detail}{note}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VALIDATION


def cmd_plotdata(args) -> int:
    summaries = harness.read_summary_csv(args.indir / "summary.csv")
    harness.emit_plot_data(summaries, args.out)
    print(args.out)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "preset": cmd_preset, "verify": cmd_verify, "plotdata": cmd_plotdata}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except harness.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (harness.ResumeError, OSError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (harness.PlotDataError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
