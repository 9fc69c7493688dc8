"""Command line entry point: ``fdcollide run|preset|check``."""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import parse_config
from .exceptions import ConfigError, SolverError
from .presets import preset, preset_names
from .runner import check, run

__all__ = ["main"]


def _load(path: str):
    return parse_config(Path(path).read_text())


def _summary(name: str, result) -> str:
    eps = result.ledger.epsilon
    worst = float(abs(eps).max()) if eps.size else float("nan")
    files = ", ".join(str(f) for f in result.files) or "no files"
    return f"{name}: {len(result.ledger)} rows, max |eps| = {worst:.3e}; wrote {files}"


def _run_preset(name: str, out: str, normalize: bool) -> str:
    return _summary(name, run(preset(name), out, normalize))


def _cmd_run(args) -> int:
    result = run(_load(args.config), args.out, True if args.normalize else None)
    print(_summary(args.config, result))
    return result.status


def _cmd_preset(args) -> int:
    if args.list:
        print("\n".join(preset_names()))
        return 0
    if not args.names:
        raise ConfigError("give at least one preset name (or --list)")
    for name in args.names:
        preset(name)  # fail fast on unknown names
    if args.jobs > 1 and len(args.names) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            lines = list(pool.map(_run_preset, args.names, [args.out] * len(args.names),
                                  [args.normalize] * len(args.names)))
    else:
        lines = [_run_preset(name, args.out, args.normalize) for name in args.names]
    print("\n".join(lines))
    return 0


def _cmd_check(args) -> int:
    info = check(_load(args.config))
    for key, value in info.items():
        print(f"{key} = {value:.6g}" if isinstance(value, float) else f"{key} = {value}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fdcollide", description="Energy-stable collision simulations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a configuration file")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="directory for relative output paths")
    p_run.add_argument("--normalize", action="store_true", help="peak-normalize the audio output")
    p_run.set_defaults(func=_cmd_run)

    p_pre = sub.add_parser("preset", help="run bundled presets")
    p_pre.add_argument("names", nargs="*")
    p_pre.add_argument("--out", default=".", help="output directory (default: current)")
    p_pre.add_argument("--normalize", action="store_true", help="peak-normalize the audio output")
    p_pre.add_argument("--jobs", type=int, default=1, help="run several presets in parallel processes")
    p_pre.add_argument("--list", action="store_true", help="list preset names and exit")
    p_pre.set_defaults(func=_cmd_preset)

    p_chk = sub.add_parser("check", help="validate a configuration and print grid and memory figures")
    p_chk.add_argument("config")
    p_chk.set_defaults(func=_cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SolverError, OSError) as exc:
        print(f"fdcollide: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
