"""Command line interface.

    cocyclelab <experiment> --config run.toml [--seed S] [--out DIR] [--naive]
                            [--threads K] [--set key=value ...]

``run`` executes every experiment in the file; the other subcommands require
the file's experiments to be of that kind (or to omit ``kind``).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import EXPERIMENTS, SEED_MAX, apply_overrides, load_toml, parse_override, validate
from .errors import ConfigError, LabError
from .runner import run


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v <= SEED_MAX:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cocyclelab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run",) + EXPERIMENTS:
        p = sub.add_parser(name, help=f"run {'all experiments' if name == 'run' else name}")
        p.add_argument("--config", type=Path, required=True, help="TOML run configuration")
        p.add_argument("--seed", type=_u64, help="override the config seed")
        p.add_argument("--out", help="override the output directory")
        p.add_argument("--naive", action="store_true", default=None,
                       help="recompute every word from scratch (oracle mode)")
        p.add_argument("--threads", type=int, help="worker threads")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config field, e.g. experiment.n_max=12")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror}") from None
        raw = load_toml(text)
        overrides = dict(parse_override(s) for s in args.set)
        for key, value in (("seed", args.seed), ("output", args.out), ("naive", args.naive),
                           ("threads", args.threads)):
            if value is not None:
                overrides[key] = value
        if args.command != "run":
            exps = raw.get("experiment")
            for exp in exps if isinstance(exps, list) else [exps or {}]:
                if not isinstance(exp, dict):
                    continue
                exp.setdefault("kind", args.command)
                if exp["kind"] != args.command:
                    raise ConfigError(f"experiment.kind: {exp['kind']!r} does not match subcommand "
                                      f"{args.command!r}")
            if exps is None:
                raw["experiment"] = {"kind": args.command}
        cfg = validate(apply_overrides(raw, overrides))
        manifest = run(cfg)
    except LabError as exc:
        errors = getattr(exc, "errors", [str(exc)])
        for e in errors:
            print(f"error: {e}", file=sys.stderr)
        return exc.exit_code
    for e in manifest.experiments:
        print(f"{e['kind']}: wrote {Path(cfg.output) / e['csv']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
