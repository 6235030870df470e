"""Command-line entry point ``ou-selfnorm``.

Exit codes: 0 all checks pass, 1 a statistical check failed, 2 configuration
error, 3 runtime or capacity error.
"""
import argparse
import logging
import sys

from .config import EXPERIMENTS, EXAMPLES, MOMENTS, parse_config
from .errors import ConfigurationError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


def _load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def _cmd_run(args):
    from .runner import run_experiment

    cfg = _load(args.config)
    if args.workers is not None and args.workers < 1:
        raise ConfigurationError("--workers must be positive")
    manifest = run_experiment(cfg, out_dir=args.out, workers=args.workers, deterministic=args.deterministic)
    for c in manifest.checks:
        print(f"{'PASS' if c['pass'] else 'FAIL'}  {c['check']}")
    if manifest.error:
        print(f"error: {manifest.error}", file=sys.stderr)
    print(f"{manifest.status}: {len(manifest.files)} files in {args.out or cfg.out_dir}")
    return manifest.exit_code


def _cmd_validate(args):
    cfg = _load(args.config)
    print(f"ok: {cfg.experiment} ({cfg.dist}), {cfg.reps} replications")
    return EXIT_OK


def _cmd_list(args):
    for name, desc in EXPERIMENTS.items():
        print(f"{name:<28} {desc}")
    print(f"\nfunctional examples: {' '.join(EXAMPLES)}")
    print(f"moments: {' '.join(MOMENTS)}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="ou-selfnorm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config")
    run.add_argument("--workers", type=int, default=None)
    run.add_argument("--deterministic", action="store_true",
                     help="fixed-order reduction and no wall time: byte-identical reruns")
    run.add_argument("--out", default=None, help="output directory (overrides out_dir)")
    run.set_defaults(func=_cmd_run)

    val = sub.add_parser("validate", help="parse and validate a config")
    val.add_argument("config")
    val.set_defaults(func=_cmd_validate)

    ls = sub.add_parser("list-experiments", help="list experiments")
    ls.set_defaults(func=_cmd_list)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        logging.getLogger(__name__).debug("runtime failure", exc_info=True)
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
