"""Command-line entry point: ``minnorm <experiment> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys

from .experiments import KINDS, ConfigError, ExperimentConfig, load_config, run, write_outputs

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

log = logging.getLogger("minnorm")


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="minnorm", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        sp = sub.add_parser(kind, help=f"run the {kind} experiment")
        sp.add_argument("--config", metavar="PATH", help="flat YAML config file")
        sp.add_argument("--seed", type=_u64, help="base seed (overrides the config)")
        sp.add_argument("--out", metavar="DIR", default="results", help="output directory (default: results)")
        sp.add_argument("--realizations", type=int, metavar="N", help="number of random realizations")
        sp.add_argument("--quiet", action="store_true", help="suppress the console summary")
        sp.add_argument("--no-plot", action="store_true", help="skip the SVG")
    rp = sub.add_parser("replot", help="redraw the SVG of an experiment CSV")
    rp.add_argument("csv", help="CSV written by an experiment")
    rp.add_argument("--out", metavar="SVG", help="output path (default: CSV path with .svg)")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")

    if args.command == "replot":
        from .plotting import plot_csv

        try:
            print(plot_csv(args.csv, args.out))
        except (OSError, ValueError, KeyError) as exc:
            log.error("cannot replot %s: %s", args.csv, exc)
            return EXIT_CONFIG
        return EXIT_OK

    try:
        if args.config:
            cfg = load_config(args.config, args.command)
        else:
            cfg = ExperimentConfig.from_mapping({}, args.command)
        over = {}
        if args.seed is not None:
            over["seed"] = args.seed
        if args.realizations is not None:
            over["realizations"] = args.realizations
        if over:
            m = cfg.to_mapping()
            m.update(over)
            cfg = ExperimentConfig.from_mapping(m, args.command)
        result = run(cfg)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG

    paths = write_outputs(cfg, result, args.out, plot=not args.no_plot)
    if not args.quiet:
        print(f"{cfg.experiment} [{cfg.config_hash}] seed={cfg.seed}")
        for line in result.summary:
            print("  " + line)
        for key, path in paths.items():
            print(f"  {key}: {path}")
    if result.failure_fraction > cfg.failure_threshold:
        log.error(
            "%d of %d rows failed (%.1f%% > %.1f%%)",
            result.failures, result.total, 100 * result.failure_fraction, 100 * cfg.failure_threshold,
        )
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
