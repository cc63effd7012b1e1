"""``metisforge`` command-line entry point."""
from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, load_config
from .pipeline import PipelineError, cmd_augment, cmd_baseline, cmd_crossval, cmd_mutants, cmd_report

EXIT_OK, EXIT_OTHER, EXIT_NO_TARGETS, EXIT_MISSING = 0, 1, 2, 3
COMMANDS = ("baseline", "mutants", "augment", "crossval", "report")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="metisforge", description="Mutation-guided test-set augmentation.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="YAML run configuration")
    p.add_argument("--force", action="store_true", help="overwrite existing artifacts / redo finished runs")
    p.add_argument("--paper-scale", action="store_true", help="use the full-scale search settings")
    p.add_argument("--seed", type=int, default=None, help="base seed for the augmentation runs")
    p.add_argument("--target", action="append", default=None,
                   help="augment only this operator's target (repeatable)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, paper_scale=args.paper_scale, seed=args.seed)
        if args.command == "baseline":
            cmd_baseline(cfg, args.force)
        elif args.command == "mutants":
            cmd_mutants(cfg, args.force)
        elif args.command == "augment":
            cmd_augment(cfg, args.force, args.target)
        elif args.command == "crossval":
            cmd_crossval(cfg)
        else:
            cmd_report(cfg)
    except PipelineError as exc:
        print(f"metisforge {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ConfigError, FileNotFoundError) as exc:
        print(f"metisforge {args.command}: {exc}", file=sys.stderr)
        return EXIT_OTHER
    except Exception as exc:  # noqa: BLE001 - report and map to the generic status
        print(f"metisforge {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_OTHER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
