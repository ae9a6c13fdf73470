"""Run every verification check and print one JSON line per check."""

import argparse
import sys

from k2local.cli import RunConfig, config_from_file, run_all


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--config", help="key = value configuration file")
    args = p.parse_args()
    cfg = config_from_file(args.config) if args.config else RunConfig()
    report = run_all(cfg)
    print("\n".join(report.lines()))
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
