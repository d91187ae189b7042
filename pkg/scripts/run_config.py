"""Run one or more experiment configs and write records plus summaries.

    python scripts/run_config.py example1_fig1 heisenberg_n4_desk --workers 2
"""

import argparse
import sys

from cqng.cli import main as cli_main


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("configs", nargs="+", help="config paths or bundled names")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-root", default="results")
    args = p.parse_args()
    status = 0
    for name in args.configs:
        stem = name.rsplit("/", 1)[-1].removesuffix(".json")
        rc = cli_main(["run", "--config", name, "--out", f"{args.out_root}/{stem}", "--workers", str(args.workers)])
        status = max(status, rc)
    return status


if __name__ == "__main__":
    sys.exit(main())
