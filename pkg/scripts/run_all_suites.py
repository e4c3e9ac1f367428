"""Run every verification suite and write one YAML report per suite.

Usage: python3 scripts/run_all_suites.py [OUTDIR] [--config FILE] [--seed N]
"""

import argparse
import sys
import time
from pathlib import Path

from qdsred import cli
from qdsred.config import RunConfig, dump_yaml


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("outdir", nargs="?", default="reports")
    ap.add_argument("--config")
    ap.add_argument("--seed", type=int)
    args = ap.parse_args()
    cfg = (RunConfig.load(args.config) if args.config else RunConfig()).with_overrides(args.seed).validate()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    failed = 0
    for name in cli.SUITES:
        t0 = time.perf_counter()
        rep, code = cli.cmd_verify(name, cfg)
        dt = time.perf_counter() - t0
        (out / f"{name}.yaml").write_text(dump_yaml(rep))
        failed += code != 0
        print(f"{rep['status'].upper():4} {name:22} {dt:7.2f}s")
        for line in rep["summary"]:
            print("     " + line)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
