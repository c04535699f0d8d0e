"""Write the figure data tables to a directory and report their checks.

    python3 scripts/reproduce_figures.py [outdir] [--parallel N]
"""

import argparse
import sys
from pathlib import Path

from nonideal_tpm.scenarios.csvout import write_csv
from nonideal_tpm.scenarios.pipelines import FIGURES


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("outdir", nargs="?", type=Path, default=Path("figure_data"))
    parser.add_argument("--parallel", type=int, default=1)
    args = parser.parse_args()
    ok = True
    for name, build in FIGURES.items():
        table = build(parallel=args.parallel)
        path = write_csv(table, args.outdir / f"{name}.csv")
        print(f"{name}: {len(table.rows)} rows -> {path}")
        for c in table.checks:
            print(f"  {'PASS' if c.passed else 'FAIL'}  {c.name} ({c.detail})")
            ok &= c.passed
    return 0 if ok else 2


if __name__ == "__main__":
    sys.exit(main())
