#!/usr/bin/env python3
"""Protect-count comparison over the corpus: minimum-cut repair against the
blunt baseline that protects every read (or every non-constant-address read
in plain v1 mode), for both analysis variants."""

import sys

from specrepair.corpus import load_all
from specrepair.repair import pipeline
from specrepair.typesys import Mode


def main() -> int:
    header = (f"{'program':24} {'v1 cut':>7} {'v1 base':>8} "
              f"{'v1.1 cut':>9} {'v1.1 base':>10}")
    print(header)
    print("-" * len(header))
    totals = [0, 0, 0, 0]
    for name, program in load_all():
        v1 = pipeline(program.command, Mode(), program.variables())
        v11 = pipeline(program.command, Mode(spectre_v1_1=True),
                       program.variables())
        row = [v1.protect_count, v1.baseline_count,
               v11.protect_count, v11.baseline_count]
        totals = [a + b for a, b in zip(totals, row)]
        print(f"{name:24} {row[0]:>7} {row[1]:>8} {row[2]:>9} {row[3]:>10}")
        assert row[1] >= row[0] and row[3] >= row[2] and row[2] >= row[0]
    print("-" * len(header))
    print(f"{'total':24} {totals[0]:>7} {totals[1]:>8} {totals[2]:>9} "
          f"{totals[3]:>10}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
