#!/usr/bin/env python3
"""Check the speculative machine against the sequential semantics over the
bundled corpus: every sampled complete schedule must reach the sequential
final state, with a filtered trace that is a permutation of the sequential
trace."""

import argparse
import json
import sys
import time

from specrepair.corpus import load_all
from specrepair.harness import consistency_suite
from specrepair.machine import MODE_HW, MODE_SLH, format_directive


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--schedules", type=int, default=100,
                        help="random complete schedules per program")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--mode", choices=[MODE_HW, MODE_SLH],
                        default=MODE_HW)
    args = parser.parse_args()

    started = time.monotonic()
    report = consistency_suite(load_all(),
                               per_program_schedules=args.schedules,
                               seed=args.seed, mode=args.mode)
    elapsed = time.monotonic() - started
    print(json.dumps({
        "mode": args.mode,
        "programs": report.checked,
        "schedules": report.schedules,
        "failures": [{
            "program": f.program,
            "detail": f.detail,
            "schedule": [format_directive(d) for d in f.directives],
        } for f in report.failures],
        "seconds": round(elapsed, 2),
    }, sort_keys=True, indent=2))
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
