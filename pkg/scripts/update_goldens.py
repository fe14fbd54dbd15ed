#!/usr/bin/env python3
"""Regenerate the byte-exact golden CLI outputs for the bundled corpus.

Run after any intentional output change, then review the diff:

    python3 scripts/update_goldens.py
    git diff tests/goldens/
"""

import io
import json
import sys
from contextlib import redirect_stdout
from pathlib import Path

from specrepair.cli import main
from specrepair.corpus import corpus_names, corpus_path

GOLDEN_COMMANDS = [
    ("infer", ["infer", "--json"]),
    ("infer_v11", ["infer", "--mode", "v1.1", "--json"]),
    ("check", ["check", "--json"]),
    ("repair", ["repair", "--json"]),
    ("repair_slh_v11", ["repair", "--mode", "slh", "--v11", "--json"]),
    ("run_seq", ["run-seq", "--json"]),
]


def capture(argv) -> dict:
    buffer = io.StringIO()
    with redirect_stdout(buffer):
        code = main(argv)
    return {"exit": code, "stdout": buffer.getvalue()}


def main_script() -> int:
    goldens = {}
    for name in corpus_names():
        path = str(corpus_path(name))
        goldens[name] = {key: capture(argv + [path])
                         for key, argv in GOLDEN_COMMANDS}
    out = Path(__file__).resolve().parent.parent / "tests" / "goldens" / \
        "cli_outputs.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(goldens, sort_keys=True, indent=1) + "\n")
    print(f"wrote {out} ({len(goldens)} programs)")
    return 0


if __name__ == "__main__":
    sys.exit(main_script())
