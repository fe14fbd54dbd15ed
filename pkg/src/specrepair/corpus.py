"""Access to the bundled example programs."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .parser import Program, parse_program


def corpus_dir() -> Path:
    return Path(str(resources.files("specrepair") / "corpus"))


def corpus_names() -> list[str]:
    return sorted(p.stem for p in corpus_dir().glob("*.bl"))


def corpus_path(name: str) -> Path:
    path = corpus_dir() / f"{name}.bl"
    if not path.exists():
        raise FileNotFoundError(f"no bundled program named {name!r}")
    return path


def load_program(name: str) -> Program:
    return parse_program(corpus_path(name).read_text())


def load_all() -> list[tuple[str, Program]]:
    return [(name, load_program(name)) for name in corpus_names()]


def schedule_path(name: str) -> Path:
    path = corpus_dir() / f"{name}.sched"
    if not path.exists():
        raise FileNotFoundError(f"no bundled schedule named {name!r}")
    return path
