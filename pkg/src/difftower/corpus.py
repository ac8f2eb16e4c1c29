"""Checked-in example towers with golden CLI outputs.

Each case directory holds tower.twr, cmd.txt (CLI arguments; the token
TOWER stands for the tower file path), expected.txt (exact stdout) and
meta.txt (tag=PAPER|TRIVIAL|DERIVED, exit=N, optional note).  replay() runs
the CLI in-process and compares byte-exact.
"""

from __future__ import annotations

import difflib
import io
import shlex
from contextlib import redirect_stdout
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

from .errors import DiffTowerError

DATA_DIR = Path(__file__).parent / "corpus_data"
VALID_TAGS = ("PAPER", "TRIVIAL", "DERIVED")


class Mismatch(DiffTowerError):
    """Replay output differed from the golden file; message holds a diff."""


@dataclass(frozen=True)
class CorpusCase:
    name: str
    tower_path: Path
    argv: Tuple[str, ...]
    expected_output: str
    expected_exit: int
    tag: str
    note: str = ""


def list_cases() -> List[str]:
    return sorted(p.name for p in DATA_DIR.iterdir() if p.is_dir())


def load_case(name: str) -> CorpusCase:
    case_dir = DATA_DIR / name
    meta = {}
    for line in (case_dir / "meta.txt").read_text().splitlines():
        line = line.strip()
        if line and "=" in line:
            key, value = line.split("=", 1)
            meta[key.strip()] = value.strip()
    tag = meta.get("tag", "")
    if tag not in VALID_TAGS:
        raise DiffTowerError(f"case {name}: missing or bad tag {tag!r}")
    raw = (case_dir / "cmd.txt").read_text().strip()
    tower_path = case_dir / "tower.twr"
    argv = tuple(str(tower_path) if tok == "TOWER" else tok
                 for tok in shlex.split(raw))
    return CorpusCase(
        name=name,
        tower_path=tower_path,
        argv=argv,
        expected_output=(case_dir / "expected.txt").read_text(),
        expected_exit=int(meta["exit"]),
        tag=tag,
        note=meta.get("note", ""))


def run_case(case: CorpusCase) -> Tuple[str, int]:
    from .cli import main
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(list(case.argv))
    return buf.getvalue(), code


def replay(case: CorpusCase) -> None:
    """Raises Mismatch (with a unified diff) unless output and exit code
    both match the golden files exactly."""
    output, code = run_case(case)
    if output == case.expected_output and code == case.expected_exit:
        return
    diff = "".join(difflib.unified_diff(
        case.expected_output.splitlines(keepends=True),
        output.splitlines(keepends=True),
        fromfile=f"{case.name}/expected", tofile=f"{case.name}/actual"))
    raise Mismatch(
        f"case {case.name}: exit {code} (expected {case.expected_exit})\n{diff}")


def replay_all() -> List[str]:
    """Replay every case; returns the list of passing case names."""
    passed = []
    for name in list_cases():
        replay(load_case(name))
        passed.append(name)
    return passed
