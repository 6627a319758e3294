from pathlib import Path

import pytest

from pcfl.corpus import PROGRAMS

TERMINATING = ["not", "enc", "gen", "exp", "rnd", "exp_fst", "exp_snd", "id", "pair", "list"]
"""Shipped programs that converge with probability 1"""


@pytest.fixture
def program_file(tmp_path: Path):
    """Copies a shipped program into a temporary file and returns its path as a string."""

    def copy(name: str) -> str:
        target = tmp_path / f"{name}.pcfl"
        target.write_text((PROGRAMS / f"{name}.pcfl").read_text(encoding="utf-8"), encoding="utf-8")
        return str(target)

    return copy
