import json
import sys
from functools import lru_cache
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from branecfa.cfa import load_golden, solve  # noqa: E402
from branecfa.cli import corpus_path  # noqa: E402
from branecfa.semantics import explore  # noqa: E402
from branecfa.syntax import parse  # noqa: E402

CORPUS = [
    "example1",
    "example2",
    "viral",
    "drip_drip",
    "sync_causality",
    "independent_drip",
    "bud_drip",
    "replicated",
]


@lru_cache(maxsize=None)
def term(name: str):
    return parse(corpus_path(f"{name}.brane").read_text(encoding="utf-8"))


@lru_cache(maxsize=None)
def estimate(name: str, mode: str = "sound"):
    return solve(term(name), mode)


@lru_cache(maxsize=None)
def exploration(name: str, depth: int = 4, unfold: int = 2):
    return explore(term(name), depth, unfold)


@lru_cache(maxsize=None)
def golden(name: str):
    return load_golden(json.loads(corpus_path(f"{name}.expected.json").read_text(encoding="utf-8")))


# acceptance verdicts, printed at the end of the session
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
