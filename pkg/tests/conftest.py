from __future__ import annotations

import itertools
import random

import pytest

from bitext_forge.core import parse_language

LANG_WORDFREQ = {"ces": "cs", "eng": "en", "pol": "pl", "slk": "sk", "slv": "sl"}


def synthetic_sentences(code: str, count: int, seed: int, vocab: int = 20000, words=(4, 18)) -> list[str]:
    """Sentences of real words drawn by frequency rank from a language's word list."""
    import wordfreq

    pool = wordfreq.top_n_list(LANG_WORDFREQ[code], vocab)
    cum = list(itertools.accumulate(1.0 / (rank + 10) for rank in range(len(pool))))
    rng = random.Random(f"{code}-{seed}")
    out = []
    for _ in range(count):
        n = rng.randint(*words)
        out.append(" ".join(rng.choices(pool, cum_weights=cum, k=n)))
    return out


@pytest.fixture
def L():
    return parse_language


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict(capsys):
    """Record and print one PASS/FAIL line for an acceptance criterion."""

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print(f"\n{line}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
