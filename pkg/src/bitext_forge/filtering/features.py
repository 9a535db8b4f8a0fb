"""Per-sentence and per-pair text features used by the filter."""

from __future__ import annotations

import math
import re
from collections import Counter
from collections.abc import Callable
from dataclasses import dataclass

from bitext_forge.errors import DegenerateLength, EmptyText
from bitext_forge.filtering.whitelist import CharWhitelist

_DIGIT = re.compile(r"[0-9]")
_DIGITS_ONLY = str.maketrans("", "", "0123456789")


@dataclass(frozen=True, slots=True)
class SideFeatures:
    char_len: int
    word_count: int
    avg_word_len: float
    max_word_len: int
    digit_ratio: float
    non_whitelist_count: int
    langid_pass: bool


@dataclass(frozen=True, slots=True)
class PairFeatures:
    source: SideFeatures
    target: SideFeatures
    levenshtein: int
    poisson_logprob: float
    mismatched_numbers: int


def split_words(text: str) -> list[str]:
    """Whitespace tokenization; empty segments are dropped."""
    return text.split()


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance over code points (no diacritic folding)."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def poisson_lpmf(k: int, lam: int) -> float:
    """log P(K = k) for K ~ Poisson(lam)."""
    return k * math.log(lam) - lam - math.lgamma(k + 1)


def poisson_length_logprob(len_a: int, len_b: int) -> float:
    """Symmetric length-plausibility score: the worse of the two Poisson log-pmfs.

    Each side's word count serves as the rate for the other side's count.
    """
    if len_a < 1 or len_b < 1:
        raise DegenerateLength(f"word counts must be >= 1, got ({len_a}, {len_b})")
    return min(poisson_lpmf(len_b, len_a), poisson_lpmf(len_a, len_b))


def is_number(word: str) -> bool:
    return _DIGIT.search(word) is not None


def mismatched_numbers(src_words: list[str], tgt_words: list[str]) -> int:
    """Size of the symmetric multiset difference between the two sides' numbers."""
    src = Counter(w for w in src_words if is_number(w))
    tgt = Counter(w for w in tgt_words if is_number(w))
    return sum((src - tgt).values()) + sum((tgt - src).values())


def count_digits(text: str) -> int:
    return len(text) - len(text.translate(_DIGITS_ONLY))


def side_features(
    text: str,
    whitelist: CharWhitelist,
    langid: Callable[[str], bool] | None = None,
) -> SideFeatures:
    """Features of one normalized sentence.

    ``langid`` is a gate closed over the expected language; ``None`` treats
    the check as passed.
    """
    words = split_words(text)
    if not words:
        raise EmptyText("sentence has no words")
    lengths = [len(w) for w in words]
    non_space = len(text) - text.count(" ")
    return SideFeatures(
        char_len=len(text),
        word_count=len(words),
        avg_word_len=sum(lengths) / len(words),
        max_word_len=max(lengths),
        digit_ratio=count_digits(text) / non_space if non_space else 0.0,
        non_whitelist_count=whitelist.count_outside(text),
        langid_pass=True if langid is None else bool(langid(text)),
    )
