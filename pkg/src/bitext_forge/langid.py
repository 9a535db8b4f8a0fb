"""Character n-gram Naive Bayes language identifier and the top-1 gate.

Each language is a multinomial over boundary-padded character n-grams with
additive smoothing over the shared n-gram vocabulary (plus one slot for
unseen n-grams). A text scores ``log prior + sum of n-gram log-probs``.
"""

from __future__ import annotations

import gzip
import json
import math
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np
from numba import njit

from bitext_forge.core import LanguageTag, parse_language
from bitext_forge.errors import EmptyCorpus, EmptyText, FormatError, InvalidSmoothing, UnknownLanguage

FORMAT_VERSION = 1
BOS, EOS = "^", "$"
# Packed keys use 21 bits per code point (shifted by one so 0 marks "absent").
_CP_BITS = 21
MAX_PACKED_ORDER = 3


class LanguageGate(Protocol):
    """Anything that can answer "is ``text`` top-ranked as ``expected``?"."""

    def gate(self, text: str, expected: LanguageTag) -> bool: ...


def ngrams(text: str, n: int) -> list[str]:
    padded = BOS + text + EOS
    if len(padded) <= n:
        return [padded]
    return [padded[i : i + n] for i in range(len(padded) - n + 1)]


def pack_ngram(gram: str) -> int:
    key = 0
    for ch in gram:
        key = (key << _CP_BITS) | (ord(ch) + 1)
    return key


_HASH_MULT = 0x9E3779B97F4A7C15


def hash_slot(key: int, bits: int) -> int:
    """Fibonacci hashing of a packed key; mirrors the kernel's probe start."""
    return ((key * _HASH_MULT) & 0xFFFFFFFFFFFFFFFF) >> (64 - bits)


@njit(cache=True, nogil=True)
def _accumulate(rows, table, priors, out):
    for lang in range(priors.shape[0]):
        out[lang] = priors[lang]
    for r in rows:
        for lang in range(priors.shape[0]):
            out[lang] += table[r, lang]


@dataclass
class LangIdModel:
    n: int
    alpha: float
    languages: tuple[LanguageTag, ...]
    counts: dict[LanguageTag, Counter]
    line_counts: dict[LanguageTag, int]
    lowercase: bool = True
    # derived
    grams: list[str] = field(init=False, repr=False)
    index: dict[str, int] = field(init=False, repr=False)
    table: np.ndarray = field(init=False, repr=False)
    priors: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.languages = tuple(sorted(self.languages))
        self._build()

    def _build(self) -> None:
        vocab: set[str] = set()
        for lang in self.languages:
            vocab.update(self.counts[lang])
        self.grams = sorted(vocab)
        self.index = {g: i for i, g in enumerate(self.grams)}
        unseen = len(self.grams)
        table = np.empty((unseen + 1, len(self.languages)), dtype=np.float64)
        for j, lang in enumerate(self.languages):
            counts = self.counts[lang]
            denom = sum(counts.values()) + self.alpha * (unseen + 1)
            column = np.full(unseen + 1, self.alpha, dtype=np.float64)
            for g, c in counts.items():
                column[self.index[g]] += c
            table[:, j] = np.log(column / denom)
        self.table = table
        total_lines = sum(self.line_counts[lang] for lang in self.languages)
        self.priors = np.array(
            [math.log(self.line_counts[lang] / total_lines) for lang in self.languages], dtype=np.float64
        )
        self._packed = None

    def language_index(self, lang: LanguageTag) -> int:
        try:
            return self.languages.index(lang)
        except ValueError:
            raise UnknownLanguage(f"language {lang} is not in the model ({', '.join(map(str, self.languages))})") from None

    def prepare(self, text: str) -> str:
        return text.lower() if self.lowercase else text

    def rows(self, text: str) -> np.ndarray:
        unseen = len(self.grams)
        get = self.index.get
        return np.fromiter((get(g, unseen) for g in ngrams(self.prepare(text), self.n)), dtype=np.int64)

    def scores(self, text: str) -> np.ndarray:
        if not text:
            raise EmptyText("cannot identify the language of an empty text")
        out = np.empty(len(self.languages), dtype=np.float64)
        _accumulate(self.rows(text), self.table, self.priors, out)
        return out

    def predict(self, text: str) -> list[tuple[LanguageTag, float]]:
        """Languages ranked by score, best first; ties go to the smaller code."""
        scores = self.scores(text)
        order = sorted(range(len(self.languages)), key=lambda j: (-scores[j], self.languages[j].code))
        return [(self.languages[j], float(scores[j])) for j in order]

    def gate(self, text: str, expected: LanguageTag) -> bool:
        """True iff ``expected`` is ranked first.

        Smoothing keeps every posterior strictly positive, so the ``> 0``
        probability floor holds automatically for the winner.
        """
        want = self.language_index(expected)
        scores = self.scores(text)
        best = scores[want]
        for j in range(len(scores)):
            if j != want and (scores[j] > best or (scores[j] == best and j < want)):
                return False
        return True

    def packed_lookup(self) -> tuple[np.ndarray, np.ndarray, int]:
        """Open-addressing hash table (keys, rows, bits) over packed n-grams, for the batch kernel."""
        if self.n > MAX_PACKED_ORDER:
            raise ValueError(f"packed lookup supports n <= {MAX_PACKED_ORDER}, model has n={self.n}")
        if self._packed is None:
            bits = max(4, (2 * len(self.grams)).bit_length())
            mask = (1 << bits) - 1
            keys = np.zeros(1 << bits, dtype=np.int64)
            rows = np.zeros(1 << bits, dtype=np.int64)
            for row, gram in enumerate(self.grams):
                key = pack_ngram(gram)
                slot = hash_slot(key, bits)
                while keys[slot]:
                    slot = (slot + 1) & mask
                keys[slot] = key
                rows[slot] = row
            self._packed = (keys, rows, bits)
        return self._packed

    # serialization

    def save(self, path: str | Path) -> None:
        path = Path(path)
        opener = gzip.open if path.suffix == ".gz" else open
        with opener(path, "wt", encoding="utf-8", newline="\n") as fh:
            header = {
                "format": "bitext-forge-langid",
                "version": FORMAT_VERSION,
                "n": self.n,
                "alpha": self.alpha,
                "lowercase": self.lowercase,
                "languages": [lang.code for lang in self.languages],
                "line_counts": {lang.code: self.line_counts[lang] for lang in self.languages},
            }
            fh.write(json.dumps(header, sort_keys=True) + "\n")
            for lang in self.languages:
                counts = self.counts[lang]
                fh.write(f"#lang\t{lang.code}\t{len(counts)}\n")
                for gram in sorted(counts):
                    fh.write(f"{json.dumps(gram, ensure_ascii=False)}\t{counts[gram]}\n")

    @classmethod
    def load(cls, path: str | Path) -> LangIdModel:
        path = Path(path)
        opener = gzip.open if path.suffix == ".gz" else open
        with opener(path, "rt", encoding="utf-8", newline="\n") as fh:
            try:
                header = json.loads(fh.readline())
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}: bad langid header: {exc}") from None
            if header.get("format") != "bitext-forge-langid":
                raise FormatError(f"{path}: not a langid model file")
            if header.get("version") != FORMAT_VERSION:
                raise FormatError(f"{path}: unsupported langid model version {header.get('version')}")
            languages = [parse_language(c) for c in header["languages"]]
            counts: dict[LanguageTag, Counter] = {}
            current: Counter | None = None
            for line in fh:
                line = line.rstrip("\n")
                if line.startswith("#lang\t"):
                    current = counts.setdefault(parse_language(line.split("\t")[1]), Counter())
                    continue
                gram, count = line.rsplit("\t", 1)
                if current is None:
                    raise FormatError(f"{path}: n-gram entry before any language section")
                current[json.loads(gram)] = int(count)
        missing = [lang for lang in languages if lang not in counts]
        if missing:
            raise FormatError(f"{path}: no table for {', '.join(map(str, missing))}")
        return cls(
            n=int(header["n"]),
            alpha=float(header["alpha"]),
            languages=tuple(languages),
            counts=counts,
            line_counts={lang: int(header["line_counts"][lang.code]) for lang in languages},
            lowercase=bool(header["lowercase"]),
        )


def train_langid(
    corpora: Mapping[LanguageTag | str, Iterable[str]],
    n: int = 3,
    alpha: float = 0.1,
    lowercase: bool = True,
) -> LangIdModel:
    """Count padded character n-grams per language; priors follow line counts."""
    if not alpha > 0:
        raise InvalidSmoothing(f"alpha must be > 0, got {alpha}")
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    if not corpora:
        raise EmptyCorpus("need at least one language")
    counts: dict[LanguageTag, Counter] = {}
    line_counts: dict[LanguageTag, int] = {}
    for key, lines in corpora.items():
        lang = key if isinstance(key, LanguageTag) else parse_language(key)
        counter: Counter = Counter()
        used = 0
        for line in lines:
            line = line.rstrip("\n")
            if not line:
                continue
            used += 1
            counter.update(ngrams(line.lower() if lowercase else line, n))
        if used == 0:
            raise EmptyCorpus(f"corpus for {lang} has no non-empty lines")
        counts[lang] = counter
        line_counts[lang] = used
    return LangIdModel(n=n, alpha=alpha, languages=tuple(counts), counts=counts, line_counts=line_counts, lowercase=lowercase)


def predict(model: LangIdModel, text: str) -> list[tuple[LanguageTag, float]]:
    return model.predict(text)


def gate(model: LangIdModel, text: str, expected: LanguageTag) -> bool:
    return model.gate(text, expected)
