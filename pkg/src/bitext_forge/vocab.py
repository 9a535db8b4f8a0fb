"""Unigram subword vocabularies: training, Viterbi tokenization, sizing and comparison.

Spaces are ordinary symbols during training and tokenization, but a piece
may only contain a space as its first character (a word-initial piece, like
``" kot"``). In files and printed output the space is shown as ``▁``.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from bitext_forge.core import LanguageTag
from bitext_forge.errors import EmptyEvalSet, FormatError, TargetTooSmall

MARKER = "▁"
UNK = "<unk>"
PER_LANGUAGE_VOCAB = 16000
MAX_PIECE_LEN = 8
# penalty below the rarest piece for characters never seen in training
UNK_PENALTY = 10.0

_SPECIAL_FORM = re.compile(r"<[^<>\s]+>|>>[a-z]{3}<<")
_CHUNK = re.compile(r" ?[^ ]+| ")


def vocab_size_for(num_languages: int, per_language: int = PER_LANGUAGE_VOCAB) -> int:
    """Vocabulary size giving every supported language the same share."""
    if num_languages < 1:
        raise ValueError("need at least one language")
    return num_languages * per_language


def chunks(text: str) -> list[str]:
    """Split into word chunks (each word keeps its leading space); joins back to ``text``."""
    return _CHUNK.findall(text)


@dataclass
class Vocabulary:
    pieces: list[tuple[str, float]]
    specials: tuple[str, ...] = (UNK,)
    _logp: dict[str, float] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if UNK not in self.specials:
            self.specials = (UNK, *self.specials)
        self._logp = dict(self.pieces)
        self._max_len = max((len(p) for p in self._logp), default=1)
        self._unk_logp = min(self._logp.values(), default=0.0) - UNK_PENALTY
        self._special_re = None
        user = [s for s in self.specials if s != UNK]
        if user:
            alternation = "|".join(re.escape(s) for s in sorted(user, key=lambda s: (-len(s), s)))
            self._special_re = re.compile(f"({alternation})")
        self._chunk_cache = lru_cache(maxsize=1 << 18)(self._segment)

    def __len__(self) -> int:
        return len(self.pieces) + len(self.specials)

    def __contains__(self, piece: str) -> bool:
        return piece in self._logp or piece in self.specials

    def piece_strings(self) -> set[str]:
        return set(self._logp) | set(self.specials)

    def logprob(self, piece: str) -> float:
        return self._logp[piece]

    def is_unknown(self, piece: str) -> bool:
        return piece not in self._logp and piece not in self.specials

    def _segment(self, text: str) -> tuple[str, ...]:
        return tuple(viterbi(text, self._logp, self._max_len, self._unk_logp))

    def tokenize(self, text: str) -> list[str]:
        """Max-likelihood segmentation; ``"".join(result) == text`` always holds."""
        if not text:
            return []
        parts = self._special_re.split(text) if self._special_re is not None else [text]
        out: list[str] = []
        for i, part in enumerate(parts):
            if i % 2:
                out.append(part)
                continue
            for chunk in chunks(part):
                out.extend(self._chunk_cache(chunk))
        return out

    # file format: "piece<TAB>logprob" per line, specials first

    def dumps(self) -> str:
        lines = [f"{escape_piece(s)}\t0" for s in self.specials]
        lines += [f"{escape_piece(p)}\t{lp!r}" for p, lp in self.pieces]
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8", newline="\n")

    @classmethod
    def loads(cls, text: str) -> Vocabulary:
        specials: list[str] = []
        pieces: list[tuple[str, float]] = []
        for lineno, line in enumerate(text.split("\n"), 1):
            if not line:
                continue
            try:
                raw, score = line.rsplit("\t", 1)
                value = float(score)
            except ValueError:
                raise FormatError(f"vocabulary line {lineno}: expected 'piece<TAB>logprob'") from None
            piece = unescape_piece(raw)
            if not pieces and value == 0.0 and _SPECIAL_FORM.fullmatch(piece):
                specials.append(piece)
            else:
                pieces.append((piece, value))
        return cls(pieces, tuple(specials) or (UNK,))

    @classmethod
    def load(cls, path: str | Path) -> Vocabulary:
        return cls.loads(Path(path).read_text(encoding="utf-8"))


_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r", MARKER: "\\u2581", " ": MARKER}
_UNESCAPES = {"\\\\": "\\", "\\t": "\t", "\\n": "\n", "\\r": "\r", "\\u2581": MARKER, MARKER: " "}
_UNESCAPE_RE = re.compile(r"\\u2581|\\[\\tnr]|" + MARKER)


def escape_piece(piece: str) -> str:
    """File/display form: spaces become ``▁``; a literal ``▁`` and control characters are escaped."""
    return "".join(_ESCAPES.get(c, c) for c in piece)


def unescape_piece(text: str) -> str:
    return _UNESCAPE_RE.sub(lambda m: _UNESCAPES[m.group()], text)


def viterbi(text: str, logp: Mapping[str, float], max_len: int, unk_logp: float, skip_whole: bool = False) -> list[str]:
    """Best segmentation of ``text``.

    Highest total log-probability wins; ties go to fewer pieces, then to the
    longest first piece (recursively). A character outside the vocabulary
    becomes a one-character piece scored ``unk_logp``. ``skip_whole`` forbids
    using ``text`` itself as a single piece.
    """
    n = len(text)
    score = [0.0] * (n + 1)
    count = [0] * (n + 1)
    step = [0] * (n + 1)
    get = logp.get
    for i in range(n - 1, -1, -1):
        best_s = -math.inf
        best_c = 0
        best_l = 0
        for length in range(1, min(max_len, n - i) + 1):
            lp = get(text[i : i + length])
            if lp is None:
                if length != 1:
                    continue
                lp = unk_logp
            if skip_whole and i == 0 and length == n:
                continue
            s = lp + score[i + length]
            c = count[i + length] + 1
            if s > best_s or (s == best_s and (c < best_c or (c == best_c and length > best_l))):
                best_s, best_c, best_l = s, c, length
        score[i], count[i], step[i] = best_s, best_c, best_l
    out = []
    i = 0
    while i < n:
        out.append(text[i : i + step[i]])
        i += step[i]
    return out


def _segment_score(pieces: Sequence[str], logp: Mapping[str, float], unk_logp: float) -> float:
    return sum(logp.get(p, unk_logp) for p in pieces)


def _normalize(counts: Mapping[str, float]) -> dict[str, float]:
    total = sum(counts.values())
    return {p: math.log(c / total) for p, c in counts.items()}


def _viterbi_counts(words: Mapping[str, int], logp: dict[str, float], max_len: int) -> Counter:
    counts: Counter = Counter()
    unk = min(logp.values()) - UNK_PENALTY
    for word, freq in words.items():
        for piece in viterbi(word, logp, max_len, unk):
            counts[piece] += freq
    return counts


def _reestimate(words: Mapping[str, int], logp: dict[str, float], max_len: int) -> dict[str, float]:
    counts = _viterbi_counts(words, logp, max_len)
    # unused pieces keep a small floor so they stay tokenizable until pruned
    return _normalize({p: counts.get(p, 0) or 0.5 for p in logp})


def train_unigram_vocab(
    lines: Iterable[str],
    target_size: int,
    seed_multiplier: float = 4.0,
    prune_fraction: float = 0.2,
    *,
    specials: Sequence[str] = (UNK,),
    max_piece_len: int = MAX_PIECE_LEN,
) -> Vocabulary:
    """Train a unigram vocabulary of at most ``target_size`` pieces (specials included).

    Seeds with every character plus the most frequent substrings, then
    alternates Viterbi re-estimation with pruning the pieces whose removal
    costs the least likelihood. Single characters are never pruned.
    """
    specials = tuple(dict.fromkeys((UNK, *specials)))
    words: Counter = Counter()
    chars: Counter = Counter()
    n_lines = 0
    for line in lines:
        line = line.rstrip("\n")
        if not line:
            continue
        n_lines += 1
        words.update(chunks(line))
    if n_lines == 0:
        raise EmptyEvalSet("no training text")
    for word, freq in words.items():
        for c in word:
            chars[c] += freq
    if target_size < len(chars) + len(specials):
        raise TargetTooSmall(
            f"target size {target_size} is below alphabet ({len(chars)}) plus specials ({len(specials)})"
        )

    subs: Counter = Counter()
    for word, freq in words.items():
        for i in range(len(word)):
            for j in range(i + 2, min(len(word), i + max_piece_len) + 1):
                subs[word[i:j]] += freq
    seed_size = max(0, int(seed_multiplier * target_size) - len(chars))
    seeds = sorted(subs.items(), key=lambda kv: (-kv[1], kv[0]))[:seed_size]
    logp = _normalize(dict(sorted(chars.items())) | dict(seeds))

    budget = target_size - len(specials)
    while True:
        logp = _reestimate(words, logp, max_piece_len)
        if len(logp) <= budget:
            break
        counts = _viterbi_counts(words, logp, max_piece_len)
        removable = [p for p in logp if len(p) > 1]
        losses = []
        unk = min(logp.values()) - UNK_PENALTY
        for piece in removable:
            used = counts.get(piece, 0)
            if used:
                alt = _segment_score(viterbi(piece, logp, max_piece_len, unk, skip_whole=True), logp, unk)
                loss = used * (logp[piece] - alt)
            else:
                loss = 0.0
            losses.append((loss, piece))
        losses.sort()
        n_remove = min(max(1, math.ceil(prune_fraction * len(removable))), len(logp) - budget)
        for _, piece in losses[:n_remove]:
            del logp[piece]

    ordered = sorted(logp.items(), key=lambda kv: (-kv[1], kv[0]))
    return Vocabulary(ordered, specials)


def tokenize(v: Vocabulary, text: str) -> list[str]:
    return v.tokenize(text)


def detokenize(pieces: Iterable[str]) -> str:
    return "".join(pieces)


def vocab_overlap(a: Vocabulary, b: Vocabulary) -> float:
    """Shared piece strings as a percentage of the smaller vocabulary."""
    pa, pb = a.piece_strings(), b.piece_strings()
    smaller = min(len(pa), len(pb))
    if smaller == 0:
        return 0.0
    return 100.0 * len(pa & pb) / smaller


@dataclass(frozen=True)
class TokenizationStats:
    totals: dict[LanguageTag, int]
    mean: float
    std: float


def tokenization_stats(v: Vocabulary, eval_sets: Mapping[LanguageTag, Iterable[str]]) -> TokenizationStats:
    """Total token count per language with the mean and population std across languages."""
    if not eval_sets:
        raise EmptyEvalSet("no evaluation sets given")
    totals = {}
    for lang, lines in eval_sets.items():
        lines = [line.rstrip("\n") for line in lines]
        if not any(lines):
            raise EmptyEvalSet(f"evaluation set for {lang} is empty")
        totals[lang] = sum(len(v.tokenize(line)) for line in lines)
    values = np.array(list(totals.values()), dtype=np.float64)
    return TokenizationStats(totals, float(values.mean()), float(values.std(ddof=0)))
