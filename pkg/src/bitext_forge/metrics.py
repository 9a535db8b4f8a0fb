"""chrF and BLEU, configured like the common sacre-style scorer (chrF2 with space:no, BLEU with 13a + exp smoothing)."""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from bitext_forge import __version__
from bitext_forge.errors import EmptyInput, EmptyReference, EmptyReferenceSet, LineCountMismatch

REPORT_DECIMALS = 6


@dataclass(frozen=True)
class MetricScore:
    value: float
    fingerprint: str

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 100.0 + 1e-9:
            raise ValueError(f"score {self.value} outside [0, 100]")


# -- chrF --------------------------------------------------------------------


@dataclass(frozen=True)
class ChrfConfig:
    char_order: int = 6
    word_order: int = 0
    beta: float = 2.0
    effective_order: bool = True
    whitespace: bool = False
    lowercase: bool = False

    def fingerprint(self, nrefs: int = 1) -> str:
        return (
            f"chrF{self.beta:g}|nrefs:{nrefs}|case:{'lc' if self.lowercase else 'mixed'}"
            f"|eff:{'yes' if self.effective_order else 'no'}|nc:{self.char_order}|nw:{self.word_order}"
            f"|space:{'yes' if self.whitespace else 'no'}|version:{__version__}"
        )


_PUNCTS = frozenset("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~")


def _chrf_words(text: str) -> list[str]:
    # word-level n-grams split one leading or trailing punctuation mark off each word
    out: list[str] = []
    for w in text.split():
        if len(w) > 1 and w[-1] in _PUNCTS:
            out += [w[:-1], w[-1]]
        elif len(w) > 1 and w[0] in _PUNCTS:
            out += [w[0], w[1:]]
        else:
            out.append(w)
    return out


def _chrf_ngrams(text: str, cfg: ChrfConfig) -> list[Counter]:
    if cfg.lowercase:
        text = text.lower()
    chars = text if cfg.whitespace else "".join(text.split())
    grams = [Counter(chars[i : i + n] for i in range(len(chars) - n + 1)) for n in range(1, cfg.char_order + 1)]
    if cfg.word_order:
        words = _chrf_words(text)
        grams += [
            Counter(" ".join(words[i : i + n]) for i in range(len(words) - n + 1))
            for n in range(1, cfg.word_order + 1)
        ]
    return grams


def chrf_statistics(hypothesis: str, reference: str, cfg: ChrfConfig = ChrfConfig()) -> list[int]:
    """Flat [hyp, ref, match] triples per order."""
    stats: list[int] = []
    for h, r in zip(_chrf_ngrams(hypothesis, cfg), _chrf_ngrams(reference, cfg)):
        match = sum(min(c, r[g]) for g, c in h.items() if g in r)
        # hypothesis n-grams do not count when the reference has none of that order
        stats += [sum(h.values()) if r else 0, sum(r.values()), match]
    return stats


def chrf_from_statistics(stats: Sequence[int], cfg: ChrfConfig = ChrfConfig()) -> float:
    factor = cfg.beta**2
    orders = len(stats) // 3
    avg_p = avg_r = 0.0
    used = 0
    for i in range(orders):
        n_hyp, n_ref, n_match = stats[3 * i : 3 * i + 3]
        if cfg.effective_order and not (n_hyp > 0 and n_ref > 0):
            continue
        avg_p += n_match / n_hyp if n_hyp > 0 else 0.0
        avg_r += n_match / n_ref if n_ref > 0 else 0.0
        used += 1
    if used == 0:
        return 0.0
    avg_p /= used
    avg_r /= used
    if avg_p + avg_r == 0:
        return 0.0
    return 100.0 * (1 + factor) * avg_p * avg_r / (factor * avg_p + avg_r)


def _check_reference(reference: str, cfg: ChrfConfig) -> None:
    if not (reference if cfg.whitespace else reference.strip()):
        raise EmptyReference("chrF needs a non-empty reference")


def chrf(hypothesis: str, reference: str, cfg: ChrfConfig = ChrfConfig()) -> MetricScore:
    _check_reference(reference, cfg)
    return MetricScore(chrf_from_statistics(chrf_statistics(hypothesis, reference, cfg), cfg), cfg.fingerprint())


def corpus_chrf(hypotheses: Sequence[str], references: Sequence[str], cfg: ChrfConfig = ChrfConfig()) -> MetricScore:
    """Corpus chrF from statistics summed over segments."""
    if len(hypotheses) != len(references):
        raise LineCountMismatch(f"{len(hypotheses)} hypotheses vs {len(references)} references")
    if not references:
        raise EmptyInput("no segments to score")
    total = [0] * (3 * (cfg.char_order + cfg.word_order))
    for h, r in zip(hypotheses, references):
        _check_reference(r, cfg)
        total = [a + b for a, b in zip(total, chrf_statistics(h, r, cfg))]
    return MetricScore(chrf_from_statistics(total, cfg), cfg.fingerprint())


# -- BLEU --------------------------------------------------------------------


@dataclass(frozen=True)
class BleuConfig:
    max_order: int = 4
    tokenizer: str = "13a"
    smoothing: str = "exp"
    lowercase: bool = False

    def __post_init__(self) -> None:
        if self.tokenizer not in ("13a", "none"):
            raise ValueError(f"unknown tokenizer {self.tokenizer!r}")
        if self.smoothing not in ("exp", "none"):
            raise ValueError(f"unknown smoothing {self.smoothing!r}")

    def fingerprint(self, nrefs: int = 1) -> str:
        return (
            f"BLEU|nrefs:{nrefs}|case:{'lc' if self.lowercase else 'mixed'}|eff:no"
            f"|tok:{self.tokenizer}|smooth:{self.smoothing}|version:{__version__}"
        )


_13A_RULES = [
    (re.compile(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])"), r" \1 "),
    (re.compile(r"([^0-9])([\.,])"), r"\1 \2 "),
    (re.compile(r"([\.,])([^0-9])"), r" \1 \2"),
    (re.compile(r"([0-9])(-)"), r"\1 \2 "),
]


@lru_cache(maxsize=1 << 16)
def tokenize_13a(line: str) -> str:
    """mteval-v13a tokenization: split off punctuation and symbols, keep decimals and thousands intact."""
    line = line.replace("<skipped>", "").replace("-\n", "").replace("\n", " ")
    if "&" in line:
        line = line.replace("&quot;", '"').replace("&amp;", "&").replace("&lt;", "<").replace("&gt;", ">")
    line = f" {line} "
    for pattern, repl in _13A_RULES:
        line = pattern.sub(repl, line)
    return " ".join(line.split())


def _bleu_tokens(text: str, cfg: BleuConfig) -> list[str]:
    if cfg.lowercase:
        text = text.lower()
    text = text.rstrip()
    return (tokenize_13a(text) if cfg.tokenizer == "13a" else text).split()


def _word_ngrams(tokens: list[str], max_order: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for n in range(1, max_order + 1) for i in range(len(tokens) - n + 1))


def _closest_length(hyp_len: int, ref_lens: Sequence[int]) -> int:
    # ties go to the shorter reference
    return min(ref_lens, key=lambda r: (abs(hyp_len - r), r))


@dataclass
class BleuStats:
    correct: list[int]
    total: list[int]
    hyp_len: int
    ref_len: int

    def __add__(self, other: BleuStats) -> BleuStats:
        return BleuStats(
            [a + b for a, b in zip(self.correct, other.correct)],
            [a + b for a, b in zip(self.total, other.total)],
            self.hyp_len + other.hyp_len,
            self.ref_len + other.ref_len,
        )


def bleu_statistics(hypothesis: str, references: Sequence[str], cfg: BleuConfig = BleuConfig()) -> BleuStats:
    if not references:
        raise EmptyReferenceSet("BLEU needs at least one reference")
    hyp = _bleu_tokens(hypothesis, cfg)
    ref_max: Counter = Counter()
    ref_lens = []
    for ref in references:
        toks = _bleu_tokens(ref, cfg)
        ref_lens.append(len(toks))
        ref_max |= _word_ngrams(toks, cfg.max_order)
    correct = [0] * cfg.max_order
    total = [0] * cfg.max_order
    for gram, count in _word_ngrams(hyp, cfg.max_order).items():
        total[len(gram) - 1] += count
        if gram in ref_max:
            correct[len(gram) - 1] += min(count, ref_max[gram])
    return BleuStats(correct, total, len(hyp), _closest_length(len(hyp), ref_lens))


def _floored_log(x: float) -> float:
    return -9999999999.0 if x == 0.0 else math.log(x)


def bleu_from_statistics(stats: BleuStats, cfg: BleuConfig = BleuConfig()) -> float:
    h, r = stats.hyp_len, stats.ref_len
    bp = 1.0 if h >= r else (math.exp(1 - r / h) if h > 0 else 0.0)
    if not any(stats.correct):
        return 0.0
    precisions = [0.0] * cfg.max_order
    smooth = 1.0
    for n in range(cfg.max_order):
        if stats.total[n] == 0:
            break
        if stats.correct[n] == 0:
            if cfg.smoothing == "exp":
                smooth *= 2
                precisions[n] = 100.0 / (smooth * stats.total[n])
        else:
            precisions[n] = 100.0 * stats.correct[n] / stats.total[n]
    return bp * math.exp(sum(_floored_log(p) for p in precisions) / cfg.max_order)


def bleu(hypothesis: str, references: Sequence[str], cfg: BleuConfig = BleuConfig()) -> MetricScore:
    if isinstance(references, str):
        references = [references]
    value = bleu_from_statistics(bleu_statistics(hypothesis, references, cfg), cfg)
    return MetricScore(min(value, 100.0), cfg.fingerprint(len(references)))


def corpus_bleu(
    hypotheses: Sequence[str], references: Sequence[Sequence[str]], cfg: BleuConfig = BleuConfig()
) -> MetricScore:
    """``references[k]`` holds the k-th reference for every segment (one stream per reference set)."""
    if not references:
        raise EmptyReferenceSet("BLEU needs at least one reference stream")
    for stream in references:
        if len(stream) != len(hypotheses):
            raise LineCountMismatch(f"{len(hypotheses)} hypotheses vs {len(stream)} references")
    if not hypotheses:
        raise EmptyInput("no segments to score")
    acc = BleuStats([0] * cfg.max_order, [0] * cfg.max_order, 0, 0)
    for i, hyp in enumerate(hypotheses):
        acc = acc + bleu_statistics(hyp, [stream[i] for stream in references], cfg)
    return MetricScore(min(bleu_from_statistics(acc, cfg), 100.0), cfg.fingerprint(len(references)))


# -- file scoring ------------------------------------------------------------

METRICS = ("chrf", "bleu")


def _read_lines(path: str | Path) -> list[str]:
    with Path(path).open(encoding="utf-8", newline="\n") as fh:
        return [line.rstrip("\n") for line in fh]


def score_lines(
    hypotheses: Sequence[str],
    references: Sequence[str],
    metric: str = "chrf",
    cfg: ChrfConfig | BleuConfig | None = None,
    threads: int = 1,
) -> dict:
    """Segment and corpus scores as the JSON-ready report (values rounded to 6 decimals)."""
    if len(hypotheses) != len(references):
        raise LineCountMismatch(f"hypothesis has {len(hypotheses)} lines, reference has {len(references)}")
    if not hypotheses:
        raise EmptyInput("nothing to score: both inputs are empty")
    if metric == "chrf":
        cfg = cfg or ChrfConfig()
        seg = lambda pair: chrf(pair[0], pair[1], cfg).value  # noqa: E731
        corpus = corpus_chrf(hypotheses, references, cfg)
    elif metric == "bleu":
        cfg = cfg or BleuConfig()
        seg = lambda pair: bleu(pair[0], [pair[1]], cfg).value  # noqa: E731
        corpus = corpus_bleu(hypotheses, [references], cfg)
    else:
        raise ValueError(f"unknown metric {metric!r}; choose from {', '.join(METRICS)}")
    pairs = list(zip(hypotheses, references))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            segments = list(pool.map(seg, pairs, chunksize=256))
    else:
        segments = [seg(p) for p in pairs]
    return {
        "metric": metric,
        "config": corpus.fingerprint,
        "corpus": round(corpus.value, REPORT_DECIMALS),
        "segments": [round(s, REPORT_DECIMALS) for s in segments],
        "comet": None,
    }


def score_file(
    hyp_path: str | Path,
    ref_path: str | Path,
    metric: str = "chrf",
    cfg: ChrfConfig | BleuConfig | None = None,
    threads: int = 1,
) -> dict:
    return score_lines(_read_lines(hyp_path), _read_lines(ref_path), metric, cfg, threads)


def format_report(report: dict) -> str:
    """Stable JSON with fixed 6-decimal floats."""
    def num(x: float) -> str:
        return f"{x:.{REPORT_DECIMALS}f}"

    segments = ", ".join(num(s) for s in report["segments"])
    return (
        "{"
        f'"metric": {json.dumps(report["metric"])}, '
        f'"config": {json.dumps(report["config"])}, '
        f'"corpus": {num(report["corpus"])}, '
        f'"segments": [{segments}], '
        f'"comet": {json.dumps(report["comet"])}'
        "}\n"
    )
