"""Corpus ingestion, either-side deduplication, directed datasets and tokenizer sampling."""

from __future__ import annotations

import enum
import hashlib
import itertools
import logging
from collections import Counter
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO

import numpy as np

from bitext_forge.core import Direction, LanguageTag, SentencePair, parse_language
from bitext_forge.errors import BitextForgeError, EmptyCorpus, FormatError

log = logging.getLogger(__name__)

PROBE_LINES = 1000


# -- TSV ingestion -----------------------------------------------------------


@dataclass
class IngestReport:
    read: int = 0
    malformed: int = 0
    malformed_lines: list[int] = field(default_factory=list)

    @property
    def accepted(self) -> int:
        return self.read - self.malformed


def parse_tsv_line(
    line: str,
    src_lang: LanguageTag | None,
    tgt_lang: LanguageTag | None,
    origin: str | None = None,
) -> SentencePair | None:
    """One TSV line to a pair, or ``None`` if malformed.

    Two fields are ``source<TAB>target`` (languages come from the caller);
    four are ``src_lang<TAB>tgt_lang<TAB>source<TAB>target``. Anything else,
    an empty text, or an unusable language pair is malformed.
    """
    fields = line.rstrip("\n").rstrip("\r").split("\t")
    try:
        if len(fields) == 2:
            if src_lang is None or tgt_lang is None:
                return None
            s_lang, t_lang = src_lang, tgt_lang
            src, tgt = fields
        elif len(fields) == 4:
            s_lang, t_lang = parse_language(fields[0]), parse_language(fields[1])
            src, tgt = fields[2], fields[3]
        else:
            return None
        if not src.strip() or not tgt.strip():
            return None
        return SentencePair(s_lang, t_lang, src, tgt, origin)
    except BitextForgeError:
        return None


def iter_tsv_records(
    lines: Iterable[str],
    src_lang: LanguageTag | None = None,
    tgt_lang: LanguageTag | None = None,
    *,
    header: bool = False,
    origin: str | None = None,
    report: IngestReport | None = None,
) -> Iterator[tuple[str, SentencePair]]:
    """Like ``iter_tsv`` but also yields each accepted line (without its newline)."""
    report = report if report is not None else IngestReport()
    it = (line.rstrip("\n").rstrip("\r") for line in lines)
    if header:
        next(it, None)
    head = list(itertools.islice(it, PROBE_LINES))
    parsed = [parse_tsv_line(line, src_lang, tgt_lang, origin) for line in head]
    bad = sum(p is None for p in parsed)
    if head and bad * 2 > len(head):
        raise FormatError(f"{bad} of the first {len(head)} lines are malformed")

    lineno = 1 if header else 0
    rest = ((line, parse_tsv_line(line, src_lang, tgt_lang, origin)) for line in it)
    for line, pair in itertools.chain(zip(head, parsed), rest):
        lineno += 1
        report.read += 1
        if pair is None:
            report.malformed += 1
            if len(report.malformed_lines) < 100:
                report.malformed_lines.append(lineno)
            continue
        yield line, pair


def iter_tsv(
    lines: Iterable[str],
    src_lang: LanguageTag | None = None,
    tgt_lang: LanguageTag | None = None,
    *,
    header: bool = False,
    origin: str | None = None,
    report: IngestReport | None = None,
) -> Iterator[SentencePair]:
    """Stream pairs from TSV lines, counting malformed lines in ``report``.

    Raises FormatError when more than half of the first 1000 lines are
    malformed (checked before anything is yielded).
    """
    for _, pair in iter_tsv_records(lines, src_lang, tgt_lang, header=header, origin=origin, report=report):
        yield pair


def ingest_tsv(
    path: str | Path,
    src_lang: LanguageTag | None = None,
    tgt_lang: LanguageTag | None = None,
    *,
    header: bool = False,
    report: IngestReport | None = None,
) -> Iterator[SentencePair]:
    """Stream sentence pairs from a UTF-8 TSV file (see ``iter_tsv``)."""
    path = Path(path)
    with path.open(encoding="utf-8", newline="\n") as fh:
        yield from iter_tsv(fh, src_lang, tgt_lang, header=header, origin=path.stem, report=report)


def format_tsv_line(pair: SentencePair, with_langs: bool) -> str:
    if with_langs:
        return f"{pair.source_lang}\t{pair.target_lang}\t{pair.source_text}\t{pair.target_text}\n"
    return f"{pair.source_text}\t{pair.target_text}\n"


def write_tsv(pairs: Iterable[SentencePair], out: IO[str], with_langs: bool = False) -> int:
    n = 0
    for pair in pairs:
        out.write(format_tsv_line(pair, with_langs))
        n += 1
    return n


# -- deduplication -----------------------------------------------------------


def _key(text: str) -> bytes:
    return hashlib.blake2b(text.encode("utf-8"), digest_size=16).digest()


@dataclass
class DedupState:
    """Seen-sets of kept sources and targets (128-bit content hashes)."""

    seen_sources: set[bytes] = field(default_factory=set)
    seen_targets: set[bytes] = field(default_factory=set)
    kept: int = 0
    dropped: int = 0

    @property
    def processed(self) -> int:
        return self.kept + self.dropped

    def offer(self, source: str, target: str) -> bool:
        """Keep the pair unless its source or its target was kept before."""
        s, t = _key(source), _key(target)
        if s in self.seen_sources or t in self.seen_targets:
            self.dropped += 1
            return False
        self.seen_sources.add(s)
        self.seen_targets.add(t)
        self.kept += 1
        return True


def iter_dedup(pairs: Iterable[SentencePair], state: DedupState | None = None) -> Iterator[SentencePair]:
    state = state if state is not None else DedupState()
    for pair in pairs:
        if state.offer(pair.source_text, pair.target_text):
            yield pair


def dedup(pairs: Iterable[SentencePair], state: DedupState | None = None) -> tuple[list[SentencePair], DedupState]:
    """First occurrence wins; a later pair repeating either side is dropped.

    Only kept pairs register their sides, so a dropped pair never blocks
    anything downstream.
    """
    state = state if state is not None else DedupState()
    return list(iter_dedup(pairs, state)), state


def dedup_lines(lines: Iterable[str]) -> list[str]:
    """Exact-duplicate removal for monolingual corpora, first occurrence wins."""
    seen: set[bytes] = set()
    out = []
    for line in lines:
        k = _key(line)
        if k not in seen:
            seen.add(k)
            out.append(line)
    return out


# -- directed datasets -------------------------------------------------------


@dataclass(frozen=True, slots=True)
class DirectedExample:
    direction: Direction
    source_text: str
    target_text: str


@dataclass
class DirectedDataset:
    examples: list[DirectedExample]

    @property
    def counts(self) -> Counter:
        return Counter(ex.direction for ex in self.examples)

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self) -> Iterator[DirectedExample]:
        return iter(self.examples)


def expand_directed(pairs: Iterable[SentencePair], use_both_directions: bool = True) -> DirectedDataset:
    """Each pair gives A->B, followed by B->A when ``use_both_directions``."""
    examples = []
    for p in pairs:
        examples.append(DirectedExample(p.direction, p.source_text, p.target_text))
        if use_both_directions:
            examples.append(DirectedExample(p.direction.reversed(), p.target_text, p.source_text))
    return DirectedDataset(examples)


def exclude_directions(ds: DirectedDataset, excluded: Iterable[Direction]) -> DirectedDataset:
    """Drop every example whose direction is excluded; the rest keep their order."""
    excluded = set(excluded)
    kept = [ex for ex in ds.examples if ex.direction not in excluded]
    removed = len(ds.examples) - len(kept)
    log.info("excluded %d examples over %d directions", removed, len(excluded))
    return DirectedDataset(kept)


def read_directions(path: str | Path) -> list[Direction]:
    """Direction file: one ``src-tgt`` per line; blank lines and ``#`` comments ignored."""
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(Direction.parse(line))
    return out


# -- sampling ----------------------------------------------------------------


class Strategy(enum.Enum):
    EQUAL = "equal"
    PROPORTIONAL = "proportional"


@dataclass(frozen=True)
class SamplingSpec:
    strategy: Strategy
    total: int
    seed: int = 42

    def __post_init__(self) -> None:
        if self.total < 0:
            raise ValueError("sample total must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass
class SampleResult:
    lines: dict[LanguageTag, list[str]]
    quotas: dict[LanguageTag, int]
    warnings: list[str]


def compute_quotas(sizes: Mapping[LanguageTag, int], spec: SamplingSpec) -> tuple[dict[LanguageTag, int], list[str]]:
    """Per-language sample sizes, capped at corpus size (a warning per shortfall)."""
    if not sizes:
        raise EmptyCorpus("no corpora to sample from")
    langs = sorted(sizes)
    empty = [str(lang) for lang in langs if sizes[lang] == 0]
    if empty:
        raise EmptyCorpus(f"empty corpus for {', '.join(empty)}")
    if spec.strategy is Strategy.EQUAL:
        if spec.total < len(langs):
            raise ValueError(f"equal sampling needs total >= {len(langs)} languages, got {spec.total}")
        wanted = {lang: spec.total // len(langs) for lang in langs}
    else:
        grand = sum(sizes.values())
        exact = {lang: spec.total * sizes[lang] / grand for lang in langs}
        wanted = {lang: int(exact[lang]) for lang in langs}
        short = spec.total - sum(wanted.values())
        # largest remainder; ties resolved by language code
        by_remainder = sorted(langs, key=lambda lang: (-(exact[lang] - wanted[lang]), lang))
        for lang in by_remainder[:short]:
            wanted[lang] += 1
    warnings = []
    quotas = {}
    for lang in langs:
        quotas[lang] = min(wanted[lang], sizes[lang])
        if quotas[lang] < wanted[lang]:
            msg = f"{lang}: corpus has {sizes[lang]} lines, quota {wanted[lang]}; taking all"
            log.warning(msg)
            warnings.append(msg)
    return quotas, warnings


def choose_indices(size: int, quota: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform sample without replacement, returned in ascending (corpus) order."""
    if quota >= size:
        return np.arange(size)
    return np.sort(rng.choice(size, size=quota, replace=False))


def _rng(seed: int, lang_position: int) -> np.random.Generator:
    return np.random.default_rng([seed, lang_position])


def sample_corpus(corpora: Mapping[LanguageTag | str, Sequence[str]], spec: SamplingSpec) -> SampleResult:
    """Sample each language's lines per ``spec``; same seed gives the same sample."""
    tagged = {(k if isinstance(k, LanguageTag) else parse_language(k)): v for k, v in corpora.items()}
    quotas, warnings = compute_quotas({lang: len(lines) for lang, lines in tagged.items()}, spec)
    out = {}
    for pos, lang in enumerate(sorted(tagged)):
        lines = tagged[lang]
        idx = choose_indices(len(lines), quotas[lang], _rng(spec.seed, pos))
        out[lang] = [lines[i] for i in idx]
    return SampleResult(out, quotas, warnings)


def sample_files(
    paths: Mapping[LanguageTag, Path], spec: SamplingSpec, *, dedup_first: bool = True
) -> SampleResult:
    """Read one-sentence-per-line files, drop blank lines and (optionally) duplicates, then sample."""
    corpora = {}
    for lang, path in paths.items():
        with Path(path).open(encoding="utf-8", newline="\n") as fh:
            lines = [line.rstrip("\n") for line in fh]
        lines = [line for line in lines if line.strip()]
        corpora[lang] = dedup_lines(lines) if dedup_first else lines
    return sample_corpus(corpora, spec)
