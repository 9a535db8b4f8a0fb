"""Threshold checks over pair features, per pair and in compiled batches."""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from bitext_forge.core import LanguageTag, SentencePair
from bitext_forge.filtering import _kernel as K
from bitext_forge.filtering.config import FilterConfig
from bitext_forge.filtering.features import (
    PairFeatures,
    SideFeatures,
    levenshtein,
    mismatched_numbers,
    poisson_length_logprob,
    side_features,
    split_words,
)
from bitext_forge.filtering.whitelist import CharWhitelist, whitelist_for
from bitext_forge.langid import MAX_PACKED_ORDER, LangIdModel, LanguageGate

# Feature identifiers in reporting order; index == bit position in batch masks.
FEATURE_IDS = (
    "char_len(source)", "char_len(target)",
    "word_count(source)", "word_count(target)",
    "avg_word_len(source)", "avg_word_len(target)",
    "max_word_len(source)", "max_word_len(target)",
    "digit_ratio(source)", "digit_ratio(target)",
    "non_whitelist(source)", "non_whitelist(target)",
    "langid(source)", "langid(target)",
    "levenshtein",
    "poisson_logprob",
    "mismatched_numbers",
    "empty(source)", "empty(target)",
)  # fmt: skip


@dataclass(frozen=True, slots=True)
class FilterVerdict:
    passed: bool
    failed_features: tuple[str, ...]
    features: PairFeatures | None


def _inside(value: float, lo: float | None, hi: float | None) -> bool:
    return (lo is None or value > lo) and (hi is None or value < hi)


def _side_failures(side: SideFeatures, cfg: FilterConfig, which: str) -> list[str]:
    failed = []
    if not _inside(side.char_len, cfg.min_char_len, cfg.max_char_len):
        failed.append(f"char_len({which})")
    if not _inside(side.word_count, cfg.min_words, cfg.max_words):
        failed.append(f"word_count({which})")
    if not _inside(side.avg_word_len, None, cfg.max_avg_word_len):
        failed.append(f"avg_word_len({which})")
    if not _inside(side.max_word_len, None, cfg.max_max_word_len):
        failed.append(f"max_word_len({which})")
    if not _inside(side.digit_ratio, None, cfg.max_digit_ratio):
        failed.append(f"digit_ratio({which})")
    if cfg.max_non_whitelist is not None and side.non_whitelist_count > cfg.max_non_whitelist:
        failed.append(f"non_whitelist({which})")
    if not side.langid_pass:
        failed.append(f"langid({which})")
    return failed


def check_features(features: PairFeatures, cfg: FilterConfig) -> tuple[str, ...]:
    """Every bound violated by ``features``, in ``FEATURE_IDS`` order."""
    failed = _side_failures(features.source, cfg, "source") + _side_failures(features.target, cfg, "target")
    failed.sort(key=FEATURE_IDS.index)
    if not _inside(features.levenshtein, cfg.min_levenshtein, None):
        failed.append("levenshtein")
    if not _inside(features.poisson_logprob, cfg.min_poisson_logprob, None):
        failed.append("poisson_logprob")
    if cfg.max_mismatched_numbers is not None and features.mismatched_numbers > cfg.max_mismatched_numbers:
        failed.append("mismatched_numbers")
    return tuple(failed)


def _gate_fn(langid: LanguageGate | None, lang: LanguageTag):
    if langid is None:
        return None
    return lambda text: langid.gate(text, lang)


def _whitelist(whitelists: Mapping[LanguageTag, CharWhitelist] | None, lang: LanguageTag) -> CharWhitelist:
    if whitelists is not None and lang in whitelists:
        return whitelists[lang]
    return whitelist_for(lang)


def compute_features(
    pair: SentencePair,
    whitelists: Mapping[LanguageTag, CharWhitelist] | None = None,
    langid: LanguageGate | None = None,
) -> PairFeatures:
    src = side_features(pair.source_text, _whitelist(whitelists, pair.source_lang), _gate_fn(langid, pair.source_lang))
    tgt = side_features(pair.target_text, _whitelist(whitelists, pair.target_lang), _gate_fn(langid, pair.target_lang))
    return PairFeatures(
        source=src,
        target=tgt,
        levenshtein=levenshtein(pair.source_text, pair.target_text),
        poisson_logprob=poisson_length_logprob(src.word_count, tgt.word_count),
        mismatched_numbers=mismatched_numbers(split_words(pair.source_text), split_words(pair.target_text)),
    )


def apply_filters(
    pair: SentencePair,
    config: FilterConfig | None = None,
    whitelists: Mapping[LanguageTag, CharWhitelist] | None = None,
    langid: LanguageGate | None = None,
) -> FilterVerdict:
    """Evaluate every check on ``pair`` (no short-circuit) and return the verdict.

    ``langid=None`` disables the language gate. Whitelists default to each
    side's own language list.
    """
    config = config or FilterConfig()
    empty = [
        f"empty({which})"
        for which, text in (("source", pair.source_text), ("target", pair.target_text))
        if not split_words(text)
    ]
    if empty:
        return FilterVerdict(False, tuple(empty), None)
    features = compute_features(pair, whitelists, langid)
    failed = check_features(features, config)
    return FilterVerdict(not failed, failed, features)


# -- batch path --------------------------------------------------------------

_LOG_TABLES: list[np.ndarray] = [np.zeros(1), np.zeros(1)]


def _log_tables(size: int) -> tuple[np.ndarray, np.ndarray]:
    """ln(k) and ln(k!) for k < size, computed with the same libm calls as the scalar path."""
    ln, lnfact = _LOG_TABLES
    if ln.shape[0] < size:
        size = max(size, 2 * ln.shape[0], 1024)
        ln = np.array([math.log(k) if k else 0.0 for k in range(size)], dtype=np.float64)
        lnfact = np.array([math.lgamma(k + 1) for k in range(size)], dtype=np.float64)
        _LOG_TABLES[:] = [ln, lnfact]
    return ln, lnfact


def _encode(texts: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    offsets = np.zeros(len(texts) + 1, dtype=np.int64)
    np.cumsum(np.fromiter(map(len, texts), dtype=np.int64, count=len(texts)), out=offsets[1:])
    cps = np.frombuffer("".join(texts).encode("utf-32-le"), dtype=np.uint32)
    return cps, offsets


def _bounds(cfg: FilterConfig) -> np.ndarray:
    inf = math.inf

    def lo(v):
        return -inf if v is None else float(v)

    def hi(v):
        return inf if v is None else float(v)

    return np.array(
        [
            lo(cfg.min_char_len), hi(cfg.max_char_len), lo(cfg.min_words), hi(cfg.max_words),
            hi(cfg.max_avg_word_len), hi(cfg.max_max_word_len), hi(cfg.max_digit_ratio),
            hi(cfg.max_non_whitelist), lo(cfg.min_levenshtein), lo(cfg.min_poisson_logprob),
            hi(cfg.max_mismatched_numbers),
        ],
        dtype=np.float64,
    )  # fmt: skip


@dataclass
class BatchResult:
    """Masks hold one bit per ``FEATURE_IDS`` entry; features hold the raw values."""

    masks: np.ndarray
    features: np.ndarray

    @property
    def passed(self) -> np.ndarray:
        return self.masks == 0

    def failed_features(self, row: int) -> tuple[str, ...]:
        mask = int(self.masks[row])
        return tuple(name for bit, name in enumerate(FEATURE_IDS) if mask >> bit & 1)

    def histogram(self) -> Counter:
        hist: Counter = Counter()
        for bit, name in enumerate(FEATURE_IDS):
            count = int(np.count_nonzero(self.masks & (1 << bit)))
            if count:
                hist[name] = count
        return hist


class FilterEngine:
    """Filter configuration bound to whitelists and an optional language gate."""

    def __init__(
        self,
        config: FilterConfig | None = None,
        whitelists: Mapping[LanguageTag, CharWhitelist] | None = None,
        langid: LanguageGate | None = None,
    ) -> None:
        self.config = config or FilterConfig()
        self.whitelists = dict(whitelists or {})
        self.langid = langid
        self._bounds = _bounds(self.config)
        self._wl_ids: dict[frozenset, int] = {}
        self._wl_table = np.zeros((0, 128), dtype=np.bool_)

    def verdict(self, pair: SentencePair) -> FilterVerdict:
        return apply_filters(pair, self.config, self.whitelists, self.langid)

    def _whitelist_id(self, lang: LanguageTag) -> int:
        allowed = _whitelist(self.whitelists, lang).allowed
        wid = self._wl_ids.get(allowed)
        if wid is None:
            wid = len(self._wl_ids)
            self._wl_ids[allowed] = wid
            width = max(self._wl_table.shape[1], max(map(ord, allowed)) + 1)
            table = np.zeros((wid + 1, width), dtype=np.bool_)
            table[:wid, : self._wl_table.shape[1]] = self._wl_table
            table[wid, [ord(c) for c in allowed]] = True
            self._wl_table = table
        return wid

    def filter_batch(self, pairs: Sequence[SentencePair], threads: int = 1) -> BatchResult:
        """Filter many pairs at once; output order and values do not depend on ``threads``."""
        n = len(pairs)
        feats = np.zeros((n, K.N_FEATURES), dtype=np.float64)
        masks = np.zeros(n, dtype=np.int64)
        if n == 0:
            return BatchResult(masks, feats)
        src = [p.source_text for p in pairs]
        tgt = [p.target_text for p in pairs]
        s_cp, s_off = _encode(src)
        t_cp, t_off = _encode(tgt)

        # keyed by code: str hashes are cached, dataclass hashes are not
        lang_ids: dict[str, int] = {}
        for p in pairs:
            for lang in (p.source_lang, p.target_lang):
                if lang.code not in lang_ids:
                    lang_ids[lang.code] = self._whitelist_id(lang)
        get = lang_ids.__getitem__
        s_wl = np.fromiter((get(p.source_lang.code) for p in pairs), dtype=np.int64, count=n)
        t_wl = np.fromiter((get(p.target_lang.code) for p in pairs), dtype=np.int64, count=n)

        longest = int(max(np.diff(s_off).max(), np.diff(t_off).max()))
        ln, lnfact = _log_tables(longest + 2)
        s_lid = np.ones(n, dtype=np.int8)
        t_lid = np.ones(n, dtype=np.int8)
        gate_job = self._gate_job(pairs, src, tgt, s_lid, t_lid)

        def run(lo: int, hi: int) -> None:
            if gate_job is not None:
                gate_job(lo, hi)
            K.filter_kernel(
                s_cp, s_off, t_cp, t_off, s_wl, t_wl, s_lid, t_lid, self._wl_table,
                self._bounds, ln, lnfact, feats, masks, lo, hi, longest,
            )  # fmt: skip

        threads = max(1, min(threads, n))
        if threads == 1:
            run(0, n)
        else:
            cuts = np.linspace(0, n, threads + 1).astype(int)
            with ThreadPoolExecutor(threads) as pool:
                list(pool.map(run, cuts[:-1], cuts[1:]))
        return BatchResult(masks, feats)

    def _gate_job(self, pairs, src, tgt, s_lid, t_lid):
        model = self.langid
        if model is None:
            return None
        if isinstance(model, LangIdModel) and model.n <= MAX_PACKED_ORDER:
            keys, key_rows, bits = model.packed_lookup()
            s_exp = np.array([model.language_index(p.source_lang) for p in pairs], dtype=np.int64)
            t_exp = np.array([model.language_index(p.target_lang) for p in pairs], dtype=np.int64)
            s_low = _encode([model.prepare(t) for t in src])
            t_low = _encode([model.prepare(t) for t in tgt])
            # empty sides fail on "empty" before the gate matters
            s_exp[np.diff(s_low[1]) == 0] = -1
            t_exp[np.diff(t_low[1]) == 0] = -1

            def job(lo: int, hi: int) -> None:
                K.gate_kernel(*s_low, s_exp, model.n, keys, key_rows, bits, model.table, model.priors, s_lid, lo, hi)
                K.gate_kernel(*t_low, t_exp, model.n, keys, key_rows, bits, model.table, model.priors, t_lid, lo, hi)

            return job

        # generic gate: evaluate in Python up front
        for i, p in enumerate(pairs):
            if src[i].strip():
                s_lid[i] = model.gate(src[i], p.source_lang)
            if tgt[i].strip():
                t_lid[i] = model.gate(tgt[i], p.target_lang)
        return None
