"""Acceptance criteria 1-10, each reported as one PASS/FAIL line."""

from __future__ import annotations

import io
import random
import time
from collections import Counter

import mpmath
import pytest
from sacrebleu.metrics import BLEU, CHRF

from bitext_forge.core import Direction, SentencePair, parse_language
from bitext_forge.dataset import (
    SamplingSpec,
    Strategy,
    dedup,
    exclude_directions,
    expand_directed,
    write_tsv,
)
from bitext_forge.filtering import FilterConfig, FilterEngine, apply_filters
from bitext_forge.filtering.features import poisson_length_logprob
from bitext_forge.langid import train_langid
from bitext_forge.metrics import bleu, chrf
from bitext_forge.normalize import normalize
from bitext_forge.pivot import DictionaryBackend, Role, RouteCase, plan_route, translate_batch
from bitext_forge.vocab import Vocabulary, train_unigram_vocab, vocab_overlap, vocab_size_for
from conftest import synthetic_sentences

pytestmark = pytest.mark.acceptance

LANGS = ("ces", "eng", "pol", "slk", "slv")
T = {c: parse_language(c) for c in LANGS}


# -- 1. threshold fidelity -----------------------------------------------------

# typed independently of the package tables
LETTERS = {
    "ces": "áčďéěíňóřšťúůýžÁČĎÉĚÍŇÓŘŠŤÚŮÝŽ",
    "pol": "ąćęłńóśźżĄĆĘŁŃÓŚŹŻ",
    "slk": "áäčďžéíĺľňóôŕšťúýžÁÄČĎÉÍĹĽŇÓÔŔŠŤÚÝŽ",
    "slv": "čćđšžČĆĐŠŽ",
    "eng": "",
}


def brute_levenshtein(a: str, b: str) -> int:
    d = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(len(a) + 1):
        d[i][0] = i
    for j in range(len(b) + 1):
        d[0][j] = j
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1]))
    return d[len(a)][len(b)]


def brute_poisson(a: int, b: int) -> float:
    def lpmf(k, lam):
        return k * mpmath.log(lam) - lam - mpmath.log(mpmath.factorial(k))

    with mpmath.workdps(40):
        return float(min(lpmf(a, b), lpmf(b, a)))


def brute_failures(src: str, tgt: str, src_lang: str, tgt_lang: str) -> set[str]:
    """Rule names broken by the pair, straight from the threshold table."""
    failed = set()
    sides = []
    for text, lang in ((src, src_lang), (tgt, tgt_lang)):
        words = [w for w in text.split(" ") if w]
        sides.append(words)
        if not 5 < len(text) < 500:
            failed.add("char_len")
        if not 1 < len(words) < 100:
            failed.add("word_count")
        if words and not sum(map(len, words)) / len(words) < 12:
            failed.add("avg_word_len")
        if words and not max(map(len, words)) < 28:
            failed.add("max_word_len")
        visible = [c for c in text if c != " "]
        digits = sum(c in "0123456789" for c in visible)
        if visible and not digits / len(visible) < 0.15:
            failed.add("digit_ratio")
        allowed = {chr(i) for i in range(128)} | set(LETTERS[lang])
        if not sum(c not in allowed for c in visible) <= 0:
            failed.add("non_whitelist")
    if not brute_levenshtein(src, tgt) > 2:
        failed.add("levenshtein")
    if all(sides) and not brute_poisson(len(sides[0]), len(sides[1])) > -15.0:
        failed.add("poisson")
    nums = [Counter(w for w in ws if any(c.isdigit() and c in "0123456789" for c in w)) for ws in sides]
    if not sum(((nums[0] - nums[1]) + (nums[1] - nums[0])).values()) <= 0:
        failed.add("mismatched_numbers")
    return failed


def n_words(word: str, n: int) -> str:
    return " ".join([word] * n)


def exact_length(word: str, n: int, total: int) -> str:
    """``n`` words built from ``word``, last one padded so the text has ``total`` characters."""
    head = " ".join([word] * (n - 1)) + " "
    return head + "x" * (total - len(head))


BASE_S, BASE_T = "Dzień dobry, jak się masz?", "Dobrý den, jak se máte?"

# (source lang, target lang, source, target, the single rule expected to fail or None)
FIXTURE = [
    ("pol", "ces", BASE_S, BASE_T, None),
    ("pol", "ces", "ab cd", BASE_T, "char_len"),
    ("pol", "ces", "ab cde", BASE_T, None),
    ("pol", "ces", exact_length("kotkotkot", 50, 450), exact_length("pespespes", 50, 500), "char_len"),
    ("pol", "ces", exact_length("kotkotkot", 50, 450), exact_length("pespespes", 50, 499), None),
    ("pol", "ces", "Uczynek", "Dobrý skutek", "word_count"),
    ("pol", "ces", "Dobre uczynki", "Dobrý skutek", None),
    ("pol", "ces", n_words("kot", 95), n_words("pes", 100), "word_count"),
    ("pol", "ces", n_words("kot", 95), n_words("pes", 99), None),
    ("pol", "ces", "Wspaniałe widoki", "abcdefghijkl mnopqrstuvwx", "avg_word_len"),
    ("pol", "ces", "Wspaniałe widoki", "abcdefghijk mnopqrstuvwx", None),
    ("pol", "ces", "To jest bardzo długie polskie słowo", "a b c d e " + "y" * 28, "max_word_len"),
    ("pol", "ces", "To jest bardzo długie polskie słowo", "a b c d e " + "y" * 27, None),
    ("pol", "ces", "Mam 123 koty i wiele innych rzeczy", "abcdefgh 123 ijklmnop q", "digit_ratio"),
    ("pol", "ces", "Mam 123 koty i wiele innych rzeczy", "abcdefghi 123 ijklmnop q", None),
    ("pol", "ces", BASE_S, "Dobrý den, jak se máte ł?", "non_whitelist"),
    ("pol", "ces", "Zażółć gęślą jaźń", "Příliš žluťoučký kůň úpěl ďábelské ódy", None),
    ("pol", "ces", "ala ma kota", "ala mi kotě", "levenshtein"),
    ("pol", "ces", "ala ma kota", "ale mi kotě", None),
    ("pol", "ces", n_words("kot", 6), n_words("pes", 22), "poisson"),
    ("pol", "ces", n_words("kot", 17), n_words("pes", 41), None),
    ("pol", "ces", "Mam 5 kotów w domu.", "Mám 6 koček doma.", "mismatched_numbers"),
    ("pol", "ces", "Mam 5 kotów w domu.", "Mám 5 koček doma.", None),
    ("pol", "ces", "Najwspanialszy Nieprawdopodobny", "Nejkrásnější den", "avg_word_len"),
    ("pol", "ces", "Dzień dobry, jak się mářsz?", BASE_T, "non_whitelist"),
    ("pol", "ces", "Konstantynopolitańczykowianeczka ma kota i psa a ja nie", "Mám kočku a psa a já ne", "max_word_len"),
    ("pol", "ces", n_words("kot", 100), n_words("pes", 97), "word_count"),
    ("eng", "pol", "The cat sat on the mat.", "Kot siedział na macie.", None),
    ("slk", "slv", "Dobrý deň, ako sa máš?", "Dober dan, kako si?", None),
    ("slk", "slv", "Dobrý deň, ako sa máš?", "Dober dán, kako si?", "non_whitelist"),
]


def test_criterion_1_threshold_fidelity(verdict):
    assert len(FIXTURE) == 30
    pairs = [SentencePair(T[s], T[t], a, b) for s, t, a, b, _ in FIXTURE]
    expected = []
    for (s, t, a, b, rule), _ in zip(FIXTURE, pairs):
        broken = brute_failures(a, b, s, t)
        # every fixture row isolates a single rule
        assert broken == ({rule} if rule else set()), (a, b, broken)
        expected.append(not broken)

    engine = FilterEngine()
    engine.filter_batch(pairs[:2])  # compile outside the timed region
    t0 = time.perf_counter()
    scalar = [apply_filters(p).passed for p in pairs]
    batch = [bool(x) for x in engine.filter_batch(pairs).passed]
    elapsed = time.perf_counter() - t0

    # the bound itself is excluded: a score exactly at the minimum fails
    at = poisson_length_logprob(17, 41)
    edge = FilterConfig(min_poisson_logprob=at)
    strict = not apply_filters(pairs[20], edge).passed and apply_filters(
        pairs[20], FilterConfig(min_poisson_logprob=at - 1e-9)
    ).passed

    ok = scalar == expected and batch == expected and strict and elapsed < 1.0
    kept = sum(expected)
    verdict(1, ok, f"{kept} kept / {30 - kept} dropped, scalar+batch match brute force, {elapsed:.3f}s")
    assert ok


# -- 2. vocabulary sizing --------------------------------------------------------


def test_criterion_2_vocab_sizing(verdict):
    got = [vocab_size_for(n) for n in (2, 4, 5)]
    ok = got == [32000, 64000, 80000]
    verdict(2, ok, f"vocab_size_for(2,4,5) = {got}")
    assert ok


# -- 3. metric oracle ------------------------------------------------------------

ALPHABETS = [
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJ",
    "ąćęłńóśźżčďěňřšťůáéíýžäôĺľŕđ",
    "абвгдежзийклмнопрстуфхцчшщыэюяАБВ",
    "αβγδεζηθικλμνξοπρστυφχψω",
    "的一是不了人我在有他这中大来上国",
    "0123456789.,;:!?'\"()-",
]


def random_sentence(rng: random.Random) -> str:
    words = []
    for _ in range(rng.randint(1, 50)):
        alphabet = rng.choice(ALPHABETS)
        words.append("".join(rng.choice(alphabet) for _ in range(rng.randint(1, 9))))
    return " ".join(words)


def test_criterion_3_metric_oracle(verdict):
    rng = random.Random(3)
    cases = []
    for _ in range(100):
        ref = random_sentence(rng)
        # hypotheses overlap partially with their reference
        hyp = " ".join(w for w in ref.split() if rng.random() < 0.6) or ref.split()[0]
        hyp = hyp + " " + random_sentence(rng) if rng.random() < 0.5 else hyp
        cases.append((hyp, ref))
    oracle_chrf = CHRF(char_order=6, word_order=0, beta=2, whitespace=False, eps_smoothing=False)
    oracle_bleu = BLEU(smooth_method="exp", tokenize="13a", effective_order=False)

    t0 = time.perf_counter()
    ours = [(chrf(h, r).value, bleu(h, [r]).value) for h, r in cases]
    elapsed = time.perf_counter() - t0
    worst = 0.0
    for (c, b), (h, r) in zip(ours, cases):
        worst = max(
            worst,
            abs(c - oracle_chrf.sentence_score(h, [r]).score),
            abs(b - oracle_bleu.sentence_score(h, [r]).score),
        )
    sig_c = str(oracle_chrf.get_signature())
    sig_b = str(oracle_bleu.get_signature())
    flags = all(f in sig_c for f in ("nrefs:1", "case:mixed", "eff:yes", "nc:6", "nw:0", "space:no"))
    flags = flags and all(f in sig_b for f in ("tok:13a", "smooth:exp"))
    ok = worst <= 1e-4 and elapsed < 10.0 and flags
    verdict(3, ok, f"max |diff| vs sacrebleu = {worst:.2e} over 100 pairs, {elapsed:.3f}s")
    assert ok


# -- 4. poisson ----------------------------------------------------------------


def test_criterion_4_poisson(verdict):
    t0 = time.perf_counter()
    ours = {(a, b): poisson_length_logprob(a, b) for a in range(1, 101) for b in range(1, 101)}
    elapsed = time.perf_counter() - t0
    worst = max(abs(v - brute_poisson(a, b)) for (a, b), v in ours.items())
    anchor = ours[(10, 10)]
    ok = worst <= 1e-9 and abs(anchor - -2.078562) <= 1e-6 and elapsed < 1.0
    verdict(4, ok, f"grid max |diff| vs mpmath = {worst:.2e}, (10,10) = {anchor:.7f}, {elapsed:.3f}s")
    assert ok


# -- 5. dedup --------------------------------------------------------------------


def reference_dedup(stream):
    out = []
    for s, t in stream:
        if all(s != ks and t != kt for ks, kt in out):
            out.append((s, t))
    return out


def test_criterion_5_dedup(verdict):
    P, C = T["pol"], T["ces"]
    rng = random.Random(5)
    bad = 0
    for _ in range(1000):
        stream = [(rng.choice("abcdefg"), rng.choice("hijklmn")) for _ in range(rng.randint(0, 30))]
        kept, state = dedup(SentencePair(P, C, s, t) for s, t in stream)
        got = [(p.source_text, p.target_text) for p in kept]
        again, _ = dedup(kept)
        sources = [s for s, _ in got]
        targets = [t for _, t in got]
        if (
            got != reference_dedup(stream)
            or again != kept
            or len(set(sources)) != len(sources)
            or len(set(targets)) != len(targets)
            or state.kept + state.dropped != len(stream)
        ):
            bad += 1

    def run(rows):
        return [(p.source_text, p.target_text) for p in dedup(SentencePair(P, C, s, t) for s, t in rows)[0]]

    examples = (
        run([("a", "b"), ("a", "c")]) == [("a", "b")]
        and run([("a", "b"), ("c", "b")]) == [("a", "b")]
        and run([("a", "b"), ("a", "b")]) == [("a", "b")]
    )
    ok = bad == 0 and examples
    verdict(5, ok, f"{1000 - bad}/1000 random streams satisfy all properties, examples {'reproduce' if examples else 'differ'}")
    assert ok


# -- 6. pivot routing ------------------------------------------------------------


def test_criterion_6_pivot(verdict):
    rng = random.Random(6)
    vocab = [f"w{i}" for i in range(40)]
    pool = [" ".join(rng.sample(vocab, 3)) for _ in range(200)]
    m2o_tables = {T[c]: {s: f"{c}:{s}" for s in pool if rng.random() < 0.7} for c in LANGS}
    # second hop maps bridge renderings, plus some raw pool sentences
    o2m_tables = {}
    for c in LANGS:
        keys = [v for table in m2o_tables.values() for v in table.values()] + pool
        o2m_tables[T[c]] = {k: f"{c}<{k}>" for k in keys if rng.random() < 0.7}
    m2o = DictionaryBackend(m2o_tables, "m2o")
    o2m = DictionaryBackend(o2m_tables, "o2m")
    backends = {Role.MANY2ONE: m2o, Role.ONE2MANY: o2m}

    mismatches = 0
    for _ in range(1000):
        src, tgt = rng.sample(LANGS, 2)
        bridge = rng.choice(("pol", "eng", "ces"))
        plan = plan_route(T[src], T[tgt], T[bridge])
        batch = rng.choices(pool, k=rng.randint(1, 20))
        got = translate_batch(plan, backends, batch)
        if plan.case is RouteCase.TO_BRIDGE:
            want = [m2o_tables[T[tgt]].get(x, x) for x in batch]
        elif plan.case is RouteCase.FROM_BRIDGE:
            want = [o2m_tables[T[tgt]].get(x, x) for x in batch]
        else:
            mid = [normalize(m2o_tables[T[bridge]].get(x, x)) for x in batch]
            want = [o2m_tables[T[tgt]].get(x, x) for x in mid]
        mismatches += got != want

    partition_ok = True
    for bridge in ("pol", "eng", "ces"):
        for src in LANGS:
            for tgt in LANGS:
                if src == tgt:
                    continue
                holds = [tgt == bridge, src == bridge, bridge not in (src, tgt)]
                case = plan_route(T[src], T[tgt], T[bridge]).case
                expected = [RouteCase.TO_BRIDGE, RouteCase.FROM_BRIDGE, RouteCase.TWO_HOP][holds.index(True)]
                partition_ok &= sum(holds) == 1 and case is expected
    ok = mismatches == 0 and partition_ok
    verdict(6, ok, f"{1000 - mismatches}/1000 batches equal manual composition, partition over 3x20 routes {'exact' if partition_ok else 'broken'}")
    assert ok


# -- 7. language identification ------------------------------------------------


@pytest.mark.slow
def test_criterion_7_langid(verdict):
    t0 = time.perf_counter()
    train, held_out = {}, {}
    for code in LANGS:
        lines = synthetic_sentences(code, 60000, seed=7)
        train[code] = lines[:50000]
        held_out[code] = [x for x in lines[50000:] if len(x) >= 30][:5000]
    model = train_langid(train)
    correct = total = 0
    for code, lines in held_out.items():
        assert len(lines) == 5000
        correct += sum(model.predict(x)[0][0].code == code for x in lines)
        total += len(lines)
    elapsed = time.perf_counter() - t0
    acc = correct / total
    ok = acc >= 0.95 and elapsed < 120
    verdict(7, ok, f"top-1 accuracy {acc:.4f} on 5x5000 held-out sentences (>= 30 chars), {elapsed:.1f}s")
    assert ok


# -- 8. tokenizer ----------------------------------------------------------------

RANGES = [(0x20, 0x7E), (0xA0, 0x24F), (0x300, 0x36F), (0x400, 0x4FF), (0x4E00, 0x4FFF), (0x1F300, 0x1F64F)]


def random_unicode(rng: random.Random) -> str:
    out = []
    for _ in range(rng.randint(0, 40)):
        lo, hi = rng.choice(RANGES)
        out.append(" " if rng.random() < 0.15 else chr(rng.randint(lo, hi)))
    return "".join(out)


def test_criterion_8_tokenizer(verdict, tmp_path):
    corpora = {c: synthetic_sentences(c, 3000, seed=8) for c in ("ces", "pol", "slk")}

    def build(path):
        from bitext_forge.dataset import sample_corpus

        sample = sample_corpus(corpora, SamplingSpec(Strategy.EQUAL, 3000, seed=11))
        lines = [x for lang in sorted(sample.lines) for x in sample.lines[lang]]
        v = train_unigram_vocab(lines, 1000)
        v.save(path)
        return v

    v = build(tmp_path / "a.vocab")
    build(tmp_path / "b.vocab")
    same_file = (tmp_path / "a.vocab").read_bytes() == (tmp_path / "b.vocab").read_bytes()

    rng = random.Random(8)
    strings = [random_unicode(rng) for _ in range(10000)]
    broken = sum("".join(v.tokenize(s)) != s for s in strings)
    reloaded = Vocabulary.load(tmp_path / "a.vocab")
    broken += sum("".join(reloaded.tokenize(s)) != s for s in strings[:1000])
    overlap = vocab_overlap(v, v)
    ok = broken == 0 and same_file and overlap == 100.0
    verdict(8, ok, f"round trip {10000 - min(broken, 10000)}/10000, vocab files identical={same_file}, overlap(v,v)={overlap}")
    assert ok


# -- 9. ablation -----------------------------------------------------------------


def test_criterion_9_ablation(verdict):
    rng = random.Random(9)
    four = ("ces", "pol", "slk", "slv")
    pairs = []
    for a in four:
        for b in four:
            if a < b:
                for i in range(rng.randint(5, 40)):
                    pairs.append(SentencePair(T[a], T[b], f"{a} {i}", f"{b} {i}"))
    rng.shuffle(pairs)
    full = expand_directed(pairs)
    before = full.counts
    d = Direction.parse
    variants = {
        "slk-slv": [d("slk-slv")],
        "slv-slk": [d("slv-slk")],
        "both": [d("slk-slv"), d("slv-slk")],
    }
    ok = len(before) == 12
    for excluded in variants.values():
        after = exclude_directions(full, excluded).counts
        for direction, n in before.items():
            ok &= after.get(direction, 0) == (0 if direction in excluded else n)
    verdict(9, ok, f"3 variants over {len(before)} directions: excluded counts 0, others unchanged")
    assert ok


# -- 10. throughput --------------------------------------------------------------


def throughput_corpus(n: int) -> list[SentencePair]:
    src = [s for s in synthetic_sentences("pol", 3 * n, seed=10, words=(8, 16)) if 70 <= len(s) <= 90]
    tgt = [s for s in synthetic_sentences("ces", 3 * n, seed=11, words=(8, 16)) if 70 <= len(s) <= 90]
    rng = random.Random(10)
    pairs = [SentencePair(T["pol"], T["ces"], s, t) for s, t in zip(src[:n], tgt[:n])]
    # a tenth of the stream repeats earlier sides
    for i in rng.sample(range(n), n // 10):
        pairs[i] = pairs[rng.randrange(n)]
    return pairs


def filter_dedup(engine: FilterEngine, pairs, threads: int) -> tuple[float, str]:
    t0 = time.perf_counter()
    passed = engine.filter_batch(pairs, threads=threads).passed
    kept, _ = dedup(p for p, ok in zip(pairs, passed) if ok)
    elapsed = time.perf_counter() - t0
    buf = io.StringIO()
    write_tsv(kept, buf)
    return elapsed, buf.getvalue()


@pytest.mark.slow
def test_criterion_10_throughput(verdict):
    import os

    n = 200_000
    pairs = throughput_corpus(n)
    median = sorted(len(p.source_text) for p in pairs)[n // 2]
    engine = FilterEngine()
    engine.filter_batch(pairs[:10], threads=4)  # compile
    one = min(filter_dedup(engine, pairs, 1)[0] for _ in range(3))
    four = min(filter_dedup(engine, pairs, 4)[0] for _ in range(3))
    same = filter_dedup(engine, pairs, 1)[1] == filter_dedup(engine, pairs, 4)[1]
    rate1, rate4 = n / one, n / four
    speedup = rate4 / rate1
    ok = rate1 >= 50_000 and speedup >= 2.0 and same
    verdict(
        10,
        ok,
        f"{rate1:,.0f} pairs/s on 1 thread, {rate4:,.0f} on 4 ({speedup:.2f}x), "
        f"identical output={same}, median {median} chars, cpus={os.cpu_count()}",
    )
    assert ok
