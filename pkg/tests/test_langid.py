from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bitext_forge.core import parse_language
from bitext_forge.errors import EmptyCorpus, EmptyText, FormatError, InvalidSmoothing, UnknownLanguage
from bitext_forge.langid import LangIdModel, gate, ngrams, predict, train_langid

from conftest import synthetic_sentences

ces, pol, slk, eng = map(parse_language, ("ces", "pol", "slk", "eng"))


@pytest.fixture(scope="module")
def model() -> LangIdModel:
    return train_langid({lang: synthetic_sentences(lang.code, 800, 1) for lang in (ces, pol, slk, eng)})


def test_ngrams_padding():
    assert ngrams("ab", 3) == ["^ab", "ab$"]
    assert ngrams("a", 3) == ["^a$"]
    assert ngrams("", 2) == ["^$"]


def test_single_language_always_wins():
    m = train_langid({ces: ["ahoj světe"]})
    assert predict(m, "zcela jiný text qqq")[0][0] == ces
    assert gate(m, "anything at all", ces)


def test_disjoint_alphabets_are_separated():
    corpora = {ces: ["abc abc cab", "bca", "cc ab"], pol: ["xyz zyx", "yzx xzy", "zz y"]}
    m = train_langid(corpora)
    for lang, lines in corpora.items():
        for line in lines:
            assert predict(m, line)[0][0] == lang


def test_errors():
    with pytest.raises(InvalidSmoothing):
        train_langid({ces: ["x"]}, alpha=0)
    with pytest.raises(EmptyCorpus):
        train_langid({})
    with pytest.raises(EmptyCorpus):
        train_langid({ces: ["", ""]})
    m = train_langid({ces: ["ahoj"]})
    with pytest.raises(EmptyText):
        predict(m, "")
    with pytest.raises(UnknownLanguage):
        gate(m, "ahoj", pol)


def test_ranking_sorted_with_code_tiebreak():
    m = train_langid({ces: ["aaa"], pol: ["aaa"]})
    ranked = predict(m, "aaa")
    assert [lang for lang, _ in ranked] == [ces, pol]
    assert ranked[0][1] == ranked[1][1]
    assert gate(m, "aaa", ces) and not gate(m, "aaa", pol)


def test_probabilities_normalized(model):
    # each column (seen n-grams + one unseen slot per unseen n-gram type) sums to <= 1
    for j in range(len(model.languages)):
        col = np.exp(model.table[:-1, j]).sum() + math.exp(model.table[-1, j])
        assert col <= 1 + 1e-9
    assert np.exp(model.priors).sum() == pytest.approx(1.0)


def test_accuracy_on_held_out(model):
    hits = total = 0
    for lang in model.languages:
        for line in synthetic_sentences(lang.code, 200, 99):
            if len(line) >= 30:
                hits += predict(model, line)[0][0] == lang
                total += 1
    assert hits / total > 0.95


@settings(max_examples=50, deadline=None)
@given(st.text(st.sampled_from("abcčdeěfghijklmnoóprřsštuůvyýzž "), min_size=1, max_size=40))
def test_prior_shift_keeps_ranking(model, text):
    before = [lang for lang, _ in model.predict(text)]
    shifted = LangIdModel(model.n, model.alpha, model.languages, model.counts, model.line_counts)
    shifted.priors = shifted.priors + 5.0
    assert [lang for lang, _ in shifted.predict(text)] == before


@pytest.mark.parametrize("suffix", [".lid", ".lid.gz"])
def test_serialization_round_trip(model, tmp_path, suffix):
    path = tmp_path / f"m{suffix}"
    model.save(path)
    loaded = LangIdModel.load(path)
    for line in synthetic_sentences("pol", 50, 5) + ["qqq", "ß∂", "a"]:
        assert loaded.predict(line) == model.predict(line)


def test_bad_model_file(tmp_path):
    bad = tmp_path / "bad.lid"
    bad.write_text('{"format": "other"}\n')
    with pytest.raises(FormatError):
        LangIdModel.load(bad)
