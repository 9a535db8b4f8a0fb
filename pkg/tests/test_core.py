from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bitext_forge.core import (
    DEFAULT_LANGUAGES,
    Direction,
    LanguageTag,
    SentencePair,
    parse_language,
    register_language,
    registered_languages,
)
from bitext_forge.errors import SameLanguage, UnknownLanguage


def test_parse_known_code():
    assert parse_language("ces") == LanguageTag("ces")
    assert str(parse_language("slv")) == "slv"


@pytest.mark.parametrize("bad", ["CES", "xx", "cesk", "", "c3s", "deu"])
def test_parse_rejects(bad):
    with pytest.raises(UnknownLanguage):
        parse_language(bad)


def test_round_trip_for_every_registered_tag():
    for tag in registered_languages():
        assert parse_language(tag.code) == tag


def test_register_extends_registry():
    tag = register_language("hrv")
    assert parse_language("hrv") == tag
    with pytest.raises(UnknownLanguage):
        register_language("HR")


def test_direction_rules():
    d = Direction.parse("slk-slv")
    assert (d.source.code, d.target.code) == ("slk", "slv")
    assert str(d.reversed()) == "slv-slk"
    with pytest.raises(SameLanguage):
        Direction(parse_language("ces"), parse_language("ces"))


def test_pair_requires_distinct_languages():
    ces = parse_language("ces")
    with pytest.raises(SameLanguage):
        SentencePair(ces, ces, "a", "b")
    pair = SentencePair(ces, parse_language("pol"), "a", "b", origin="x")
    assert str(pair.direction) == "ces-pol"


@given(st.sampled_from(DEFAULT_LANGUAGES), st.sampled_from(DEFAULT_LANGUAGES))
def test_direction_parse_round_trip(a, b):
    if a == b:
        return
    d = Direction(parse_language(a), parse_language(b))
    assert Direction.parse(str(d)) == d
