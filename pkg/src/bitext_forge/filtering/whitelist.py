"""Per-language character whitelists: Basic Latin plus each Slavic alphabet's extras."""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass

from bitext_forge.core import LanguageTag, parse_language

BASIC_LATIN = frozenset(chr(cp) for cp in range(0x80))

EXTRA_CHARACTERS = {
    "ces": "áčďéěíňóřšťúůýžÁČĎÉĚÍŇÓŘŠŤÚŮÝŽ",
    "pol": "ąćęłńóśźżĄĆĘŁŃÓŚŹŻ",
    "slk": "áäčďžéíĺľňóôŕšťúýžÁÄČĎÉÍĹĽŇÓÔŔŠŤÚÝŽ",
    "slv": "čćđšžČĆĐŠŽ",
    "eng": "",
}


@dataclass(frozen=True, slots=True)
class CharWhitelist:
    language: LanguageTag | None
    allowed: frozenset[str]

    def __contains__(self, char: str) -> bool:
        return char in self.allowed

    def count_outside(self, text: str) -> int:
        """Number of non-space characters of ``text`` missing from the whitelist."""
        allowed = self.allowed
        return sum(1 for c in text if c != " " and c not in allowed)


def whitelist_for(language: LanguageTag | str) -> CharWhitelist:
    """Basic Latin plus the language's extra letters (none for unlisted languages)."""
    tag = language if isinstance(language, LanguageTag) else parse_language(language)
    return CharWhitelist(tag, BASIC_LATIN | frozenset(EXTRA_CHARACTERS.get(tag.code, "")))


def union_whitelist(languages: Iterable[LanguageTag | str]) -> CharWhitelist:
    """Model-scoped whitelist: Basic Latin extended by every listed language's letters."""
    allowed = set(BASIC_LATIN)
    for lang in languages:
        allowed |= whitelist_for(lang).allowed
    return CharWhitelist(None, frozenset(allowed))


def build_whitelists(
    languages: Iterable[LanguageTag | str], scope: str = "language"
) -> Mapping[LanguageTag, CharWhitelist]:
    """Whitelist per language, either its own (``scope="language"``) or the union of all."""
    tags = [lang if isinstance(lang, LanguageTag) else parse_language(lang) for lang in languages]
    if scope == "language":
        return {tag: whitelist_for(tag) for tag in tags}
    if scope == "union":
        shared = union_whitelist(tags)
        return {tag: shared for tag in tags}
    raise ValueError(f"whitelist scope must be 'language' or 'union', got {scope!r}")
