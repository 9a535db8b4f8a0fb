"""Domain types shared across the toolkit: language tags, directions, sentence pairs."""

from __future__ import annotations

import re
from dataclasses import dataclass

from bitext_forge.errors import SameLanguage, UnknownLanguage

_CODE_RE = re.compile(r"[a-z]{3}")

# ISO-639-3 codes handled out of the box; register_language() extends this.
DEFAULT_LANGUAGES = ("ces", "eng", "pol", "slk", "slv")
_REGISTRY: set[str] = set(DEFAULT_LANGUAGES)


def register_language(code: str) -> LanguageTag:
    """Add a lowercase three-letter code to the registry and return its tag."""
    if not _CODE_RE.fullmatch(code):
        raise UnknownLanguage(f"not a lowercase ISO-639-3 code: {code!r}")
    _REGISTRY.add(code)
    return LanguageTag(code)


def registered_languages() -> list[LanguageTag]:
    return [LanguageTag(c) for c in sorted(_REGISTRY)]


@dataclass(frozen=True, order=True, slots=True)
class LanguageTag:
    code: str

    def __post_init__(self) -> None:
        if not isinstance(self.code, str) or not _CODE_RE.fullmatch(self.code):
            raise UnknownLanguage(f"language code must be 3 lowercase ASCII letters, got {self.code!r}")
        if self.code not in _REGISTRY:
            raise UnknownLanguage(f"unregistered language code {self.code!r}")

    def __str__(self) -> str:
        return self.code


def parse_language(code: str) -> LanguageTag:
    """Return the tag for a registered code; anything else raises UnknownLanguage."""
    return LanguageTag(code)


@dataclass(frozen=True, order=True, slots=True)
class Direction:
    source: LanguageTag
    target: LanguageTag

    def __post_init__(self) -> None:
        if self.source == self.target:
            raise SameLanguage(f"direction needs two different languages, got {self.source}-{self.target}")

    @classmethod
    def parse(cls, text: str) -> Direction:
        """Parse ``"slk-slv"`` (a ``>`` or ``_`` separator is accepted too)."""
        parts = re.split(r"[-_>]+", text.strip())
        if len(parts) != 2:
            raise UnknownLanguage(f"direction must look like 'src-tgt', got {text!r}")
        return cls(parse_language(parts[0]), parse_language(parts[1]))

    def reversed(self) -> Direction:
        return Direction(self.target, self.source)

    def __str__(self) -> str:
        return f"{self.source}-{self.target}"


@dataclass(frozen=True, slots=True)
class SentencePair:
    source_lang: LanguageTag
    target_lang: LanguageTag
    source_text: str
    target_text: str
    origin: str | None = None

    def __post_init__(self) -> None:
        if self.source_lang == self.target_lang:
            raise SameLanguage(f"pair languages must differ, got {self.source_lang} twice")

    @property
    def direction(self) -> Direction:
        return Direction(self.source_lang, self.target_lang)
