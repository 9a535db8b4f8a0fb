"""Text normalization applied to every sentence before feature computation.

Order is fixed: NFKC, removal of control and zero-width characters, quote
unification, whitespace unification, then collapse and trim.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

DOUBLE_QUOTES = "„“”«»"  # „ “ ” « »
SINGLE_QUOTES = "‚‘’‹›"  # ‚ ‘ ’ ‹ ›
ZERO_WIDTH = "\u200b\u200c\u200d\ufeff"

_QUOTE_TABLE = {ord(c): '"' for c in DOUBLE_QUOTES} | {ord(c): "'" for c in SINGLE_QUOTES}
_QUOTE_CHARS = DOUBLE_QUOTES + SINGLE_QUOTES

# Cc characters that are also whitespace (tab, LF, CR, ...) are unified to a
# space instead of being deleted.
_CC = [*range(0x00, 0x20), *range(0x7F, 0xA0)]
_REMOVE_TABLE = {cp: None for cp in _CC if not chr(cp).isspace()}
_REMOVE_TABLE.update({ord(c): None for c in ZERO_WIDTH})

_WS_RUN = re.compile(r"\s+")
# Anything the collapse step would change: edge whitespace, doubled
# whitespace, or whitespace other than U+0020.
_NEEDS_COLLAPSE = re.compile(r"^\s|\s$|\s\s|[^\S ]")


@dataclass(frozen=True, slots=True)
class NormalizationReport:
    replaced_quotes: int = 0
    collapsed_whitespace: int = 0
    removed_chars: int = 0
    nfkc_changed: bool = False

    def __add__(self, other: NormalizationReport) -> NormalizationReport:
        return NormalizationReport(
            self.replaced_quotes + other.replaced_quotes,
            self.collapsed_whitespace + other.collapsed_whitespace,
            self.removed_chars + other.removed_chars,
            self.nfkc_changed or other.nfkc_changed,
        )


def _count_rewritten_whitespace(text: str) -> int:
    # Whitespace characters that do not survive verbatim as a single interior space.
    count = 0
    end = len(text)
    for m in _WS_RUN.finditer(text):
        run = m.group()
        interior = m.start() > 0 and m.end() < end
        if interior and run == " ":
            continue
        count += len(run) - (1 if interior and run[0] == " " else 0)
    return count


def normalize_text(raw: str) -> tuple[str, NormalizationReport]:
    """Normalize one sentence and report what changed.

    Total function: every input yields an output, possibly empty.
    """
    text = unicodedata.normalize("NFKC", raw)
    nfkc_changed = text != raw

    stripped = text.translate(_REMOVE_TABLE)
    removed = len(text) - len(stripped)
    if removed:
        # Deleting an invisible character can bring a base letter next to a
        # combining mark; recompose so the result stays NFKC.
        stripped = unicodedata.normalize("NFKC", stripped)
    text = stripped

    quotes = 0
    if not text.isascii():
        quotes = sum(text.count(c) for c in _QUOTE_CHARS)
        if quotes:
            text = text.translate(_QUOTE_TABLE)

    collapsed = 0
    if _NEEDS_COLLAPSE.search(text):
        collapsed = _count_rewritten_whitespace(text)
        text = " ".join(text.split())

    return text, NormalizationReport(quotes, collapsed, removed, nfkc_changed)


def normalize(raw: str) -> str:
    """Shorthand for ``normalize_text(raw)[0]``."""
    return normalize_text(raw)[0]
