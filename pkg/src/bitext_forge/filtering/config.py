"""Filter thresholds and their flat ``key = value`` file format."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from bitext_forge.errors import ConfigError


@dataclass(frozen=True)
class FilterConfig:
    """Acceptance bounds for each feature.

    ``min_*`` and ``max_*`` bounds are exclusive (value must be strictly
    inside), except ``max_non_whitelist`` and ``max_mismatched_numbers`` which
    are inclusive (count <= bound). ``None`` disables a bound.
    """

    min_char_len: float | None = 5
    max_char_len: float | None = 500
    min_words: float | None = 1
    max_words: float | None = 100
    max_avg_word_len: float | None = 12
    max_max_word_len: float | None = 28
    max_digit_ratio: float | None = 0.15
    max_non_whitelist: float | None = 0
    min_levenshtein: float | None = 2
    min_poisson_logprob: float | None = -15.0
    max_mismatched_numbers: float | None = 0

    def __post_init__(self) -> None:
        for lo, hi in (("min_char_len", "max_char_len"), ("min_words", "max_words")):
            a, b = getattr(self, lo), getattr(self, hi)
            if a is not None and b is not None and not a < b:
                raise ConfigError(f"{lo}={a} must be smaller than {hi}={b}")

    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def with_overrides(self, values: dict[str, float | None]) -> FilterConfig:
        unknown = set(values) - set(self.keys())
        if unknown:
            raise ConfigError(f"unknown filter config keys: {', '.join(sorted(unknown))}")
        return replace(self, **values)

    def to_dict(self) -> dict[str, float | None]:
        return asdict(self)

    def dumps(self) -> str:
        lines = []
        for key, value in self.to_dict().items():
            lines.append(f"{key} = {'none' if value is None else _fmt(value)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str, base: FilterConfig | None = None) -> FilterConfig:
        """Parse ``key = value`` lines; missing keys keep the defaults (or ``base``)."""
        values: dict[str, float | None] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            sep = "=" if "=" in line else (":" if ":" in line else None)
            if sep is None:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, value = (part.strip() for part in line.split(sep, 1))
            values[key] = _parse_value(key, value, lineno)
        return (base or cls()).with_overrides(values)

    @classmethod
    def load(cls, path: str | Path, base: FilterConfig | None = None) -> FilterConfig:
        return cls.loads(Path(path).read_text(encoding="utf-8"), base)


def _parse_value(key: str, value: str, lineno: int) -> float | None:
    if value.lower() in ("none", "-", ""):
        return None
    try:
        number = float(value)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key} needs a number, got {value!r}") from None
    if math.isnan(number):
        raise ConfigError(f"line {lineno}: {key} is NaN")
    return int(number) if number.is_integer() and "." not in value and "e" not in value.lower() else number


def _fmt(value: float) -> str:
    return repr(value) if isinstance(value, float) else str(value)
