"""Target-language tokens and bridge-language routing over pluggable translation backends."""

from __future__ import annotations

import abc
import enum
import logging
import re
import time
from collections.abc import Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import requests

from bitext_forge.core import LanguageTag, parse_language, registered_languages
from bitext_forge.errors import (
    BackendUnavailable,
    FormatError,
    LengthMismatch,
    SameLanguage,
    UnknownLanguage,
    UnsupportedTarget,
)
from bitext_forge.normalize import normalize

log = logging.getLogger(__name__)

_TOKEN = re.compile(r">>([a-z]{3})<< ?")


def lang_token(lang: LanguageTag) -> str:
    return f">>{lang.code}<<"


def prepend_target_token(text: str, target: LanguageTag) -> str:
    return f"{lang_token(target)} {text}"


def strip_lang_token(text: str) -> tuple[LanguageTag | None, str]:
    """Split a leading ``>>xxx<<`` token (and one following space) off ``text``."""
    m = _TOKEN.match(text)
    if m is None:
        return None, text
    try:
        lang = parse_language(m.group(1))
    except UnknownLanguage:
        return None, text
    return lang, text[m.end() :]


# -- routing -----------------------------------------------------------------


class Role(enum.Enum):
    MANY2ONE = "many2one"
    ONE2MANY = "one2many"
    MANY2MANY = "many2many"


class RouteCase(enum.Enum):
    TO_BRIDGE = "to-bridge"
    FROM_BRIDGE = "from-bridge"
    TWO_HOP = "two-hop"
    DIRECT = "direct"


@dataclass(frozen=True)
class Hop:
    role: Role
    target: LanguageTag


@dataclass(frozen=True)
class RoutePlan:
    case: RouteCase
    source: LanguageTag
    target: LanguageTag
    hops: tuple[Hop, ...]
    bridge: LanguageTag | None = None


def plan_route(source: LanguageTag, target: LanguageTag, bridge: LanguageTag) -> RoutePlan:
    """Pick the pivot case: into the bridge, out of it, or through it."""
    if source == target:
        raise SameLanguage(f"source and target are both {source}")
    if target == bridge:
        return RoutePlan(RouteCase.TO_BRIDGE, source, target, (Hop(Role.MANY2ONE, bridge),), bridge)
    if source == bridge:
        return RoutePlan(RouteCase.FROM_BRIDGE, source, target, (Hop(Role.ONE2MANY, target),), bridge)
    return RoutePlan(
        RouteCase.TWO_HOP,
        source,
        target,
        (Hop(Role.MANY2ONE, bridge), Hop(Role.ONE2MANY, target)),
        bridge,
    )


def direct_plan(source: LanguageTag, target: LanguageTag) -> RoutePlan:
    if source == target:
        raise SameLanguage(f"source and target are both {source}")
    return RoutePlan(RouteCase.DIRECT, source, target, (Hop(Role.MANY2MANY, target),))


# -- backends ----------------------------------------------------------------


class TranslationBackend(abc.ABC):
    """Translates a batch of token-prefixed texts; one output per input, same order."""

    name: str = "backend"
    concurrent_safe: bool = False

    @property
    @abc.abstractmethod
    def supported_targets(self) -> frozenset[LanguageTag]: ...

    @abc.abstractmethod
    def translate(self, texts: Sequence[str], target: LanguageTag) -> list[str]: ...


class EchoBackend(TranslationBackend):
    """Identity backend: returns its inputs (token included), handy for plumbing tests."""

    concurrent_safe = True

    def __init__(self, targets: Iterable[LanguageTag], name: str = "echo") -> None:
        self._targets = frozenset(targets)
        self.name = name

    @property
    def supported_targets(self) -> frozenset[LanguageTag]:
        return self._targets

    def translate(self, texts: Sequence[str], target: LanguageTag) -> list[str]:
        return list(texts)


class DictionaryBackend(TranslationBackend):
    """Deterministic mock: whole-sentence lookup per target language, echo on a miss."""

    concurrent_safe = True

    def __init__(self, tables: Mapping[LanguageTag, Mapping[str, str]], name: str = "dictionary") -> None:
        self.tables = {lang: dict(t) for lang, t in tables.items()}
        self.name = name

    @property
    def supported_targets(self) -> frozenset[LanguageTag]:
        return frozenset(self.tables)

    def translate(self, texts: Sequence[str], target: LanguageTag) -> list[str]:
        table = self.tables[target]
        out = []
        for text in texts:
            _, body = strip_lang_token(text)
            out.append(table.get(body, body))
        return out

    @classmethod
    def from_files(cls, files: Mapping[LanguageTag, str | Path], name: str = "dictionary") -> DictionaryBackend:
        """Each file holds ``source<TAB>translation`` lines for one target language."""
        tables = {}
        for lang, path in files.items():
            table = {}
            for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise FormatError(f"{path}:{lineno}: expected 'source<TAB>translation'")
                table.setdefault(parts[0], parts[1])
            tables[lang] = table
        return cls(tables, name)


class HttpBackend(TranslationBackend):
    """Client for a JSON service: ``POST {url}/translate`` with ``{"target_lang", "texts"}``."""

    concurrent_safe = True

    def __init__(
        self,
        url: str,
        targets: Iterable[LanguageTag] | None = None,
        *,
        timeout: float = 30.0,
        retries: int = 2,
        batch_size: int = 64,
        max_workers: int = 1,
        backoff: float = 0.5,
        name: str | None = None,
    ) -> None:
        self.url = url.rstrip("/")
        self._targets = frozenset(targets) if targets is not None else frozenset(registered_languages())
        self.timeout = timeout
        self.retries = retries
        self.batch_size = batch_size
        self.max_workers = max_workers
        self.backoff = backoff
        self.name = name or self.url
        self._session = requests.Session()

    @property
    def supported_targets(self) -> frozenset[LanguageTag]:
        return self._targets

    def _post(self, texts: list[str], target: LanguageTag) -> list[str]:
        last: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                resp = self._session.post(
                    f"{self.url}/translate",
                    json={"target_lang": target.code, "texts": texts},
                    timeout=self.timeout,
                )
                resp.raise_for_status()
                out = resp.json()["translations"]
                if not isinstance(out, list):
                    raise ValueError("'translations' is not a list")
                return [str(t) for t in out]
            except (requests.RequestException, ValueError, KeyError) as exc:
                last = exc
                log.warning("%s: attempt %d failed: %s", self.name, attempt + 1, exc)
                if attempt < self.retries:
                    time.sleep(self.backoff * 2**attempt)
        raise BackendUnavailable(f"{self.name}: {last}")

    def translate(self, texts: Sequence[str], target: LanguageTag) -> list[str]:
        shards = [list(texts[i : i + self.batch_size]) for i in range(0, len(texts), self.batch_size)]
        if self.max_workers > 1 and len(shards) > 1:
            with ThreadPoolExecutor(self.max_workers) as pool:
                results = list(pool.map(lambda s: self._post(s, target), shards))
        else:
            results = [self._post(s, target) for s in shards]
        out: list[str] = []
        for shard, res in zip(shards, results):
            if len(res) != len(shard):
                raise LengthMismatch(f"{self.name}: sent {len(shard)} texts, got {len(res)} back")
            out.extend(res)
        return out


# -- execution ---------------------------------------------------------------


def _run_hop(backend: TranslationBackend, texts: list[str], target: LanguageTag) -> list[str]:
    if target not in backend.supported_targets:
        raise UnsupportedTarget(f"{backend.name} cannot translate into {target}")
    try:
        out = backend.translate([prepend_target_token(t, target) for t in texts], target)
    except (BackendUnavailable, UnsupportedTarget, LengthMismatch):
        raise
    except Exception as exc:  # backend bugs surface as unavailability
        raise BackendUnavailable(f"{backend.name}: {exc}") from exc
    if len(out) != len(texts):
        raise LengthMismatch(f"{backend.name}: {len(texts)} inputs but {len(out)} outputs")
    # some servers echo the target token back
    return [strip_lang_token(t)[1] for t in out]


def translate_batch(
    plan: RoutePlan,
    backends: Mapping[Role, TranslationBackend],
    texts: Sequence[str],
    trace: list[list[str]] | None = None,
    renormalize: bool = True,
) -> list[str]:
    """Run the plan's hops in order. ``trace`` receives each hop's output (bridge sentences first)."""
    for hop in plan.hops:
        if hop.role not in backends:
            raise BackendUnavailable(f"no backend configured for role {hop.role.value}")
        if hop.target not in backends[hop.role].supported_targets:
            raise UnsupportedTarget(f"{backends[hop.role].name} cannot translate into {hop.target}")
    current = list(texts)
    for i, hop in enumerate(plan.hops):
        current = _run_hop(backends[hop.role], current, hop.target)
        if renormalize and i < len(plan.hops) - 1:
            current = [normalize(t) for t in current]
        if trace is not None:
            trace.append(list(current))
    return current


def route_many2many(
    model_backend: TranslationBackend, source: LanguageTag, target: LanguageTag, texts: Sequence[str]
) -> list[str]:
    return translate_batch(direct_plan(source, target), {Role.MANY2MANY: model_backend}, texts)

