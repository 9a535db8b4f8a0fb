"""``bitext-forge`` command line: thin wrappers over the library with a JSON run manifest per invocation."""

from __future__ import annotations

import argparse
import io
import itertools
import json
import logging
import os
import sys
import time
from collections import Counter
from collections.abc import Iterable, Iterator
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import IO

from bitext_forge import __version__
from bitext_forge.core import Direction, LanguageTag, parse_language
from bitext_forge.dataset import (
    DedupState,
    IngestReport,
    SamplingSpec,
    Strategy,
    exclude_directions,
    expand_directed,
    iter_tsv,
    iter_tsv_records,
    read_directions,
    sample_files,
)
from bitext_forge.errors import BitextForgeError
from bitext_forge.filtering import FilterConfig, FilterEngine, build_whitelists
from bitext_forge.langid import LangIdModel, train_langid
from bitext_forge.metrics import METRICS, format_report, score_file
from bitext_forge.normalize import NormalizationReport, normalize_text
from bitext_forge.pivot import (
    DictionaryBackend,
    EchoBackend,
    HttpBackend,
    Role,
    TranslationBackend,
    plan_route,
    direct_plan,
    translate_batch,
)
from bitext_forge.vocab import (
    Vocabulary,
    escape_piece,
    tokenization_stats,
    train_unigram_vocab,
    vocab_overlap,
    vocab_size_for,
)

log = logging.getLogger("bitext_forge")

MANIFEST_SCHEMA = 1
THREADS_ENV = "BITEXT_FORGE_THREADS"
DEFAULT_BATCH = 50_000


# -- argument types (failures become usage errors, exit 2) ---------------------


def _lang(value: str) -> LanguageTag:
    try:
        return parse_language(value)
    except BitextForgeError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _direction(value: str) -> Direction:
    try:
        return Direction.parse(value)
    except BitextForgeError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _lang_path(value: str) -> tuple[LanguageTag, Path]:
    code, sep, path = value.partition("=")
    if not sep or not path:
        raise argparse.ArgumentTypeError(f"expected LANG=PATH, got {value!r}")
    return _lang(code), Path(path)


def _positive(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _seed(value: str) -> int:
    n = int(value)
    if not 0 <= n < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return n


# -- I/O and manifest ----------------------------------------------------------


@contextmanager
def _open_in(path: str) -> Iterator[IO[str]]:
    if path == "-":
        yield io.TextIOWrapper(sys.stdin.buffer, encoding="utf-8", newline="\n")
    else:
        with open(path, encoding="utf-8", newline="\n") as fh:
            yield fh


@contextmanager
def _open_out(path: str) -> Iterator[IO[str]]:
    if path == "-":
        out = io.TextIOWrapper(sys.stdout.buffer, encoding="utf-8", newline="\n", write_through=False)
        try:
            yield out
        finally:
            out.flush()
            out.detach()
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


@dataclass
class Run:
    """Collects what a subcommand did and writes the manifest once at the end."""

    command: str
    args: argparse.Namespace
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    started: float = field(default_factory=time.perf_counter)

    def manifest(self) -> dict:
        config = {k: _jsonable(v) for k, v in sorted(vars(self.args).items()) if k not in ("func", "config_snapshot")}
        return {
            "schema_version": MANIFEST_SCHEMA,
            "tool": "bitext-forge",
            "tool_version": __version__,
            "subcommand": self.command,
            "config": config,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "counts": self.counts,
            **self.extra,
            "seed": getattr(self.args, "seed", None),
            "wall_time_s": round(time.perf_counter() - self.started, 6),
        }

    def write(self, manifest_path: str | None) -> None:
        text = json.dumps(self.manifest(), ensure_ascii=False, sort_keys=True)
        if manifest_path:
            Path(manifest_path).write_text(text + "\n", encoding="utf-8")
        else:
            sys.stderr.write(text + "\n")


def _jsonable(value):
    if isinstance(value, (LanguageTag, Direction, Path)):
        return str(value)
    if isinstance(value, tuple) and len(value) == 2 and isinstance(value[0], LanguageTag):
        return f"{value[0]}={value[1]}"
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, FilterConfig):
        return value.to_dict()
    return value


def _manifest_path(args: argparse.Namespace, primary_output: str | None) -> str | None:
    if getattr(args, "manifest", None):
        return args.manifest
    if primary_output and primary_output != "-":
        return primary_output + ".manifest.json"
    return None


def _threads(args: argparse.Namespace) -> int:
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer %s=%r", THREADS_ENV, env)
    return 1


# -- pipeline stages (shared by the single-stage commands and `pipeline`) --------


def normalize_line(line: str) -> tuple[str, NormalizationReport]:
    """Normalize every tab-separated field; the field structure is preserved."""
    report = NormalizationReport()
    fields = []
    for raw in line.split("\t"):
        text, rep = normalize_text(raw)
        fields.append(text)
        report = report + rep
    return "\t".join(fields), report


def normalize_stage(lines: Iterable[str], stats: dict) -> Iterator[str]:
    total = NormalizationReport()
    n = 0
    for line in lines:
        out, rep = normalize_line(line.rstrip("\n"))
        total = total + rep
        n += 1
        yield out
    stats.update(read=n, kept=n, dropped=0, malformed=0, **asdict(total))


def _engine(args: argparse.Namespace) -> FilterEngine:
    config = FilterConfig.load(args.config) if args.config else FilterConfig()
    args.config_snapshot = config.to_dict()
    langid = LangIdModel.load(args.langid) if args.langid else None
    langs = list(dict.fromkeys(filter(None, [args.src_lang, args.tgt_lang, *args.model_langs])))
    whitelists = build_whitelists(langs, scope=args.whitelist_scope) if langs else None
    return FilterEngine(config, whitelists, langid)


def _whitelists_for(engine: FilterEngine, pairs, args) -> None:
    # languages seen only inside 4-column input still need a whitelist entry
    missing = {p.source_lang for p in pairs} | {p.target_lang for p in pairs}
    missing -= set(engine.whitelists)
    if missing:
        scope_langs = sorted(set(engine.whitelists) | missing)
        engine.whitelists = build_whitelists(scope_langs, scope=args.whitelist_scope)


def filter_stage(
    records: Iterable[tuple[str, object]], engine: FilterEngine, args: argparse.Namespace, hist: Counter
) -> Iterator[tuple[str, object]]:
    threads = _threads(args)
    it = iter(records)
    while batch := list(itertools.islice(it, args.batch_size)):
        pairs = [p for _, p in batch]
        _whitelists_for(engine, pairs, args)
        result = engine.filter_batch(pairs, threads=threads)
        hist.update(result.histogram())
        hist["__dropped__"] += int((~result.passed).sum())
        for keep, rec in zip(result.passed, batch):
            if keep:
                yield rec


def dedup_stage(records: Iterable[tuple[str, object]], state: DedupState) -> Iterator[tuple[str, object]]:
    for line, pair in records:
        if state.offer(pair.source_text, pair.target_text):
            yield line, pair


def _write_lines(out: IO[str], lines: Iterable[str]) -> int:
    n = 0
    for line in lines:
        out.write(line + "\n")
        n += 1
    return n


def _filter_counts(report: IngestReport, hist: Counter) -> dict:
    dropped = hist.pop("__dropped__", 0)
    return {
        "read": report.read,
        "malformed": report.malformed,
        "dropped": dropped,
        "kept": report.read - report.malformed - dropped,
        "dropped_by_feature": dict(sorted(hist.items())),
        "malformed_lines_sample": report.malformed_lines[:20],
    }


# -- commands --------------------------------------------------------------------


def cmd_normalize(args: argparse.Namespace, run: Run) -> None:
    stats: dict = {}
    with _open_in(args.input) as fin, _open_out(args.output) as fout:
        _write_lines(fout, normalize_stage(fin, stats))
    run.counts = stats


def cmd_filter(args: argparse.Namespace, run: Run) -> None:
    engine = _engine(args)
    report = IngestReport()
    hist: Counter = Counter()
    with _open_in(args.input) as fin, _open_out(args.output) as fout:
        records = iter_tsv_records(fin, args.src_lang, args.tgt_lang, header=args.header, report=report)
        _write_lines(fout, (line for line, _ in filter_stage(records, engine, args, hist)))
    run.counts = _filter_counts(report, hist)
    run.extra["filter_config"] = args.config_snapshot


def cmd_dedup(args: argparse.Namespace, run: Run) -> None:
    report = IngestReport()
    state = DedupState()
    with _open_in(args.input) as fin, _open_out(args.output) as fout:
        records = iter_tsv_records(fin, args.src_lang, args.tgt_lang, header=args.header, report=report)
        _write_lines(fout, (line for line, _ in dedup_stage(records, state)))
    run.counts = {"read": report.read, "kept": state.kept, "dropped": state.dropped, "malformed": report.malformed}


def cmd_pipeline(args: argparse.Namespace, run: Run) -> None:
    engine = _engine(args)
    norm_stats: dict = {}
    report = IngestReport()
    hist: Counter = Counter()
    state = DedupState()
    with _open_in(args.input) as fin, _open_out(args.output) as fout:
        lines = normalize_stage(fin, norm_stats)
        records = iter_tsv_records(lines, args.src_lang, args.tgt_lang, header=args.header, report=report)
        kept = dedup_stage(filter_stage(records, engine, args, hist), state)
        _write_lines(fout, (line for line, _ in kept))
    counts = _filter_counts(report, hist)
    counts["dropped_by_feature"]["duplicate"] = state.dropped
    counts["dropped"] += state.dropped
    counts["kept"] = state.kept
    counts["normalization"] = {k: v for k, v in norm_stats.items() if k not in ("read", "kept", "dropped", "malformed")}
    run.counts = counts
    run.extra["filter_config"] = args.config_snapshot


def _read_corpus(path: Path) -> list[str]:
    with open(path, encoding="utf-8", newline="\n") as fh:
        return [line.rstrip("\n") for line in fh]


def cmd_langid_train(args: argparse.Namespace, run: Run) -> None:
    corpora = {}
    for lang, path in args.corpus:
        corpora[lang] = _read_corpus(path)
        run.inputs.append(str(path))
    model = train_langid(corpora, n=args.order, alpha=args.alpha, lowercase=not args.case_sensitive)
    model.save(args.output)
    run.counts = {lang.code: model.line_counts[lang] for lang in model.languages}
    run.counts["ngrams"] = len(model.grams)


def cmd_langid_eval(args: argparse.Namespace, run: Run) -> None:
    model = LangIdModel.load(args.model)
    per_lang = {}
    correct_all = total_all = 0
    for lang, path in args.corpus:
        run.inputs.append(str(path))
        lines = [line for line in _read_corpus(path) if len(line) >= args.min_chars]
        correct = sum(model.predict(line)[0][0] == lang for line in lines)
        per_lang[lang.code] = {"n": len(lines), "accuracy": correct / len(lines) if lines else None}
        correct_all += correct
        total_all += len(lines)
    result = {"accuracy": correct_all / total_all if total_all else None, "n": total_all, "per_language": per_lang}
    with _open_out(args.output) as fout:
        fout.write(json.dumps(result, sort_keys=True) + "\n")
    run.counts = {"read": total_all, "kept": correct_all, "dropped": total_all - correct_all, "malformed": 0}


def cmd_sample(args: argparse.Namespace, run: Run) -> None:
    paths = {lang: path for lang, path in args.corpus}
    run.inputs = [str(p) for p in paths.values()]
    spec = SamplingSpec(Strategy(args.strategy), args.total, args.seed)
    result = sample_files(paths, spec, dedup_first=not args.no_dedup)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for lang, lines in sorted(result.lines.items()):
        target = out_dir / f"{lang.code}.txt"
        with _open_out(str(target)) as fh:
            _write_lines(fh, lines)
        run.outputs.append(str(target))
    run.counts = {lang.code: len(lines) for lang, lines in sorted(result.lines.items())}
    run.extra["quotas"] = {lang.code: q for lang, q in sorted(result.quotas.items())}
    run.extra["warnings"] = result.warnings


def cmd_vocab_train(args: argparse.Namespace, run: Run) -> None:
    lines: list[str] = []
    for path in args.input:
        with _open_in(path) as fh:
            lines.extend(line.rstrip("\n") for line in fh)
    size = args.size or vocab_size_for(args.num_languages)
    specials = ["<unk>", *(f">>{lang.code}<<" for lang in args.lang_tokens)]
    vocab = train_unigram_vocab(
        lines, size, args.seed_multiplier, args.prune_fraction, specials=specials
    )
    vocab.save(args.output)
    run.counts = {"read": len(lines), "target_size": size, "vocab_size": len(vocab)}


def cmd_vocab_stats(args: argparse.Namespace, run: Run) -> None:
    vocab = Vocabulary.load(args.vocab)
    eval_sets = {}
    for lang, path in args.eval:
        eval_sets[lang] = _read_corpus(path)
        run.inputs.append(str(path))
    result: dict = {"vocab_size": len(vocab)}
    if eval_sets:
        stats = tokenization_stats(vocab, eval_sets)
        result.update(
            totals={lang.code: n for lang, n in sorted(stats.totals.items())}, mean=stats.mean, std=stats.std
        )
    if args.compare:
        result["overlap"] = vocab_overlap(vocab, Vocabulary.load(args.compare))
    with _open_out(args.output) as fout:
        fout.write(json.dumps(result, sort_keys=True) + "\n")
    run.counts = {"eval_languages": len(eval_sets)}


def cmd_tokenize(args: argparse.Namespace, run: Run) -> None:
    vocab = Vocabulary.load(args.vocab)
    n = pieces = 0
    with _open_in(args.input) as fin, _open_out(args.output) as fout:
        for line in fin:
            toks = vocab.tokenize(line.rstrip("\n"))
            fout.write(" ".join(escape_piece(t) for t in toks) + "\n")
            n += 1
            pieces += len(toks)
    run.counts = {"read": n, "kept": n, "dropped": 0, "malformed": 0, "pieces": pieces}


def _backend(spec: str, args: argparse.Namespace) -> TranslationBackend:
    """``http(s)://...``, ``dict:LANG=PATH[,LANG=PATH...]`` or ``echo``."""
    if spec.startswith(("http://", "https://")):
        return HttpBackend(
            spec, timeout=args.timeout, retries=args.retries, batch_size=args.batch_size, max_workers=_threads(args)
        )
    if spec.startswith("dict:"):
        files = dict(_lang_path(item) for item in spec[5:].split(",") if item)
        return DictionaryBackend.from_files(files, name=spec)
    if spec == "echo":
        return EchoBackend(map(parse_language, ("ces", "eng", "pol", "slk", "slv")))
    raise BitextForgeError(f"unrecognized backend {spec!r} (use http(s)://..., dict:LANG=PATH or echo)")


def cmd_route(args: argparse.Namespace, run: Run) -> None:
    if args.backend_m2m:
        plan = direct_plan(args.source, args.target)
        backends = {Role.MANY2MANY: _backend(args.backend_m2m, args)}
    else:
        plan = plan_route(args.source, args.target, args.bridge)
        backends = {}
        if args.backend_m2o:
            backends[Role.MANY2ONE] = _backend(args.backend_m2o, args)
        if args.backend_o2m:
            backends[Role.ONE2MANY] = _backend(args.backend_o2m, args)
    with _open_in(args.input) as fin:
        texts = [line.rstrip("\n") for line in fin]
    trace: list[list[str]] = []
    out = translate_batch(plan, backends, texts, trace=trace, renormalize=not args.no_renormalize)
    with _open_out(args.output) as fout:
        _write_lines(fout, out)
    if args.trace and len(trace) > 1:
        with _open_out(args.trace) as fh:
            _write_lines(fh, trace[0])
        run.outputs.append(args.trace)
    run.counts = {"read": len(texts), "kept": len(out), "dropped": 0, "malformed": 0}
    run.extra["route"] = {"case": plan.case.value, "hops": [[h.role.value, h.target.code] for h in plan.hops]}


def cmd_score(args: argparse.Namespace, run: Run) -> None:
    run.inputs = [args.hyp, args.ref]
    report = score_file(args.hyp, args.ref, args.metric, threads=_threads(args))
    with _open_out(args.output) as fout:
        fout.write(format_report(report))
    run.counts = {"segments": len(report["segments"])}


def cmd_ablate(args: argparse.Namespace, run: Run) -> None:
    excluded = list(args.exclude or [])
    for path in args.exclude_file or []:
        excluded += read_directions(path)
    report = IngestReport()
    with _open_in(args.input) as fin:
        pairs = list(iter_tsv(fin, args.src_lang, args.tgt_lang, header=args.header, report=report))
    full = expand_directed(pairs, use_both_directions=not args.single_direction)
    kept = exclude_directions(full, excluded)
    with _open_out(args.output) as fout:
        for ex in kept:
            fout.write(f"{ex.direction.source}\t{ex.direction.target}\t{ex.source_text}\t{ex.target_text}\n")
    before = {str(d): n for d, n in sorted(full.counts.items(), key=lambda kv: str(kv[0]))}
    after = {str(d): n for d, n in sorted(kept.counts.items(), key=lambda kv: str(kv[0]))}
    run.counts = {
        "read": report.read,
        "malformed": report.malformed,
        "directed_examples": len(full),
        "kept": len(kept),
        "dropped": len(full) - len(kept),
        "per_direction_before": before,
        "per_direction_after": after,
    }
    run.extra["excluded_directions"] = sorted({str(d) for d in excluded})


# -- parser ----------------------------------------------------------------------


def _io_flags(p: argparse.ArgumentParser, stream_in: bool = True) -> None:
    if stream_in:
        p.add_argument("-i", "--input", default="-", help="input file (default: stdin)")
    p.add_argument("-o", "--output", default="-", help="output file (default: stdout)")


def _tsv_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--src-lang", type=_lang, help="source language for 2-column TSV")
    p.add_argument("--tgt-lang", type=_lang, help="target language for 2-column TSV")
    p.add_argument("--header", action="store_true", help="skip the first input line")


def _filter_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="filter config file (key = value); missing keys keep defaults")
    p.add_argument("--langid", help="langid model file; without it the language gate is off")
    p.add_argument(
        "--whitelist-scope", choices=("language", "union"), default="language",
        help="per-language character whitelist, or the union over --model-langs",
    )  # fmt: skip
    p.add_argument("--model-langs", type=_lang, nargs="*", default=[], help="languages covered by the model (union scope)")
    p.add_argument("--threads", type=_positive, help=f"worker threads (fallback: ${THREADS_ENV}, else 1)")
    p.add_argument("--batch-size", type=_positive, default=DEFAULT_BATCH, help="pairs per filtering batch")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bitext-forge", description="Parallel-corpus toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser.add_argument("--manifest", help="manifest path (default: OUTPUT.manifest.json, or stderr when streaming)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("normalize", help="NFKC + cleanup of every TSV field")
    _io_flags(p)
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("filter", help="drop pairs failing the feature thresholds")
    _io_flags(p)
    _tsv_flags(p)
    _filter_flags(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("dedup", help="either-side deduplication, first occurrence wins")
    _io_flags(p)
    _tsv_flags(p)
    p.set_defaults(func=cmd_dedup)

    p = sub.add_parser("pipeline", help="normalize, filter and dedup in one pass")
    _io_flags(p)
    _tsv_flags(p)
    _filter_flags(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("langid-train", help="train the character n-gram language identifier")
    p.add_argument("--corpus", type=_lang_path, action="append", required=True, metavar="LANG=PATH")
    p.add_argument("-n", "--order", type=_positive, default=3)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--case-sensitive", action="store_true", help="do not lowercase before counting")
    p.add_argument("-o", "--output", required=True, help="model file (.gz compresses)")
    p.set_defaults(func=cmd_langid_train)

    p = sub.add_parser("langid-eval", help="top-1 accuracy of a langid model")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", type=_lang_path, action="append", required=True, metavar="LANG=PATH")
    p.add_argument("--min-chars", type=int, default=30, help="skip shorter lines")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_langid_eval)

    p = sub.add_parser("sample", help="sample monolingual corpora for tokenizer training")
    p.add_argument("--corpus", type=_lang_path, action="append", required=True, metavar="LANG=PATH")
    p.add_argument("--strategy", choices=[s.value for s in Strategy], default="equal")
    p.add_argument("--total", type=int, required=True)
    p.add_argument("--seed", type=_seed, default=42)
    p.add_argument("--no-dedup", action="store_true", help="keep duplicate lines before sampling")
    p.add_argument("--out-dir", required=True, help="writes LANG.txt per language")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("vocab-train", help="train a unigram subword vocabulary")
    p.add_argument("-i", "--input", nargs="+", default=["-"], help="training text files (default: stdin)")
    size = p.add_mutually_exclusive_group(required=True)
    size.add_argument("--size", type=_positive)
    size.add_argument("--num-languages", type=_positive, help="size = 16000 per language")
    p.add_argument("--seed-multiplier", type=float, default=4.0)
    p.add_argument("--prune-fraction", type=float, default=0.2)
    p.add_argument("--lang-tokens", type=_lang, nargs="*", default=[], help="add >>xxx<< special tokens")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_vocab_train)

    p = sub.add_parser("vocab-stats", help="token counts per language and vocabulary overlap")
    p.add_argument("--vocab", required=True)
    p.add_argument("--eval", type=_lang_path, action="append", default=[], metavar="LANG=PATH")
    p.add_argument("--compare", help="second vocabulary for the overlap percentage")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_vocab_stats)

    p = sub.add_parser("tokenize", help="segment lines into subword pieces")
    p.add_argument("--vocab", required=True)
    _io_flags(p)
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("route", help="translate through a bridge language")
    p.add_argument("--source", type=_lang, required=True)
    p.add_argument("--target", type=_lang, required=True)
    p.add_argument("--bridge", type=_lang)
    p.add_argument("--backend-m2o", help="many-to-one backend (into the bridge)")
    p.add_argument("--backend-o2m", help="one-to-many backend (out of the bridge)")
    p.add_argument("--backend-m2m", help="single many-to-many backend instead of a pivot")
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--retries", type=int, default=2)
    p.add_argument("--batch-size", type=_positive, default=64)
    p.add_argument("--threads", type=_positive)
    p.add_argument("--no-renormalize", action="store_true", help="pass bridge sentences through untouched")
    p.add_argument("--trace", help="write the bridge sentences of a two-hop route here")
    _io_flags(p)
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("score", help="chrF or BLEU report for a hypothesis file")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--metric", choices=METRICS, default="chrf")
    p.add_argument("--threads", type=_positive)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("ablate", help="directed dataset with some directions removed")
    _io_flags(p)
    _tsv_flags(p)
    p.add_argument("--exclude", type=_direction, action="append", metavar="SRC-TGT")
    p.add_argument("--exclude-file", action="append", help="file with one SRC-TGT per line")
    p.add_argument("--single-direction", action="store_true", help="do not add the reverse of each pair")
    p.set_defaults(func=cmd_ablate)

    return parser


def _validate(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    if args.command == "route":
        if args.backend_m2m:
            if args.backend_m2o or args.backend_o2m or args.bridge:
                parser.error("--backend-m2m cannot be combined with --bridge/--backend-m2o/--backend-o2m")
        elif args.bridge is None:
            parser.error("--bridge is required unless --backend-m2m is given")
    if args.command == "sample" and args.total < 0:
        parser.error("--total must be >= 0")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(parser, args)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    run = Run(args.command, args)
    inp = getattr(args, "input", None)
    if isinstance(inp, str):
        run.inputs.append(inp)
    out = getattr(args, "output", None) if args.command != "sample" else None
    if out:
        run.outputs.append(out)
    try:
        args.func(args, run)
    except (BitextForgeError, OSError) as exc:
        print(f"bitext-forge {args.command}: error: {exc}", file=sys.stderr)
        return 1
    if args.command == "sample" and not args.manifest:
        run.write(str(Path(args.out_dir) / "manifest.json"))
    else:
        run.write(_manifest_path(args, out))
    return 0


if __name__ == "__main__":
    sys.exit(main())
