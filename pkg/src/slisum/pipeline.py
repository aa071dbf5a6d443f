"""End-to-end orchestration: sliding generation, filtration, aggregation.

Also owns configuration resolution (profiles, K/2 MinPts rule) and the
content-addressed response cache wrapped around any engine backend.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

from .aggregate import VoteOutcome, arrange, integrate, vote
from .cluster import ClusterSet, Statement, dbscan, default_min_pts, filter_clusters
from .engine import (
    ClassificationResult,
    EngineError,
    EngineParams,
    SummaryEngine,
    make_engine,
    parse_classification_response,
    render_partition,
)
from .lexical import tokenize
from .text import (
    Article,
    ConfigurationError,
    WindowPlan,
    build_window_plan,
    k_ratio,
    segment_sentences,
    window_text,
)

log = logging.getLogger(__name__)

SHORT_PROFILE_MAX_WORDS = 3000
BREAKEVEN_FACTOR = 1.36


@dataclass(frozen=True)
class Profile:
    name: str
    window_size: int
    step_size: int
    eps: float
    min_pts: int


SHORT_PROFILE = Profile("short", 150, 50, 0.25, 2)
LONG_PROFILE = Profile("long", 750, 150, 0.25, 3)


def resolve_profile(article_words: int) -> Profile:
    """Default hyperparameters by article length."""
    return SHORT_PROFILE if article_words < SHORT_PROFILE_MAX_WORDS else LONG_PROFILE


@dataclass
class PipelineConfig:
    window_size: int | None = None
    step_size: int | None = None
    eps: float | None = None
    min_pts: int | None = None
    backend: str = "mock"
    model: str | None = None
    max_tokens: int = 1024
    concurrency: int = 4
    cache_dir: str | None = None
    seed: int | None = None
    profile: str = "auto"  # auto | short | long

    def resolved(self, article_words: int) -> "ResolvedConfig":
        if self.profile == "short":
            prof = SHORT_PROFILE
        elif self.profile == "long":
            prof = LONG_PROFILE
        elif self.profile == "auto":
            prof = resolve_profile(article_words)
        else:
            raise ConfigurationError(f"unknown profile {self.profile!r}")

        window_size = self.window_size if self.window_size is not None else prof.window_size
        step_size = self.step_size if self.step_size is not None else prof.step_size
        eps = self.eps if self.eps is not None else prof.eps
        k = k_ratio(window_size, step_size)
        if self.min_pts is not None:
            min_pts = self.min_pts
        elif (window_size, step_size) == (prof.window_size, prof.step_size):
            min_pts = prof.min_pts
        else:
            min_pts = default_min_pts(k)
        if not 0.0 < eps < 1.0:
            raise ConfigurationError(f"eps must be in (0, 1), got {eps}")
        if not 1 <= min_pts <= k:
            raise ConfigurationError(f"min_pts {min_pts} outside [1, {k}]")
        return ResolvedConfig(
            window_size=window_size,
            step_size=step_size,
            eps=eps,
            min_pts=min_pts,
            k=k,
            backend=self.backend,
            model=self.model,
            max_tokens=self.max_tokens,
            concurrency=max(1, self.concurrency),
            cache_dir=self.cache_dir,
            seed=self.seed,
        )


@dataclass(frozen=True)
class ResolvedConfig:
    window_size: int
    step_size: int
    eps: float
    min_pts: int
    k: int
    backend: str
    model: str | None
    max_tokens: int
    concurrency: int
    cache_dir: str | None
    seed: int | None


class ResponseCache:
    """Content-addressed on-disk cache of engine responses.

    Keys hash (task, prompt_body, model, temperature, max_tokens); entries are
    written to a temp file then atomically renamed. Unreadable entries are
    quarantined and treated as misses.
    """

    def __init__(self, directory: str):
        self.directory = directory
        os.makedirs(directory, exist_ok=True)

    @staticmethod
    def key(task: str, prompt_body: str, params: EngineParams) -> str:
        material = json.dumps(
            {
                "task": task,
                "prompt_body": prompt_body,
                "model": params.model,
                "temperature": params.temperature,
                "max_tokens": params.max_tokens,
            },
            sort_keys=True,
            ensure_ascii=False,
        )
        return hashlib.sha256(material.encode("utf-8")).hexdigest()

    def _path(self, key: str) -> str:
        return os.path.join(self.directory, key + ".json")

    def lookup(self, key: str) -> dict | None:
        path = self._path(key)
        if not os.path.exists(path):
            return None
        try:
            with open(path, encoding="utf-8") as fh:
                entry = json.load(fh)
            if not isinstance(entry, dict) or "text" not in entry:
                raise ValueError("malformed cache entry")
            return entry
        except (ValueError, OSError) as exc:
            quarantine = path + ".quarantine"
            log.warning("quarantining unreadable cache entry %s (%s)", path, exc)
            try:
                os.replace(path, quarantine)
            except OSError:
                pass
            return None

    def store(self, key: str, entry: dict) -> None:
        path = self._path(key)
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(entry, fh, ensure_ascii=False)
            os.replace(tmp, path)
        except OSError:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def clear(self) -> int:
        removed = 0
        for name in os.listdir(self.directory):
            if name.endswith(".json") or name.endswith(".quarantine"):
                os.unlink(os.path.join(self.directory, name))
                removed += 1
        return removed


class CachedEngine:
    """Engine wrapper that serves repeats from the cache and counts backend calls."""

    def __init__(self, engine: SummaryEngine, cache: ResponseCache | None = None,
                 default_model: str | None = None):
        self.engine = engine
        self.cache = cache
        self.default_model = default_model
        self.backend_calls = 0
        self.cache_hits = 0

    def _cached_text(self, task: str, prompt_body: str, params: EngineParams, produce) -> str:
        params = params.resolved(task, default_model=self.default_model)
        key = None
        if self.cache is not None:
            key = ResponseCache.key(task, prompt_body, params)
            entry = self.cache.lookup(key)
            if entry is not None:
                self.cache_hits += 1
                return entry["text"]
        self.backend_calls += 1
        text = produce(params)
        if self.cache is not None:
            self.cache.store(key, {"text": text, "task": task})
        return text

    def summarize(self, window_text: str, params: EngineParams | None = None) -> str:
        params = params or EngineParams()
        return self._cached_text(
            "summarize", window_text, params,
            lambda p: self.engine.summarize(window_text, p),
        )

    def classify(self, statements: list[str], params: EngineParams | None = None) -> ClassificationResult:
        params = params or EngineParams()
        prompt_body = "\n".join(f"{i}. {s}" for i, s in enumerate(statements, 1))
        raw = self._cached_text(
            "classify", prompt_body, params,
            lambda p: self.engine.classify(statements, p).raw_response,
        )
        return ClassificationResult(
            partition=parse_classification_response(raw, len(statements)),
            raw_response=raw,
        )

    def connect(self, statements: list[str], params: EngineParams | None = None) -> str:
        params = params or EngineParams()
        prompt_body = "\n".join(statements)
        return self._cached_text(
            "connect", prompt_body, params,
            lambda p: self.engine.connect(statements, p),
        )


@dataclass
class RunStats:
    """Volatile per-run diagnostics, kept out of the canonical serialization so
    reruns stay byte-identical."""

    backend_calls: int = 0
    cache_hits: int = 0
    summarize_calls: int = 0
    classify_calls: int = 0
    connect_calls: int = 0
    elapsed_s: float = 0.0


@dataclass
class RunRecord:
    article_id: str
    status: str  # complete | aborted
    config: dict
    plan: dict
    local_summaries: list[dict]
    clusters: list[dict]
    noise: list[dict]
    votes: list[dict]
    final: dict
    flags: list[str]
    stats: RunStats = field(default_factory=RunStats)

    def to_dict(self, include_stats: bool = False) -> dict:
        data = {
            "article_id": self.article_id,
            "status": self.status,
            "config": self.config,
            "plan": self.plan,
            "local_summaries": self.local_summaries,
            "clusters": self.clusters,
            "noise": self.noise,
            "votes": self.votes,
            "final": self.final,
            "flags": self.flags,
        }
        if include_stats:
            data["stats"] = asdict(self.stats)
        return data

    def to_json(self, include_stats: bool = False) -> str:
        return json.dumps(self.to_dict(include_stats), sort_keys=True, ensure_ascii=False, indent=2)


def _statement_dict(stmt: Statement) -> dict:
    return {
        "text": stmt.text,
        "window_ordinal": stmt.window_ordinal,
        "generation_seq": stmt.generation_seq,
        "position_in_summary": stmt.position_in_summary,
    }


def _normalized(text: str) -> str:
    return " ".join(tokenize(text))


def build_engine(config: ResolvedConfig, engine: SummaryEngine | None = None) -> CachedEngine:
    if engine is None:
        engine = make_engine(config.backend, model=config.model) \
            if config.backend == "http" else make_engine(config.backend)
    cache = ResponseCache(config.cache_dir) if config.cache_dir else None
    return CachedEngine(engine, cache, default_model=config.model)


def run(
    article: Article,
    config: PipelineConfig,
    engine: SummaryEngine | None = None,
    record_dir: str | None = None,
) -> RunRecord:
    """Execute the full pipeline for one article.

    Window generations are dispatched concurrently up to the configured cap;
    generation_seq numbering follows deterministic plan order, so concurrency
    never changes the result. On an engine failure the partial record is
    persisted (when record_dir is given) and the error re-raised.
    """
    started = time.monotonic()
    resolved = config.resolved(article.total_words)
    cached = build_engine(resolved, engine)
    plan = build_window_plan(article, resolved.window_size, resolved.step_size)

    tasks = [
        (window, rep)
        for window in plan.windows
        for rep in range(1, window.repetitions + 1)
    ]
    params = EngineParams(model=resolved.model, max_tokens=resolved.max_tokens,
                          seed=resolved.seed)

    record = RunRecord(
        article_id=article.id,
        status="aborted",
        config={
            "window_size": resolved.window_size,
            "step_size": resolved.step_size,
            "eps": resolved.eps,
            "min_pts": resolved.min_pts,
            "k": resolved.k,
            "backend": resolved.backend,
            "model": resolved.model,
            "max_tokens": resolved.max_tokens,
            "seed": resolved.seed,
        },
        plan={
            "k_ratio": plan.k_ratio,
            "window_size": plan.window_size,
            "step_size": plan.step_size,
            "total_generations": plan.total_generations,
            "summarize_input_words": sum(w.word_count * w.repetitions for w in plan.windows),
            "breakeven_input_words": BREAKEVEN_FACTOR * plan.k_ratio * plan.window_size,
            "windows": [
                {
                    "ordinal": w.ordinal,
                    "start_sentence": w.start_sentence,
                    "end_sentence": w.end_sentence,
                    "word_count": w.word_count,
                    "repetitions": w.repetitions,
                }
                for w in plan.windows
            ],
        },
        local_summaries=[],
        clusters=[],
        noise=[],
        votes=[],
        final={"statements": [], "connected_text": "", "fallback": False},
        flags=[],
    )

    try:
        with ThreadPoolExecutor(max_workers=resolved.concurrency) as pool:
            summaries = list(
                pool.map(
                    lambda task: cached.summarize(window_text(article, task[0]), params),
                    tasks,
                )
            )
        record.stats.summarize_calls = len(tasks)

        statements: list[Statement] = []
        seq = 0
        for (window, rep), summary in zip(tasks, summaries):
            seqs = []
            for pos, sent in enumerate(segment_sentences(summary), 1):
                seq += 1
                statements.append(
                    Statement(
                        text=sent.text,
                        window_ordinal=window.ordinal,
                        generation_seq=seq,
                        position_in_summary=pos,
                    )
                )
                seqs.append(seq)
            record.local_summaries.append(
                {
                    "window_ordinal": window.ordinal,
                    "repetition": rep,
                    "text": summary,
                    "statement_seqs": seqs,
                }
            )

        cluster_set = dbscan(statements, resolved.eps, resolved.min_pts)
        retained = filter_clusters(cluster_set)
        record.noise = [_statement_dict(s) for s in cluster_set.noise]
        for cid, members in enumerate(retained, 1):
            if len(members) > resolved.k:
                record.flags.append(f"cluster {cid} exceeds K={resolved.k} statements")
            record.clusters.append(
                {
                    "id": cid,
                    "size": len(members),
                    "statement_seqs": [s.generation_seq for s in members],
                    "texts": [s.text for s in members],
                    "local_summary_count": len(
                        {_local_summary_of(record.local_summaries, s.generation_seq) for s in members}
                    ),
                }
            )

        outcomes: list[VoteOutcome] = []
        for cid, members in enumerate(retained, 1):
            normalized = {_normalized(s.text) for s in members}
            if len(normalized) == 1:
                partition = [list(range(1, len(members) + 1))]
            elif len(members) == 1:
                partition = [[1]]
            else:
                result = cached.classify([s.text for s in members], params)
                record.stats.classify_calls += 1
                partition = result.partition
            outcomes.append(vote(members, partition, cluster_id=cid))
        record.votes = [
            {
                "cluster_id": o.cluster_id,
                "partition": o.partition,
                "winner_category": o.winner_category,
                "winner_seq": o.winner_statement.generation_seq,
                "rationale": o.rationale,
            }
            for o in outcomes
        ]

        if not outcomes:
            record.flags.append("no cluster survived MinPts")
            connected, fallback = "", False
            arranged = []
            winner_cluster = {}
        else:
            selected = [o.winner_statement for o in outcomes]
            winner_cluster = {o.winner_statement.generation_seq: o.cluster_id for o in outcomes}
            arranged = arrange(selected, article)
            connected, fallback = integrate([s for s, _ in arranged], cached, params)
            record.stats.connect_calls = 1 if len(arranged) > 1 else 0

        offsets = _word_offsets(article)
        record.final = {
            "statements": [
                {
                    "text": s.text,
                    "source_anchor": anchor_idx,
                    "anchor_word_offset": offsets[anchor_idx - 1],
                    "window_ordinal": s.window_ordinal,
                    "generation_seq": s.generation_seq,
                    "cluster_id": winner_cluster[s.generation_seq] if arranged else None,
                }
                for s, anchor_idx in arranged
            ],
            "connected_text": connected,
            "fallback": fallback,
        }
        record.status = "complete"
        return record
    except EngineError:
        record.flags.append("aborted: engine error")
        if record_dir:
            persist_record(record, record_dir)
        raise
    finally:
        record.stats.backend_calls = cached.backend_calls
        record.stats.cache_hits = cached.cache_hits
        record.stats.elapsed_s = time.monotonic() - started


def _local_summary_of(local_summaries: list[dict], seq: int):
    for i, entry in enumerate(local_summaries):
        if seq in entry["statement_seqs"]:
            return i
    return None


def _word_offsets(article: Article) -> list[int]:
    """1-based word offset of each sentence's first word."""
    offsets = []
    total = 0
    for sent in article.sentences:
        offsets.append(total + 1)
        total += sent.word_count
    return offsets


def record_filename(article_id: str) -> str:
    safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in article_id)
    if not safe or safe != article_id:
        safe = (safe + "-" if safe else "") + hashlib.sha256(article_id.encode()).hexdigest()[:8]
    return safe + ".json"


def persist_record(record: RunRecord, directory: str) -> str:
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, record_filename(record.article_id))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(record.to_json())
        fh.write("\n")
    return path
