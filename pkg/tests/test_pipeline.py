import json
import os

import pytest

from slisum.engine import EngineError, EngineParams, MockEngine
from slisum.pipeline import (
    CachedEngine,
    PipelineConfig,
    ResponseCache,
    persist_record,
    resolve_profile,
    run,
)
from slisum.text import Article, ConfigurationError

from conftest import PLANTED_EVENTS, planted_article, random_article


class TestResolveProfile:
    def test_short_article(self):
        prof = resolve_profile(800)
        assert (prof.window_size, prof.step_size, prof.eps, prof.min_pts) == (150, 50, 0.25, 2)

    def test_long_article(self):
        prof = resolve_profile(6000)
        assert (prof.window_size, prof.step_size, prof.eps, prof.min_pts) == (750, 150, 0.25, 3)

    def test_override_uses_half_k_rule(self):
        config = PipelineConfig(window_size=900, step_size=180)
        resolved = config.resolved(article_words=800)
        assert resolved.k == 5
        assert resolved.min_pts == 3

    def test_explicit_min_pts_wins(self):
        resolved = PipelineConfig(min_pts=1).resolved(article_words=100)
        assert resolved.min_pts == 1

    def test_min_pts_out_of_range_rejected(self):
        with pytest.raises(ConfigurationError):
            PipelineConfig(window_size=150, step_size=50, min_pts=4).resolved(100)

    def test_bad_eps_rejected(self):
        with pytest.raises(ConfigurationError):
            PipelineConfig(eps=1.5).resolved(100)


class TestResponseCache:
    def params(self):
        return EngineParams(model="m", temperature=0.3, max_tokens=64)

    def test_hit_after_store(self, tmp_path):
        cache = ResponseCache(str(tmp_path))
        key = ResponseCache.key("summarize", "body", self.params())
        assert cache.lookup(key) is None
        cache.store(key, {"text": "cached"})
        assert cache.lookup(key)["text"] == "cached"

    def test_key_includes_params(self):
        a = ResponseCache.key("summarize", "body", EngineParams(model="m", temperature=0.3))
        b = ResponseCache.key("summarize", "body", EngineParams(model="m", temperature=0.0))
        c = ResponseCache.key("classify", "body", EngineParams(model="m", temperature=0.3))
        assert len({a, b, c}) == 3

    def test_corrupt_entry_quarantined(self, tmp_path):
        cache = ResponseCache(str(tmp_path))
        key = ResponseCache.key("summarize", "body", self.params())
        cache.store(key, {"text": "ok"})
        path = os.path.join(str(tmp_path), key + ".json")
        with open(path, "w") as fh:
            fh.write('{"text": "trunc')
        assert cache.lookup(key) is None
        assert os.path.exists(path + ".quarantine")
        assert not os.path.exists(path)

    def test_cached_engine_counts(self, tmp_path):
        cached = CachedEngine(MockEngine(), ResponseCache(str(tmp_path)), default_model="m")
        first = cached.summarize("One fine sentence.")
        again = cached.summarize("One fine sentence.")
        assert first == again
        assert cached.backend_calls == 1
        assert cached.cache_hits == 1


class TestRun:
    def test_planted_events_one_statement_each(self, planted):
        record = run(planted, PipelineConfig(profile="short", concurrency=1))
        assert record.status == "complete"
        final_texts = [s["text"] for s in record.final["statements"]]
        assert final_texts == list(PLANTED_EVENTS)
        anchors = [s["source_anchor"] for s in record.final["statements"]]
        assert anchors == sorted(anchors) == [2, 12, 22]
        # every selected statement comes from a cluster seen in >= MinPts local summaries
        min_pts = record.config["min_pts"]
        by_id = {c["id"]: c for c in record.clusters}
        for stmt in record.final["statements"]:
            cluster = by_id[stmt["cluster_id"]]
            assert cluster["size"] >= min_pts
            assert cluster["local_summary_count"] >= min_pts

    def test_deterministic_across_runs_and_concurrency(self, planted):
        records = [
            run(planted, PipelineConfig(profile="short", concurrency=jobs)).to_json()
            for jobs in (1, 4, 1, 4, 2)
        ]
        assert len(set(records)) == 1

    def test_short_article_k_identical_summaries(self):
        article = Article.from_text(
            "tiny",
            "Solar panels cut energy costs. Solar panels cut energy bills. "
            "Wind turbines spin near coasts.",
        )
        record = run(article, PipelineConfig(profile="short", concurrency=1))
        assert record.plan["total_generations"] == 3
        summaries = {entry["text"] for entry in record.local_summaries}
        assert len(summaries) == 1
        assert len(record.final["statements"]) == 1

    def test_no_cluster_survives(self):
        class UniqueEngine(MockEngine):
            """Every call yields a fresh statement: nothing reaches MinPts."""

            def __init__(self):
                self.calls = 0

            def summarize(self, window_text, params=None):
                self.calls += 1
                return f"Alone number{self.calls} only{self.calls}."

        article = Article.from_text(
            "sparse",
            "Aa bb cc dd. Ee ff gg hh. Ii jj kk ll. Mm nn oo pp.",
        )
        record = run(
            article,
            PipelineConfig(window_size=8, step_size=4, min_pts=2, concurrency=1),
            engine=UniqueEngine(),
        )
        assert record.clusters == []
        assert "no cluster survived MinPts" in record.flags
        assert record.final["connected_text"] == ""
        assert record.final["statements"] == []

    def test_engine_call_accounting(self, planted):
        record = run(planted, PipelineConfig(profile="short", concurrency=1))
        expected = record.plan["total_generations"]
        assert record.stats.summarize_calls == expected
        # all planted clusters are byte-identical copies: classification skipped
        assert record.stats.classify_calls == 0
        assert record.stats.connect_calls == 1
        assert record.stats.backend_calls == expected + 1

    def test_cache_rerun_zero_backend_calls(self, planted, tmp_path):
        config = PipelineConfig(profile="short", concurrency=2, cache_dir=str(tmp_path / "cache"))
        first = run(planted, config)
        second = run(planted, config)
        assert first.stats.backend_calls > 0
        assert second.stats.backend_calls == 0
        assert second.stats.cache_hits == first.stats.backend_calls
        assert first.to_json() == second.to_json()

    def test_partial_record_persisted_on_engine_error(self, planted, tmp_path):
        class FailingEngine(MockEngine):
            def __init__(self):
                self.calls = 0

            def summarize(self, window_text, params=None):
                self.calls += 1
                if self.calls > 3:
                    raise EngineError("backend down")
                return super().summarize(window_text, params)

        record_dir = str(tmp_path / "records")
        with pytest.raises(EngineError):
            run(planted, PipelineConfig(profile="short", concurrency=1),
                engine=FailingEngine(), record_dir=record_dir)
        files = os.listdir(record_dir)
        assert files == ["planted.json"]
        with open(os.path.join(record_dir, files[0])) as fh:
            partial = json.load(fh)
        assert partial["status"] == "aborted"
        assert "aborted: engine error" in partial["flags"]

    def test_breakeven_report_fields(self, planted):
        record = run(planted, PipelineConfig(profile="short", concurrency=1))
        plan = record.plan
        assert plan["summarize_input_words"] == sum(
            w["word_count"] * w["repetitions"] for w in plan["windows"]
        )
        assert plan["breakeven_input_words"] == pytest.approx(1.36 * plan["k_ratio"] * 150)

    def test_record_serialization_stable_keys(self, planted, tmp_path):
        record = run(planted, PipelineConfig(profile="short", concurrency=1))
        path = persist_record(record, str(tmp_path))
        with open(path) as fh:
            data = json.load(fh)
        assert data == record.to_dict()
        assert "stats" not in data

    def test_statements_traceable_to_one_generation(self, planted):
        record = run(planted, PipelineConfig(profile="short", concurrency=1))
        seen = {}
        for i, entry in enumerate(record.local_summaries):
            for seq in entry["statement_seqs"]:
                assert seq not in seen
                seen[seq] = i
        clustered = {seq for c in record.clusters for seq in c["statement_seqs"]}
        noise = {s["generation_seq"] for s in record.noise}
        assert clustered | noise <= set(seen)


class TestRandomizedPipeline:
    def test_runs_complete_on_random_articles(self):
        import random

        rng = random.Random(5)
        for _ in range(5):
            article = random_article(rng, rng.randint(10, 40))
            record = run(article, PipelineConfig(concurrency=2))
            assert record.status == "complete"
