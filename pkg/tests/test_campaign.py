from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest

import scenfuzz.environments as envs
from scenfuzz.campaign import (
    compare_methods,
    recompute_report,
    replay_failure,
    run_campaign,
)
from scenfuzz.config import CampaignConfig
from scenfuzz.environments import create_environment, register_environment
from scenfuzz.errors import CampaignError, ConfigError, ReplayDivergenceError, ScenfuzzError
from scenfuzz.llm import MockBackend
from scenfuzz.llm.prompt import format_params
from scenfuzz.persist import read_failures, read_metrics

from conftest import FakeEnv


def small_config(tmp_path, name="run", **kwargs):
    defaults = dict(
        environment="collision-avoidance-2d",
        method="llmtester",
        budget=30,
        seed=5,
        output_dir=str(tmp_path / name),
        corpus_size=6,
        max_frames=100,
        alpha=25.0,
        beta=0.7,
        delta=0.1,
        amplitude=0.05,
    )
    defaults.update(kwargs)
    return CampaignConfig(**defaults)


class TestRandomBaseline:
    def test_budget_fresh_scenarios_no_corpus(self, tmp_path):
        cfg = small_config(tmp_path, method="random", budget=25)
        report = run_campaign(cfg)
        assert report.tests_run == 25
        assert len(report.metrics_rows) == 25
        rows = read_metrics(Path(cfg.output_dir))
        assert len(rows) == 25
        assert all(r["origin"] == "InitialSample" for r in rows)
        assert not (Path(cfg.output_dir) / "corpus.jsonl").exists()
        assert report.llm_calls == 0 and report.random_calls == 0


class TestMdpfuzzBaseline:
    def test_all_random_mutations_with_corpus(self, tmp_path):
        cfg = small_config(tmp_path, method="mdpfuzz", budget=25)
        report = run_campaign(cfg)
        rows = read_metrics(Path(cfg.output_dir))
        assert all(r["origin"] == "RandomMutation" for r in rows)
        assert (Path(cfg.output_dir) / "corpus.jsonl").exists()
        assert report.llm_calls == 0
        assert report.random_calls == 25


class TestLlmTester:
    def test_conservation_of_outcomes(self, tmp_path):
        for method in ("random", "mdpfuzz", "llmtester", "llmtester-no-ms"):
            cfg = small_config(tmp_path, name=method, method=method, budget=20)
            report = run_campaign(cfg)
            assert report.tests_run == 20
            assert sum(report.outcome_counts.values()) == 20
            assert report.outcome_counts["failed"] == report.failures_found

    def test_alpha_changes_only_after_failures(self, tmp_path):
        cfg = small_config(tmp_path, budget=60, corpus_size=10)
        run_campaign(cfg)
        rows = read_metrics(Path(cfg.output_dir))
        cumulative = [int(r["cumulative_failures"]) for r in rows]
        alphas = [float(r["alpha"]) for r in rows]
        for i in range(1, len(rows)):
            if alphas[i] != alphas[i - 1]:
                assert cumulative[i - 1] > (cumulative[i - 2] if i >= 2 else 0)

    def test_no_ms_never_uses_random_mutation(self, tmp_path):
        cfg = small_config(tmp_path, method="llmtester-no-ms", budget=15)
        report = run_campaign(cfg)
        assert report.random_calls == 0
        assert report.llm_calls == 15
        rows = read_metrics(Path(cfg.output_dir))
        assert all(r["origin"] == "LlmMutation" for r in rows)
        assert all(r["alpha"] == "" for r in rows)

    def test_skipped_generations_logged_not_tested(self, tmp_path):
        # two malformed responses burn one generation, then good ones flow
        good = f"New Scenario: {format_params((1000.0, 0.0, 3.1, 120.0, 150.0))}"
        backend = MockBackend(["junk", "junk"] + [good] * 10)
        cfg = small_config(tmp_path, method="llmtester-no-ms", budget=3,
                           backend="mock", mock_responses="unused-placeholder")
        report = run_campaign(cfg, backend=backend)
        assert report.skipped_generations == 1
        assert report.tests_run == 3
        assert report.llm_calls == 4  # one failed generation + three tested

    def test_corpus_exhaustion_raises_campaign_error(self, tmp_path):
        register_environment("always-fail", lambda: FakeEnv(fail_fn=lambda p: True))
        try:
            cfg = small_config(
                tmp_path, environment="always-fail", method="mdpfuzz",
                budget=10, corpus_size=2, max_frames=0,
            )
            with pytest.raises(CampaignError, match="corpus exhausted"):
                run_campaign(cfg)
        finally:
            del envs._REGISTRY["always-fail"]


class TestDeterminism:
    def test_two_runs_byte_identical(self, tmp_path):
        reports = []
        for name in ("a", "b"):
            cfg = small_config(tmp_path, name=name, budget=40, corpus_size=8)
            reports.append(run_campaign(cfg))
        for filename in ("failures.jsonl", "metrics.csv"):
            a = (tmp_path / "a" / filename).read_bytes()
            b = (tmp_path / "b" / filename).read_bytes()
            assert a == b
        assert reports[0].failures_found == reports[1].failures_found


class TestArtifacts:
    def test_output_layout_and_schema_version(self, tmp_path):
        cfg = small_config(tmp_path, budget=20)
        run_campaign(cfg)
        out = Path(cfg.output_dir)
        for name in ("config.snapshot", "failures.jsonl", "corpus.jsonl",
                     "metrics.csv", "report.md", "report.json"):
            assert (out / name).exists(), name
        snapshot = json.loads((out / "config.snapshot").read_text())
        assert snapshot["schema_version"] == 1
        assert snapshot["config"]["campaign"]["budget"] == 20
        for line in (out / "failures.jsonl").read_text().splitlines():
            assert json.loads(line)["schema_version"] == 1
        for line in (out / "corpus.jsonl").read_text().splitlines():
            assert json.loads(line)["schema_version"] == 1
        with (out / "metrics.csv").open() as fh:
            header = next(csv.reader(fh))
        assert header == ["iteration", "cumulative_failures", "failure_rate",
                          "alpha", "origin"]

    def test_corpus_checkpoints_at_interval(self, tmp_path):
        cfg = small_config(tmp_path, budget=20, checkpoint_every=10)
        run_campaign(cfg)
        iterations = set()
        for line in (Path(cfg.output_dir) / "corpus.jsonl").read_text().splitlines():
            iterations.add(json.loads(line)["checkpoint_iteration"])
        assert iterations == {0, 10, 20}


class TestReplay:
    def run_until_failures(self, tmp_path):
        cfg = small_config(tmp_path, budget=60, corpus_size=10)
        report = run_campaign(cfg)
        assert report.failures_found > 0, "fixture needs at least one failure"
        return cfg, report

    def test_every_record_replays(self, tmp_path):
        cfg, _ = self.run_until_failures(tmp_path)
        env = create_environment(cfg.environment)
        for record in read_failures(Path(cfg.output_dir)):
            result = replay_failure(record, env, cfg.max_frames)
            assert result.failed
            assert result.frames == record.frames

    def test_tampered_params_diverge(self, tmp_path):
        cfg, _ = self.run_until_failures(tmp_path)
        env = create_environment(cfg.environment)
        record = read_failures(Path(cfg.output_dir))[0]
        # a separating geometry cannot fail
        tampered = type(record)(
            index=record.index, iteration=record.iteration,
            scenario_id=record.scenario_id,
            params=(2000.0, 0.0, 0.0, 50.0, 200.0),
            parent=record.parent, origin=record.origin,
            frames=record.frames, failure_kind=record.failure_kind,
            reward=record.reward,
        )
        with pytest.raises(ReplayDivergenceError, match="did not fail"):
            replay_failure(tampered, env, cfg.max_frames)

    def test_tampered_frame_count_diverges(self, tmp_path):
        cfg, _ = self.run_until_failures(tmp_path)
        env = create_environment(cfg.environment)
        record = read_failures(Path(cfg.output_dir))[0]
        tampered = type(record)(
            index=record.index, iteration=record.iteration,
            scenario_id=record.scenario_id, params=record.params,
            parent=record.parent, origin=record.origin,
            frames=record.frames + 1, failure_kind=record.failure_kind,
            reward=record.reward,
        )
        with pytest.raises(ReplayDivergenceError, match="diverged"):
            replay_failure(tampered, env, cfg.max_frames)


class TestCompareMethods:
    def test_rows_and_determinism(self, tmp_path):
        def configs(prefix):
            return [
                small_config(tmp_path, name=f"{prefix}-{m}", method=m, budget=15)
                for m in ("random", "mdpfuzz", "llmtester")
            ]

        rows_a = compare_methods(configs("a"))
        rows_b = compare_methods(configs("b"))
        assert [r["method"] for r in rows_a] == ["random", "mdpfuzz", "llmtester"]
        for ra, rb in zip(rows_a, rows_b):
            for key in ("failures", "failure_rate", "llm_calls", "random_calls",
                        "n_initial", "n_terminal", "n_entire"):
                assert ra[key] == rb[key]

    def test_multi_scale_uses_fewer_llm_calls_at_equal_budget(self, tmp_path):
        rows = compare_methods([
            small_config(tmp_path, name=f"calls-{m}", method=m, budget=40,
                         corpus_size=10)
            for m in ("llmtester", "llmtester-no-ms")
        ])
        by_method = {r["method"]: r for r in rows}
        assert (by_method["llmtester"]["llm_calls"]
                < by_method["llmtester-no-ms"]["llm_calls"])

    def test_mismatched_environments_rejected(self, tmp_path):
        a = small_config(tmp_path, name="x", budget=5)
        b = small_config(tmp_path, name="y", budget=5, environment="coop-nav",
                         max_frames=25, alpha=20.0, beta=0.5)
        with pytest.raises(ConfigError, match="share environment"):
            compare_methods([a, b])


class TestRecomputeReport:
    def test_matches_stored_summary(self, tmp_path):
        cfg = small_config(tmp_path, budget=40, corpus_size=8)
        report = run_campaign(cfg)
        stored = recompute_report(cfg.output_dir)
        assert stored["failures_found"] == report.failures_found
        assert stored["diversity"]["n_entire"] == report.diversity.n_entire

    def test_tampered_artifacts_detected(self, tmp_path):
        cfg = small_config(tmp_path, budget=40, corpus_size=8)
        report = run_campaign(cfg)
        assert report.failures_found > 0
        failures_path = Path(cfg.output_dir) / "failures.jsonl"
        lines = failures_path.read_text().splitlines()
        failures_path.write_text("\n".join(lines[:-1]) + "\n", encoding="utf-8")
        with pytest.raises(ScenfuzzError):
            recompute_report(cfg.output_dir)
