"""Campaign orchestration: the generate-test-feedback loop, baselines,
failure replay, and method comparison.

The loop is logically sequential: the orchestrator is the single writer of
the corpus, the feedback ledger, the metrics tracker, and the generator
state. With the heuristic or mock backend the whole campaign is a pure
function of (config, seed), so outputs replay byte-identically.
"""
from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .config import CampaignConfig, config_from_dict, config_to_dict, validate_config
from .corpus import (
    Corpus,
    UpdateOutcome,
    draw_valid_params,
    init_random,
    sample_seed,
    update_after_test,
)
from .environments import Environment, create_environment, run_episode
from .errors import CampaignError, ConfigError, ReplayDivergenceError, ScenfuzzError, TemplateError
from .evaluation import DiversityCounts, DiversityGrid, MetricsTracker, diversity_counts
from .generator import GeneratorState, constrained_random_mutation, generate, update_alpha
from .llm import (
    ExpertExperience,
    FeedbackLedger,
    GenerationError,
    HeuristicBackend,
    HttpBackend,
    MockBackend,
    PromptTemplate,
    classify_bad_case,
    load_template,
    mutate_via_llm,
    validate_template,
)
from .persist import (
    FailureRecord,
    append_corpus_checkpoint,
    read_config_snapshot,
    read_failures,
    read_metrics,
    read_report_json,
    write_config_snapshot,
    write_failures,
    write_metrics,
    write_report_json,
)
from .space import Origin, Scenario

log = logging.getLogger(__name__)

_PACKAGED_TEMPLATES = {
    "collision-avoidance-2d": "collision_avoidance_2d.txt",
    "coop-nav": "coop_nav.txt",
}

_OUTCOME_KEYS = {
    UpdateOutcome.SEED_REMOVED: "failed",
    UpdateOutcome.ADDED_NEW: "added",
    UpdateOutcome.DISCARDED: "discarded",
}


@dataclass
class CampaignReport:
    environment: str
    method: str
    tests_run: int
    failures_found: int
    failure_rate: float
    skipped_generations: int
    llm_calls: int
    random_calls: int
    final_alpha: float | None
    diversity: DiversityCounts
    outcome_counts: dict[str, int]
    wall_clock: float
    output_dir: Path
    metrics_rows: list[tuple[int, int, float, float | None, str]]

    def summary_dict(self) -> dict:
        return {
            "environment": self.environment,
            "method": self.method,
            "tests_run": self.tests_run,
            "failures_found": self.failures_found,
            "failure_rate": self.failure_rate,
            "skipped_generations": self.skipped_generations,
            "llm_calls": self.llm_calls,
            "random_calls": self.random_calls,
            "final_alpha": self.final_alpha,
            "diversity": {
                "n_initial": self.diversity.n_initial,
                "n_terminal": self.diversity.n_terminal,
                "n_entire": self.diversity.n_entire,
            },
            "outcomes": dict(self.outcome_counts),
            "wall_clock_seconds": self.wall_clock,
        }


def default_template(environment_name: str) -> PromptTemplate:
    try:
        filename = _PACKAGED_TEMPLATES[environment_name]
    except KeyError:
        raise ConfigError(
            f"no packaged prompt template for environment {environment_name!r}; "
            "set llm.template in the config"
        ) from None
    with resources.as_file(
        resources.files("scenfuzz").joinpath("templates", filename)
    ) as path:
        return load_template(path)


def _resolve_template(config: CampaignConfig, env: Environment) -> PromptTemplate:
    template = (
        load_template(config.template) if config.template else default_template(env.name)
    )
    problems = validate_template(template, env.space)
    if problems:
        raise TemplateError("; ".join(problems))
    return template


def make_backend(config: CampaignConfig):
    if config.backend == "heuristic":
        return HeuristicBackend(config.environment)
    if config.backend == "mock":
        path = Path(config.mock_responses)
        if not path.is_file():
            raise ConfigError(f"mock responses file not found: {path}")
        responses = path.read_text(encoding="utf-8").split("\n---\n")
        return MockBackend(responses)
    return HttpBackend(
        config.base_url,
        config.model,
        temperature=config.temperature,
        timeout=config.timeout,
    )


def run_campaign(
    config: CampaignConfig, *, backend=None, save_figures: bool = False
) -> CampaignReport:
    """Execute one full testing campaign and persist all artifacts."""
    validate_config(config)
    started = time.perf_counter()
    env = create_environment(config.environment)
    max_frames = config.max_frames or env.default_max_frames
    rng = np.random.default_rng(config.seed)
    ids = itertools.count()

    def next_id() -> int:
        return next(ids)

    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    for stale in ("corpus.jsonl",):
        (outdir / stale).unlink(missing_ok=True)
    write_config_snapshot(outdir, config_to_dict(config))

    uses_corpus = config.method != "random"
    uses_llm = config.method in ("llmtester", "llmtester-no-ms")
    multi_scale = config.method == "llmtester"

    tracker = MetricsTracker()
    state = GeneratorState(
        alpha=config.alpha, beta=config.beta, delta=config.delta, amplitude=config.amplitude
    )
    ledger = FeedbackLedger(config.feedback_cap)
    experience = ExpertExperience(tuple(config.experience))
    freshness_grid = DiversityGrid(
        intervals=config.diversity_n,
        lower=env.observation_lower,
        upper=env.observation_upper,
    )

    corpus: Corpus | None = None
    t_r = config.t_r
    if uses_corpus:
        corpus = init_random(
            env,
            config.corpus_size,
            rng,
            next_id=next_id,
            grid=freshness_grid,
            sensitivity_amplitude=config.sensitivity_amplitude,
            sensitivity_draws=config.sensitivity_draws,
            max_frames=max_frames,
            capacity=config.corpus_capacity,
        )
        append_corpus_checkpoint(outdir, 0, corpus)
        if t_r == 0.0:
            rewards = [e.r_seed for e in corpus]
            t_r = max(0.1 * (max(rewards) - min(rewards)), 1e-9)
    elif t_r == 0.0:
        t_r = 1.0

    template = _resolve_template(config, env) if uses_llm else None
    if uses_llm and backend is None:
        backend = make_backend(config)

    def llm_mutator(seed_scenario: Scenario) -> Scenario:
        return mutate_via_llm(
            backend, template, env.space, seed_scenario, ledger, experience,
            scenario_id=next_id(), constraint=env.constraint,
        )

    failures: list[FailureRecord] = []
    outcome_counts = {"failed": 0, "added": 0, "discarded": 0}
    skipped = 0
    attempts = 0
    max_attempts = 3 * config.budget + 10

    while tracker.tests_run < config.budget:
        if attempts >= max_attempts:
            raise CampaignError(
                f"generation kept failing: {skipped} skipped iterations in "
                f"{attempts} attempts, {tracker.tests_run}/{config.budget} tests run"
            )
        attempts += 1
        alpha_at_gen = state.alpha if multi_scale else None
        seed_entry = None
        try:
            if config.method == "random":
                scenario = Scenario(
                    id=next_id(),
                    params=draw_valid_params(env, rng),
                    origin=Origin.INITIAL_SAMPLE,
                )
            else:
                if not corpus.entries:
                    raise CampaignError(
                        f"corpus exhausted after {tracker.tests_run} tests; "
                        "no seeds left to mutate"
                    )
                seed_entry = sample_seed(corpus, rng)
                if config.method == "mdpfuzz":
                    scenario = constrained_random_mutation(
                        env.space, seed_entry.scenario, state.amplitude, rng,
                        next_id(), constraint=env.constraint,
                    )
                    state.random_calls += 1
                elif config.method == "llmtester-no-ms":
                    state.llm_calls += 1
                    scenario = llm_mutator(seed_entry.scenario)
                else:
                    potentials = [e.potential for e in corpus.entries]
                    scenario = generate(
                        state, seed_entry, potentials, llm_mutator, rng,
                        space=env.space, next_id=next_id, constraint=env.constraint,
                        percentile_method=config.percentile_method,
                    )
        except GenerationError as exc:
            skipped += 1
            log.debug("iteration skipped, generation failed: %s", exc)
            continue

        result = run_episode(env, scenario, max_frames)
        tracker.record(result.failed, scenario.origin.value, alpha_at_gen)
        iteration = tracker.tests_run

        if uses_llm and scenario.origin is Origin.LLM_MUTATION and not result.failed:
            bad = classify_bad_case(
                env.space, seed_entry.scenario, scenario,
                seed_entry.r_seed, result.cumulative_reward, t_r, config.t_s,
                norm=config.distance_norm,
            )
            if bad is not None:
                ledger.add(bad)

        if uses_corpus:
            outcome = update_after_test(
                corpus, seed_entry, scenario, result, freshness_grid, env, rng,
                iteration=iteration,
                sensitivity_amplitude=config.sensitivity_amplitude,
                sensitivity_draws=config.sensitivity_draws,
                max_frames=max_frames,
            )
            outcome_counts[_OUTCOME_KEYS[outcome]] += 1
        else:
            outcome_counts["failed" if result.failed else "discarded"] += 1

        if result.failed:
            failures.append(
                FailureRecord(
                    index=len(failures),
                    iteration=iteration,
                    scenario_id=scenario.id,
                    params=scenario.params,
                    parent=scenario.parent,
                    origin=scenario.origin.value,
                    frames=result.frames,
                    failure_kind=result.failure_kind,
                    reward=result.cumulative_reward,
                )
            )
            if multi_scale:
                update_alpha(state, tracker.failure_rate(config.failure_rate_window))

        if uses_corpus and iteration % config.checkpoint_every == 0:
            append_corpus_checkpoint(outdir, iteration, corpus)

    if uses_corpus and tracker.tests_run % config.checkpoint_every != 0:
        append_corpus_checkpoint(outdir, tracker.tests_run, corpus)

    metrics_rows = _metrics_rows(tracker)
    write_failures(outdir, failures)
    write_metrics(outdir, metrics_rows)

    diversity = _diversity_from_failures(env, failures, max_frames, config.diversity_n)
    report = CampaignReport(
        environment=config.environment,
        method=config.method,
        tests_run=tracker.tests_run,
        failures_found=tracker.failures_found,
        failure_rate=tracker.failures_found / tracker.tests_run,
        skipped_generations=skipped,
        llm_calls=state.llm_calls,
        random_calls=state.random_calls,
        final_alpha=state.alpha if multi_scale else None,
        diversity=diversity,
        outcome_counts=outcome_counts,
        wall_clock=time.perf_counter() - started,
        output_dir=outdir,
        metrics_rows=metrics_rows,
    )
    write_report_json(outdir, report.summary_dict())
    from .report import render_report_md, save_campaign_figures  # lazy: pulls in matplotlib

    (outdir / "report.md").write_text(render_report_md(report.summary_dict()), encoding="utf-8")
    if save_figures:
        save_campaign_figures(outdir, metrics_rows, config.method)
    log.info(
        "%s on %s: %d failures in %d tests",
        config.method, config.environment, tracker.failures_found, tracker.tests_run,
    )
    return report


def _metrics_rows(tracker: MetricsTracker) -> list[tuple[int, int, float, float | None, str]]:
    rows = []
    cumulative = 0
    for iteration, failed, origin, alpha in tracker.rows:
        cumulative += int(failed)
        rows.append((iteration, cumulative, cumulative / iteration, alpha, origin))
    return rows


def _diversity_from_failures(
    env: Environment, failures: list[FailureRecord], max_frames: int, intervals: int
) -> DiversityCounts:
    if not failures:
        return DiversityCounts(0, 0, 0)
    trajectories = []
    for record in failures:
        result = replay_failure(record, env, max_frames)
        trajectories.append([state.observation for state in result.trajectory])
    return diversity_counts(trajectories, intervals)


def replay_failure(record: FailureRecord, env: Environment, max_frames: int | None = None):
    """Re-run a persisted failure; divergence is a loud error, never a warning."""
    result = run_episode(env, record.to_scenario(), max_frames)
    if not result.failed:
        raise ReplayDivergenceError(
            f"failure {record.index} (scenario {record.scenario_id}) did not fail on replay"
        )
    if result.frames != record.frames or result.failure_kind != record.failure_kind:
        raise ReplayDivergenceError(
            f"failure {record.index} diverged: recorded {record.failure_kind} at frame "
            f"{record.frames}, replayed {result.failure_kind} at frame {result.frames}"
        )
    return result


def compare_methods(configs: list[CampaignConfig], *, save_figures: bool = False) -> list[dict]:
    """Run several methods under identical conditions; one summary row each."""
    if not configs:
        raise ConfigError("compare needs at least one config")
    anchor = (configs[0].environment, configs[0].budget, configs[0].seed)
    for cfg in configs[1:]:
        if (cfg.environment, cfg.budget, cfg.seed) != anchor:
            raise ConfigError(
                "compared configs must share environment, budget and seed; "
                f"{(cfg.environment, cfg.budget, cfg.seed)} != {anchor}"
            )
    rows = []
    reports = []
    for cfg in configs:
        report = run_campaign(cfg, save_figures=save_figures)
        reports.append(report)
        rows.append(
            {
                "method": cfg.method,
                "tests": report.tests_run,
                "failures": report.failures_found,
                "failure_rate": report.failure_rate,
                "llm_calls": report.llm_calls,
                "random_calls": report.random_calls,
                "n_initial": report.diversity.n_initial,
                "n_terminal": report.diversity.n_terminal,
                "n_entire": report.diversity.n_entire,
                "report": report,
            }
        )
    return rows


def recompute_report(outdir: str | Path) -> dict:
    """Rebuild the report numbers from raw artifacts and cross-check them.

    Returns the stored summary after verifying every recomputable quantity
    (tests, failures, rate, final alpha, diversity) matches a fresh
    recomputation; a mismatch means the artifacts were tampered with or a
    determinism bug crept in.
    """
    outdir = Path(outdir)
    cfg = config_from_dict(read_config_snapshot(outdir))
    env = create_environment(cfg.environment)
    max_frames = cfg.max_frames or env.default_max_frames
    failures = read_failures(outdir)
    metrics = read_metrics(outdir)
    stored = read_report_json(outdir)

    tests_run = len(metrics)
    failures_found = int(metrics[-1]["cumulative_failures"]) if metrics else 0
    if failures_found != len(failures):
        raise ScenfuzzError(
            f"metrics.csv says {failures_found} failures but failures.jsonl has {len(failures)}"
        )
    diversity = _diversity_from_failures(env, failures, max_frames, cfg.diversity_n)

    recomputed = {
        "tests_run": tests_run,
        "failures_found": failures_found,
        "failure_rate": failures_found / tests_run if tests_run else 0.0,
        "diversity": {
            "n_initial": diversity.n_initial,
            "n_terminal": diversity.n_terminal,
            "n_entire": diversity.n_entire,
        },
    }
    for key, value in recomputed.items():
        if stored.get(key) != value:
            raise ScenfuzzError(
                f"report.json disagrees with recomputation for {key}: "
                f"stored {stored.get(key)!r}, recomputed {value!r}"
            )
    return stored
