"""On-disk campaign artifacts: config snapshot, failures, corpus checkpoints, metrics.

Everything written here is a pure function of the campaign's in-memory state
so two identical runs produce byte-identical failures.jsonl and metrics.csv
(wall-clock lives only in report.json / report.md).
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

from .errors import ConfigError
from .space import Origin, Scenario

SCHEMA_VERSION = 1

CONFIG_SNAPSHOT = "config.snapshot"
FAILURES_FILE = "failures.jsonl"
CORPUS_FILE = "corpus.jsonl"
METRICS_FILE = "metrics.csv"
REPORT_JSON = "report.json"
REPORT_MD = "report.md"

METRICS_COLUMNS = ("iteration", "cumulative_failures", "failure_rate", "alpha", "origin")


@dataclass(frozen=True)
class FailureRecord:
    index: int
    iteration: int
    scenario_id: int
    params: tuple[float, ...]
    parent: int | None
    origin: str
    frames: int
    failure_kind: str
    reward: float

    def to_scenario(self) -> Scenario:
        return Scenario(
            id=self.scenario_id,
            params=self.params,
            parent=self.parent,
            origin=Origin(self.origin),
        )


def write_config_snapshot(outdir: Path, config_dict: dict) -> None:
    payload = {"schema_version": SCHEMA_VERSION, "config": config_dict}
    (outdir / CONFIG_SNAPSHOT).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def read_config_snapshot(outdir: Path) -> dict:
    path = outdir / CONFIG_SNAPSHOT
    if not path.is_file():
        raise ConfigError(f"no {CONFIG_SNAPSHOT} in {outdir}")
    return json.loads(path.read_text(encoding="utf-8"))["config"]


def write_failures(outdir: Path, records: list[FailureRecord]) -> None:
    with (outdir / FAILURES_FILE).open("w", encoding="utf-8") as fh:
        for rec in records:
            row = {"schema_version": SCHEMA_VERSION, **asdict(rec)}
            row["params"] = list(rec.params)
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def read_failures(outdir: Path) -> list[FailureRecord]:
    path = outdir / FAILURES_FILE
    if not path.is_file():
        raise ConfigError(f"no {FAILURES_FILE} in {outdir}")
    records = []
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            row.pop("schema_version", None)
            row["params"] = tuple(row["params"])
            records.append(FailureRecord(**row))
    return records


def append_corpus_checkpoint(outdir: Path, iteration: int, corpus) -> None:
    with (outdir / CORPUS_FILE).open("a", encoding="utf-8") as fh:
        for entry in corpus:
            fh.write(
                json.dumps(
                    {
                        "schema_version": SCHEMA_VERSION,
                        "checkpoint_iteration": iteration,
                        "scenario_id": entry.scenario.id,
                        "params": list(entry.scenario.params),
                        "r_seed": entry.r_seed,
                        "sensitivity": entry.sensitivity,
                        "potential": entry.potential,
                        "added_at": entry.added_at,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def write_metrics(outdir: Path, rows: list[tuple[int, int, float, float | None, str]]) -> None:
    """Rows: (iteration, cumulative_failures, failure_rate, alpha|None, origin)."""
    with (outdir / METRICS_FILE).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_COLUMNS)
        for iteration, cum, rate, alpha, origin in rows:
            writer.writerow(
                [iteration, cum, repr(rate), "" if alpha is None else repr(alpha), origin]
            )


def read_metrics(outdir: Path) -> list[dict]:
    path = outdir / METRICS_FILE
    if not path.is_file():
        raise ConfigError(f"no {METRICS_FILE} in {outdir}")
    with path.open(encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def write_report_json(outdir: Path, summary: dict) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **summary}
    (outdir / REPORT_JSON).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def read_report_json(outdir: Path) -> dict:
    path = outdir / REPORT_JSON
    if not path.is_file():
        raise ConfigError(f"no {REPORT_JSON} in {outdir}")
    return json.loads(path.read_text(encoding="utf-8"))
