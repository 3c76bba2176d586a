"""Command-line entry point.

Exit codes: 0 success, 1 other campaign errors, 2 config/template errors,
3 backend unreachable, 4 replay divergence.
"""
from __future__ import annotations

import logging
import sys
from pathlib import Path

import click

from .campaign import (
    compare_methods,
    default_template,
    recompute_report,
    replay_failure,
    run_campaign,
)
from .config import (
    CampaignConfig,
    apply_overrides,
    config_from_dict,
    load_config,
    validate_config,
)
from .environments import create_environment, environment_names
from .errors import (
    BackendError,
    ConfigError,
    ReplayDivergenceError,
    ScenfuzzError,
    TemplateError,
)
from .llm import load_template, validate_template
from .persist import read_config_snapshot, read_failures
from .report import render_report_md, save_campaign_figures, write_comparison


@click.group()
@click.option("-v", "--verbose", count=True, help="-v for info, -vv for debug output.")
def cli(verbose: int) -> None:
    """Search-based scenario testing for decision-making policies."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _load(config_path: str, overrides: tuple[str, ...], backend: str | None,
          out: str | None) -> CampaignConfig:
    cfg = load_config(config_path)
    cfg = apply_overrides(cfg, list(overrides))
    if backend:
        cfg.backend = backend
    if out:
        cfg.output_dir = out
    validate_config(cfg)
    return cfg


@cli.command()
@click.option("--config", "config_path", required=True, help="TOML campaign config.")
@click.option("--override", "overrides", multiple=True, metavar="SECTION.KEY=VALUE",
              help="Override a config value (repeatable).")
@click.option("--backend", type=click.Choice(["heuristic", "mock", "http"]), default=None,
              help="Override the LLM backend selection.")
@click.option("--out", default=None, help="Override the output directory.")
@click.option("--figures/--no-figures", default=True, help="Render PNG figures.")
def run(config_path, overrides, backend, out, figures) -> None:
    """Run one testing campaign and write its artifacts."""
    cfg = _load(config_path, overrides, backend, out)
    report = run_campaign(cfg, save_figures=figures)
    click.echo(
        f"{report.method} on {report.environment}: {report.failures_found} failures "
        f"in {report.tests_run} tests (rate {report.failure_rate:.4f}), "
        f"{report.llm_calls} llm calls, {report.random_calls} random calls"
    )
    click.echo(f"artifacts in {report.output_dir}")


@cli.command()
@click.option("--dir", "outdir", required=True, help="Campaign output directory.")
@click.option("--failure", "index", type=int, default=None,
              help="Failure index to replay; default replays every record.")
@click.option("--trace", is_flag=True, help="Print a frame-by-frame observation trace.")
def replay(outdir, index, trace) -> None:
    """Re-execute persisted failures and verify they reproduce."""
    outdir = Path(outdir)
    cfg = config_from_dict(read_config_snapshot(outdir))
    env = create_environment(cfg.environment)
    max_frames = cfg.max_frames or env.default_max_frames
    records = read_failures(outdir)
    if index is not None:
        matches = [r for r in records if r.index == index]
        if not matches:
            raise ConfigError(f"no failure with index {index} in {outdir}")
        records = matches
    for record in records:
        result = replay_failure(record, env, max_frames)
        click.echo(
            f"failure {record.index}: {record.failure_kind} at frame {result.frames} "
            f"(reward {result.cumulative_reward:.4f}) reproduced"
        )
        if trace:
            for state in result.trajectory:
                values = ", ".join(f"{v:.4f}" for v in state.observation)
                click.echo(f"  frame {state.frame:3d}: [{values}]")


@cli.command()
@click.option("--dir", "outdir", required=True, help="Campaign output directory.")
@click.option("--figures/--no-figures", default=True, help="Render PNG figures.")
def report(outdir, figures) -> None:
    """Recompute the report tables from raw artifacts and re-render report.md."""
    outdir = Path(outdir)
    summary = recompute_report(outdir)
    (outdir / "report.md").write_text(render_report_md(summary), encoding="utf-8")
    if figures:
        from .persist import read_metrics

        rows = [
            (
                int(r["iteration"]),
                int(r["cumulative_failures"]),
                float(r["failure_rate"]),
                float(r["alpha"]) if r["alpha"] != "" else None,
                r["origin"],
            )
            for r in read_metrics(outdir)
        ]
        save_campaign_figures(outdir, rows, summary["method"])
    div = summary["diversity"]
    click.echo(
        f"{summary['method']} on {summary['environment']}: "
        f"{summary['failures_found']} failures in {summary['tests_run']} tests, "
        f"diversity initial/terminal/entire = "
        f"{div['n_initial']}/{div['n_terminal']}/{div['n_entire']}"
    )


@cli.command()
@click.option("--config", "config_path", required=True, help="Base TOML campaign config.")
@click.option("--methods", default="random,mdpfuzz,llmtester",
              help="Comma-separated methods to compare.")
@click.option("--override", "overrides", multiple=True, metavar="SECTION.KEY=VALUE")
@click.option("--backend", type=click.Choice(["heuristic", "mock", "http"]), default=None)
@click.option("--out", default=None, help="Comparison output directory.")
def compare(config_path, methods, overrides, backend, out) -> None:
    """Run several methods under identical conditions and tabulate them."""
    base = _load(config_path, overrides, backend, out)
    root = Path(out) if out else Path(base.output_dir)
    configs = []
    for method in [m.strip() for m in methods.split(",") if m.strip()]:
        cfg = _load(config_path, overrides, backend, None)
        cfg.method = method
        cfg.output_dir = str(root / method)
        validate_config(cfg)
        configs.append(cfg)
    rows = compare_methods(configs)
    write_comparison(root, rows)
    for row in rows:
        click.echo(
            f"{row['method']:16s} failures={row['failures']:5d} "
            f"rate={row['failure_rate']:.4f} llm_calls={row['llm_calls']:5d} "
            f"diversity={row['n_initial']}/{row['n_terminal']}/{row['n_entire']}"
        )
    click.echo(f"comparison artifacts in {root}")


@cli.command(name="validate-template")
@click.option("--template", "template_path", default=None,
              help="Template file; omit to check the packaged default.")
@click.option("--environment", "env_name", required=True,
              type=click.Choice(environment_names()))
def validate_template_cmd(template_path, env_name) -> None:
    """Check a prompt template against an environment's scenario space."""
    env = create_environment(env_name)
    template = load_template(template_path) if template_path else default_template(env_name)
    problems = validate_template(template, env.space)
    if problems:
        raise TemplateError("; ".join(problems))
    click.echo(f"template is valid for {env_name} ({env.space.dims} dims)")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 2
    except click.ClickException as exc:
        exc.show()
        return 2
    except (ConfigError, TemplateError) as exc:
        click.echo(f"config error: {exc}", err=True)
        return 2
    except BackendError as exc:
        click.echo(f"backend error: {exc}", err=True)
        return 3
    except ReplayDivergenceError as exc:
        click.echo(f"replay divergence: {exc}", err=True)
        return 4
    except ScenfuzzError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except click.exceptions.Abort:
        return 1
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
