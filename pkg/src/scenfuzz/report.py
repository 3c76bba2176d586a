"""Human-readable report rendering and the matplotlib figures written
alongside the delimited outputs."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

FIGURE_DPI = 130

_STYLE = {
    "figure.figsize": (6.0, 3.6),
    "axes.grid": True,
    "grid.alpha": 0.35,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 10,
}


def render_report_md(summary: dict) -> str:
    """Markdown summary of one campaign, derived entirely from report.json."""
    div = summary["diversity"]
    out = summary["outcomes"]
    lines = [
        f"# Campaign report: {summary['method']} on {summary['environment']}",
        "",
        "## Totals",
        "",
        "| quantity | value |",
        "| --- | --- |",
        f"| tests run | {summary['tests_run']} |",
        f"| failures found | {summary['failures_found']} |",
        f"| failure rate | {summary['failure_rate']:.4f} |",
        f"| skipped generations | {summary['skipped_generations']} |",
        f"| LLM generator calls | {summary['llm_calls']} |",
        f"| random mutation calls | {summary['random_calls']} |",
        f"| final alpha | "
        + (f"{summary['final_alpha']:.4f} |" if summary["final_alpha"] is not None else "n/a |"),
        f"| wall clock (s) | {summary['wall_clock_seconds']:.2f} |",
        "",
        "## Corpus outcomes",
        "",
        "| outcome | count |",
        "| --- | --- |",
        f"| failure (seed removed) | {out['failed']} |",
        f"| added to corpus | {out['added']} |",
        f"| discarded | {out['discarded']} |",
        "",
        "## Failure diversity (grid cells over replayed failure trajectories)",
        "",
        "| metric | count |",
        "| --- | --- |",
        f"| distinct initial states | {div['n_initial']} |",
        f"| distinct terminal states | {div['n_terminal']} |",
        f"| distinct states overall | {div['n_entire']} |",
        "",
    ]
    return "\n".join(lines)


def _new_axes():
    fig, ax = plt.subplots()
    return fig, ax


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)
    return path


def save_campaign_figures(
    outdir: str | Path,
    metrics_rows: list[tuple[int, int, float, float | None, str]],
    method: str,
) -> list[Path]:
    """Render failure-count, failure-rate, and alpha-trace figures to PNG files."""
    outdir = Path(outdir)
    written = []
    iterations = [row[0] for row in metrics_rows]
    cumulative = [row[1] for row in metrics_rows]
    rates = [row[2] for row in metrics_rows]
    with plt.rc_context(_STYLE):
        fig, ax = _new_axes()
        ax.plot(iterations, cumulative, color="tab:red")
        ax.set_xlabel("test iteration")
        ax.set_ylabel("cumulative failures")
        ax.set_title(f"Failures found ({method})")
        written.append(_save(fig, outdir / "failures_vs_iteration.png"))

        fig, ax = _new_axes()
        ax.plot(iterations, rates, color="tab:blue")
        ax.set_xlabel("test iteration")
        ax.set_ylabel("failure rate")
        ax.set_title(f"Failure rate ({method})")
        written.append(_save(fig, outdir / "failure_rate.png"))

        alphas = [(row[0], row[3]) for row in metrics_rows if row[3] is not None]
        if alphas:
            fig, ax = _new_axes()
            ax.step([a[0] for a in alphas], [a[1] for a in alphas], where="post",
                    color="tab:green")
            ax.set_xlabel("test iteration")
            ax.set_ylabel("alpha (%)")
            ax.set_title("High-potential share (alpha) over the campaign")
            written.append(_save(fig, outdir / "alpha_trace.png"))
    return written


def render_comparison_md(rows: list[dict]) -> str:
    lines = [
        "# Method comparison",
        "",
        "| method | tests | failures | failure rate | llm calls | random calls "
        "| #initial | #terminal | #entire |",
        "| --- | --- | --- | --- | --- | --- | --- | --- | --- |",
    ]
    for row in rows:
        lines.append(
            f"| {row['method']} | {row['tests']} | {row['failures']} "
            f"| {row['failure_rate']:.4f} | {row['llm_calls']} | {row['random_calls']} "
            f"| {row['n_initial']} | {row['n_terminal']} | {row['n_entire']} |"
        )
    lines.append("")
    return "\n".join(lines)


def write_comparison(outdir: str | Path, rows: list[dict]) -> list[Path]:
    """Write comparison.csv, comparison.md, and an overlayed failures figure."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    csv_path = outdir / "comparison.csv"
    columns = (
        "method", "tests", "failures", "failure_rate", "llm_calls",
        "random_calls", "n_initial", "n_terminal", "n_entire",
    )
    with csv_path.open("w", encoding="utf-8") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(str(row[c]) for c in columns) + "\n")
    written.append(csv_path)

    md_path = outdir / "comparison.md"
    md_path.write_text(render_comparison_md(rows), encoding="utf-8")
    written.append(md_path)

    with plt.rc_context(_STYLE):
        fig, ax = _new_axes()
        for row in rows:
            metrics_rows = row["report"].metrics_rows
            ax.plot(
                [r[0] for r in metrics_rows],
                [r[1] for r in metrics_rows],
                label=row["method"],
            )
        ax.set_xlabel("test iteration")
        ax.set_ylabel("cumulative failures")
        ax.set_title("Failures found per method")
        ax.legend()
        written.append(_save(fig, outdir / "comparison.png"))
    return written
