"""Figure rendering for the report path.

Core evaluation emits box-plot statistics as data; this module draws them
(one relative-error box plot per target across groups) and flattens the
metric cells into a delimited summary.  Rendering is presentation only and
never recomputes metrics.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from wahls.benchmark import MetricsReport


def metrics_csv(report: MetricsReport, path: Union[str, Path]) -> Path:
    """Flat delimited table: one row per (group, target) metric cell."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["group", "target", "n", "r2", "smape", "rmse", "rpe_median", "rpe_mean"])
        for group in sorted(report.groups):
            for target in report.targets:
                cell = report.groups[group][target]
                writer.writerow(
                    [
                        group,
                        target,
                        cell.n,
                        "skipped" if cell.r2_skipped else repr(cell.r2),
                        repr(cell.smape),
                        repr(cell.rmse),
                        repr(cell.rpe_box.median),
                        repr(cell.rpe_box.mean),
                    ]
                )
    return path


def render_rpe_figures(report: MetricsReport, out_dir: Union[str, Path], dpi: int = 120) -> list[Path]:
    """One PNG per target: relative-percentage-error box plots by group,
    drawn from the precomputed statistics (whiskers at 1.5*IQR data
    points, median and mean lines, outliers as fliers)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    groups = sorted(report.groups)
    for target in report.targets:
        stats = []
        for group in groups:
            box = report.groups[group][target].rpe_box
            stats.append(
                {
                    "label": group,
                    "med": box.median,
                    "mean": box.mean,
                    "q1": box.q1,
                    "q3": box.q3,
                    "whislo": box.whisker_low,
                    "whishi": box.whisker_high,
                    "fliers": list(box.outliers),
                }
            )
        fig, ax = plt.subplots(figsize=(1.6 + 1.2 * len(groups), 4.0))
        ax.bxp(stats, showmeans=True, meanline=True)
        ax.axhline(0.0, color="grey", linewidth=0.8, linestyle=":")
        ax.set_ylabel("relative error [%]")
        ax.set_yscale("symlog")
        ax.set_title(f"{target} prediction error by group")
        fig.tight_layout()
        path = out / f"rpe_{target}.png"
        fig.savefig(path, dpi=dpi)
        plt.close(fig)
        written.append(path)
    return written
