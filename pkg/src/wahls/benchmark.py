"""Benchmark harness: regression metrics, error-distribution statistics,
per-target/per-group evaluation, and submission report bundles.

Metrics run on raw units (cycles for timing, absolute component counts for
resources) and are computed separately for every regression target.  The
coefficient of determination is skipped, not forced, when the ground truth
is constant.
"""

from __future__ import annotations

import csv
import io
import json
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from wahls.core import Dataset, Sample, TARGET_NAMES, TargetVector
from wahls.errors import LengthMismatch

BUNDLE_FORMAT_VERSION = "wa-bundle-1"

#: SMAPE denominator offset: the smallest strictly positive value the
#: resource and latency targets can take.  Fixed, not configurable.
SMAPE_EPSILON = 1.0


def _paired(y_true, y_pred, min_len: int = 1) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y_true, dtype=np.float64).ravel()
    p = np.asarray(y_pred, dtype=np.float64).ravel()
    if y.shape[0] != p.shape[0]:
        raise LengthMismatch(y.shape[0], p.shape[0])
    if y.shape[0] < min_len:
        raise ValueError(f"need at least {min_len} points, got {y.shape[0]}")
    return y, p


def r2(y_true, y_pred) -> Optional[float]:
    """Coefficient of determination; ``None`` (skipped) when the ground
    truth is constant and the score is undefined."""
    y, p = _paired(y_true, y_pred, min_len=2)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return None
    ss_res = float(np.sum((y - p) ** 2))
    return 1.0 - ss_res / ss_tot


def smape(y_true, y_pred) -> float:
    """Symmetric mean absolute percentage error in percent, in [0, 200]."""
    y, p = _paired(y_true, y_pred)
    return float(200.0 / y.shape[0] * np.sum(np.abs(y - p) / (np.abs(y) + np.abs(p) + SMAPE_EPSILON)))


def rmse(y_true, y_pred) -> float:
    y, p = _paired(y_true, y_pred)
    return float(np.sqrt(np.mean((y - p) ** 2)))


def rpe(y_true, y_pred) -> np.ndarray:
    """Relative percentage errors, elementwise: (y - y_hat) / (y + 1) * 100.

    Under-prediction yields positive values.
    """
    y, p = _paired(y_true, y_pred)
    return (y - p) / (y + 1.0) * 100.0


@dataclass(frozen=True)
class BoxStats:
    """Box-plot summary: quartiles by linear interpolation at p*(n-1),
    whiskers at the extreme data points within 1.5 * IQR of the box."""

    median: float
    mean: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "median": self.median,
            "mean": self.mean,
            "q1": self.q1,
            "q3": self.q3,
            "whisker_low": self.whisker_low,
            "whisker_high": self.whisker_high,
            "outliers": list(self.outliers),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "BoxStats":
        return cls(
            median=obj["median"],
            mean=obj["mean"],
            q1=obj["q1"],
            q3=obj["q3"],
            whisker_low=obj["whisker_low"],
            whisker_high=obj["whisker_high"],
            outliers=tuple(obj["outliers"]),
        )


def boxplot_stats(values) -> BoxStats:
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise ValueError("boxplot_stats requires a nonempty vector")
    q1, med, q3 = (float(np.percentile(v, p, method="linear")) for p in (25, 50, 75))
    iqr = q3 - q1
    lo_fence = q1 - 1.5 * iqr
    hi_fence = q3 + 1.5 * iqr
    inside = v[(v >= lo_fence) & (v <= hi_fence)]
    outliers = np.sort(v[(v < lo_fence) | (v > hi_fence)])
    return BoxStats(
        median=med,
        mean=float(np.mean(v)),
        q1=q1,
        q3=q3,
        whisker_low=float(inside.min()),
        whisker_high=float(inside.max()),
        outliers=tuple(float(x) for x in outliers),
    )


# ---------------------------------------------------------------------------
# Report structure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MetricCell:
    """Per (group, target) metrics; r2 is None when skipped (constant truth)."""

    r2: Optional[float]
    smape: float
    rmse: float
    rpe_box: BoxStats
    n: int

    @property
    def r2_skipped(self) -> bool:
        return self.r2 is None

    def to_dict(self) -> dict:
        return {
            "r2": self.r2,
            "r2_skipped": self.r2_skipped,
            "smape": self.smape,
            "rmse": self.rmse,
            "rpe_box": self.rpe_box.to_dict(),
            "n": self.n,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "MetricCell":
        return cls(
            r2=obj["r2"],
            smape=obj["smape"],
            rmse=obj["rmse"],
            rpe_box=BoxStats.from_dict(obj["rpe_box"]),
            n=obj["n"],
        )


@dataclass(frozen=True)
class PredictionRow:
    sample_id: str
    group_tag: str
    family: str
    truth: tuple[float, ...]
    pred: tuple[float, ...]


@dataclass
class MetricsReport:
    """Per-target, per-group metric cells plus predictor metadata and the
    raw prediction rows behind them."""

    predictor: dict
    groups: dict  # group name -> {target -> MetricCell}
    predictions: list = field(default_factory=list)
    targets: tuple[str, ...] = TARGET_NAMES
    n_samples: int = 0
    inference_seconds: float = 0.0
    hardware: dict = field(default_factory=dict)

    def cell(self, group: str, target: str) -> MetricCell:
        return self.groups[group][target]

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "bundle_format": BUNDLE_FORMAT_VERSION,
            "predictor": self.predictor,
            "targets": list(self.targets),
            "n_samples": self.n_samples,
            "groups": {
                g: {t: cell.to_dict() for t, cell in cells.items()}
                for g, cells in self.groups.items()
            },
        }
        if include_timing:
            out["inference_seconds"] = self.inference_seconds
            out["hardware"] = self.hardware
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "MetricsReport":
        return cls(
            predictor=obj["predictor"],
            groups={
                g: {t: MetricCell.from_dict(c) for t, c in cells.items()}
                for g, cells in obj["groups"].items()
            },
            targets=tuple(obj["targets"]),
            n_samples=obj["n_samples"],
            inference_seconds=obj.get("inference_seconds", 0.0),
            hardware=obj.get("hardware", {}),
        )


def hardware_description() -> dict:
    return {
        "machine": platform.machine(),
        "system": platform.system(),
        "python": platform.python_version(),
    }


def _default_groups(samples: tuple[Sample, ...]) -> dict:
    """all + per-family groups + one group per exemplar model."""
    groups: dict[str, list[int]] = {"all": list(range(len(samples)))}
    for i, sample in enumerate(samples):
        groups.setdefault(sample.family(), []).append(i)
        if sample.group_tag == "exemplar":
            groups.setdefault(f"exemplar:{sample.meta.model_name}", []).append(i)
    return groups


def evaluate(
    predictor,
    dataset: Dataset,
    groups: Optional[list[str]] = None,
    predictor_meta: Optional[dict] = None,
) -> MetricsReport:
    """Score a predictor over a labeled dataset, per target and per group.

    ``predictor`` is either an object with ``predict(architecture,
    hls_config) -> TargetVector`` or a mapping of sample id to
    :class:`TargetVector` (an externally produced prediction file).
    """
    samples = dataset.samples
    truth = np.array([s.targets().as_tuple() for s in samples], dtype=np.float64)

    start = time.perf_counter()
    if isinstance(predictor, dict):
        missing = [s.id for s in samples if s.id not in predictor]
        if missing:
            raise KeyError(f"prediction file lacks {len(missing)} sample ids, e.g. {missing[:3]}")
        pred = np.array([predictor[s.id].as_tuple() for s in samples], dtype=np.float64)
    else:
        pred = np.array(
            [predictor.predict(s.architecture, s.hls_config).as_tuple() for s in samples],
            dtype=np.float64,
        )
    elapsed = time.perf_counter() - start

    index_groups = _default_groups(samples)
    if groups is not None:
        unknown = [g for g in groups if g not in index_groups]
        if unknown:
            raise KeyError(f"unknown groups {unknown}; available: {sorted(index_groups)}")
        index_groups = {g: index_groups[g] for g in groups}

    cells: dict[str, dict[str, MetricCell]] = {}
    for group, idx in index_groups.items():
        if not idx:
            continue
        sel = np.array(idx, dtype=np.int64)
        cells[group] = {}
        for t, target in enumerate(TARGET_NAMES):
            y, p = truth[sel, t], pred[sel, t]
            cells[group][target] = MetricCell(
                r2=r2(y, p) if y.shape[0] >= 2 else None,
                smape=smape(y, p),
                rmse=rmse(y, p),
                rpe_box=boxplot_stats(rpe(y, p)),
                n=int(y.shape[0]),
            )

    rows = [
        PredictionRow(
            sample_id=s.id,
            group_tag=s.group_tag,
            family=s.family(),
            truth=tuple(float(v) for v in truth[i]),
            pred=tuple(float(v) for v in pred[i]),
        )
        for i, s in enumerate(samples)
    ]
    meta = dict(predictor_meta or {})
    meta.setdefault("name", getattr(predictor, "name", "external"))
    return MetricsReport(
        predictor=meta,
        groups=cells,
        predictions=rows,
        n_samples=len(samples),
        inference_seconds=elapsed,
        hardware=hardware_description(),
    )


# ---------------------------------------------------------------------------
# Submission bundle
# ---------------------------------------------------------------------------


def _dump_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _predictions_csv(report: MetricsReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["sample_id", "group_tag", "family"]
    header += [f"true_{t}" for t in report.targets] + [f"pred_{t}" for t in report.targets]
    writer.writerow(header)
    for row in report.predictions:
        writer.writerow(
            [row.sample_id, row.group_tag, row.family]
            + [repr(v) for v in row.truth]
            + [repr(v) for v in row.pred]
        )
    return buf.getvalue()


def render_submission(report: MetricsReport, out_dir: Union[str, Path]) -> dict[str, Path]:
    """Write the submission bundle and return the artifact paths.

    Normative artifacts (byte-stable for identical reports): ``metrics.json``,
    ``predictions.csv``, one ``rpe_boxplot_<target>.json`` per target, and
    ``metadata.json``.  Wall-clock inference timing is volatile and goes to
    the ``timing.json`` sidecar, which is excluded from the determinism
    contract.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifacts: dict[str, Path] = {}

    metrics_path = out / "metrics.json"
    metrics_path.write_text(_dump_json(report.to_dict(include_timing=False)))
    artifacts["metrics"] = metrics_path

    pred_path = out / "predictions.csv"
    pred_path.write_text(_predictions_csv(report))
    artifacts["predictions"] = pred_path

    for target in report.targets:
        box_path = out / f"rpe_boxplot_{target}.json"
        payload = {
            "target": target,
            "groups": {
                g: cells[target].rpe_box.to_dict() for g, cells in report.groups.items()
            },
        }
        box_path.write_text(_dump_json(payload))
        artifacts[f"boxplot_{target}"] = box_path

    meta_path = out / "metadata.json"
    meta_path.write_text(
        _dump_json(
            {
                "bundle_format": BUNDLE_FORMAT_VERSION,
                "predictor": report.predictor,
                "hardware": report.hardware,
                "n_samples": report.n_samples,
                "targets": list(report.targets),
                "constraints": report.predictor.get("constraints", ""),
            }
        )
    )
    artifacts["metadata"] = meta_path

    timing_path = out / "timing.json"
    timing_path.write_text(_dump_json({"inference_seconds": report.inference_seconds}))
    artifacts["timing"] = timing_path
    return artifacts


def load_metrics(path: Union[str, Path]) -> MetricsReport:
    return MetricsReport.from_dict(json.loads(Path(path).read_text()))


def load_predictions(path: Union[str, Path]) -> dict[str, TargetVector]:
    """Read an external predictions.csv (or compatible) into a mapping
    usable by :func:`evaluate`, so third-party estimators can be scored
    without the toolkit's model classes."""
    out: dict[str, TargetVector] = {}
    with Path(path).open() as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out[row["sample_id"]] = TargetVector(
                *(float(row[f"pred_{t}"]) for t in TARGET_NAMES)
            )
    return out
