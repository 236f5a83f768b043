"""Evaluation metrics: mask overlap, per-limb position error, statistics.

Overlap quality of predicted maps is measured per channel by the Dice
similarity coefficient and recall; pose quality per limb by the root mean
square distance between estimated and annotated joints; method
comparisons by a paired two-sided t-test.  Aggregates are medians with
interquartile ranges.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .skeleton import DEFAULT_SKELETON, Skeleton


class MetricShapeError(ValueError):
    """Metric operands have mismatched shapes."""


class PairingError(ValueError):
    """Paired samples have different lengths."""


DEGENERATE = "degenerate"
UNDEFINED = "undefined"


@dataclass(frozen=True)
class ConfusionCounts:
    """Pixel-level true positives, false positives, false negatives."""

    tp: int
    fp: int
    fn: int

    def __post_init__(self):
        if self.tp < 0 or self.fp < 0 or self.fn < 0:
            raise ValueError("confusion counts must be non-negative")

    @classmethod
    def from_masks(cls, pred: np.ndarray, gt: np.ndarray) -> "ConfusionCounts":
        pred = np.asarray(pred)
        gt = np.asarray(gt)
        if pred.shape != gt.shape:
            raise MetricShapeError(f"mask shape mismatch: {pred.shape} vs {gt.shape}")
        pred = pred.astype(bool)
        gt = gt.astype(bool)
        return cls(
            tp=int(np.count_nonzero(pred & gt)),
            fp=int(np.count_nonzero(pred & ~gt)),
            fn=int(np.count_nonzero(~pred & gt)),
        )

    def dsc(self) -> float:
        denom = 2 * self.tp + self.fp + self.fn
        if denom == 0:
            return 1.0
        return 2 * self.tp / denom

    def recall(self) -> float:
        denom = self.tp + self.fn
        if denom == 0:
            return 1.0
        return self.tp / denom


def dsc(pred_mask: np.ndarray, gt_mask: np.ndarray) -> float:
    """Dice similarity 2TP/(2TP+FP+FN); 1.0 when both masks are empty."""
    return ConfusionCounts.from_masks(pred_mask, gt_mask).dsc()


def recall(pred_mask: np.ndarray, gt_mask: np.ndarray) -> float:
    """TP/(TP+FN); 1.0 when the ground-truth mask is empty."""
    return ConfusionCounts.from_masks(pred_mask, gt_mask).recall()


@dataclass(frozen=True)
class RmsdResult:
    """Per-limb position error with the number of joints actually compared."""

    value: float | None  # None marks the undefined (no matched joints) case
    matched: int
    missing: int

    @property
    def defined(self) -> bool:
        return self.value is not None


def rmsd(
    pred_joints: list[tuple[float, float] | None],
    gt_joints: list[tuple[float, float] | None],
    limb: str,
    skeleton: Skeleton = DEFAULT_SKELETON,
) -> RmsdResult:
    """Root mean square distance over a limb's matched joints, in pixels.

    Joints missing on either side are excluded and counted; a limb with no
    matched joints yields an undefined marker rather than a number.
    """
    indices = skeleton.limb_joint_indices(limb)
    sq_sum = 0.0
    matched = 0
    for jid in indices:
        p = pred_joints[jid]
        g = gt_joints[jid]
        if p is None or g is None:
            continue
        sq_sum += (p[0] - g[0]) ** 2 + (p[1] - g[1]) ** 2
        matched += 1
    if matched == 0:
        return RmsdResult(None, 0, len(indices))
    return RmsdResult(math.sqrt(sq_sum / matched), matched, len(indices) - matched)


@dataclass(frozen=True)
class StatTestConfig:
    """Two-sided paired t-test settings."""

    alpha: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")


@dataclass(frozen=True)
class TTestResult:
    t: float | None
    p: float | None
    significant: bool | None
    marker: str | None = None  # DEGENERATE when differences have zero variance


def paired_ttest(
    sample_a: list[float], sample_b: list[float], cfg: StatTestConfig = StatTestConfig()
) -> TTestResult:
    """Paired two-sided t-test on elementwise differences a-b.

    Zero-variance differences make the statistic undefined; those return a
    degenerate marker instead of a number.
    """
    if len(sample_a) != len(sample_b):
        raise PairingError(
            f"paired samples must have equal length: {len(sample_a)} vs {len(sample_b)}"
        )
    n = len(sample_a)
    if n < 2:
        raise PairingError("paired test needs at least 2 pairs")
    diffs = np.asarray(sample_a, dtype=np.float64) - np.asarray(sample_b, dtype=np.float64)
    mean = diffs.mean()
    sd = diffs.std(ddof=1)
    if sd == 0.0:
        return TTestResult(None, None, None, marker=DEGENERATE)
    t = mean / (sd / math.sqrt(n))
    p = 2.0 * stats.t.sf(abs(t), df=n - 1)
    return TTestResult(float(t), float(p), bool(p < cfg.alpha))


def median_iqr(values: list[float]) -> tuple[float, float]:
    """Median and interquartile range using linear-interpolation quantiles."""
    if not values:
        raise ValueError("median of an empty list is undefined")
    arr = np.asarray(values, dtype=np.float64)
    q1, q2, q3 = np.quantile(arr, [0.25, 0.5, 0.75], method="linear")
    return float(q2), float(q3 - q1)


@dataclass
class AggregateReport:
    """Medians and IQRs per category, with undefined counts and timing."""

    categories: dict[str, dict[str, float | int]]
    omitted: list[str]
    seconds_per_image: float | None = None
    resolution: tuple[int, int] | None = None

    def to_json(self) -> dict:
        return {
            "categories": self.categories,
            "omitted": self.omitted,
            "seconds_per_image": self.seconds_per_image,
            "resolution": list(self.resolution) if self.resolution else None,
        }


def aggregate_report(
    per_category: dict[str, list[float]],
    undefined_counts: dict[str, int] | None = None,
    seconds_per_image: float | None = None,
    resolution: tuple[int, int] | None = None,
) -> AggregateReport:
    """Median + IQR per category; empty categories are omitted with a note."""
    categories: dict[str, dict[str, float | int]] = {}
    omitted: list[str] = []
    undefined_counts = undefined_counts or {}
    for name in per_category:
        values = per_category[name]
        if not values:
            omitted.append(name)
            continue
        med, iqr = median_iqr(values)
        entry: dict[str, float | int] = {"median": med, "iqr": iqr, "count": len(values)}
        if name in undefined_counts:
            entry["undefined"] = undefined_counts[name]
        categories[name] = entry
    for name, count in undefined_counts.items():
        if name not in per_category and count:
            omitted.append(name)
            categories.setdefault(name, {"median": math.nan, "iqr": math.nan, "count": 0, "undefined": count})
    return AggregateReport(categories, omitted, seconds_per_image, resolution)


def write_report_csv(report: AggregateReport, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["category", "median", "iqr", "count", "undefined"])
        for name in sorted(report.categories):
            entry = report.categories[name]
            writer.writerow(
                [
                    name,
                    f"{entry['median']:.6f}",
                    f"{entry['iqr']:.6f}",
                    entry["count"],
                    entry.get("undefined", 0),
                ]
            )


def write_report_json(
    report: AggregateReport, path: Path | str, extra: dict | None = None
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = report.to_json()
    if extra:
        payload.update(extra)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
