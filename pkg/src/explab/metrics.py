"""Binary-classifier evaluation: AUROC, AUPRC, curves, bootstrap CIs.

AUROC uses the rank (Mann-Whitney) formulation with ties counted half,
which equals the trapezoidal area under the ROC curve. AUPRC is average
precision (precision summed at each positive's rank), not a trapezoidal
PR interpolation, which is known to be optimistic; ties in score are
broken by stable input order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from ._validation import as_binary_labels, as_vector

__all__ = [
    "auroc",
    "auprc",
    "roc_points",
    "pr_points",
    "bootstrap_ci",
    "MetricWithCi",
]


def _check_scores_labels(labels, scores, *, need_negative: bool):
    y = as_binary_labels(labels, "labels")
    s = as_vector(scores, "scores")
    if y.shape[0] != s.shape[0]:
        raise ValueError(f"labels has {y.shape[0]} entries but scores has {s.shape[0]}")
    if y.sum() == 0:
        raise ValueError("no positive samples (labels contains no 1s)")
    if need_negative and y.sum() == y.shape[0]:
        raise ValueError("no negative samples (labels contains no 0s)")
    return y, s


def auroc(labels, scores) -> float:
    """Probability a positive outranks a negative, ties counted 0.5."""
    y, s = _check_scores_labels(labels, scores, need_negative=True)
    n_pos = int(y.sum())
    n_neg = y.shape[0] - n_pos
    ranks = rankdata(s)  # average rank on ties
    pos_rank_sum = ranks[y == 1].sum()
    return float((pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def auprc(labels, scores) -> float:
    """Average precision: mean of precision at each positive's rank.

    Samples are ranked by descending score; equal scores keep their input
    order.
    """
    y, s = _check_scores_labels(labels, scores, need_negative=False)
    order = np.argsort(-s, kind="stable")
    y_sorted = y[order]
    tp = np.cumsum(y_sorted)
    precision = tp / np.arange(1, y.shape[0] + 1)
    return float(precision[y_sorted == 1].mean())


def _threshold_counts(labels, scores):
    """Cumulative TP/FP after each distinct-score group, descending."""
    y, s = _check_scores_labels(labels, scores, need_negative=True)
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    # last index of each group of equal scores
    cuts = np.flatnonzero(np.diff(s_sorted) != 0)
    cuts = np.append(cuts, y.shape[0] - 1)
    tp = np.cumsum(y_sorted)[cuts]
    fp = (cuts + 1) - tp
    return tp, fp, int(y.sum()), int(y.shape[0] - y.sum())


def roc_points(labels, scores) -> np.ndarray:
    """ROC polyline as an array of (fpr, tpr) rows.

    One point per distinct score threshold, descending, preceded by
    (0, 0); the final point is (1, 1). The trapezoidal area under the
    polyline equals :func:`auroc`.
    """
    tp, fp, n_pos, n_neg = _threshold_counts(labels, scores)
    pts = np.empty((tp.shape[0] + 1, 2))
    pts[0] = (0.0, 0.0)
    pts[1:, 0] = fp / n_neg
    pts[1:, 1] = tp / n_pos
    return pts


def pr_points(labels, scores) -> np.ndarray:
    """Precision-recall polyline as an array of (recall, precision) rows.

    One point per distinct score threshold, descending, preceded by the
    conventional (0, 1) anchor. Not used to compute :func:`auprc`, which
    is rank-based.
    """
    y, s = _check_scores_labels(labels, scores, need_negative=False)
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    cuts = np.flatnonzero(np.diff(s_sorted) != 0)
    cuts = np.append(cuts, y.shape[0] - 1)
    tp = np.cumsum(y_sorted)[cuts]
    n_pos = int(y.sum())
    pts = np.empty((tp.shape[0] + 1, 2))
    pts[0] = (0.0, 1.0)
    pts[1:, 0] = tp / n_pos
    pts[1:, 1] = tp / (cuts + 1.0)
    return pts


@dataclass
class MetricWithCi:
    """Point estimate plus percentile-bootstrap confidence interval.

    ``ci_low <= ci_high`` always; the interval is not forced to contain
    the point estimate (percentile bootstrap can exclude it in pathological
    cases). ``n_redrawn`` counts resamples rejected for lacking one of the
    classes. Resampling is at sample level (no patient/group clustering).
    """

    metric_name: str
    point: float
    ci_low: float
    ci_high: float
    n_boot: int
    ci_level: float
    seed: int
    n_redrawn: int


_METRICS = {"auroc": auroc, "auprc": auprc}


def bootstrap_ci(
    labels,
    scores,
    metric: str = "auroc",
    n_boot: int = 1000,
    level: float = 0.95,
    seed: int = 0,
) -> MetricWithCi:
    """Percentile-bootstrap CI for AUROC or AUPRC.

    Resample ``i`` draws n indices with replacement from a generator
    seeded with ``seed + i``, so runs are reproducible and resamples can
    be computed in any order. Resamples missing either class are redrawn
    from the same generator (the count is reported in ``n_redrawn``).
    """
    if metric not in _METRICS:
        raise ValueError(f"metric must be one of {sorted(_METRICS)}, got {metric!r}")
    if n_boot < 1:
        raise ValueError(f"n_boot must be >= 1, got {n_boot}")
    if not (0.0 < level < 1.0):
        raise ValueError(f"level must lie in (0, 1), got {level}")
    fn = _METRICS[metric]
    y, s = _check_scores_labels(labels, scores, need_negative=True)
    point = fn(y, s)
    n = y.shape[0]
    values = np.empty(n_boot)
    n_redrawn = 0
    for i in range(n_boot):
        rng = np.random.default_rng(seed + i)
        while True:
            idx = rng.integers(0, n, size=n)
            ys = y[idx]
            t = ys.sum()
            if 0 < t < n:
                break
            n_redrawn += 1
        values[i] = fn(ys, s[idx])
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(values, [alpha, 1.0 - alpha])
    return MetricWithCi(
        metric_name=metric,
        point=point,
        ci_low=float(lo),
        ci_high=float(hi),
        n_boot=n_boot,
        ci_level=level,
        seed=seed,
        n_redrawn=n_redrawn,
    )
