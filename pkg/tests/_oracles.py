"""Independent reference implementations used as test oracles.

Deliberately naive: finite differences for gradients, O(n^2) pair
counting for AUROC, an explicit rank walk for average precision. They
share no code with the library paths they check.
"""

import numpy as np

from explab.nn import mlp_forward


def finite_diff_grads(params, batch, output_grads, h=1e-5):
    """Central-difference gradients of sum(outputs * output_grads)."""
    g_out = np.asarray(output_grads, dtype=np.float64)
    grads = params.zeros_like()
    for name, p in params.items():
        g = getattr(grads, name)
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            ix = it.multi_index
            orig = p[ix]
            p[ix] = orig + h
            hi = float(mlp_forward(params, batch)[0] @ g_out)
            p[ix] = orig - h
            lo = float(mlp_forward(params, batch)[0] @ g_out)
            p[ix] = orig
            g[ix] = (hi - lo) / (2.0 * h)
    return grads


def max_relative_grad_error(analytic, numeric, floor=1e-6):
    """Worst-case |a - b| / max(|a|, |b|, floor) across all parameters."""
    worst = 0.0
    for name, a in analytic.items():
        b = getattr(numeric, name)
        denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
        worst = max(worst, float(np.max(np.abs(a - b) / denom)))
    return worst


def auroc_pairwise(labels, scores):
    """Fraction of (positive, negative) pairs won, ties worth half."""
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=float)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def auprc_rank_walk(labels, scores):
    """Average precision by walking ranks in descending-score order.

    Ties broken by original input position, matching the documented
    library convention.
    """
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=float)
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    tp = 0
    precisions = []
    for rank, i in enumerate(order, start=1):
        if labels[i] == 1:
            tp += 1
            precisions.append(tp / rank)
    return sum(precisions) / int((labels == 1).sum())


def random_metric_instance(rng, max_n=50):
    """Random labeled scores with both classes present and some ties."""
    n = int(rng.integers(2, max_n + 1))
    labels = rng.integers(0, 2, size=n)
    if labels.sum() == 0:
        labels[int(rng.integers(0, n))] = 1
    if labels.sum() == n:
        labels[int(rng.integers(0, n))] = 0
    if rng.random() < 0.5:
        # quantized scores force ties
        scores = np.round(rng.random(n) * 4) / 4.0
    else:
        scores = rng.standard_normal(n)
    return labels, scores
