"""Multi-seed expressivity scores and layer/attribute sweeps.

Expressivity of an attribute in a representation is the estimated mutual
information between the feature matrix and the attribute, averaged over
repeated estimator runs with consecutive seeds.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._validation import as_matrix, as_vector
from .mine import MineConfig, train_mine

__all__ = [
    "ExpressivityResult",
    "LayerSweepResult",
    "compute_expressivity",
    "sweep",
    "resolve_workers",
]


def resolve_workers(n_jobs: int | None = None) -> int:
    """Worker count for parallel runs.

    ``None`` defers to the EXPLAB_THREADS environment variable (absent
    means 1); the value 0 means one worker per CPU.
    """
    if n_jobs is None:
        raw = os.environ.get("EXPLAB_THREADS", "1")
        try:
            n_jobs = int(raw)
        except ValueError:
            raise ValueError(f"EXPLAB_THREADS must be an integer, got {raw!r}")
    if n_jobs == 0:
        return os.cpu_count() or 1
    if n_jobs < 0:
        raise ValueError(f"worker count must be >= 0, got {n_jobs}")
    return n_jobs


@dataclass
class ExpressivityResult:
    """Expressivity of one (layer, attribute) pair over ``m_repeats`` seeds.

    Runs use seeds ``base_seed + i``; ``std`` is the population standard
    deviation of ``per_seed`` (the shaded band in sweep charts).
    """

    layer_name: str
    attribute_name: str
    per_seed: list[float]
    mean: float
    std: float
    m_repeats: int
    base_seed: int
    config_digest: str

    def to_dict(self) -> dict:
        return {
            "layer": self.layer_name,
            "attribute": self.attribute_name,
            "per_seed": list(self.per_seed),
            "mean": self.mean,
            "std": self.std,
            "m_repeats": self.m_repeats,
            "base_seed": self.base_seed,
            "config_digest": self.config_digest,
        }


@dataclass
class LayerSweepResult:
    """Complete grid of expressivity results, layer-major.

    ``grid[i][j]`` is the result for ``layer_names[i]`` and
    ``attribute_names[j]``; layer order is exactly the caller's (callers
    pass layers in depth order).
    """

    layer_names: list[str]
    attribute_names: list[str]
    grid: list[list[ExpressivityResult]] = field(default_factory=list)

    def cell(self, layer: str, attribute: str) -> ExpressivityResult:
        i = self.layer_names.index(layer)
        j = self.attribute_names.index(attribute)
        return self.grid[i][j]

    def to_dict(self) -> dict:
        return {
            "layers": list(self.layer_names),
            "attributes": list(self.attribute_names),
            "results": [[cell.to_dict() for cell in row] for row in self.grid],
        }


def _run_one(args) -> float:
    features, attribute, config = args
    return train_mine(features, attribute, config).mi_nats


def compute_expressivity(
    features,
    attribute,
    m_repeats: int = 10,
    config: MineConfig | None = None,
    layer_name: str = "layer",
    attribute_name: str = "attribute",
    n_jobs: int | None = 1,
) -> ExpressivityResult:
    """Run the estimator ``m_repeats`` times and summarize.

    Seeds are ``config.rng_seed + i`` for i in 0..m_repeats-1, so results
    are reproducible and independent of how the repeats are scheduled.
    """
    if m_repeats < 1:
        raise ValueError(f"m_repeats must be >= 1, got {m_repeats}")
    cfg = config or MineConfig()
    x = as_matrix(features, "features")
    y = as_vector(attribute, "attribute")
    tasks = [(x, y, cfg.replace(rng_seed=cfg.rng_seed + i)) for i in range(m_repeats)]
    workers = resolve_workers(n_jobs)
    if workers > 1 and m_repeats > 1:
        with ProcessPoolExecutor(max_workers=min(workers, m_repeats)) as pool:
            per_seed = list(pool.map(_run_one, tasks))
    else:
        per_seed = []
        for i, task in enumerate(tasks):
            try:
                per_seed.append(_run_one(task))
            except Exception as exc:
                exc.args = (f"[seed index {i}, rng_seed={task[2].rng_seed}] {exc}",)
                raise
    arr = np.asarray(per_seed)
    return ExpressivityResult(
        layer_name=layer_name,
        attribute_name=attribute_name,
        per_seed=[float(v) for v in per_seed],
        mean=float(arr.mean()),
        std=float(arr.std()),
        m_repeats=m_repeats,
        base_seed=cfg.rng_seed,
        config_digest=cfg.digest(),
    )


def sweep(
    layers,
    attributes,
    m_repeats: int = 10,
    config: MineConfig | None = None,
    n_jobs: int | None = 1,
) -> LayerSweepResult:
    """Expressivity over the full (layer, attribute) grid.

    ``layers`` is an ordered sequence of (name, feature matrix) pairs,
    ``attributes`` a sequence of (name, vector) pairs; every matrix and
    vector must share one row count.
    """
    layers = [(str(name), as_matrix(mat, f"layer {name!r}")) for name, mat in layers]
    attributes = [(str(name), as_vector(vec, f"attribute {name!r}")) for name, vec in attributes]
    if not layers or not attributes:
        raise ValueError("need at least one layer and one attribute")
    n = layers[0][1].shape[0]
    for name, mat in layers:
        if mat.shape[0] != n:
            raise ValueError(f"layer {name!r} has {mat.shape[0]} rows, expected {n}")
    for name, vec in attributes:
        if vec.shape[0] != n:
            raise ValueError(f"attribute {name!r} has {vec.shape[0]} entries, expected {n}")

    result = LayerSweepResult(
        layer_names=[name for name, _ in layers],
        attribute_names=[name for name, _ in attributes],
    )
    for layer_name, mat in layers:
        row = []
        for attr_name, vec in attributes:
            row.append(
                compute_expressivity(
                    mat,
                    vec,
                    m_repeats=m_repeats,
                    config=config,
                    layer_name=layer_name,
                    attribute_name=attr_name,
                    n_jobs=n_jobs,
                )
            )
        result.grid.append(row)
    return result
