"""Small dense MLP with manual backpropagation.

Implements exactly what critic training needs: Glorot-uniform
initialization, a two-hidden-layer perceptron with ELU activations and a
linear scalar output, analytic gradients, and Adam. Arrays are float64
throughout; the critic's exponentiated scores make 32-bit precision a bad
trade for these tiny networks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from ._validation import as_matrix
from .errors import NumericError

__all__ = [
    "elu",
    "elu_grad",
    "xavier_init",
    "MlpParams",
    "MlpCache",
    "init_mlp",
    "mlp_forward",
    "mlp_backward",
    "AdamState",
    "adam_step",
    "ChunkedScorer",
]


def elu(x, alpha: float = 1.0):
    """ELU activation: x for x > 0, alpha*(e^x - 1) otherwise."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x > 0, x, alpha * np.expm1(np.minimum(x, 0.0)))


def elu_grad(x, alpha: float = 1.0):
    """Derivative of :func:`elu`: 1 for x > 0, alpha*e^x otherwise."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x > 0, 1.0, alpha * np.exp(np.minimum(x, 0.0)))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def xavier_init(in_dim: int, out_dim: int, rng) -> np.ndarray:
    """Glorot-uniform weight matrix, U(-a, a) with a = sqrt(6/(in+out)).

    ``rng`` is an integer seed or a ``numpy.random.Generator``; a fixed
    seed yields identical draws.
    """
    if in_dim < 1 or out_dim < 1:
        raise ValueError(f"dimensions must be >= 1, got ({in_dim}, {out_dim})")
    a = np.sqrt(6.0 / (in_dim + out_dim))
    return _as_rng(rng).uniform(-a, a, size=(in_dim, out_dim))


@dataclass
class MlpParams:
    """Weights and biases of the critic MLP (two hidden layers + linear out).

    Also serves as the container for gradients and Adam moments, which are
    shaped identically.
    """

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray

    _FIELDS = ("w1", "b1", "w2", "b2", "w3", "b3")

    def __post_init__(self):
        h1, h2 = self.w1.shape[1], self.w2.shape[1]
        if self.b1.shape != (h1,) or self.w2.shape[0] != h1:
            raise ValueError("layer-1/2 dimensions do not chain")
        if self.b2.shape != (h2,) or self.w3.shape[0] != h2:
            raise ValueError("layer-2/3 dimensions do not chain")
        if self.w3.shape[1] != 1 or self.b3.shape != (1,):
            raise ValueError("output layer must map to a single unit")

    @property
    def in_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def hidden_dims(self) -> tuple[int, int]:
        return (self.w1.shape[1], self.w2.shape[1])

    def items(self) -> Iterator[tuple[str, np.ndarray]]:
        for name in self._FIELDS:
            yield name, getattr(self, name)

    def zeros_like(self) -> "MlpParams":
        return MlpParams(*(np.zeros_like(getattr(self, n)) for n in self._FIELDS))

    def copy(self) -> "MlpParams":
        return MlpParams(*(getattr(self, n).copy() for n in self._FIELDS))


def init_mlp(in_dim: int, hidden_dims: tuple[int, int] = (256, 64), rng=0) -> MlpParams:
    """Build an MLP with Glorot-uniform weights and zero biases.

    Weight matrices are drawn in layer order (w1, w2, w3) from a single
    generator, so a fixed seed fully determines the network.
    """
    if in_dim < 1:
        raise ValueError(f"in_dim must be >= 1, got {in_dim}")
    h1, h2 = hidden_dims
    if h1 < 1 or h2 < 1:
        raise ValueError(f"hidden_dims must be >= 1, got {hidden_dims}")
    gen = _as_rng(rng)
    return MlpParams(
        w1=xavier_init(in_dim, h1, gen),
        b1=np.zeros(h1),
        w2=xavier_init(h1, h2, gen),
        b2=np.zeros(h2),
        w3=xavier_init(h2, 1, gen),
        b3=np.zeros(1),
    )


@dataclass
class MlpCache:
    """Activation record from :func:`mlp_forward`, consumed by backprop.

    ``d1``/``d2`` hold the ELU derivatives exp(min(z, 0)) at the hidden
    pre-activations; ``a1``/``a2`` the post-activation values.
    """

    x: np.ndarray
    d1: np.ndarray
    a1: np.ndarray
    d2: np.ndarray
    a2: np.ndarray


def _elu_forward(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # elu(z) = max(z,0) + exp(min(z,0)) - 1 and elu'(z) = exp(min(z,0)),
    # identically in exact arithmetic; branch-free and overflow-safe.
    d = np.exp(np.minimum(z, 0.0))
    a = np.maximum(z, 0.0)
    a += d
    a -= 1.0
    return a, d


def mlp_forward(params: MlpParams, batch) -> tuple[np.ndarray, MlpCache]:
    """Score a batch of rows; returns (outputs, cache).

    Hidden layers use ELU (alpha=1); the output layer is linear so scores
    are unbounded in both directions.
    """
    x = as_matrix(batch, "batch")
    if x.shape[1] != params.in_dim:
        raise ValueError(
            f"batch has {x.shape[1]} columns but the network expects {params.in_dim}"
        )
    z1 = x @ params.w1
    z1 += params.b1
    a1, d1 = _elu_forward(z1)
    z2 = a1 @ params.w2
    z2 += params.b2
    a2, d2 = _elu_forward(z2)
    out = a2 @ params.w3
    out += params.b3
    return out.ravel(), MlpCache(x=x, d1=d1, a1=a1, d2=d2, a2=a2)


def mlp_backward(params: MlpParams, cache: MlpCache, output_grads) -> MlpParams:
    """Gradients of sum(outputs * output_grads) w.r.t. every parameter."""
    g = np.asarray(output_grads, dtype=np.float64)
    if g.ndim != 1 or g.shape[0] != cache.x.shape[0]:
        raise ValueError(
            f"output_grads has shape {g.shape}, expected ({cache.x.shape[0]},)"
        )
    if (
        cache.x.shape[1] != params.in_dim
        or cache.a1.shape[1] != params.w2.shape[0]
        or cache.a2.shape[1] != params.w3.shape[0]
    ):
        raise ValueError("cache does not match network dimensions")
    d3 = g[:, None]
    gw3 = cache.a2.T @ d3
    gb3 = d3.sum(axis=0)
    d2 = d3 @ params.w3.T
    d2 *= cache.d2
    gw2 = cache.a1.T @ d2
    gb2 = d2.sum(axis=0)
    d1 = d2 @ params.w2.T
    d1 *= cache.d1
    gw1 = cache.x.T @ d1
    gb1 = d1.sum(axis=0)
    return MlpParams(w1=gw1, b1=gb1, w2=gw2, b2=gb2, w3=gw3, b3=gb3)


@dataclass
class AdamState:
    """Adam moment accumulators plus hyperparameters; ``t`` counts steps."""

    m: MlpParams
    v: MlpParams
    t: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def init(cls, params: MlpParams, lr: float = 1e-3, beta1: float = 0.9,
             beta2: float = 0.999, eps: float = 1e-8) -> "AdamState":
        return cls(m=params.zeros_like(), v=params.zeros_like(),
                   t=0, lr=lr, beta1=beta1, beta2=beta2, eps=eps)


def adam_step(params: MlpParams, grads: MlpParams, state: AdamState) -> None:
    """One Adam update with bias correction, applied to ``params`` in place."""
    state.t += 1
    bc1 = 1.0 - state.beta1 ** state.t
    bc2 = 1.0 - state.beta2 ** state.t
    for name, p in params.items():
        g = getattr(grads, name)
        if p.shape != g.shape:
            raise ValueError(f"gradient for {name} has shape {g.shape}, expected {p.shape}")
        if not np.isfinite(g).all():
            raise NumericError(f"non-finite gradient for parameter {name}")
        m = getattr(state.m, name)
        v = getattr(state.v, name)
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)


class ChunkedScorer:
    """Forward-only evaluation over large inputs with reused buffers.

    Scoring the full dataset inside the estimate window is the hot path;
    chunking keeps the hidden activations cache-resident and avoids
    allocating multi-megabyte temporaries per call. Reads the live
    parameter arrays, so in-place optimizer updates are picked up.
    """

    def __init__(self, params: MlpParams, chunk: int = 2048):
        self.params = params
        self.chunk = int(chunk)
        h1, h2 = params.hidden_dims
        self._z1 = np.empty((self.chunk, h1))
        self._d1 = np.empty((self.chunk, h1))
        self._z2 = np.empty((self.chunk, h2))
        self._d2 = np.empty((self.chunk, h2))

    def scores(self, x: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        p = self.params
        n = x.shape[0]
        if out is None:
            out = np.empty(n)
        for i in range(0, n, self.chunk):
            xb = x[i : i + self.chunk]
            k = xb.shape[0]
            z1 = self._z1[:k]
            d1 = self._d1[:k]
            np.matmul(xb, p.w1, out=z1)
            z1 += p.b1
            np.minimum(z1, 0.0, out=d1)
            np.exp(d1, out=d1)
            np.maximum(z1, 0.0, out=z1)
            z1 += d1
            z1 -= 1.0
            z2 = self._z2[:k]
            d2 = self._d2[:k]
            np.matmul(z1, p.w2, out=z2)
            z2 += p.b2
            np.minimum(z2, 0.0, out=d2)
            np.exp(d2, out=d2)
            np.maximum(z2, 0.0, out=z2)
            z2 += d2
            z2 -= 1.0
            np.matmul(z2, p.w3, out=out[i : i + self.chunk, None])
            out[i : i + self.chunk] += p.b3[0]
        return out
