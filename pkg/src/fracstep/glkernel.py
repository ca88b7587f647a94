"""Grünwald-Letnikov weights and the discrete Caputo-GL derivative."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


def check_order(alpha):
    """Return ``alpha`` as a float, rejecting values outside (0, 1]."""
    alpha = float(alpha)
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"fractional order must lie in (0, 1], got {alpha!r}")
    return alpha


@dataclass(frozen=True, eq=False)
class GLWeights:
    """Weight table ``w[j]`` for j = 0..n_max and its running sums.

    ``cumsum[n]`` is the sum ``w[0] + ... + w[n]``, which equals the
    order ``alpha - 1`` weight of index n. It is evaluated with its own
    product recurrence so that it stays strictly positive even when the
    partial sums of ``w`` cancel to rounding level.
    """

    alpha: float
    weights: np.ndarray
    cumsum: np.ndarray

    @property
    def n_max(self):
        return len(self.weights) - 1

    def __len__(self):
        return len(self.weights)


@lru_cache(maxsize=32)
def _weights_cached(alpha, n_max):
    j = np.arange(1, n_max + 1, dtype=float)
    w = np.empty(n_max + 1)
    w[0] = 1.0
    w[1:] = np.cumprod((j - 1.0 - alpha) / j)
    c = np.empty(n_max + 1)
    c[0] = 1.0
    c[1:] = np.cumprod((j - alpha) / j)
    w.flags.writeable = False
    c.flags.writeable = False
    return GLWeights(alpha, w, c)


def gl_weights(alpha, n_max):
    """Grünwald-Letnikov weights of order ``alpha`` up to index ``n_max``.

    Uses the multiplicative recurrence ``w[j] = w[j-1] * (j - 1 - alpha) / j``
    so nothing overflows for large ``n_max``. Tables are cached per
    ``(alpha, n_max)`` and returned read-only, so they can be shared between
    runs.

    Examples
    --------
    >>> gl_weights(0.5, 3).weights.tolist()
    [1.0, -0.5, -0.125, -0.0625]
    """
    alpha = check_order(alpha)
    n_max = int(n_max)
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    return _weights_cached(alpha, n_max)


@dataclass(frozen=True, eq=False)
class SampledPath:
    """Values of an m-vector function on the uniform grid ``t0 + j*h``."""

    t0: float
    h: float
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or len(values) < 1:
            raise ValueError("values must be a non-empty sequence of vectors")
        if not self.h > 0:
            raise ValueError(f"step h must be positive, got {self.h!r}")
        object.__setattr__(self, "values", values)

    @property
    def times(self):
        return self.t0 + self.h * np.arange(len(self.values))


def discrete_caputo_gl(path, weights, k):
    """Discrete Caputo-GL derivative of ``path`` at node ``k``.

    Computes ``h**-alpha * sum_{r=0}^{k} w[r] * (x[k-r] - x[0])``, an
    O(h) approximation of the Caputo derivative at ``t0 + k*h``. Returns an
    m-vector.
    """
    values = path.values
    if not 0 <= k < len(values):
        raise IndexError(f"node {k} outside path of length {len(values)}")
    if weights.n_max < k:
        raise ValueError(f"weight table covers 0..{weights.n_max}, need {k}")
    dev = values[k::-1] - values[0]
    return weights.weights[: k + 1] @ dev / path.h**weights.alpha
