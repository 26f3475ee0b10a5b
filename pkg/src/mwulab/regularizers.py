"""Strictly convex regularizers over the simplex and their mirror maps.

The learning rate is embedded in the regularizer: with rate eta the update
maximizes <y, x> - h(x)/eta, so

* ``mirror(y, eta)``    is argmax_x {<y, x> - h(x)/eta},
* ``conjugate(y, eta)`` is the attained value <y, x^> - h(x^)/eta.

Entropy h(x) = sum x ln x gives the softmax mirror map (multiplicative
weights); squared Euclidean h(x) = ||x||^2 / 2 gives projected gradient
ascent.  Both mirror maps are invariant to shifting y by a constant vector.
"""

from __future__ import annotations

import numpy as np

from .games import GameError


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    v = np.asarray(v, dtype=np.float64)
    n = v.size
    u = np.sort(v)[::-1]
    cumulative = (np.cumsum(u) - 1.0) / np.arange(1, n + 1)
    k = np.nonzero(u > cumulative)[0][-1]
    return np.maximum(v - cumulative[k], 0.0)


class Regularizer:
    kind: str = ""

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def mirror(self, y: np.ndarray, eta: float = 1.0) -> np.ndarray:
        raise NotImplementedError

    def conjugate(self, y: np.ndarray, eta: float = 1.0) -> float:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}()"


def _check_dual(y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if not np.all(np.isfinite(y)):
        raise GameError(f"non-finite payoff vector {y}")
    return y


class Entropy(Regularizer):
    """Negative entropy; the FTRL regularizer behind multiplicative weights."""

    kind = "entropy"

    def value(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        return float(np.sum(np.where(x > 0.0, x * np.log(np.where(x > 0.0, x, 1.0)), 0.0)))

    def mirror(self, y, eta: float = 1.0) -> np.ndarray:
        z = eta * _check_dual(y)
        z -= z.max()  # y grows linearly with t; never exponentiate it raw
        w = np.exp(z)
        return w / w.sum()

    def conjugate(self, y, eta: float = 1.0) -> float:
        z = eta * _check_dual(y)
        m = z.max()
        return float(m + np.log(np.sum(np.exp(z - m)))) / eta

    def inverse(self, x, eta: float = 1.0) -> np.ndarray:
        """Dual vector with first coordinate 0 mapping back to x.

        Inverse of the softmax mirror map on the relative interior; boundary
        points have no dual preimage.
        """
        x = np.asarray(x, dtype=np.float64)
        if np.any(x <= 0.0):
            raise GameError("inverse mirror map needs a fully mixed vector")
        logs = np.log(x)
        return (logs - logs[0]) / eta


class SquaredEuclidean(Regularizer):
    """Half squared norm; FTRL with this regularizer is lazy gradient ascent."""

    kind = "euclidean"

    def value(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        return 0.5 * float(x @ x)

    def mirror(self, y, eta: float = 1.0) -> np.ndarray:
        return project_simplex(eta * _check_dual(y))

    def conjugate(self, y, eta: float = 1.0) -> float:
        y = _check_dual(y)
        x_hat = project_simplex(eta * y)
        return float(y @ x_hat) - self.value(x_hat) / eta


_REGISTRY = {"entropy": Entropy, "euclidean": SquaredEuclidean}


def make_regularizer(kind) -> Regularizer:
    """Regularizer from its name; passes instances through unchanged."""
    if isinstance(kind, Regularizer):
        return kind
    try:
        return _REGISTRY[kind]()
    except KeyError:
        raise GameError(f"unknown regularizer {kind!r}; options: {sorted(_REGISTRY)}")
