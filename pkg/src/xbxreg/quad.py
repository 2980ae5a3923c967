"""Gauss-Laguerre quadrature rules.

The exponential mixture over the exceedance parameter is integrated against
the weight e^{-u} on (0, inf), which is exactly the Gauss-Laguerre setting.
Rules are computed by the Golub-Welsch eigen-decomposition of the Jacobi
matrix for Laguerre polynomials, with a ratio-based Newton polish of the
roots, and cached per order within the process.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import InvalidOrderError

MAX_ORDER = 256
DEFAULT_ORDER = 20


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights for integrating g(u) e^{-u} du over (0, inf).

    Immutable after construction; safe to share across threads.
    """

    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def integrate(self, g) -> float:
        """Approximate int_0^inf g(u) e^{-u} du."""
        return float(np.sum(self.weights * g(self.nodes)))


def _laguerre_ratio(order: int, x: np.ndarray):
    """Return L_n(x) / L_n'(x) without overflowing the recurrence.

    The three-term recurrence is renormalized at every step; the Newton
    correction only needs the ratio, which is scale invariant.
    """
    p_prev = np.ones_like(x)
    p = 1.0 - x
    for k in range(1, order):
        p_next = ((2 * k + 1 - x) * p - k * p_prev) / (k + 1)
        scale = np.maximum(np.abs(p_next), np.abs(p))
        scale[scale == 0] = 1.0
        p_prev = p / scale
        p = p_next / scale
    # L_n'(x) = n (L_n(x) - L_{n-1}(x)) / x  (p_prev holds L_{n-1} rescaled)
    deriv = order * (p - p_prev) / x
    return p / deriv


def _log_abs_laguerre(order: int, x: np.ndarray):
    """log |L_order(x)| via the renormalized recurrence."""
    p_prev = np.ones_like(x)
    p = 1.0 - x
    log_scale = np.zeros_like(x)
    for k in range(1, order):
        p_next = ((2 * k + 1 - x) * p - k * p_prev) / (k + 1)
        scale = np.maximum(np.abs(p_next), np.abs(p))
        scale[scale == 0] = 1.0
        log_scale += np.log(scale)
        p_prev = p / scale
        p = p_next / scale
    with np.errstate(divide="ignore"):
        return log_scale + np.log(np.abs(p))


def gauss_laguerre(order: int) -> QuadratureRule:
    """Compute the Gauss-Laguerre rule of the given order.

    Deterministic for fixed order; results are cached per process.
    """
    if not isinstance(order, (int, np.integer)) or isinstance(order, bool):
        raise InvalidOrderError(f"order must be an integer, got {order!r}")
    if order < 1 or order > MAX_ORDER:
        raise InvalidOrderError(
            f"order must be in [1, {MAX_ORDER}], got {order}"
        )
    return _gauss_laguerre_cached(int(order))


@lru_cache(maxsize=None)
def _gauss_laguerre_cached(order: int) -> QuadratureRule:
    if order == 1:
        return QuadratureRule(1, np.array([1.0]), np.array([1.0]))
    k = np.arange(order, dtype=float)
    diag = 2.0 * k + 1.0
    offdiag = np.arange(1, order, dtype=float)
    nodes, vecs = eigh_tridiagonal(diag, offdiag)
    # Two Newton steps on the eigenvalues; Golub-Welsch is already accurate
    # to ~1e-14 relative, this removes the last eigen-solver wobble.
    for _ in range(2):
        nodes = nodes - _laguerre_ratio(order, nodes)
    # w_i = x_i / ((n+1) L_{n+1}(x_i))^2, evaluated on the log scale so the
    # deep tail does not underflow the way squared eigenvector components do.
    log_w = (np.log(nodes) - 2.0 * (np.log(order + 1.0)
                                    + _log_abs_laguerre(order + 1, nodes)))
    weights = np.exp(log_w)
    weights = weights / weights.sum()
    order_idx = np.argsort(nodes)
    return QuadratureRule(order, nodes[order_idx], weights[order_idx])
