"""Special functions and quadrature rules shared by the other modules."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Factorials are tabulated up to this index; larger arguments fall back to lgamma.
LOG_FACTORIAL_TABLE_SIZE = 1024

_LOG_FACTORIALS = np.array([math.lgamma(k + 1.0) for k in range(LOG_FACTORIAL_TABLE_SIZE)])
_LOG_FACTORIALS.setflags(write=False)


def log_factorial(n):
    """Return ``ln(n!)``. Accepts an int or an integer array."""
    if np.ndim(n) == 0:
        n = int(n)
        if n < 0:
            raise ValueError(f"log_factorial needs n >= 0, got {n}")
        if n < LOG_FACTORIAL_TABLE_SIZE:
            return float(_LOG_FACTORIALS[n])
        return math.lgamma(n + 1.0)
    n = np.asarray(n)
    if np.any(n < 0):
        raise ValueError("log_factorial needs n >= 0")
    if np.all(n < LOG_FACTORIAL_TABLE_SIZE):
        return _LOG_FACTORIALS[n]
    return np.vectorize(lambda k: math.lgamma(k + 1.0), otypes=[float])(n)


def oscillator_eigenfunctions(nmax: int, x) -> np.ndarray:
    r"""Harmonic-oscillator eigenfunctions :math:`\varphi_0 \dots \varphi_{n_{max}}` at ``x``.

    Uses the upward recurrence on the normalized functions

    .. math::
        \varphi_{n+1}(x) = x\sqrt{2/(n+1)}\,\varphi_n(x) - \sqrt{n/(n+1)}\,\varphi_{n-1}(x),

    which never forms a Hermite polynomial or a factorial.

    Returns:
        array of shape ``(nmax + 1,) + np.shape(x)``
    """
    if nmax < 0:
        raise ValueError("nmax must be >= 0")
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = math.pi**-0.25 * np.exp(-0.5 * x * x)
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for n in range(1, nmax):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * x * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def oscillator_eigenfunction(n: int, x):
    """Single eigenfunction ``phi_n(x)``; see :func:`oscillator_eigenfunctions`."""
    return oscillator_eigenfunctions(n, x)[n]


def associated_laguerre(m: int, alpha: int, y):
    """Associated Laguerre polynomial ``L_m^alpha(y)`` by the recurrence in ``m``."""
    if m < 0:
        raise ValueError("m must be >= 0")
    if alpha < -m:
        raise ValueError("alpha must be >= -m")
    y = np.asarray(y, dtype=float)
    prev = np.ones_like(y)
    if m == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + alpha - y
    for k in range(1, m):
        prev, cur = cur, ((2 * k + 1 + alpha - y) * cur - (k + alpha) * prev) / (k + 1)
    return cur if np.ndim(cur) else float(cur)


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes and positive weights of a 1D rule on ``[lower, upper]``."""

    nodes: np.ndarray
    weights: np.ndarray
    lower: float
    upper: float

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise ValueError("nodes and weights must be 1D arrays of equal length")
        if not self.lower < self.upper:
            raise ValueError("lower must be < upper")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if nodes[0] < self.lower or nodes[-1] > self.upper:
            raise ValueError("nodes must lie within [lower, upper]")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return self.nodes.size

    def integrate(self, values):
        """Quadrature sum over the last axis of ``values``."""
        return np.asarray(values) @ self.weights


@lru_cache(maxsize=64)
def _leggauss(n):
    return np.polynomial.legendre.leggauss(n)


def gauss_legendre(n: int, lower: float, upper: float) -> QuadratureGrid:
    """``n``-point Gauss-Legendre rule mapped onto ``[lower, upper]``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (math.isfinite(lower) and math.isfinite(upper)) or not lower < upper:
        raise ValueError(f"invalid bounds [{lower}, {upper}]")
    t, w = _leggauss(n)
    half = 0.5 * (upper - lower)
    mid = 0.5 * (upper + lower)
    return QuadratureGrid(nodes=mid + half * t, weights=half * w, lower=lower, upper=upper)
