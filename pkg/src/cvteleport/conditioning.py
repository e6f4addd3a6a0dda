"""Photon subtraction from the shared entangled state and its entanglement score.

Each mode of the two-mode state passes a low-reflectivity beam splitter and
the reflected photons are counted. Conditioning on counts ``(n1, n2)`` maps
the coefficient matrix onto an unnormalized state whose squared norm is the
probability of that detection event.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from cvteleport.numerics import log_factorial
from cvteleport.states import TwoModeState, norm_squared


@dataclass(frozen=True)
class SubtractionEvent:
    """Detected counts ``n1, n2`` behind splitters of reflectance ``r1, r2``."""

    n1: int
    n2: int
    r1: float
    r2: float

    def __post_init__(self):
        for name in ("n1", "n2"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value}")
            object.__setattr__(self, name, int(value))
        for name in ("r1", "r2"):
            value = float(getattr(self, name))
            if not 0.0 <= value < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def symmetric(cls, n: int, r: float):
        return cls(n, n, r, r)

    @property
    def t1(self):
        return math.sqrt(1.0 - self.r1 * self.r1)

    @property
    def t2(self):
        return math.sqrt(1.0 - self.r2 * self.r2)

    def splitter_matrix(self, mode: int) -> np.ndarray:
        """Real 2x2 transformation ``[[t, r], [-r, t]]`` acting on the mode operators."""
        t, r = (self.t1, self.r1) if mode == 1 else (self.t2, self.r2)
        return np.array([[t, r], [-r, t]])


def fock_reduction_amplitude(k: int, n: int, t: float, r: float) -> float:
    """Amplitude of ``|k> -> |k-n>`` when ``n`` photons are detected in reflection."""
    if not 0 <= n <= k:
        raise ValueError(f"need 0 <= n <= k, got n={n}, k={k}")
    binom = math.exp(0.5 * (log_factorial(k) - log_factorial(n) - log_factorial(k - n)))
    return (-1) ** n * binom * abs(r) ** n * abs(t) ** (k - n)


def _reduction_column(dim, n, t, r):
    # amplitude for |k + n> -> |k>, k = 0 .. dim-1
    k = np.arange(dim)
    binom = np.exp(0.5 * (log_factorial(k + n) - log_factorial(n) - log_factorial(k)))
    return (-1) ** n * binom * abs(r) ** n * abs(t) ** k


def subtract_photons(state: TwoModeState, event: SubtractionEvent):
    """Condition a general two-mode state on the detection event.

    Source amplitudes beyond the cutoff are taken as zero.

    Returns:
        (unnormalized TwoModeState, success probability)
    """
    dim = state.dim
    n1, n2 = event.n1, event.n2
    new = np.zeros((dim, dim), dtype=complex)
    if n1 < dim and n2 < dim:
        f1 = _reduction_column(dim - n1, n1, event.t1, event.r1)
        f2 = _reduction_column(dim - n2, n2, event.t2, event.r2)
        new[: dim - n1, : dim - n2] = f1[:, None] * f2[None, :] * state.coeffs[n1:, n2:]
    out = TwoModeState(new)
    return out, norm_squared(out)


def _tmsv_band(q, event, count):
    """Nonzero band ``a[k, k + n1 - n2]`` of the conditioned squeezed vacuum, k < count."""
    n1, n2 = event.n1, event.n2
    k = np.arange(count)
    l = k + n1 - n2
    valid = l >= 0
    lc = np.where(valid, l, 0)
    t1, t2 = event.t1, event.t2
    log_terms = (
        log_factorial(k + n1)
        - 0.5 * (log_factorial(k) + log_factorial(lc) + log_factorial(n1) + log_factorial(n2))
        + (k + n1) * math.log(q)
        + k * math.log(t1)
        + lc * math.log(t2)
    )
    prefac = (-1) ** (n1 + n2) * math.sqrt(1.0 - q * q) * event.r1**n1 * event.r2**n2
    band = prefac * np.exp(log_terms)
    return np.where(valid, band, 0.0), k, l


def subtract_photons_tmsv(q: float, event: SubtractionEvent, dim: int):
    """Closed-form conditioned squeezed vacuum; same contract as :func:`subtract_photons`.

    Entries whose source level ``k + n1`` or ``l + n2`` lies beyond the cutoff
    are dropped, exactly as the general map does.
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"squeezing parameter q must lie in (0, 1), got {q}")
    band, k, l = _tmsv_band(q, event, dim)
    new = np.zeros((dim, dim), dtype=complex)
    keep = (l >= 0) & (k + event.n1 < dim) & (l + event.n2 < dim)
    new[k[keep], l[keep]] = band[keep]
    out = TwoModeState(new)
    return out, norm_squared(out)


def tmsv_success_probability(q: float, event: SubtractionEvent, tol: float = 1e-18) -> float:
    """Untruncated detection probability, summed until the band terms fall below ``tol``."""
    count = 256
    while True:
        band, _, _ = _tmsv_band(q, event, count)
        weights = np.abs(band) ** 2
        if weights[-1] <= tol * max(weights.max(), 1e-300) or count > 1 << 20:
            return float(weights.sum())
        count *= 2


def entanglement_entropy(state: TwoModeState, base: float = 2.0) -> float:
    """Von Neumann entropy of either reduced mode, from the Schmidt spectrum.

    The coefficient matrix is normalized first, so scale and global phase do
    not matter.
    """
    nrm = norm_squared(state)
    if nrm == 0.0:
        raise ValueError("entropy of the zero state is undefined")
    sv = np.linalg.svd(state.coeffs / math.sqrt(nrm), compute_uv=False)
    p = sv * sv
    p = p[p > 0.0]
    return float(-np.sum(p * np.log(p)) / math.log(base))


def tmsv_entropy(q: float, base: float = 2.0) -> float:
    """Closed-form entanglement of the untruncated squeezed vacuum."""
    c2 = 1.0 / (1.0 - q * q)
    s2 = q * q / (1.0 - q * q)
    return (c2 * math.log(c2) - s2 * math.log(s2)) / math.log(base)


@dataclass(frozen=True)
class SweepRow:
    r: float
    entropy_bits: float
    success_probability: float
    truncation_weight: float


def entanglement_sweep(q: float, n1: int, n2: int, r_values, dim: int = 64):
    """Entropy and detection probability of the conditioned squeezed vacuum versus ``r = r1 = r2``.

    A row whose detection probability vanishes (``r = 0`` with photons
    requested) carries ``nan`` entropy. ``truncation_weight`` is the fraction
    of the conditioned state's norm lying beyond ``dim`` levels.
    """
    rows = []
    for r in r_values:
        event = SubtractionEvent(n1, n2, r, r)
        state, prob = subtract_photons_tmsv(q, event, dim)
        if prob > 0.0:
            full = tmsv_success_probability(q, event)
            entropy = entanglement_entropy(state)
            trunc = max(0.0, 1.0 - prob / full)
        else:
            entropy, trunc = math.nan, 0.0
        rows.append(SweepRow(float(r), entropy, prob, trunc))
    return rows


def sweep_to_csv(rows) -> str:
    buf = io.StringIO()
    buf.write("r,entropy_bits,success_probability,truncation_weight\n")
    for row in rows:
        buf.write(
            f"{row.r:.17g},{row.entropy_bits:.17g},{row.success_probability:.17g},"
            f"{row.truncation_weight:.17g}\n"
        )
    return buf.getvalue()

