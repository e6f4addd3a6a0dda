"""Observables for the figures: Wigner functions, x-quadrature distributions, fringe contrast."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass

import numpy as np

from cvteleport import kernels
from cvteleport.numerics import oscillator_eigenfunctions
from cvteleport.states import DensityMatrix


@dataclass(frozen=True)
class PhaseSpaceGrid:
    x_values: np.ndarray
    p_values: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (np.size(self.x_values), np.size(self.p_values)):
            raise ValueError("grid values must have shape (len(x), len(p))")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("Wigner values must be finite")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("x,p,W\n")
        for i, x in enumerate(self.x_values):
            for j, p in enumerate(self.p_values):
                buf.write(f"{x:.17g},{p:.17g},{self.values[i, j]:.17g}\n")
        return buf.getvalue()

    def header(self, **extra) -> str:
        """JSON sidecar describing the grid."""
        meta = {
            "nx": int(np.size(self.x_values)),
            "np": int(np.size(self.p_values)),
            "x_min": float(self.x_values[0]),
            "x_max": float(self.x_values[-1]),
            "p_min": float(self.p_values[0]),
            "p_max": float(self.p_values[-1]),
            "convention": "x=(a+a^dag)/sqrt2, p=-i(a-a^dag)/sqrt2, integral W dx dp = trace",
        }
        meta.update(extra)
        return json.dumps(meta, sort_keys=True)


def wigner_function(rho: DensityMatrix, x_values, p_values) -> PhaseSpaceGrid:
    r"""Wigner function :math:`W(x, p)` of ``rho`` on the tensor grid ``x_values x p_values``.

    Sums the Fock-basis kernels of :math:`|m\rangle\langle n|`,

    .. math::
        W_{m,n} = \frac{(-1)^n}{\pi}\sqrt{\frac{n!}{m!}}
                  \left(\sqrt2 (x - ip)\right)^{m-n} e^{-(x^2+p^2)} L_n^{m-n}(2x^2 + 2p^2),

    for :math:`m \ge n`, normalized so that :math:`\iint W\,dx\,dp = \mathrm{tr}\,\rho`.
    """
    x_values = np.asarray(x_values, dtype=float)
    p_values = np.asarray(p_values, dtype=float)
    W = kernels.wigner_grid(rho.elements, x_values, p_values)
    return PhaseSpaceGrid(x_values, p_values, W)


def quadrature_distribution(rho: DensityMatrix, x_values) -> np.ndarray:
    """``pr(x) = sum_{m,m'} rho[m, m'] phi_m(x) phi_m'(x)``."""
    x_values = np.asarray(x_values, dtype=float)
    phi = oscillator_eigenfunctions(rho.dim - 1, x_values)
    return np.einsum("mx,mn,nx->x", phi, rho.elements, phi).real


def distribution_to_csv(x_values, pr) -> str:
    buf = io.StringIO()
    buf.write("x,pr\n")
    for x, v in zip(x_values, pr):
        buf.write(f"{x:.17g},{v:.17g}\n")
    return buf.getvalue()


def _local_extrema(values, x_values):
    """Interior extrema refined by a parabola through the three nearest samples."""
    v = np.asarray(values, dtype=float)
    x = np.asarray(x_values, dtype=float)
    found = []
    for i in range(1, v.size - 1):
        left, mid, right = v[i - 1], v[i], v[i + 1]
        if mid > left and mid >= right:
            kind = "max"
        elif mid < left and mid <= right:
            kind = "min"
        else:
            continue
        h0, h1 = x[i] - x[i - 1], x[i + 1] - x[i]
        # parabola through (x-h0, left), (x, mid), (x+h1, right)
        a = (h0 * (right - mid) + h1 * (left - mid)) / (h0 * h1 * (h0 + h1))
        b = (h0 * h0 * (right - mid) - h1 * h1 * (left - mid)) / (h0 * h1 * (h0 + h1))
        if a != 0.0:
            shift = -b / (2.0 * a)
            shift = min(max(shift, -h0), h1)
            peak = mid + b * shift + a * shift * shift
            where = x[i] + shift
        else:
            peak, where = mid, x[i]
        found.append((where, peak, kind))
    return found


def fringe_visibility(distribution, x_values) -> float:
    """Contrast ``(max - min) / (max + min)`` of the central interference fringe.

    The central fringe is the interior extremum closest to ``x = 0``. If it is
    a maximum, it is compared with the mean of its neighbouring minima; if it is
    a minimum (the odd-cat case, where ``pr(0) = 0``), with the mean of its
    neighbouring maxima. Extrema are located by quadratic interpolation.
    """
    extrema = _local_extrema(distribution, x_values)
    if not any(kind == "max" for _, _, kind in extrema):
        raise ValueError("distribution has no interior local maximum; no fringes to measure")
    if not any(kind == "min" for _, _, kind in extrema):
        raise ValueError("distribution has no interior local minimum; no fringes to measure")
    centre = min(range(len(extrema)), key=lambda i: abs(extrema[i][0]))
    _, value, kind = extrema[centre]
    neighbours = [
        extrema[j][1]
        for j in (centre - 1, centre + 1)
        if 0 <= j < len(extrema) and extrema[j][2] != kind
    ]
    if not neighbours:
        raise ValueError("central fringe has no neighbouring extremum")
    other = float(np.mean(neighbours))
    hi, lo = (value, other) if kind == "max" else (other, value)
    lo = max(lo, 0.0)
    return float((hi - lo) / (hi + lo))
