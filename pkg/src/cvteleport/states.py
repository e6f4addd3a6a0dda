"""Single-mode and two-mode pure states in a truncated Fock basis."""

from __future__ import annotations

import json
import math
import warnings
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from cvteleport.numerics import log_factorial

DEFAULT_DIM = 64

# truncated weight above which coherent-state generators warn
TRUNCATION_WARN = 1e-8


class TruncationWarning(UserWarning):
    """A generated state lost noticeable weight to the Fock cutoff."""


PhotonNumbers = namedtuple("PhotonNumbers", ["mode1", "mode2", "total"])


def _frozen(arr, dtype=complex, ndim=None):
    arr = np.array(arr, dtype=dtype)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("coefficients must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SingleModeState:
    """Fock amplitudes ``a_n``, ``n = 0 .. dim-1``; possibly unnormalized."""

    coeffs: np.ndarray
    is_normalized: bool = False

    def __post_init__(self):
        coeffs = _frozen(self.coeffs, ndim=1)
        if coeffs.size < 1:
            raise ValueError("state needs at least one Fock level")
        object.__setattr__(self, "coeffs", coeffs)
        if self.is_normalized and abs(np.vdot(coeffs, coeffs).real - 1.0) > 1e-10:
            raise ValueError("state flagged normalized but norm differs from 1")

    @property
    def dim(self):
        return self.coeffs.size


@dataclass(frozen=True)
class TwoModeState:
    """Two-mode amplitudes ``a[k, l]`` (mode 1 index first)."""

    coeffs: np.ndarray
    is_normalized: bool = False

    def __post_init__(self):
        coeffs = _frozen(self.coeffs, ndim=2)
        if coeffs.shape[0] != coeffs.shape[1]:
            raise ValueError("two-mode coefficient matrix must be square")
        object.__setattr__(self, "coeffs", coeffs)
        if self.is_normalized and abs(np.vdot(coeffs, coeffs).real - 1.0) > 1e-10:
            raise ValueError("state flagged normalized but norm differs from 1")

    @property
    def dim(self):
        return self.coeffs.shape[0]


@dataclass(frozen=True)
class DensityMatrix:
    """Single-mode density matrix with ``elements[m, m'] = <m|rho|m'>``."""

    elements: np.ndarray

    def __post_init__(self):
        el = _frozen(self.elements, ndim=2)
        if el.shape[0] != el.shape[1]:
            raise ValueError("density matrix must be square")
        if np.max(np.abs(el - el.conj().T), initial=0.0) > 1e-10:
            raise ValueError("density matrix is not Hermitian")
        if np.min(np.diagonal(el).real, initial=0.0) < -1e-12:
            raise ValueError("density matrix has negative populations")
        object.__setattr__(self, "elements", el)

    @property
    def dim(self):
        return self.elements.shape[0]

    @property
    def trace(self):
        return float(np.trace(self.elements).real)

    @classmethod
    def from_pure(cls, state: SingleModeState):
        a = state.coeffs
        return cls(np.outer(a, a.conj()))


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def _check_dim(dim):
    if int(dim) != dim or dim < 1:
        raise ValueError(f"dimension must be a positive integer, got {dim}")
    return int(dim)


def two_mode_squeezed_vacuum(q: float, dim: int = DEFAULT_DIM, normalize: bool = False) -> TwoModeState:
    """``sqrt(1-q^2) sum_k q^k |k>|k>`` truncated to ``dim`` levels per mode.

    The analytic prefactor is kept, so the captured norm is ``1 - q**(2*dim)``
    unless ``normalize`` is set.
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"squeezing parameter q must lie in (0, 1), got {q}")
    dim = _check_dim(dim)
    diag = math.sqrt(1.0 - q * q) * q ** np.arange(dim, dtype=float)
    if normalize:
        diag = diag / np.linalg.norm(diag)
    return TwoModeState(np.diag(diag).astype(complex), is_normalized=normalize)


def tmsv_truncation_weight(q: float, dim: int) -> float:
    """Norm of the squeezed vacuum that falls beyond ``dim`` levels."""
    return q ** (2 * dim)


def coherent_state(alpha: complex, dim: int = DEFAULT_DIM) -> SingleModeState:
    """Coherent state renormalized over the truncated basis."""
    dim = _check_dim(dim)
    n = np.arange(dim)
    coeffs = _coherent_raw(complex(alpha), n)
    kept = float(np.sum(np.abs(coeffs) ** 2))
    if 1.0 - kept > TRUNCATION_WARN:
        warnings.warn(
            f"coherent state |alpha|^2={abs(alpha) ** 2:.3g} loses {1.0 - kept:.2e} of its "
            f"norm at dim={dim}",
            TruncationWarning,
            stacklevel=2,
        )
    return SingleModeState(coeffs / math.sqrt(kept), is_normalized=True)


def _coherent_raw(alpha, n):
    # e^{-|a|^2/2} a^n / sqrt(n!) in polar form
    if alpha == 0:
        out = np.zeros(n.size, dtype=complex)
        out[0] = 1.0
        return out
    logmag = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * log_factorial(n)
    return np.exp(logmag) * np.exp(1j * n * np.angle(alpha))


def odd_cat_state(alpha: complex, dim: int = DEFAULT_DIM) -> SingleModeState:
    """Normalized ``|alpha> - |-alpha>``; only odd Fock levels are populated."""
    alpha = complex(alpha)
    if alpha == 0:
        raise ValueError("odd cat state is undefined for alpha = 0")
    dim = _check_dim(dim)
    n = np.arange(dim)
    coeffs = 2.0 * _coherent_raw(alpha, n)
    coeffs[n % 2 == 0] = 0.0
    lost = cat_truncation_weight(alpha, dim)
    if lost > TRUNCATION_WARN:
        warnings.warn(
            f"cat state loses {lost:.2e} of its norm at dim={dim}",
            TruncationWarning,
            stacklevel=2,
        )
    return SingleModeState(coeffs / np.linalg.norm(coeffs), is_normalized=True)


def cat_truncation_weight(alpha: complex, dim: int) -> float:
    """Fraction of the odd cat's norm beyond ``dim`` levels."""
    raw = _coherent_raw(complex(alpha), np.arange(dim))
    kept = float(np.sum(np.abs(raw[1::2]) ** 2))
    full = math.exp(-abs(alpha) ** 2) * math.sinh(abs(alpha) ** 2)
    return max(0.0, 1.0 - kept / full)


def fock_state(n: int, dim: int = DEFAULT_DIM) -> SingleModeState:
    dim = _check_dim(dim)
    if not 0 <= n < dim:
        raise ValueError("Fock index outside the truncated basis")
    coeffs = np.zeros(dim, dtype=complex)
    coeffs[n] = 1.0
    return SingleModeState(coeffs, is_normalized=True)


def product_vacuum(dim: int = DEFAULT_DIM) -> TwoModeState:
    coeffs = np.zeros((dim, dim), dtype=complex)
    coeffs[0, 0] = 1.0
    return TwoModeState(coeffs, is_normalized=True)


def random_state(dim: int, support: int, rng: np.random.Generator) -> SingleModeState:
    """Normalized state with random complex amplitudes on the first ``support`` levels."""
    coeffs = np.zeros(dim, dtype=complex)
    coeffs[:support] = rng.normal(size=support) + 1j * rng.normal(size=support)
    return normalize(SingleModeState(coeffs))


# ---------------------------------------------------------------------------
# generic manipulation
# ---------------------------------------------------------------------------


def norm_squared(state) -> float:
    c = state.coeffs
    return float(np.vdot(c, c).real)


def normalize(state):
    nrm = norm_squared(state)
    if nrm == 0.0:
        raise ValueError("cannot normalize the zero state")
    return type(state)(state.coeffs / math.sqrt(nrm), is_normalized=True)


def mean_photon_number(state):
    """``<n>`` of a single-mode state, or per-mode and total numbers of a two-mode state.

    The state is normalized internally.
    """
    nrm = norm_squared(state)
    if nrm == 0.0:
        raise ValueError("mean photon number of the zero state is undefined")
    if isinstance(state, SingleModeState):
        return float(np.arange(state.dim) @ np.abs(state.coeffs) ** 2 / nrm)
    prob = np.abs(state.coeffs) ** 2 / nrm
    n = np.arange(state.dim)
    n1 = float(n @ prob.sum(axis=1))
    n2 = float(n @ prob.sum(axis=0))
    return PhotonNumbers(n1, n2, n1 + n2)


def resize(state: SingleModeState, dim: int) -> SingleModeState:
    """Pad with zeros or cut to ``dim`` levels."""
    coeffs = np.zeros(dim, dtype=complex)
    k = min(dim, state.dim)
    coeffs[:k] = state.coeffs[:k]
    return SingleModeState(coeffs)


# ---------------------------------------------------------------------------
# JSON documents
# ---------------------------------------------------------------------------


def to_json(obj) -> str:
    """Serialize a state or density matrix.

    Floats are written with Python's shortest round-trip repr, so
    ``from_json(to_json(s))`` reproduces every coefficient bit for bit.
    """
    if isinstance(obj, SingleModeState):
        kind, arr, extra = "single", obj.coeffs, {}
    elif isinstance(obj, TwoModeState):
        kind, arr, extra = "two_mode", obj.coeffs, {}
    elif isinstance(obj, DensityMatrix):
        kind, arr, extra = "density", obj.elements, {"trace": obj.trace}
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    flat = arr.reshape(-1)
    doc = {
        "kind": kind,
        "dim": int(arr.shape[0]),
        "re": [float(v) for v in flat.real],
        "im": [float(v) for v in flat.imag],
    }
    doc.update(extra)
    return json.dumps(doc)


def from_json(text: str):
    doc = json.loads(text)
    dim = int(doc["dim"])
    values = np.empty(len(doc["re"]), dtype=complex)
    values.real = doc["re"]
    values.imag = doc["im"]
    kind = doc["kind"]
    if kind == "single":
        return SingleModeState(values.reshape(dim))
    if kind == "two_mode":
        return TwoModeState(values.reshape(dim, dim))
    if kind == "density":
        return DensityMatrix(values.reshape(dim, dim))
    raise ValueError(f"unknown state kind {kind!r}")
