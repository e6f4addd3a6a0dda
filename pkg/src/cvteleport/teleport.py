"""Fock-basis teleportation through a shared two-mode state.

Alice mixes the input with mode 1 on a balanced splitter and measures
``x0 -> X0`` and ``p1 -> P1``; Bob displaces mode 2 by ``sqrt(2)(X0 + iP1)``.
For each outcome the teleported (unnormalized) amplitudes are

    b = C a,    C = exp(i X0 P1) (2 pi)^{-1/2} B A D,    D = sqrt(2) B^H

with ``B`` the closed-form Laguerre kernel and ``A`` the entangled-state
coefficient matrix. The unit-modulus factor ``exp(i X0 P1)`` is the phase by
which the closed form of ``B`` differs from its defining overlap integral; it
drops out of every probability and fidelity but keeps ``b`` identical to the
amplitudes obtained by integrating the wave functions directly
(:func:`teleport_oracle`).
"""

from __future__ import annotations

import cmath
import io
import math
from dataclasses import dataclass

import numpy as np

from cvteleport import kernels
from cvteleport.numerics import (
    QuadratureGrid,
    associated_laguerre,
    gauss_legendre,
    log_factorial,
    oscillator_eigenfunctions,
)
from cvteleport.states import DensityMatrix, SingleModeState, TwoModeState, norm_squared

# outcome integration domain and order used when none is given
DEFAULT_BOUND = 8.0
DEFAULT_ORDER = 160
# tolerated relative probability missing from the outcome grid
DEFAULT_MAX_LOSS = 1e-5
# outcomes per accumulation block; fixes the reduction order of rho
BLOCK = 2048


class ConvergenceError(RuntimeError):
    """The outcome grid or Fock cutoff lost more weight than allowed."""


@dataclass(frozen=True)
class HomodyneOutcome:
    X0: float
    P1: float

    def __post_init__(self):
        X0, P1 = float(self.X0), float(self.P1)
        if not (math.isfinite(X0) and math.isfinite(P1)):
            raise ValueError("homodyne outcome must be finite")
        object.__setattr__(self, "X0", X0)
        object.__setattr__(self, "P1", P1)


@dataclass(frozen=True)
class KernelMatrix:
    entries: np.ndarray
    outcome: HomodyneOutcome
    kind: str

    def __post_init__(self):
        if self.kind not in ("B", "D", "C"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")


def _as_outcome(outcome):
    if isinstance(outcome, HomodyneOutcome):
        return outcome
    X0, P1 = outcome
    return HomodyneOutcome(X0, P1)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


def kernel_B(m: int, k: int, outcome) -> complex:
    """Single element ``B[m, k]`` from the Laguerre closed form.

    For ``k < m`` the element follows from ``B[k, m] = (-1)^(k-m) conj(B[m, k])``.
    """
    if m < 0 or k < 0:
        raise ValueError("Fock indices must be non-negative")
    o = _as_outcome(outcome)
    if k < m:
        return (-1) ** (m - k) * kernel_B(k, m, o).conjugate()
    d = k - m
    y = o.X0**2 + o.P1**2
    # sqrt(2^d) (-(X0 - i P1)/sqrt(2))^d == (-(X0 - i P1))^d
    beta = complex(-o.X0, o.P1)
    lag = associated_laguerre(m, d, y)
    if d == 0:
        return complex(math.exp(-0.5 * y) * lag)
    if beta == 0:
        return 0j
    logmag = 0.5 * (log_factorial(m) - log_factorial(k)) + d * math.log(abs(beta)) - 0.5 * y
    return cmath.rect(math.exp(logmag), d * cmath.phase(beta)) * lag


def kernel_D(l: int, n: int, outcome) -> complex:
    """``D[l, n] = sqrt(2) conj(B[n, l])``, the closed form of its overlap integral."""
    return math.sqrt(2.0) * kernel_B(n, l, outcome).conjugate()


def kernel_matrix_B(outcome, dim: int) -> KernelMatrix:
    o = _as_outcome(outcome)
    return KernelMatrix(kernels.displacement_matrix(o.X0, o.P1, dim), o, "B")


def kernel_matrix_D(outcome, dim: int) -> KernelMatrix:
    o = _as_outcome(outcome)
    B = kernels.displacement_matrix(o.X0, o.P1, dim)
    return KernelMatrix(math.sqrt(2.0) * B.conj().T, o, "D")


def kernel_C(entangled: TwoModeState, outcome) -> KernelMatrix:
    """Transfer matrix from input amplitudes ``a_n`` to teleported amplitudes ``b_m``."""
    o = _as_outcome(outcome)
    B = kernels.displacement_matrix(o.X0, o.P1, entangled.dim)
    D = math.sqrt(2.0) * B.conj().T
    C = cmath.exp(1j * o.X0 * o.P1) / math.sqrt(2.0 * math.pi) * (B @ entangled.coeffs @ D)
    return KernelMatrix(C, o, "C")


# ---------------------------------------------------------------------------
# single outcome
# ---------------------------------------------------------------------------


def _check_dims(inp, entangled):
    if inp.dim != entangled.dim:
        raise ValueError(f"input dim {inp.dim} does not match entangled dim {entangled.dim}")


def teleport_amplitudes(inp: SingleModeState, entangled: TwoModeState, X0, P1) -> np.ndarray:
    """Amplitudes ``b[g, m]`` for arrays of outcomes ``(X0[g], P1[g])``."""
    _check_dims(inp, entangled)
    return kernels.teleport_amplitudes(
        np.atleast_1d(X0), np.atleast_1d(P1), entangled.coeffs, inp.coeffs
    )


def teleported_coefficients(inp: SingleModeState, entangled: TwoModeState, outcome) -> SingleModeState:
    o = _as_outcome(outcome)
    return SingleModeState(teleport_amplitudes(inp, entangled, o.X0, o.P1)[0])


def outcome_probability_density(inp: SingleModeState, entangled: TwoModeState, outcome) -> float:
    b = teleported_coefficients(inp, entangled, outcome)
    return norm_squared(b)


def conditional_fidelity(inp: SingleModeState, entangled: TwoModeState, outcome) -> float:
    """Squared overlap of the normalized input with the normalized output state."""
    b = teleported_coefficients(inp, entangled, outcome).coeffs
    prob = float(np.vdot(b, b).real)
    if prob <= 0.0:
        raise ValueError("fidelity is undefined at an outcome of zero probability")
    overlap = np.vdot(inp.coeffs, b)
    return float(abs(overlap) ** 2 / (prob * norm_squared(inp)))


@dataclass(frozen=True)
class OutcomeSurface:
    """Probability density and conditional fidelity on an ``X0 x P1`` lattice."""

    X0: np.ndarray
    P1: np.ndarray
    probability: np.ndarray
    fidelity: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("X0,P1,probability_density,fidelity\n")
        for i, x in enumerate(self.X0):
            for j, p in enumerate(self.P1):
                buf.write(f"{x:.17g},{p:.17g},{self.probability[i, j]:.17g},{self.fidelity[i, j]:.17g}\n")
        return buf.getvalue()


def outcome_surface(inp: SingleModeState, entangled: TwoModeState, X0_values, P1_values) -> OutcomeSurface:
    X0_values = np.asarray(X0_values, dtype=float)
    P1_values = np.asarray(P1_values, dtype=float)
    XX, PP = np.meshgrid(X0_values, P1_values, indexing="ij")
    b = teleport_amplitudes(inp, entangled, XX.ravel(), PP.ravel())
    prob = np.sum(np.abs(b) ** 2, axis=1)
    overlap = np.abs(b @ inp.coeffs.conj()) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        fid = np.where(prob > 0.0, overlap / (prob * norm_squared(inp)), np.nan)
    shape = XX.shape
    return OutcomeSurface(X0_values, P1_values, prob.reshape(shape), fid.reshape(shape))


# ---------------------------------------------------------------------------
# averaging over outcomes
# ---------------------------------------------------------------------------


def default_outcome_grid(order: int = DEFAULT_ORDER, bound: float = DEFAULT_BOUND) -> QuadratureGrid:
    return gauss_legendre(order, -bound, bound)


def averaged_density_matrix(
    inp: SingleModeState,
    entangled: TwoModeState,
    x_grid: QuadratureGrid | None = None,
    p_grid: QuadratureGrid | None = None,
    max_loss: float | None = DEFAULT_MAX_LOSS,
) -> DensityMatrix:
    """Output state averaged over all homodyne outcomes.

    ``rho[m, m'] = sum_g w_g b_m(g) conj(b_m'(g))``, i.e. ``<m|rho|m'>`` of the
    mixture, which makes ``rho`` positive semidefinite. Its trace is the
    integrated outcome probability; the relative shortfall against
    ``|a|^2 |A|^2`` is checked against ``max_loss`` (``None`` skips the check).
    """
    _check_dims(inp, entangled)
    x_grid = x_grid or default_outcome_grid()
    p_grid = p_grid or x_grid
    XX, PP = np.meshgrid(x_grid.nodes, p_grid.nodes, indexing="ij")
    W = np.outer(x_grid.weights, p_grid.weights).ravel()
    XX, PP = XX.ravel(), PP.ravel()
    dim = inp.dim
    rho = np.zeros((dim, dim), dtype=complex)
    for start in range(0, XX.size, BLOCK):
        sl = slice(start, start + BLOCK)
        b = kernels.teleport_amplitudes(XX[sl], PP[sl], entangled.coeffs, inp.coeffs)
        rho += (b * W[sl, None]).T @ b.conj()
    rho = 0.5 * (rho + rho.conj().T)
    expected = norm_squared(inp) * norm_squared(entangled)
    loss = 1.0 - np.trace(rho).real / expected
    if max_loss is not None and abs(loss) > max_loss:
        raise ConvergenceError(
            f"outcome grid captures {1.0 - loss:.8f} of the probability "
            f"(relative loss {loss:.2e} > {max_loss:.1e}); widen the grid or raise dim"
        )
    return DensityMatrix(rho)


def averaged_fidelity(inp: SingleModeState, rho: DensityMatrix) -> float:
    """``<in|rho|in>`` with both the input and ``rho`` normalized to unit trace."""
    a = inp.coeffs
    if a.size != rho.dim:
        raise ValueError("dimension mismatch between input and density matrix")
    value = np.vdot(a, rho.elements @ a).real
    return float(value / (norm_squared(inp) * rho.trace))


# ---------------------------------------------------------------------------
# wave-function oracle
# ---------------------------------------------------------------------------


def default_oracle_grid() -> QuadratureGrid:
    return gauss_legendre(600, -14.0, 14.0)


def teleport_oracle(
    inp: SingleModeState,
    entangled: TwoModeState,
    outcome,
    x_grid: QuadratureGrid | None = None,
) -> SingleModeState:
    """Teleported amplitudes by direct quadrature of the output wave function.

    Builds ``psi_0`` and ``psi_E`` on the grid from eigenfunction expansions,
    forms

        psi_out(x2) = (2 pi)^{-1/2} int dx1 exp(i P1 (sqrt2 x2 - x1))
                      psi_0((x1 + X0)/sqrt2) psi_E((x1 - X0)/sqrt2, x2 - sqrt2 X0)

    and projects it onto ``phi_m``. Shares no code with the Laguerre kernels.
    """
    _check_dims(inp, entangled)
    o = _as_outcome(outcome)
    x_grid = x_grid or default_oracle_grid()
    x = x_grid.nodes
    w = x_grid.weights
    n = inp.dim
    rt2 = math.sqrt(2.0)
    psi0 = inp.coeffs @ oscillator_eigenfunctions(n - 1, (x + o.X0) / rt2)
    phi_e1 = oscillator_eigenfunctions(n - 1, (x - o.X0) / rt2)
    phi_e2 = oscillator_eigenfunctions(n - 1, x - rt2 * o.X0)
    # psi_E(x1, x2) = phi_e1[:, x1] . A . phi_e2[:, x2]
    integrand = w * np.exp(-1j * o.P1 * x) * psi0
    inner = (phi_e1 @ integrand) @ entangled.coeffs @ phi_e2
    psi_out = np.exp(1j * rt2 * o.P1 * x) * inner / math.sqrt(2.0 * math.pi)
    b = oscillator_eigenfunctions(n - 1, x) @ (w * psi_out)
    return SingleModeState(b)
