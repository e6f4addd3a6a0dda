"""Acceptance criteria at their stated tolerances.

Each test records one ``PASS``/``FAIL`` line (printed immediately and again in
the terminal summary). Targets and tolerances are fixed; a failing line is a
real disagreement, not a flaky test.
"""

import cmath
import math
import time

import numpy as np
import pytest

from cvteleport import _accel
from cvteleport.analysis import fringe_visibility, quadrature_distribution, wigner_function
from cvteleport.conditioning import (
    SubtractionEvent,
    entanglement_entropy,
    entanglement_sweep,
    subtract_photons,
    subtract_photons_tmsv,
    tmsv_entropy,
)
from cvteleport.numerics import associated_laguerre, gauss_legendre, log_factorial, oscillator_eigenfunctions
from cvteleport.states import DensityMatrix, coherent_state, normalize, odd_cat_state, random_state, two_mode_squeezed_vacuum
from cvteleport.teleport import (
    averaged_density_matrix,
    averaged_fidelity,
    default_outcome_grid,
    kernel_matrix_B,
    kernel_matrix_D,
    teleport_oracle,
    teleported_coefficients,
)

import conftest
from conftest import ALPHA_REF, Q_REF, R_REF

X_FRINGE = np.linspace(-5.0, 5.0, 1001)


def report(label, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
    print(line)
    conftest.ACCEPTANCE_LINES.append(line)
    assert ok, line


@pytest.fixture(scope="module")
def single_thread():
    try:
        import numba
    except ImportError:
        yield
        return
    before = numba.get_num_threads()
    _accel.set_threads(1)
    yield
    numba.set_num_threads(before)


def _reference_states(dim):
    cat = odd_cat_state(ALPHA_REF, dim)
    tmsv = two_mode_squeezed_vacuum(Q_REF, dim)
    sub, prob = subtract_photons(tmsv, SubtractionEvent.symmetric(1, R_REF))
    return cat, normalize(tmsv), normalize(sub), prob


def _timed_fidelity(inp, ent):
    # warm the compiled kernels so the timing measures the averaging alone
    averaged_density_matrix(inp, ent, gauss_legendre(2, -1, 1), max_loss=None)
    start = time.perf_counter()
    rho = averaged_density_matrix(inp, ent, default_outcome_grid(160, 8.0))
    return averaged_fidelity(inp, rho), time.perf_counter() - start


def test_criterion_1_fidelity_tmsv(single_thread):
    cat, tmsv, _, _ = _reference_states(64)
    F, elapsed = _timed_fidelity(cat, tmsv)
    ok = abs(F - 0.6463) <= 0.002 and elapsed < 60.0
    report("1 averaged fidelity, plain squeezed vacuum", ok, f"F = {F:.6f} (target 0.6463 +- 0.002), {elapsed:.1f} s single-threaded")


def test_criterion_2_fidelity_subtracted(single_thread):
    cat, _, sub, _ = _reference_states(64)
    F, elapsed = _timed_fidelity(cat, sub)
    ok = abs(F - 0.7444) <= 0.002 and elapsed < 60.0
    report("2 averaged fidelity, photon-subtracted", ok, f"F = {F:.6f} (target 0.7444 +- 0.002), {elapsed:.1f} s single-threaded")


def test_criterion_3_success_probability():
    start = time.perf_counter()
    _, prob = subtract_photons(two_mode_squeezed_vacuum(Q_REF, 64), SubtractionEvent.symmetric(1, R_REF))
    elapsed = time.perf_counter() - start
    ok = abs(prob - 0.0039) <= 0.0002 and elapsed < 1.0
    report("3 heralding probability", ok, f"P = {prob:.6f} (target 0.0039 +- 0.0002), {elapsed * 1e3:.1f} ms")


@pytest.mark.parametrize("case, target", [("tmsv", 0.266), ("subtracted", 0.482)])
def test_criterion_4_visibility(case, target, rho_tmsv, rho_subtracted):
    rho = rho_tmsv if case == "tmsv" else rho_subtracted
    pr = quadrature_distribution(DensityMatrix(rho.elements / rho.trace), X_FRINGE)
    v = fringe_visibility(pr, X_FRINGE)
    report(f"4 fringe visibility, {case}", abs(v - target) <= 0.010, f"V = {v:.4f} (target {target} +- 0.010)")


def test_criterion_5_entropy_gain():
    r_values = np.round(np.arange(1, 81) * 0.005, 3)
    rows = entanglement_sweep(Q_REF, 1, 1, r_values, 64)
    e_tmsv = entanglement_entropy(two_mode_squeezed_vacuum(Q_REF, 64))
    best = max(rows, key=lambda row: row.entropy_bits)
    gain = best.entropy_bits - e_tmsv
    analytic = tmsv_entropy(Q_REF)
    ok = gain > 1.0 and abs(e_tmsv - 2.77) <= 0.01 and abs(e_tmsv - analytic) <= 1e-6
    report(
        "5 entropy gain",
        ok,
        f"max gain {gain:.4f} bit at r = {best.r} (> 1); E_tmsv = {e_tmsv:.5f} (2.77 +- 0.01, analytic {analytic:.5f})",
    )


def test_criterion_6_oracle_equivalence(tmsv):
    rng = np.random.default_rng(6)
    ent = normalize(tmsv)
    worst = 0.0
    for _ in range(3):
        inp = random_state(64, 12, rng)
        for X0, P1 in rng.uniform(-2.5, 2.5, size=(5, 2)):
            b = teleported_coefficients(inp, ent, (X0, P1)).coeffs
            ref = teleport_oracle(inp, ent, (X0, P1)).coeffs
            worst = max(worst, float(np.max(np.abs(b - ref))))
    report("6 Fock kernels vs wave-function oracle", worst <= 1e-6, f"max |db| = {worst:.2e} (tol 1e-6)")


def _lower_triangle(m, k, X0, P1):
    """``B[m, k]`` for ``m > k`` from its own Laguerre form, not via the symmetry."""
    y = X0 * X0 + P1 * P1
    d = m - k
    if y == 0.0:
        return 0j
    mag = math.exp(0.5 * (log_factorial(k) - log_factorial(m)) + 0.5 * d * math.log(y) - 0.5 * y)
    return cmath.rect(mag, d * math.atan2(P1, X0)) * associated_laguerre(k, d, y)


def _D_integral(n, X0, P1, grid):
    x = grid.nodes
    phl = oscillator_eigenfunctions(n - 1, (x - X0) / math.sqrt(2))
    phn = oscillator_eigenfunctions(n - 1, (x + X0) / math.sqrt(2))
    return (phl * np.exp(-1j * P1 * x) * grid.weights) @ phn.T


def test_criterion_7a_kernel_symmetry_and_relation():
    rng = np.random.default_rng(7)
    n = 49
    grid = gauss_legendre(600, -14.0, 14.0)
    dev_sym = dev_rel = dev_int = 0.0
    for X0, P1 in rng.uniform(-2.5, 2.5, size=(10, 2)):
        B = kernel_matrix_B((X0, P1), n).entries
        D = kernel_matrix_D((X0, P1), n).entries
        for m in range(n):
            for k in range(m):
                lower = _lower_triangle(m, k, X0, P1)
                dev_sym = max(dev_sym, abs(B[k, m] - (-1) ** (m - k) * lower.conjugate()))
        dev_rel = max(dev_rel, float(np.max(np.abs(D - math.sqrt(2) * B.conj().T))))
        dev_int = max(dev_int, float(np.max(np.abs(D[:16, :16] - _D_integral(16, X0, P1, grid)))))
    ok = dev_sym <= 1e-10 and dev_rel <= 1e-10 and dev_int <= 1e-8
    report(
        "7a kernel symmetry and D = sqrt2 B^H",
        ok,
        f"symmetry {dev_sym:.1e}, relation {dev_rel:.1e} (tol 1e-10); D vs integral {dev_int:.1e} (tol 1e-8)",
    )


def test_criterion_7b_identity_at_origin():
    B = kernel_matrix_B((0.0, 0.0), 64).entries
    D = kernel_matrix_D((0.0, 0.0), 64).entries
    ok = np.array_equal(B, np.eye(64)) and np.array_equal(D, math.sqrt(2) * np.eye(64))
    report("7b B(0,0) = I exactly", ok, "exact" if ok else "not exact")


def test_criterion_7c_probability_conservation(rho_tmsv, rho_subtracted):
    dev = max(abs(rho_tmsv.trace - 1.0), abs(rho_subtracted.trace - 1.0))
    report("7c integrated outcome probability", dev <= 1e-5, f"|1 - trace| = {dev:.2e} (tol 1e-5)")


def test_criterion_7d_positive_semidefinite(rho_tmsv, rho_subtracted):
    low = min(np.linalg.eigvalsh(r.elements).min() for r in (rho_tmsv, rho_subtracted))
    report("7d averaged state positive semidefinite", low >= -1e-8, f"min eigenvalue {low:.2e} (>= -1e-8)")


def test_criterion_7e_general_map_vs_closed_form():
    tmsv = two_mode_squeezed_vacuum(Q_REF, 64)
    dev = 0.0
    for n1 in range(5):
        for n2 in range(5):
            for r in (0.05, 0.15, 0.3):
                ev = SubtractionEvent(n1, n2, r, r)
                dev = max(dev, float(np.max(np.abs(subtract_photons(tmsv, ev)[0].coeffs - subtract_photons_tmsv(Q_REF, ev, 64)[0].coeffs))))
    report("7e subtraction map vs closed form", dev <= 1e-12, f"max dev {dev:.1e} (tol 1e-12)")


def test_criterion_7f_wigner_marginal(rho_subtracted):
    g = gauss_legendre(120, -9.0, 9.0)
    x = np.linspace(-4.0, 4.0, 33)
    W = wigner_function(rho_subtracted, x, g.nodes).values
    dev = float(np.max(np.abs(W @ g.weights - quadrature_distribution(rho_subtracted, x))))
    report("7f Wigner marginal vs quadrature distribution", dev <= 1e-6, f"max dev {dev:.1e} (tol 1e-6)")


def test_criterion_7g_coherent_fidelity():
    inp = coherent_state(1.0, 64)
    rho = averaged_density_matrix(inp, normalize(two_mode_squeezed_vacuum(Q_REF, 64)))
    F = averaged_fidelity(inp, rho)
    expected = 1.0 / (1.0 + math.exp(-2.0 * math.atanh(Q_REF)))
    report("7g coherent-state fidelity vs analytic", abs(F - expected) <= 5e-3, f"F = {F:.6f}, analytic {expected:.6f} (tol 5e-3)")


@pytest.mark.slow
@pytest.mark.parametrize("case", ["tmsv", "subtracted"])
def test_criterion_8_convergence(case):
    values = {}
    for dim, order in [(64, 160), (128, 160), (64, 224), (128, 224)]:
        cat, tmsv, sub, _ = _reference_states(dim)
        ent = tmsv if case == "tmsv" else sub
        rho = averaged_density_matrix(cat, ent, default_outcome_grid(order, 8.0))
        values[dim, order] = averaged_fidelity(cat, rho)
    base = values[64, 160]
    drift = max(abs(v - base) for v in values.values())
    report(f"8 convergence, {case}", drift < 5e-4, f"max |dF| over dim 64/128 x grid 160/224 = {drift:.1e} (< 5e-4)")
