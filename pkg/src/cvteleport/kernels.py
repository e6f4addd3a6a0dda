"""Hot inner loops, each in a numba and a pure-numpy flavour.

Both teleportation and Wigner evaluation reduce to the same table of
normalized Laguerre bands::

    u[m, d] = sqrt(m! / (m+d)!) * s**d * exp(-s**2 / 2) * L_m^d(s**2)

filled by the three-term recurrence in ``m`` with the factorial ratio folded
into the coefficients, so no factorial or power is ever formed on its own.
Entries with ``m + d >= N`` are left at zero.

The public entry points (``band_table``, ``displacement_matrix``,
``teleport_amplitudes``, ``wigner_grid``) dispatch on the backend picked in
:mod:`cvteleport._accel`; the ``*_numba`` / ``*_numpy`` variants are exported
for equivalence tests and the benchmark.
"""

import math

import numpy as np

from cvteleport._accel import HAS_NUMBA, njit, requested_backend

if HAS_NUMBA:
    from numba import prange
else:  # pragma: no cover
    prange = range

# outcomes per vectorized block in the numpy path; bounds peak memory at
# roughly CHUNK * N * N * 16 bytes
CHUNK = 256


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------


@njit
def _band_table_nb(s, n, out):
    y = s * s
    half = 0.5 * y
    if s > 0.0:
        logs = math.log(s)
        for d in range(n):
            out[0, d] = math.exp(d * logs - half - 0.5 * math.lgamma(d + 1.0))
    else:
        out[0, 0] = 1.0
        for d in range(1, n):
            out[0, d] = 0.0
    for d in range(n - 1):
        out[1, d] = (1.0 + d - y) * out[0, d] / math.sqrt(d + 1.0)
    for m in range(1, n - 1):
        for d in range(n - m - 1):
            out[m + 1, d] = (
                (2.0 * m + 1.0 + d - y) * out[m, d] - math.sqrt(m * (m + d)) * out[m - 1, d]
            ) / math.sqrt((m + 1.0) * (m + d + 1.0))
    for m in range(n):
        for d in range(n - m, n):
            out[m, d] = 0.0


@njit
def _fill_displacement_nb(X, P, n, u, B):
    s = math.sqrt(X * X + P * P)
    _band_table_nb(s, n, u)
    theta = math.atan2(P, -X)
    for d in range(n):
        ph = complex(math.cos(d * theta), math.sin(d * theta))
        sign = 1.0 if d % 2 == 0 else -1.0
        for m in range(n - d):
            val = ph * u[m, d]
            B[m, m + d] = val
            if d > 0:
                B[m + d, m] = sign * val.conjugate()


@njit
def displacement_matrix_numba(X, P, n):
    u = np.empty((n, n))
    B = np.empty((n, n), dtype=np.complex128)
    _fill_displacement_nb(X, P, n, u, B)
    return B


@njit(parallel=True)
def teleport_amplitudes_numba(X, P, A, a):
    G = X.shape[0]
    n = a.shape[0]
    out = np.empty((G, n), dtype=np.complex128)
    scale = 1.0 / math.sqrt(math.pi)
    for g in prange(G):
        u = np.empty((n, n))
        B = np.empty((n, n), dtype=np.complex128)
        _fill_displacement_nb(X[g], P[g], n, u, B)
        # D a = sqrt(2) B^H a; the sqrt(2) and (2 pi)^{-1/2} combine into scale
        c1 = np.zeros(n, dtype=np.complex128)
        for k in range(n):
            ak = a[k]
            if ak != 0:
                for l in range(n):
                    c1[l] += B[k, l].conjugate() * ak
        c2 = np.zeros(n, dtype=np.complex128)
        for k in range(n):
            acc = 0j
            for l in range(n):
                acc += A[k, l] * c1[l]
            c2[k] = acc
        phase = complex(math.cos(X[g] * P[g]), math.sin(X[g] * P[g])) * scale
        for m in range(n):
            acc = 0j
            for k in range(n):
                acc += B[m, k] * c2[k]
            out[g, m] = phase * acc
    return out


@njit(parallel=True)
def wigner_grid_numba(rho, x, p):
    n = rho.shape[0]
    nx = x.shape[0]
    npts = p.shape[0]
    W = np.empty((nx, npts))
    for i in prange(nx):
        u = np.empty((n, n))
        for j in range(npts):
            xr = x[i]
            pr = p[j]
            s = math.sqrt(2.0 * (xr * xr + pr * pr))
            _band_table_nb(s, n, u)
            theta = math.atan2(-pr, xr)
            total = 0.0
            for m in range(n):
                sgn = 1.0 if m % 2 == 0 else -1.0
                total += sgn * rho[m, m].real * u[m, 0]
            for d in range(1, n):
                ph = complex(math.cos(d * theta), math.sin(d * theta))
                acc = 0j
                for m in range(n - d):
                    sgn = 1.0 if m % 2 == 0 else -1.0
                    acc += sgn * rho[m + d, m] * u[m, d]
                total += 2.0 * (acc * ph).real
            W[i, j] = total / math.pi
    return W


# ---------------------------------------------------------------------------
# numpy path
# ---------------------------------------------------------------------------


def band_table_numpy(s, n):
    """Vectorized band table; ``s`` may be any array, bands go on trailing axes."""
    s = np.asarray(s, dtype=float)
    shape = s.shape
    s = s.reshape(-1)
    y = s * s
    d = np.arange(n)
    out = np.zeros((s.size, n, n))
    lg = np.array([math.lgamma(k + 1.0) for k in range(n)])
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.log(s)
        expo = d[None, :] * logs[:, None] - 0.5 * y[:, None] - 0.5 * lg[None, :]
    # 0 * log(0) for d = 0 at the origin
    expo[:, 0] = -0.5 * y
    out[:, 0, :] = np.exp(expo)
    if n > 1:
        out[:, 1, :] = (1.0 + d - y[:, None]) * out[:, 0, :] / np.sqrt(d + 1.0)
    for m in range(1, n - 1):
        out[:, m + 1, :] = (
            (2.0 * m + 1.0 + d - y[:, None]) * out[:, m, :]
            - np.sqrt(m * (m + d)) * out[:, m - 1, :]
        ) / np.sqrt((m + 1.0) * (m + d + 1.0))
    mask = (np.arange(n)[:, None] + d[None, :]) < n
    out *= mask
    return out.reshape(shape + (n, n))


def _displacement_batch_numpy(X, P, n):
    X = np.asarray(X, dtype=float)
    P = np.asarray(P, dtype=float)
    u = band_table_numpy(np.hypot(X, P), n)
    theta = np.arctan2(P, -X)
    d = np.arange(n)
    ph = np.exp(1j * theta[:, None] * d[None, :])
    m = np.arange(n)[:, None]
    k = np.arange(n)[None, :]
    dd = np.abs(k - m)
    lo = np.minimum(m, k)
    upper = ph[:, dd] * u[:, lo, dd]
    sign = np.where(dd % 2 == 0, 1.0, -1.0)
    return np.where(k >= m, upper, sign * np.conj(upper))


def displacement_matrix_numpy(X, P, n):
    return _displacement_batch_numpy(np.array([X]), np.array([P]), n)[0]


def teleport_amplitudes_numpy(X, P, A, a):
    X = np.ascontiguousarray(X, dtype=float)
    P = np.ascontiguousarray(P, dtype=float)
    n = a.shape[0]
    out = np.empty((X.size, n), dtype=complex)
    scale = 1.0 / math.sqrt(math.pi)
    for start in range(0, X.size, CHUNK):
        sl = slice(start, start + CHUNK)
        B = _displacement_batch_numpy(X[sl], P[sl], n)
        c1 = np.einsum("gkl,k->gl", B.conj(), a)
        c2 = c1 @ A.T
        b = np.einsum("gmk,gk->gm", B, c2)
        out[sl] = (np.exp(1j * X[sl] * P[sl]) * scale)[:, None] * b
    return out


def wigner_grid_numpy(rho, x, p):
    n = rho.shape[0]
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    W = np.empty((x.size, p.size))
    sgn = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    # band diagonals of rho: diag[d][m] = rho[m + d, m]
    bands = np.zeros((n, n), dtype=complex)
    for d in range(n):
        bands[: n - d, d] = np.diagonal(rho, offset=-d)
    weights = sgn[:, None] * bands
    step = max(1, CHUNK * 16 // max(p.size, 1))
    for start in range(0, x.size, step):
        xs = x[start : start + step, None]
        s = np.sqrt(2.0 * (xs * xs + p[None, :] ** 2))
        u = band_table_numpy(s, n)
        theta = np.arctan2(-p[None, :], xs)
        ph = np.exp(1j * theta[..., None] * np.arange(n))
        acc = np.einsum("...md,md->...d", u, weights)
        acc[..., 1:] *= 2.0
        W[start : start + step] = np.real(np.sum(acc * ph, axis=-1)) / math.pi
    return W


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def band_table(s, n):
    if requested_backend() == "numba":
        out = np.empty((n, n))
        _band_table_nb(float(s), n, out)
        return out
    return band_table_numpy(s, n)


def displacement_matrix(X, P, n):
    """Closed-form kernel matrix ``B`` for one outcome (``B[m, k]``)."""
    if requested_backend() == "numba":
        return displacement_matrix_numba(float(X), float(P), int(n))
    return displacement_matrix_numpy(float(X), float(P), int(n))


def teleport_amplitudes(X, P, A, a):
    """Teleported Fock amplitudes ``b[g, m]`` for every outcome ``(X[g], P[g])``."""
    X = np.ascontiguousarray(X, dtype=float)
    P = np.ascontiguousarray(P, dtype=float)
    A = np.ascontiguousarray(A, dtype=complex)
    a = np.ascontiguousarray(a, dtype=complex)
    if requested_backend() == "numba":
        return teleport_amplitudes_numba(X, P, A, a)
    return teleport_amplitudes_numpy(X, P, A, a)


def wigner_grid(rho, x, p):
    rho = np.ascontiguousarray(rho, dtype=complex)
    x = np.ascontiguousarray(x, dtype=float)
    p = np.ascontiguousarray(p, dtype=float)
    if requested_backend() == "numba":
        return wigner_grid_numba(rho, x, p)
    return wigner_grid_numpy(rho, x, p)
