"""Hot numeric kernels: Walsh-Hadamard transforms, the 4^n table of Weyl
operator expectations, and XOR convolutions.

Each kernel has a numba ``@njit`` implementation and a pure-numpy fallback.
The fallback is selected when numba is unavailable or when the environment
variable ``STABCORRECT_NO_NUMBA`` is set to a non-empty value other than "0".
``stabcorrect bench`` compares the two paths.

Bit conventions (used consistently across the package):
  - qubit q of a basis-state index is bit q (little-endian),
  - a Pauli label (a, b) indexes tables as ``a | (b << n)``.

With those conventions, for x = (a, b),

    <psi| W_x |psi> = i^{|a&b|} * sum_j conj(psi[j^a]) * (-1)^{|b&j|} * psi[j]

so row a of the table is the length-2^n Walsh-Hadamard transform of
g_a(j) = conj(psi[j^a]) * psi[j], giving an O(4^n n) algorithm overall.
"""

from __future__ import annotations

import os

import numpy as np

_env = os.environ.get("STABCORRECT_NO_NUMBA", "")
_numba_requested = _env in ("", "0")

if _numba_requested:
    try:
        from numba import njit

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover
        HAVE_NUMBA = False
else:
    HAVE_NUMBA = False

USING_NUMBA = HAVE_NUMBA


def backend_name() -> str:
    return "numba" if USING_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# pure-numpy implementations


def wht_inplace_numpy(v: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform, in place, length a power of 2."""
    m = v.shape[0]
    h = 1
    while h < m:
        w = v.reshape(-1, 2, h)
        a = w[:, 0, :].copy()
        b = w[:, 1, :].copy()
        w[:, 0, :] = a + b
        w[:, 1, :] = a - b
        h *= 2
    return v


_IPOW = np.array([1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j])


def char_expectations_numpy(amps: np.ndarray, n: int) -> np.ndarray:
    dim = 1 << n
    out = np.empty(dim * dim, dtype=np.float64)
    idx = np.arange(dim)
    bvals = np.arange(dim, dtype=np.uint64)
    for a in range(dim):
        g = np.conj(amps[idx ^ a]) * amps
        wht_inplace_numpy(g)
        phase = _IPOW[np.bitwise_count(np.uint64(a) & bvals) & 3]
        out[(bvals.astype(np.int64) << n) | a] = (g * phase).real
    return out


def xor_convolve_naive_numpy(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    m = p.shape[0]
    out = np.empty(m, dtype=np.float64)
    idx = np.arange(m)
    for x in range(m):
        out[x] = np.dot(p, q[idx ^ x])
    return out


# ---------------------------------------------------------------------------
# numba implementations

if HAVE_NUMBA:

    @njit(cache=True)
    def _wht_inplace_jit(v):
        m = v.shape[0]
        h = 1
        while h < m:
            for i in range(0, m, h * 2):
                for j in range(i, i + h):
                    x = v[j]
                    y = v[j + h]
                    v[j] = x + y
                    v[j + h] = x - y
            h *= 2
        return v

    @njit(cache=True)
    def _char_expectations_jit(amps, n, pc4):
        dim = 1 << n
        out = np.empty(dim * dim, dtype=np.float64)
        g = np.empty(dim, dtype=np.complex128)
        for a in range(dim):
            for j in range(dim):
                g[j] = np.conj(amps[j ^ a]) * amps[j]
            _wht_inplace_jit(g)
            for b in range(dim):
                k = pc4[a & b]
                z = g[b]
                if k == 0:
                    val = z.real
                elif k == 1:
                    val = -z.imag
                elif k == 2:
                    val = -z.real
                else:
                    val = z.imag
                out[(b << n) | a] = val
        return out

    @njit(cache=True)
    def _xor_convolve_naive_jit(p, q):
        m = p.shape[0]
        out = np.zeros(m, dtype=np.float64)
        for x in range(m):
            acc = 0.0
            for y in range(m):
                acc += p[y] * q[x ^ y]
            out[x] = acc
        return out


def _popcount_mod4_table(dim: int) -> np.ndarray:
    vals = np.arange(dim, dtype=np.uint64)
    return (np.bitwise_count(vals) & 3).astype(np.uint8)


# ---------------------------------------------------------------------------
# public dispatchers


def wht_inplace(v: np.ndarray) -> np.ndarray:
    if USING_NUMBA:
        return _wht_inplace_jit(v)
    return wht_inplace_numpy(v)


def char_expectations(amps: np.ndarray, n: int) -> np.ndarray:
    """All 4^n expectations <psi|W_(a,b)|psi>, indexed by a | (b << n)."""
    amps = np.ascontiguousarray(amps, dtype=np.complex128)
    if USING_NUMBA:
        return _char_expectations_jit(amps, n, _popcount_mod4_table(1 << n))
    return char_expectations_numpy(amps, n)


def xor_convolve(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Fast XOR convolution (p * q)(x) = sum_y p(y) q(x^y), O(m log m)."""
    m = p.shape[0]
    ph = wht_inplace(p.astype(np.float64).copy())
    qh = wht_inplace(q.astype(np.float64).copy())
    out = wht_inplace(ph * qh)
    out /= m
    return out


def xor_convolve_naive(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Quadratic reference convolution, kept as the oracle and benchmark foil."""
    p = np.ascontiguousarray(p, dtype=np.float64)
    q = np.ascontiguousarray(q, dtype=np.float64)
    if USING_NUMBA:
        return _xor_convolve_naive_jit(p, q)
    return xor_convolve_naive_numpy(p, q)
