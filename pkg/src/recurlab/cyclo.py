"""Exact arithmetic in Z[zeta_m] using phase histograms.

A value is stored unreduced as an integer vector ``h`` of length ``m`` meaning
``sum_k h[k] * zeta_m**k``. Equality and zero tests go through the canonical
reduction modulo the ``m``-th cyclotomic polynomial.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import sympy


@lru_cache(maxsize=None)
def reduction_matrix(m: int) -> np.ndarray:
    """``R[k]`` holds the coordinates of ``zeta_m**k`` in the basis ``1, zeta, ..., zeta**(phi(m)-1)``."""
    x = sympy.Symbol("x")
    poly = sympy.Poly(sympy.cyclotomic_poly(m, x), x)
    deg = poly.degree()
    # monic; coefficients from highest to lowest
    coeffs = [int(c) for c in poly.all_coeffs()]
    rows = []
    for k in range(m):
        if k < deg:
            v = [0] * deg
            v[k] = 1
            rows.append(v)
            continue
        # multiply previous row by x, then eliminate x**deg
        prev = rows[-1]
        top = prev[-1]
        shifted = [0] + prev[:-1]
        for i in range(deg):
            # x**deg = -sum_{i<deg} coeffs[deg - i] x**i
            shifted[i] -= top * coeffs[deg - i]
        rows.append(shifted)
    if m == 1:
        return np.ones((1, 1), dtype=np.int64)
    return np.asarray(rows, dtype=np.int64)


def reduce(hist: np.ndarray, m: int) -> np.ndarray:
    """Canonical coordinates of one or many histograms (last axis has length ``m``)."""
    return np.asarray(hist, dtype=np.int64) @ reduction_matrix(m)


def lift(hist: np.ndarray, m: int, M: int) -> np.ndarray:
    """Re-express histograms over ``zeta_m`` as histograms over ``zeta_M`` (``m | M``)."""
    if M % m:
        raise ValueError(f"{m} does not divide {M}")
    hist = np.asarray(hist, dtype=np.int64)
    out = np.zeros(hist.shape[:-1] + (M,), dtype=np.int64)
    out[..., :: M // m] = hist
    return out


def conj(hist: np.ndarray, m: int) -> np.ndarray:
    hist = np.asarray(hist, dtype=np.int64)
    return hist[..., (-np.arange(m)) % m]


def cyclic_mul(a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    """Pointwise product of histogram arrays (cyclic convolution along the last axis)."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.int64)
    for i in np.flatnonzero(np.any(a.reshape(-1, m) != 0, axis=0)):
        out += a[..., i : i + 1] * np.roll(b, i, axis=-1)
    return out


def to_complex(hist: np.ndarray, m: int) -> np.ndarray:
    roots = np.exp(2j * np.pi * np.arange(m) / m)
    return np.asarray(hist, dtype=np.float64) @ roots


def common_modulus(*ms: int) -> int:
    out = 1
    for m in ms:
        out = out * m // math.gcd(out, m)
    return out
