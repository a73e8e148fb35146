"""Haar wavelet family on [0,1]: evaluation, integrals, Haar matrices,
and the discrete forward/inverse transforms.

Index conventions: the one-index form i >= 1 maps to the two-index form
(j, k) through i = 2**j + k + 1 with 0 <= k < 2**j; i = 1 is the scaling
function.  Wavelet pieces are left-closed/right-open; their integrals
(triangular functions) use closed endpoints.  At t = 1 we take
psi_i(1) := 0 for i >= 2 and phi(1) := 1, which keeps the collocation
transforms exact (collocation points never hit t = 1).
"""

from __future__ import annotations

import math

import numpy as np

from .interval import Interval, IntervalArray, two_pow_half

MAX_LEVEL = 12  # size guard: M = 2**(J+1) <= 8192


class ResolutionTooLarge(ValueError):
    """Raised when a requested resolution level exceeds the memory guard."""


def index_to_jk(i: int) -> tuple[int, int]:
    """Convert one-index i >= 2 to (j, k) with i = 2**j + k + 1."""
    if i < 2:
        raise ValueError("index 1 is the scaling function; no (j, k) form")
    j = (i - 1).bit_length() - 1
    k = i - (1 << j) - 1
    return j, k


def jk_to_index(j: int, k: int) -> int:
    if not 0 <= k < (1 << j):
        raise ValueError(f"k={k} out of range for level j={j}")
    return (1 << j) + k + 1


def _check_t(t: float) -> float:
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t={t} outside [0, 1]")
    return t


def eval_wavelet(i: int, t: float) -> Interval:
    """psi_i(t) as a (usually exact) interval."""
    t = _check_t(t)
    if i == 1:
        return Interval.point(1.0)
    j, k = index_to_jk(i)
    m = 1 << j
    left = k / m
    mid = (k + 0.5) / m
    right = (k + 1) / m
    amp = two_pow_half(j)
    if left <= t < mid:
        return amp
    if mid <= t < right:
        return -amp
    return Interval.point(0.0)


def eval_integral(i: int, t: float) -> Interval:
    """w_i(t) = integral of psi_i from 0 to t (triangular function)."""
    t = _check_t(t)
    if i == 1:
        return Interval.point(t)
    j, k = index_to_jk(i)
    m = 1 << j
    left = k / m
    mid = (k + 0.5) / m
    right = (k + 1) / m
    amp = two_pow_half(j)
    ti = Interval.point(t)
    if left <= t <= mid:
        return amp * (ti - left)
    if mid <= t <= right:
        return amp * (Interval.point(right) - ti)
    return Interval.point(0.0)


def build_haar_matrix(J: int) -> IntervalArray:
    """Haar matrix H_M with (H_M)_{p,q} = psi_p(t_q), t_q = (q-0.5)/M.

    Built by the doubling recursion
        H_1 = [1],   H_2m = [[H_m kron (1, 1)], [sqrt(m) * I_m kron (1, -1)]]
    which evaluates each wavelet exactly on the midpoint grid.
    """
    if not 0 <= J <= MAX_LEVEL:
        raise ResolutionTooLarge(f"J={J} outside [0, {MAX_LEVEL}]")
    H = IntervalArray.exact(np.array([[1.0]]))
    m = 1
    for j in range(J + 1):
        amp = two_pow_half(j)  # sqrt(m), m = 2**j
        top_lo = np.repeat(H.lo, 2, axis=1)
        top_hi = np.repeat(H.hi, 2, axis=1)
        eye = np.eye(m)
        pat = np.kron(eye, np.array([1.0, -1.0]))
        bot_lo = np.minimum(amp.lo * pat, amp.hi * pat)
        bot_hi = np.maximum(amp.lo * pat, amp.hi * pat)
        H = IntervalArray(
            np.vstack([top_lo, bot_lo]), np.vstack([top_hi, bot_hi])
        )
        m *= 2
    return H


def haar_matrix_float(J: int) -> np.ndarray:
    """Midpoint (approximate) Haar matrix for the floating-point solver path."""
    return build_haar_matrix(J).mid()


def forward_transform(samples: np.ndarray) -> np.ndarray:
    """Haar coefficients of midpoint samples: c = (1/M) H_M @ samples."""
    samples = np.asarray(samples, dtype=np.float64)
    M = samples.shape[0]
    if M < 2 or M & (M - 1):
        raise ValueError(f"sample length {M} is not a power of two >= 2")
    J = M.bit_length() - 2
    H = haar_matrix_float(J)
    return (H @ samples) / M


def inverse_transform(coeffs: np.ndarray) -> np.ndarray:
    """Midpoint samples from Haar coefficients: samples = H_M^T @ c."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    M = coeffs.shape[0]
    if M < 2 or M & (M - 1):
        raise ValueError(f"coefficient length {M} is not a power of two >= 2")
    J = M.bit_length() - 2
    H = haar_matrix_float(J)
    return H.T @ coeffs


def collocation_points(J: int) -> np.ndarray:
    M = 1 << (J + 1)
    return (np.arange(1, M + 1) - 0.5) / M


def integral_values_float(J: int, t: np.ndarray) -> np.ndarray:
    """Matrix W with W[i-1, q] = w_i(t_q) (midpoint floats), i = 1..M.

    Vectorized over t; used by solution reconstruction and plotting.
    """
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0.0) or np.any(t > 1.0):
        raise ValueError("reconstruction grid outside [0, 1]")
    M = 1 << (J + 1)
    W = np.empty((M, t.shape[0]))
    W[0] = t
    for i in range(2, M + 1):
        j, k = index_to_jk(i)
        m = 1 << j
        amp = 2.0 ** (j / 2.0)
        left, mid, right = k / m, (k + 0.5) / m, (k + 1) / m
        up = np.clip(t, left, mid) - left
        down = right - np.clip(t, mid, right)
        W[i - 1] = amp * (up - (mid - left) + down)
    return W
