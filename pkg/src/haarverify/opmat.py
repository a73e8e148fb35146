"""Operational matrices for products and antiderivatives of truncated
Haar series, plus the rigorous tail-bound constants used by the verifier.

All matrices are built by exact doubling recursions and stored as interval
enclosures.  For a truncation level J the common size is M = 2**(J+1):

- ``P``      integration matrix: if u has Haar coefficients c, the Haar
             coefficients of its antiderivative are P.T @ c.
- ``Omega``  product helper (upper-triangular-like): captures the part of
             a product of two antiderivatives carried by strictly coarser
             scales.
- ``Gamma``  product helper for the same-scale (diagonal) part.

The finite part of the Haar coefficients of a product of two
antiderivatives (with coefficient vectors c and d) is

    (Omega.T @ P.T @ c) * (P.T @ d) + (Omega.T @ P.T @ d) * (P.T @ c)
        + Gamma.T @ ((P.T @ c) * (P.T @ d))

with a dropped tail bounded in l2 by
sqrt(2) * |c| * |d| / ((4 - sqrt(2)) * 2**(3J/2 + 3)).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .interval import (
    SQRT2,
    Interval,
    IntervalArray,
    mat_norm2_upper,
    two_pow_half,
)
from .haar import MAX_LEVEL, ResolutionTooLarge

_CACHE_VERSION = 2
_CACHE_ENV = "HAARVERIFY_CACHE_DIR"


@dataclass(frozen=True)
class OpMatrixSet:
    """Interval enclosures of H, P, Omega, Gamma at level J (size M = 2**(J+1))."""

    J: int
    H: IntervalArray
    P: IntervalArray
    Omega: IntervalArray
    Gamma: IntervalArray

    @property
    def M(self) -> int:
        return 1 << (self.J + 1)


def build_opmats(J: int) -> OpMatrixSet:
    """Build all operational matrices at level J by the doubling recursions.

        H_2m  = [[H_m kron (1,1)], [sqrt(m) I_m kron (1,-1)]]
        P_2m  = [[P_m, -H_m / (4 m^{3/2})], [H_m.T / (4 m^{3/2}), 0]]
        Om_2m = [[Om_m, H_m], [0, 0]]
        Ga_2m = [[Ga_m, 0], [H_m.T, 0]]
    """
    if not 0 <= J <= MAX_LEVEL:
        raise ResolutionTooLarge(f"J={J} outside [0, {MAX_LEVEL}]")
    H = IntervalArray.exact(np.array([[1.0]]))
    P = IntervalArray.exact(np.array([[0.5]]))
    Om = IntervalArray.exact(np.array([[0.0]]))
    Ga = IntervalArray.exact(np.array([[1.0]]))
    m = 1
    for j in range(J + 1):
        Z = IntervalArray.zeros((m, m))
        # 1 / (4 m^{3/2}) = 2**(-(3j+4)/2)
        f = two_pow_half(-(3 * j + 4))
        Hf = H * f
        P = IntervalArray.from_blocks([[P, -Hf], [Hf.T, Z]])
        Om = IntervalArray.from_blocks([[Om, H], [Z, Z]])
        Ga = IntervalArray.from_blocks([[Ga, Z], [H.T, Z]])
        amp = two_pow_half(j)  # sqrt(m)
        pat = np.kron(np.eye(m), np.array([1.0, -1.0]))
        bot = IntervalArray(
            np.minimum(amp.lo * pat, amp.hi * pat),
            np.maximum(amp.lo * pat, amp.hi * pat),
        )
        H = IntervalArray(
            np.vstack([np.repeat(H.lo, 2, axis=1), bot.lo]),
            np.vstack([np.repeat(H.hi, 2, axis=1), bot.hi]),
        )
        m *= 2
    return OpMatrixSet(J=J, H=H, P=P, Omega=Om, Gamma=Ga)


def quad_transform_finite(
    ops: OpMatrixSet, c: IntervalArray, d: IntervalArray
) -> IntervalArray:
    """Finite part of the product-of-antiderivatives coefficient transform."""
    a = ops.P.T @ c
    b = ops.P.T @ d
    return (ops.Omega.T @ a) * b + (ops.Omega.T @ b) * a + ops.Gamma.T @ (a * b)


def grid_step_matrices(M: int) -> tuple[IntervalArray, IntervalArray, IntervalArray]:
    """Maps from cell step values to antiderivative values on the grid.

    For a piecewise-constant function with value s_q on collocation cell q,
    the antiderivative W is piecewise linear; these three exact (dyadic)
    matrices map the step vector s to the values of W at the left edge,
    midpoint and right edge of every cell.
    """
    inv_m = 1.0 / M  # exact dyadic
    lower = np.tril(np.full((M, M), inv_m), k=-1)
    l_left = IntervalArray.exact(lower)
    l_mid = IntervalArray.exact(lower + np.eye(M) * (inv_m / 2.0))
    l_right = IntervalArray.exact(lower + np.eye(M) * inv_m)
    return l_left, l_mid, l_right


def quad_transform_projection(
    ops: OpMatrixSet, c: IntervalArray, d: IntervalArray
) -> IntervalArray:
    """Exact projection of the product transform for truncated inputs.

    For coefficient vectors supported on the first M entries, both
    antiderivative series are piecewise linear with breakpoints on the
    collocation grid, so their product is piecewise quadratic on each of the
    M cells.  Per-cell Simpson quadrature is then exact, and summing cells
    against the sampled wavelet values recovers every coefficient of the
    product up to index M with no truncation error (only outward rounding).

    This equals quad_transform_finite plus the full dropped-tail
    contribution; use it wherever a vector (rather than an a-priori norm
    bound) is needed.
    """
    M = ops.M
    s_c = ops.H.T @ c
    s_d = ops.H.T @ d
    # endpoint/midpoint values of the two piecewise-linear antiderivatives
    l_left, l_mid, l_right = grid_step_matrices(M)
    g_left = (l_left @ s_c) * (l_left @ s_d)
    g_mid = (l_mid @ s_c) * (l_mid @ s_d)
    g_right = (l_right @ s_c) * (l_right @ s_d)
    four = Interval.point(4.0)
    scale = Interval.point(1.0 / M) / Interval.point(6.0)
    cell_integrals = (g_left + g_mid * four + g_right) * scale
    return ops.H @ cell_integrals


def antiderivative_sup(ops: OpMatrixSet, c: IntervalArray) -> Interval:
    """Enclosure of sup |W(t)| where W is the antiderivative of the step
    series with coefficients c.

    W is piecewise linear with breakpoints on the collocation grid, so its
    absolute maximum is attained at a grid point; the grid values are the
    scaled cumulative sums of the step values.
    """
    M = ops.M
    samples = ops.H.T @ c
    lower = np.tril(np.full((M, M), 1.0 / M))
    grid_values = IntervalArray.exact(lower) @ samples
    out = Interval.point(0.0)
    for k in range(M):
        out = out.max_with(abs(grid_values[k]))
    return out


def quad_tail_factor(J: int) -> Interval:
    """Upper bound on the finite-block gap between quad_transform_finite
    and quad_transform_projection (the part of the first M product
    coefficients carried by intermediate scales that the closed-form
    finite transform drops), per unit |c| * |d|:

        sqrt(2) / ((4 - sqrt(2)) * 2**(3J/2 + 3))

    This does not bound the coefficients beyond index M; use
    tail_norm_from_cell_derivatives or generic_product_tail_factor for
    those."""
    denom = (Interval.point(4.0) - SQRT2) * two_pow_half(3 * J + 6)
    return SQRT2 / denom


def quad_transform_float(
    ops_or_J, c: np.ndarray, d: np.ndarray
) -> np.ndarray:
    """Floating-point product transform for the solver path.

    Uses the identity that sampling the product at the collocation points
    equals the pointwise product of samples: coeffs = (1/M) H (H'P'c . H'P'd).
    """
    ops = ops_or_J if isinstance(ops_or_J, OpMatrixSet) else build_opmats(ops_or_J)
    H = ops.H.mid()
    PT = ops.P.mid().T
    M = H.shape[0]
    return H @ ((H.T @ (PT @ c)) * (H.T @ (PT @ d))) / M


# ---------------------------------------------------------------------------
# Tail-bound constants.
# ---------------------------------------------------------------------------


def linear_tail_factor(J: int) -> Interval:
    """l2 norm of the dropped-tail coefficients of an antiderivative, per
    unit coefficient norm: (1/sqrt(3)) / 2**(J+2).

    Every wavelet finer than level J is supported inside a single
    collocation cell, where the antiderivative of a truncated series is
    linear; summing the exact per-level inner products gives this factor.
    """
    from .interval import SQRT3

    return Interval.point(1.0) / (SQRT3 * Interval.point(float(2 ** (J + 2))))


def tail_norm_from_cell_derivatives(J: int, q1: Interval, qs: Interval) -> Interval:
    """l2 norm of the tail coefficients of a function that is polynomial of
    degree <= 2 on every collocation cell.

    A wavelet at level j > J is supported inside one cell, where the
    function f is quadratic, so its coefficient equals
    -2**(-3j/2)/4 * f'(support midpoint) exactly.  With

        q1 >= sum over cells of f'(cell midpoint)**2   (level J+1 exactly)
        qs >= sum over cells of sup of f'**2 per cell  (levels J+2 and up)

    the geometric sum over levels yields

        tail**2 <= 2**-(3J+7) * (q1 + qs/3).
    """
    scale = Interval.point(2.0 ** -(3 * J + 7))
    third = Interval.point(1.0) / Interval.point(3.0)
    inner = scale * (q1 + qs * third)
    # outward rounding can push the lower endpoint of a squared quantity
    # marginally below zero; clamp before the square root
    return Interval(max(inner.lo, 0.0), inner.hi).sqrt()


def projection_tail_operator_factor(J: int) -> Interval:
    """Operator norm of (tail projection) o (antiderivative map) on the
    whole sequence space: sqrt(7)/6 / 2**(J+1).

    Finite-block inputs contribute (1/sqrt(3))/2**(J+2) (piecewise-linear
    antiderivative, exact per-cell formula); tail inputs contribute at most
    2**-(J+1)/3 (per-level L2 norms of the primitive triangles summed by
    Cauchy-Schwarz); the two blocks combine by the root of the squares.
    """
    from .interval import SQRT7

    return SQRT7 / (Interval.point(6.0) * Interval.point(float(2 ** (J + 1))))


def w_sup_factor() -> Interval:
    """sup |W| <= sqrt(3/2) * |y| for the antiderivative W of any l2
    coefficient sequence y (Cauchy-Schwarz over the per-level suprema)."""
    return (Interval.point(3.0) / Interval.point(2.0)).sqrt()


def w_tail_l2_factor(J: int) -> Interval:
    """L2 norm of the antiderivative of a tail-supported sequence, per unit
    coefficient norm: 2**-(J+1) / 3."""
    return Interval.point(1.0) / Interval.point(float(3 * 2 ** (J + 1)))


def w_tail_sup_factor(J: int) -> Interval:
    """sup of the antiderivative of a tail-supported sequence, per unit
    coefficient norm: 2**-(J/2+1)."""
    return Interval.point(1.0) / two_pow_half(J + 2)


def product_tail_operator_factor(
    ops: OpMatrixSet, c: IntervalArray, gram_iterations: int = 2
) -> Interval:
    """Operator norm bound for  y -> tail coefficients of W_c * W_y.

    For finite-block y the product is piecewise quadratic per cell with
    derivative  s_c(q) * W_y(t) + s_y(q) * W_c(t); collecting the cell
    edge/midpoint evaluations into matrices G and applying
    tail_norm_from_cell_derivatives gives an exact-structure bound with
    spectral norms (the sampling map H.T/sqrt(M) is orthogonal, so the
    factor sqrt(M) is exact).  Tail-block y contributes at most
    sup|W_c| * w_tail_l2_factor; the blocks combine by root of squares.
    """
    M = ops.M
    J = ops.J
    s = ops.H.T @ c
    l_left, l_mid, l_right = grid_step_matrices(M)
    w_left = l_left @ s
    w_mid = l_mid @ s
    w_right = l_right @ s

    def _g(lmat: IntervalArray, w: IntervalArray) -> Interval:
        G = lmat.scale_rows(s) + IntervalArray(np.diag(w.lo), np.diag(w.hi))
        return mat_norm2_upper(G, gram_iterations=gram_iterations)

    nl = _g(l_left, w_left)
    nm = _g(l_mid, w_mid)
    nr = _g(l_right, w_right)
    rootM = Interval.point(float(M)).sqrt()
    fin = tail_norm_from_cell_derivatives(
        J, (rootM * nm) * (rootM * nm), (rootM * nl) * (rootM * nl) + (rootM * nr) * (rootM * nr)
    )
    vmax = antiderivative_sup(ops, c)
    tail = vmax * w_tail_l2_factor(J)
    total = fin * fin + tail * tail
    return Interval(max(total.lo, 0.0), total.hi).sqrt()


def generic_product_tail_factor(J: int) -> Interval:
    """Uniform bound for  |tail coefficients of W_x * W_y| <= factor |x||y|
    over arbitrary l2 sequences x and y.

    Splitting both arguments at the truncation level gives a 2x2 block
    pattern: finite/finite via the per-cell quadratic structure
    (1/(sqrt(2) 2**(J+1))), mixed via sup-times-L2 (1/(sqrt(6) 2**(J+1))),
    tail/tail via w_tail_sup_factor * w_tail_l2_factor; the blocks combine
    through the spectral norm of the symmetric 2x2 factor matrix.
    """
    half = Interval.point(0.5)
    pw = Interval.point(float(2 ** (J + 1)))
    bmm = Interval.point(1.0) / (SQRT2 * pw)
    ba = Interval.point(1.0) / (Interval.point(6.0).sqrt() * pw)
    bcc = w_tail_sup_factor(J) * w_tail_l2_factor(J)
    mid = (bmm + bcc) * half
    gap = (bmm - bcc) * half
    return mid + (gap * gap + ba * ba).sqrt()


def projection_factors(J: int) -> tuple[Interval, Interval]:
    """Norm factors for the antiderivative map P.T acting across the split:

        finite block:   (1/sqrt(3)) * sqrt(4 - 2**-(2J+2))
        tail block:     (1/sqrt(3)) / 2**(J+1)
    """
    from .interval import SQRT3

    inner = Interval.point(4.0) - Interval.point(1.0) / Interval.point(
        float(2 ** (2 * J + 2))
    )
    fin = inner.sqrt() / SQRT3
    tail = Interval.point(1.0) / (SQRT3 * Interval.point(float(2 ** (J + 1))))
    return fin, tail


def antiderivative_row_norms(ops: OpMatrixSet) -> IntervalArray:
    """Column vector of l2 norms of the rows of P.T (full, untruncated rows).

    Row i of the untruncated P.T consists of the finite row of P_M.T plus the
    tail entries; squared closed forms (with t the one-index of the row):
        row 1:                 1/3 + 1/(3 * 2**(2J+2))
        row i, i = 2**j+k+1:   1/(3 * 2**(2j)) * (1 - 2**(2j) / 2**(2J+2))
                               + 1/(3 * 2**(2J+2))
    The tail contribution past level J collapses to 1/(3 * 2**(2J+2)) for
    every row, and the finite part is computed rigorously from P itself.
    """
    from .interval import _U, _sum_upper

    PT = ops.P.T
    M = ops.M
    sq = PT * PT
    n = M
    tail = Interval.point(1.0) / Interval.point(float(3 * 2 ** (2 * ops.J + 2)))
    hi_sum = np.array([_sum_upper(sq.hi[i]) for i in range(M)])
    lo_sum = np.maximum(sq.lo, 0.0).sum(axis=1) * (1.0 - (n + 1) * _U)
    lo = np.empty(M)
    hi = np.empty(M)
    for i in range(M):
        r = (Interval(min(lo_sum[i], hi_sum[i]), hi_sum[i]) + tail).sqrt()
        lo[i], hi[i] = r.lo, r.hi
    return IntervalArray(lo, hi)


def mixed_bound_K1(
    ops: OpMatrixSet, A: IntervalArray, gram_iterations: int = 0
) -> Interval:
    """Operator-norm bound K1 for A composed with the Omega-type product block
    acting on the tail of a perturbation."""
    J = ops.J
    PT = ops.P.T
    OmTPT = ops.Omega.T @ PT
    rn = antiderivative_row_norms(ops)
    n2 = lambda X: mat_norm2_upper(X, gram_iterations=gram_iterations)
    t1 = n2((A.scale_cols(rn)) @ OmTPT)
    t2 = n2(A @ OmTPT) / Interval.point(float(2 ** (J + 2)))
    one_p = Interval.point(1.0) + SQRT2
    t3 = one_p * n2(A @ PT) / two_pow_half(J + 3)
    t4 = one_p * n2(A) / two_pow_half(3 * J + 7)
    return t1 + t2 + t3 + t4


def mixed_bound_K2(
    ops: OpMatrixSet, A: IntervalArray, gram_iterations: int = 0
) -> Interval:
    """Operator-norm bound K2 for A composed with the Gamma-type product block
    acting on the tail of a perturbation."""
    J = ops.J
    PT = ops.P.T
    AGa = A @ ops.Gamma.T
    rn = antiderivative_row_norms(ops)
    n2 = lambda X: mat_norm2_upper(X, gram_iterations=gram_iterations)
    t1 = n2((AGa.scale_cols(rn)) @ PT)
    t2 = n2(AGa @ PT) / Interval.point(float(2 ** (J + 1)))
    t3 = n2(AGa) / Interval.point(float(2 ** (2 * J + 4)))
    t4 = (
        SQRT2
        * n2(A)
        / ((Interval.point(4.0) - SQRT2) * two_pow_half(3 * J + 8))
    )
    return t1 + t2 + t3 + t4


# ---------------------------------------------------------------------------
# On-disk cache.
# ---------------------------------------------------------------------------


def cache_dir() -> Path:
    d = os.environ.get(_CACHE_ENV)
    if d:
        return Path(d)
    return Path.home() / ".cache" / "haarverify"


def _cache_path(J: int) -> Path:
    return cache_dir() / f"opmat-v{_CACHE_VERSION}-J{J}.npz"


def dump_opmats(ops: OpMatrixSet, path: Path | None = None) -> Path:
    path = path or _cache_path(ops.J)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        np.savez_compressed(
            fh,
            version=np.int64(_CACHE_VERSION),
            J=np.int64(ops.J),
            H_lo=ops.H.lo, H_hi=ops.H.hi,
            P_lo=ops.P.lo, P_hi=ops.P.hi,
            Om_lo=ops.Omega.lo, Om_hi=ops.Omega.hi,
            Ga_lo=ops.Gamma.lo, Ga_hi=ops.Gamma.hi,
        )
    tmp.replace(path)
    return path


def load_opmats(J: int, path: Path | None = None) -> OpMatrixSet | None:
    path = path or _cache_path(J)
    if not path.exists():
        return None
    try:
        with np.load(path) as z:
            if int(z["version"]) != _CACHE_VERSION or int(z["J"]) != J:
                return None
            return OpMatrixSet(
                J=J,
                H=IntervalArray(z["H_lo"], z["H_hi"]),
                P=IntervalArray(z["P_lo"], z["P_hi"]),
                Omega=IntervalArray(z["Om_lo"], z["Om_hi"]),
                Gamma=IntervalArray(z["Ga_lo"], z["Ga_hi"]),
            )
    except (OSError, KeyError, ValueError):
        return None


def get_opmats(J: int, use_cache: bool = True) -> OpMatrixSet:
    """Load matrices from the cache when available, else build and store."""
    if use_cache:
        ops = load_opmats(J)
        if ops is not None:
            return ops
    ops = build_opmats(J)
    if use_cache:
        try:
            dump_opmats(ops)
        except OSError:
            pass
    return ops
