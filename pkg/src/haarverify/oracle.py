"""Independent ground-truth computations used by the test suite and for
regenerating reference tables.

Everything here is computed by a route disjoint from the main library:
exact rational arithmetic (fractions / sympy) for wavelet integrals, and
high-precision arithmetic (mpmath) for reference solutions.  Results are
exact values or tight enclosures meant to out-rank the unit under test.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath
import numpy as np
import sympy as sp

from .interval import Interval
from .haar import index_to_jk

_MAX_INDEX = 1 << 10


def _check_index(i: int) -> None:
    if not 1 <= i <= _MAX_INDEX:
        raise ValueError(f"wavelet index {i} outside [1, {_MAX_INDEX}]")


def _pieces(i: int) -> tuple[Fraction, Fraction, Fraction, int]:
    """(left, mid, right, level) of wavelet i >= 2, exact rationals."""
    j, k = index_to_jk(i)
    m = 1 << j
    return Fraction(k, m), Fraction(2 * k + 1, 2 * m), Fraction(k + 1, m), j


def _wavelet_value(i: int, t: Fraction, amp: sp.Expr) -> sp.Expr:
    """psi_i(t) exactly (left-closed, right-open pieces; psi_i(1) = 0)."""
    if i == 1:
        return sp.Integer(1)
    left, mid, right, _ = _pieces(i)
    if left <= t < mid:
        return amp
    if mid <= t < right:
        return -amp
    return sp.Integer(0)


def _integral_value(i: int, t: Fraction) -> sp.Expr:
    """w_i(t) = integral of psi_i on [0, t], exact."""
    if i == 1:
        return sp.Rational(t.numerator, t.denominator)
    left, mid, right, j = _pieces(i)
    amp = sp.sqrt(2) ** j
    tr = sp.Rational(t.numerator, t.denominator)
    if t <= left or t >= right:
        return sp.Integer(0)
    if t <= mid:
        return amp * (tr - sp.Rational(left.numerator, left.denominator))
    return amp * (sp.Rational(right.numerator, right.denominator) - tr)


def _breakpoints(i: int) -> list[Fraction]:
    if i == 1:
        return [Fraction(0), Fraction(1)]
    left, mid, right, _ = _pieces(i)
    return [Fraction(0), left, mid, right, Fraction(1)]


def integral_P_entry(i: int, l: int) -> sp.Expr:
    """Exact value of the antiderivative-matrix entry: integral over [0,1]
    of psi_l(t) * w_i(t) dt, by closed-form piece summation.

    On each elementary interval psi_l is constant and w_i is linear, so the
    piece integral is value * length * (w_i(a) + w_i(b)) / 2.
    """
    _check_index(i)
    _check_index(l)
    cuts = sorted(set(_breakpoints(i)) | set(_breakpoints(l)))
    jl = 0 if l == 1 else index_to_jk(l)[0]
    amp_l = sp.Integer(1) if l == 1 else sp.sqrt(2) ** jl
    total = sp.Integer(0)
    for a, b in zip(cuts, cuts[1:]):
        midpt = (a + b) / 2
        v = _wavelet_value(l, midpt, amp_l)
        if v == 0:
            continue
        length = sp.Rational((b - a).numerator, (b - a).denominator)
        total += v * length * (_integral_value(i, a) + _integral_value(i, b)) / 2
    return sp.nsimplify(sp.expand(total))


def integral_Gamma_entry(i: int, l: int) -> sp.Expr:
    """Exact value of gamma entry: integral over [0,1] of psi_i(t)**2 psi_l(t) dt.

    psi_i**2 is the constant 2**j on supp(psi_i) (and 1 everywhere for i=1),
    so the integral reduces to that constant times the increment of w_l over
    the support.
    """
    _check_index(i)
    _check_index(l)
    if i == 1:
        lo, hi = Fraction(0), Fraction(1)
        const = sp.Integer(1)
    else:
        lo, _, hi, j = _pieces(i)
        const = sp.Integer(2) ** j
    return sp.expand(const * (_integral_value(l, hi) - _integral_value(l, lo)))


def exact_to_interval(x: sp.Expr) -> Interval:
    """Tight interval enclosure of an exact sympy value."""
    v = sp.nsimplify(x)
    f = float(v.evalf(40))
    lo = np.nextafter(f, -np.inf)
    hi = np.nextafter(f, np.inf)
    # exact dyadic rationals need no widening
    if v.is_rational and Fraction(int(sp.numer(v)), int(sp.denom(v))) == Fraction(f):
        return Interval.point(f)
    return Interval(lo, hi)


def quad_product_transform_reference(
    c: np.ndarray, d: np.ndarray, J_ref: int
) -> np.ndarray:
    """Haar coefficients (indices 1..2**(J_ref+1)) of the product of the
    antiderivatives of the series with coefficients c and d.

    The antiderivatives are piecewise linear on the dyadic grid of the
    finer of the inputs and J_ref; their product is piecewise quadratic, so
    Simpson's rule per cell is exact.  Accumulation is in extended
    precision (longdouble).
    """
    c = np.asarray(c, dtype=np.longdouble)
    d = np.asarray(d, dtype=np.longdouble)
    M_ref = 1 << (J_ref + 1)
    J_in = max(len(c), len(d), 2).bit_length() - 2
    J_fine = max(J_ref, J_in) + 1
    N = 1 << (J_fine + 1)
    grid = np.arange(N + 1, dtype=np.longdouble) / N

    def antideriv(coeffs: np.ndarray) -> np.ndarray:
        vals = np.zeros(N + 1, dtype=np.longdouble)
        for idx, ci in enumerate(coeffs, start=1):
            if ci == 0:
                continue
            if idx == 1:
                vals += ci * grid
                continue
            j, k = index_to_jk(idx)
            m = 1 << j
            amp = np.longdouble(2.0) ** (np.longdouble(j) / 2)
            left, mid, right = (
                np.longdouble(k) / m,
                (np.longdouble(k) + 0.5) / m,
                np.longdouble(k + 1) / m,
            )
            up = np.clip(grid, left, mid) - left
            down = right - np.clip(grid, mid, right)
            vals += ci * amp * (up - (mid - left) + down)
        return vals

    A = antideriv(c)
    B = antideriv(d)
    endp = A * B  # product at grid nodes
    # Simpson per cell needs cell midpoints; the product is quadratic on
    # each cell, and the midpoint of a linear function is the average of
    # its endpoints, so the product midpoint is the product of averages.
    midA = 0.5 * (A[:-1] + A[1:])
    midB = 0.5 * (B[:-1] + B[1:])
    cell_int = (endp[:-1] + 4.0 * midA * midB + endp[1:]) / (6.0 * N)
    # cumulative integral of the product at grid nodes
    F = np.concatenate(([np.longdouble(0.0)], np.cumsum(cell_int)))

    out = np.empty(M_ref, dtype=np.float64)
    out[0] = float(F[-1])
    for idx in range(2, M_ref + 1):
        j, k = index_to_jk(idx)
        m = 1 << j
        step = N // (2 * m)
        a = 2 * k * step
        b = a + step
        e = b + step
        amp = np.longdouble(2.0) ** (np.longdouble(j) / 2)
        out[idx - 1] = float(amp * (2.0 * F[b] - F[a] - F[e]))
    return out


def logistic_reference_coeffs(lam: float, u0: float, J_ref: int) -> np.ndarray:
    """Haar coefficients of the time derivative of the closed-form logistic
    solution u(t) = u0 e^{lam t} / (1 - u0 + u0 e^{lam t}).

    The i-th coefficient is the integral of u'(t) psi_i(t), which telescopes
    to values of u at the dyadic piece endpoints; those are evaluated with
    50-digit mpmath arithmetic.
    """
    M = 1 << (J_ref + 1)
    with mpmath.workdps(50):
        lam_m = mpmath.mpf(repr(lam))
        u0_m = mpmath.mpf(repr(u0))

        def u(t: mpmath.mpf) -> mpmath.mpf:
            if lam_m == 0 or u0_m == 0:
                return u0_m
            e = mpmath.e ** (lam_m * t)
            return u0_m * e / (1 - u0_m + u0_m * e)

        out = np.empty(M, dtype=np.float64)
        out[0] = float(u(mpmath.mpf(1)) - u0_m)
        for idx in range(2, M + 1):
            j, k = index_to_jk(idx)
            m = 1 << j
            amp = mpmath.sqrt(2) ** j
            a = mpmath.mpf(k) / m
            b = (mpmath.mpf(k) + mpmath.mpf(1) / 2) / m
            e = mpmath.mpf(k + 1) / m
            out[idx - 1] = float(amp * (2 * u(b) - u(a) - u(e)))
    return out


def emit_reference_csv(path, rows, header) -> None:
    """Write oracle reference rows as CSV with 17 significant digits."""
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(
                [f"{v:.17g}" if isinstance(v, float) else v for v in row]
            )
