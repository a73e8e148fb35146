"""Operational matrices: recursions vs integral oracles, product transforms,
tail factors, and the on-disk cache."""

import math

import numpy as np
import pytest

from haarverify.haar import collocation_points, eval_wavelet, haar_matrix_float
from haarverify.interval import Interval, IntervalArray, vec_norm2_upper
from haarverify.opmat import (
    antiderivative_row_norms,
    antiderivative_sup,
    build_opmats,
    dump_opmats,
    get_opmats,
    load_opmats,
    mixed_bound_K1,
    mixed_bound_K2,
    generic_product_tail_factor,
    grid_step_matrices,
    linear_tail_factor,
    product_tail_operator_factor,
    projection_tail_operator_factor,
    quad_tail_factor,
    quad_transform_finite,
    quad_transform_float,
    quad_transform_projection,
    tail_norm_from_cell_derivatives,
)
from haarverify.oracle import (
    exact_to_interval,
    integral_Gamma_entry,
    integral_P_entry,
    quad_product_transform_reference,
)


@pytest.mark.parametrize("J", [0, 1, 2])
def test_recursions_match_integral_oracle_entrywise(J):
    ops = build_opmats(J)
    M = ops.M
    for i in range(1, M + 1):
        for l in range(1, M + 1):
            p_exact = exact_to_interval(integral_P_entry(i, l))
            g_exact = exact_to_interval(integral_Gamma_entry(i, l))
            assert ops.P[i - 1, l - 1].lo <= p_exact.hi and p_exact.lo <= ops.P[i - 1, l - 1].hi
            assert ops.Gamma[i - 1, l - 1].lo <= g_exact.hi and g_exact.lo <= ops.Gamma[i - 1, l - 1].hi


@pytest.mark.parametrize("J", [1, 2, 3])
def test_sampled_square_identity(J):
    # transpose of the Haar matrix against the coupling recursion recovers
    # the squared wavelet values at the collocation points
    ops = build_opmats(J)
    M = ops.M
    prod = (ops.H.T @ ops.Omega).mid()
    t = collocation_points(J)
    for i in range(M):
        for l in range(M):
            expected = 0.0 if l == 0 else eval_wavelet(l + 1, t[i]).mid() ** 2
            assert abs(prod[i, l] - expected) < 1e-10


def test_known_corner_entries(ops2):
    # integral of the ramp against itself over [0,1] is 1/2 at every level
    assert ops2.P[0, 0].contains(0.5)
    assert build_opmats(0).P[0, 0].contains(0.5)


def test_projection_identity_transform(ops3, rng):
    # float and interval product transforms agree on the finite part
    M = ops3.M
    c = rng.standard_normal(M)
    d = rng.standard_normal(M)
    fin = quad_transform_finite(ops3, IntervalArray.exact(c), IntervalArray.exact(d))
    flo = quad_transform_float(ops3, c, d)
    assert np.abs(fin.mid() - flo).max() < 1e-12


@pytest.mark.parametrize("J", [2, 3])
def test_exact_projection_matches_oracle(J, rng):
    ops = build_opmats(J)
    M = ops.M
    c = rng.standard_normal(M)
    d = rng.standard_normal(M)
    proj = quad_transform_projection(ops, IntervalArray.exact(c), IntervalArray.exact(d))
    ref = quad_product_transform_reference(c, d, J_ref=J + 7)[:M]
    assert np.abs(proj.mid() - ref).max() < 1e-12
    assert proj.encloses_array(ref)


@pytest.mark.parametrize("J", [2, 3])
def test_dropped_tail_respects_apriori_factor(J, rng):
    ops = build_opmats(J)
    M = ops.M
    for _ in range(10):
        c = rng.standard_normal(M)
        d = rng.standard_normal(M)
        fin = quad_transform_finite(ops, IntervalArray.exact(c), IntervalArray.exact(d))
        proj = quad_transform_projection(ops, IntervalArray.exact(c), IntervalArray.exact(d))
        gap = np.linalg.norm(proj.mid() - fin.mid())
        bound = quad_tail_factor(J).hi * np.linalg.norm(c) * np.linalg.norm(d)
        assert gap <= bound


def test_antiderivative_sup_encloses_true_max(ops3, rng):
    M = ops3.M
    H = haar_matrix_float(3)
    for _ in range(10):
        c = rng.standard_normal(M)
        s = H.T @ c
        grid = np.concatenate([[0.0], np.cumsum(s) / M])
        true_max = np.abs(grid).max()
        got = antiderivative_sup(ops3, IntervalArray.exact(c))
        assert got.hi >= true_max - 1e-14
        assert got.hi <= true_max + 1e-10


def test_row_norms_dominate_finite_rows(ops3):
    # each bound includes the finite row norm plus a strictly positive tail
    rn = antiderivative_row_norms(ops3)
    finite = np.linalg.norm(ops3.P.mid(), axis=1)
    assert np.all(rn.hi >= finite)
    tail = 1.0 / (3.0 * 2.0 ** (2 * ops3.J + 2))
    assert np.all(rn.hi**2 >= finite**2 + tail - 1e-12)


def _true_product_tail(c, d, J, levels_beyond=3):
    """Coefficients of W_c * W_d past index M, via the high-precision
    reference transform at J + levels_beyond."""
    M = 2 ** (J + 1)
    coeffs = quad_product_transform_reference(c, d, J_ref=J + levels_beyond)
    return np.linalg.norm(coeffs[M:])


@pytest.mark.parametrize("J", [2, 3, 4])
def test_cell_derivative_tail_bound_encloses_true_product_tail(J, rng):
    """The per-cell quadratic tail formula must dominate the measured tail
    of random products (the first dropped level is captured exactly)."""
    ops = build_opmats(J)
    M = ops.M
    H = haar_matrix_float(J)
    ll, lm, lr = grid_step_matrices(M)
    for _ in range(10):
        c = rng.standard_normal(M)
        d = rng.standard_normal(M)
        sc = IntervalArray.exact(H.T @ c)
        sd = IntervalArray.exact(H.T @ d)
        # derivative of W_c W_d on cell q: s_c(q) W_d(t) + s_d(q) W_c(t)
        def deriv(lmat):
            return sc * (lmat @ sd) + sd * (lmat @ sc)

        fm = deriv(lm)
        q1 = vec_norm2_upper(fm)
        q1 = q1 * q1
        hi = np.maximum(deriv(ll).abs_upper(), deriv(lr).abs_upper())
        sup_vec = IntervalArray(np.zeros_like(hi), hi)
        qs = vec_norm2_upper(sup_vec)
        qs = qs * qs
        bound = tail_norm_from_cell_derivatives(J, q1, qs)
        true_tail = _true_product_tail(c, d, J)
        assert true_tail <= bound.hi * (1 + 1e-9)
        # the formula is exact at the first dropped level, so it cannot be
        # grossly conservative either
        assert bound.hi <= 4.0 * true_tail + 1e-15


@pytest.mark.parametrize("J", [2, 3])
def test_product_tail_operator_factor_dominates_measured_norm(J, rng):
    ops = build_opmats(J)
    M = ops.M
    factor = product_tail_operator_factor(ops, IntervalArray.exact(rng.standard_normal(M)))
    assert factor.hi > 0.0
    c = rng.standard_normal(M)
    fc = product_tail_operator_factor(ops, IntervalArray.exact(c)).hi
    for _ in range(20):
        y = rng.standard_normal(M)
        y /= np.linalg.norm(y)
        assert _true_product_tail(c, y, J) <= fc * (1 + 1e-9)


@pytest.mark.parametrize("J", [2, 3])
def test_generic_product_tail_factor_dominates_random_pairs(J, rng):
    cap = generic_product_tail_factor(J).hi
    for _ in range(20):
        c = rng.standard_normal(2 ** (J + 1))
        d = rng.standard_normal(2 ** (J + 1))
        tail = _true_product_tail(c, d, J)
        assert tail <= cap * np.linalg.norm(c) * np.linalg.norm(d) * (1 + 1e-9)


@pytest.mark.parametrize("J", [2, 4])
def test_linear_and_projection_tail_factors(J, rng):
    ops = build_opmats(J)
    fine = build_opmats(J + 3)
    M = ops.M
    lin = linear_tail_factor(J).hi
    op = projection_tail_operator_factor(J).hi
    assert lin <= op * (1 + 1e-12)  # finite block is one part of the operator
    PT_fine = fine.P.mid().T
    for _ in range(50):
        c = rng.standard_normal(M)
        padded = np.concatenate([c, np.zeros(fine.M - M)])
        tail = np.linalg.norm((PT_fine @ padded)[M:])
        assert tail <= lin * np.linalg.norm(c) * (1 + 1e-9)


def test_mixed_bounds_positive_and_monotone_in_gram(ops3):
    A = IntervalArray.exact(np.eye(ops3.M))
    k1_loose = mixed_bound_K1(ops3, A, gram_iterations=0)
    k1_tight = mixed_bound_K1(ops3, A, gram_iterations=3)
    k2 = mixed_bound_K2(ops3, A, gram_iterations=2)
    assert 0.0 < k1_tight.hi <= k1_loose.hi * (1 + 1e-9)
    assert k2.hi > 0.0


def test_cache_roundtrip(tmp_path):
    ops = build_opmats(2)
    path = tmp_path / "ops2.npz"
    dump_opmats(ops, path)
    back = load_opmats(2, path)
    assert back is not None
    for name in ("H", "P", "Omega", "Gamma"):
        a, b = getattr(ops, name), getattr(back, name)
        assert np.array_equal(a.lo, b.lo) and np.array_equal(a.hi, b.hi)
    assert load_opmats(3, path) is None  # level mismatch is rejected


def test_get_opmats_uses_env_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("HAARVERIFY_CACHE_DIR", str(tmp_path))
    first = get_opmats(1, use_cache=True)
    assert any(tmp_path.iterdir())
    second = get_opmats(1, use_cache=True)
    assert np.array_equal(first.P.lo, second.P.lo)
