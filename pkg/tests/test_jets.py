"""Truncated bivariate jet arithmetic against analytic oracles."""

import math
import random

import numpy as np
import pytest

from legsurf.errors import OrderMismatchError, SingularJetError, UsageError
from legsurf.jets import (
    Jet2,
    jet_cos,
    jet_divide,
    jet_exp,
    jet_mat,
    jet_mat_identity,
    jet_mat_mul,
    jet_mat_solve,
    jet_partial,
    jet_sin,
)


def _rand_jet(rng, order, diag_shift=0.0):
    c = [[0.0] * (order + 1) for _ in range(order + 1)]
    for i in range(order + 1):
        for j in range(order + 1 - i):
            c[i][j] = rng.uniform(-1, 1)
    c[0][0] += diag_shift
    return Jet2(order, c)


def _sin_series(x0, order):
    # Taylor coefficients of sin at x0: derivative cycle sin, cos, -sin, -cos
    cycle = [math.sin(x0), math.cos(x0), -math.sin(x0), -math.cos(x0)]
    return [cycle[k % 4] / math.factorial(k) for k in range(order + 1)]


def _cos_series(x0, order):
    cycle = [math.cos(x0), -math.sin(x0), -math.cos(x0), math.sin(x0)]
    return [cycle[k % 4] / math.factorial(k) for k in range(order + 1)]


def test_product_jet_matches_separable_taylor():
    # f(u, v) = sin(u) cos(v) has coefficients sin_i(u0) * cos_j(v0)
    order = 5
    u0, v0 = 0.3, 0.7
    u = Jet2.coordinate(u0, 0, order)
    v = Jet2.coordinate(v0, 1, order)
    f = jet_sin(u) * jet_cos(v)
    su = _sin_series(u0, order)
    cv = _cos_series(v0, order)
    for i in range(order + 1):
        for j in range(order + 1 - i):
            assert f.coefficient(i, j) == pytest.approx(su[i] * cv[j], abs=1e-12)


def test_exp_of_coordinate():
    order = 6
    x0 = -0.4
    x = Jet2.coordinate(x0, 0, order)
    e = jet_exp(x)
    for i in range(order + 1):
        assert e.coefficient(i, 0) == pytest.approx(
            math.exp(x0) / math.factorial(i), rel=1e-13
        )


def test_partial_derivative_leibniz():
    rng = random.Random(2)
    order = 4
    a = _rand_jet(rng, order)
    b = _rand_jet(rng, order)
    lhs = jet_partial(a * b, 0)
    rhs = jet_partial(a, 0) * b.truncate(order - 1) + a.truncate(order - 1) * jet_partial(b, 0)
    assert (lhs - rhs).max_abs() < 1e-12


def test_partial_of_order_zero_raises():
    with pytest.raises(UsageError):
        jet_partial(Jet2.constant(1.0, 0), 0)


def test_division_inverts_product():
    rng = random.Random(9)
    order = 5
    a = _rand_jet(rng, order)
    b = _rand_jet(rng, order)
    if abs(b.const) < 0.1:
        b = b + 1.0
    q = jet_divide(a, b)
    assert (q * b - a).max_abs() < 1e-10


def test_division_by_singular_jet_raises():
    order = 3
    a = Jet2.constant(1.0, order)
    b = Jet2.coordinate(0.0, 0, order)  # zero constant term
    with pytest.raises(SingularJetError):
        jet_divide(a, b)


def test_order_mismatch_raises():
    with pytest.raises(OrderMismatchError):
        Jet2.constant(1.0, 3) + Jet2.constant(1.0, 4)


def test_pow_matches_products():
    x = Jet2.coordinate(0.5, 0, 4) + Jet2.coordinate(0.25, 1, 4)
    assert ((x**3) - x * x * x).max_abs() < 1e-13


def test_truncate_drops_high_terms():
    x = Jet2.coordinate(1.0, 0, 5)
    t = (x * x * x).truncate(2)
    assert t.order == 2
    assert t.coefficient(2, 0) == pytest.approx(3.0)  # (1 + du)^3 terms


def test_mat_solve_inverts():
    rng = random.Random(4)
    order = 3
    A = jet_mat([[_rand_jet(rng, order, 3.0 if r == c else 0.0) for c in range(3)]
                 for r in range(3)])
    B = jet_mat([[_rand_jet(rng, order) for _ in range(2)] for _ in range(3)])
    X = jet_mat_solve(A, B)
    AX = jet_mat_mul(A, X)
    worst = max((AX[r][c] - B[r][c]).max_abs() for r in range(3) for c in range(2))
    assert worst < 1e-10


def test_mat_solve_singular_raises():
    order = 2
    one = Jet2.constant(1.0, order)
    A = jet_mat([[one, one], [one, one]])
    B = jet_mat([[one], [one]])
    with pytest.raises(SingularJetError):
        jet_mat_solve(A, B)


def test_mat_identity_neutral():
    order = 3
    rng = random.Random(8)
    A = jet_mat([[_rand_jet(rng, order) for _ in range(3)] for _ in range(3)])
    I = jet_mat_identity(3, order)
    AI = jet_mat_mul(A, I)
    assert max((AI[r][c] - A[r][c]).max_abs() for r in range(3) for c in range(3)) == 0


def test_complex_coefficients_supported():
    x = Jet2.coordinate(1j, 0, 3)
    sq = x * x
    assert sq.const == pytest.approx(-1 + 0j)
    assert sq.coefficient(1, 0) == pytest.approx(2j)
    assert isinstance(np.asarray(sq.c), np.ndarray)
