"""Exact polynomial layers: Poly1, BinaryForm, HomogPoly3, Poly2."""

import random
from fractions import Fraction

import pytest

from legsurf.errors import MultipleFactorError, UsageError
from legsurf.polynomials import (
    BinaryForm,
    HomogPoly3,
    Poly1,
    Poly2,
    binaryform_gcd,
    check_squarefree,
    poly1_gcd,
)
from legsurf.rationals import GaussianRational


# === Poly1 ===


def test_poly1_gcd_of_products():
    # (x - 1)(x - 2) and (x - 1)(x + 3) share exactly (x - 1)
    a = Poly1([2, -3, 1])
    b = Poly1([-3, 2, 1])
    g = poly1_gcd(a, b)
    # monic normalization: g ~ x - 1
    assert g(1) == 0
    assert g(2) != 0 and g(-3) != 0


def test_poly1_divmod_exact():
    a = Poly1([2, -3, 1])
    q, r = a.divmod(Poly1([-1, 1]))
    assert not r
    assert q(5) * (5 - 1) == a(5)


# === BinaryForm ===


def test_binaryform_product_degree_and_values():
    rng = random.Random(5)
    for _ in range(25):
        f = BinaryForm(2, {j: rng.randint(-4, 4) for j in range(3)})
        g = BinaryForm(3, {j: rng.randint(-4, 4) for j in range(4)})
        if not f or not g:
            continue
        h = f * g
        assert h.m == 5
        x, y = rng.randint(-5, 5), rng.randint(-5, 5)
        assert h(x, y) == f(x, y) * g(x, y)


def test_binaryform_scalar_mul():
    f = BinaryForm(2, {2: 1, 0: -3})
    assert (2 * f)(1, 2) == 2 * f(1, 2)
    assert (f * Fraction(1, 3))(2, 1) == f(2, 1) / 3


def test_binaryform_gcd():
    # x^2 y and x y^2 share x y
    f = BinaryForm(3, {2: 1})
    g = BinaryForm(3, {1: 1})
    h = binaryform_gcd([f, g])
    assert h.m == 2
    assert h(1, 0) == 0 and h(0, 1) == 0 and h(1, 1) != 0


def test_check_squarefree():
    # (x - y)^2 (x + y) has a double factor
    sq = BinaryForm(1, {1: 1, 0: -1}) ** 2 * BinaryForm(1, {1: 1, 0: 1})
    with pytest.raises(MultipleFactorError):
        check_squarefree(sq)
    ok = BinaryForm(1, {1: 1, 0: -1}) * BinaryForm(1, {1: 1, 0: 1})
    check_squarefree(ok)


def test_binaryform_split():
    # x^2 * (x - y) * y^3
    f = BinaryForm(2, {2: 1}) * BinaryForm(1, {1: 1, 0: -1}) * BinaryForm(3, {0: 1})
    a, b, core = f.split()
    assert (a, b) == (2, 3)
    # the bare factor (x - y) dehomogenizes to a polynomial with root 1
    assert core(1) == 0 and core(2) != 0


# === HomogPoly3 ===


def test_homog_arithmetic_and_evaluation():
    rng = random.Random(7)
    x = HomogPoly3.monomial(1, 1, 0, 0)
    y = HomogPoly3.monomial(1, 0, 1, 0)
    z = HomogPoly3.monomial(1, 0, 0, 1)
    p = x * y - 2 * (z * z)
    for _ in range(20):
        a, b, c = (Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(3))
        assert p.evaluate(a, b, c) == a * b - 2 * c * c


def test_homog_degree_mismatch_rejected():
    x = HomogPoly3.monomial(1, 1, 0, 0)
    with pytest.raises(UsageError):
        HomogPoly3(2, {(1, 0, 0): 1})
    with pytest.raises(UsageError):
        x + x * x


def test_homog_homogeneity():
    p = HomogPoly3(3, {(3, 0, 0): 1, (1, 1, 1): -2, (0, 2, 1): Fraction(1, 2)})
    s = Fraction(3, 2)
    assert p.evaluate(s * 1, s * 2, s * -1) == s**3 * p.evaluate(1, 2, -1)


def test_homog_partial_derivative():
    # d/dx (x^2 y) = 2 x y
    p = HomogPoly3.monomial(1, 2, 1, 0)
    dp = p.partial("x")
    assert dp.evaluate(3, 5, 0) == 2 * 3 * 5
    assert not p.partial("z")


def test_homog_zero_identities():
    zero = HomogPoly3.zero()
    p = HomogPoly3.monomial(2, 1, 1, 1)
    assert not zero
    assert p + zero == p
    assert not p - p


# === Poly2 (slope/z arcs) ===


def test_poly2_valuation_and_coefficient():
    lam = Poly2.slope()
    z = Poly2.zvar()
    p = z * z * (lam + Poly2.const(2)) + z * z * z * lam
    assert p.z_valuation() == 2
    c2 = p.z_coefficient(2)
    assert c2(Fraction(5)) == 7  # lam + 2 at lam = 5


def test_poly2_ring_identities():
    rng = random.Random(3)
    lam = Poly2.slope()
    z = Poly2.zvar()
    a = lam * z + Poly2.const(1)
    b = z * z - lam
    # distributivity through evaluation of z-coefficients
    s = (a + b) * a - (a * a + b * a)
    assert all(not s.z_coefficient(j) for j in range(6))
    assert rng is not None


def test_de_moivre_exactness_small():
    # (i x + y)^2 = (y^2 - x^2) + 2 x y i, read through BinaryForm algebra
    base = BinaryForm(1, {1: GaussianRational.i(), 0: 1})
    sq = base * base
    assert sq.c[0] == 1  # y^2
    assert sq.c[2] == -1  # x^2
    assert sq.c[1] == GaussianRational(0, 2)
