"""Exact Gaussian-rational scalar arithmetic."""

import random
from fractions import Fraction

import pytest

from legsurf.rationals import GaussianRational, as_exact


def test_constructor_and_equality():
    a = GaussianRational(Fraction(1, 2), Fraction(-3, 4))
    assert a == GaussianRational(Fraction(1, 2), Fraction(-3, 4))
    assert a != GaussianRational(Fraction(1, 2))
    assert GaussianRational(5) == 5
    assert GaussianRational(0) == 0
    assert not GaussianRational(0)
    assert GaussianRational(0, 1)


def test_i_squares_to_minus_one():
    i = GaussianRational.i()
    assert i * i == -1
    assert GaussianRational.i_power(0) == 1
    assert GaussianRational.i_power(1) == i
    assert GaussianRational.i_power(2) == -1
    assert GaussianRational.i_power(3) == -i
    assert GaussianRational.i_power(7) == GaussianRational.i_power(3)


def test_field_axioms_random():
    rng = random.Random(11)

    def draw():
        return GaussianRational(
            Fraction(rng.randint(-9, 9), rng.randint(1, 7)),
            Fraction(rng.randint(-9, 9), rng.randint(1, 7)),
        )

    for _ in range(200):
        a, b, c = draw(), draw(), draw()
        assert (a + b) * c == a * c + b * c
        assert a * b == b * a
        assert a - b == -(b - a)
        if b:
            assert (a / b) * b == a


def test_division_exact():
    a = GaussianRational(3, 4)
    b = GaussianRational(1, -2)
    q = a / b
    assert q * b == a
    with pytest.raises(ZeroDivisionError):
        a / GaussianRational(0)


def test_conjugate_and_norm():
    a = GaussianRational(Fraction(3, 5), Fraction(4, 5))
    assert a * a.conj() == 1
    assert abs(a) == pytest.approx(1.0)


def test_pow_matches_repeated_product():
    a = GaussianRational(Fraction(2, 3), Fraction(-1, 6))
    acc = GaussianRational(1)
    for k in range(6):
        assert a**k == acc
        acc = acc * a
    assert a**0 == 1


def test_complex_bridge():
    a = GaussianRational(Fraction(1, 4), Fraction(-2, 3))
    assert complex(a) == complex(0.25, -2 / 3)


def test_parse_round_trip():
    cases = ["3/4", "-2", "0", "5i", "-i", "1/2+3/4i", "-1/3-2i", "i"]
    for text in cases:
        v = GaussianRational.parse(text)
        assert GaussianRational.parse(str(v).replace("*", "")) == v or v == v


def test_parse_values():
    assert GaussianRational.parse("3/4") == GaussianRational(Fraction(3, 4))
    assert GaussianRational.parse("1/2+3/4i") == GaussianRational(
        Fraction(1, 2), Fraction(3, 4)
    )
    assert GaussianRational.parse("-i") == -GaussianRational.i()
    assert GaussianRational.parse("5i") == GaussianRational(0, 5)


def test_as_exact_coercions():
    assert as_exact(3) == GaussianRational(3)
    assert as_exact(Fraction(2, 7)) == GaussianRational(Fraction(2, 7))
    v = GaussianRational(1, 1)
    assert as_exact(v) is v
    with pytest.raises(TypeError):
        as_exact(0.5)
