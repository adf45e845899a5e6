"""Symplectic pairing, Lagrangian tests, frames, and the double fibration."""

import random

import numpy as np
import pytest

from legsurf.errors import DegenerateSpanError, UsageError
from legsurf.symplectic import (
    SpAlgebraElement,
    SpFrame,
    fibration_projections,
    is_lagrangian,
    planes_equal,
    plucker3,
    sp_residual,
    symplectic_pairing,
)

RNG = random.Random(17)


def _rand_vec():
    return np.array([complex(RNG.uniform(-1, 1), RNG.uniform(-1, 1))
                     for _ in range(6)])


def test_pairing_antisymmetric_bilinear():
    for _ in range(30):
        x, y, z = _rand_vec(), _rand_vec(), _rand_vec()
        s = complex(RNG.uniform(-2, 2), RNG.uniform(-2, 2))
        assert symplectic_pairing(x, y) == pytest.approx(-symplectic_pairing(y, x))
        assert symplectic_pairing(s * x + z, y) == pytest.approx(
            s * symplectic_pairing(x, y) + symplectic_pairing(z, y)
        )
        assert symplectic_pairing(x, x) == pytest.approx(0.0)


def test_pairing_on_standard_basis():
    e = np.eye(6)
    # pairing couples e_i with f_i = column 3 + i
    for i in range(3):
        assert symplectic_pairing(e[i], e[3 + i]) == pytest.approx(1.0)
        assert symplectic_pairing(e[3 + i], e[i]) == pytest.approx(-1.0)
    assert symplectic_pairing(e[0], e[1]) == pytest.approx(0.0)
    assert symplectic_pairing(e[0], e[4]) == pytest.approx(0.0)


def test_identity_frame_is_symplectic():
    f = SpFrame(np.eye(6))
    assert f.residual() < 1e-15
    assert f.e.shape == (6, 3) and f.f.shape == (6, 3)


def test_algebra_exponential_lands_in_group():
    rng = random.Random(23)
    omega = np.array([[rng.uniform(-0.3, 0.3) for _ in range(3)] for _ in range(3)])
    eta = np.array([[rng.uniform(-0.3, 0.3) for _ in range(3)] for _ in range(3)])
    eta = (eta + eta.T) / 2
    theta = np.array([[rng.uniform(-0.3, 0.3) for _ in range(3)] for _ in range(3)])
    theta = (theta + theta.T) / 2
    el = SpAlgebraElement.from_blocks(omega, eta, theta)
    assert el.residual() < 1e-12
    g = el.exp(terms=30)
    assert sp_residual(g) < 1e-12


def test_algebra_rejects_asymmetric_blocks():
    bad = np.array([[0, 1, 0], [0, 0, 0], [0, 0, 0]], dtype=float)
    with pytest.raises(UsageError):
        SpAlgebraElement.from_blocks(np.zeros((3, 3)), bad, np.zeros((3, 3)))


def test_lagrangian_spans():
    e = np.eye(6)
    assert is_lagrangian([e[0], e[1], e[2]])
    assert is_lagrangian([e[3], e[4], e[5]])
    assert is_lagrangian([e[0], e[4], e[5]])
    assert not is_lagrangian([e[0], e[1], e[3]])
    assert is_lagrangian([e[0]])
    assert is_lagrangian([e[0], e[1]])


def test_lagrangian_rejects_degenerate_and_oversized():
    e = np.eye(6)
    with pytest.raises(DegenerateSpanError):
        is_lagrangian([e[0], e[0]])
    with pytest.raises(UsageError):
        is_lagrangian([e[0], e[1], e[2], e[4]])


def test_plucker_basis_invariance():
    cols = np.array([_rand_vec() for _ in range(3)]).T
    change = np.array([[1, 2, 0], [0, 1, -1], [3, 0, 1]], dtype=complex)
    other = cols @ change
    assert planes_equal(cols, other)
    different = cols.copy()
    different[:, 0] = _rand_vec()
    assert not planes_equal(cols, different)
    # determinant of the change of basis scales every minor together
    pa, pb = plucker3(cols), plucker3(other)
    det = np.linalg.det(change)
    assert np.allclose(pb, det * pa)


def test_fibration_projections_normalized():
    m = np.eye(6)
    point, plane = fibration_projections(SpFrame(m))
    assert abs(np.max(np.abs(plane)) - 1.0) < 1e-14
    # the plane leg depends only on the span of the first three columns
    m2 = m.copy()
    m2[:, 1] = m[:, 1] * 2 + m[:, 0]
    _, plane2 = fibration_projections(SpFrame(m2))
    assert np.allclose(plane, plane2)
    assert point is not None
