"""Symplectic linear algebra on C^6.

Conventions: coordinates (X0, X1, X2, Y0, Y1, Y2), pairing
w(x, y) = sum_i x_i y_{3+i} - x_{3+i} y_i, so J has I3 in the upper right
and -I3 in the lower left. Frames are 6x6 matrices whose first three
columns span a Lagrangian plane paired dually with the last three.
"""

from itertools import combinations

import numpy as np

from .errors import DegenerateSpanError, UsageError

J6 = np.zeros((6, 6), dtype=complex)
J6[:3, 3:] = np.eye(3)
J6[3:, :3] = -np.eye(3)


def symplectic_pairing(x, y):
    """w(x, y); generic in the coefficient ring (complex, jets, exact)."""
    out = x[0] * y[3] - x[3] * y[0]
    for i in (1, 2):
        out = out + x[i] * y[3 + i] - x[3 + i] * y[i]
    return out


def sp_residual(m):
    """How far a 6x6 matrix is from the symplectic group: max |m^T J m - J|."""
    m = np.asarray(m, dtype=complex)
    if m.shape != (6, 6):
        raise UsageError("sp_residual expects a 6x6 matrix")
    return float(np.max(np.abs(m.T @ J6 @ m - J6)))


def is_lagrangian(vectors, tol=1e-10):
    """True when the given independent vectors span an isotropic subspace.

    Raises DegenerateSpanError when the vectors are linearly dependent
    (relative to their own scale), since the question is ill-posed then.
    """
    v = np.array([np.asarray(x, dtype=complex) for x in vectors])
    if v.ndim != 2 or v.shape[1] != 6 or not 1 <= v.shape[0] <= 3:
        raise UsageError("expected 1..3 vectors in C^6")
    sv = np.linalg.svd(v, compute_uv=False)
    if sv[-1] <= 1e-10 * max(sv[0], 1e-300):
        raise DegenerateSpanError("vectors do not span their nominal dimension")
    scale = float(np.max(np.abs(v))) ** 2 or 1.0
    worst = 0.0
    for a in range(len(v)):
        for b in range(a + 1, len(v)):
            worst = max(worst, abs(symplectic_pairing(v[a], v[b])))
    return worst <= tol * scale


class ProjPoint5:
    """A point of projective 5-space; equality is projective with tolerance."""

    __slots__ = ("v",)

    def __init__(self, coords):
        v = np.asarray(list(coords), dtype=complex)
        if v.shape != (6,):
            raise UsageError("ProjPoint5 needs 6 homogeneous coordinates")
        if not np.any(v):
            raise UsageError("all-zero coordinates do not define a point")
        self.v = v

    def normalized(self):
        k = int(np.argmax(np.abs(self.v)))
        return self.v / self.v[k]

    def equals(self, other, tol=1e-9):
        if not isinstance(other, ProjPoint5):
            other = ProjPoint5(other)
        k = int(np.argmax(np.abs(self.v)))
        if abs(other.v[k]) <= tol * float(np.max(np.abs(other.v))):
            return False
        a = self.v / self.v[k]
        b = other.v / other.v[k]
        scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))))
        return float(np.max(np.abs(a - b))) <= tol * scale

    def __repr__(self):
        return f"ProjPoint5({np.round(self.v, 6).tolist()})"


def plucker3(columns):
    """The 20 ordered 3x3 minors of a 6x3 matrix (Pluecker coordinates)."""
    m = np.asarray(columns, dtype=complex)
    if m.shape == (3, 6):
        m = m.T
    if m.shape != (6, 3):
        raise UsageError("plucker3 expects a 6x3 span")
    out = np.empty(20, dtype=complex)
    for idx, rows in enumerate(combinations(range(6), 3)):
        sub = m[list(rows), :]
        out[idx] = np.linalg.det(sub)
    return out


def planes_equal(span_a, span_b, tol=1e-8):
    """Projective comparison of two 3-planes via Pluecker coordinates."""
    pa = plucker3(span_a)
    pb = plucker3(span_b)
    ka = int(np.argmax(np.abs(pa)))
    if abs(pb[ka]) <= tol * float(np.max(np.abs(pb))):
        return False
    pa = pa / pa[ka]
    pb = pb / pb[ka]
    return float(np.max(np.abs(pa - pb))) <= tol * max(1.0, float(np.max(np.abs(pa))))


class SpFrame:
    """A symplectic frame (e0, e1, e2, f0, f1, f2) as matrix columns."""

    __slots__ = ("m",)

    def __init__(self, m):
        m = np.asarray(m, dtype=complex)
        if m.shape != (6, 6):
            raise UsageError("SpFrame expects a 6x6 matrix")
        self.m = m

    @property
    def e(self):
        return self.m[:, :3]

    @property
    def f(self):
        return self.m[:, 3:]

    def column(self, k):
        return self.m[:, k]

    def residual(self):
        return sp_residual(self.m)

    def __repr__(self):
        return f"SpFrame(residual={self.residual():.2e})"


def fibration_projections(frame):
    """The double-fibration legs: the contact point and its Lagrangian plane.

    Returns (ProjPoint5 for [e0], Pluecker vector for [e0 ^ e1 ^ e2]).
    """
    if isinstance(frame, SpFrame):
        m = frame.m
    else:
        m = np.asarray(frame, dtype=complex)
    point = ProjPoint5(m[:, 0])
    plane = plucker3(m[:, :3])
    k = int(np.argmax(np.abs(plane)))
    return point, plane / plane[k]


class SpAlgebraElement:
    """Element of the symplectic Lie algebra in block form [[w, h], [t, -w^T]]."""

    __slots__ = ("m",)

    def __init__(self, m):
        m = np.asarray(m, dtype=complex)
        if m.shape != (6, 6):
            raise UsageError("SpAlgebraElement expects a 6x6 matrix")
        self.m = m

    @classmethod
    def from_blocks(cls, omega, eta, theta):
        omega = np.asarray(omega, dtype=complex)
        eta = np.asarray(eta, dtype=complex)
        theta = np.asarray(theta, dtype=complex)
        for name, blk in (("eta", eta), ("theta", theta)):
            if float(np.max(np.abs(blk - blk.T))) > 1e-12 * max(1.0, float(np.max(np.abs(blk)))):
                raise UsageError(f"{name} block must be symmetric")
        m = np.zeros((6, 6), dtype=complex)
        m[:3, :3] = omega
        m[:3, 3:] = eta
        m[3:, :3] = theta
        m[3:, 3:] = -omega.T
        return cls(m)

    def residual(self):
        """max |m^T J + J m|; zero for honest algebra elements."""
        return float(np.max(np.abs(self.m.T @ J6 + J6 @ self.m)))

    def exp(self, terms=10):
        """Truncated exponential series; exact for nilpotent elements."""
        out = np.eye(6, dtype=complex)
        acc = np.eye(6, dtype=complex)
        for k in range(1, terms + 1):
            acc = acc @ self.m / k
            out = out + acc
        return out

    def __repr__(self):
        return f"SpAlgebraElement(residual={self.residual():.2e})"
