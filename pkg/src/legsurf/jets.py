"""Truncated two-variable jets over complex128.

A Jet2 of order n stores Taylor coefficients c[i, j] of du^i dv^j for
i + j <= n in a dense (n+1, n+1) array (the far triangle is kept at zero).
Binary operations insist on equal orders; mixing orders silently is the
classic source of wrong curvature values, so it is a hard error here.

Matrix-of-jets helpers (multiply, LU solve) live at the bottom; the frame
ladder is built on them.
"""

import math

import numpy as np

from .errors import OrderMismatchError, SingularJetError, UsageError

SINGULAR_TOL = 1e-12


def _mask(n):
    i, j = np.indices((n + 1, n + 1))
    return (i + j) <= n


class Jet2:
    __slots__ = ("order", "c")

    def __init__(self, order, coeffs=None):
        if order < 0:
            raise UsageError("jet order must be nonnegative")
        self.order = order
        if coeffs is None:
            self.c = np.zeros((order + 1, order + 1), dtype=complex)
        else:
            c = np.asarray(coeffs, dtype=complex)
            if c.shape != (order + 1, order + 1):
                raise UsageError("coefficient array shape does not match order")
            self.c = np.where(_mask(order), c, 0.0)

    # --- constructors ---------------------------------------------------

    @classmethod
    def constant(cls, value, order):
        out = cls(order)
        out.c[0, 0] = complex(value)
        return out

    @classmethod
    def coordinate(cls, value, axis, order):
        """The jet of the coordinate function u (axis 0) or v (axis 1)."""
        out = cls.constant(value, order)
        if order >= 1:
            if axis == 0:
                out.c[1, 0] = 1.0
            elif axis == 1:
                out.c[0, 1] = 1.0
            else:
                raise UsageError("axis must be 0 or 1")
        return out

    def copy(self):
        out = Jet2(self.order)
        out.c = self.c.copy()
        return out

    # --- basic queries ----------------------------------------------------

    @property
    def const(self):
        return self.c[0, 0]

    def coefficient(self, i, j):
        if i + j > self.order:
            raise UsageError("coefficient beyond truncation order")
        return self.c[i, j]

    def max_abs(self):
        return float(np.max(np.abs(self.c)))

    def truncate(self, order):
        if order > self.order:
            raise UsageError("cannot raise a jet's order by truncation")
        out = Jet2(order)
        out.c = np.where(_mask(order), self.c[: order + 1, : order + 1], 0.0)
        return out

    def _check(self, other):
        if not isinstance(other, Jet2):
            return None
        if other.order != self.order:
            raise OrderMismatchError(
                f"jet orders differ: {self.order} vs {other.order}"
            )
        return other

    # --- ring operations ----------------------------------------------

    def __add__(self, other):
        o = self._check(other)
        out = Jet2(self.order)
        if o is None:
            out.c = self.c.copy()
            out.c[0, 0] += complex(other)
        else:
            out.c = self.c + o.c
        return out

    __radd__ = __add__

    def __sub__(self, other):
        o = self._check(other)
        out = Jet2(self.order)
        if o is None:
            out.c = self.c.copy()
            out.c[0, 0] -= complex(other)
        else:
            out.c = self.c - o.c
        return out

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        out = Jet2(self.order)
        out.c = -self.c
        return out

    def __mul__(self, other):
        o = self._check(other)
        n = self.order
        out = Jet2(n)
        if o is None:
            out.c = self.c * complex(other)
            return out
        acc = out.c
        for i in range(n + 1):
            row = self.c[i]
            for j in range(n + 1 - i):
                a = row[j]
                if a != 0.0:
                    acc[i:, j:] += a * o.c[: n + 1 - i, : n + 1 - j]
        out.c = np.where(_mask(n), acc, 0.0)
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._check(other)
        if o is None:
            return self * (1.0 / complex(other))
        return jet_divide(self, o)

    def __rtruediv__(self, other):
        return Jet2.constant(other, self.order) / self

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise UsageError("jets support nonnegative integer powers only")
        out = Jet2.constant(1.0, self.order)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __repr__(self):
        return f"Jet2(order={self.order}, const={self.const:.6g})"


def jet_product(a, b):
    """Truncated product of two jets of equal order."""
    if not isinstance(a, Jet2) or not isinstance(b, Jet2):
        raise UsageError("jet_product expects two Jet2 operands")
    return a * b


def jet_partial(a, axis):
    """Formal partial derivative; drops the order by one."""
    if not isinstance(a, Jet2):
        raise UsageError("jet_partial expects a Jet2")
    if a.order == 0:
        raise UsageError("cannot differentiate an order-0 jet")
    n = a.order - 1
    out = Jet2(n)
    if axis == 0:
        k = np.arange(1, a.order + 1)
        out.c = a.c[1:, :-1] * k[:, None]
    elif axis == 1:
        k = np.arange(1, a.order + 1)
        out.c = a.c[:-1, 1:] * k[None, :]
    else:
        raise UsageError("axis must be 0 or 1")
    out.c = np.where(_mask(n), out.c, 0.0)
    return out


def jet_divide(a, b):
    """a / b by graded recursion; SingularJetError if b's constant term vanishes."""
    if a.order != b.order:
        raise OrderMismatchError("jet orders differ in division")
    n = a.order
    b00 = b.c[0, 0]
    if abs(b00) < SINGULAR_TOL:
        raise SingularJetError(f"divisor constant term {abs(b00):.2e} below {SINGULAR_TOL:.0e}")
    q = np.zeros((n + 1, n + 1), dtype=complex)
    for d in range(n + 1):
        for i in range(d + 1):
            j = d - i
            s = a.c[i, j]
            # entries (p, r) <= (i, j) other than (i, j) itself are already known
            for p in range(i + 1):
                for r in range(j + 1):
                    if (p, r) != (i, j):
                        s -= q[p, r] * b.c[i - p, j - r]
            q[i, j] = s / b00
    out = Jet2(n)
    out.c = q
    return out


def _nilpotent_series(p, coeffs):
    """sum coeffs[k] * p^k for a jet p with zero constant term."""
    out = Jet2.constant(coeffs[0], p.order)
    term = Jet2.constant(1.0, p.order)
    for k in range(1, len(coeffs)):
        term = term * p
        if coeffs[k]:
            out = out + term * coeffs[k]
        if term.max_abs() == 0.0:
            break
    return out


def jet_exp(a):
    a0 = a.const
    p = a - a0
    coeffs = [1.0 / math.factorial(k) for k in range(a.order + 1)]
    return _nilpotent_series(p, coeffs) * complex(np.exp(a0))


def jet_sin(a):
    a0 = a.const
    p = a - a0
    n = a.order
    cos_p = _nilpotent_series(p, [(-1) ** (k // 2) / math.factorial(k) if k % 2 == 0 else 0.0 for k in range(n + 1)])
    sin_p = _nilpotent_series(p, [(-1) ** ((k - 1) // 2) / math.factorial(k) if k % 2 == 1 else 0.0 for k in range(n + 1)])
    return cos_p * complex(np.sin(a0)) + sin_p * complex(np.cos(a0))


def jet_cos(a):
    a0 = a.const
    p = a - a0
    n = a.order
    cos_p = _nilpotent_series(p, [(-1) ** (k // 2) / math.factorial(k) if k % 2 == 0 else 0.0 for k in range(n + 1)])
    sin_p = _nilpotent_series(p, [(-1) ** ((k - 1) // 2) / math.factorial(k) if k % 2 == 1 else 0.0 for k in range(n + 1)])
    return cos_p * complex(np.cos(a0)) - sin_p * complex(np.sin(a0))


# =====================================================================
# matrices of jets
# =====================================================================


def jet_mat(rows):
    return [list(r) for r in rows]


def jet_mat_mul(A, B):
    n, m, p = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            s = A[i][0] * B[0][j]
            for k in range(1, m):
                s = s + A[i][k] * B[k][j]
            row.append(s)
        out.append(row)
    return out


def jet_mat_add(A, B):
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def jet_mat_scale(A, s):
    return [[a * s for a in row] for row in A]


def jet_mat_partial(A, axis):
    return [[jet_partial(a, axis) for a in row] for row in A]


def jet_mat_truncate(A, order):
    return [[a.truncate(order) for a in row] for row in A]


def jet_mat_transpose(A):
    return [list(col) for col in zip(*A)]


def jet_mat_const(A):
    return np.array([[a.const for a in row] for row in A])


def jet_mat_solve(A, B):
    """Solve A X = B for matrices of jets via LU with constant-term pivoting."""
    n = len(A)
    m = len(B[0])
    a = [row[:] for row in A]
    b = [row[:] for row in B]
    perm = list(range(n))
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col].const))
        if abs(a[piv][col].const) < SINGULAR_TOL:
            raise SingularJetError("jet matrix is singular at the base point")
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            b[col], b[piv] = b[piv], b[col]
            perm[col], perm[piv] = perm[piv], perm[col]
        for r in range(col + 1, n):
            if a[r][col].max_abs() == 0.0:
                continue
            f = a[r][col] / a[col][col]
            for c in range(col, n):
                a[r][c] = a[r][c] - f * a[col][c]
            for c in range(m):
                b[r][c] = b[r][c] - f * b[col][c]
    # back substitution
    x = [[None] * m for _ in range(n)]
    for i in range(n - 1, -1, -1):
        for c in range(m):
            s = b[i][c]
            for k in range(i + 1, n):
                s = s - a[i][k] * x[k][c]
            x[i][c] = s / a[i][i]
    return x


def jet_mat_identity(n, order):
    return [
        [Jet2.constant(1.0 if i == j else 0.0, order) for j in range(n)] for i in range(n)
    ]
