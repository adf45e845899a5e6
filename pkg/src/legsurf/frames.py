"""Adapted frames along a Legendrian surface chart, by jet arithmetic.

The pipeline starts from order-N jets of an affine lift x(u, v), completes
(x, x_u, x_v) to a symplectic frame, reads off the connection form phi from
dg = g phi, and then runs the reduction ladder:

  stage A  normalize the cubic block to the standard web shape,
  stage B  kill the traceless part of the rotation block,
  stage C  remove the diagonal cubic-block remainders from the eta block,
  stage D  balance the first eta column.

Each stage is a gauge move phi -> P^{-1}(phi P + dP) and costs one jet
order. After stage D the connection form has the reduced shape and the
named invariants (a1..a4, b1..b3, c1, c2) plus their covariant derivatives
fall out as coefficients in the (w1, w2) coframe basis.
"""

import itertools

import numpy as np

from .coframe import generic_system
from .errors import (
    DegenerateSecondFundamentalFormError,
    LegendrianResidualError,
    RankDeficientError,
    UsageError,
)
from .jets import (
    Jet2,
    jet_cos,
    jet_mat_add,
    jet_mat_mul,
    jet_mat_partial,
    jet_mat_solve,
    jet_mat_transpose,
    jet_mat_truncate,
    jet_partial,
    jet_sin,
)
from .symplectic import J6, SpFrame, symplectic_pairing

CHART_JET_ORDER = 8
LADDER_TOL = 1e-6

WEIGHT_A = -4.0 / 3.0
WEIGHT_B = -2.0
WEIGHT_C = -8.0 / 3.0


# =====================================================================
# charts
# =====================================================================


class SurfaceChart:
    """Base for charts: subclasses supply components_from_jets."""

    def components(self, u, v, order=CHART_JET_ORDER):
        xj = Jet2.coordinate(u, 0, order)
        yj = Jet2.coordinate(v, 1, order)
        return self.components_from_jets(xj, yj)

    def components_from_jets(self, xj, yj):
        raise NotImplementedError


class PolyChart(SurfaceChart):
    """Affine z = 1 slice of six homogeneous polynomial components.

    radicands scales the i-th symplectic pair (components i and 3+i) by
    sqrt(radicands[i]); surfaces built from quadratic extensions carry
    those factors outside their rational skeletons.
    """

    def __init__(self, polys, radicands=(1, 1, 1)):
        if len(polys) != 6:
            raise UsageError("a chart needs six components")
        self.polys = list(polys)
        self.scales = [complex(r) ** 0.5 for r in radicands] * 2

    def components_from_jets(self, xj, yj):
        one = Jet2.constant(1.0, xj.order)
        out = []
        for poly, s in zip(self.polys, self.scales):
            val = poly.evaluate(xj, yj, one)
            if not isinstance(val, Jet2):
                val = Jet2.constant(val, xj.order)
            out.append(val * s if s != 1.0 else val)
        return out


class TrigChart(SurfaceChart):
    """Components of the form scale * sin/cos(cu*u + cv*v + c0)."""

    def __init__(self, terms):
        if len(terms) != 6:
            raise UsageError("a chart needs six components")
        self.terms = list(terms)

    def components_from_jets(self, xj, yj):
        out = []
        for kind, cu, cv, scale in self.terms:
            arg = xj * cu + yj * cv
            if kind == "sin":
                val = jet_sin(arg)
            elif kind == "cos":
                val = jet_cos(arg)
            else:
                raise UsageError(f"unknown trig component kind {kind!r}")
            out.append(val * scale)
        return out


class TransformedChart(SurfaceChart):
    """A chart composed with a parameter change and/or a constant motion.

    reparam maps a pair of coordinate jets to the base chart's coordinate
    jets; motion is a constant 6x6 matrix applied to the components.
    """

    def __init__(self, base, motion=None, reparam=None):
        self.base = base
        self.motion = None if motion is None else np.asarray(motion, dtype=complex)
        self.reparam = reparam

    def components_from_jets(self, xj, yj):
        if self.reparam is not None:
            xj, yj = self.reparam(xj, yj)
        comps = self.base.components_from_jets(xj, yj)
        if self.motion is None:
            return comps
        out = []
        for i in range(6):
            acc = None
            for k in range(6):
                m = self.motion[i, k]
                if m == 0:
                    continue
                term = comps[k] * m
                acc = term if acc is None else acc + term
            out.append(acc if acc is not None else Jet2.constant(0.0, xj.order))
        return out


# =====================================================================
# frame completion
# =====================================================================


def _const_mat(m, order):
    return [[Jet2.constant(v, order) for v in row] for row in m]


def _col(mat, j):
    return [row[j] for row in mat]


def _jet_scale(mat):
    return max(max(e.max_abs() for e in row) for row in mat)


def initial_frame(chart, u, v, order=CHART_JET_ORDER, tol=1e-9):
    """Jets of the 0-adapted symplectic frame [x, x_u, x_v, f0, f1, f2]."""
    comps = chart.components(u, v, order)
    n = order - 1
    E = [
        [comps[i].truncate(n), jet_partial(comps[i], 0), jet_partial(comps[i], 1)]
        for i in range(6)
    ]

    ec = np.array([[e.const for e in row] for row in E])
    sv = np.linalg.svd(ec, compute_uv=False)
    if sv[-1] < 1e-9 * max(sv[0], 1.0):
        raise RankDeficientError(
            f"lift and first derivatives span rank < 3 at ({u}, {v})"
        )

    scale = max(_jet_scale(E), 1.0)
    worst = 0.0
    cols = [_col(E, k) for k in range(3)]
    for a, b in ((0, 1), (0, 2), (1, 2)):
        worst = max(worst, symplectic_pairing(cols[a], cols[b]).max_abs())
    if worst > tol * scale * scale:
        raise LegendrianResidualError(worst / (scale * scale), tol)

    # dual columns: pick the best-conditioned 3x3 minor of E^T J and invert it
    Jjets = _const_mat(J6, n)
    M = jet_mat_mul(jet_mat_transpose(E), Jjets)
    mc = np.array([[e.const for e in row] for row in M])
    best, best_cols = -1.0, None
    for trip in itertools.combinations(range(6), 3):
        d = abs(np.linalg.det(mc[:, trip]))
        if d > best:
            best, best_cols = d, trip
    M3 = [[M[i][j] for j in best_cols] for i in range(3)]
    F3 = jet_mat_solve(M3, _const_mat(np.eye(3), n))
    Fp = [[Jet2.constant(0.0, n) for _ in range(3)] for _ in range(6)]
    for k, r in enumerate(best_cols):
        Fp[r] = F3[k]

    # remove the pairings among the dual columns: F = F' + E (S/2)
    S = jet_mat_mul(jet_mat_mul(jet_mat_transpose(Fp), Jjets), Fp)
    F = jet_mat_add(Fp, jet_mat_mul(E, [[s * 0.5 for s in row] for row in S]))

    g = [E[i] + F[i] for i in range(6)]
    gram = jet_mat_add(
        jet_mat_mul(jet_mat_mul(jet_mat_transpose(g), Jjets), g),
        [[j * -1.0 for j in row] for row in Jjets],
    )
    gscale = max(_jet_scale(g), 1.0)
    assert _jet_scale(gram) <= LADDER_TOL * gscale**2, "frame completion lost symplecticity"
    return g


class PhiPair:
    """Connection-form coefficients along du (u) and dv (v), as jet matrices."""

    __slots__ = ("u", "v", "order")

    def __init__(self, mu, mv):
        self.u = mu
        self.v = mv
        self.order = mu[0][0].order

    def entry(self, i, j):
        return self.u[i][j], self.v[i][j]


def phi_from_frame(g):
    n = g[0][0].order
    gt = jet_mat_truncate(g, n - 1)
    phi_u = jet_mat_solve(gt, jet_mat_partial(g, 0))
    phi_v = jet_mat_solve(gt, jet_mat_partial(g, 1))
    return PhiPair(phi_u, phi_v)


# =====================================================================
# coefficients in the (w1, w2) coframe basis
# =====================================================================


class _OmegaBasis:
    """Cramer data for expressing pulled-back forms in (w1, w2)."""

    def __init__(self, phi):
        self.w1u = phi.u[1][0]
        self.w1v = phi.v[1][0]
        self.w2u = phi.u[2][0]
        self.w2v = phi.v[2][0]
        self.det = self.w1u * self.w2v - self.w1v * self.w2u

    def coeffs(self, xi_u, xi_v):
        c1 = (xi_u * self.w2v - xi_v * self.w2u) / self.det
        c2 = (self.w1u * xi_v - self.w1v * xi_u) / self.det
        return c1, c2

    def entry_coeffs(self, phi, i, j):
        return self.coeffs(phi.u[i][j], phi.v[i][j])

    def truncated(self, order):
        out = _OmegaBasis.__new__(_OmegaBasis)
        out.w1u = self.w1u.truncate(order)
        out.w1v = self.w1v.truncate(order)
        out.w2u = self.w2u.truncate(order)
        out.w2v = self.w2v.truncate(order)
        out.det = self.det.truncate(order)
        return out


# =====================================================================
# gauge moves
# =====================================================================


def _block_P(A, Btilde, order):
    """Assemble P = [[A, B], [0, A^{-T}]] as a 6x6 jet matrix."""
    ident = _const_mat(np.eye(3), order)
    AinvT = jet_mat_transpose(jet_mat_solve(A, ident))
    P = [[Jet2.constant(0.0, order) for _ in range(6)] for _ in range(6)]
    for i in range(3):
        for j in range(3):
            P[i][j] = A[i][j]
            P[i][3 + j] = Btilde[i][j]
            P[3 + i][3 + j] = AinvT[i][j]
    return P


def _gauge(phi, P, g=None):
    """phi -> P^{-1}(phi P + dP); also advances the frame when given."""
    n = phi.order
    Pn = jet_mat_truncate(P, n)
    Pm = jet_mat_truncate(P, n - 1)
    new = []
    for axis, mat in ((0, phi.u), (1, phi.v)):
        rhs = jet_mat_add(
            jet_mat_truncate(jet_mat_mul(mat, Pn), n - 1), jet_mat_partial(Pn, axis)
        )
        new.append(jet_mat_solve(Pm, rhs))
    g_new = None
    if g is not None:
        m = min(g[0][0].order, n)
        g_new = jet_mat_mul(jet_mat_truncate(g, m), jet_mat_truncate(P, m))
    return PhiPair(new[0], new[1]), g_new


# =====================================================================
# stage A: the cubic block
# =====================================================================


def _proj_distance(a, b):
    na = abs(a[0]) ** 2 + abs(a[1]) ** 2
    nb = abs(b[0]) ** 2 + abs(b[1]) ** 2
    return abs(a[0] * b[1] - a[1] * b[0]) / (na * nb) ** 0.5


def cubic_roots(coeffs, tol=1e-8):
    """The three projective zero directions of a binary cubic.

    coeffs = (k30, k21, k12, k03) for k30 z1^3 + k21 z1^2 z2 + ... Raises
    the degenerate-form error when the roots are not pairwise distinct.
    """
    k30, k21, k12, k03 = [complex(c) for c in coeffs]
    top = max(abs(k30), abs(k21), abs(k12), abs(k03))
    if top == 0.0:
        raise DegenerateSecondFundamentalFormError("cubic block vanishes")
    roots = []
    if abs(k30) >= abs(k03):
        for t in np.roots([k30, k21, k12, k03]):
            roots.append((complex(t), 1.0 + 0.0j))
        while len(roots) < 3:
            roots.append((1.0 + 0.0j, 0.0j))  # dropped leading coefficient
    else:
        for s in np.roots([k03, k12, k21, k30]):
            roots.append((1.0 + 0.0j, complex(s)))
        while len(roots) < 3:
            roots.append((0.0j, 1.0 + 0.0j))
    for a, b in itertools.combinations(roots, 2):
        if _proj_distance(a, b) < tol:
            raise DegenerateSecondFundamentalFormError(
                "cubic block has a repeated zero direction"
            )
    return roots


def _sort_roots(roots, hint=None):
    if hint is not None:
        best, best_perm = None, None
        for perm in itertools.permutations(range(3)):
            cost = sum(_proj_distance(roots[perm[k]], hint[k]) for k in range(3))
            if best is None or cost < best:
                best, best_perm = cost, perm
        return [roots[k] for k in best_perm]

    def key(r):
        if abs(r[1]) <= 1e-12 * abs(r[0]):
            return (1, 0.0, 0.0)
        t = r[0] / r[1]
        return (0, round(t.real, 9), round(t.imag, 9))

    return sorted(roots, key=key)


def _newton_root(cj, root):
    """Lift a constant cubic root to a jet root of the coefficient jets."""
    k30, k21, k12, k03 = cj
    if abs(root[1]) >= abs(root[0]):
        t = Jet2.constant(root[0] / root[1], k30.order)
        for _ in range(5):
            val = ((k30 * t + k21) * t + k12) * t + k03
            dval = (k30 * (3.0 * t) + 2.0 * k21) * t + k12
            t = t - val / dval
        return (t, Jet2.constant(1.0, k30.order))
    s = Jet2.constant(root[1] / root[0], k30.order)
    for _ in range(5):
        val = ((k03 * s + k12) * s + k21) * s + k30
        dval = (k03 * (3.0 * s) + 2.0 * k12) * s + k21
        s = s - val / dval
    return (Jet2.constant(1.0, k30.order), s)


def _theta_cubic(phi, basis):
    """Symmetrized cubic coefficients (k30, k21, k12, k03) as jets."""
    t111, t112 = basis.entry_coeffs(phi, 4, 1)
    t121, t122 = basis.entry_coeffs(phi, 4, 2)
    t211, t212 = basis.entry_coeffs(phi, 5, 1)
    t221, t222 = basis.entry_coeffs(phi, 5, 2)
    sym1 = (t121 + t211) * 0.5
    sym2 = (t122 + t212) * 0.5
    k30 = t111
    k21 = t112 + sym1 * 2.0
    k12 = sym2 * 2.0 + t221
    k03 = t222
    return (k30, k21, k12, k03)


def _compose_cubic(cj, A2):
    """Coefficients of C(A2 z) given cubic coefficient jets and a jet 2x2."""
    k30, k21, k12, k03 = cj
    a, b = A2[0]
    c, d = A2[1]

    def cub(p, q):
        return ((k30 * p + k21 * q) * p + k12 * q * q) * p + k03 * q * q * q

    n30 = cub(a, c)
    n03 = cub(b, d)
    n21 = (
        k30 * (3.0 * a * a * b)
        + k21 * (a * a * d + a * b * c * 2.0)
        + k12 * (a * c * d * 2.0 + b * c * c)
        + k03 * (3.0 * c * c * d)
    )
    n12 = (
        k30 * (3.0 * a * b * b)
        + k21 * (b * b * c + a * b * d * 2.0)
        + k12 * (b * c * d * 2.0 + a * d * d)
        + k03 * (3.0 * c * d * d)
    )
    return (n30, n21, n12, n03)


class NormalizedCubic:
    """A change of directions carrying a nondegenerate cubic to 3 z1 z2 (z1+z2)."""

    __slots__ = ("roots", "a2", "alpha", "alternatives")

    def __init__(self, roots, a2, alpha, alternatives):
        self.roots = roots
        self.a2 = a2
        self.alpha = alpha
        self.alternatives = alternatives

    def __repr__(self):
        return f"NormalizedCubic(alpha={self.alpha:.6g}, choices={len(self.alternatives)})"


def _const_normalization(coeffs, roots):
    """(A2, alpha) for a fixed root ordering, on plain complex numbers."""
    v1, v2, v3 = roots
    det = v1[0] * (-v2[1]) - (-v2[0]) * v1[1]
    x = (v3[0] * (-v2[1]) - (-v2[0]) * v3[1]) / det
    y = (v1[0] * v3[1] - v3[0] * v1[1]) / det
    a2 = np.array([[x * v1[0], y * v2[0]], [x * v1[1], y * v2[1]]], dtype=complex)
    k30, k21, k12, k03 = [complex(c) for c in coeffs]
    a, b = a2[0]
    c, d = a2[1]
    n21 = (
        k30 * (3.0 * a * a * b)
        + k21 * (a * a * d + 2.0 * a * b * c)
        + k12 * (2.0 * a * c * d + b * c * c)
        + k03 * (3.0 * c * c * d)
    )
    return a2, n21 / 3.0


def normalize_cubic(coeffs, hint=None):
    """All direction changes bringing a binary cubic to the standard web form.

    Returns the canonical choice (sorted roots) along with the full finite
    list of alternatives, one per ordering of the three zero directions.
    """
    roots = cubic_roots(coeffs)
    canonical = _sort_roots(roots, hint)
    alternatives = []
    for perm in itertools.permutations(range(3)):
        ordering = [roots[k] for k in perm]
        a2, alpha = _const_normalization(coeffs, ordering)
        alternatives.append((a2, alpha))
    a2, alpha = _const_normalization(coeffs, canonical)
    return NormalizedCubic(tuple(canonical), a2, alpha, alternatives)


def _stage_a(phi, g, root_hint=None, tol=1e-8):
    basis = _OmegaBasis(phi)
    cj = _theta_cubic(phi, basis)
    n = phi.order
    roots = cubic_roots([c.const for c in cj], tol)
    roots = _sort_roots(roots, root_hint)
    jroots = [_newton_root(cj, r) for r in roots]

    v1, v2, v3 = jroots
    # x v1 - y v2 = v3
    num_x = v3[0] * v2[1] - v3[1] * v2[0]
    num_y = v3[0] * v1[1] - v3[1] * v1[0]
    det = v1[0] * v2[1] - v1[1] * v2[0]
    x = num_x / det
    y = num_y / det
    a2 = [[x * v1[0], y * v2[0]], [x * v1[1], y * v2[1]]]
    composed = _compose_cubic(cj, a2)
    alpha = composed[1] / 3.0

    zero = Jet2.constant(0.0, n)
    A = [
        [alpha, zero, zero],
        [zero, a2[0][0], a2[0][1]],
        [zero, a2[1][0], a2[1][1]],
    ]
    B = [[zero] * 3 for _ in range(3)]
    P = _block_P(A, B, n)
    phi2, g2 = _gauge(phi, P, g)

    basis2 = _OmegaBasis(phi2)
    for (i, j), want in (
        ((4, 1), (0.0, 1.0)),
        ((4, 2), (1.0, 1.0)),
        ((5, 1), (1.0, 1.0)),
        ((5, 2), (1.0, 0.0)),
    ):
        c1, c2 = basis2.entry_coeffs(phi2, i, j)
        assert abs(c1.const - want[0]) < LADDER_TOL and abs(c2.const - want[1]) < LADDER_TOL, (
            f"stage A failed to normalize the cubic block at entry ({i}, {j})"
        )
    return phi2, g2, roots


# =====================================================================
# stage B: the rotation block
# =====================================================================

# Change of the eight rotation coefficients under the unknowns
# q = (p1, p2, B11, B12, B22); rows follow (s111, s112, s121, s122,
# s211, s212, s221, s222).
_STAGE_B_M = np.array(
    [
        [4.0 / 3.0, 0.0, 0.0, -1.0, 0.0],
        [0.0, 1.0 / 3.0, -1.0, -1.0, 0.0],
        [0.0, 1.0, -1.0, -1.0, 0.0],
        [0.0, 0.0, -1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, -1.0],
        [1.0, 0.0, 0.0, -1.0, -1.0],
        [1.0 / 3.0, 0.0, 0.0, -1.0, -1.0],
        [0.0, 4.0 / 3.0, 0.0, -1.0, 0.0],
    ]
)
_STAGE_B_PINV = np.linalg.pinv(_STAGE_B_M)


def _rotation_coeffs(phi, basis):
    third = 1.0 / 3.0
    w00u, w00v = phi.u[0][0], phi.v[0][0]
    out = []
    for i in (1, 2):
        for j in (1, 2):
            xu = phi.u[i][j]
            xv = phi.v[i][j]
            if i == j:
                xu = xu - w00u * third
                xv = xv - w00v * third
            out.extend(basis.coeffs(xu, xv))
    return out  # s111, s112, s121, s122, s211, s212, s221, s222


def _stage_b(phi, g):
    n = phi.order
    basis = _OmegaBasis(phi)
    s = _rotation_coeffs(phi, basis)
    q = []
    for a in range(5):
        acc = Jet2.constant(0.0, n)
        for r in range(8):
            w = _STAGE_B_PINV[a, r]
            if w:
                acc = acc - s[r] * w
        q.append(acc)
    # consistency of the overdetermined solve (three functionals vanish)
    worst = 0.0
    scale = max(max(x.max_abs() for x in s), 1.0)
    for r in range(8):
        acc = s[r]
        for a in range(5):
            w = _STAGE_B_M[r, a]
            if w:
                acc = acc + q[a] * w
        worst = max(worst, acc.max_abs())
    assert worst <= LADDER_TOL * scale, "rotation block is not normalizable"

    p1, p2, b11, b12, b22 = q
    zero = Jet2.constant(0.0, n)
    one = Jet2.constant(1.0, n)
    A = [[one, p1, p2], [zero, one, zero], [zero, zero, one]]
    B = [
        [zero, p1 * b11 + p2 * b12, p1 * b12 + p2 * b22],
        [zero, b11, b12],
        [zero, b12, b22],
    ]
    P = _block_P(A, B, n)
    phi2, g2 = _gauge(phi, P, g)

    basis2 = _OmegaBasis(phi2)
    s2 = _rotation_coeffs(phi2, basis2)
    assert max(abs(x.const) for x in s2) < LADDER_TOL, "stage B left rotation residue"
    return phi2, g2


# =====================================================================
# stages C and D: the eta block
# =====================================================================


def _stage_c(phi, g):
    n = phi.order
    basis = _OmegaBasis(phi)
    h111, _ = basis.entry_coeffs(phi, 1, 4)
    _, h222 = basis.entry_coeffs(phi, 2, 5)
    beta1 = h111 * -0.5
    beta2 = h222 * -0.5
    zero = Jet2.constant(0.0, n)
    one = Jet2.constant(1.0, n)
    A = [[one, zero, zero], [zero, one, zero], [zero, zero, one]]
    B = [[zero, beta1, beta2], [beta1, zero, zero], [beta2, zero, zero]]
    phi2, g2 = _gauge(phi, _block_P(A, B, n), g)
    basis2 = _OmegaBasis(phi2)
    c1, _ = basis2.entry_coeffs(phi2, 1, 4)
    _, c2 = basis2.entry_coeffs(phi2, 2, 5)
    assert abs(c1.const) < LADDER_TOL and abs(c2.const) < LADDER_TOL, (
        "stage C left diagonal eta residue"
    )
    return phi2, g2


def _stage_d(phi, g):
    n = phi.order
    basis = _OmegaBasis(phi)
    h101, _ = basis.entry_coeffs(phi, 1, 3)
    _, h202 = basis.entry_coeffs(phi, 2, 3)
    beta0 = (h101 + h202) * -0.5
    zero = Jet2.constant(0.0, n)
    one = Jet2.constant(1.0, n)
    A = [[one, zero, zero], [zero, one, zero], [zero, zero, one]]
    B = [[beta0, zero, zero], [zero, zero, zero], [zero, zero, zero]]
    phi2, g2 = _gauge(phi, _block_P(A, B, n), g)
    basis2 = _OmegaBasis(phi2)
    c1, _ = basis2.entry_coeffs(phi2, 1, 3)
    _, c2 = basis2.entry_coeffs(phi2, 2, 3)
    assert abs(c1.const + c2.const) < LADDER_TOL, "stage D left unbalanced eta column"
    return phi2, g2


# =====================================================================
# extraction
# =====================================================================


class InvariantTuple:
    """The nine reduced structure coefficients at a point."""

    __slots__ = ("a1", "a2", "a3", "a4", "b1", "b2", "b3", "c1", "c2")

    def __init__(self, a1, a2, a3, a4, b1, b2, b3, c1, c2):
        self.a1 = a1
        self.a2 = a2
        self.a3 = a3
        self.a4 = a4
        self.b1 = b1
        self.b2 = b2
        self.b3 = b3
        self.c1 = c1
        self.c2 = c2

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__slots__}

    def __repr__(self):
        inner = ", ".join(f"{k}={getattr(self, k):.6g}" for k in self.__slots__)
        return f"InvariantTuple({inner})"


class DerivedInvariants:
    """Covariant derivatives and section data accompanying an invariant tuple.

    first holds the eighteen first covariant derivatives (a11..a42, b11..b32,
    c11..c22); second holds the sixteen second derivatives of the a-row.
    sigma1, sigma2 are the section coefficients of w00 in the coframe basis.
    """

    __slots__ = ("sigma1", "sigma2", "first", "second")

    def __init__(self, sigma1, sigma2, first, second):
        self.sigma1 = sigma1
        self.sigma2 = sigma2
        self.first = first
        self.second = second


class AdaptedFrame:
    """The fully reduced frame at a point, with its connection-form jets."""

    __slots__ = ("point", "order", "frame_jets", "phi", "roots", "sigma")

    def __init__(self, point, order, frame_jets, phi, roots, sigma):
        self.point = point
        self.order = order
        self.frame_jets = frame_jets
        self.phi = phi
        self.roots = roots
        self.sigma = sigma

    @property
    def frame(self):
        return np.array([[e.const for e in row] for row in self.frame_jets])

    def sp_frame(self):
        return SpFrame(self.frame)


def _covariant(basis, fjet, weight, sigma1, sigma2):
    m = fjet.order - 1
    fu = jet_partial(fjet, 0)
    fv = jet_partial(fjet, 1)
    b = basis.truncated(m)
    c1, c2 = b.coeffs(fu, fv)
    f = fjet.truncate(m)
    d1 = c1 - f * sigma1.truncate(m) * weight
    d2 = c2 - f * sigma2.truncate(m) * weight
    return d1, d2


def adapt_frame(chart, u, v, order=CHART_JET_ORDER, tol=1e-9, root_hint=None,
                with_first=True, with_second=True):
    """Run the full reduction at (u, v).

    Returns (AdaptedFrame, InvariantTuple, DerivedInvariants). Jet budget:
    order 6 reaches the invariants, 7 their first covariant derivatives,
    8 the second derivatives of the a-row.
    """
    if order < 6:
        raise UsageError("adapted frames need jets of order >= 6")
    if with_first and order < 7:
        raise UsageError("first covariant derivatives need jets of order >= 7")
    if with_second and order < 8:
        raise UsageError("second covariant derivatives need jets of order >= 8")
    g0 = initial_frame(chart, u, v, order, tol)
    phi = phi_from_frame(g0)
    phi, g, roots = _stage_a(phi, g0, root_hint, 1e-8)
    phi, g = _stage_b(phi, g)
    phi, g = _stage_c(phi, g)
    phi, g = _stage_d(phi, g)

    basis = _OmegaBasis(phi)
    sigma1, sigma2 = basis.entry_coeffs(phi, 0, 0)

    z11, a1_jet = basis.entry_coeffs(phi, 1, 4)  # eta11 = a1 w2
    ja2, ja3 = basis.entry_coeffs(phi, 1, 5)
    sa2, sa3 = basis.entry_coeffs(phi, 2, 4)
    a4_jet, z22 = basis.entry_coeffs(phi, 2, 5)  # eta22 = a4 w1
    jb1, jb2 = basis.entry_coeffs(phi, 1, 3)
    jb3, mb1 = basis.entry_coeffs(phi, 2, 3)
    jc1, jc2 = basis.entry_coeffs(phi, 0, 3)
    scale = max(abs(ja2.const), abs(ja3.const), abs(a1_jet.const), abs(a4_jet.const), 1.0)

    # shape checks on the reduced form
    assert abs(z11.const) < LADDER_TOL * scale, "eta11 kept a w1 component"
    assert abs(z22.const) < LADDER_TOL * scale, "eta22 kept a w2 component"
    assert abs(ja2.const - sa2.const) < LADDER_TOL * scale, "eta block asymmetry"
    assert abs(ja3.const - sa3.const) < LADDER_TOL * scale, "eta block asymmetry"
    bscale = max(abs(jb1.const), abs(jb2.const), abs(jb3.const), 1.0)
    assert abs(mb1.const + jb1.const) < LADDER_TOL * bscale, "eta20 balance failed"
    r01 = basis.entry_coeffs(phi, 0, 1)
    r02 = basis.entry_coeffs(phi, 0, 2)
    assert abs(r01[0].const - (ja2.const + a4_jet.const)) < LADDER_TOL * scale
    assert abs(r01[1].const - 0.6 * (ja3.const - ja2.const)) < LADDER_TOL * scale
    assert abs(r02[0].const - 0.6 * (ja2.const - ja3.const)) < LADDER_TOL * scale
    assert abs(r02[1].const - (a1_jet.const + ja3.const)) < LADDER_TOL * scale

    sym_a2 = (ja2 + sa2) * 0.5
    sym_a3 = (ja3 + sa3) * 0.5

    inv = InvariantTuple(
        a1_jet.const, sym_a2.const, sym_a3.const, a4_jet.const,
        jb1.const, jb2.const, jb3.const, jc1.const, jc2.const,
    )

    first = {}
    second = {}
    jets1 = {
        "a1": (a1_jet, WEIGHT_A), "a2": (sym_a2, WEIGHT_A),
        "a3": (sym_a3, WEIGHT_A), "a4": (a4_jet, WEIGHT_A),
        "b1": (jb1, WEIGHT_B), "b2": (jb2, WEIGHT_B), "b3": (jb3, WEIGHT_B),
        "c1": (jc1, WEIGHT_C), "c2": (jc2, WEIGHT_C),
    }
    for name, (fjet, w) in jets1.items():
        if not with_first:
            continue
        d1, d2 = _covariant(basis, fjet, w, sigma1, sigma2)
        first[name + "1"] = d1.const
        first[name + "2"] = d2.const
        if with_second and name.startswith("a"):
            for suffix, djet in (("1", d1), ("2", d2)):
                dd1, dd2 = _covariant(basis, djet, w - 2.0 / 3.0, sigma1, sigma2)
                second[name + suffix + "1"] = dd1.const
                second[name + suffix + "2"] = dd2.const

    der = DerivedInvariants(sigma1.const, sigma2.const, first, second)
    frame = AdaptedFrame((u, v), order, g, phi, roots, (sigma1.const, sigma2.const))
    return frame, inv, der


def invariants_at(chart, u, v, order=6, tol=1e-9):
    return adapt_frame(chart, u, v, order, tol,
                       with_first=False, with_second=False)[1]


def chart_legendrian_residual(chart, u, v, order=3):
    """Scaled residual of the contact conditions on (x, x_u, x_v)."""
    comps = chart.components(u, v, order)
    n = order - 1
    cols = [
        [c.truncate(n) for c in comps],
        [jet_partial(c, 0) for c in comps],
        [jet_partial(c, 1) for c in comps],
    ]
    scale = max(max(e.max_abs() for e in col) for col in cols)
    scale = max(scale, 1.0)
    worst = 0.0
    for a, b in ((0, 1), (0, 2), (1, 2)):
        worst = max(worst, symplectic_pairing(cols[a], cols[b]).max_abs())
    return worst / (scale * scale)


# =====================================================================
# derived reporting helpers
# =====================================================================


def web_curvature(inv):
    """Curvature of the asymptotic web connection: -(4/5)(a2 - a3)."""
    return -0.8 * (inv.a2 - inv.a3)


def fundamental_forms(a1, a2, a3, a4):
    """Coefficients of the residual cubic form on w1^2 w2 and w1 w2^2."""
    return (a1 + 2 * a2, 2 * a3 + a4)


class FundamentalForms:
    """The three basic forms attached to an invariant tuple.

    web is the fixed normalized cubic (coefficients of w1^2 w2 and w1 w2^2),
    psi the residual cubic, chi the ruling quadratic (coefficients of w1^2,
    w1 w2, w2^2).
    """

    __slots__ = ("web", "psi", "chi")

    def __init__(self, web, psi, chi):
        self.web = web
        self.psi = psi
        self.chi = chi

    @classmethod
    def from_invariants(cls, inv):
        return cls(
            (3.0, 3.0),
            fundamental_forms(inv.a1, inv.a2, inv.a3, inv.a4),
            (inv.b1, inv.b2 + inv.b3, -inv.b1),
        )


def lagrangian_triple(frame):
    """The three canonical Lagrangian plane fields along the surface.

    Returns three 6x3 matrices of spans: (e0, e1, f2), (e0, e2, f1) and
    (e0, e1 - e2, f1 + f2).
    """
    m = frame.frame if isinstance(frame, AdaptedFrame) else np.asarray(frame)
    e0, e1, e2 = m[:, 0], m[:, 1], m[:, 2]
    f1, f2 = m[:, 4], m[:, 5]
    return (
        np.column_stack([e0, e1, f2]),
        np.column_stack([e0, e2, f1]),
        np.column_stack([e0, e1 - e2, f1 + f2]),
    )


def assemble_phi(inv, der):
    """The generic reduced connection form with this data as a sample.

    Returns (ctx, phi, sample); feeding the sample to ctx.mc_residual(phi)
    measures how well the data satisfies the structure equations.
    """
    ctx, phi = generic_system()
    sample = {k: complex(v) for k, v in inv.as_dict().items()}
    for name in ("a12", "a21", "a41", "b11", "b21", "b22", "b31", "c11", "c21", "c22"):
        sample[name] = complex(der.first[name])
    return ctx, phi, sample
