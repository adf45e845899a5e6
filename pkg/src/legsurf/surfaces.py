"""Exact models of the example surfaces.

Everything here is rational: the six components of each map are homogeneous
polynomials over the Gaussian rationals, irrational square-root factors are
carried as per-pair radicand tags, and every check (contact residual, base
points, blow-up limits, defining relations, the trig/birational comparison)
is a polynomial identity, not a numerical test.
"""

import itertools
from fractions import Fraction
from math import comb

from . import frames
from .errors import (
    DegenerateDivisorError,
    EquivalenceFailureError,
    UsageError,
)
from .polynomials import (
    BinaryForm,
    HomogPoly3,
    Poly1,
    Poly2,
    _rational_roots,
    binaryform_gcd,
    check_squarefree,
    poly1_gcd,
)
from .rationals import GaussianRational, as_exact

_ZERO = GaussianRational(0)
_ONE = GaussianRational(1)


def _proj3(a, b, c):
    """Exact projective normalization of a nonzero triple: first nonzero entry 1."""
    vec = [as_exact(a), as_exact(b), as_exact(c)]
    lead = next((v for v in vec if v), None)
    if lead is None:
        raise UsageError("cannot projectivize the zero triple")
    return tuple(v / lead for v in vec)


def _proj6(vals):
    vec = [as_exact(v) for v in vals]
    lead = next((v for v in vec if v), None)
    if lead is None:
        raise UsageError("cannot projectivize the zero vector")
    return tuple(v / lead for v in vec)


def proj_equal_exact(a, b):
    """Exact projective equality of two coordinate tuples (any common length)."""
    if len(a) != len(b):
        return False
    av = [as_exact(v) for v in a]
    bv = [as_exact(v) for v in b]
    for i in range(len(av)):
        for j in range(i + 1, len(av)):
            if av[i] * bv[j] != av[j] * bv[i]:
                return False
    return any(av) and any(bv)


def _binary_to_homog(form, zpow):
    """x^j y^(m-j) |-> x^j y^(m-j) z^zpow, as a HomogPoly3."""
    if not form:
        return HomogPoly3.zero()
    return HomogPoly3(form.m + zpow, {(j, form.m - j, zpow): v for j, v in form.c.items()})


# =====================================================================
# six-component homogeneous maps
# =====================================================================


class HomogMap6:
    """Rational skeleton of a map to projective 5-space.

    components are six HomogPoly3 of a common degree (zero entries allowed);
    pair_radicands = (r0, r1, r2) tags the i-th symplectic pair (components
    i and 3 + i) with an implicit factor sqrt(r_i).  All exact checks work on
    the skeleton; numeric evaluation applies the square roots.
    """

    __slots__ = ("components", "pair_radicands", "degree")

    def __init__(self, components, pair_radicands=(1, 1, 1)):
        components = list(components)
        if len(components) != 6:
            raise UsageError("a map needs six components")
        degs = {c.degree for c in components if c}
        if not degs:
            raise UsageError("the zero map is not a projective map")
        if len(degs) != 1:
            raise UsageError(f"mixed component degrees {sorted(degs)}")
        if len(pair_radicands) != 3 or any(int(r) <= 0 for r in pair_radicands):
            raise UsageError("pair_radicands must be three positive integers")
        self.components = components
        self.pair_radicands = tuple(int(r) for r in pair_radicands)
        self.degree = degs.pop()

    def evaluate(self, x, y, z):
        """Exact skeleton values (no radical factors) at a rational point."""
        return [c.evaluate(as_exact(x), as_exact(y), as_exact(z)) for c in self.components]

    def numeric(self, x, y, z):
        """Complex values with the sqrt(radicand) pair factors applied."""
        scales = [complex(r) ** 0.5 for r in self.pair_radicands] * 2
        return [
            complex(c.evaluate(as_exact(x), as_exact(y), as_exact(z))) * s
            for c, s in zip(self.components, scales)
        ]

    def chart(self):
        """The affine z = 1 chart, ready for the frame ladder."""
        return frames.PolyChart(self.components, self.pair_radicands)

    def __repr__(self):
        return f"HomogMap6(degree={self.degree}, radicands={self.pair_radicands})"


def legendrian_residual(map6):
    """Exact contact residual of the map, as a pair of polynomials.

    Writing the pairs (X_i, Y_i) = (components[i], components[3+i]) with
    radicand r_i, the residual in direction v is
    sum_i r_i (X_i dY_i/dv - Y_i dX_i/dv) for v = x, y.  Homogeneity makes
    the z-direction a combination of these two, so two components suffice.
    Both vanish identically exactly when the cone over the image is
    Lagrangian, i.e. the map is Legendrian wherever it is defined.
    """
    out = []
    for var in ("x", "y"):
        acc = HomogPoly3.zero()
        for i in range(3):
            xi = map6.components[i]
            yi = map6.components[3 + i]
            term = xi * yi.partial(var) - yi * xi.partial(var)
            acc = acc + term.scale(map6.pair_radicands[i])
        out.append(acc)
    return tuple(out)


def is_exactly_legendrian(map6):
    rx, ry = legendrian_residual(map6)
    return not rx and not ry


def _clear_common_monomials(components):
    """Divide out the largest monomial x^a y^b z^c dividing every component."""
    nz = [c for c in components if c]
    if not nz:
        return components
    mins = [min(key[v] for c in nz for key in c.c) for v in range(3)]
    if not any(mins):
        return components
    out = []
    for c in components:
        if not c:
            out.append(c)
            continue
        shifted = {
            (i - mins[0], j - mins[1], k - mins[2]): v for (i, j, k), v in c.c.items()
        }
        out.append(HomogPoly3(c.degree - sum(mins), shifted))
    return out


# =====================================================================
# the polynomial family over a choice of binary forms
# =====================================================================


def _as_binary(k, data):
    if isinstance(data, BinaryForm):
        form = data
    else:
        form = BinaryForm(k, [as_exact(v) for v in data])
    if form.m != k:
        raise UsageError(f"form for weight {k} has degree {form.m}")
    return form


def _flat_components(m, forms):
    x0 = HomogPoly3.monomial(1, 0, 0, m)
    x1 = HomogPoly3.monomial(1, 1, 0, m - 1)
    x2 = HomogPoly3.monomial(1, 0, 1, m - 1)
    y0 = HomogPoly3.zero()
    y1 = HomogPoly3.zero()
    y2 = HomogPoly3.zero()
    for k in sorted(forms):
        fk = forms[k]
        w = Fraction(1, k - 2)
        y0 = y0 - _binary_to_homog(fk, m - k)
        y1 = y1 + _binary_to_homog(fk.partial_x(), m - k + 1).scale(w)
        y2 = y2 + _binary_to_homog(fk.partial_y(), m - k + 1).scale(w)
    return [x0, x1, x2, y0, y1, y2]


def make_flat_family(m, forms):
    """The flat-web family of Legendrian maps of degree m >= 3.

    forms maps a weight k (3 <= k <= m) to a degree-k binary form in (x, y)
    (a BinaryForm, or a coefficient list indexed by the x-exponent).  The top
    form of weight m is required and must be squarefree: its roots on the
    line z = 0 are the base points of the map.  The construction is contact
    for every choice of forms; the top form controls the geometry.
    """
    if not isinstance(m, int) or m < 3:
        raise UsageError("the family needs an integer degree m >= 3")
    table = {}
    for k, data in forms.items():
        k = int(k)
        if not 3 <= k <= m:
            raise UsageError(f"form weight {k} outside 3..{m}")
        table[k] = _as_binary(k, data)
    if m not in table or not table[m]:
        raise UsageError("the top form of weight m is required")
    check_squarefree(table[m])
    return HomogMap6(_flat_components(m, table))


def flat_map():
    """The degree-3 member with top form x y (x + y) / 2 (the flat surface)."""
    half = Fraction(1, 2)
    return make_flat_family(3, {3: BinaryForm(3, {2: half, 1: half})})


def flat_quartic_map():
    """A degree-4 member: top form x y (x + y)(x - y), plus a cubic lower term."""
    half = Fraction(1, 2)
    return make_flat_family(
        4,
        {
            3: BinaryForm(3, {2: half, 1: half}),
            4: BinaryForm(4, {3: 1, 1: -1}),
        },
    )


def degenerate_web_map():
    """Contact, but with top form x^2 y / 2: the web degenerates everywhere."""
    return HomogMap6(_flat_components(3, {3: BinaryForm(3, {2: Fraction(1, 2)})}))


def non_legendrian_map():
    """A quadric map that fails the contact condition (a negative control)."""
    return HomogMap6(
        [
            HomogPoly3.monomial(1, 0, 0, 2),
            HomogPoly3.monomial(1, 1, 0, 1),
            HomogPoly3.monomial(1, 0, 1, 1),
            HomogPoly3.monomial(1, 1, 0, 1),
            HomogPoly3.monomial(1, 0, 1, 1),
            HomogPoly3.monomial(1, 1, 1, 0),
        ]
    )


# =====================================================================
# the half-angle (trigonometric) family
# =====================================================================


def de_moivre(m):
    """Binary forms (f_m, g_m) in (s, c) with sin(m t) = f_m(sin t, cos t),
    cos(m t) = g_m(sin t, cos t); equivalently (c + i s)^m = g_m + i f_m
    as a polynomial identity."""
    if not isinstance(m, int) or m < 0:
        raise UsageError("de_moivre needs a nonnegative integer")
    f = {}
    g = {}
    for k in range(m // 2 + 1):
        sign = -1 if k % 2 else 1
        g[2 * k] = sign * comb(m, 2 * k)
        if 2 * k + 1 <= m:
            f[2 * k + 1] = sign * comb(m, 2 * k + 1)
    return BinaryForm(m, f), BinaryForm(m, g)


def de_moivre_identity_residual(m):
    """(c + i s)^m - (g_m + i f_m), exactly; the zero form certifies the pair."""
    f, g = de_moivre(m)
    base = BinaryForm(1, {1: GaussianRational.i(), 0: 1})
    return base**m - (g + f.scale(GaussianRational.i()))


def make_trig_family(m, n, order="swapped"):
    """Rational skeleton of the surface (sin(ms + nt), sqrt(m) sin s,
    sqrt(n) sin t, -cos(ms + nt), sqrt(m) cos s, sqrt(n) cos t) in
    half-angle coordinates.

    The skeleton drops the sqrt(m), sqrt(n) factors into the radicand tags.
    Components are reduced by their common monomial factor.  With
    order="swapped" the second and third pairs are exchanged (tags become
    (1, n, m)); at (m, n) = (1, 1) the swapped form is exactly the cyclic
    degree-3 model returned by trig_map().  order="raw" keeps the natural
    ordering.
    """
    if not isinstance(m, int) or not isinstance(n, int) or m < 1 or n < 1:
        raise UsageError("the half-angle family needs integers m, n >= 1")
    if order not in ("swapped", "raw"):
        raise UsageError(f"unknown component order {order!r}")
    e = max(0, 2 * (n - m))
    t = m - n + e
    x0 = HomogPoly3.monomial(1, 2 * m, 0, 1 + e) + HomogPoly3.monomial(
        -1, 0, 2 * n, 2 * m - 2 * n + 1 + e
    )
    x1 = HomogPoly3.monomial(1, m - 1, n, t + 2) + HomogPoly3.monomial(-1, m + 1, n, t)
    x2 = HomogPoly3.monomial(1, m, n + 1, t) + HomogPoly3.monomial(-1, m, n - 1, t + 2)
    y0 = HomogPoly3.monomial(1, 2 * m, 0, 1 + e) + HomogPoly3.monomial(
        1, 0, 2 * n, 2 * m - 2 * n + 1 + e
    )
    y1 = HomogPoly3.monomial(1, m - 1, n, t + 2) + HomogPoly3.monomial(1, m + 1, n, t)
    y2 = HomogPoly3.monomial(1, m, n + 1, t) + HomogPoly3.monomial(1, m, n - 1, t + 2)
    comps = _clear_common_monomials([x0, x1, x2, y0, y1, y2])
    if order == "swapped":
        comps = [comps[0], comps[2], comps[1], comps[3], comps[5], comps[4]]
        return HomogMap6(comps, (1, n, m))
    return HomogMap6(comps, (1, m, n))


def trig_map():
    """The cyclic degree-3 model ((x^2-y^2)z, (y^2-z^2)x, (z^2-x^2)y, ...)."""
    return make_trig_family(1, 1)


class TrigSurface:
    """Floating-point evaluator for the trigonometric parametrization."""

    __slots__ = ("m", "n")

    def __init__(self, m=1, n=1):
        if not isinstance(m, int) or not isinstance(n, int) or m < 1 or n < 1:
            raise UsageError("TrigSurface needs integers m, n >= 1")
        self.m = m
        self.n = n

    def point(self, s, t):
        import cmath

        rm = self.m**0.5
        rn = self.n**0.5
        return (
            cmath.sin(self.m * s + self.n * t),
            rm * cmath.sin(s),
            rn * cmath.sin(t),
            -cmath.cos(self.m * s + self.n * t),
            rm * cmath.cos(s),
            rn * cmath.cos(t),
        )

    def chart(self):
        rm = self.m**0.5
        rn = self.n**0.5
        return frames.TrigChart(
            [
                ("sin", self.m, self.n, 1.0),
                ("sin", 1, 0, rm),
                ("sin", 0, 1, rn),
                ("cos", self.m, self.n, -1.0),
                ("cos", 1, 0, rm),
                ("cos", 0, 1, rn),
            ]
        )

    def __repr__(self):
        return f"TrigSurface({self.m}, {self.n})"


# =====================================================================
# base points
# =====================================================================


def _z1_rows(poly):
    """The z = 1 slice of a HomogPoly3, as Poly1-in-x rows indexed by y-degree."""
    rows = {}
    for (i, j, _k), v in poly.c.items():
        rows.setdefault(j, {})[i] = rows.get(j, {}).get(i, _ZERO) + v
    out = []
    for j in range(max(rows, default=-1) + 1):
        d = rows.get(j, {})
        out.append(Poly1([d.get(i, _ZERO) for i in range(max(d, default=-1) + 1)]))
    while out and not out[-1]:
        out.pop()
    return out


def _sylvester_resultant(pa, pb):
    """Resultant of two polynomials-in-y with Poly1-in-x coefficients."""
    if not pa or not pb:
        return Poly1()
    da, db = len(pa) - 1, len(pb) - 1
    size = da + db
    if size == 0:
        return Poly1([1])
    a = list(reversed(pa))
    b = list(reversed(pb))
    rows = []
    for r in range(db):
        rows.append([Poly1()] * r + a + [Poly1()] * (size - r - da - 1))
    for r in range(da):
        rows.append([Poly1()] * r + b + [Poly1()] * (size - r - db - 1))
    return _bareiss_det(rows)


def _bareiss_det(m):
    """Fraction-free determinant over the Poly1 ring (exact divisions)."""
    n = len(m)
    m = [row[:] for row in m]
    prev = Poly1([1])
    sign = 1
    for k in range(n - 1):
        if not m[k][k]:
            piv = next((r for r in range(k + 1, n) if m[r][k]), None)
            if piv is None:
                return Poly1()
            m[k], m[piv] = m[piv], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = m[i][j] * m[k][k] - m[i][k] * m[k][j]
                quo, rem = num.divmod(prev)
                assert not rem, "Bareiss division left a remainder"
                m[i][j] = quo
            m[i][k] = Poly1()
        prev = m[k][k]
    det = m[n - 1][n - 1]
    return det * GaussianRational(sign)


def _exact_roots_or_raise(poly, what):
    roots, leftover = _rational_roots(poly)
    if leftover.degree >= 1:
        raise UsageError(f"{what} has a factor without Gaussian-rational roots: {leftover!r}")
    return [r for r, _mult in roots]


def _affine_x_candidates(rowed):
    """x-coordinates that could carry a common zero at z = 1, or None to retry."""
    pairs = sorted(
        itertools.combinations(range(len(rowed)), 2),
        key=lambda ij: len(rowed[ij[0]]) + len(rowed[ij[1]]),
        reverse=True,
    )
    for i, j in pairs:
        res = _sylvester_resultant(rowed[i], rowed[j])
        if res:
            if res.degree == 0:
                return []
            return _exact_roots_or_raise(res, "a base-point resultant")
    return None


def base_points(map6):
    """All points of the plane where every component vanishes, exactly.

    Works in two stages: roots of the gcd of the restrictions to the line
    z = 0, then a resultant elimination over the affine chart z = 1.  The
    map must have a finite base locus and no common component factor.
    """
    comps = map6.components
    pts = []

    rests = [c.restrict_line_at_infinity() for c in comps if c]
    nzr = [r for r in rests if r]
    if not nzr:
        raise UsageError("every component vanishes on z = 0; the base locus is not finite")
    g = binaryform_gcd(nzr)
    a, b, core = g.split()
    if b:
        pts.append(_proj3(1, 0, 0))
    if a:
        pts.append(_proj3(0, 1, 0))
    for r in _exact_roots_or_raise(core, "the z = 0 gcd"):
        pts.append(_proj3(r, 1, 0))

    rowed = [_z1_rows(c) for c in comps if c]
    consts = [r for r in rowed if len(r) == 1 and r[0].degree == 0]
    if consts:
        xcands = []
    else:
        xcands = _affine_x_candidates(rowed)
        if xcands is None:
            swapped = [_z1_rows(_swap_xy(c)) for c in comps if c]
            ycands = _affine_x_candidates(swapped)
            if ycands is None:
                raise UsageError("components share a common factor at z = 1")
            xcands = None
            for y0 in ycands:
                for x0 in _common_second_coordinate(swapped, y0):
                    if all(not c.evaluate(x0, y0, _ONE) for c in comps):
                        pts.append(_proj3(x0, y0, 1))
    if xcands:
        for x0 in xcands:
            for y0 in _common_second_coordinate(rowed, x0):
                if all(not c.evaluate(x0, y0, _ONE) for c in comps):
                    pts.append(_proj3(x0, y0, 1))

    seen = []
    for p in pts:
        if not any(proj_equal_exact(p, q) for q in seen):
            seen.append(p)
    seen.sort(key=lambda p: tuple((v.re, v.im) for v in p))
    return seen


def _swap_xy(poly):
    if not poly:
        return poly
    return HomogPoly3(poly.degree, {(j, i, k): v for (i, j, k), v in poly.c.items()})


def _common_second_coordinate(rowed, x0):
    """Common roots in the second variable of all rows evaluated at x = x0."""
    g = None
    for rows in rowed:
        p = Poly1([row(x0) for row in rows])
        g = p if g is None else poly1_gcd(g, p)
        if g and g.degree == 0:
            return []
    if g is None or not g:
        raise UsageError("a whole line at z = 1 lies in the base locus")
    if g.degree == 0:
        return []
    return _exact_roots_or_raise(g, "an affine base-point slice")


# =====================================================================
# blow-up limits along arcs into base points
# =====================================================================


class BlowupChart:
    """An arc (x, y, z)(lam, z) entering a base point as z -> 0.

    Evaluating the map along the arc and extracting the lowest z-order
    coefficient sweeps out, as the slope lam varies, the curve that replaces
    the base point.
    """

    __slots__ = ("name", "point", "triple")

    def __init__(self, name, point, triple):
        self.name = name
        self.point = point
        self.triple = tuple(triple)

    def __repr__(self):
        return f"BlowupChart({self.name!r}, point={self.point})"


def _standard_charts_flat():
    lam = Poly2.slope()
    z = Poly2.zvar()
    one = Poly2.const(1)
    return (
        BlowupChart("E1", _proj3(1, 0, 0), (one, lam * z, z)),
        BlowupChart("E2", _proj3(0, 1, 0), (lam * z, one, z)),
        BlowupChart("E3", _proj3(1, -1, 0), (one, lam * z - one, z)),
    )


def _standard_charts_cyclic():
    lam = Poly2.slope()
    z = Poly2.zvar()
    one = Poly2.const(1)
    return (
        BlowupChart("E1", _proj3(1, 0, 0), (one, lam * z, z)),
        BlowupChart("E2", _proj3(0, 1, 0), (z, one, lam * z)),
        BlowupChart("E3", _proj3(0, 0, 1), (lam * z, z, one)),
    )


def blowup_charts(family):
    """Named arc charts for the shipped families ("flat" or "tri-ruled")."""
    if family == "flat":
        return _standard_charts_flat()
    if family == "tri-ruled":
        return _standard_charts_cyclic()
    raise UsageError(f"no standard blow-up charts for family {family!r}")


class BlowupLimit:
    """Limit of a map along a blow-up arc: six slope polynomials."""

    __slots__ = ("chart", "valuation", "coeffs")

    def __init__(self, chart, valuation, coeffs):
        self.chart = chart
        self.valuation = valuation
        self.coeffs = tuple(coeffs)

    def at(self, lam):
        lam = as_exact(lam)
        return tuple(p(lam) for p in self.coeffs)

    def point(self, lam):
        vals = self.at(lam)
        if not any(vals):
            raise UsageError(f"the limit vanishes at slope {lam}")
        return _proj6(vals)

    def is_line(self):
        """True when the swept curve is a projective line (degree 1, rank 2)."""
        degs = [p.degree for p in self.coeffs if p]
        if not degs or max(degs) != 1:
            return False
        rows = [list(p.c) + [_ZERO] * (2 - len(p.c)) for p in self.coeffs]
        for r, s in itertools.combinations(rows, 2):
            if r[0] * s[1] != r[1] * s[0]:
                return True
        return False

    def __repr__(self):
        return f"BlowupLimit({self.chart.name!r}, valuation={self.valuation})"


def blowup_limit(map6, chart):
    """Exact limit of the map along the arc; the degenerate case raises.

    If the swept curve is a single point, the divisor collapses and a
    DegenerateDivisorError carrying that point is raised.
    """
    vals = [c.evaluate(*chart.triple) if c else Poly2() for c in map6.components]
    nz = [v for v in vals if v]
    if not nz:
        raise UsageError("the map vanishes identically along the arc")
    nu = min(v.z_valuation() for v in nz)
    coeffs = [v.z_coefficient(nu) for v in vals]
    width = max(len(p.c) for p in coeffs)
    rows = [list(p.c) + [_ZERO] * (width - len(p.c)) for p in coeffs]
    constant = True
    for r, s in itertools.combinations(rows, 2):
        for u, v in itertools.combinations(range(width), 2):
            if r[u] * s[v] != r[v] * s[u]:
                constant = False
                break
        if not constant:
            break
    if constant:
        col = next(
            a for a in range(width) if any(rows[i][a] for i in range(6))
        )
        raise DegenerateDivisorError(_proj6([rows[i][col] for i in range(6)]))
    return BlowupLimit(chart, nu, coeffs)


# =====================================================================
# images of lines
# =====================================================================


class LineImageReport:
    """Outcome of restricting a map to a projective line."""

    __slots__ = ("kind", "degree", "point", "endpoints", "forms")

    def __init__(self, kind, degree, point=None, endpoints=None, forms=None):
        self.kind = kind
        self.degree = degree
        self.point = point
        self.endpoints = endpoints
        self.forms = forms

    @property
    def is_line(self):
        return self.kind == "line"

    def __repr__(self):
        return f"LineImageReport({self.kind!r}, degree={self.degree})"


def _binary_div(f, g):
    """Exact quotient of binary forms (g must divide f)."""
    af, bf, pf = f.split()
    ag, bg, pg = g.split()
    quo, rem = pf.divmod(pg)
    if rem or af < ag or bf < bg:
        raise UsageError("binary form division is not exact")
    out = BinaryForm(f.m - g.m)
    for k, v in enumerate(quo.c):
        if v:
            out.c[af - ag + k] = v
    return out


def line_image_check(map6, line):
    """Classify the image of a projective line: a point, a line, or a curve.

    line is (l0, l1, l2) with the line { l0 x + l1 y + l2 z = 0 }.  The
    restriction is computed exactly; common factors (from base points on the
    line) are divided out before reading off the degree.
    """
    l = [as_exact(v) for v in line]
    if not any(l):
        raise UsageError("line coefficients are all zero")
    piv = next(k for k in range(3) if l[k])
    basis = []
    for k in range(3):
        if k == piv:
            continue
        vec = [_ZERO, _ZERO, _ZERO]
        vec[k] = _ONE
        vec[piv] = -l[k] / l[piv]
        basis.append(vec)
    b1, b2 = basis
    subs = [BinaryForm(1, {1: b1[k], 0: b2[k]}) for k in range(3)]
    forms = [
        c.evaluate(subs[0], subs[1], subs[2]) if c else BinaryForm(0)
        for c in map6.components
    ]
    nzf = [f for f in forms if f]
    if not nzf:
        raise UsageError("the line lies inside the base locus")
    g = binaryform_gcd(nzf)
    cleared = [_binary_div(f, g) if f else BinaryForm(0) for f in forms]
    deg = max(f.m for f in cleared if f)
    if deg == 0:
        return LineImageReport(
            "point", 0, point=_proj6([f.c.get(0, _ZERO) for f in cleared]), forms=cleared
        )
    if deg == 1:
        ends = (
            _proj6([f.c.get(1, _ZERO) for f in cleared]),
            _proj6([f.c.get(0, _ZERO) for f in cleared]),
        )
        return LineImageReport("line", 1, endpoints=ends, forms=cleared)
    return LineImageReport("curve", deg, forms=cleared)


# =====================================================================
# defining relations of the two degree-3 images
# =====================================================================


def relation_residuals(map6, relation_set="flat", printed_variant=False):
    """Compose candidate defining relations with the map, exactly.

    relation_set "flat" returns the five generators cutting out the image
    of the degree-3 flat-web map; "tri-ruled" returns the two quadric cone
    differences and the symmetric cubic for the cyclic degree-3 model.  Each
    value is a HomogPoly3 residual: the zero polynomial certifies that the
    image satisfies the relation.  printed_variant swaps in a miscopied
    first flat relation (with X1 Y2 in place of X1 Y1), kept as a negative
    control: its residual is nonzero.
    """
    x0, x1, x2, y0, y1, y2 = map6.components
    half = Fraction(1, 2)
    if relation_set == "flat":
        if printed_variant:
            r1 = 3 * (x0 * y0) + x1 * y2 + x2 * y2
        else:
            r1 = 3 * (x0 * y0) + x1 * y1 + x2 * y2
        return {
            "R1": r1,
            "R2": x0 * x0 * y0 + half * (x1 * x2 * (x1 + x2)),
            "R3": x0 * y1 - x1 * x2 - half * (x2 * x2),
            "R4": x0 * y2 - x1 * x2 - half * (x1 * x1),
            "R5": (x1 * (y2 - half * y1) - x2 * (y1 - half * y2)) * y0
            - y1 * y2 * (y1 - y2),
        }
    if relation_set == "tri-ruled":
        return {
            "Q1": x0 * x0 - y0 * y0 - (x1 * x1 - y1 * y1),
            "Q2": x1 * x1 - y1 * y1 - (x2 * x2 - y2 * y2),
            "C1": x0 * (x1 * x2 + y1 * y2) + y0 * (x1 * y2 + y1 * x2),
        }
    raise UsageError(f"unknown relation set {relation_set!r}")


# =====================================================================
# asymptotic directions
# =====================================================================


def asymptotic_directions(family, u=0, v=0):
    """Chart directions of the three asymptotic pencils at (u, v).

    For the flat family the three directions are constant; for the cyclic
    degree-3 model in its rational chart the third pencil passes through the
    chart origin, so its direction at (u, v) is (u, v) itself.
    """
    if family == "flat":
        return ((1, 0), (0, 1), (1, -1))
    if family == "tri-ruled":
        u = as_exact(u)
        v = as_exact(v)
        if not u and not v:
            raise UsageError("the third pencil direction degenerates at the chart origin")
        return ((1, 0), (0, 1), (u, v))
    raise UsageError(f"no closed-form directions for family {family!r}")


def measured_asymptotic_directions(chart, u, v, order=4, tol=1e-8):
    """Asymptotic directions read off a jet of the chart at (u, v).

    Returns three complex direction pairs (du, dv), each normalized so its
    largest entry is 1; the cubic roots are converted to chart directions
    through the coframe coefficients of the initial frame.
    """
    g = frames.initial_frame(chart, u, v, order)
    phi = frames.phi_from_frame(g)
    basis = frames._OmegaBasis(phi)
    cubic = frames._theta_cubic(phi, basis)
    roots = frames.cubic_roots([c.const for c in cubic], tol)
    m12 = (basis.w1u.const, basis.w1v.const, basis.w2u.const, basis.w2v.const)
    det = m12[0] * m12[3] - m12[1] * m12[2]
    out = []
    for z1, z2 in roots:
        du = (m12[3] * z1 - m12[1] * z2) / det
        dv = (-m12[2] * z1 + m12[0] * z2) / det
        s = du if abs(du) >= abs(dv) else dv
        out.append((du / s, dv / s))
    return tuple(out)


# =====================================================================
# trig model versus birational skeleton
# =====================================================================


def _half_angle_composition(m, n):
    """The trigonometric components pushed through the double cover of the
    null conics, as six homogeneous polynomials in (x, y, z)."""
    x2 = HomogPoly3.monomial(1, 2, 0, 0)
    y2 = HomogPoly3.monomial(1, 0, 2, 0)
    z2 = HomogPoly3.monomial(1, 0, 0, 2)
    ii = GaussianRational.i()
    u0 = HomogPoly3.monomial(2, 1, 0, 1)
    u1 = z2 - x2
    u2 = (z2 + x2).scale(ii)
    v0 = HomogPoly3.monomial(2, 0, 1, 1)
    v1 = y2 - z2
    v2 = (z2 + y2).scale(ii)
    fm, gm = de_moivre(m)
    fn, gn = de_moivre(n)
    big_fm = fm(u1, u2)
    big_gm = gm(u1, u2)
    big_fn = fn(v1, v2)
    big_gn = gn(v1, v2)
    pref = GaussianRational.i_power(-(m + n - 1))
    return [
        big_fm * big_gn + big_gm * big_fn,
        (u1 * u0 ** (m - 1) * v0**n).scale(pref),
        (v1 * u0**m * v0 ** (n - 1)).scale(pref),
        big_fm * big_fn - big_gm * big_gn,
        (u2 * u0 ** (m - 1) * v0**n).scale(pref),
        (v2 * u0**m * v0 ** (n - 1)).scale(pref),
    ]


class TrigBirationalCertificate:
    """Witness that the trig model and the rational skeleton agree.

    block_ratios is the constant vector of componentwise ratios normalized
    by the first entry; conformality of the matching diagonal scaling is the
    equality of the three pair products.  cross_half_ratio is the constant
    ratio of the first-pair scales (first half over second half).
    """

    __slots__ = ("m", "n", "points_checked", "block_ratios", "cross_half_ratio", "immersion")

    def __init__(self, m, n, points_checked, block_ratios, cross_half_ratio, immersion):
        self.m = m
        self.n = n
        self.points_checked = points_checked
        self.block_ratios = block_ratios
        self.cross_half_ratio = cross_half_ratio
        self.immersion = immersion

    def __repr__(self):
        return (
            f"TrigBirationalCertificate(m={self.m}, n={self.n}, "
            f"points={self.points_checked}, cross={self.cross_half_ratio!r})"
        )


def trig_vs_birational(m, n, points=25):
    """Certify that the half-angle composition of the trig model matches the
    rational skeleton up to a constant conformal diagonal scaling.

    Both sides are evaluated exactly at rational sample points; the six
    componentwise ratios, normalized by the first, must be identical at every
    point, and the three pair products must agree (the conformal condition).
    Raises EquivalenceFailureError when any of that fails.  The parametrized
    surface is an immersion only at (m, n) = (1, 1).
    """
    bir = make_trig_family(m, n, order="raw")
    comp = _half_angle_composition(m, n)
    rho_ref = None
    used = 0
    for xv in (2, 3, 4, 5, 7, 8, 9):
        for yv in (3, 4, 5, 6, 8, 10, 11):
            if used >= points:
                break
            x = as_exact(xv)
            y = as_exact(yv)
            bvals = [c.evaluate(x, y, _ONE) for c in bir.components]
            if any(not v for v in bvals):
                continue
            cvals = [c.evaluate(x, y, _ONE) for c in comp]
            ratios = [cv / bv for cv, bv in zip(cvals, bvals)]
            if not ratios[0]:
                raise EquivalenceFailureError(
                    f"composition vanishes where the skeleton does not, at ({xv}, {yv})"
                )
            rho = tuple(r / ratios[0] for r in ratios)
            if rho_ref is None:
                prods = (rho[0] * rho[3], rho[1] * rho[4], rho[2] * rho[5])
                if prods[0] != prods[1] or prods[0] != prods[2]:
                    raise EquivalenceFailureError(
                        "the matching diagonal scaling is not conformal"
                    )
                rho_ref = rho
            elif rho != rho_ref:
                raise EquivalenceFailureError(
                    f"block ratios drift between sample points, at ({xv}, {yv})"
                )
            used += 1
        if used >= points:
            break
    if used < points:
        raise UsageError("not enough admissible sample points for the certificate")
    return TrigBirationalCertificate(
        m,
        n,
        used,
        rho_ref,
        cross_half_ratio=_ONE / rho_ref[3],
        immersion=(m == 1 and n == 1),
    )


# =====================================================================
# config-driven construction and chart shortcuts
# =====================================================================


def _coeff(v):
    if isinstance(v, str):
        return GaussianRational.parse(v)
    return as_exact(v)


def map_from_config(cfg):
    """Build a map from a plain-data description.

    {"family": "flat", "m": 4, "f": {"3": [...], "4": [...]}} with coefficient
    lists indexed by the x-exponent (entries ints or "p/q" strings);
    {"family": "trig", "m": 1, "n": 1, "order": "swapped"};
    {"family": "custom", "components": [[ [i, j, k, coeff], ... ] x 6],
     "radicands": [1, 1, 1]}.
    """
    fam = cfg.get("family")
    if fam == "flat":
        forms = {
            int(k): BinaryForm(int(k), [_coeff(c) for c in lst])
            for k, lst in cfg["f"].items()
        }
        return make_flat_family(int(cfg["m"]), forms)
    if fam == "trig":
        return make_trig_family(int(cfg["m"]), int(cfg["n"]), cfg.get("order", "swapped"))
    if fam == "custom":
        comps = []
        for table in cfg["components"]:
            if not table:
                comps.append(HomogPoly3.zero())
                continue
            deg = sum(int(e) for e in table[0][:3])
            comps.append(
                HomogPoly3(
                    deg,
                    {
                        (int(i), int(j), int(k)): _coeff(cv)
                        for i, j, k, cv in table
                    },
                )
            )
        return HomogMap6(comps, tuple(cfg.get("radicands", (1, 1, 1))))
    raise UsageError(f"unknown family {fam!r}")


def chart_flat():
    return flat_map().chart()


def chart_flat_quartic():
    return flat_quartic_map().chart()


def chart_tri_ruled():
    return trig_map().chart()


def chart_trig(m=1, n=1):
    return TrigSurface(m, n).chart()


def chart_degenerate_web():
    return degenerate_web_map().chart()


def chart_non_legendrian():
    return non_legendrian_map().chart()
