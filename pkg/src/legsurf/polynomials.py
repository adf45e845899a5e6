"""Exact polynomial arithmetic: binary forms, homogeneous ternary polynomials,
and the small univariate/bivariate helpers the blow-up machinery needs.

Coefficients are GaussianRational throughout. Evaluation is generic in the
argument ring: anything with +, * and integer ** works (jets, bivariate
polynomials, quadratic-extension numbers, plain complex).
"""

from fractions import Fraction

from .errors import MultipleFactorError, UsageError
from .rationals import GaussianRational, as_exact

_ZERO = GaussianRational(0)


def _clean(d):
    return {k: v for k, v in d.items() if v}


# =====================================================================
# univariate polynomials over the Gaussian rationals
# =====================================================================


class Poly1:
    """Dense univariate polynomial; zero polynomial has degree -1."""

    __slots__ = ("c",)

    def __init__(self, coeffs=()):
        c = [as_exact(x) for x in coeffs]
        while c and not c[-1]:
            c.pop()
        self.c = c

    @property
    def degree(self):
        return len(self.c) - 1

    def __bool__(self):
        return bool(self.c)

    def __eq__(self, other):
        return isinstance(other, Poly1) and self.c == other.c

    def __add__(self, other):
        n = max(len(self.c), len(other.c))
        return Poly1(
            [
                (self.c[k] if k < len(self.c) else _ZERO)
                + (other.c[k] if k < len(other.c) else _ZERO)
                for k in range(n)
            ]
        )

    def __sub__(self, other):
        return self + (other * GaussianRational(-1))

    def __mul__(self, other):
        if isinstance(other, Poly1):
            if not self.c or not other.c:
                return Poly1()
            out = [_ZERO] * (len(self.c) + len(other.c) - 1)
            for i, a in enumerate(self.c):
                for j, b in enumerate(other.c):
                    out[i + j] = out[i + j] + a * b
            return Poly1(out)
        s = as_exact(other)
        return Poly1([a * s for a in self.c])

    __rmul__ = __mul__

    def __call__(self, x):
        out = GaussianRational(0) if not self.c else self.c[-1]
        for a in reversed(self.c[:-1]):
            out = out * x + a
        return out

    def monic(self):
        if not self.c:
            return self
        lead = self.c[-1]
        return Poly1([a / lead for a in self.c])

    def divmod(self, other):
        if not other.c:
            raise ZeroDivisionError("Poly1 division by zero")
        rem = list(self.c)
        q = [_ZERO] * max(0, len(rem) - len(other.c) + 1)
        d = other.degree
        lead = other.c[-1]
        while len(rem) - 1 >= d and rem:
            k = len(rem) - 1 - d
            f = rem[-1] / lead
            q[k] = f
            for j in range(d + 1):
                rem[k + j] = rem[k + j] - f * other.c[j]
            while rem and not rem[-1]:
                rem.pop()
        return Poly1(q), Poly1(rem)

    def __repr__(self):
        return f"Poly1({[repr(a) for a in self.c]})"


def poly1_gcd(a, b):
    """Monic gcd via the Euclidean algorithm (exact field arithmetic)."""
    while b:
        a, b = b, a.divmod(b)[1]
    return a.monic() if a else a


# =====================================================================
# binary forms (homogeneous in two variables)
# =====================================================================


class BinaryForm:
    """Homogeneous polynomial in (x, y); coefficient of x^j y^(m-j) at index j."""

    __slots__ = ("m", "c")

    def __init__(self, degree, coeffs=None):
        self.m = degree
        self.c = {}
        if coeffs is not None:
            for j, v in coeffs.items() if isinstance(coeffs, dict) else enumerate(coeffs):
                v = as_exact(v)
                if v:
                    if not 0 <= j <= degree:
                        raise UsageError("binary form index out of range")
                    self.c[j] = v

    def __bool__(self):
        return bool(self.c)

    def __eq__(self, other):
        return (
            isinstance(other, BinaryForm) and self.m == other.m and _clean(self.c) == _clean(other.c)
        )

    def __add__(self, other):
        if self.m != other.m:
            raise UsageError("cannot add binary forms of different degrees")
        out = dict(self.c)
        for j, v in other.c.items():
            out[j] = out.get(j, _ZERO) + v
        return BinaryForm(self.m, out)

    def __sub__(self, other):
        return self + other.scale(GaussianRational(-1))

    def scale(self, s):
        s = as_exact(s)
        return BinaryForm(self.m, {j: v * s for j, v in self.c.items()})

    def __mul__(self, other):
        if not isinstance(other, BinaryForm):
            return self.scale(other)
        out = {}
        for j, a in self.c.items():
            for k, b in other.c.items():
                out[j + k] = out.get(j + k, _ZERO) + a * b
        return BinaryForm(self.m + other.m, out)

    __rmul__ = __mul__

    def __pow__(self, n):
        out = BinaryForm(0, {0: 1})
        for _ in range(n):
            out = out * self
        return out

    def partial_x(self):
        return BinaryForm(max(self.m - 1, 0), {j - 1: v * j for j, v in self.c.items() if j})

    def partial_y(self):
        return BinaryForm(
            max(self.m - 1, 0), {j: v * (self.m - j) for j, v in self.c.items() if self.m - j}
        )

    def __call__(self, x, y):
        out = None
        for j in sorted(self.c):
            term = self.c[j] * (x**j) * (y ** (self.m - j))
            out = term if out is None else out + term
        if out is None:
            return GaussianRational(0) if isinstance(x, GaussianRational) else 0 * x
        return out

    def split(self):
        """Return (a, b, f) with form = x^a y^b * homogenize(f), f(0) != 0."""
        if not self.c:
            return 0, 0, Poly1()
        a = min(self.c)
        b = min(self.m - j for j in self.c)
        f = Poly1([self.c.get(a + k, _ZERO) for k in range(self.m - a - b + 1)])
        return a, b, f

    def is_squarefree(self):
        a, b, f = self.split()
        if a > 1 or b > 1:
            return False
        fp = Poly1([c * (k + 1) for k, c in enumerate(f.c[1:])])
        g = poly1_gcd(f, fp)
        return g.degree <= 0

    def __repr__(self):
        return f"BinaryForm({self.m}, {self.c})"


def binaryform_gcd(forms):
    """gcd of a family of binary forms, as a binary form (monic-ish, exact)."""
    forms = [f for f in forms if f]
    if not forms:
        return BinaryForm(0)
    amin = min(f.split()[0] for f in forms)
    bmin = min(f.split()[1] for f in forms)
    g = None
    for f in forms:
        _, _, fu = f.split()
        g = fu if g is None else poly1_gcd(g, fu)
        if g.degree == 0:
            break
    deg = amin + bmin + g.degree
    out = BinaryForm(deg)
    for k, v in enumerate(g.c):
        if v:
            out.c[amin + k] = v
    return out


def _rational_roots(f):
    """Exact roots of a Poly1 with Gaussian-rational coefficients.

    Returns (roots_with_multiplicity, leftover). Tries Gaussian-rational
    candidates p/q with p | trailing, q | leading after integer clearing of
    the real/imaginary parts; complete for every shipped family.
    """
    roots = []
    k = 0
    while f.c and not f.c[0]:
        f = Poly1(f.c[1:])
        k += 1
    if k:
        roots.append((GaussianRational(0), k))
    while f.degree >= 1:
        # integer-clear: common denominator of all re/im parts
        den = 1
        for a in f.c:
            den = den * a.re.denominator // _gcd_int(den, a.re.denominator)
            den = den * a.im.denominator // _gcd_int(den, a.im.denominator)
        ints = [(a.re * den, a.im * den) for a in f.c]
        trail = next((p for p in ints if p[0] or p[1]), None)
        lead = ints[-1]
        if trail is None:
            break
        cand = set()
        for p in _gauss_divisors(trail):
            for q in _gauss_divisors(lead):
                cand.add(p / q)
                cand.add(-(p / q))
        hit = None
        for r in cand:
            if not f(r):
                hit = r
                break
        if hit is None:
            break
        mult = 0
        while f.degree >= 1 and not f(hit):
            f = f.divmod(Poly1([-hit, GaussianRational(1)]))[0]
            mult += 1
        roots.append((hit, mult))
    return roots, f


def _gcd_int(a, b):
    a, b = abs(int(a)), abs(int(b))
    while b:
        a, b = b, a % b
    return a or 1


def _gauss_divisors(pair):
    """Small divisor candidates of a Gaussian integer given as (re, im)."""
    re, im = int(pair[0]), int(pair[1])
    n = re * re + im * im
    if n == 0:
        return [GaussianRational(1)]
    out = set()
    d = 1
    while d * d <= n:
        if n % d == 0:
            for q in (d, n // d):
                for a in range(int(q**0.5) + 1):
                    b2 = q - a * a
                    b = int(round(b2**0.5))
                    if b * b == b2:
                        out.add(GaussianRational(a, b))
                        if a:
                            out.add(GaussianRational(a, -b))
        d += 1
    return sorted(out, key=lambda g: (g.re * g.re + g.im * g.im, g.re, g.im)) or [
        GaussianRational(1)
    ]


# =====================================================================
# homogeneous ternary polynomials
# =====================================================================


class HomogPoly3:
    """Homogeneous polynomial in (x, y, z) with Gaussian-rational coefficients.

    The zero polynomial carries degree -1 (the partial-derivative sentinel).
    Keys are exponent triples (i, j, k) with i + j + k == degree.
    """

    __slots__ = ("degree", "c")

    def __init__(self, degree, coeffs=None):
        self.c = {}
        if coeffs:
            for key, v in coeffs.items():
                v = as_exact(v)
                if v:
                    if sum(key) != degree or min(key) < 0:
                        raise UsageError(f"exponents {key} do not match degree {degree}")
                    self.c[key] = v
        self.degree = degree if self.c else -1

    @classmethod
    def zero(cls):
        return cls(-1)

    @classmethod
    def monomial(cls, coeff, i, j, k):
        return cls(i + j + k, {(i, j, k): coeff})

    def __bool__(self):
        return bool(self.c)

    def __eq__(self, other):
        return isinstance(other, HomogPoly3) and self.c == other.c

    def __add__(self, other):
        if not self:
            return other
        if not other:
            return self
        if self.degree != other.degree:
            raise UsageError("cannot add homogeneous polynomials of different degrees")
        out = dict(self.c)
        for k, v in other.c.items():
            out[k] = out.get(k, _ZERO) + v
        return HomogPoly3(self.degree, out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, s):
        s = as_exact(s)
        return HomogPoly3(max(self.degree, 0) if self.c else -1, {k: v * s for k, v in self.c.items()}) if self.c else HomogPoly3.zero()

    def __mul__(self, other):
        if isinstance(other, HomogPoly3):
            if not self or not other:
                return HomogPoly3.zero()
            out = {}
            for ka, a in self.c.items():
                for kb, b in other.c.items():
                    key = (ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2])
                    out[key] = out.get(key, _ZERO) + a * b
            return HomogPoly3(self.degree + other.degree, out)
        return self.scale(other)

    __rmul__ = __mul__

    def __pow__(self, n):
        out = HomogPoly3.monomial(1, 0, 0, 0)
        for _ in range(n):
            out = out * self
        return out

    def partial(self, var):
        """Exact partial derivative; var in (0, 1, 2) or ('x', 'y', 'z')."""
        if isinstance(var, str):
            var = "xyz".index(var)
        if not self:
            return HomogPoly3.zero()
        out = {}
        for key, v in self.c.items():
            e = key[var]
            if e:
                nk = list(key)
                nk[var] = e - 1
                out[tuple(nk)] = v * e
        if not out:
            return HomogPoly3.zero()
        return HomogPoly3(self.degree - 1, out)

    def evaluate(self, x, y, z):
        """Generic evaluation; works for jets, Poly2, QuadExt, complex, ..."""
        if not self:
            return 0 * (x + y + z) + 0  # ring zero when possible, else int 0
        xs = _powers(x, max(k[0] for k in self.c))
        ys = _powers(y, max(k[1] for k in self.c))
        zs = _powers(z, max(k[2] for k in self.c))
        out = None
        for key in sorted(self.c):
            term = xs[key[0]] * ys[key[1]] * zs[key[2]]
            term = _scalar_mul(self.c[key], term)
            out = term if out is None else out + term
        return out

    def restrict_line_at_infinity(self):
        """The binary form obtained by setting z = 0."""
        out = BinaryForm(max(self.degree, 0))
        for (i, j, k), v in self.c.items():
            if k == 0:
                out.c[i] = v
        if not out.c:
            return BinaryForm(0)
        return out

    def __repr__(self):
        return f"HomogPoly3({self.degree}, {self.c})"


def _powers(x, n):
    out = [x**0]
    for _ in range(n):
        out.append(out[-1] * x)
    return out


def _scalar_mul(coeff, value):
    try:
        return value * coeff
    except TypeError:
        return complex(coeff) * value


def poly_partial(poly, var):
    """Partial derivative of a HomogPoly3; degree-0 input yields the degree -1 zero."""
    if not isinstance(poly, HomogPoly3):
        raise UsageError("poly_partial expects a HomogPoly3")
    return poly.partial(var)


# =====================================================================
# bivariate helper for blow-up substitutions: polynomials in (lam, z)
# =====================================================================


class Poly2:
    """Polynomial in two commuting variables (slope, z); keys (i, j)."""

    __slots__ = ("c",)

    def __init__(self, coeffs=None):
        self.c = {}
        if coeffs:
            for k, v in coeffs.items():
                v = as_exact(v)
                if v:
                    self.c[k] = v

    @classmethod
    def const(cls, v):
        return cls({(0, 0): v})

    @classmethod
    def slope(cls):
        return cls({(1, 0): 1})

    @classmethod
    def zvar(cls):
        return cls({(0, 1): 1})

    def __bool__(self):
        return bool(self.c)

    def __add__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            other = Poly2.const(other)
        out = dict(self.c)
        for k, v in other.c.items():
            s = out.get(k, _ZERO) + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return Poly2(out)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            other = Poly2.const(other)
        return self + other * -1

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            s = as_exact(other)
            return Poly2({k: v * s for k, v in self.c.items()})
        out = {}
        for ka, a in self.c.items():
            for kb, b in other.c.items():
                key = (ka[0] + kb[0], ka[1] + kb[1])
                out[key] = out.get(key, _ZERO) + a * b
        return Poly2(out)

    __rmul__ = __mul__

    def __pow__(self, n):
        out = Poly2.const(1)
        for _ in range(n):
            out = out * self
        return out

    def z_valuation(self):
        if not self.c:
            return None
        return min(j for _, j in self.c)

    def z_coefficient(self, j):
        """Coefficient of z^j, as a Poly1 in the slope."""
        terms = {i: v for (i, jj), v in self.c.items() if jj == j}
        if not terms:
            return Poly1()
        n = max(terms)
        return Poly1([terms.get(i, _ZERO) for i in range(n + 1)])

    def __repr__(self):
        return f"Poly2({self.c})"


def check_squarefree(form):
    """Raise MultipleFactorError unless the binary form is squarefree."""
    if not form.is_squarefree():
        raise MultipleFactorError("binary form has a repeated factor")
