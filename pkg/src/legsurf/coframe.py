"""Symbolic calculus in the reduced coframe (w00, w1, w2).

Scalars are polynomial/rational expressions in named structure coefficients.
Every registered field F carries a weight L and a derivative table (F1, F2),
encoding dF = L*F*w00 + F1*w1 + F2*w2. The coframe itself obeys

    d(w1) = (2/3) w00 ^ w1,   d(w2) = (2/3) w00 ^ w2,   d(w00) = K w1 ^ w2,

with K supplied per system (zero for every flat-web specialization). On top
of this the module provides exterior derivatives of one-forms, wedge
products, Maurer-Cartan residuals d(phi) + phi ^ phi, and d^2 checks, all
evaluable either exactly (Fraction samples) or in complex floats.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import (
    IncompleteDerivativeTableError,
    UnregisteredCoefficientError,
    UsageError,
)

# =====================================================================
# expressions
# =====================================================================


class Expr:
    __slots__ = ()

    def __add__(self, other):
        return _sum((self, as_expr(other)))

    def __radd__(self, other):
        return _sum((as_expr(other), self))

    def __sub__(self, other):
        return _sum((self, _prod((CONST_M1, as_expr(other)))))

    def __rsub__(self, other):
        return _sum((as_expr(other), _prod((CONST_M1, self))))

    def __mul__(self, other):
        return _prod((self, as_expr(other)))

    def __rmul__(self, other):
        return _prod((as_expr(other), self))

    def __truediv__(self, other):
        return _quot(self, as_expr(other))

    def __rtruediv__(self, other):
        return _quot(as_expr(other), self)

    def __neg__(self):
        return _prod((CONST_M1, self))

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise UsageError("expression powers must be nonnegative integers")
        out = Const(Fraction(1))
        for _ in range(k):
            out = out * self
        return out


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = Fraction(value)

    def names(self, acc):
        pass

    def diff(self, name):
        return CONST_0

    def evaluate(self, env, exact):
        return self.value if exact else complex(float(self.value))

    def __repr__(self):
        return str(self.value)


class Var(Expr):
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def names(self, acc):
        acc.add(self.name)

    def diff(self, name):
        return CONST_1 if name == self.name else CONST_0

    def evaluate(self, env, exact):
        try:
            return env[self.name]
        except KeyError:
            raise UnregisteredCoefficientError(f"no value for coefficient '{self.name}'") from None

    def __repr__(self):
        return self.name


class Sum(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms):
        self.terms = tuple(terms)

    def names(self, acc):
        for t in self.terms:
            t.names(acc)

    def diff(self, name):
        return _sum(tuple(t.diff(name) for t in self.terms))

    def evaluate(self, env, exact):
        out = self.terms[0].evaluate(env, exact)
        for t in self.terms[1:]:
            out = out + t.evaluate(env, exact)
        return out

    def __repr__(self):
        return "(" + " + ".join(map(repr, self.terms)) + ")"


class Prod(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors):
        self.factors = tuple(factors)

    def names(self, acc):
        for f in self.factors:
            f.names(acc)

    def diff(self, name):
        terms = []
        for k, f in enumerate(self.factors):
            df = f.diff(name)
            if isinstance(df, Const) and df.value == 0:
                continue
            terms.append(_prod(self.factors[:k] + (df,) + self.factors[k + 1 :]))
        return _sum(tuple(terms))

    def evaluate(self, env, exact):
        out = self.factors[0].evaluate(env, exact)
        for f in self.factors[1:]:
            out = out * f.evaluate(env, exact)
        return out

    def __repr__(self):
        return "(" + "*".join(map(repr, self.factors)) + ")"


class Quot(Expr):
    __slots__ = ("num", "den")

    def __init__(self, num, den):
        self.num = num
        self.den = den

    def names(self, acc):
        self.num.names(acc)
        self.den.names(acc)

    def diff(self, name):
        # (n/d)' = n'/d - n d'/d^2
        return _sum(
            (
                _quot(self.num.diff(name), self.den),
                _prod((CONST_M1, _quot(_prod((self.num, self.den.diff(name))), _prod((self.den, self.den))))),
            )
        )

    def evaluate(self, env, exact):
        n = self.num.evaluate(env, exact)
        d = self.den.evaluate(env, exact)
        return n / d

    def __repr__(self):
        return f"({self.num!r}/{self.den!r})"


CONST_0 = Const(0)
CONST_1 = Const(1)
CONST_M1 = Const(-1)


def as_expr(x):
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Const(x)
    if isinstance(x, str):
        return Var(x)
    raise UsageError(f"cannot interpret {x!r} as an expression")


def _sum(terms):
    flat = []
    const = Fraction(0)
    for t in terms:
        if isinstance(t, Sum):
            sub = t.terms
        else:
            sub = (t,)
        for s in sub:
            if isinstance(s, Const):
                const += s.value
            else:
                flat.append(s)
    if const:
        flat.append(Const(const))
    if not flat:
        return CONST_0
    if len(flat) == 1:
        return flat[0]
    return Sum(tuple(flat))


def _prod(factors):
    flat = []
    const = Fraction(1)
    for f in factors:
        if isinstance(f, Prod):
            sub = f.factors
        else:
            sub = (f,)
        for s in sub:
            if isinstance(s, Const):
                const *= s.value
            else:
                flat.append(s)
    if const == 0:
        return CONST_0
    if const != 1:
        flat.insert(0, Const(const))
    if not flat:
        return CONST_1
    if len(flat) == 1:
        return flat[0]
    return Prod(tuple(flat))


def _quot(num, den):
    if isinstance(den, Const):
        if den.value == 0:
            raise ZeroDivisionError("expression division by constant zero")
        return _prod((Const(Fraction(1) / den.value), num))
    if isinstance(num, Const) and num.value == 0:
        return CONST_0
    return Quot(num, den)


def expr_names(expr):
    acc = set()
    expr.names(acc)
    return acc


# =====================================================================
# one- and two-forms with expression coefficients
# =====================================================================


class OneForm:
    """c00*w00 + c1*w1 + c2*w2 with expression (or numeric) coefficients."""

    __slots__ = ("c00", "c1", "c2")

    def __init__(self, c00=CONST_0, c1=CONST_0, c2=CONST_0):
        self.c00 = as_expr(c00)
        self.c1 = as_expr(c1)
        self.c2 = as_expr(c2)

    def __add__(self, other):
        return OneForm(self.c00 + other.c00, self.c1 + other.c1, self.c2 + other.c2)

    def __sub__(self, other):
        return OneForm(self.c00 - other.c00, self.c1 - other.c1, self.c2 - other.c2)

    def scale(self, s):
        s = as_expr(s)
        return OneForm(s * self.c00, s * self.c1, s * self.c2)

    def __neg__(self):
        return self.scale(-1)

    def components(self):
        return (self.c00, self.c1, self.c2)

    def evaluate(self, env, exact):
        return (
            self.c00.evaluate(env, exact),
            self.c1.evaluate(env, exact),
            self.c2.evaluate(env, exact),
        )

    def __repr__(self):
        return f"OneForm({self.c00!r}, {self.c1!r}, {self.c2!r})"


class TwoForm:
    """d001*w00^w1 + d002*w00^w2 + d12*w1^w2."""

    __slots__ = ("d001", "d002", "d12")

    def __init__(self, d001=CONST_0, d002=CONST_0, d12=CONST_0):
        self.d001 = as_expr(d001)
        self.d002 = as_expr(d002)
        self.d12 = as_expr(d12)

    def __add__(self, other):
        return TwoForm(self.d001 + other.d001, self.d002 + other.d002, self.d12 + other.d12)

    def evaluate(self, env, exact):
        return (
            self.d001.evaluate(env, exact),
            self.d002.evaluate(env, exact),
            self.d12.evaluate(env, exact),
        )

    def __repr__(self):
        return f"TwoForm({self.d001!r}, {self.d002!r}, {self.d12!r})"


ZERO_FORM = OneForm()
W00 = OneForm(c00=1)
W1 = OneForm(c1=1)
W2 = OneForm(c2=1)


def wedge(a, b):
    """Wedge of two one-forms, as a TwoForm of expressions."""
    return TwoForm(
        a.c00 * b.c1 - a.c1 * b.c00,
        a.c00 * b.c2 - a.c2 * b.c00,
        a.c1 * b.c2 - a.c2 * b.c1,
    )


def wedge_values(a, b):
    """Wedge on already-evaluated coefficient triples."""
    return (
        a[0] * b[1] - a[1] * b[0],
        a[0] * b[2] - a[2] * b[0],
        a[1] * b[2] - a[2] * b[1],
    )


# =====================================================================
# structure context
# =====================================================================


class StructureContext:
    """Derivative tables for the named coefficients of a closed system.

    Fields have full tables; parameters have values but no derivatives
    (differentiating through one raises the incomplete-table error);
    derived names are algebraic functions of the others and differentiate
    by the chain rule.
    """

    def __init__(self, name, dw00=CONST_0):
        self.name = name
        self.dw00 = as_expr(dw00)
        self.fields = {}
        self.params = {}
        self.derived = {}

    # --- registration -----------------------------------------------

    def _fresh(self, name):
        if name in self.fields or name in self.params or name in self.derived:
            raise UsageError(f"name '{name}' registered twice")

    def register_field(self, name, weight, d1, d2):
        self._fresh(name)
        self.fields[name] = (Fraction(weight), as_expr(d1), as_expr(d2))

    def register_parameter(self, name, weight=None):
        self._fresh(name)
        self.params[name] = None if weight is None else Fraction(weight)

    def register_derived(self, name, expr):
        self._fresh(name)
        self.derived[name] = as_expr(expr)

    def known_names(self):
        return set(self.fields) | set(self.params) | set(self.derived)

    def validate_expr(self, expr):
        unknown = expr_names(expr) - self.known_names()
        if unknown:
            raise UnregisteredCoefficientError(
                f"expression uses unknown coefficients {sorted(unknown)}"
            )

    # --- differentiation ----------------------------------------------

    def d(self, name):
        """The exterior derivative of a named scalar, as a OneForm."""
        if name in self.fields:
            w, d1, d2 = self.fields[name]
            return OneForm(Const(w) * Var(name), d1, d2)
        if name in self.derived:
            return self.scalar_d(self.derived[name])
        if name in self.params:
            raise IncompleteDerivativeTableError(
                f"'{name}' is a bare parameter; its derivative table is not part of the system"
            )
        raise UnregisteredCoefficientError(f"unknown coefficient '{name}'")

    def scalar_d(self, expr):
        expr = as_expr(expr)
        out = ZERO_FORM
        for n in sorted(expr_names(expr)):
            dn = self.d(n)
            out = out + dn.scale(expr.diff(n))
        return out

    def exterior_derivative(self, form):
        """d of a OneForm, using the coframe structure rules."""
        p, q, r = form.c00, form.c1, form.c2
        dp = self.scalar_d(p)
        dq = self.scalar_d(q)
        dr = self.scalar_d(r)
        two_thirds = Fraction(2, 3)
        return TwoForm(
            -dp.c1 + dq.c00 + Const(two_thirds) * q,
            -dp.c2 + dr.c00 + Const(two_thirds) * r,
            p * self.dw00 - dq.c2 + dr.c1,
        )

    # --- evaluation ------------------------------------------------------

    def env(self, sample, exact=True):
        env = dict(sample)
        for name, expr in self.derived.items():
            env[name] = expr.evaluate(env, exact)
        return env

    def evaluate(self, expr, sample, exact=True):
        return as_expr(expr).evaluate(self.env(sample, exact), exact)

    # --- structure-equation residuals ----------------------------------

    def _dphi(self, phi):
        cache = getattr(self, "_dphi_cache", None)
        if cache is None:
            cache = self._dphi_cache = {}
        key = id(phi)
        if key not in cache:
            cache[key] = [[self.exterior_derivative(entry) for entry in row] for row in phi]
        return cache[key]

    def mc_residual(self, phi, sample, exact=True):
        """d(phi) + phi ^ phi evaluated at a sample; 6x6 matrix of triples."""
        if len(phi) != 6 or any(len(row) != 6 for row in phi):
            raise UsageError("mc_residual expects a 6x6 matrix of one-forms")
        dphi = self._dphi(phi)
        env = self.env(sample, exact)
        vals = [[entry.evaluate(env, exact) for entry in row] for row in phi]
        out = []
        for i in range(6):
            row = []
            for j in range(6):
                acc = dphi[i][j].evaluate(env, exact)
                for k in range(6):
                    w = wedge_values(vals[i][k], vals[k][j])
                    acc = (acc[0] + w[0], acc[1] + w[1], acc[2] + w[2])
                row.append(acc)
            out.append(row)
        return out

    def d_squared(self, field):
        """The TwoForm d(dF) as expressions; usage error on incomplete tables."""
        if field not in self.fields:
            raise UsageError(f"'{field}' is not a registered field")
        return self.exterior_derivative(self.d(field))

    def d_squared_check(self, field, sample, exact=True):
        """Evaluate d(dF) at a sample; identically zero for closed systems."""
        return self.d_squared(field).evaluate(self.env(sample, exact), exact)


def exterior_derivative(ctx, form):
    return ctx.exterior_derivative(form)


def mc_residual(phi, ctx, sample, exact=True):
    return ctx.mc_residual(phi, sample, exact)


def d_squared_check(ctx, field, sample, exact=True):
    return ctx.d_squared_check(field, sample, exact)


def residual_max(matrix):
    """Max |entry component| of an mc_residual result, as a float."""
    worst = 0.0
    for row in matrix:
        for triple in row:
            for v in triple:
                worst = max(worst, abs(complex(v)))
    return worst


def residual_is_zero(matrix):
    """Exact-zero test for an mc_residual result over Fraction samples."""
    for row in matrix:
        for triple in row:
            for v in triple:
                if v:
                    return False
    return True


# =====================================================================
# the reduced connection-form skeleton
# =====================================================================


def assemble_reduced_phi(w01, w02, e00, e10, e20, e11, e12, e22):
    """Fill the fixed reduced shape of the connection form.

    The coframe rows, the normalized cubic block, and the trace pattern are
    frozen; callers supply the eight variable one-forms.
    """
    third = OneForm(c00=Fraction(1, 3))
    z = ZERO_FORM
    return [
        [W00, w01, w02, e00, e10, e20],
        [W1, third, z, e10, e11, e12],
        [W2, z, third, e20, e12, e22],
        [z, z, z, -W00, -W1, -W2],
        [z, W2, W1 + W2, -w01, -third, z],
        [z, W1 + W2, W1, -w02, z, -third],
    ]


def _etarela_forms(a1, a2, a3, a4, violate=None):
    """The row-0 entries forced by the reduced structure (with optional breakage)."""
    bump = lambda tag: Const(1 if violate == tag else 0)  # noqa: E731
    c35 = Fraction(3, 5)
    w01 = OneForm(
        c1=a2 + a4 + bump("h011"),
        c2=Const(c35) * (a3 - a2) + bump("h012"),
    )
    w02 = OneForm(
        c1=Const(c35) * (a2 - a3) + bump("h021"),
        c2=a1 + a3 + bump("h022"),
    )
    return w01, w02


GENERIC_VIOLATIONS = (
    "a11", "a22", "a31", "a32", "a42", "b12", "b32", "c12",
    "h011", "h012", "h021", "h022",
)


def generic_system(violate=None):
    """The full 10-parameter reduced system with its compatibility tables.

    violate picks one dependent derivative component (or one forced row-0
    coefficient) and offsets it by 1, for tests that the residual actually
    detects each relation.
    """
    if violate is not None and violate not in GENERIC_VIOLATIONS:
        raise UsageError(f"unknown violation tag '{violate}'")
    a1, a2, a3, a4 = Var("a1"), Var("a2"), Var("a3"), Var("a4")
    b1, b2, b3 = Var("b1"), Var("b2"), Var("b3")
    c1, c2 = Var("c1"), Var("c2")
    a12, a21, a41 = Var("a12"), Var("a21"), Var("a41")
    b11, b21, b22, b31 = Var("b11"), Var("b21"), Var("b22"), Var("b31")
    c11, c21, c22 = Var("c11"), Var("c21"), Var("c22")
    bump = lambda tag: Const(1 if violate == tag else 0)  # noqa: E731
    f = Fraction

    ctx = StructureContext(
        "generic", dw00=Const(f(-6, 5)) * (a2 - a3)
    )
    ctx.register_field("a1", f(-4, 3), Const(-2) * b2 + bump("a11"), a12)
    ctx.register_field(
        "a2",
        f(-4, 3),
        a21,
        Const(f(-3, 2)) * a21 + Const(f(15, 2)) * b3 + Const(8) * b1 + bump("a22"),
    )
    ctx.register_field(
        "a3",
        f(-4, 3),
        Const(f(-3, 2)) * a21 + Const(f(15, 2)) * b3 + Const(10) * b1 + bump("a31"),
        a21 + Const(5) * b2 - Const(12) * b1 - Const(5) * b3 + bump("a32"),
    )
    ctx.register_field("a4", f(-4, 3), a41, Const(-2) * b3 + bump("a42"))
    ctx.register_field(
        "b1",
        f(-2),
        b11,
        b21 - Const(f(3, 5)) * a3 * a3 + c2 + a4 * a1 - Const(f(2, 5)) * a2 * a3 + bump("b12"),
    )
    ctx.register_field("b2", f(-2), b21, b22)
    ctx.register_field(
        "b3",
        f(-2),
        b31,
        -b11 - c1 + Const(f(3, 5)) * a2 * a2 + Const(f(2, 5)) * a2 * a3 - a4 * a1 + bump("b32"),
    )
    ctx.register_field(
        "c1",
        f(-8, 3),
        c11,
        c21 - Const(2) * a1 * b3 - Const(2) * a3 * b3 + Const(2) * a2 * b2 + Const(2) * a4 * b2
        + bump("c12"),
    )
    ctx.register_field("c2", f(-8, 3), c21, c22)
    for p in ("a12", "a21", "a41", "b11", "b21", "b22", "b31", "c11", "c21", "c22"):
        ctx.register_parameter(p)

    w01, w02 = _etarela_forms(a1, a2, a3, a4, violate)
    phi = assemble_reduced_phi(
        w01,
        w02,
        OneForm(c1=c1, c2=c2),
        OneForm(c1=b1, c2=b2),
        OneForm(c1=b3, c2=-b1),
        OneForm(c2=a1),
        OneForm(c1=a2, c2=a3),
        OneForm(c1=a4),
    )
    return ctx, phi


# =====================================================================
# the six closed systems
# =====================================================================


class ClosedSystem:
    """A named closed structure system: context, connection form, sampler."""

    def __init__(self, name, ctx, phi, sampler, checkable_fields, note):
        self.name = name
        self.ctx = ctx
        self.phi = phi
        self.sampler = sampler
        self.checkable_fields = tuple(checkable_fields)
        self.note = note

    def sample(self, rng, exact=True):
        return self.sampler(rng, exact)


def _rand_fraction(rng, nonzero=False):
    while True:
        v = Fraction(rng.randint(-8, 8), rng.randint(1, 6))
        if v or not nonzero:
            return v


def _numize(sample, exact):
    if exact:
        return sample
    return {k: complex(float(v)) for k, v in sample.items()}


def _system_psi_null():
    a, b, c = Var("a"), Var("b"), Var("c")
    f = Fraction
    ctx = StructureContext("psi-null")
    ctx.register_field("a", f(-4, 3), b, -b)
    half = Const(f(-1, 2))
    ctx.register_field("b", f(-2), half * (Const(3) * a * a + c), -half * (Const(3) * a * a + c))
    ctx.register_field("c", f(-8, 3), Const(2) * a * b, Const(-2) * a * b)
    phi = assemble_reduced_phi(
        OneForm(c1=-a),
        OneForm(c2=-a),
        OneForm(c1=c, c2=c),
        OneForm(c1=b, c2=b),
        OneForm(c1=-b, c2=-b),
        OneForm(c2=Const(-2) * a),
        OneForm(c1=a, c2=a),
        OneForm(c1=Const(-2) * a),
    )

    def sampler(rng, exact=True):
        return _numize(
            {"a": _rand_fraction(rng), "b": _rand_fraction(rng), "c": _rand_fraction(rng)}, exact
        )

    return ClosedSystem(
        "psi-null",
        ctx,
        phi,
        sampler,
        ("a", "b", "c"),
        "surfaces whose cubic-residue form vanishes identically",
    )


def _system_tri_ruled():
    a = Var("a")
    ctx = StructureContext("tri-ruled")
    ctx.register_field("a", Fraction(-4, 3), 0, 0)
    phi = assemble_reduced_phi(
        OneForm(c1=a),
        OneForm(c2=a),
        OneForm(c1=a * a, c2=a * a),
        ZERO_FORM,
        ZERO_FORM,
        ZERO_FORM,
        OneForm(c1=a, c2=a),
        ZERO_FORM,
    )

    def sampler(rng, exact=True):
        return _numize({"a": _rand_fraction(rng, nonzero=True)}, exact)

    return ClosedSystem(
        "tri-ruled",
        ctx,
        phi,
        sampler,
        ("a",),
        "surfaces ruled along all three asymptotic foliations",
    )


def _d0_phi(a1, a2, b1, b2, c1):
    return assemble_reduced_phi(
        OneForm(c1=a1 + a2),
        OneForm(c2=a1 + a2),
        OneForm(c1=c1, c2=c1),
        OneForm(c1=b1, c2=b2),
        OneForm(c1=Const(-2) * b1 + b2, c2=-b1),
        OneForm(c2=a1),
        OneForm(c1=a2, c2=a2),
        OneForm(c1=a1),
    )


def _system_d0():
    a1, a2, b1, b2, c1, b11, c11 = map(Var, ("a1", "a2", "b1", "b2", "c1", "b11", "c11"))
    f = Fraction
    ctx = StructureContext("d0")
    ctx.register_field("a1", f(-4, 3), Const(-2) * b2, Const(4) * b1 - Const(2) * b2)
    ctx.register_field("a2", f(-4, 3), Const(-2) * b1 + Const(3) * b2, Const(-4) * b1 + Const(3) * b2)
    ctx.register_field("b1", f(-2), b11, -b11)
    x = -b11 + a2 * a2 - c1 - a1 * a1
    ctx.register_field("b2", f(-2), x, x - Const(2) * b11)
    ctx.register_field("c1", f(-8, 3), c11, c11 + Const(4) * b1 * (a1 + a2))
    ctx.register_field(
        "b11", f(-8, 3), b1 * (Const(2) * a2 + Const(3) * a1), -b1 * (Const(2) * a2 + Const(3) * a1)
    )
    ctx.register_parameter("c11")
    phi = _d0_phi(a1, a2, b1, b2, c1)

    def sampler(rng, exact=True):
        return _numize(
            {n: _rand_fraction(rng) for n in ("a1", "a2", "b1", "b2", "c1", "b11", "c11")}, exact
        )

    return ClosedSystem(
        "d0",
        ctx,
        phi,
        sampler,
        ("a1", "a2", "b1", "b2", "b11"),
        "isothermally asymptotic surfaces with flat web (one free prolongation)",
    )


def _system_d():
    a1, a2, a4, b1, b2, a41, b11 = map(Var, ("a1", "a2", "a4", "b1", "b2", "a41", "b11"))
    f = Fraction
    ctx = StructureContext("d")
    y = b11 - a2 * a2 + Var("c1") + a4 * a1  # recurring combination
    ctx.register_field("a1", f(-4, 3), Const(-2) * b2, -a41 - Const(4) * b2 + Const(4) * b1)
    ctx.register_field("a2", f(-4, 3), Const(-2) * b1 + Const(3) * b2, Const(-4) * b1 + Const(3) * b2)
    ctx.register_field("a4", f(-4, 3), a41, Const(4) * b1 - Const(2) * b2)
    ctx.register_field("b1", f(-2), b11, -b11)
    ctx.register_field("b2", f(-2), -y, -y - Const(2) * b11)
    ctx.register_field("a41", f(-2), Const(2) * y, Const(2) * y + Const(4) * b11)
    z = Const(f(-1, 4)) * (
        Const(-8) * b1 * a1
        + Const(4) * b2 * a1
        + a41 * a1
        - Const(8) * b1 * a2
        - Const(4) * b1 * a4
        + a41 * a4
    )
    ctx.register_field("b11", f(-8, 3), z, -z)
    ctx.register_derived(
        "c1",
        Const(-2) * b11
        - (a4 * a1 - a2 * a2)
        - Const(3) * (b2 - b1) * (a41 + Const(2) * b2) / (a1 - a4),
    )
    phi = assemble_reduced_phi(
        OneForm(c1=a4 + a2),
        OneForm(c2=a1 + a2),
        OneForm(c1=Var("c1"), c2=Var("c1")),
        OneForm(c1=b1, c2=b2),
        OneForm(c1=Const(-2) * b1 + b2, c2=-b1),
        OneForm(c2=a1),
        OneForm(c1=a2, c2=a2),
        OneForm(c1=a4),
    )

    def sampler(rng, exact=True):
        while True:
            s = {n: _rand_fraction(rng) for n in ("a1", "a2", "a4", "b1", "b2", "a41", "b11")}
            gap = s["a1"] - s["a4"]
            if exact and gap != 0:
                break
            if not exact and abs(float(gap)) >= 1e-6:
                break
        return _numize(s, exact)

    return ClosedSystem(
        "d",
        ctx,
        phi,
        sampler,
        ("a1", "a2", "a4", "b1", "b2", "a41", "b11"),
        "deformable flat-web surfaces away from the isothermal locus",
    )


def _system_s0():
    a1, a2, b2, c1, c11 = map(Var, ("a1", "a2", "b2", "c1", "c11"))
    f = Fraction
    ctx = StructureContext("s0")
    ctx.register_field("a1", f(-4, 3), Const(-2) * b2, Const(-2) * b2)
    ctx.register_field("a2", f(-4, 3), Const(3) * b2, Const(3) * b2)
    x = -(c1 + a1 * a1 - a2 * a2)
    ctx.register_field("b2", f(-2), x, x)
    ctx.register_field("c1", f(-8, 3), c11, c11)
    ctx.register_parameter("c11")
    phi = assemble_reduced_phi(
        OneForm(c1=a1 + a2),
        OneForm(c2=a1 + a2),
        OneForm(c1=c1, c2=c1),
        OneForm(c2=b2),
        OneForm(c1=b2),
        OneForm(c2=a1),
        OneForm(c1=a2, c2=a2),
        OneForm(c1=a1),
    )

    def sampler(rng, exact=True):
        return _numize({n: _rand_fraction(rng) for n in ("a1", "a2", "b2", "c1", "c11")}, exact)

    return ClosedSystem(
        "s0",
        ctx,
        phi,
        sampler,
        ("a1", "a2", "b2"),
        "isothermal flat-web surfaces with symmetric eta-row",
    )


def _system_s():
    a1, a2, a4 = map(Var, ("a1", "a2", "a4"))
    ctx = StructureContext("s")
    for n in ("a1", "a2", "a4"):
        ctx.register_field(n, Fraction(-4, 3), 0, 0)
    c = a2 * a2 - a1 * a4
    phi = assemble_reduced_phi(
        OneForm(c1=a4 + a2),
        OneForm(c2=a1 + a2),
        OneForm(c1=c, c2=c),
        ZERO_FORM,
        ZERO_FORM,
        OneForm(c2=a1),
        OneForm(c1=a2, c2=a2),
        OneForm(c1=a4),
    )

    def sampler(rng, exact=True):
        while True:
            s = {n: _rand_fraction(rng) for n in ("a1", "a2", "a4")}
            if s["a1"] != s["a4"]:
                break
        return _numize(s, exact)

    return ClosedSystem(
        "s",
        ctx,
        phi,
        sampler,
        ("a1", "a2", "a4"),
        "rigid flat-web surfaces with covariantly constant invariants",
    )


_BUILDERS = {
    "psi-null": _system_psi_null,
    "tri-ruled": _system_tri_ruled,
    "d0": _system_d0,
    "d": _system_d,
    "s0": _system_s0,
    "s": _system_s,
}

SYSTEM_NAMES = tuple(_BUILDERS)


def closed_system(name):
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise UsageError(f"unknown system '{name}'; choose from {SYSTEM_NAMES}") from None
    return builder()


# =====================================================================
# expression parser and system loader
# =====================================================================


def parse_expr(text):
    """Parse '+ - * / **' arithmetic over names and integer/rational literals."""
    tokens = _tokenize(text)
    pos = [0]

    def peek():
        return tokens[pos[0]] if pos[0] < len(tokens) else None

    def take(expect=None):
        t = peek()
        if t is None or (expect is not None and t != expect):
            raise UsageError(f"parse error in {text!r} near token {t!r}")
        pos[0] += 1
        return t

    def atom():
        t = peek()
        if t == "(":
            take()
            e = expr()
            take(")")
            return e
        if t == "-":
            take()
            return -atom()
        if t == "+":
            take()
            return atom()
        take()
        if t is None:
            raise UsageError(f"unexpected end of expression in {text!r}")
        if t[0].isdigit():
            return Const(int(t))
        if t[0].isalpha() or t[0] == "_":
            return Var(t)
        raise UsageError(f"unexpected token {t!r} in {text!r}")

    def power():
        base = atom()
        if peek() == "**":
            take()
            t = take()
            if not t[0].isdigit():
                raise UsageError("exponent must be an integer literal")
            return base ** int(t)
        return base

    def term():
        e = power()
        while peek() in ("*", "/"):
            op = take()
            rhs = power()
            e = e * rhs if op == "*" else e / rhs
        return e

    def expr():
        e = term()
        while peek() in ("+", "-"):
            op = take()
            rhs = term()
            e = e + rhs if op == "+" else e - rhs
        return e

    out = expr()
    if peek() is not None:
        raise UsageError(f"trailing tokens in expression {text!r}")
    return out


def _tokenize(text):
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(text[i:j])
            i = j
        elif ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            out.append(text[i:j])
            i = j
        elif text.startswith("**", i):
            out.append("**")
            i += 2
        elif ch in "+-*/()":
            out.append(ch)
            i += 1
        else:
            raise UsageError(f"bad character {ch!r} in expression")
    return out


def load_system(spec_dict):
    """Build a (ctx, phi) pair from a plain-dict description.

    Expected keys: name; dw00 (expression string, optional); fields
    {name: {weight: 'p/q', d1: expr, d2: expr}}; params [names];
    derived {name: expr}; phi: 6x6 matrix whose entries are [c00, c1, c2]
    expression-string triples.
    """
    try:
        name = spec_dict["name"]
        fields = spec_dict["fields"]
        phi_spec = spec_dict["phi"]
    except (KeyError, TypeError) as exc:
        raise UsageError(f"system description missing {exc}") from None
    ctx = StructureContext(name, dw00=parse_expr(spec_dict.get("dw00", "0")))
    for fname, table in fields.items():
        ctx.register_field(
            fname, Fraction(table["weight"]), parse_expr(table["d1"]), parse_expr(table["d2"])
        )
    for pname in spec_dict.get("params", ()):
        ctx.register_parameter(pname)
    for dname, dexpr in spec_dict.get("derived", {}).items():
        ctx.register_derived(dname, parse_expr(dexpr))
    if len(phi_spec) != 6 or any(len(r) != 6 for r in phi_spec):
        raise UsageError("phi must be a 6x6 matrix of coefficient triples")
    phi = []
    for row in phi_spec:
        out_row = []
        for entry in row:
            if len(entry) != 3:
                raise UsageError("each phi entry needs (w00, w1, w2) coefficients")
            form = OneForm(*(parse_expr(s) if isinstance(s, str) else s for s in entry))
            for comp in form.components():
                ctx.validate_expr(comp)
            out_row.append(form)
        phi.append(out_row)
    return ctx, phi
