"""Pointwise classification of reduced invariant tuples.

All comparisons are made against a weighted scale so that the verdicts are
invariant under the residual scaling freedom of the adapted frame: the
a-row scales like mu^2, the b-row like mu^3, the c-row like mu^4, and each
covariant derivative adds one power of mu.
"""

from .errors import UsageError

_POWERS = {"a": 2, "b": 3, "c": 4}


def _tuple_scale(inv, first=None):
    vals = []
    for name, value in inv.as_dict().items():
        vals.append(abs(value) ** (1.0 / _POWERS[name[0]]))
    if first:
        for name, value in first.items():
            vals.append(abs(value) ** (1.0 / (_POWERS[name[0]] + 1)))
    return max(vals)


class SurfaceClassReport:
    """Boolean structure flags plus the deformation-space bound."""

    __slots__ = (
        "flat", "psi_null", "isothermal",
        "ruled_w1", "ruled_w2", "ruled_w3", "tri_ruled",
        "d0_member", "d_member", "s0_member", "s_member",
        "psi_deformability", "consistent",
    )

    def __init__(self, **kw):
        for name in self.__slots__:
            setattr(self, name, kw.pop(name))
        if kw:
            raise UsageError(f"unknown report fields {sorted(kw)}")

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__slots__}

    def __repr__(self):
        on = [k for k in self.__slots__ if getattr(self, k) is True]
        return f"SurfaceClassReport({', '.join(on)}, bound={self.psi_deformability})"


def psi_deformability_bound(inv, der=None, tol=1e-7):
    """Upper bound for the dimension of the second-order deformation space.

    Curved-web tuples give 2 without derivative data. On the flat-web locus
    the first derivatives decide between 1, 0 and the maximal value 3, so
    der is required there.
    """
    s = _tuple_scale(inv)
    if abs(inv.a2 - inv.a3) > tol * s * s:
        return 2
    if der is None:
        raise UsageError("flat-web bound needs first covariant derivatives")
    f = der.first if hasattr(der, "first") else der
    gap = f["a41"] + f["a12"] + 4 * inv.b2 - 4 * inv.b1
    if abs(gap) > tol * s**3:
        return 1
    if abs(inv.c1 - inv.c2) > tol * s**4:
        return 0
    return 3


def classify(inv, der=None, tol=1e-7):
    """Structure flags for one reduced invariant tuple.

    der (a DerivedInvariants or a plain dict of first derivatives) refines
    the deformability bound; membership flags are purely algebraic in the
    tuple. The consistent flag drops when the tuple sits on a locus that no
    surface realizes.
    """
    first = None
    if der is not None:
        first = der.first if hasattr(der, "first") else dict(der)
    s = _tuple_scale(inv, first)
    sa, sb, sc = tol * s**2, tol * s**3, tol * s**4

    def za(x):
        return abs(x) <= sa

    def zb(x):
        return abs(x) <= sb

    def zc(x):
        return abs(x) <= sc

    a1, a2, a3, a4 = inv.a1, inv.a2, inv.a3, inv.a4
    b1, b2, b3 = inv.b1, inv.b2, inv.b3
    c1, c2 = inv.c1, inv.c2

    isothermal = za(a2 - a3)
    ruled_w1 = za(a1)
    ruled_w2 = za(a4)
    ruled_w3 = za(2 * a2 + a4 - a1 - 2 * a3)
    tri_ruled = ruled_w1 and ruled_w2 and ruled_w3
    psi_null = za(a1 + 2 * a2) and za(a4 + 2 * a3)
    flat = (
        za(a1) and za(a2) and za(a3) and za(a4)
        and zb(b1) and zb(b2) and zb(b3)
        and zc(c1) and zc(c2)
    )

    web_flat_row = isothermal and zc(c1 - c2) and zb(b3 + 2 * b1 - b2)
    equal_ends = za(a1 - a4)
    d0_member = web_flat_row and equal_ends
    s0_member = d0_member and zb(b1)
    d_member = web_flat_row and not equal_ends
    s_member = (
        isothermal
        and zb(b1) and zb(b2) and zb(b3)
        and zc(c1 - c2) and zc(c1 - (a2 * a2 - a1 * a4))
        and not equal_ends
    )

    consistent = True
    if psi_null and not (isothermal and zb(b1 - b2) and zb(b3 + b1) and zc(c1 - c2)):
        consistent = False

    try:
        bound = psi_deformability_bound(inv, der, tol)
    except UsageError:
        bound = 2 if not isothermal else None

    return SurfaceClassReport(
        flat=flat,
        psi_null=psi_null,
        isothermal=isothermal,
        ruled_w1=ruled_w1,
        ruled_w2=ruled_w2,
        ruled_w3=ruled_w3,
        tri_ruled=tri_ruled,
        d0_member=d0_member,
        d_member=d_member,
        s0_member=s0_member,
        s_member=s_member,
        psi_deformability=bound,
        consistent=consistent,
    )
