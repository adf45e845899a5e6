"""Second-order deformations of the adapted frame and their flows.

The deformation of a reduced connection lives in eight one-form slots; the
class preserving the order-4 cubic closes into a three-coefficient system
whose flow this module integrates, jointly with the frame, along polylines
in a chart's parameter plane.  Deformed surfaces come out as the first
frame column, together with the diagnostics that justify them.
"""

import numpy as np

from fractions import Fraction

from .errors import (
    FlowConvergenceError,
    IntegrabilityViolationError,
    UsageError,
)
from .coframe import Const, OneForm, Var, assemble_reduced_phi, closed_system
from .frames import DerivedInvariants, InvariantTuple, adapt_frame
from .symplectic import SpFrame, symplectic_pairing

_J6_NUM = np.zeros((6, 6))
_J6_NUM[:3, 3:] = np.eye(3)
_J6_NUM[3:, :3] = -np.eye(3)


# === deformation states =================================================


class SecondOrderState:
    """Coefficient record of a general second-order contact deformation.

    The u's deform the symmetric eta block, the v's its border row, the
    w's its corner entry.  v0 is not free: it always equals (-v1 + v2)/2.
    """

    __slots__ = ("u0", "u1", "u2", "v1", "v2", "w1", "w2")

    def __init__(self, u0=0, u1=0, u2=0, v1=0, v2=0, w1=0, w2=0):
        self.u0 = u0
        self.u1 = u1
        self.u2 = u2
        self.v1 = v1
        self.v2 = v2
        self.w1 = w1
        self.w2 = w2

    @property
    def v0(self):
        return (-self.v1 + self.v2) / 2

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__slots__}

    def __repr__(self):
        body = ", ".join(f"{k}={getattr(self, k)!r}" for k in self.__slots__)
        return f"SecondOrderState({body})"


class DeformationState:
    """The three free coefficients (u0, v1, w1) of a cubic-preserving flow."""

    __slots__ = ("u0", "v1", "w1")

    def __init__(self, u0=0, v1=0, w1=0):
        self.u0 = u0
        self.v1 = v1
        self.w1 = w1

    def promote(self, inv):
        """Fill in the dependent coefficients over the given base data."""
        u0, v1, w1 = self.u0, self.v1, self.w1
        return SecondOrderState(
            u0=u0,
            u1=-2 * u0,
            u2=-2 * u0,
            v1=v1,
            v2=-v1,
            w1=w1,
            w2=w1 + (inv.a3 - inv.a2) * u0 * 6 / 5,
        )

    def as_tuple(self):
        return (self.u0, self.v1, self.w1)

    def __repr__(self):
        return f"DeformationState(u0={self.u0!r}, v1={self.v1!r}, w1={self.w1!r})"


def deformation_invariant_shift(state):
    """Shift of (a1, a2, a3, a4) produced by the eta-block deformation."""
    if isinstance(state, DeformationState):
        u0 = state.u0
        u1 = u2 = -2 * u0
    else:
        u0, u1, u2 = state.u0, state.u1, state.u2
    return (u2, u0, u0, u1)


# === the sparse deformation form ========================================

_DELTA_SLOTS = ("w01", "w02", "e00", "e10", "e20", "e11", "e12", "e22")

# (row, column) of each slot in the reduced 6x6 shape; the mirror entries
# (symmetric eta block, negated transpose of the w block) are derived.
_SLOT_POS = {
    "w01": (0, 1),
    "w02": (0, 2),
    "e00": (0, 3),
    "e10": (0, 4),
    "e20": (0, 5),
    "e11": (1, 4),
    "e12": (1, 5),
    "e22": (2, 5),
}


class DeformationForm:
    """Eight coefficient pairs deforming the reduced connection.

    Each slot holds (p, q) for the one-form p w1 + q w2.  The theta block
    and the inner coframe rows are never deformed, so the full matrix is
    recovered from the slots alone.
    """

    __slots__ = ("slots",)

    def __init__(self, slots):
        missing = set(_DELTA_SLOTS) - set(slots)
        extra = set(slots) - set(_DELTA_SLOTS)
        if missing or extra:
            raise UsageError(f"bad deformation slots (missing {missing}, extra {extra})")
        self.slots = {k: (slots[k][0], slots[k][1]) for k in _DELTA_SLOTS}

    def __getitem__(self, key):
        return self.slots[key]

    def is_zero(self):
        return all(not p and not q for p, q in self.slots.values())

    def matrix(self):
        """The sparse 6x6 layout, entries as (p, q) pairs."""
        z = (0, 0)
        s = self.slots

        def neg(pq):
            return (-pq[0], -pq[1])

        return [
            [z, s["w01"], s["w02"], s["e00"], s["e10"], s["e20"]],
            [z, z, z, s["e10"], s["e11"], s["e12"]],
            [z, z, z, s["e20"], s["e12"], s["e22"]],
            [z, z, z, z, z, z],
            [z, z, z, neg(s["w01"]), z, z],
            [z, z, z, neg(s["w02"]), z, z],
        ]

    def value(self, x1, x2):
        """Evaluate on a tangent with coframe values (x1, x2), as a matrix."""
        out = np.zeros((6, 6), dtype=complex)
        for i, row in enumerate(self.matrix()):
            for j, (p, q) in enumerate(row):
                if p or q:
                    out[i, j] = complex(p) * x1 + complex(q) * x2
        return out

    def psi_coefficients(self):
        """Cubic coefficients of the induced deformation of the order-4 form."""
        e11, e12, e22 = self.slots["e11"], self.slots["e12"], self.slots["e22"]
        return (
            e11[0],
            e11[1] + 2 * e12[0],
            e22[0] + 2 * e12[1],
            e22[1],
        )

    def chi_coefficients(self):
        """Quadratic coefficients of the induced deformation of the border form."""
        e10, e20 = self.slots["e10"], self.slots["e20"]
        return (e10[0], e10[1] + e20[0], e20[1])


def build_delta(state, inv):
    """Populate the sparse deformation slots from a state over base data.

    A DeformationState is promoted first; a SecondOrderState is used as is.
    """
    s = state.promote(inv) if isinstance(state, DeformationState) else state
    v0 = s.v0
    return DeformationForm(
        {
            "w01": (s.u0 + s.u1, 0),
            "w02": (0, s.u0 + s.u2),
            "e00": (s.w1, s.w2),
            "e10": (v0, s.v2),
            "e20": (s.v1, -v0),
            "e11": (0, s.u2),
            "e12": (s.u0, s.u0),
            "e22": (s.u1, 0),
        }
    )


# === the closed three-coefficient flow ==================================


class FlowDerivative:
    """Rows of (du0, dv1, dw1) in the (w1, w2, w00) coframe."""

    __slots__ = ("u0", "v1", "w1")

    def __init__(self, u0_row, v1_row, w1_row):
        self.u0 = u0_row
        self.v1 = v1_row
        self.w1 = w1_row

    def rate(self, x1, x2, x00):
        """Contract every row with tangent coframe values."""

        def dot(row):
            return row[0] * x1 + row[1] * x2 + row[2] * x00

        return (dot(self.u0), dot(self.v1), dot(self.w1))


def psi_flow_derivative(state, inv, der):
    """Derivative rows of the closed (u0, v1, w1) system over base data.

    der must carry the first covariant derivatives a41, a12, a21.
    """
    u0, v1, w1 = state.u0, state.v1, state.w1
    a1, a2, a3, a4 = inv.a1, inv.a2, inv.a3, inv.a4
    b1, b2, b3 = inv.b1, inv.b2, inv.b3
    fd = der.first
    a41, a12, a21 = fd["a41"], fd["a12"], fd["a21"]

    u_row = (-v1, v1, -u0 * 4 / 3)

    p = u0 * u0 * 3 / 2 + (a3 * 3 / 5 - a4 - a1 - a2 * 8 / 5) * u0 + w1 / 2
    q = -(u0 * u0) * 3 / 2 + (a3 + a4 + a1) * u0 - w1 / 2
    v_row = (p, q, -2 * v1)

    w11 = (
        -2 * u0 * v1
        + (a2 * 22 / 5 - a3 * 12 / 5 + a4 + a1) * v1
        + (24 * b1 - 4 * b2 + 15 * b3 + a41 + a12 - 3 * a21) * u0
    )
    w12 = (
        2 * u0 * v1
        + (a2 * 18 / 5 - a3 * 28 / 5 - a4 - a1) * v1
        + (36 * b1 - 6 * b2 + 26 * b3 + a41 + a12 - 6 * a21) * u0
    )
    w_row = (w11, w12, -w1 * 8 / 3)

    return FlowDerivative(u_row, v_row, w_row)


def universal_integrability_residual(state, inv, der):
    """Left minus right side of the one scalar condition every flow needs.

    Zero for all states exactly when the base admits the full deformation
    family; der must carry first derivatives and the second derivatives of
    the a-row entries a12, a21, a41.
    """
    u0, v1, w1 = state.u0, state.v1, state.w1
    a1, a2, a3, a4 = inv.a1, inv.a2, inv.a3, inv.a4
    b1, b2, b3 = inv.b1, inv.b2, inv.b3
    c1, c2 = inv.c1, inv.c2
    fd = der.first
    sd = der.second

    lhs = (-60 * b1 + 8 * b2 - 42 * b3 - fd["a41"] - fd["a12"] + 10 * fd["a21"]) * v1 + (
        a2 - a3
    ) * w1 * 12 / 5

    linear = (
        -5 * c1
        + 8 * c2
        - 17 * fd["b11"]
        + 10 * fd["b21"]
        - fd["b22"] * 4 / 3
        - fd["b31"] * 26 / 3
        + (a4 * a2 - a4 * a3 + a1 * a2 - a1 * a3) * 32 / 15
        - a3 * a3 * 112 / 25
        + a2 * a2 * 123 / 25
        - a2 * a3 * 86 / 25
        + 3 * a4 * a1
        - sd["a121"] / 3
        + 2 * sd["a211"]
        - sd["a411"] / 3
        - sd["a212"]
        + sd["a122"] / 3
        + sd["a412"] / 3
    )
    rhs = -(a2 - a3) * (u0 * u0) * 44 / 15 + linear * u0
    return lhs - rhs


class ChiConstraintReport:
    """Residuals of the extra constraints for border-preserving flows."""

    __slots__ = ("state_residuals", "base_integrability", "key_residuals")

    def __init__(self, state_residuals, base_integrability, key_residuals):
        self.state_residuals = state_residuals
        self.base_integrability = base_integrability
        self.key_residuals = key_residuals

    def max_residual(self):
        vals = list(self.state_residuals) + [self.base_integrability]
        vals += list(self.key_residuals)
        return max(abs(complex(v)) for v in vals)

    def __repr__(self):
        return (
            f"ChiConstraintReport(state={self.state_residuals!r}, "
            f"base={self.base_integrability!r}, key={self.key_residuals!r})"
        )


def chi_constraints(state, inv, der):
    """Residuals a flow must satisfy to also preserve the border quadratic.

    state_residuals: (v1, w1 - required w1).  base_integrability and the
    key_residuals depend on the base surface only.
    """
    u0 = state.u0
    required_w1 = u0 * (-3 * u0 + 2 * inv.a1 + 2 * inv.a2 + 2 * inv.a4)
    state_res = (state.v1, state.w1 - required_w1)
    base = der.first["a41"] - 4 * inv.b1 + 2 * inv.b2
    gap = inv.a1 - inv.a4
    key = (
        inv.b1,
        der.first["b11"],
        gap * inv.b2,
        gap * (inv.c1 + inv.a1 * inv.a4 - inv.a2 * inv.a2),
    )
    return ChiConstraintReport(state_res, base, key)


def triruled_deformation_system():
    """The deformed connection over the tri-ruled system, symbolically.

    Registers the flow coefficients as fields with their derivative rows
    and returns (ctx, pi); ctx.mc_residual(pi, sample) is exactly zero for
    every sample, which is the closure of the whole flow in one identity.
    """
    base = closed_system("tri-ruled")
    ctx = base.ctx
    a, u0, v1, w1 = Var("a"), Var("u0"), Var("v1"), Var("w1")

    half = Const(Fraction(1, 2))
    ctx.register_field("u0", Fraction(-4, 3), -v1, v1)
    p = Const(Fraction(3, 2)) * u0 * u0 - a * u0 + half * w1
    ctx.register_field("v1", Fraction(-2), p, -p)
    w11 = Const(2) * (a - u0) * v1
    ctx.register_field("w1", Fraction(-8, 3), w11, -w11)

    pi = assemble_reduced_phi(
        OneForm(c1=a - u0),
        OneForm(c2=a - u0),
        OneForm(c1=a * a + w1, c2=a * a + w1),
        OneForm(c1=-v1, c2=-v1),
        OneForm(c1=v1, c2=v1),
        OneForm(c2=Const(-2) * u0),
        OneForm(c1=a + u0, c2=a + u0),
        OneForm(c1=Const(-2) * u0),
    )
    return ctx, pi


# === frame integration ==================================================


def integrate_frame(phi_field, g0, path, step=1e-3):
    """Integrate dg = g . phi along a polyline with classical RK4.

    phi_field(point, direction) must return the 6x6 value of the connection
    on the tangent `direction` at `point`.  path is a sequence of parameter
    points; step is the nominal substep length in parameter distance.
    """
    if step <= 0:
        raise UsageError("step must be positive")
    g = np.array(g0.m if isinstance(g0, SpFrame) else g0, dtype=complex)
    pts = [np.asarray(p, dtype=float) for p in path]
    if len(pts) < 1:
        raise UsageError("path needs at least one point")
    for start, end in zip(pts, pts[1:]):
        seg = end - start
        length = float(np.linalg.norm(seg))
        if length == 0.0:
            continue
        n = max(1, int(np.ceil(length / step)))
        h = 1.0 / n
        for k in range(n):
            t = k * h
            a1 = np.asarray(phi_field(start + t * seg, seg), dtype=complex)
            k1 = g @ a1
            amid = np.asarray(phi_field(start + (t + h / 2) * seg, seg), dtype=complex)
            k2 = (g + (h / 2) * k1) @ amid
            k3 = (g + (h / 2) * k2) @ amid
            a2 = np.asarray(phi_field(start + (t + h) * seg, seg), dtype=complex)
            k4 = (g + h * k3) @ a2
            g = g + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return SpFrame(g)


# === adapted-frame data along lattice lines =============================

# data layout per node: phi_u (36) | phi_v (36) | invariants (9) | a41 a12 a21
_ROW_LEN = 36 + 36 + 9 + 3


def _cheb_nodes(n):
    k = np.arange(n)
    return 0.5 - 0.5 * np.cos(np.pi * k / (n - 1))


def _bary_weights(n):
    w = np.ones(n)
    w[1::2] = -1.0
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


class _LineData:
    """Adapted-frame samples along one axis-parallel segment.

    Nodes sit at Chebyshev points; rows interpolate barycentrically, which
    keeps the flow integrand smooth between the measured nodes.  Roots are
    adapted outward from the anchor so the cubic labels cannot jump along
    the line.
    """

    __slots__ = ("start", "end", "nodes", "weights", "rows", "roots")

    def __init__(self, chart, start, end, order, n, tol, anchor_t, hint):
        self.start = np.asarray(start, dtype=float)
        self.end = np.asarray(end, dtype=float)
        self.nodes = _cheb_nodes(n)
        self.weights = _bary_weights(n)
        self.rows = np.zeros((n, _ROW_LEN), dtype=complex)
        self.roots = [None] * n

        j0 = int(np.argmin(np.abs(self.nodes - anchor_t)))
        order_out = [j0]
        order_out += list(range(j0 - 1, -1, -1)) + list(range(j0 + 1, n))
        for j in order_out:
            if j == j0:
                prev = hint
            elif j < j0:
                prev = self.roots[j + 1]
            else:
                prev = self.roots[j - 1]
            p = self.start + self.nodes[j] * (self.end - self.start)
            frame, inv, der = adapt_frame(
                chart, p[0], p[1], order=order, tol=tol, root_hint=prev, with_second=False
            )
            self.roots[j] = frame.roots
            self.rows[j] = self._pack(frame, inv, der)

    @staticmethod
    def _pack(frame, inv, der):
        row = np.empty(_ROW_LEN, dtype=complex)
        k = 0
        for mat in (frame.phi.u, frame.phi.v):
            for i in range(6):
                for j in range(6):
                    row[k] = mat[i][j].const
                    k += 1
        for name in ("a1", "a2", "a3", "a4", "b1", "b2", "b3", "c1", "c2"):
            row[k] = complex(getattr(inv, name))
            k += 1
        for name in ("a41", "a12", "a21"):
            row[k] = complex(der.first[name])
            k += 1
        return row

    def param_of(self, point):
        span = self.end - self.start
        axis = int(np.argmax(np.abs(span)))
        return float((point[axis] - self.start[axis]) / span[axis])

    def at(self, t):
        d = t - self.nodes
        hit = np.where(np.abs(d) < 1e-14)[0]
        if hit.size:
            return self.rows[hit[0]]
        w = self.weights / d
        return (w @ self.rows) / np.sum(w)

    def roots_near(self, t):
        return self.roots[int(np.argmin(np.abs(self.nodes - t)))]


def _unpack(row):
    phi_u = row[:36].reshape(6, 6)
    phi_v = row[36:72].reshape(6, 6)
    inv = InvariantTuple(*row[72:81])
    der = DerivedInvariants(
        0.0, 0.0, {"a41": row[81], "a12": row[82], "a21": row[83]}, None
    )
    return phi_u, phi_v, inv, der


# === the joint state + frame flow engine ================================


class FlowEngine:
    """Caches adapted-frame lattice lines and runs joint flows over them.

    All flows start at the engine's basepoint with the base adapted frame.
    Paths must be axis-parallel polylines over lines prepared in advance
    (L-shaped paths through any prepared corner).
    """

    def __init__(self, chart, basepoint, order=7, nodes=12, tol=1e-9):
        if order < 7:
            raise UsageError("flow lines need first derivatives, so order >= 7")
        self.chart = chart
        self.base = (float(basepoint[0]), float(basepoint[1]))
        self.order = order
        self.nodes = nodes
        self.tol = tol
        frame, inv, der = adapt_frame(
            chart, self.base[0], self.base[1], order=order, tol=tol, with_second=False
        )
        self.base_frame = frame.frame
        self.base_roots = frame.roots
        self.base_inv = inv
        self.base_der = der
        self._lines = {}
        self.gauge_log = []

    # --- lattice management ------------------------------------------

    def _key(self, axis, fixed):
        return (axis, round(fixed, 10))

    def ensure_line(self, axis, fixed, lo, hi, anchor_coord, hint):
        """Prepare (or reuse) the line {axis coord in [lo, hi]} at fixed.

        axis 0 varies u at v = fixed; axis 1 varies v at u = fixed.  The
        anchor coordinate locates the node adapted first, with `hint` as
        its root labels.
        """
        key = self._key(axis, fixed)
        if key in self._lines:
            line = self._lines[key]
            covered = (
                min(line.start[axis], line.end[axis]) <= lo + 1e-12
                and max(line.start[axis], line.end[axis]) >= hi - 1e-12
            )
            if covered:
                return line
            lo = min(lo, line.start[axis], line.end[axis])
            hi = max(hi, line.start[axis], line.end[axis])
        if hi - lo < 1e-9:
            pad = max(1e-3, abs(hi) * 1e-6)
            lo, hi = lo - pad, hi + pad
        start = [0.0, 0.0]
        end = [0.0, 0.0]
        start[axis], end[axis] = lo, hi
        start[1 - axis] = end[1 - axis] = fixed
        anchor_t = (anchor_coord - lo) / (hi - lo)
        line = _LineData(
            self.chart, start, end, self.order, self.nodes, self.tol, anchor_t, hint
        )
        self._lines[key] = line
        return line

    def line_for(self, axis, fixed):
        try:
            return self._lines[self._key(axis, fixed)]
        except KeyError:
            raise UsageError(f"no prepared line for axis {axis} at {fixed}") from None

    def prepare_targets(self, targets, both_orders=False):
        """Build every lattice line an L-shaped flow to the targets needs."""
        ub, vb = self.base
        us = sorted({float(t[0]) for t in targets})
        vs = sorted({float(t[1]) for t in targets})
        lo_u, hi_u = min(us + [ub]), max(us + [ub])
        lo_v, hi_v = min(vs + [vb]), max(vs + [vb])

        row = self.ensure_line(0, vb, lo_u, hi_u, ub, self.base_roots)
        for u in us:
            hint = row.roots_near(row.param_of((u, vb)))
            self.ensure_line(1, u, lo_v, hi_v, vb, hint)
        if both_orders:
            col = self.ensure_line(1, ub, lo_v, hi_v, vb, self.base_roots)
            for v in vs:
                hint = col.roots_near(col.param_of((ub, v)))
                self.ensure_line(0, v, lo_u, hi_u, ub, hint)
        self._log_corner_gauge(targets)

    def _log_corner_gauge(self, targets):
        # interpolated connection data must agree where lattice lines cross
        ub, vb = self.base
        for u, v in targets:
            try:
                row = self.line_for(0, vb)
                col = self.line_for(1, float(u))
            except UsageError:
                continue
            corner = (float(u), vb)
            ra = row.at(row.param_of(corner))
            rb = col.at(col.param_of(corner))
            self.gauge_log.append(float(np.max(np.abs(ra - rb))))

    # --- the joint right-hand side ------------------------------------

    @staticmethod
    def _rhs(row, seg, y_state, g):
        phi_u, phi_v, inv, der = _unpack(row)
        a_phi = phi_u * seg[0] + phi_v * seg[1]
        x1 = a_phi[1, 0]
        x2 = a_phi[2, 0]
        x00 = a_phi[0, 0]
        state = DeformationState(*y_state)
        flow = psi_flow_derivative(state, inv, der)
        ds = flow.rate(x1, x2, x00)
        delta = build_delta(state, inv).value(x1, x2)
        dg = g @ (a_phi + delta)
        return ds, dg

    def _leg(self, line, t_from, t_to, y_state, g, n_steps):
        seg = (line.end - line.start) * (t_to - t_from)
        h = 1.0 / n_steps
        y = list(y_state)
        for k in range(n_steps):
            t = t_from + (k * h) * (t_to - t_from)
            tm = t_from + ((k + 0.5) * h) * (t_to - t_from)
            te = t_from + ((k + 1.0) * h) * (t_to - t_from)
            row0, rowm, row1 = line.at(t), line.at(tm), line.at(te)

            s1, g1 = self._rhs(row0, seg, y, g)
            y2 = [y[i] + (h / 2) * s1[i] for i in range(3)]
            s2, g2 = self._rhs(rowm, seg, y2, g + (h / 2) * g1)
            y3 = [y[i] + (h / 2) * s2[i] for i in range(3)]
            s3, g3 = self._rhs(rowm, seg, y3, g + (h / 2) * g2)
            y4 = [y[i] + h * s3[i] for i in range(3)]
            s4, g4 = self._rhs(row1, seg, y4, g + h * g3)

            y = [
                y[i] + (h / 6) * (s1[i] + 2 * s2[i] + 2 * s3[i] + s4[i])
                for i in range(3)
            ]
            g = g + (h / 6) * (g1 + 2 * g2 + 2 * g3 + g4)
        return y, g

    def _legs_for(self, target, order):
        ub, vb = self.base
        ut, vt = float(target[0]), float(target[1])
        if order == "hv":
            pts = [(ub, vb), (ut, vb), (ut, vt)]
        elif order == "vh":
            pts = [(ub, vb), (ub, vt), (ut, vt)]
        else:
            raise UsageError("leg order must be 'hv' or 'vh'")
        legs = []
        for a, b in zip(pts, pts[1:]):
            if abs(b[0] - a[0]) < 1e-15 and abs(b[1] - a[1]) < 1e-15:
                continue
            axis = 0 if abs(b[0] - a[0]) > abs(b[1] - a[1]) else 1
            line = self.line_for(axis, a[1 - axis])
            legs.append((line, line.param_of(a), line.param_of(b)))
        return legs

    def flow_to(self, state0, target, order="hv", step=1e-3, rich_tol=1e-9, max_rounds=6):
        """Joint state + frame flow along the L-path to a target.

        Integrates at a given resolution and at double resolution until the
        endpoint difference falls below rich_tol (step-halving control).
        Returns (DeformationState, frame matrix, achieved difference).
        """
        legs = self._legs_for(target, order)
        if isinstance(state0, DeformationState):
            state0 = state0.as_tuple()
        y0 = [complex(s) for s in state0]

        def run(mult):
            y, g = list(y0), self.base_frame.copy()
            for line, ta, tb in legs:
                length = float(
                    np.linalg.norm((line.end - line.start) * (tb - ta))
                )
                n = max(1, int(np.ceil(length / step)) * mult)
                y, g = self._leg(line, ta, tb, y, g, n)
            return y, g

        prev = run(1)
        mult = 2
        for _ in range(max_rounds):
            cur = run(mult)
            diff = max(
                max(abs(a - b) for a, b in zip(prev[0], cur[0])),
                float(np.max(np.abs(prev[1] - cur[1]))),
            )
            if diff < rich_tol:
                return DeformationState(*cur[0]), cur[1], diff
            prev = cur
            mult *= 2
        raise FlowConvergenceError(diff, rich_tol)


# === reconstruction of deformed surfaces ================================


def _projective_gap(p, q):
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    np_ = np.linalg.norm(p)
    nq = np.linalg.norm(q)
    if np_ == 0 or nq == 0:
        return 1.0
    c = abs(np.vdot(p, q)) / (np_ * nq)
    return float(np.sqrt(max(0.0, 1.0 - c * c)))


def _chart_lift(chart, u, v):
    return np.array([j.const for j in chart.components(u, v, order=1)])


_FD5 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0


def _grid_targets(basepoint, halfwidth, n):
    ub, vb = basepoint
    offs = np.linspace(-halfwidth, halfwidth, n)
    return [(ub + du, vb + dv) for du in offs for dv in offs], offs


class ReconstructionResult:
    """Deformed samples plus every diagnostic the flow produced."""

    __slots__ = (
        "basepoint",
        "targets",
        "states",
        "frames",
        "samples",
        "legendrian_residual",
        "psi_comparison",
        "diagnostics",
    )

    def __init__(self, basepoint, targets, states, frames, samples,
                 legendrian_residual, psi_comparison, diagnostics):
        self.basepoint = basepoint
        self.targets = targets
        self.states = states
        self.frames = frames
        self.samples = samples
        self.legendrian_residual = legendrian_residual
        self.psi_comparison = psi_comparison
        self.diagnostics = diagnostics


def _integrability_gate(inv, der, gate_tol):
    probes = {
        "v1": DeformationState(0, 1, 0),
        "w1": DeformationState(0, 0, 1),
        "u0+": DeformationState(1, 0, 0),
        "u0-": DeformationState(-1, 0, 0),
    }
    vals = {
        k: complex(universal_integrability_residual(s, inv, der))
        for k, s in probes.items()
    }
    coeffs = {
        "v1": vals["v1"],
        "w1": vals["w1"],
        "u0_quadratic": (vals["u0+"] + vals["u0-"]) / 2,
        "u0_linear": (vals["u0+"] - vals["u0-"]) / 2,
    }
    worst = max(abs(v) for v in coeffs.values())
    if worst > gate_tol:
        raise IntegrabilityViolationError(
            "base surface does not close the deformation flow "
            f"(worst coefficient {worst:.3e})",
            residual=worst,
        )
    return coeffs


def _measure_center_connection(frames_grid, h):
    """Finite-difference connection value at the center of a 5x5 frame grid."""
    n = len(frames_grid)
    c = n // 2
    gc = frames_grid[c][c]
    ginv = np.linalg.inv(gc)
    du = sum(_FD5[k] * frames_grid[c - 2 + k][c] for k in range(5)) / h
    dv = sum(_FD5[k] * frames_grid[c][c - 2 + k] for k in range(5)) / h
    return ginv @ du, ginv @ dv


def _eta_coefficients(pi_u, pi_v):
    x1u, x2u = pi_u[1, 0], pi_u[2, 0]
    x1v, x2v = pi_v[1, 0], pi_v[2, 0]

    def solve1(coef_u, coef_v, val_u, val_v):
        den = abs(coef_u) ** 2 + abs(coef_v) ** 2
        return (np.conj(coef_u) * val_u + np.conj(coef_v) * val_v) / den

    a1 = solve1(x2u, x2v, pi_u[1, 4], pi_v[1, 4])
    a4 = solve1(x1u, x1v, pi_u[2, 5], pi_v[2, 5])
    m = np.array([[x1u, x2u], [x1v, x2v]])
    a23 = np.linalg.solve(m, np.array([pi_u[1, 5], pi_v[1, 5]]))
    return a1, a23[0], a23[1], a4


def reconstruct_deformed(chart, state0, basepoint, targets=None, halfwidth=0.04,
                         grid_n=5, order=7, nodes=12, step=1e-3, rich_tol=1e-9,
                         gate_tol=1e-6, engine=None):
    """Integrate a deformation over a chart and sample the deformed surface.

    With targets=None a grid_n x grid_n grid around the basepoint is used
    and finite-difference diagnostics (Legendrian residual of the samples,
    measured eta coefficients at the center against the predicted shift)
    are attached.  Raises IntegrabilityViolationError when the base fails
    the closure gate, before any flow runs.
    """
    if not isinstance(state0, DeformationState):
        state0 = DeformationState(*state0)

    gate_frame, gate_inv, gate_der = adapt_frame(
        chart, basepoint[0], basepoint[1], order=max(order, 8), with_second=True
    )
    gate = _integrability_gate(gate_inv, gate_der, gate_tol)

    grid_offsets = None
    if targets is None:
        if grid_n % 2 == 0 or grid_n < 5:
            raise UsageError("grid_n must be odd and at least 5")
        targets, grid_offsets = _grid_targets(basepoint, halfwidth, grid_n)

    if engine is None:
        engine = FlowEngine(chart, basepoint, order=order, nodes=nodes)
    engine.prepare_targets(targets)

    states, frames, samples, rich = [], [], [], []
    for tgt in targets:
        st, g, err = engine.flow_to(state0, tgt, step=step, rich_tol=rich_tol)
        states.append(st)
        frames.append(g)
        samples.append(g[:, 0].copy())
        rich.append(err)

    diagnostics = {
        "gate": gate,
        "richardson": max(rich) if rich else 0.0,
        "gauge": max(engine.gauge_log) if engine.gauge_log else 0.0,
        "sp_residual": max(
            float(np.max(np.abs(g.T @ _J6_NUM @ g - _J6_NUM))) for g in frames
        ),
    }

    legendrian_residual = None
    psi_comparison = None
    if grid_offsets is not None:
        n = len(grid_offsets)
        h = float(grid_offsets[1] - grid_offsets[0])
        fgrid = [[frames[i * n + j] for j in range(n)] for i in range(n)]
        sgrid = [[fgrid[i][j][:, 0] for j in range(n)] for i in range(n)]
        ngrid = [[p / np.linalg.norm(p) for p in row] for row in sgrid]
        c = n // 2
        center = ngrid[c][c]
        du = sum(_FD5[k] * ngrid[c - 2 + k][c] for k in range(5)) / h
        dv = sum(_FD5[k] * ngrid[c][c - 2 + k] for k in range(5)) / h
        legendrian_residual = max(
            abs(symplectic_pairing(center, du)) / max(np.linalg.norm(du), 1e-300),
            abs(symplectic_pairing(center, dv)) / max(np.linalg.norm(dv), 1e-300),
        )

        pi_u, pi_v = _measure_center_connection(fgrid, h)
        measured = _eta_coefficients(pi_u, pi_v)
        center_state = states[c * n + c]
        shift = deformation_invariant_shift(center_state)
        base_a = (gate_inv.a1, gate_inv.a2, gate_inv.a3, gate_inv.a4)
        predicted = tuple(complex(b + s) for b, s in zip(base_a, shift))
        psi_measured = (
            measured[0] + 2 * measured[1],
            2 * measured[2] + measured[3],
        )
        psi_base = (
            complex(base_a[0] + 2 * base_a[1]),
            complex(2 * base_a[2] + base_a[3]),
        )
        psi_comparison = {
            "eta_measured": tuple(complex(x) for x in measured),
            "eta_predicted": predicted,
            "eta_gap": max(
                abs(complex(m) - complex(p)) for m, p in zip(measured, predicted)
            ),
            "psi_measured": tuple(complex(x) for x in psi_measured),
            "psi_base": psi_base,
        }

    return ReconstructionResult(
        tuple(basepoint),
        list(targets),
        states,
        frames,
        samples,
        legendrian_residual,
        psi_comparison,
        diagnostics,
    )


def flow_path_independence(chart, state0, basepoint, target, order=7, nodes=12,
                           step=1e-3, rich_tol=1e-9, engine=None):
    """Flow the same state along both L-paths to a target and compare.

    Returns (state_hv, state_vh, state gap, frame gap).  A flat deformation
    system makes both gaps vanish up to integration error.
    """
    if engine is None:
        engine = FlowEngine(chart, basepoint, order=order, nodes=nodes)
    engine.prepare_targets([target], both_orders=True)
    if not isinstance(state0, DeformationState):
        state0 = DeformationState(*state0)
    s_hv, g_hv, _ = engine.flow_to(state0, target, order="hv", step=step, rich_tol=rich_tol)
    s_vh, g_vh, _ = engine.flow_to(state0, target, order="vh", step=step, rich_tol=rich_tol)
    state_gap = max(
        abs(a - b) for a, b in zip(s_hv.as_tuple(), s_vh.as_tuple())
    )
    frame_gap = float(np.max(np.abs(g_hv - g_vh)))
    return s_hv, s_vh, state_gap, frame_gap
