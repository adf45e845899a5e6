"""Batch command-line front end.

Subcommands
    surface eval               evaluate a map at a projective point
    surface check-legendrian   exact contact check for a map
    frame invariants           reduced invariants of a chart at a point
    classify                   structure flags and deformability bound
    closure verify <system>    exact structure-equation closure of a model
    deform flow                flow a deformation state and cross-check paths
    examples verify-all        run the whole example battery

Every run emits a VerificationReport (text by default, --format json for
machine consumption). Exit code 0 means every check passed, 1 means some
check failed or errored, 2 means the invocation itself was malformed.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from fractions import Fraction

from . import coframe, deform, frames, surfaces
from .classify import classify as classify_tuple
from .errors import LegsurfError, UsageError
from .report import VerificationReport, emit_report

# === family registries ===

_MAP_FAMILIES = {
    "flat": surfaces.flat_map,
    "flat-quartic": surfaces.flat_quartic_map,
    "trig": surfaces.trig_map,
    "degenerate-web": surfaces.degenerate_web_map,
    "non-legendrian": surfaces.non_legendrian_map,
}

_CHART_FAMILIES = {
    "flat": surfaces.chart_flat,
    "flat-quartic": surfaces.chart_flat_quartic,
    "tri-ruled": surfaces.chart_tri_ruled,
    "trig": lambda: surfaces.chart_trig(1, 1),
    "degenerate-web": surfaces.chart_degenerate_web,
    "non-legendrian": surfaces.chart_non_legendrian,
}


def _load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _resolve_map(args):
    if args.config:
        return surfaces.map_from_config(_load_config(args.config))
    fam = args.family or "flat"
    try:
        return _MAP_FAMILIES[fam]()
    except KeyError:
        raise UsageError(
            f"unknown family {fam!r}; choose from {sorted(_MAP_FAMILIES)}"
        ) from None


def _resolve_chart(args):
    if args.config:
        return surfaces.map_from_config(_load_config(args.config)).chart()
    fam = args.family or "flat"
    try:
        return _CHART_FAMILIES[fam]()
    except KeyError:
        raise UsageError(
            f"unknown family {fam!r}; choose from {sorted(_CHART_FAMILIES)}"
        ) from None


def _parse_tuple(text, n, what):
    if not text:
        raise UsageError(f"--{what} is required here")
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != n:
        raise UsageError(f"--{what} needs {n} comma-separated values")
    try:
        return tuple(Fraction(p) for p in parts)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--{what} values must be rational numbers") from None


def _poly_height(poly):
    if not poly:
        return Fraction(0)
    return max(abs(complex(v)) for v in poly.c.values())


# === subcommand handlers ===


def _cmd_surface_eval(args, rep):
    map6 = _resolve_map(args)
    x, y, z = _parse_tuple(args.point, 3, "point")
    rep.inputs["point"] = [str(x), str(y), str(z)]
    values = map6.evaluate(x, y, z)
    rep.data["degree"] = map6.degree
    rep.data["pair_radicands"] = list(map6.pair_radicands)
    rep.data["components"] = [str(v) for v in values]
    if not args.exact:
        rep.data["numeric"] = [complex(v) for v in map6.numeric(x, y, z)]
    rep.add("evaluate", ok=any(values), anchor="plumbing",
            residual=None, tolerance=None)
    if not any(values):
        rep.data.setdefault("errors", {})["evaluate"] = (
            "all six components vanish: the point is a base point"
        )


def _cmd_check_legendrian(args, rep):
    map6 = _resolve_map(args)
    rx, ry = surfaces.legendrian_residual(map6)
    ok = not rx and not ry
    worst = max(_poly_height(rx), _poly_height(ry))
    rep.add("legendrian-pullback", ok=ok, anchor="contact-pullback",
            residual=worst if not ok else Fraction(0), tolerance="exact")


def _cmd_frame_invariants(args, rep):
    chart = _resolve_chart(args)
    u, v = (float(t) for t in _parse_tuple(args.point, 2, "point"))
    tol = args.tol if args.tol is not None else 1e-9
    rep.inputs["point"] = [u, v]
    inv = frames.invariants_at(chart, u, v, tol=tol)
    names = ("a1", "a2", "a3", "a4", "b1", "b2", "b3", "c1", "c2")
    rep.data["invariants"] = {k: complex(getattr(inv, k)) for k in names}
    rep.data["fundamental_forms"] = [
        complex(t) for t in frames.fundamental_forms(inv.a1, inv.a2, inv.a3, inv.a4)
    ]
    rep.add("web-invariants", ok=True, anchor="reduced-invariants",
            residual=max(abs(complex(getattr(inv, k))) for k in names),
            tolerance=None)


def _cmd_classify(args, rep):
    chart = _resolve_chart(args)
    u, v = (float(t) for t in _parse_tuple(args.point, 2, "point"))
    tol = args.tol if args.tol is not None else 1e-7
    rep.inputs["point"] = [u, v]
    _, inv, der = frames.adapt_frame(chart, u, v, order=7, with_second=False)
    verdict = classify_tuple(inv, der, tol=tol)
    rep.data["classification"] = verdict.as_dict()
    rep.add("classification", ok=verdict.consistent, anchor="web-structure",
            residual=None, tolerance=tol)


def _cmd_closure_verify(args, rep):
    system = coframe.closed_system(args.system)
    n = args.points if args.points else 20
    rng = random.Random(args.seed)
    rep.inputs["system"] = args.system
    rep.inputs["samples"] = n
    worst = 0.0
    clean = True
    for _ in range(n):
        sample = system.sampler(rng, exact=True)
        res = system.ctx.mc_residual(system.phi, sample, exact=True)
        if not coframe.residual_is_zero(res):
            clean = False
            worst = max(worst, coframe.residual_max(res))
    rep.add(f"closure:{args.system}", ok=clean, anchor="structure-closure",
            residual=Fraction(0) if clean else worst, tolerance="exact")
    d2_clean = True
    sample = system.sampler(random.Random(args.seed + 1), exact=True)
    for name in system.checkable_fields:
        triple = system.ctx.d_squared_check(name, sample, exact=True)
        if any(triple):
            d2_clean = False
    rep.add(f"closure-d2:{args.system}", ok=d2_clean, anchor="structure-closure",
            residual=Fraction(0) if d2_clean else None, tolerance="exact")
    if system.note:
        rep.data["note"] = system.note


def _cmd_deform_flow(args, rep):
    fam = args.family or "trig"
    args.family = fam
    chart = _resolve_chart(args)
    base = tuple(float(t) for t in _parse_tuple(args.point or "0.4,0.9", 2, "point"))
    target = tuple(float(t) for t in _parse_tuple(args.target or "0.43,0.93", 2, "target"))
    u0, v1, w1 = (float(t) for t in _parse_tuple(args.state or "0.1,0,-0.13", 3, "state"))
    tol = args.tol if args.tol is not None else 1e-7
    rep.inputs.update({"base": list(base), "target": list(target),
                       "state": [u0, v1, w1]})

    engine = deform.FlowEngine(chart, base, nodes=args.nodes)
    state = deform.DeformationState(u0, v1, w1)
    s_hv, s_vh, state_gap, frame_gap = deform.flow_path_independence(
        chart, state, base, target, engine=engine
    )
    rep.data["state_hv"] = [complex(t) for t in s_hv.as_tuple()]
    rep.data["state_vh"] = [complex(t) for t in s_vh.as_tuple()]
    rep.add("flow-path-independence", ok=state_gap <= tol and frame_gap <= tol,
            anchor="deformation-flow", residual=max(state_gap, frame_gap),
            tolerance=tol)

    zero = deform.DeformationState(0.0, 0.0, 0.0)
    _, g_end, _ = engine.flow_to(zero, target)
    gap = deform._projective_gap(g_end[:, 0], deform._chart_lift(chart, *target))
    rep.add("flow-base-reproduction", ok=gap <= tol,
            anchor="deformation-flow", residual=gap, tolerance=tol)


# === the example battery ===


def _battery(args, rep):
    tol = args.tol if args.tol is not None else 1e-8
    rng = random.Random(args.seed)

    def guard(name, anchor, fn):
        try:
            fn()
        except LegsurfError as exc:
            rep.add_error(name, exc, anchor=anchor)

    # exact contact checks for the shipped maps and two family draws
    from .polynomials import BinaryForm

    def _random_form(m):
        while True:
            coeffs = {k: rng.randint(-4, 4) for k in range(m + 1)}
            f = BinaryForm(m, coeffs)
            if not f:
                continue
            try:
                return f, surfaces.make_flat_family(m, {m: f})
            except LegsurfError:
                continue

    maps = [
        ("flat", surfaces.flat_map()),
        ("flat-quartic", surfaces.flat_quartic_map()),
        ("trig", surfaces.trig_map()),
        ("trig-2-2", surfaces.make_trig_family(2, 2)),
    ]
    _, drawn = _random_form(3 + rng.randrange(3))
    maps.append((f"flat-family-m{drawn.degree}", drawn))
    for name, m6 in maps:
        def check(m6=m6, name=name):
            ok = surfaces.is_exactly_legendrian(m6)
            rep.add(f"legendrian:{name}", ok=ok, anchor="contact-pullback",
                    residual=Fraction(0) if ok else 1, tolerance="exact")
        guard(f"legendrian:{name}", "contact-pullback", check)

    # invariants: flat chart vanishes, half-angle chart is the constant model
    def flat_invariants():
        chart = surfaces.chart_flat()
        worst = 0.0
        for _ in range(args.points or 5):
            u = rng.uniform(-1.5, 1.5)
            v = rng.uniform(-1.5, 1.5)
            inv = frames.invariants_at(chart, u, v)
            worst = max(worst, max(abs(complex(getattr(inv, k)))
                                   for k in ("a1", "a2", "a3", "a4",
                                             "b1", "b2", "b3", "c1", "c2")))
        rep.add("invariants-vanish:flat", ok=worst <= tol,
                anchor="reduced-invariants", residual=worst, tolerance=tol)
    guard("invariants-vanish:flat", "reduced-invariants", flat_invariants)

    def trig_pattern():
        chart = surfaces.chart_trig(1, 1)
        worst = 0.0
        for u, v in ((0.4, 0.9), (0.7, 0.3)):
            inv = frames.invariants_at(chart, u, v)
            worst = max(
                worst,
                abs(complex(inv.a1)), abs(complex(inv.a4)),
                abs(complex(inv.a2) + 0.5), abs(complex(inv.a3) + 0.5),
                abs(complex(inv.b1)), abs(complex(inv.b2)), abs(complex(inv.b3)),
                abs(complex(inv.c1) - 0.25), abs(complex(inv.c2) - 0.25),
            )
        rep.add("invariants-constant:trig", ok=worst <= tol,
                anchor="tri-ruled-model", residual=worst, tolerance=tol)
    guard("invariants-constant:trig", "tri-ruled-model", trig_pattern)

    # classification verdicts
    def verdicts():
        _, inv, der = frames.adapt_frame(surfaces.chart_flat(), 0.3, -0.8,
                                         order=7, with_second=False)
        flat = classify_tuple(inv, der)
        _, inv2, der2 = frames.adapt_frame(surfaces.chart_trig(1, 1), 0.4, 0.9,
                                           order=7, with_second=False)
        tri = classify_tuple(inv2, der2)
        ok = (flat.flat and flat.psi_deformability == 3
              and tri.tri_ruled and tri.isothermal and not tri.flat)
        rep.add("classification:examples", ok=ok, anchor="web-structure",
                residual=None, tolerance=None)
    guard("classification:examples", "web-structure", verdicts)

    # exact closure of the six reduced models
    for name in ("psi-null", "tri-ruled", "d0", "d", "s0", "s"):
        def closure(name=name):
            system = coframe.closed_system(name)
            clean = True
            for _ in range(3):
                sample = system.sampler(rng, exact=True)
                res = system.ctx.mc_residual(system.phi, sample, exact=True)
                clean = clean and coframe.residual_is_zero(res)
            rep.add(f"closure:{name}", ok=clean, anchor="structure-closure",
                    residual=Fraction(0) if clean else None, tolerance="exact")
        guard(f"closure:{name}", "structure-closure", closure)

    # blow-up divisors sweep lines, and the lines land where they should
    def blowups():
        ok = True
        for fam, m6 in (("flat", surfaces.flat_map()), ("tri-ruled", surfaces.trig_map())):
            for chart in surfaces.blowup_charts(fam):
                ok = ok and surfaces.blowup_limit(m6, chart).is_line()
        rep.add("blowup-divisors", ok=ok, anchor="base-point-resolution",
                residual=None, tolerance="exact")
    guard("blowup-divisors", "base-point-resolution", blowups)

    def line_images():
        ok = True
        m6 = surfaces.trig_map()
        for line in ((0, 0, 1), (1, 0, 0), (0, 1, 0)):
            ok = ok and surfaces.line_image_check(m6, line).is_line
        rep.add("line-images:trig", ok=ok, anchor="coordinate-lines",
                residual=None, tolerance="exact")
    guard("line-images:trig", "coordinate-lines", line_images)

    # defining relations of the two cubic images
    def relations():
        flat_res = surfaces.relation_residuals(surfaces.flat_map(), "flat")
        cone_res = surfaces.relation_residuals(surfaces.trig_map(), "tri-ruled")
        ok = not any(flat_res.values()) and not any(cone_res.values())
        printed = surfaces.relation_residuals(surfaces.flat_map(), "flat",
                                              printed_variant=True)
        ok = ok and bool(printed["R1"])
        rep.add("image-relations", ok=ok, anchor="image-ideal",
                residual=Fraction(0) if ok else None, tolerance="exact")
    guard("image-relations", "image-ideal", relations)

    # the half-angle model agrees with the rational one
    def certificate():
        cert = surfaces.trig_vs_birational(1, 1, points=10)
        rep.add("trig-vs-birational", ok=cert.immersion and cert.points_checked >= 10,
                anchor="model-equivalence", residual=None, tolerance=None)
    guard("trig-vs-birational", "model-equivalence", certificate)

    def de_moivre():
        ok = not any(surfaces.de_moivre_identity_residual(m) for m in range(2, 9))
        rep.add("de-moivre", ok=ok, anchor="angle-multiplication",
                residual=Fraction(0) if ok else 1, tolerance="exact")
    guard("de-moivre", "angle-multiplication", de_moivre)

    # deformation algebra: matched states kill the cubic form exactly
    def delta_exact():
        inv = frames.InvariantTuple(*[Fraction(0)] * 9)
        state = deform.DeformationState(Fraction(3, 7), Fraction(1, 5), Fraction(-2, 3))
        delta = deform.build_delta(state, inv)
        ok = all(c == 0 for c in delta.psi_coefficients())
        ctr_inv = frames.InvariantTuple(
            Fraction(0), Fraction(1), Fraction(0), Fraction(0),
            Fraction(0), Fraction(0), Fraction(0), Fraction(0), Fraction(0),
        )
        ctr_der = frames.DerivedInvariants(
            0, 0,
            {k: Fraction(0) for k in ("a12", "a21", "a41", "b11", "b21",
                                      "b22", "b31", "c11", "c21", "c22")},
            {k: Fraction(0) for k in ("a121", "a122", "a211", "a212",
                                      "a411", "a412")},
        )
        ctr_state = deform.DeformationState(Fraction(0), Fraction(0), Fraction(1))
        resid = deform.universal_integrability_residual(ctr_state, ctr_inv, ctr_der)
        ok = ok and resid == Fraction(12, 5)
        rep.add("deformation-delta", ok=ok, anchor="deformation-algebra",
                residual=Fraction(0) if ok else resid, tolerance="exact")
    guard("deformation-delta", "deformation-algebra", delta_exact)


def _cmd_examples_verify_all(args, rep):
    _battery(args, rep)


# === argument parsing and dispatch ===


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None,
                        help="override the command's default tolerance")
    common.add_argument("--exact", action="store_true",
                        help="force exact arithmetic where a float mode exists")
    common.add_argument("--points", type=int, default=None, metavar="N",
                        help="sample count for randomized checks")
    common.add_argument("--seed", type=int, default=0, metavar="S",
                        help="seed for randomized checks")
    common.add_argument("--format", choices=("json", "text"), default="text",
                        help="report format")
    common.add_argument("--family", default=None,
                        help="named example family (flat, flat-quartic, trig, "
                             "tri-ruled, degenerate-web, non-legendrian)")
    common.add_argument("--config", default=None, metavar="FILE",
                        help="JSON surface description instead of --family")
    common.add_argument("--point", default=None,
                        help="comma-separated point coordinates")

    p = argparse.ArgumentParser(prog="legsurf", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="group", metavar="<command>")

    surface = sub.add_parser("surface", help="evaluate and test maps")
    ssub = surface.add_subparsers(dest="cmd", metavar="<subcommand>")
    ssub.add_parser("eval", parents=[common],
                    help="exact components at a projective point")
    ssub.add_parser("check-legendrian", parents=[common],
                    help="exact contact condition for the whole map")

    frame = sub.add_parser("frame", help="adapted-frame computations")
    fsub = frame.add_subparsers(dest="cmd", metavar="<subcommand>")
    fsub.add_parser("invariants", parents=[common],
                    help="reduced invariants at a chart point")

    sub.add_parser("classify", parents=[common],
                   help="structure flags and deformability bound at a point")

    closure = sub.add_parser("closure", help="structure-equation models")
    csub = closure.add_subparsers(dest="cmd", metavar="<subcommand>")
    verify = csub.add_parser("verify", parents=[common],
                             help="exact closure of one reduced model")
    verify.add_argument("system",
                        help="model name: psi-null, tri-ruled, d0, d, s0, s")

    dgrp = sub.add_parser("deform", help="second-order deformations")
    dsub = dgrp.add_subparsers(dest="cmd", metavar="<subcommand>")
    flow = dsub.add_parser("flow", parents=[common],
                           help="integrate a deformation state between points")
    flow.add_argument("--target", default=None,
                      help="flow endpoint, comma-separated chart coordinates")
    flow.add_argument("--state", default=None,
                      help="initial state u0,v1,w1")
    flow.add_argument("--nodes", type=int, default=12,
                      help="interpolation nodes per coordinate line")

    ex = sub.add_parser("examples", help="bundled example surfaces")
    esub = ex.add_subparsers(dest="cmd", metavar="<subcommand>")
    esub.add_parser("verify-all", parents=[common],
                    help="run every bundled exactness and invariant check")

    return p


_HANDLERS = {
    ("surface", "eval"): _cmd_surface_eval,
    ("surface", "check-legendrian"): _cmd_check_legendrian,
    ("frame", "invariants"): _cmd_frame_invariants,
    ("classify", None): _cmd_classify,
    ("closure", "verify"): _cmd_closure_verify,
    ("deform", "flow"): _cmd_deform_flow,
    ("examples", "verify-all"): _cmd_examples_verify_all,
}


def run_command(argv):
    """Parse argv, run the subcommand, and return (exit code, report)."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed usage; normalize its code
        return (0 if exc.code == 0 else 2), None
    key = (args.group, getattr(args, "cmd", None))
    handler = _HANDLERS.get(key)
    if handler is None:
        parser.print_usage(sys.stderr)
        return 2, None

    name = " ".join(t for t in key if t)
    rep = VerificationReport(command=name)
    rep.inputs["argv"] = list(argv)
    start = time.perf_counter()
    try:
        handler(args, rep)
    except UsageError as exc:
        print(f"legsurf: {exc}", file=sys.stderr)
        return 2, None
    except LegsurfError as exc:
        rep.add_error(name, exc)
    rep.wall_time = time.perf_counter() - start
    payload = emit_report(rep, format=args.format)
    sys.stdout.write(payload.decode("utf-8"))
    return (0 if rep.passed else 1), rep


def main(argv=None):
    code, _ = run_command(sys.argv[1:] if argv is None else list(argv))
    return code


if __name__ == "__main__":
    sys.exit(main())
