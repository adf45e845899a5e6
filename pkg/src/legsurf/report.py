"""Deterministic verification reports.

Every command of the batch front end assembles one VerificationReport: a
list of check records plus enough bookkeeping (command line, input digest,
wall time) to replay the run. Serialization is byte-deterministic for a
fixed report object, so reports can be diffed or hashed in CI.

Records carry an ``anchor``: a short stable name for the mathematical
statement a check verifies, or the literal ``"plumbing"`` for checks that
only exercise infrastructure (parsing, determinism, exit codes).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .rationals import GaussianRational

SCHEMA_VERSION = 1


def _encode_value(x):
    """Map a residual/tolerance/payload value to a JSON-stable form.

    Exact rationals never pass through floating point: Fraction becomes a
    "p/q" string and GaussianRational a [re, im] pair of such strings.
    Complex floats become [re, im] pairs of floats.
    """
    if x is None or isinstance(x, (bool, int, str)):
        return x
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, GaussianRational):
        return [_encode_value(x.re), _encode_value(x.im)]
    if isinstance(x, complex):
        return [float(x.real), float(x.imag)]
    if isinstance(x, float):
        return x
    if isinstance(x, dict):
        return {str(k): _encode_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_encode_value(v) for v in x]
    if hasattr(x, "item"):  # numpy scalars
        return _encode_value(x.item())
    return str(x)


@dataclass
class CheckRecord:
    name: str
    anchor: str = "plumbing"
    status: str = "pass"
    residual: object = None
    tolerance: object = None

    def as_dict(self):
        return {
            "name": self.name,
            "anchor": self.anchor,
            "status": self.status,
            "residual": _encode_value(self.residual),
            "tolerance": _encode_value(self.tolerance),
        }


@dataclass
class VerificationReport:
    command: str
    inputs: dict = field(default_factory=dict)
    records: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def add(self, name, *, ok, anchor="plumbing", residual=None, tolerance=None):
        status = "pass" if ok else "fail"
        rec = CheckRecord(name, anchor, status, residual, tolerance)
        self.records.append(rec)
        return rec

    def add_error(self, name, message, *, anchor="plumbing"):
        rec = CheckRecord(name, anchor, "error", residual=None, tolerance=None)
        self.records.append(rec)
        self.data.setdefault("errors", {})[name] = str(message)
        return rec

    @property
    def passed(self):
        return all(r.status == "pass" for r in self.records)

    def inputs_digest(self):
        blob = json.dumps(_encode_value(self.inputs), sort_keys=True,
                          separators=(",", ":")).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()

    def as_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "inputs_digest": self.inputs_digest(),
            "records": [r.as_dict() for r in self.records],
            "data": _encode_value(self.data),
            "wall_time": round(self.wall_time, 6),
            "passed": self.passed,
        }


def _fmt_quantity(x):
    if x is None:
        return "-"
    enc = _encode_value(x)
    if isinstance(enc, float):
        return f"{enc:.3e}"
    if isinstance(enc, list) and len(enc) == 2 and all(
            isinstance(v, float) for v in enc):
        return f"{complex(enc[0], enc[1]):.3e}"
    return str(enc)


def emit_report(report, format="json"):
    """Serialize a report to bytes. format is "json" or "text"."""
    if format == "json":
        doc = json.dumps(report.as_dict(), sort_keys=True,
                         separators=(",", ":"), allow_nan=False)
        return (doc + "\n").encode("utf-8")
    if format == "text":
        lines = [f"# {report.command}"]
        for r in report.records:
            mark = "[ok]" if r.status == "pass" else r.status.upper()
            line = f"{mark} {r.name}"
            if r.residual is not None:
                line += f"  residual={_fmt_quantity(r.residual)}"
            if r.tolerance is not None:
                line += f" (tol {_fmt_quantity(r.tolerance)})"
            if r.anchor != "plumbing":
                line += f"  [{r.anchor}]"
            lines.append(line)
        n_fail = sum(1 for r in report.records if r.status != "pass")
        verdict = "all checks passed" if n_fail == 0 else f"{n_fail} check(s) failed"
        lines.append(f"# {len(report.records)} checks, {verdict}, "
                     f"{report.wall_time:.2f}s")
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise ValueError(f"unknown report format {format!r}")
