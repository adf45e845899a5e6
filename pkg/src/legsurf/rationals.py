"""Exact Gaussian-rational arithmetic.

A GaussianRational is re + im*i with both parts fractions.Fraction. It mixes
freely with int and Fraction operands, supports exact division, and converts
to complex on demand. All identity checks in the exact pipeline bottom out
here.
"""

from fractions import Fraction

_I_POW = ((1, 0), (0, 1), (-1, 0), (0, -1))


def _coerce(x):
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussianRational(x, 0)
    return None


class GaussianRational:
    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    # --- constructors -------------------------------------------------

    @classmethod
    def i(cls):
        return cls(0, 1)

    @classmethod
    def i_power(cls, k):
        """i**k for integer k (used by the de Moivre prefactors)."""
        re, im = _I_POW[k % 4]
        return cls(re, im)

    @classmethod
    def parse(cls, text):
        """Parse 'p/q' or 'p/q+r/s*i' style strings (whitespace tolerated)."""
        s = text.replace(" ", "")
        if s.endswith("i"):
            body = s[:-1].rstrip("*")
            # split the imaginary tail off the real head, if any
            for k in range(len(body) - 1, 0, -1):
                if body[k] in "+-" and body[k - 1] not in "+-/*":
                    return cls(Fraction(body[:k]), Fraction(body[k:] or "1"))
            if body in ("", "+"):
                return cls(0, 1)
            if body == "-":
                return cls(0, -1)
            return cls(0, Fraction(body))
        return cls(Fraction(s), 0)

    # --- ring operations ----------------------------------------------

    def __add__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __truediv__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero GaussianRational")
        return GaussianRational(
            (self.re * o.re + self.im * o.im) / n,
            (self.im * o.re - self.re * o.im) / n,
        )

    def __rtruediv__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise TypeError("only nonnegative integer powers")
        out = GaussianRational(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conj(self):
        return GaussianRational(self.re, -self.im)

    # --- comparisons / conversions --------------------------------------

    def __eq__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __abs__(self):
        return abs(complex(self))

    def __repr__(self):
        if not self.im:
            return f"{self.re}"
        if not self.re:
            return f"{self.im}*i"
        sign = "+" if self.im >= 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}*i"

    def json_value(self):
        """Stable string form used by the report emitters."""
        return repr(self)


def as_exact(x):
    """Coerce int/Fraction/GaussianRational to GaussianRational; reject floats."""
    o = _coerce(x)
    if o is None:
        raise TypeError(f"cannot treat {type(x).__name__} as exact rational")
    return o
