"""Coefficient scalars: exact Gaussian rationals adjoined sqrt(2), or complex floats.

The exact field is Q(i, sqrt2).  Elements are ``Ex`` instances holding four
rationals (a, b, c, d) for (a + b*sqrt2) + (c + d*sqrt2)*i.  The sqrt2 part is
zero almost everywhere; it exists so that the Cayley-transform constructions
(z/sqrt(2), rotation witnesses at angle pi/4, ...) stay exact.

Floats are plain Python ``complex``.  A "scalar" anywhere in this package is
``Ex | complex``; the field tag strings are ``"exact"`` and ``"f64"``.
"""

from __future__ import annotations

from fractions import Fraction

try:  # gmpy2.mpq is drop-in and much faster for dense rational work
    from gmpy2 import mpq as _mpq

    def _Q(x=0, y=None):
        if isinstance(x, Fraction):
            return _mpq(x.numerator, x.denominator)
        return _mpq(x) if y is None else _mpq(x, y)

except ImportError:  # pragma: no cover
    _Q = Fraction

Q0 = _Q(0)
Q1 = _Q(1)
Q2 = _Q(2)

EXACT = "exact"
F64 = "f64"
FIELDS = (EXACT, F64)

_SQRT2 = 2 ** 0.5


class Ex:
    """Element of Q(i, sqrt2), immutable."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a=0, b=0, c=0, d=0):
        object.__setattr__(self, "a", _Q(a))
        object.__setattr__(self, "b", _Q(b))
        object.__setattr__(self, "c", _Q(c))
        object.__setattr__(self, "d", _Q(d))

    def __setattr__(self, *_):
        raise AttributeError("Ex is immutable")

    # -- ring operations -------------------------------------------------
    def __add__(self, o):
        o = as_exact(o)
        return Ex(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)

    __radd__ = __add__

    def __neg__(self):
        return Ex(-self.a, -self.b, -self.c, -self.d)

    def __sub__(self, o):
        return self + (-as_exact(o))

    def __rsub__(self, o):
        return as_exact(o) + (-self)

    def __mul__(self, o):
        o = as_exact(o)
        # (re1 + im1 i)(re2 + im2 i) over the real subring Q(sqrt2)
        a1, b1, c1, d1 = self.a, self.b, self.c, self.d
        a2, b2, c2, d2 = o.a, o.b, o.c, o.d
        # real parts: re1*re2 - im1*im2
        ra = a1 * a2 + 2 * b1 * b2 - (c1 * c2 + 2 * d1 * d2)
        rb = a1 * b2 + b1 * a2 - (c1 * d2 + d1 * c2)
        # imaginary: re1*im2 + im1*re2
        ia = a1 * c2 + 2 * b1 * d2 + c1 * a2 + 2 * d1 * b2
        ib = a1 * d2 + b1 * c2 + c1 * b2 + d1 * a2
        return Ex(ra, rb, ia, ib)

    __rmul__ = __mul__

    def inverse(self):
        # 1/z = conj(z) / |z|^2 with |z|^2 in Q(sqrt2)
        na, nb = _r_mul(self.a, self.b, self.a, self.b)
        ma, mb = _r_mul(self.c, self.d, self.c, self.d)
        ia, ib = _r_inv(na + ma, nb + mb)
        ra, rb = _r_mul(self.a, self.b, ia, ib)
        ca, cb = _r_mul(self.c, self.d, ia, ib)
        return Ex(ra, rb, -ca, -cb)

    def __truediv__(self, o):
        return self * as_exact(o).inverse()

    def __rtruediv__(self, o):
        return as_exact(o) * self.inverse()

    # -- structure -------------------------------------------------------
    def conjugate(self):
        return Ex(self.a, self.b, -self.c, -self.d)

    def __eq__(self, o):
        if isinstance(o, Ex):
            return (self.a, self.b, self.c, self.d) == (o.a, o.b, o.c, o.d)
        if isinstance(o, (int, Fraction)):
            return self == as_exact(o)
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.c, self.d))

    def __bool__(self):
        return bool(self.a or self.b or self.c or self.d)

    def is_real(self):
        return not (self.c or self.d)

    def is_rational(self):
        return not (self.b or self.c or self.d)

    @property
    def real(self):
        return float(self.a) + float(self.b) * _SQRT2

    @property
    def imag(self):
        return float(self.c) + float(self.d) * _SQRT2

    def __complex__(self):
        return complex(self.real, self.imag)

    def __repr__(self):
        return f"Ex({self.a},{self.b},{self.c},{self.d})"

    def __str__(self):
        def part(a, b):
            out = []
            if a:
                out.append(str(a))
            if b:
                out.append(f"{b}*sqrt2" if b != 1 else "sqrt2")
            return "+".join(out) or "0"

        re, im = part(self.a, self.b), part(self.c, self.d)
        if im == "0":
            return re
        if re == "0":
            return f"({im})*i"
        return f"{re}+({im})*i"


# -- real subring Q(sqrt2) helpers on (a, b) pairs -----------------------

def _r_mul(a1, b1, a2, b2):
    return a1 * a2 + 2 * b1 * b2, a1 * b2 + b1 * a2


def _r_inv(a, b):
    den = a * a - 2 * b * b
    if not den:
        raise ZeroDivisionError("zero element of Q(sqrt2)")
    return a / den, -b / den


def rational_sqrt(q):
    """Exact square root of a nonnegative rational, or None."""
    q = _Q(q)
    if q < 0:
        return None
    num, den = int(q.numerator), int(q.denominator)
    rn, rd = _isqrt(num), _isqrt(den)
    if rn is None or rd is None:
        return None
    return _Q(rn, rd)


def _isqrt(n):
    if n < 0:
        return None
    r = int(n ** 0.5)
    for cand in (r - 1, r, r + 1, r + 2):
        if cand >= 0 and cand * cand == n:
            return cand
    return None


def _r_sqrt(a, b):
    """sqrt in Q(sqrt2) of (a + b sqrt2), principal (nonnegative); None if absent."""
    if b == 0:
        r = rational_sqrt(a)
        if r is not None:
            return (r, Q0)
        r = rational_sqrt(a / 2)  # sqrt(2 q^2) = q sqrt2
        if r is not None:
            return (Q0, r)
        return None
    # (x + y sqrt2)^2 = x^2 + 2 y^2 + 2xy sqrt2
    disc = rational_sqrt(a * a - 2 * b * b)
    if disc is None:
        return None
    for u in ((a + disc) / 2, (a - disc) / 2):
        x = rational_sqrt(u)
        if x is not None and x != 0:
            y = b / (2 * x)
            if x * x + 2 * y * y == a:
                if float(x) + float(y) * _SQRT2 < 0:
                    x, y = -x, -y
                return (x, y)
    return None


def exact_sqrt(z):
    """Principal square root of an Ex within Q(i,sqrt2), or None.

    Principal branch: Re > 0, or Re == 0 and Im >= 0.
    """
    z = as_exact(z)
    if not z:
        return Ex()
    if z.is_real():
        if _pos((z.a, z.b)):
            r = _r_sqrt(z.a, z.b)
            return Ex(r[0], r[1]) if r is not None else None
        r = _r_sqrt(-z.a, -z.b)  # negative real: principal sqrt = i sqrt(|z|)
        return Ex(0, 0, r[0], r[1]) if r is not None else None
    # general: x^2 - y^2 = Re z, 2xy = Im z with x,y in Q(sqrt2)
    na, nb = _r_mul(z.a, z.b, z.a, z.b)
    ma, mb = _r_mul(z.c, z.d, z.c, z.d)
    mod = _r_sqrt(na + ma, nb + mb)  # |z|
    if mod is None:
        return None
    xa, xb = (z.a + mod[0]) / 2, (z.b + mod[1]) / 2
    xr = _r_sqrt(xa, xb)
    if xr is None or (xr[0] == 0 and xr[1] == 0):
        return None
    ya, yb = _r_mul(*_r_inv(2 * xr[0], 2 * xr[1]), z.c, z.d)
    root = Ex(xr[0], xr[1], ya, yb)
    if root * root == z:
        if root.real < 0 or (root.real == 0 and root.imag < 0):
            root = -root
        return root
    return None


def _pos(pair):
    return float(pair[0]) + float(pair[1]) * _SQRT2 >= 0


# -- constructors and generic scalar helpers ------------------------------

ZERO = Ex()
ONE = Ex(1)
I = Ex(0, 0, 1)
HALF = Ex(Fraction(1, 2))
SQRT2 = Ex(0, 1)


def as_exact(x):
    if isinstance(x, Ex):
        return x
    if isinstance(x, (int, Fraction)) or type(x) is type(Q1):
        return Ex(x)
    raise TypeError(f"not exactly representable: {x!r}")


def exact(re, im=0):
    """Exact scalar from rational real/imaginary parts."""
    return Ex(re, 0, im, 0)


def sconj(x):
    """Conjugate of a scalar in either field."""
    if isinstance(x, Ex):
        return x.conjugate()
    return complex(x).conjugate()


def to_field(x, field):
    if field == EXACT:
        return as_exact(x)
    return complex(x)


def scalar_sqrt(x, field):
    """Principal sqrt in the requested field; raises in exact mode if absent."""
    if field == F64:
        import cmath

        return cmath.sqrt(complex(x))
    r = exact_sqrt(x)
    if r is None:
        raise ValueError(f"sqrt of {x} does not lie in Q(i,sqrt2)")
    return r


def is_zero(x, tol=0.0):
    if isinstance(x, Ex):
        return not x
    return abs(x) <= tol
