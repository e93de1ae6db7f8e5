"""Weighted-truncated multivariate power series over exact or float scalars.

A TruncatedSeries is a finite coefficient table over exponent tuples, with a
weighted truncation bound (z-type variables weigh 1, w-type weigh 2).  Order
``None`` means no truncation: the same type doubles as an exact polynomial
ring, which the Segre-system solver uses.  Canonical form never stores zero
coefficients, so equality of tables is equality of series.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction

from . import scalars
from .scalars import EXACT, F64, Ex, sconj, to_field

if os.environ.get("CRMAP_PURE_PY"):
    from . import _kernel_py as _kernel
else:
    try:
        from . import _speedups as _kernel  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernel_py as _kernel

KERNEL_NAME = _kernel.KERNEL_NAME


class SeriesError(ValueError):
    pass


@dataclass(frozen=True)
class VarSpec:
    """Ordered variables with weights and optional conjugate partners."""

    names: tuple
    weights: tuple
    conj: tuple = None  # per-variable partner name or None

    def __post_init__(self):
        if self.conj is None:
            object.__setattr__(self, "conj", (None,) * len(self.names))
        if not all(w >= 1 for w in self.weights):
            raise SeriesError("weights must be positive integers")
        for n, p in zip(self.names, self.conj):
            if p is not None and p in self.names:
                back = self.conj[self.names.index(p)]
                if back != n:
                    raise SeriesError(f"conjugate pairing not symmetric at {n}")

    def index(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise SeriesError(f"unknown variable {name!r}") from None

    def weight(self, name):
        return self.weights[self.index(name)]

    def complexified(self):
        """Extend with barred partners (name + 'b') for unpaired variables."""
        names = list(self.names)
        weights = list(self.weights)
        conj = []
        for n, w in zip(self.names, self.weights):
            nb = n + "b"
            conj.append(nb)
            names.append(nb)
            weights.append(w)
        conj += list(self.names)
        return VarSpec(tuple(names), tuple(weights), tuple(conj))

    def gens(self, order, field):
        return {n: generator(self, n, order, field) for n in self.names}


def vs(*pairs, conj=None):
    names = tuple(p[0] for p in pairs)
    weights = tuple(p[1] for p in pairs)
    return VarSpec(names, weights, conj)


def _wdeg(expo, weights):
    return _kernel.weighted_degree(expo, weights)


class TruncatedSeries:
    __slots__ = ("varspec", "order", "field", "coeffs")

    def __init__(self, varspec, order, field, coeffs=None, *, _raw=False):
        self.varspec = varspec
        self.order = order
        self.field = field
        if coeffs is None:
            coeffs = {}
        if not _raw:
            coeffs = self._canonical(coeffs)
        self.coeffs = coeffs

    def _canonical(self, coeffs):
        out = {}
        w = self.varspec.weights
        for e, c in coeffs.items():
            if self.order is not None and _wdeg(e, w) > self.order:
                continue
            c = to_field(c, self.field)
            if not scalars.is_zero(c):
                out[e] = c
        return out

    # -- inspection --------------------------------------------------------
    def is_zero(self):
        return not self.coeffs

    def constant_term(self):
        zero = tuple(0 for _ in self.varspec.names)
        return self.coeffs.get(zero, to_field(0, self.field))

    def coefficient(self, **monomial):
        """Coefficient of the monomial given as name=exponent keywords."""
        e = [0] * len(self.varspec.names)
        for name, k in monomial.items():
            e[self.varspec.index(name)] = k
        return self.coeffs.get(tuple(e), to_field(0, self.field))

    def valuation(self):
        if not self.coeffs:
            return None
        w = self.varspec.weights
        return min(_wdeg(e, w) for e in self.coeffs)

    def homogeneous_part(self, d):
        w = self.varspec.weights
        sel = {e: c for e, c in self.coeffs.items() if _wdeg(e, w) == d}
        return TruncatedSeries(self.varspec, self.order, self.field, sel, _raw=True)

    def monomials(self):
        return sorted(self.coeffs, key=lambda e: (_wdeg(e, self.varspec.weights), e))

    # -- arithmetic ----------------------------------------------------------
    def _check(self, other):
        if self.varspec != other.varspec:
            raise SeriesError("varspec mismatch")
        if self.field != other.field:
            raise SeriesError("field mismatch")

    @staticmethod
    def _min_order(a, b):
        if a is None:
            return b
        if b is None:
            return a
        return min(a, b)

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            other = const(self.varspec, other, self.order, self.field)
        self._check(other)
        order = self._min_order(self.order, other.order)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            v = out.get(e)
            out[e] = c if v is None else v + c
        return TruncatedSeries(self.varspec, order, self.field, out)

    __radd__ = __add__

    def __neg__(self):
        out = {e: -c for e, c in self.coeffs.items()}
        return TruncatedSeries(self.varspec, self.order, self.field, out, _raw=True)

    def __sub__(self, other):
        return self + (-other if isinstance(other, TruncatedSeries) else -to_field(other, self.field))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, scalar):
        scalar = to_field(scalar, self.field)
        if scalars.is_zero(scalar):
            return zero(self.varspec, self.order, self.field)
        out = {e: c * scalar for e, c in self.coeffs.items()}
        return TruncatedSeries(self.varspec, self.order, self.field, out)

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        self._check(other)
        order = self._min_order(self.order, other.order)
        table = _kernel.poly_mul(self.coeffs, other.coeffs, self.varspec.weights, order)
        if self.field == F64:
            table = {e: c for e, c in table.items() if c}
        return TruncatedSeries(self.varspec, order, self.field, table, _raw=True)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise SeriesError("only nonnegative integer powers")
        result = const(self.varspec, 1, self.order, self.field)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def truncate(self, order):
        order = self._min_order(self.order, order)
        return TruncatedSeries(self.varspec, order, self.field, dict(self.coeffs))

    # -- comparisons ---------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.varspec == other.varspec and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.varspec, frozenset(self.coeffs.items())))

    def max_coeff_diff(self, other):
        self._check(other)
        keys = set(self.coeffs) | set(other.coeffs)
        z = to_field(0, self.field)
        return max(
            (abs(complex(self.coeffs.get(e, z)) - complex(other.coeffs.get(e, z))) for e in keys),
            default=0.0,
        )

    def first_difference(self, other):
        """First differing monomial and the two coefficients, or None."""
        self._check(other)
        keys = sorted(
            set(self.coeffs) | set(other.coeffs),
            key=lambda e: (_wdeg(e, self.varspec.weights), e),
        )
        z = to_field(0, self.field)
        for e in keys:
            a, b = self.coeffs.get(e, z), other.coeffs.get(e, z)
            if a != b:
                return (self.monomial_str(e), a, b)
        return None

    def monomial_str(self, expo):
        parts = [
            f"{n}^{k}" if k > 1 else n
            for n, k in zip(self.varspec.names, expo)
            if k
        ]
        return "*".join(parts) or "1"

    def __repr__(self):
        terms = [f"({self.coeffs[e]})*{self.monomial_str(e)}" for e in self.monomials()]
        body = " + ".join(terms) or "0"
        tail = f" + O({self.order + 1})" if self.order is not None else ""
        return body + tail

    # -- calculus-style operations ---------------------------------------
    def conjugate(self):
        """Conjugate coefficients and swap variables with their partners."""
        perm = []
        for n, p in zip(self.varspec.names, self.varspec.conj):
            if p is None:
                raise SeriesError(f"variable {n} has no conjugate partner")
            perm.append(self.varspec.index(p))
        out = {}
        for e, c in self.coeffs.items():
            ne = [0] * len(e)
            for i, k in enumerate(e):
                ne[perm[i]] = k
            out[tuple(ne)] = sconj(c)
        return TruncatedSeries(self.varspec, self.order, self.field, out, _raw=True)

    def partial(self, name):
        i = self.varspec.index(name)
        out = {}
        for e, c in self.coeffs.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = c * e[i]
        order = None if self.order is None else self.order - self.varspec.weights[i]
        return TruncatedSeries(self.varspec, order, self.field, out)

    def _is_constant(self):
        return not self.coeffs or set(self.coeffs) == {tuple(0 for _ in self.varspec.names)}

    def invert_unit(self):
        c0 = self.constant_term()
        if scalars.is_zero(c0):
            raise SeriesError("cannot invert: zero constant term")
        inv0 = (Ex(1) / c0) if self.field == EXACT else 1 / c0
        if self._is_constant():
            return const(self.varspec, inv0, self.order, self.field)
        if self.order is None:
            raise SeriesError("cannot invert an untruncated non-constant series")
        u = const(self.varspec, 1, self.order, self.field) - self.scale(inv0)
        # 1/s = inv0 * (1 + u + u^2 + ...), val(u) >= 1
        acc = const(self.varspec, 1, self.order, self.field)
        for _ in range(self.order):
            acc = const(self.varspec, 1, self.order, self.field) + u * acc
        return acc.scale(inv0)

    def sqrt_unit(self):
        c0 = self.constant_term()
        if to_field(c0, self.field) != to_field(1, self.field):
            raise SeriesError("sqrt_unit requires constant term exactly 1")
        if self._is_constant():
            return const(self.varspec, 1, self.order, self.field)
        if self.order is None:
            raise SeriesError("cannot sqrt an untruncated non-constant series")
        half = Fraction(1, 2)
        one = const(self.varspec, 1, self.order, self.field)
        rho = zero(self.varspec, self.order, self.field)
        s1 = self - one
        for _ in range(self.order):
            rho = (s1 - rho * rho).scale(half)
        return one + rho

    def log_unit(self):
        """log of a series with constant term exactly 1."""
        c0 = self.constant_term()
        if to_field(c0, self.field) != to_field(1, self.field):
            raise SeriesError("log_unit requires constant term exactly 1")
        u = self - const(self.varspec, 1, self.order, self.field)
        p = u
        total = u
        for k in range(2, self.order + 1):
            p = p * u
            if p.is_zero():
                break
            total = total + p.scale(Fraction((-1) ** (k + 1), k))
        return total

    def substitute(self, bindings, varspec=None, order=None):
        """Substitute series (or scalars) for variables.

        Unbound variables map to the like-named generators of the target
        varspec.  Bindings into a truncated series must have zero constant
        term; polynomial (order None) sources accept constant shifts.
        """
        target = varspec
        vals = {}
        for name, b in bindings.items():
            self.varspec.index(name)
            if isinstance(b, TruncatedSeries):
                if target is None:
                    target = b.varspec
                vals[name] = b
        if target is None:
            target = self.varspec
        field = self.field
        for name in self.varspec.names:
            if name in bindings:
                b = bindings[name]
                if not isinstance(b, TruncatedSeries):
                    vals[name] = const(target, b, order, field)
            else:
                vals[name] = generator(target, name, order, field)

        occurring = set()
        for e in self.coeffs:
            for i, k in enumerate(e):
                if k:
                    occurring.add(self.varspec.names[i])

        res_order = order
        if self.order is not None:
            ratio = None
            for name in occurring:
                v = vals[name]
                val = v.valuation()
                c0 = v.constant_term()
                if not scalars.is_zero(c0, 0.0):
                    raise SeriesError(
                        f"binding for {name} has nonzero constant term "
                        "but the source series is truncated"
                    )
                if val is not None:
                    r = Fraction(val, self.varspec.weight(name))
                    ratio = r if ratio is None else min(ratio, r)
            if ratio is not None:
                tail = math.ceil((self.order + 1) * ratio) - 1
                res_order = TruncatedSeries._min_order(res_order, tail)
            else:
                res_order = TruncatedSeries._min_order(res_order, self.order)
        for name in occurring:
            res_order = TruncatedSeries._min_order(res_order, vals[name].order)

        powers = {name: {0: const(target, 1, res_order, field)} for name in occurring}

        def power(name, k):
            cache = powers[name]
            if k not in cache:
                half = power(name, k // 2)
                p = half * half
                if k % 2:
                    p = p * vals[name].truncate(res_order)
                cache[k] = p
            return cache[k]

        total = zero(target, res_order, field)
        for e, c in self.coeffs.items():
            term = const(target, c, res_order, field)
            for i, k in enumerate(e):
                if k:
                    term = term * power(self.varspec.names[i], k)
            total = total + term
        return total

    def eval_numeric(self, point):
        """Evaluate at a numeric point given as name -> complex."""
        vals = [complex(point[n]) for n in self.varspec.names]
        total = 0j
        for e, c in self.coeffs.items():
            t = complex(c)
            for v, k in zip(vals, e):
                if k:
                    t *= v**k
            total += t
        return total


# -- constructors ---------------------------------------------------------

def zero(varspec, order, field):
    return TruncatedSeries(varspec, order, field, {}, _raw=True)


def const(varspec, value, order, field):
    value = to_field(value, field)
    if scalars.is_zero(value):
        return zero(varspec, order, field)
    e = tuple(0 for _ in varspec.names)
    return TruncatedSeries(varspec, order, field, {e: value}, _raw=True)


def generator(varspec, name, order, field):
    i = varspec.index(name)
    if order is not None and varspec.weights[i] > order:
        return zero(varspec, order, field)
    e = tuple(1 if j == i else 0 for j in range(len(varspec.names)))
    return TruncatedSeries(varspec, order, field, {e: to_field(1, field)}, _raw=True)


# -- spec-facing functional aliases ----------------------------------------

def series_add(a, b):
    return a + b


def series_mul(a, b):
    return a * b


def series_scale(a, scalar):
    return a.scale(scalar)


def series_substitute(s, bindings, varspec=None, order=None):
    return s.substitute(bindings, varspec, order)


def series_invert_unit(s):
    return s.invert_unit()


def series_sqrt_unit(s):
    return s.sqrt_unit()


def series_conjugate(s):
    return s.conjugate()


def series_partial(s, var):
    return s.partial(var)
