"""Expression trees for maps and defining functions, their parser and printer,
and expansion into truncated series.

Trees carry exact constants (Q(i,sqrt2)); floats may appear only in
programmatically built trees and refuse to expand in exact mode.  The map-file
grammar is the one documented in the README; `aut` blocks extend it with
automorphism parameter sets.
"""

from __future__ import annotations

from fractions import Fraction

from . import scalars, series
from .scalars import EXACT, F64, Ex, exact_sqrt, sconj, to_field
from .series import TruncatedSeries, VarSpec

# ambient variable names and weights, keyed by model id
AMBIENT = {
    "H5": (("z1", "z2", "w"), (1, 1, 2)),
    "SIEGEL": (("z1", "z2", "w"), (1, 1, 2)),
    "X": (("z1", "z2", "zeta", "w"), (1, 1, 1, 2)),
    "T": (("z1", "z2", "z3", "w"), (1, 1, 1, 2)),
    "S5": (("z1", "z2", "w"), (1, 1, 1)),
    "DIV4": (("z1", "z2", "z3", "z4"), (1, 1, 1, 1)),
    "C3": (("z1", "z2", "w"), (1, 1, 2)),
    "C4": (("z1", "z2", "z3", "w"), (1, 1, 1, 2)),
    "C5": (("y1", "y2", "y3", "y4", "y5"), (1, 1, 1, 1, 2)),
}
MODEL_IDS = tuple(AMBIENT)


def ambient_varspec(model):
    names, weights = AMBIENT[model]
    return VarSpec(names, weights)


class ExprError(ValueError):
    pass


class ParseError(ExprError):
    def __init__(self, message, line, col):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


# -- nodes -----------------------------------------------------------------

class Node:
    __slots__ = ()

    def __add__(self, o):
        return Add(self, _n(o))

    def __radd__(self, o):
        return Add(_n(o), self)

    def __sub__(self, o):
        return Sub(self, _n(o))

    def __rsub__(self, o):
        return Sub(_n(o), self)

    def __mul__(self, o):
        return Mul(self, _n(o))

    def __rmul__(self, o):
        return Mul(_n(o), self)

    def __truediv__(self, o):
        return Div(self, _n(o))

    def __rtruediv__(self, o):
        return Div(_n(o), self)

    def __pow__(self, n):
        return Pow(self, n)

    def __neg__(self):
        return Neg(self)


def _n(x):
    if isinstance(x, Node):
        return x
    if isinstance(x, complex):
        return Const(x)
    return Const(scalars.as_exact(x))


class Const(Node):
    __slots__ = ("value",)

    def __init__(self, value):
        if not isinstance(value, (Ex, complex)):
            value = scalars.as_exact(value)
        self.value = value

    def __eq__(self, o):
        return isinstance(o, Const) and self.value == o.value

    def __hash__(self):
        return hash(("c", self.value))


class Var(Node):
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __eq__(self, o):
        return isinstance(o, Var) and self.name == o.name

    def __hash__(self):
        return hash(("v", self.name))


def _binop(cls_name):
    class _B(Node):
        __slots__ = ("a", "b")

        def __init__(self, a, b):
            self.a = _n(a)
            self.b = _n(b)

        def __eq__(self, o):
            return type(o) is type(self) and self.a == o.a and self.b == o.b

        def __hash__(self):
            return hash((cls_name, self.a, self.b))

    _B.__name__ = cls_name
    return _B


Add = _binop("Add")
Sub = _binop("Sub")
Mul = _binop("Mul")
Div = _binop("Div")


class Pow(Node):
    __slots__ = ("base", "n")

    def __init__(self, base, n):
        if not isinstance(n, int) or n < 0:
            raise ExprError("power exponent must be a nonnegative integer")
        self.base = _n(base)
        self.n = n

    def __eq__(self, o):
        return isinstance(o, Pow) and self.base == o.base and self.n == o.n

    def __hash__(self):
        return hash(("p", self.base, self.n))


class Sqrt(Node):
    __slots__ = ("arg",)

    def __init__(self, arg):
        self.arg = _n(arg)

    def __eq__(self, o):
        return isinstance(o, Sqrt) and self.arg == o.arg

    def __hash__(self):
        return hash(("s", self.arg))


class Neg(Node):
    __slots__ = ("arg",)

    def __init__(self, arg):
        self.arg = _n(arg)

    def __eq__(self, o):
        return isinstance(o, Neg) and self.arg == o.arg

    def __hash__(self):
        return hash(("n", self.arg))


# -- tree utilities ---------------------------------------------------------

def tree_vars(e, out=None):
    if out is None:
        out = set()
    if isinstance(e, Var):
        out.add(e.name)
    elif isinstance(e, (Add, Sub, Mul, Div)):
        tree_vars(e.a, out)
        tree_vars(e.b, out)
    elif isinstance(e, Pow):
        tree_vars(e.base, out)
    elif isinstance(e, (Sqrt, Neg)):
        tree_vars(e.arg, out)
    return out


def conj_tree(e, rename):
    """Formal conjugate: conjugate constants, rename variables via `rename`."""
    if isinstance(e, Const):
        return Const(sconj(e.value))
    if isinstance(e, Var):
        return Var(rename(e.name))
    if isinstance(e, Add):
        return Add(conj_tree(e.a, rename), conj_tree(e.b, rename))
    if isinstance(e, Sub):
        return Sub(conj_tree(e.a, rename), conj_tree(e.b, rename))
    if isinstance(e, Mul):
        return Mul(conj_tree(e.a, rename), conj_tree(e.b, rename))
    if isinstance(e, Div):
        return Div(conj_tree(e.a, rename), conj_tree(e.b, rename))
    if isinstance(e, Pow):
        return Pow(conj_tree(e.base, rename), e.n)
    if isinstance(e, Sqrt):
        return Sqrt(conj_tree(e.arg, rename))
    if isinstance(e, Neg):
        return Neg(conj_tree(e.arg, rename))
    raise ExprError(f"unknown node {e!r}")


def normalize(e):
    """Fold constant subtrees; the equivalence used by round-trip tests."""
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, (Add, Sub, Mul, Div)):
        a, b = normalize(e.a), normalize(e.b)
        if isinstance(a, Const) and isinstance(b, Const):
            va, vb = a.value, b.value
            if isinstance(e, Add):
                return Const(va + vb)
            if isinstance(e, Sub):
                return Const(va - vb)
            if isinstance(e, Mul):
                return Const(va * vb)
            if not scalars.is_zero(vb):
                return Const(va / vb)
        return type(e)(a, b)
    if isinstance(e, Pow):
        base = normalize(e.base)
        if isinstance(base, Const):
            return Const(_const_pow(base.value, e.n))
        return Pow(base, e.n)
    if isinstance(e, Neg):
        arg = normalize(e.arg)
        if isinstance(arg, Const):
            return Const(-arg.value)
        return Neg(arg)
    if isinstance(e, Sqrt):
        arg = normalize(e.arg)
        if isinstance(arg, Const) and isinstance(arg.value, Ex):
            r = exact_sqrt(arg.value)
            if r is not None:
                return Const(r)
        return Sqrt(arg)
    raise ExprError(f"unknown node {e!r}")


def _const_pow(v, n):
    out = to_field(1, EXACT) if isinstance(v, Ex) else 1.0 + 0j
    for _ in range(n):
        out = out * v
    return out


def equal_normalized(a, b):
    return normalize(a) == normalize(b)


# -- expansion ----------------------------------------------------------------

def expand_expr(e, varspec, order, field, env=None):
    """Series of the germ of `e` at 0 (or at the point described by env).

    env maps variable names to TruncatedSeries over `varspec`; missing
    variables expand to their generators.
    """
    if env is None:
        env = {}
    full_env = dict(env)
    for name in varspec.names:
        full_env.setdefault(name, series.generator(varspec, name, order, field))
    return _expand(e, varspec, order, field, full_env)


def _expand(e, varspec, order, field, env):
    if isinstance(e, Const):
        if field == EXACT and not isinstance(e.value, Ex):
            raise ExprError("float constant in exact-mode expansion")
        return series.const(varspec, e.value, order, field)
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise ExprError(f"unknown variable {e.name!r}") from None
    if isinstance(e, Add):
        return _expand(e.a, varspec, order, field, env) + _expand(e.b, varspec, order, field, env)
    if isinstance(e, Sub):
        return _expand(e.a, varspec, order, field, env) - _expand(e.b, varspec, order, field, env)
    if isinstance(e, Mul):
        return _expand(e.a, varspec, order, field, env) * _expand(e.b, varspec, order, field, env)
    if isinstance(e, Div):
        num = _expand(e.a, varspec, order, field, env)
        den = _expand(e.b, varspec, order, field, env)
        if scalars.is_zero(den.constant_term()):
            raise ExprError("non-unit denominator (zero constant term)")
        return num * den.invert_unit()
    if isinstance(e, Pow):
        return _expand(e.base, varspec, order, field, env) ** e.n
    if isinstance(e, Neg):
        return -_expand(e.arg, varspec, order, field, env)
    if isinstance(e, Sqrt):
        arg = _expand(e.arg, varspec, order, field, env)
        c0 = arg.constant_term()
        one = to_field(1, field)
        if scalars.is_zero(c0):
            raise ExprError("sqrt of a series with zero constant term")
        if c0 == one:
            return arg.sqrt_unit()
        root = scalars.scalar_sqrt(c0, field)  # raises in exact mode if absent
        inv = (Ex(1) / c0) if field == EXACT else 1 / c0
        return arg.scale(inv).sqrt_unit().scale(root)
    raise ExprError(f"unknown node {e!r}")


def eval_numeric(e, env):
    """Numeric evaluation; env values may be complex scalars or numpy arrays."""
    if isinstance(e, Const):
        return complex(e.value)
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Add):
        return eval_numeric(e.a, env) + eval_numeric(e.b, env)
    if isinstance(e, Sub):
        return eval_numeric(e.a, env) - eval_numeric(e.b, env)
    if isinstance(e, Mul):
        return eval_numeric(e.a, env) * eval_numeric(e.b, env)
    if isinstance(e, Div):
        return eval_numeric(e.a, env) / eval_numeric(e.b, env)
    if isinstance(e, Pow):
        return eval_numeric(e.base, env) ** e.n
    if isinstance(e, Neg):
        return -eval_numeric(e.arg, env)
    if isinstance(e, Sqrt):
        v = eval_numeric(e.arg, env)
        try:
            import numpy as np

            if isinstance(v, np.ndarray):
                return np.sqrt(v.astype(complex))
        except ImportError:  # pragma: no cover
            pass
        import cmath

        return cmath.sqrt(complex(v))
    raise ExprError(f"unknown node {e!r}")


# -- printing ----------------------------------------------------------------

_LEVEL_ADD, _LEVEL_MUL, _LEVEL_UNARY, _LEVEL_ATOM = 1, 2, 3, 4


def print_expr(e):
    return _pp(e, 0)


def _const_text(v):
    """Exact-constant text plus the precedence level of that text."""
    if isinstance(v, complex):
        text = f"({v.real!r}+{v.imag!r}*i)" if v.imag else repr(v.real)
        return text, _LEVEL_ATOM

    def rat(q):
        q = Fraction(int(q.numerator), int(q.denominator))
        return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)

    terms = []
    for coef, tag in ((v.a, ""), (v.b, "*sqrt(2)"), (v.c, "*i"), (v.d, "*sqrt(2)*i")):
        if coef:
            sign = "+" if coef > 0 else "-"
            text = rat(abs(coef))
            if tag and text == "1":
                terms.append((sign, tag[1:]))
            else:
                terms.append((sign, text + tag))
    if not terms:
        return "0", _LEVEL_ATOM
    out = ""
    for i, (sign, text) in enumerate(terms):
        out += (text if sign == "+" else "-" + text) if i == 0 else sign + text
    if len(terms) > 1 or out.startswith("-"):
        return out, _LEVEL_ADD
    if "*" in out or "/" in out:
        return out, _LEVEL_MUL
    return out, _LEVEL_ATOM


def _pp(e, parent_level):
    if isinstance(e, Const):
        v = e.value
        if isinstance(v, Ex) and v == scalars.I:
            return "i"
        text, level = _const_text(v)
        return f"({text})" if level < parent_level else text
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Add):
        text = f"{_pp(e.a, _LEVEL_ADD)}+{_pp(e.b, _LEVEL_ADD + 1)}"
        return f"({text})" if parent_level > _LEVEL_ADD else text
    if isinstance(e, Sub):
        text = f"{_pp(e.a, _LEVEL_ADD)}-{_pp(e.b, _LEVEL_ADD + 1)}"
        return f"({text})" if parent_level > _LEVEL_ADD else text
    if isinstance(e, Mul):
        text = f"{_pp(e.a, _LEVEL_MUL)}*{_pp(e.b, _LEVEL_MUL + 1)}"
        return f"({text})" if parent_level > _LEVEL_MUL else text
    if isinstance(e, Div):
        text = f"{_pp(e.a, _LEVEL_MUL)}/{_pp(e.b, _LEVEL_MUL + 1)}"
        return f"({text})" if parent_level > _LEVEL_MUL else text
    if isinstance(e, Pow):
        return f"{_pp(e.base, _LEVEL_ATOM)}^{e.n}"
    if isinstance(e, Neg):
        text = f"-{_pp(e.arg, _LEVEL_ATOM)}"
        return f"({text})" if parent_level > _LEVEL_UNARY else text
    if isinstance(e, Sqrt):
        return f"sqrt({_pp(e.arg, 0)})"
    raise ExprError(f"unknown node {e!r}")


# -- map definitions -----------------------------------------------------------

class MapDef:
    """A named map between model ambients, one expression per component."""

    __slots__ = ("name", "source", "target", "components", "labels")

    def __init__(self, name, source, target, components, labels=None):
        self.name = name
        self.source = source
        self.target = target
        self.components = tuple(_n(c) for c in components)
        self.labels = tuple(labels) if labels else tuple(f"c{i+1}" for i in range(len(self.components)))
        self.validate()

    def validate(self):
        if self.source not in AMBIENT:
            raise ExprError(f"unknown model id {self.source!r}")
        if self.target not in AMBIENT:
            raise ExprError(f"unknown model id {self.target!r}")
        tdim = len(AMBIENT[self.target][0])
        if len(self.components) != tdim:
            raise ExprError(
                f"map {self.name}: {len(self.components)} components, "
                f"target {self.target} has ambient dimension {tdim}"
            )
        svars = set(AMBIENT[self.source][0])
        for lab, comp in zip(self.labels, self.components):
            extra = tree_vars(comp) - svars
            if extra:
                raise ExprError(f"map {self.name}: component {lab} uses unknown variable(s) {sorted(extra)}")

    def source_varspec(self):
        return ambient_varspec(self.source)

    def expand(self, order, field, env=None, varspec=None):
        """Component series tuple over the source ambient (or a custom ring)."""
        spec = varspec if varspec is not None else self.source_varspec()
        return tuple(expand_expr(c, spec, order, field, env) for c in self.components)

    def eval_numeric(self, env):
        return tuple(eval_numeric(c, env) for c in self.components)

    def __repr__(self):
        return f"MapDef({self.name}: {self.source} -> {self.target})"


class AutDef:
    """Parsed `aut` block: named automorphism parameters for a model."""

    __slots__ = ("name", "model", "params")

    def __init__(self, name, model, params):
        self.name = name
        self.model = model
        self.params = dict(params)


def print_mapdef(m):
    body = " ".join(f"{lab}={print_expr(c)};" for lab, c in zip(m.labels, m.components))
    return f"map {m.name} : {m.source} -> {m.target} {{ {body} }}"


# -- parser -------------------------------------------------------------------

_KEYWORDS = {"map", "aut", "sqrt", "i"}


class _Tokenizer:
    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1
        self.tokens = []
        self._run()

    def _error(self, msg):
        raise ParseError(msg, self.line, self.col)

    def _run(self):
        text = self.text
        n = len(text)
        while self.pos < n:
            ch = text[self.pos]
            if ch == "#":
                while self.pos < n and text[self.pos] != "\n":
                    self.pos += 1
                continue
            if ch in " \t\r":
                self.pos += 1
                self.col += 1
                continue
            if ch == "\n":
                self.pos += 1
                self.line += 1
                self.col = 1
                continue
            start_line, start_col = self.line, self.col
            if ch.isdigit():
                j = self.pos
                while j < n and text[j].isdigit():
                    j += 1
                self._emit("uint", text[self.pos:j], start_line, start_col)
                continue
            if ch.isalpha() or ch == "_":
                j = self.pos
                while j < n and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                self._emit("ident", text[self.pos:j], start_line, start_col)
                continue
            if text.startswith("->", self.pos):
                self._emit("arrow", "->", start_line, start_col)
                continue
            if ch in "+-*/^(){}=;:":
                self._emit(ch, ch, start_line, start_col)
                continue
            self._error(f"unexpected character {ch!r}")
        self.tokens.append(("eof", "", self.line, self.col))

    def _emit(self, kind, text, line, col):
        self.tokens.append((kind, text, line, col))
        self.pos += len(text)
        self.col += len(text)


class _Parser:
    def __init__(self, text):
        self.toks = _Tokenizer(text).tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok[2], tok[3])

    def expect(self, kind, what=None):
        t = self.next()
        if t[0] != kind:
            self.error(f"expected {what or kind}, got {t[1]!r}", t)
        return t

    # file := (mapdef | autdef)*
    def file(self):
        out = []
        while self.peek()[0] != "eof":
            t = self.peek()
            if t[0] == "ident" and t[1] == "map":
                out.append(self.mapdef())
            elif t[0] == "ident" and t[1] == "aut":
                out.append(self.autdef())
            else:
                self.error("expected 'map' or 'aut'")
        return out

    def model(self):
        t = self.expect("ident", "model id")
        if t[1] not in AMBIENT:
            self.error(f"unknown model id {t[1]!r}", t)
        return t[1]

    def mapdef(self):
        self.next()  # 'map'
        name = self.expect("ident", "map name")[1]
        self.expect(":")
        src = self.model()
        self.expect("arrow", "'->'")
        dst = self.model()
        self.expect("{")
        labels, comps = self.body()
        tok = self.toks[self.i - 1]
        try:
            return MapDef(name, src, dst, comps, labels)
        except ExprError as exc:
            raise ParseError(str(exc), tok[2], tok[3]) from None

    def autdef(self):
        self.next()  # 'aut'
        name = self.expect("ident", "aut name")[1]
        self.expect(":")
        model = self.model()
        self.expect("{")
        labels, comps = self.body()
        params = {}
        for lab, comp in zip(labels, comps):
            folded = normalize(comp)
            if not isinstance(folded, Const):
                self.error(f"aut parameter {lab} must be a constant expression")
            params[lab] = folded.value
        return AutDef(name, model, params)

    def body(self):
        labels, comps = [], []
        while True:
            t = self.peek()
            if t[0] == "}":
                self.next()
                break
            lab = self.expect("ident", "component name")[1]
            self.expect("=")
            comps.append(self.expr())
            self.expect(";")
            labels.append(lab)
        if not comps:
            self.error("empty body")
        return labels, comps

    # expression grammar
    def expr(self):
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.next()[0]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek()[0] in ("*", "/"):
            op = self.next()[0]
            rhs = self.factor()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def factor(self):
        node = self.base()
        if self.peek()[0] == "^":
            self.next()
            t = self.expect("uint", "integer exponent")
            node = Pow(node, int(t[1]))
        return node

    def base(self):
        t = self.peek()
        if t[0] == "-":
            self.next()
            return Neg(self.base())
        if t[0] == "uint":
            self.next()
            num = int(t[1])
            if self.peek()[0] == "/" and self.toks[self.i + 1][0] == "uint":
                self.next()
                den = int(self.next()[1])
                if den == 0:
                    self.error("zero denominator in rational literal", t)
                return Const(Ex(Fraction(num, den)))
            return Const(Ex(num))
        if t[0] == "ident":
            self.next()
            if t[1] == "i":
                return Const(scalars.I)
            if t[1] == "sqrt":
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                return Sqrt(inner)
            if t[1] in ("map", "aut"):
                self.error(f"keyword {t[1]!r} cannot be used in an expression", t)
            return Var(t[1])
        if t[0] == "(":
            self.next()
            inner = self.expr()
            self.expect(")")
            return inner
        self.error(f"unexpected token {t[1]!r}")


def parse_mapfile(text):
    """Parse map/aut definitions; raises ParseError with line/col on bad input."""
    return _Parser(text).file()


def parse_expr(text):
    p = _Parser(text)
    node = p.expr()
    if p.peek()[0] != "eof":
        p.error("trailing input after expression")
    return node
