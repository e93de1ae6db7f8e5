"""Stability groups of the Heisenberg hypersurface and of the light-cone model,
series inversion of automorphism germs, and transitive recentering maps.

The target group's published display does not self-verify: its third component
needs -2i*z a^t in place of -2z a^t (established by solving the tangency
condition for the weight-raising symmetry fields; the fix is the unique one).
``target_aut`` builds the corrected form by default; the literal display
variants remain available for the verdict report.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import models, series
from .expr import Const, MapDef, Var, expand_expr
from .scalars import EXACT, F64, Ex, I, sconj, to_field
from .series import TruncatedSeries


class AutError(ValueError):
    pass


def _tol_ok(x, tol=1e-12):
    return abs(x) <= tol


@dataclass
class SourceAutParams:
    """(s, u, U(a,b), c, r) with |u| = 1, |a|^2 + |b|^2 = 1, s > 0."""

    s: object = 1
    u: object = 1
    a: object = 1
    b: object = 0
    c: tuple = (0, 0)
    r: object = 0

    def validate(self, field=EXACT):
        s, u, a, b = (to_field(x, field) for x in (self.s, self.u, self.a, self.b))
        if field == EXACT:
            if not (s.is_real() and s.real > 0):
                raise AutError("s must be a positive real")
            if u * sconj(u) != Ex(1):
                raise AutError("|u| != 1")
            if a * sconj(a) + b * sconj(b) != Ex(1):
                raise AutError("|a|^2 + |b|^2 != 1")
            r = to_field(self.r, field)
            if not r.is_real():
                raise AutError("r must be real")
        else:
            if not (abs(u * u.conjugate() - 1) < 1e-12 and s.real > 0 and _tol_ok(s.imag)):
                raise AutError("invalid float parameters")
            if not _tol_ok(abs(a) ** 2 + abs(b) ** 2 - 1):
                raise AutError("|a|^2 + |b|^2 != 1")

    def umatrix(self, field=EXACT):
        u, a, b = (to_field(x, field) for x in (self.u, self.a, self.b))
        return ((u * a, -(u * b)), (sconj(b), sconj(a)))


@dataclass
class TargetAutParams:
    """(s', u', P, a, r') with |u'| = 1, P real orthogonal 2x2, s' > 0."""

    s: object = 1
    u: object = 1
    a: tuple = (0, 0)
    r: object = 0
    p_cos: object = 1
    p_sin: object = 0
    p_reflect: bool = False

    def validate(self, field=EXACT):
        s, u, c, sn = (to_field(x, field) for x in (self.s, self.u, self.p_cos, self.p_sin))
        if field == EXACT:
            if not (s.is_real() and s.real > 0):
                raise AutError("s' must be a positive real")
            if u * sconj(u) != Ex(1):
                raise AutError("|u'| != 1")
            if c * c + sn * sn != Ex(1) or not (c.is_real() and sn.is_real()):
                raise AutError("P is not orthogonal")
            if not to_field(self.r, field).is_real():
                raise AutError("r' must be real")
        else:
            if not _tol_ok(abs(c) ** 2 + abs(sn) ** 2 - 1, 1e-10):
                raise AutError("P is not orthogonal")

    def pmatrix(self, field=EXACT):
        c, sn = to_field(self.p_cos, field), to_field(self.p_sin, field)
        if self.p_reflect:
            return ((c, sn), (sn, -c))
        return ((c, -sn), (sn, c))


def _rowmat(row, mat):
    return tuple(row[0] * mat[0][j] + row[1] * mat[1][j] for j in range(2))


def source_aut(params, field=EXACT, name="psi"):
    """Stability-group element of the Heisenberg hypersurface as a MapDef."""
    params.validate(field)
    s, r = to_field(params.s, field), to_field(params.r, field)
    c1, c2 = (to_field(x, field) for x in params.c)
    U = params.umatrix(field)
    z1, z2, w = Var("z1"), Var("z2"), Var("w")
    ccbar = c1 * sconj(c1) + c2 * sconj(c2)
    two_i = to_field(Ex(0, 0, 2, 0), field)
    delta = (
        Const(to_field(1, field))
        - Const(two_i * sconj(c1)) * z1
        - Const(two_i * sconj(c2)) * z2
        + Const(r - to_field(I, field) * ccbar) * w
    )
    zc = (z1 + Const(c1) * w, z2 + Const(c2) * w)
    frow = _rowmat(zc, ((Const(U[0][0]), Const(U[0][1])), (Const(U[1][0]), Const(U[1][1]))))
    comps = (
        Const(s) * frow[0] / delta,
        Const(s) * frow[1] / delta,
        Const(s * s) * w / delta,
    )
    return MapDef(name, "H5", "H5", comps, ("f1", "f2", "g"))


TARGET_VARIANTS = (
    "corrected",
    "display-conj-plain",
    "display-conj-conj",
    "display-plain-plain",
    "display-plain-conj",
)


def target_aut(params, field=EXACT, name="gamma", variant="corrected"):
    """Stability-group element of the light-cone model X as a MapDef.

    variant selects the corrected formula (default) or one of the four
    conjugation readings of the published display (kept for the verdict
    report; none of them is an automorphism).
    """
    params.validate(field)
    sp = to_field(params.s, field)
    up = to_field(params.u, field)
    rp = to_field(params.r, field)
    a1, a2 = (to_field(x, field) for x in params.a)
    P = params.pmatrix(field)
    i_ = to_field(I, field)
    one = to_field(1, field)

    aat = a1 * a1 + a2 * a2
    caat = sconj(aat)
    aabs = a1 * sconj(a1) + a2 * sconj(a2)

    z1, z2, zeta, w = Var("z1"), Var("z2"), Var("zeta"), Var("w")
    zz = z1 * z1 + z2 * z2
    wzeta = w * zeta + Const(i_) * zz

    if variant == "corrected":
        delta_coef, g3w_coef, g3z_factor = caat, aat, Const(2 * i_)
    else:
        _, dvar, gvar = variant.split("-")
        delta_coef = caat if dvar == "conj" else aat
        g3w_coef = aat if gvar == "plain" else caat
        g3z_factor = Const(to_field(2, field))

    delta = (
        Const(one)
        - Const(rp + i_ * aabs) * w
        - Const(2 * i_ * sconj(a1)) * z1
        - Const(2 * i_ * sconj(a2)) * z2
        + Const(i_ * delta_coef) * wzeta
    )
    zrow = (
        z1 + Const(a1) * w - Const(sconj(a1)) * wzeta,
        z2 + Const(a2) * w - Const(sconj(a2)) * wzeta,
    )
    eta = _rowmat(zrow, ((Const(P[0][0]), Const(P[0][1])), (Const(P[1][0]), Const(P[1][1]))))
    g3 = (
        zeta
        - g3z_factor * (Const(a1) * z1 + Const(a2) * z2)
        - Const(i_ * g3w_coef) * w
        - Const(rp - i_ * aabs) * wzeta
    )
    comps = (
        Const(sp * up) * eta[0] / delta,
        Const(sp * up) * eta[1] / delta,
        Const(up * up) * g3 / delta,
        Const(sp * sp) * w / delta,
    )
    return MapDef(name, "X", "X", comps, ("f1", "f2", "phi", "g"))


def target_aut_variant_report(order=8, field=EXACT):
    """Self-residual verdict for each target-group variant at generic params."""
    from fractions import Fraction as Fr

    params = TargetAutParams(a=(Ex(Fr(1, 2), 0, Fr(1, 3), 0), Ex(Fr(1, 5))), r=Fr(1, 7))
    out = {}
    for variant in TARGET_VARIANTS:
        g = target_aut(params, field=field, variant=variant)
        res = models.mapping_residual(g, order, field=field)
        out[variant] = {
            "residual_zero": res.is_zero,
            "min_violating_order": res.min_violating_order,
        }
    return out


# -- series inversion ----------------------------------------------------------

def _linsolve(A, rhs, field):
    """Solve A x = rhs exactly (small dense systems over the scalar field)."""
    n = len(A)
    M = [list(row) + list(r) for row, r in zip(A, rhs)]
    m = len(M[0])
    for col in range(n):
        piv = next((r for r in range(col, n) if not _is_zero(M[r][col], field)), None)
        if piv is None:
            raise AutError("singular linear part")
        M[col], M[piv] = M[piv], M[col]
        inv = (Ex(1) / M[col][col]) if field == EXACT else 1 / M[col][col]
        M[col] = [x * inv for x in M[col]]
        for r in range(n):
            if r != col and not _is_zero(M[r][col], field):
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [row[n:] for row in M]


def _is_zero(x, field):
    if field == EXACT:
        return not x
    return abs(x) < 1e-300


def aut_series(aut, order, field=EXACT):
    """Expand an automorphism MapDef about the origin."""
    return aut.expand(order, field)


def invert_aut(aut, order, field=EXACT):
    """Series inverse of a germ fixing 0 with invertible linear part."""
    if isinstance(aut, MapDef):
        comps = aut.expand(order, field)
        spec = aut.source_varspec()
    else:
        comps = tuple(aut)
        spec = comps[0].varspec
    names = spec.names
    n = len(names)
    if any(not _is_zero_c(c.constant_term(), field) for c in comps):
        raise AutError("germ does not fix the origin")
    A = [[comps[i].coefficient(**{names[j]: 1}) for j in range(n)] for i in range(n)]
    rhs = [[to_field(1 if i == j else 0, field) for j in range(n)] for i in range(n)]
    Ainv = _linsolve(A, rhs, field)

    gens = [series.generator(spec, nm, order, field) for nm in names]
    # nonlinear part N = comps - linear
    lin = [sum((gens[j].scale(A[i][j]) for j in range(n)), series.zero(spec, order, field))
           for i in range(n)]
    N = [comps[i] - lin[i] for i in range(n)]

    G = [sum((gens[j].scale(Ainv[i][j]) for j in range(n)), series.zero(spec, order, field))
         for i in range(n)]
    for _ in range(order):
        bound = {names[j]: G[j] for j in range(n)}
        NG = [N[i].substitute(bound, varspec=spec, order=order) for i in range(n)]
        G = [
            sum(((gens[j] - NG[j]).scale(Ainv[i][j]) for j in range(n)),
                series.zero(spec, order, field))
            for i in range(n)
        ]
    return tuple(G)


def _is_zero_c(x, field):
    if field == EXACT:
        return not x
    return abs(x) <= 1e-13


def compose_series(outer, inner, order, field=EXACT):
    """outer o inner for series tuples sharing the inner's variable ring."""
    spec = inner[0].varspec
    if isinstance(outer, MapDef):
        names = outer.source_varspec().names
        env = {nm: c for nm, c in zip(names, inner)}
        return tuple(expand_expr(t, spec, order, field, env=env) for t in outer.components)
    names = outer[0].varspec.names
    bound = {nm: c for nm, c in zip(names, inner)}
    return tuple(c.substitute(bound, varspec=spec, order=order) for c in outer)


# -- transitive recentering -----------------------------------------------------

def translate_to_origin(model_id, point, field=EXACT, tol=1e-9):
    """Model automorphism sending `point` to the origin.

    Heisenberg translations for H5/SIEGEL (exact when the point is exact);
    for X a numerically built transitive map (float constants only).
    """
    mid = model_id if isinstance(model_id, str) else model_id.id
    if mid in ("H5", "SIEGEL"):
        z0 = tuple(to_field(p, field) for p in point[:2])
        w0 = to_field(point[2], field)
        rho = complex(w0).imag - sum(abs(complex(z)) ** 2 for z in z0)
        if abs(rho) > tol:
            raise AutError(f"point is off the model by {rho:.2e}")
        i_ = to_field(I, field)
        q = (-z0[0], -z0[1], -w0 + 2 * i_ * (z0[0] * sconj(z0[0]) + z0[1] * sconj(z0[1])))
        z1, z2, w = Var("z1"), Var("z2"), Var("w")
        comps = (
            z1 + Const(q[0]),
            z2 + Const(q[1]),
            w + Const(q[2]) + Const(2 * i_) * (Const(sconj(q[0])) * z1 + Const(sconj(q[1])) * z2),
        )
        return MapDef("translate", mid, mid, comps, ("f1", "f2", "g"))
    if mid == "X":
        return _x_translation(point, tol)
    raise AutError(f"no transitive family stored for model {mid!r}")


def _x_translation(point, tol):
    """Numeric X-automorphism q -> 0, built as F o (cone motion) o G."""
    import numpy as np

    from . import catalog

    q = [complex(p) for p in point]
    rho = models.rho_numeric("X", np.asarray([q]))[0]
    if abs(rho) > tol:
        raise AutError(f"point is off the model by {rho:.2e}")
    G = catalog.get("G").mapdef
    F = catalog.get("F").mapdef
    tq = [complex(v) for v in G.eval_numeric({n: c for n, c in zip(("z1", "z2", "zeta", "w"), q)})]
    x = np.array([t.real for t in tq])  # cone point, x4 = |x(1:3)|
    y = np.array([t.imag for t in tq])
    v = x[:3]
    nv = np.linalg.norm(v)
    # rotation sending v to (0,0,-|v|)
    target = np.array([0.0, 0.0, -1.0])
    u = v / nv
    if np.allclose(u, target):
        R = np.eye(3)
    elif np.allclose(u, -target):
        R = np.diag([1.0, -1.0, -1.0])
    else:
        axis = np.cross(u, target)
        s = np.linalg.norm(axis)
        c = float(u @ target)
        K = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
        R = np.eye(3) + K + K @ K * ((1 - c) / s**2)
    lam = 1 / (2 * nv)  # dilation: x4 -> 1/2
    zvars = [Var(n) for n in ("z1", "z2", "z3", "w")]
    # affine cone motion: subtract iy, rotate, dilate
    shifted = [zv - Const(complex(0, yi)) for zv, yi in zip(zvars, y)]
    rotated = [
        sum((Const(complex(R[i, j] * lam)) * shifted[j] for j in range(3)), Const(0j))
        for i in range(3)
    ] + [Const(complex(lam)) * shifted[3]]
    mid_map = MapDef("conemotion", "T", "T", rotated, ("z1", "z2", "z3", "w"))
    comps = _tree_chain(F, _tree_chain(mid_map, G))
    return MapDef("translateX", "X", "X", comps, ("f1", "f2", "phi", "g"))


def _tree_chain(outer, inner):
    """Tree-level composition outer o inner (inner a MapDef or component list)."""
    comps = inner.components if isinstance(inner, MapDef) else tuple(inner)
    names = outer.source_varspec().names
    from .expr import Add, Div, Mul, Neg, Pow, Sqrt, Sub

    def subst(e):
        if isinstance(e, Var):
            return comps[names.index(e.name)]
        if isinstance(e, Const):
            return e
        if isinstance(e, (Add, Sub, Mul, Div)):
            return type(e)(subst(e.a), subst(e.b))
        if isinstance(e, Pow):
            return Pow(subst(e.base), e.n)
        if isinstance(e, Sqrt):
            return Sqrt(subst(e.arg))
        if isinstance(e, Neg):
            return Neg(subst(e.arg))
        raise AutError(f"unknown node {e!r}")

    return tuple(subst(c) for c in outer.components)
