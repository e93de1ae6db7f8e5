"""Hypersurface models: defining functions, complexified mapping-equation
residuals, transversality at the origin, and numeric point sampling.

The X model (local light-cone tube) carries both sign conventions for its
Re-term -- "zbar" (Re(conj(zeta) z z^t)) and "z" (Re(zeta Z Z^t)).  The
default is "zbar": every catalog map and the Kaehler identities verify under
it, and the reports record per-identity verdicts for both.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dfield

import numpy as np

from . import expr, scalars, series
from .expr import AMBIENT, Const, MapDef, Sqrt, Var, conj_tree, expand_expr
from .scalars import EXACT, F64, Ex, I, sconj, to_field
from .series import TruncatedSeries, VarSpec

DEFAULT_CONVENTION = "zbar"
CONVENTIONS = ("zbar", "z")


class ModelError(ValueError):
    pass


def bar(name):
    return name + "b"


def _half(x):
    return x * Const(scalars.HALF)


# -- defining functions, as trees over ambient variables and their bars ------

def _rho_heisenberg(names):
    z = [Var(n) for n in names[:-1]]
    zb = [Var(bar(n)) for n in names[:-1]]
    w, wb = Var(names[-1]), Var(bar(names[-1]))
    lever = (w - wb) / Const(Ex(0, 0, 2, 0))  # (w - wb)/(2i)
    pair = sum((a * b for a, b in zip(z, zb)), Const(0))
    return lever - pair


def _rho_x(convention):
    z1, z2, zeta, w = (Var(n) for n in AMBIENT["X"][0])
    z1b, z2b, zetab, wb = (Var(bar(n)) for n in AMBIENT["X"][0])
    zz = z1 * z1 + z2 * z2
    zzb = z1b * z1b + z2b * z2b
    lever = (Const(1) - zeta * zetab) * (w - wb) / Const(Ex(0, 0, 2, 0))
    pair = z1 * z1b + z2 * z2b
    if convention == "zbar":
        cross = _half(zetab * zz + zeta * zzb)
    else:
        cross = _half(zeta * zz + zetab * zzb)
    return lever - pair - cross


def _rho_tube():
    parts = []
    for n in AMBIENT["T"][0]:
        re = _half(Var(n) + Var(bar(n)))
        parts.append(re * re)
    z1s, z2s, z3s, ws = parts
    return -ws + z1s + z2s + z3s


def _rho_sphere():
    z1, z2, w = (Var(n) for n in AMBIENT["S5"][0])
    z1b, z2b, wb = (Var(bar(n)) for n in AMBIENT["S5"][0])
    return z1 * z1b + z2 * z2b + w * wb - Const(1)


def _rho_div4():
    zs = [Var(n) for n in AMBIENT["DIV4"][0]]
    zbs = [Var(bar(n)) for n in AMBIENT["DIV4"][0]]
    pair = sum((a * b for a, b in zip(zs, zbs)), Const(0))
    zz = sum((a * a for a in zs), Const(0))
    zzb = sum((b * b for b in zbs), Const(0))
    return Const(1) - Const(2) * pair + zz * zzb


def _rho_hyperquadric():
    ys = [Var(n) for n in AMBIENT["C5"][0]]
    ybs = [Var(bar(n)) for n in AMBIENT["C5"][0]]
    lever = (ys[4] - ybs[4]) / Const(Ex(0, 0, 2, 0))
    return lever - ys[0] * ybs[0] - ys[1] * ybs[1] - ys[2] * ybs[2] + ys[3] * ybs[3]


@dataclass(frozen=True)
class HypersurfaceModel:
    id: str
    varnames: tuple
    weights: tuple
    rho_tree: object  # ExprTree in varnames + bars; None for plain ambients
    solvable: bool = True
    extra: dict = dfield(default_factory=dict)

    def varspec(self):
        return VarSpec(self.varnames, self.weights)

    def complexified(self):
        return self.varspec().complexified()

    def rho(self, convention=DEFAULT_CONVENTION):
        if self.id == "X":
            return self.extra[convention]
        return self.rho_tree


def _build_models():
    out = {}
    for mid in ("H5", "SIEGEL"):
        names, weights = AMBIENT[mid]
        out[mid] = HypersurfaceModel(mid, names, weights, _rho_heisenberg(names))
    names, weights = AMBIENT["X"]
    out["X"] = HypersurfaceModel(
        "X", names, weights, _rho_x("zbar"),
        extra={"zbar": _rho_x("zbar"), "z": _rho_x("z")},
    )
    out["T"] = HypersurfaceModel("T", *AMBIENT["T"], _rho_tube())
    out["S5"] = HypersurfaceModel("S5", *AMBIENT["S5"], _rho_sphere())
    out["DIV4"] = HypersurfaceModel("DIV4", *AMBIENT["DIV4"], _rho_div4(), solvable=False)
    out["HQ9"] = HypersurfaceModel("HQ9", *AMBIENT["C5"], _rho_hyperquadric())
    for mid in ("C3", "C4", "C5"):
        out[mid] = HypersurfaceModel(mid, *AMBIENT[mid], None, solvable=False)
    return out


MODELS = _build_models()


def get_model(mid):
    try:
        return MODELS[mid]
    except KeyError:
        raise ModelError(f"unknown model {mid!r}") from None


# -- complexified Segre environments -----------------------------------------

def segre_env(model, order, field, base=None, convention=DEFAULT_CONVENTION):
    """Environment realizing the complexified hypersurface of `model`.

    Returns (cspec, env) where env maps every ambient variable name to its
    recentered series (solved variable replaced by the Segre solve) and every
    barred name to its free recentered generator.  Substituting env into any
    map component gives its restriction to the complexified hypersurface
    through `base`.
    """
    model = get_model(model) if isinstance(model, str) else model
    if not model.solvable:
        raise ModelError(f"model {model.id} has no Segre substitution")
    names = model.varnames
    if base is None:
        base = tuple(Ex(0) for _ in names)
    base = tuple(to_field(b, field) for b in base)
    cspec = model.complexified()
    g = cspec.gens(order, field)

    env = {}
    for n, b in zip(names, base):
        env[n] = g[n] + series.const(cspec, b, order, field)
        env[bar(n)] = g[bar(n)] + series.const(cspec, sconj(b), order, field)

    last = names[-1]
    if model.id in ("H5", "SIEGEL"):
        acc = series.zero(cspec, order, field)
        for n, b in zip(names[:-1], base[:-1]):
            acc = acc + g[n].scale(sconj(b)) + g[bar(n)].scale(b) + g[n] * g[bar(n)]
        two_i = to_field(Ex(0, 0, 2, 0), field)
        env[last] = series.const(cspec, base[-1], order, field) + g[bar(last)] + acc.scale(two_i)
    elif model.id == "X":
        if any(complex(b) != 0 for b in base):
            raise ModelError("X Segre solve implemented at the origin only")
        z1, z2, zeta = g["z1"], g["z2"], g["zeta"]
        z1b, z2b, zetab = g["z1b"], g["z2b"], g["zetab"]
        zz = z1 * z1 + z2 * z2
        zzb = z1b * z1b + z2b * z2b
        if convention == "zbar":
            cross = zetab * zz + zeta * zzb
        else:
            cross = zeta * zz + zetab * zzb
        num = ((z1 * z1b + z2 * z2b).scale(2) + cross).scale(to_field(I, field))
        one = series.const(cspec, 1, order, field)
        env[last] = g["wb"] + num * (one - zeta * zetab).invert_unit()
    elif model.id == "T":
        rad = series.zero(cspec, order, field)
        for n, b in zip(names[:-1], base[:-1]):
            c = b + sconj(b)
            t = g[n] + g[bar(n)] + series.const(cspec, c, order, field)
            rad = rad + t * t
        c0 = rad.constant_term()
        root0 = scalars.scalar_sqrt(c0, field)  # = 2 Re w0 > 0 on the tube
        inv0 = (Ex(1) / c0) if field == EXACT else 1 / c0
        root = rad.scale(inv0).sqrt_unit().scale(root0)
        wconst = base[-1] + sconj(base[-1])
        env[last] = root - series.const(cspec, wconst, order, field) - g[bar(last)] \
            + series.const(cspec, base[-1], order, field)
    elif model.id == "S5":
        w0 = base[-1]
        if complex(w0) == 0:
            raise ModelError("sphere Segre solve needs a base point with w != 0")
        acc = g["wb"].scale(w0)
        for n, b in zip(names[:-1], base[:-1]):
            acc = acc + g[n].scale(sconj(b)) + g[bar(n)].scale(b) + g[n] * g[bar(n)]
        den = g["wb"] + series.const(cspec, sconj(w0), order, field)
        env[last] = series.const(cspec, base[-1], order, field) - acc * den.invert_unit()
    elif model.id == "HQ9":
        two_i = to_field(Ex(0, 0, 2, 0), field)
        acc = g["y1"] * g["y1b"] + g["y2"] * g["y2b"] + g["y3"] * g["y3b"] - g["y4"] * g["y4b"]
        env[last] = series.const(cspec, base[-1], order, field) + g[bar(last)] + acc.scale(two_i)
    else:
        raise ModelError(f"model {model.id} has no Segre substitution")
    return cspec, env


def segre_annihilation_check(model_id, order=10, field=EXACT, base=None):
    """rho composed with its own Segre solve must vanish identically."""
    model = get_model(model_id)
    cspec, env = segre_env(model, order, field, base=base)
    res = expand_expr(model.rho(), cspec, order, field, env=env)
    return res.is_zero(), res


# -- residuals ----------------------------------------------------------------

@dataclass
class Residual:
    series: TruncatedSeries
    order: int
    min_violating_order: int = None

    @property
    def is_zero(self):
        return self.series.is_zero()

    def max_abs(self):
        return max((abs(complex(c)) for c in self.series.coeffs.values()), default=0.0)

    def report(self):
        return {
            "residual_zero": self.is_zero,
            "min_violating_order": self.min_violating_order,
            "order": self.order,
        }


def complexified_components(H, order, field, base=None, segre=True,
                            convention=DEFAULT_CONVENTION, source=None):
    """Component series of H and conj(H) on the (complexified) source.

    With segre=True the source's solved variable is eliminated by the Segre
    substitution at `base`; otherwise the full complexified ambient is kept.
    Returns (cspec, unbarred components, barred components).
    """
    smodel = get_model(source or H.source)
    if segre:
        cspec, env = segre_env(smodel, order, field, base=base, convention=convention)
    else:
        cspec = smodel.complexified()
        g = cspec.gens(order, field)
        if base is None:
            base = tuple(Ex(0) for _ in smodel.varnames)
        env = {}
        for n, b in zip(smodel.varnames, base):
            env[n] = g[n] + series.const(cspec, to_field(b, field), order, field)
            env[bar(n)] = g[bar(n)] + series.const(cspec, sconj(to_field(b, field)), order, field)
    un = tuple(expand_expr(c, cspec, order, field, env=env) for c in H.components)
    ba = tuple(
        expand_expr(conj_tree(c, bar), cspec, order, field, env=env)
        for c in H.components
    )
    return cspec, un, ba


def mapping_residual(H, order, field=EXACT, base=None, convention=DEFAULT_CONVENTION,
                     source=None, target=None):
    """Residual of the mapping equation for H along the complexified source.

    Zero coefficient table iff H sends the source hypersurface into the
    target to the given weighted order.
    """
    tmodel = get_model(target or H.target)
    if tmodel.rho_tree is None and tmodel.id != "X":
        raise ModelError(f"target {tmodel.id} has no defining function")
    cspec, un, ba = complexified_components(
        H, order, field, base=base, segre=True, convention=convention, source=source
    )
    env = {}
    for n, u, b in zip(tmodel.varnames, un, ba):
        env[n] = u
        env[bar(n)] = b
    res = expand_expr(tmodel.rho(convention), cspec, order, field, env=env)
    viol = res.valuation()
    return Residual(res, order, viol)


def embed_series(c, cspec, barred=False):
    """Embed a source-ambient series into the complexified ring.

    barred=True produces the formal conjugate (coefficients conjugated,
    variables sent to their barred partners).
    """
    src = c.varspec
    idx = [cspec.index(bar(n) if barred else n) for n in src.names]
    table = {}
    for e, v in c.coeffs.items():
        ne = [0] * len(cspec.names)
        for i, k in enumerate(e):
            ne[idx[i]] = k
        table[tuple(ne)] = sconj(v) if barred else v
    return TruncatedSeries(cspec, c.order, c.field, table, _raw=True)


def mapping_residual_series(comps, order, field=EXACT, source="H5", target="X",
                            convention=DEFAULT_CONVENTION):
    """Mapping residual for a map given by component series at the origin."""
    smodel = get_model(source)
    tmodel = get_model(target)
    cspec, senv = segre_env(smodel, order, field, convention=convention)
    solved = smodel.varnames[-1]
    un, ba = [], []
    for c in comps:
        cb = embed_series(c.truncate(order), cspec, barred=False)
        un.append(cb.substitute({solved: senv[solved]}, varspec=cspec, order=order))
        ba.append(embed_series(c.truncate(order), cspec, barred=True))
    env = {}
    for n, u, b in zip(tmodel.varnames, un, ba):
        env[n] = u
        env[bar(n)] = b
    res = expand_expr(tmodel.rho(convention), cspec, order, field, env=env)
    return Residual(res, order, res.valuation())


def transversality_at_origin(H, field=EXACT, tol=1e-9):
    """g_w(0) of an origin-preserving map into an X- or T-like target."""
    spec = H.source_varspec()
    comps = H.expand(2, field)
    for lab, c in zip(H.labels, comps):
        if not scalars.is_zero(c.constant_term(), 1e-14 if field == F64 else 0.0):
            raise ModelError(f"H(0) != 0 (component {lab})")
    g = comps[-1]
    wname = spec.names[-1]
    gw = g.coefficient(**{wname: 1})
    if field == EXACT:
        ok = isinstance(gw, Ex) and gw.is_real() and gw.real > 0
    else:
        ok = abs(gw.imag) <= tol and gw.real > tol
    return ok, gw


# -- numeric sampling ----------------------------------------------------------

def sample_points(model_id, count, seed, base=None, radius=0.3, convention=DEFAULT_CONVENTION):
    """Points on the model, exact by parametrization, deterministic in seed."""
    if count < 1:
        raise ModelError("count must be >= 1")
    rng = np.random.default_rng(seed)
    mid = model_id if isinstance(model_id, str) else model_id.id

    def cbox(n):
        return rng.uniform(-radius, radius, n) + 1j * rng.uniform(-radius, radius, n)

    if mid in ("H5", "SIEGEL"):
        z1, z2 = cbox(count), cbox(count)
        t = rng.uniform(-radius, radius, count)
        w = t + 1j * (abs(z1) ** 2 + abs(z2) ** 2)
        pts = np.stack([z1, z2, w], axis=1)
        if base is not None:
            b = np.asarray([complex(x) for x in base])
            zb = pts[:, 0] * np.conj(b[0]) + pts[:, 1] * np.conj(b[1])
            pts = np.stack([pts[:, 0] + b[0], pts[:, 1] + b[1], pts[:, 2] + b[2] + 2j * zb], axis=1)
        return pts
    if mid == "X":
        z1, z2, zeta = cbox(count), cbox(count), cbox(count) * 0.5
        t = rng.uniform(-radius, radius, count)
        zz = z1 * z1 + z2 * z2
        if convention == "zbar":
            cross = (np.conj(zeta) * zz).real
        else:
            cross = (zeta * zz).real
        im = (abs(z1) ** 2 + abs(z2) ** 2 + cross) / (1 - abs(zeta) ** 2)
        return np.stack([z1, z2, zeta, t + 1j * im], axis=1)
    if mid == "T":
        b = (0.0, 0.0, -0.5, 0.5) if base is None else tuple(complex(x).real for x in base)
        x1 = b[0] + rng.uniform(-radius / 2, radius / 2, count)
        x2 = b[1] + rng.uniform(-radius / 2, radius / 2, count)
        x3 = b[2] + rng.uniform(-radius / 2, radius / 2, count)
        x4 = np.sqrt(x1 * x1 + x2 * x2 + x3 * x3)
        ys = rng.uniform(-radius, radius, (4, count))
        return np.stack([x1 + 1j * ys[0], x2 + 1j * ys[1], x3 + 1j * ys[2], x4 + 1j * ys[3]], axis=1)
    if mid == "S5":
        if base is None:
            base = (0, 0, 1)
        b = np.asarray([complex(x) for x in base])
        z1 = b[0] + cbox(count) * 0.5
        z2 = b[1] + cbox(count) * 0.5
        mod = np.sqrt(1 - abs(z1) ** 2 - abs(z2) ** 2)
        phase = np.exp(1j * (np.angle(b[2]) + rng.uniform(-radius, radius, count)))
        return np.stack([z1, z2, mod * phase], axis=1)
    if mid == "DIV4":
        t = rng.uniform(0.05, max(radius, 0.1), count)
        x = rng.normal(size=(count, 4))
        x /= np.linalg.norm(x, axis=1)[:, None]
        y = rng.normal(size=(count, 4))
        y -= (np.sum(x * y, axis=1))[:, None] * x
        y /= np.linalg.norm(y, axis=1)[:, None]
        Z = (1 - t)[:, None] * x + 1j * t[:, None] * y
        return Z
    raise ModelError(f"no sampler for model {mid!r}")


def rho_numeric(model_id, pts, convention=DEFAULT_CONVENTION):
    """Real defining-function values at numeric points (rows)."""
    model = get_model(model_id)
    pts = np.asarray(pts)
    env = {}
    for j, n in enumerate(model.varnames):
        env[n] = pts[:, j]
        env[bar(n)] = np.conj(pts[:, j])
    vals = expr.eval_numeric(model.rho(convention), env)
    return np.real(vals)


def numeric_boundary_check(H, source, target, count, seed, tol,
                           base=None, radius=0.3, convention=DEFAULT_CONVENTION):
    """Max |rho_target(H(p))| over sampled source points; pass iff <= tol."""
    pts = sample_points(source, count, seed, base=base, radius=radius, convention=convention)
    env = {n: pts[:, j] for j, n in enumerate(get_model(source).varnames)}
    imgs = H.eval_numeric(env)
    imgs = np.stack([np.broadcast_to(c, pts.shape[0]) for c in imgs], axis=1)
    finite = np.all(np.isfinite(imgs), axis=1)
    big = np.max(np.abs(imgs), axis=1, initial=0.0) < 1e8
    keep = finite & big
    vals = rho_numeric(target, imgs[keep], convention=convention)
    max_res = float(np.max(np.abs(vals))) if len(vals) else float("nan")
    return {
        "map": H.name,
        "model_pair": [source if isinstance(source, str) else source.id,
                       target if isinstance(target, str) else target.id],
        "order": None,
        "residual_zero": bool(max_res <= tol),
        "min_violating_order": None,
        "numeric_max_residual": max_res,
        "points_used": int(keep.sum()),
        "points_excluded": int((~keep).sum()),
        "seed": seed,
    }
