"""The factor Q in rho' o H = Q rho, the Hermitian tensor built from log Q,
its rank along the hypersurface, pluriharmonicity, and the Kaehler-Einstein
determinant identity of the model's one-sided neighborhood.

Q is computed by exact division: rho has unit w-coefficient, so each
weighted-homogeneous slice of rho' o H determines a slice of Q by a downward
recurrence in the w-degree, with a consistency check at degree zero.  The
tensor matrix uses the tangent frame Z_a = d/dz_a + 2i conj(z_a) d/dw (any
frame gives the same rank).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import models, series
from .expr import MapDef, expand_expr
from .scalars import EXACT, F64, Ex, I, sconj, to_field
from .series import TruncatedSeries, VarSpec


class AhlforsError(ValueError):
    pass


@dataclass
class QFactor:
    series: TruncatedSeries  # over the complexified source ring
    order: int
    field: str
    convention: str

    def constant(self):
        return self.series.constant_term()

    def positive_at_origin(self):
        c = self.constant()
        if self.field == EXACT:
            return isinstance(c, Ex) and c.is_real() and c.real > 0
        return abs(c.imag) < 1e-10 and c.real > 0


def _rho_pullback_series(H, order, field, convention):
    """rho_target(H, conj H) over the full complexified source ring."""
    if isinstance(H, MapDef):
        tmodel = models.get_model(H.target)
        cspec, un, ba = models.complexified_components(
            H, order, field, segre=False, convention=convention
        )
    else:
        comps = tuple(H)
        tmodel = models.get_model("X")
        cspec = comps[0].varspec.complexified()
        un = tuple(models.embed_series(c.truncate(order), cspec) for c in comps)
        ba = tuple(models.embed_series(c.truncate(order), cspec, barred=True) for c in comps)
    env = {}
    for n, u, b in zip(tmodel.varnames, un, ba):
        env[n] = u
        env[models.bar(n)] = b
    return cspec, expand_expr(tmodel.rho(convention), cspec, order, field, env=env)


def compute_Q(H, order, field=EXACT, convention=models.DEFAULT_CONVENTION):
    """Divide rho' o H by the source defining function, with certificate.

    H is a MapDef (or series tuple) based at the origin of the Heisenberg
    hypersurface.  Raises AhlforsError with the offending monomial when the
    division is inconsistent (i.e. the mapping residual is nonzero).
    """
    cspec, T = _rho_pullback_series(H, order + 2, field, convention)
    names = cspec.names
    iw = names.index("w")
    iwb = names.index("wb")
    iz = [names.index(n) for n in ("z1", "z2")]
    izb = [names.index(n) for n in ("z1b", "z2b")]
    two_i = to_field(Ex(0, 0, 2, 0), field)

    # S = wb + 2i z zb^t;  2i T = Q (w - S), solved per weighted-homogeneous slice
    s_table = {}
    e = [0] * len(names)
    e[iwb] = 1
    s_table[tuple(e)] = to_field(1, field)
    for a, b in zip(iz, izb):
        e = [0] * len(names)
        e[a] = 1
        e[b] = 1
        s_table[tuple(e)] = two_i
    S = TruncatedSeries(cspec, None, field, s_table, _raw=True)

    T2i = T.scale(two_i)
    q_total = {}
    tol = 0.0 if field == EXACT else 1e-10
    for d in range(0, order + 3):
        slice_d = T2i.homogeneous_part(d)
        by_w = {}
        for ee, c in slice_d.coeffs.items():
            by_w.setdefault(ee[iw], {})[ee] = c
        jmax = max(by_w) if by_w else 0
        q_parts = {}  # w-degree -> table (no w factor)
        prev = None
        for j in range(jmax, 0, -1):
            t_j = by_w.get(j, {})
            tbl = {}
            for ee, c in t_j.items():
                ne = list(ee)
                ne[iw] = 0
                tbl[tuple(ne)] = c
            cur = TruncatedSeries(cspec, None, field, tbl, _raw=True)
            if prev is not None:
                cur = cur + prev * S
            q_parts[j - 1] = cur
            prev = cur
        # consistency at w-degree 0
        t0 = TruncatedSeries(cspec, None, field, by_w.get(0, {}), _raw=True)
        resid = t0 + (prev * S if prev is not None else series.zero(cspec, None, field))
        if not _small(resid, tol):
            mono = resid.monomials()[0]
            raise AhlforsError(
                f"division inconsistency at weight {d}, monomial "
                f"{resid.monomial_str(mono)} (mapping residual nonzero?)"
            )
        for j, part in q_parts.items():
            for ee, c in part.coeffs.items():
                ne = list(ee)
                ne[iw] = j
                q_total[tuple(ne)] = c
    Q = TruncatedSeries(cspec, order, field, q_total)
    return QFactor(Q, order, field, convention)


def _small(s, tol):
    if tol == 0.0:
        return s.is_zero()
    return all(abs(complex(c)) <= tol for c in s.coeffs.values())


def q_certificate(H, qf, order=None):
    """Recheck rho' o H - Q rho == 0 to the Q factor's order."""
    order = order or qf.order
    cspec, T = _rho_pullback_series(H, order, qf.field, qf.convention)
    rho = expand_expr(models.get_model("H5").rho(), cspec, order, qf.field)
    diff = T - qf.series.truncate(order) * rho
    return diff.is_zero() if qf.field == EXACT else _small(diff, 1e-10), diff


def log_q(qf):
    c0 = qf.constant()
    if not qf.positive_at_origin():
        raise AhlforsError(f"Q(0) = {c0} is not a positive real")
    inv0 = (Ex(1) / c0) if qf.field == EXACT else 1 / c0
    return qf.series.scale(inv0).log_unit()


def ahlfors_matrix(qf, point=None):
    """Matrix of the log-Q tensor in the frame Z_a = d/dz_a + 2i conj(z_a) d/dw.

    point None evaluates at the origin (exact); otherwise numerically at the
    given (z1, z2, w) with bars bound to conjugates.
    """
    u = log_q(qf)
    spec = u.varspec
    du = {}
    for a in ("z1", "z2", "w"):
        for b in ("z1b", "z2b", "wb"):
            du[(a, b)] = u.partial(a).partial(b)
    if point is None:
        vals = {k: d.constant_term() for k, d in du.items()}
        zbar = (to_field(0, qf.field), to_field(0, qf.field))
        z = zbar
    else:
        env = {"z1": complex(point[0]), "z2": complex(point[1]), "w": complex(point[2])}
        env.update({models.bar(k): v.conjugate() for k, v in env.items()})
        vals = {k: d.eval_numeric(env) for k, d in du.items()}
        z = (env["z1"], env["z2"])
        zbar = (env["z1b"], env["z2b"])
    two_i = to_field(Ex(0, 0, 2, 0), qf.field) if point is None else 2j
    M = [[None, None], [None, None]]
    zs = ("z1", "z2")
    for a in range(2):
        for b in range(2):
            val = vals[(zs[a], zs[b] + "b")]
            val = val + two_i * zbar[a] * vals[("w", zs[b] + "b")]
            val = val - two_i * z[b] * vals[(zs[a], "wb")]
            val = val + (two_i * zbar[a]) * (-(two_i) * z[b]) * vals[("w", "wb")]
            M[a][b] = val
    return M


def matrix_rank(M, tol=1e-7):
    A = np.array([[complex(x) for x in row] for row in M])
    s = np.linalg.svd(A, compute_uv=False)
    floor = max(float(s[0]), 1.0)
    return int(np.sum(s >= tol * floor)), s


def is_hermitian(M, tol=0.0):
    for a in range(2):
        for b in range(2):
            d = complex(M[a][b]) - complex(M[b][a]).conjugate()
            if abs(d) > tol:
                return False
    return True


def pluriharmonic_test(qf, order=None):
    """All mixed holomorphic/antiholomorphic coefficients of log Q vanish."""
    u = log_q(qf)
    if order is not None:
        u = u.truncate(order)
    spec = u.varspec
    barred = [i for i, n in enumerate(spec.names) if n.endswith("b")]
    plain = [i for i, n in enumerate(spec.names) if not n.endswith("b")]
    tol = 0.0 if qf.field == EXACT else 1e-10
    for e in u.monomials():
        if any(e[i] for i in barred) and any(e[i] for i in plain):
            c = u.coeffs[e]
            if (qf.field == EXACT and c) or (qf.field == F64 and abs(complex(c)) > tol):
                return False, (u.monomial_str(e), c)
    return True, None


def recentered_series(H, point, order, field=F64):
    """H composed with the Heisenberg translation taking 0 to `point`."""
    spec = H.source_varspec()
    z0 = (complex(point[0]), complex(point[1]))
    w0 = complex(point[2])
    g1 = series.generator(spec, "z1", order, field)
    g2 = series.generator(spec, "z2", order, field)
    gw = series.generator(spec, "w", order, field)
    env = {
        "z1": g1 + series.const(spec, z0[0], order, field),
        "z2": g2 + series.const(spec, z0[1], order, field),
        "w": gw + series.const(spec, w0, order, field)
        + (g1.scale(z0[0].conjugate()) + g2.scale(z0[1].conjugate())).scale(2j),
    }
    return tuple(expand_expr(c, spec, order, field, env=env) for c in H.components)


def ahlfors_rank(H, points, tol=1e-7, convention=models.DEFAULT_CONVENTION):
    """Numeric tensor rank at each sampled source point (recentred per point)."""
    out = []
    for p in np.atleast_2d(np.asarray(points, dtype=complex)):
        comps = recentered_series(H, tuple(p), 4, F64)
        qf = compute_Q(comps, 2, F64, convention)
        M = ahlfors_matrix(qf)
        rank, _ = matrix_rank(M, tol)
        out.append(rank)
    return out


# -- Kaehler-Einstein determinant check ----------------------------------------

def ke_determinant_check(m=4, count=20, seed=0, tol=1e-8,
                         convention=models.DEFAULT_CONVENTION, dilation=None):
    """Evaluate det of both readings of the metric coefficients against
    (1/4) rho'^-m at interior points; report which reading passes.

    dilation (t) optionally rechecks the identity covariantly in the scaled
    coordinates (tZ, zeta, t^2 w), where both sides pick up |det J|^2.
    """
    model = models.get_model("X")
    cspec = model.complexified()
    rho = expand_expr(model.rho(convention), cspec, None, EXACT)
    names = ("z1", "z2", "zeta", "w")
    scale = {n: 1.0 for n in names}
    jac2 = 1.0
    if dilation is not None:
        t = float(dilation)
        scale = {"z1": t, "z2": t, "zeta": 1.0, "w": t * t}
        jac2 = (t * t * 1.0 * t * t) ** 2
        rho = _dilate(rho, cspec, scale)

    d1 = {n: rho.partial(n) for n in names}
    d1b = {n: rho.partial(models.bar(n)) for n in names}
    d2 = {(a, b): d1[a].partial(models.bar(b)) for a in names for b in names}

    rng = np.random.default_rng(seed)
    results = {"log": True, "plain": True}
    worst = {"log": 0.0, "plain": 0.0}
    used = 0
    while used < count:
        z1, z2, zeta = (complex(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)) for _ in range(3))
        zeta *= 0.5
        w = complex(rng.uniform(-0.2, 0.2), rng.uniform(0.5, 1.5))
        env = {"z1": z1, "z2": z2, "zeta": zeta, "w": w}
        env = {k: v / scale[k] for k, v in env.items()}  # keep rho values moderate
        env.update({models.bar(k): v.conjugate() for k, v in env.items()})
        rv = rho.eval_numeric(env).real
        if rv <= 1e-3:
            continue
        used += 1
        H_plain = np.array([[d2[(a, b)].eval_numeric(env) for b in names] for a in names])
        grad = np.array([d1[a].eval_numeric(env) for a in names])
        gradb = np.array([d1b[a].eval_numeric(env) for a in names])
        H_log = H_plain / rv - np.outer(grad, gradb) / rv**2
        target = jac2 * 0.25 * rv ** (-float(m))
        for key, Hm in (("log", H_log), ("plain", H_plain)):
            det = complex(np.linalg.det(Hm))
            rel = abs(det - target) / abs(target)
            worst[key] = max(worst[key], rel)
            if rel > tol:
                results[key] = False
    passing = [k for k, v in results.items() if v]
    return {
        "m": m,
        "convention": convention,
        "points": used,
        "log_passes": results["log"],
        "plain_passes": results["plain"],
        "max_rel_error": worst,
        "passing_interpretation": passing[0] if len(passing) == 1 else passing,
        "dilation": dilation,
    }


def _dilate(s, cspec, scale):
    table = {}
    names = cspec.names
    for e, c in s.coeffs.items():
        f = 1.0
        for i, k in enumerate(e):
            if k:
                n = names[i]
                base = scale.get(n, scale.get(n[:-1], 1.0))
                f *= base**k
        table[e] = complex(c) * f
    return TruncatedSeries(cspec, s.order, F64, table)
