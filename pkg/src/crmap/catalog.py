"""The built-in catalog of named CR maps, with base points and the exact
composition identities tying them together.

Rational entries are written in map-file syntax (which also exercises the
parser on every import); the two-parameter family H_A(alpha,beta) and the
rank-one family P_B(cos,sin) are generated programmatically.  The stored T2
differs from its published form in the sign of the w-terms of the last
component; the published form does not map the Heisenberg hypersurface into
the tube (see the verdict report), the stored one equals G o r exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as Fr

from . import expr, models, series
from .expr import Const, MapDef, Sqrt, Var, expand_expr, parse_mapfile
from .scalars import EXACT, F64, Ex, I, SQRT2, exact, sconj, to_field
from .series import TruncatedSeries


class CatalogError(KeyError):
    pass


_SOURCE = """
# classification representatives, Heisenberg -> light-cone model
map ell : H5 -> X { f1 = z1; f2 = z2; phi = 0; g = w; }

map r : H5 -> X {
  f1  = z1*(1+i*w)/(1-w^2);
  f2  = z2*(1-i*w)/(1-w^2);
  phi = 2*(z1^2-z2^2)/(1-w^2);
  g   = w/(1-w^2);
}

map iota : H5 -> X {
  f1  = 2*z1/(1+sqrt(1-4*w^2-4*i*(z1^2+z2^2)));
  f2  = 2*z2/(1+sqrt(1-4*w^2-4*i*(z1^2+z2^2)));
  phi = 2*w/(1+sqrt(1-4*w^2-4*i*(z1^2+z2^2)));
  g   = 2*w/(1+sqrt(1-4*w^2-4*i*(z1^2+z2^2)));
}

# local equivalence of the tube and its model
map F : T -> X {
  f1  = 2*z1/(1+w-z3);
  f2  = 2*z2/(1+w-z3);
  phi = (1-w+z3)/(1+w-z3);
  g   = 2*i*(w+w^2-(z1^2+z2^2)+z3-z3^2)/(1+w-z3);
}

map G : X -> T {
  c1 = z1/(1+zeta);
  c2 = z2/(1+zeta);
  c3 = (-2+(z1^2+z2^2)+2*zeta-i*w*(1+zeta))/(4*(1+zeta));
  c4 = (2+(z1^2+z2^2)-2*zeta-i*w*(1+zeta))/(4*(1+zeta));
}

# Heisenberg into the tube
map T1 : H5 -> T {
  c1 = z1;
  c2 = z2;
  c3 = ((z1^2+z2^2)-i*w-2)/4;
  c4 = ((z1^2+z2^2)-i*w+2)/4;
}

map T2 : H5 -> T {
  c1 = z1*(1+i*w)/(1-w^2+2*(z1^2-z2^2));
  c2 = z2*(1-i*w)/(1-w^2+2*(z1^2-z2^2));
  c3 = (2*w^2-i*w-2+(z1^2+z2^2)+4*(z1^2-z2^2))/(4*(1-w^2+2*(z1^2-z2^2)));
  c4 = (-2*w^2-i*w+2+(z1^2+z2^2)-4*(z1^2-z2^2))/(4*(1-w^2+2*(z1^2-z2^2)));
}

# light-cone model onto the type-IV boundary
map Phi : X -> DIV4 {
  c1 = 2*i*z1/(2*i+w);
  c2 = 2*i*z2/(2*i+w);
  c3 = (2*i-w-2*i*zeta-(w*zeta+i*(z1^2+z2^2)))/(2*(2*i+w));
  c4 = i*(2*i-w+2*i*zeta+(w*zeta+i*(z1^2+z2^2)))/(2*(2*i+w));
}

# Cayley transforms, sphere -> Heisenberg
map C1 : S5 -> H5 {
  f1 = sqrt(2)*z1/(1+w);
  f2 = sqrt(2)*z2/(1+w);
  g  = 2*i*(1-w)/(1+w);
}

map C2 : S5 -> H5 {
  f1 = 2*z1/(1-w);
  f2 = -(2*z2)/(1-w);
  g  = 4*i*(1+w)/(1-w);
}

# proper-map representatives, sphere -> type-IV boundary
map R0 : S5 -> DIV4 {
  c1 = z1/sqrt(2);
  c2 = z2/sqrt(2);
  c3 = (2*w^2+2*w-(z1^2+z2^2))/(4*(w+1));
  c4 = i*(2*w^2+2*w+(z1^2+z2^2))/(4*(w+1));
}

map I : S5 -> DIV4 {
  c1 = z1/sqrt(2);
  c2 = z2/sqrt(2);
  c3 = w/sqrt(2);
  c4 = (1-sqrt(1-(z1^2+z2^2)-w^2))/sqrt(2);
}

map P : S5 -> DIV4 {
  c1 = z1;
  c2 = z2*w;
  c3 = (w^2-z2^2)/2;
  c4 = i*(w^2+z2^2)/2;
}

# graph embedding of the model into C^5 (target carries the indefinite
# hyperquadric via models.MODELS['HQ9'])
map Psi : X -> C5 {
  y1 = z1;
  y2 = z2;
  y3 = (w*zeta+i*(z1^2+z2^2)+i*zeta)/2;
  y4 = (w*zeta+i*(z1^2+z2^2)-i*zeta)/2;
  y5 = w;
}
"""


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    mapdef: MapDef
    base: tuple
    image_base: tuple
    tag: str

    def as_series(self, order, field=EXACT):
        return SeriesMap.from_entry(self, order, field)


@dataclass
class SeriesMap:
    """Component series about a base point, constants included."""

    comps: tuple
    spec: object
    base: tuple
    image_base: tuple

    @staticmethod
    def from_entry(entry, order, field=EXACT):
        spec = entry.mapdef.source_varspec()
        env = _recenter_env(spec, entry.base, order, field)
        comps = tuple(expand_expr(c, spec, order, field, env=env) for c in entry.mapdef.components)
        return SeriesMap(comps, spec, entry.base, entry.image_base)


def _recenter_env(spec, base, order, field):
    env = {}
    for n, b in zip(spec.names, base):
        g = series.generator(spec, n, order, field)
        env[n] = g + series.const(spec, to_field(b, field), order, field)
    return env


_P_IMG = (exact(0), exact(0), exact(Fr(1, 2)), exact(0, Fr(1, 2)))
_TUBE_P = (exact(0), exact(0), exact(Fr(-1, 2)), exact(Fr(1, 2)))

_BASES = {
    "ell": ((0, 0, 0), (0, 0, 0, 0), "linear isometric representative"),
    "r": ((0, 0, 0), (0, 0, 0, 0), "rational rank-2 representative"),
    "iota": ((0, 0, 0), (0, 0, 0, 0), "irrational isometric representative"),
    "F": (_TUBE_P, (0, 0, 0, 0), "tube-to-model equivalence"),
    "G": ((0, 0, 0, 0), _TUBE_P, "model-to-tube equivalence (local inverse of F)"),
    "T1": ((0, 0, 0), _TUBE_P, "quadratic Heisenberg-to-tube map, equals G o ell"),
    "T2": ((0, 0, 0), _TUBE_P, "rational Heisenberg-to-tube map, equals G o r"),
    "Phi": ((0, 0, 0, 0), _P_IMG, "model onto the type-IV boundary"),
    "C1": ((0, 0, 1), (0, 0, 0), "sphere-to-Heisenberg Cayley transform"),
    "C2": ((0, 0, -1), (0, 0, 0), "sphere-to-Heisenberg Cayley transform (second chart)"),
    "R0": ((0, 0, 1), _P_IMG, "rational isometric proper map, equals Phi o ell o C1"),
    "I": (
        (exact(0, Fr(3, 5)), exact(0), exact(Fr(4, 5))),
        None,  # computed below
        "irrational isometric proper map",
    ),
    "P": ((0, 0, -1), _P_IMG, "polynomial non-isometric proper map"),
    "Psi": ((0, 0, 0, 0), (0, 0, 0, 0, 0), "graph embedding into the indefinite hyperquadric"),
}


def _numeric_image(mapdef, base):
    env = {n: complex(b) for n, b in zip(mapdef.source_varspec().names, base)}
    return tuple(mapdef.eval_numeric(env))


def _exact_image_I():
    # I at ((3/5)i, 0, 4/5): radicand 1 - zz^t - w^2 = 18/25, sqrt = (3/5) sqrt2
    half_s2 = Ex(0, Fr(1, 2))  # 1/sqrt(2) = sqrt2/2
    root = Ex(0, Fr(3, 5))
    return (
        exact(0, Fr(3, 5)) * half_s2,
        exact(0),
        exact(Fr(4, 5)) * half_s2,
        (Ex(1) - root) * half_s2,
    )


def _build():
    entries = {}
    for mdef in parse_mapfile(_SOURCE):
        base, img, tag = _BASES[mdef.name]
        if img is None:
            img = _exact_image_I()
        entries[mdef.name] = CatalogEntry(mdef.name, mdef, tuple(base), tuple(img), tag)
    return entries


_ENTRIES = _build()


def names():
    return sorted(_ENTRIES)


def get(name):
    """Catalog entry by name; 'HA:a,b' and 'PB:c,s' address the families."""
    if name in _ENTRIES:
        return _ENTRIES[name]
    if name.startswith("HA:"):
        al, be = (Fr(x) for x in name[3:].split(","))
        return h_A(al, be)
    if name.startswith("PB:"):
        c, s = (Fr(x) for x in name[3:].split(","))
        return p_B(c, s)
    raise CatalogError(f"unknown catalog map {name!r}")


def h_A(alpha, beta):
    """The rational family with normal-form matrix A_{alpha,beta} (exact params)."""
    al, be = exact(Fr(alpha)), exact(Fr(beta))
    z1, z2, w = Var("z1"), Var("z2"), Var("w")
    rho2 = al * al + be * be
    delta = Const(exact(4)) - Const(rho2) * w * w
    za1 = Const(al) * z1 + Const(be) * z2  # (z A)_1
    za2 = Const(be) * z1 - Const(al) * z2  # (z A)_2
    zaz = Const(al) * (z1 * z1 - z2 * z2) + Const(2) * Const(be) * z1 * z2
    comps = (
        Const(exact(2)) * (Const(exact(2)) * z1 + Const(I) * w * za1) / delta,
        Const(exact(2)) * (Const(exact(2)) * z2 + Const(I) * w * za2) / delta,
        Const(exact(4)) * zaz / delta,
        Const(exact(4)) * w / delta,
    )
    name = f"HA:{Fr(alpha)},{Fr(beta)}"
    mdef = MapDef(name, "H5", "X", comps, ("f1", "f2", "phi", "g"))
    return CatalogEntry(name, mdef, (0, 0, 0), (0, 0, 0, 0),
                        "rational family member from the holomorphic system solution")


def p_B(cos_s, sin_s, name=None, exact_params=True):
    """Proper-map family with B = v^t v, v = (cos s, sin s).

    exact_params demands an exact point on the unit circle; floats build a
    numeric-only entry.
    """
    if exact_params:
        c, s = exact(Fr(cos_s)), exact(Fr(sin_s))
        if c * c + s * s != Ex(1):
            raise CatalogError("PB parameters must satisfy cos^2 + sin^2 = 1")
        cc, cs, ss = Const(c * c), Const(c * s), Const(s * s)
        half = Const(exact(Fr(1, 2)))
        mhalf_i = Const(exact(0, Fr(-1, 2)))  # 1/(2i)
    else:
        c, s = complex(cos_s), complex(sin_s)
        cc, cs, ss = Const(c * c), Const(c * s), Const(s * s)
        half = Const(0.5 + 0j)
        mhalf_i = Const(-0.5j)
    z1, z2, w = Var("z1"), Var("z2"), Var("w")
    zb1 = cc * z1 + cs * z2
    zb2 = cs * z1 + ss * z2
    zbz = z1 * zb1 + z2 * zb2
    comps = (
        z1 + (w - Const(1)) * zb1,
        z2 + (w - Const(1)) * zb2,
        half * (w * w - zbz),
        mhalf_i * (w * w + zbz),
    )
    name = name or f"PB:{cos_s},{sin_s}"
    mdef = MapDef(name, "S5", "DIV4", comps, ("c1", "c2", "c3", "c4"))
    img = _numeric_image(mdef, (0, 0, 1)) if not exact_params else (
        exact(0), exact(0), exact(Fr(1, 2)), exact(0, Fr(-1, 2)))
    return CatalogEntry(name, mdef, (0, 0, 1), img, "proper family, equivalent to P")


# -- composition and identity checking --------------------------------------

def compose_maps(outer, inner, order, field=EXACT):
    """Series of outer o inner about inner's base point.

    inner: CatalogEntry or SeriesMap; outer: CatalogEntry (or MapDef taken at
    base 0).  The inner image base must equal the outer base.
    """
    if isinstance(inner, CatalogEntry):
        inner = inner.as_series(order, field)
    if isinstance(outer, CatalogEntry):
        outer_def, outer_base, outer_img = outer.mapdef, outer.base, outer.image_base
    else:
        outer_def = outer
        outer_base = tuple(0 for _ in outer.source_varspec().names)
        outer_img = None
    onames = outer_def.source_varspec().names
    if len(onames) != len(inner.comps):
        raise CatalogError("composition dimension mismatch")
    for b, c in zip(outer_base, inner.comps):
        delta = complex(c.constant_term()) - complex(to_field(b, F64))
        if abs(delta) > 1e-12:
            raise CatalogError(f"base mismatch in composition: |Delta| = {abs(delta):.2e}")
    env = {n: c for n, c in zip(onames, inner.comps)}
    comps = tuple(
        expand_expr(t, inner.spec, order, field, env=env) for t in outer_def.components
    )
    if outer_img is None:
        outer_img = tuple(c.constant_term() for c in comps)
    return SeriesMap(comps, inner.spec, inner.base, outer_img)


def verify_identity(lhs, rhs, tol=None):
    """Equality verdict for two series tuples; on failure, first discrepancy."""
    lc = lhs.comps if isinstance(lhs, SeriesMap) else tuple(lhs)
    rc = rhs.comps if isinstance(rhs, SeriesMap) else tuple(rhs)
    if len(lc) != len(rc):
        return False, ("component count", len(lc), len(rc))
    for k, (a, b) in enumerate(zip(lc, rc)):
        if tol is None:
            d = a.first_difference(b)
            if d is not None:
                return False, (f"component {k+1}, monomial {d[0]}", d[1], d[2])
        else:
            m = a.max_coeff_diff(b)
            if m > tol:
                return False, (f"component {k+1}", m, tol)
    return True, None


def entry_residual(name, order=8, field=EXACT, convention=models.DEFAULT_CONVENTION):
    """Mapping-equation residual of a catalog entry at its base point."""
    e = get(name) if isinstance(name, str) else name
    return models.mapping_residual(
        e.mapdef, order, field=field, base=e.base, convention=convention
    )


# -- the exact polynomial identities of the isometry section ----------------

def rho_pullback_factor(name, order, field=EXACT, convention=models.DEFAULT_CONVENTION):
    """(rho_target o H, rho_source) as series on the full complexified source."""
    e = get(name) if isinstance(name, str) else name
    tmodel = models.get_model(e.mapdef.target)
    cspec, un, ba = models.complexified_components(
        e.mapdef, order, field, segre=False, convention=convention
    )
    env = {}
    for n, u, b in zip(tmodel.varnames, un, ba):
        env[n] = u
        env[models.bar(n)] = b
    lhs = expand_expr(tmodel.rho(convention), cspec, order, field, env=env)
    smodel = models.get_model(e.mapdef.source)
    rho_src = expand_expr(smodel.rho(convention), cspec, order, field)
    return lhs, rho_src


def psi_quadric_identity(field=EXACT, convention=models.DEFAULT_CONVENTION):
    """Exact polynomial check: hyperquadric rho composed with Psi equals rho'."""
    e = get("Psi")
    hq = models.MODELS["HQ9"]
    cspec, un, ba = models.complexified_components(
        e.mapdef, None, field, segre=False, convention=convention
    )
    env = {}
    for n, u, b in zip(hq.varnames, un, ba):
        env[n] = u
        env[models.bar(n)] = b
    lhs = expand_expr(hq.rho(), cspec, None, field, env=env)
    rhs = expand_expr(models.MODELS["X"].rho(convention), cspec, None, field)
    return lhs == rhs, (lhs - rhs)
