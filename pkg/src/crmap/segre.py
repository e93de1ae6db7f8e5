"""Mechanization of the Segre-set analysis: first-Segre closed forms, the
tangential operators L1/L2/T, the five holomorphic identities, the linear
system and its reduced row-echelon form over the fraction field, Case-1
reconstruction, the rescaling witness, and the Case-2 obstruction polynomials.

Two published displays needed correction (verified here and recorded in the
reports): the first holomorphic identity carries -4 z2^2 g (not +), and the
g-coefficient of the first reconstruction equation carries an extra factor
z z^t.  The rescaling witness scalings are solved, not transcribed: the
literal published parameters conjugate the family member to the rational
representative only at modulus 2, where they degenerate to the identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as Fr

from . import autgroups, catalog, models, normalform, series
from .autgroups import SourceAutParams, TargetAutParams
from .expr import MapDef
from .scalars import EXACT, F64, Ex, I, exact, exact_sqrt, rational_sqrt, sconj, to_field
from .series import TruncatedSeries, VarSpec


class SegreError(ValueError):
    pass


def _comps(H, order, field):
    if isinstance(H, MapDef):
        return H.expand(order, field)
    return tuple(c.truncate(order) for c in H)


def _at_sigma(c, order):
    """Restrict to the first Segre set w = 0."""
    wname = c.varspec.names[-1]
    return c.substitute({wname: 0}, varspec=c.varspec, order=order)


def _lambda_of(comps):
    return comps[2].coefficient(w=1)


def _sqrt_factor(spec, lam_bar, order, field):
    """2 z_m / (1 + sqrt(1 - 4 i conj(lambda) z z^t)) common factor."""
    z1 = series.generator(spec, "z1", order, field)
    z2 = series.generator(spec, "z2", order, field)
    zz = z1 * z1 + z2 * z2
    one = series.const(spec, 1, order, field)
    four_i = to_field(Ex(0, 0, 4, 0), field)
    rad = one - zz.scale(four_i * lam_bar)
    den = one + rad.sqrt_unit()
    return den.invert_unit().scale(to_field(2, field)), z1, z2


@dataclass
class SegreCheck:
    ok: bool
    got: tuple
    expected: tuple
    mismatch: object = None


def first_segre_restrict(H, order, field=EXACT):
    """f(z,0) against its closed form and g(z,0) against 0 (normalized input)."""
    comps = _comps(H, order, field)
    spec = comps[0].varspec
    lam_bar = sconj(_lambda_of(comps))
    factor, z1, z2 = _sqrt_factor(spec, lam_bar, order, field)
    expected = (factor * z1, factor * z2)
    got = (_at_sigma(comps[0], order), _at_sigma(comps[1], order))
    g0 = _at_sigma(comps[3], order)
    mism = None
    ok = g0.is_zero()
    for a, b in zip(got, expected):
        d = a.first_difference(b)
        if d is not None:
            ok = False
            mism = d
            break
    return SegreCheck(ok, got + (g0,), expected, mism)


def gw_on_segre(H, order, field=EXACT):
    """g_w(z, 0) against 1 + i conj(lambda) f f^t with f in closed form."""
    comps = _comps(H, order, field)
    spec = comps[0].varspec
    lam_bar = sconj(_lambda_of(comps))
    wname = spec.names[-1]
    got = _at_sigma(comps[3].partial(wname), order - 2)
    factor, z1, z2 = _sqrt_factor(spec, lam_bar, order, field)
    f1, f2 = factor * z1, factor * z2
    one = series.const(spec, 1, order, field)
    expected = (one + (f1 * f1 + f2 * f2).scale(to_field(I, field) * lam_bar)).truncate(order - 2)
    d = got.first_difference(expected)
    return SegreCheck(d is None, (got,), (expected,), d)


# -- tangential operators -----------------------------------------------------

def apply_L_operators(res, word, order=None):
    """Apply a word over {'L1','L2','T'} to a complexified-ring series, then
    restrict to zbar = wbar = 0 (result re-embedded over the source ambient)."""
    s = res.series if isinstance(res, models.Residual) else res
    spec = s.varspec
    if order is None:
        order = s.order
    two_i = to_field(Ex(0, 0, 2, 0), s.field)
    for op in word:
        if op == "T":
            s = s.partial("wb")
        elif op in ("L1", "L2"):
            zv = "z1" if op == "L1" else "z2"
            zgen = series.generator(spec, zv, s.order, s.field)
            s = s.partial(zv + "b") - (zgen * s.partial("wb")).scale(two_i)
        else:
            raise SegreError(f"unknown operator {op!r}")
    return slice_bars_zero(s)


def slice_bars_zero(s):
    """Set every barred variable to zero; return over the unbarred sub-ring."""
    spec = s.varspec
    keep = [i for i, n in enumerate(spec.names) if not n.endswith("b")]
    bars = [i for i, n in enumerate(spec.names) if n.endswith("b")]
    sub = VarSpec(tuple(spec.names[i] for i in keep), tuple(spec.weights[i] for i in keep))
    table = {}
    for e, c in s.coeffs.items():
        if all(e[i] == 0 for i in bars):
            table[tuple(e[i] for i in keep)] = c
    return TruncatedSeries(sub, s.order, s.field, table, _raw=True)


# -- the five holomorphic identities -----------------------------------------

@dataclass
class HIdentitySet:
    h: tuple  # five residual series

    def all_zero(self):
        return all(x.is_zero() for x in self.h)

    def max_abs(self):
        return max(
            (abs(complex(c)) for x in self.h for c in x.coeffs.values()), default=0.0
        )


def h_identities(H, order, field=EXACT, alpha=None, beta=None):
    """Residuals of the five holomorphic identities for a normalized lambda=0 map."""
    f1, f2, phi, g = _comps(H, order, field)
    spec = f1.varspec
    if alpha is None:
        alpha = phi.coefficient(z1=2)
        beta = phi.coefficient(z1=1, z2=1)
        beta = beta * (Ex(Fr(1, 2)) if field == EXACT else 0.5)
    al = to_field(alpha, field)
    be = to_field(beta, field)
    i_ = to_field(I, field)
    z1 = series.generator(spec, "z1", order, field)
    z2 = series.generator(spec, "z2", order, field)
    w = series.generator(spec, "w", order, field)
    zz = z1 * z1 + z2 * z2
    zAz = (z1 * z1 - z2 * z2).scale(al) + (z1 * z2).scale(2 * be)
    psi = g * phi + (f1 * f1 + f2 * f2).scale(i_)
    w2 = w * w
    h1 = w2.scale(al) * psi + (w * z2 * f2).scale(4) - (w2 * phi).scale(i_) - (z2 * z2 * g).scale(4)
    h2 = w2.scale(al) * psi - (w * z1 * f1).scale(4) + (w2 * phi).scale(i_) + (z1 * z1 * g).scale(4)
    cross = z2 * f1 - z1 * f2
    h3 = w * (z1.scale(al) + z2.scale(be)) * psi - (z2 * cross).scale(2) - (w * z1 * phi).scale(i_)
    h4 = w * (z1.scale(be) - z2.scale(al)) * psi + (z1 * cross).scale(2) - (w * z2 * phi).scale(i_)
    h5 = zAz * psi - (zz * phi).scale(i_)
    return HIdentitySet((h1, h2, h3, h4, h5))


# -- the linear system over the fraction field --------------------------------

_SYMspec = VarSpec(("z1", "z2", "w", "alpha", "beta"), (1, 1, 2, 1, 1))


def _poly(field=EXACT):
    g = {n: series.generator(_SYMspec, n, None, field) for n in _SYMspec.names}
    return g


class _Frac:
    """num/den pair of untruncated series; equality by cross-multiplication."""

    __slots__ = ("num", "den")

    def __init__(self, num, den):
        self.num = num
        self.den = den

    def __eq__(self, other):
        return (self.num * other.den) == (other.num * self.den)

    def is_zero(self):
        return self.num.is_zero()


@dataclass
class LinearSystemResult:
    matrix: list          # 3x5 polynomial entries
    rank: int
    rref: list            # 3x5 _Frac entries
    matches_display: bool
    unknowns: tuple = ("f1", "f2", "phi", "g", "Psi")


def solve_linear_system(alpha=None, beta=None, field=EXACT):
    """Row-reduce the 3x5 holomorphic system over the fraction field.

    alpha, beta may be exact rationals or None for fully symbolic entries.
    """
    g = _poly(field)
    z1, z2, w = g["z1"], g["z2"], g["w"]
    if alpha is None:
        al, be = g["alpha"], g["beta"]
    else:
        al = series.const(_SYMspec, exact(Fr(alpha)), None, field)
        be = series.const(_SYMspec, exact(Fr(beta)), None, field)
    i_ = to_field(I, field)
    zz = z1 * z1 + z2 * z2
    zAz = al * (z1 * z1 - z2 * z2) + be * (z1 * z2).scale(2)
    zero = series.zero(_SYMspec, None, field)
    w2 = w * w
    M = [
        [zero, (w * z2).scale(4), w2.scale(-i_), (z2 * z2).scale(-4), al * w2],
        [(w * z1).scale(-4), zero, w2.scale(i_), (z1 * z1).scale(4), al * w2],
        [zero, zero, zz.scale(-i_), zero, zAz],
    ]
    matrix = [row[:] for row in M]

    # fraction-free (Bareiss) forward elimination
    rows, cols = 3, 5
    piv_r = 0
    prev = series.const(_SYMspec, 1, None, field)
    piv_cols = []
    for pc in range(cols):
        pr = next((r for r in range(piv_r, rows) if not M[r][pc].is_zero()), None)
        if pr is None:
            continue
        M[piv_r], M[pr] = M[pr], M[piv_r]
        for r in range(piv_r + 1, rows):
            for c in range(cols):
                if c == pc:
                    continue
                M[r][c] = M[piv_r][pc] * M[r][c] - M[r][pc] * M[piv_r][c]
            M[r][pc] = zero
            if piv_r > 0:
                M[r] = [_exact_div(x, prev) for x in M[r]]
        prev = M[piv_r][pc]
        piv_cols.append(pc)
        piv_r += 1
        if piv_r == rows:
            break
    rank = piv_r

    # backward elimination to diagonal shape, still fraction-free
    for k in range(rank - 1, -1, -1):
        pc = piv_cols[k]
        for r in range(k):
            factor = M[r][pc]
            if factor.is_zero():
                continue
            for c in range(cols):
                M[r][c] = M[k][pc] * M[r][c] - factor * M[k][c]
    rref = [
        [_Frac(M[r][c], M[r][piv_cols[r]]) if r < rank else _Frac(M[r][c], prev)
         for c in range(cols)]
        for r in range(rows)
    ]

    disp = _display_rref(g, al, be, field)
    matches = all(rref[r][c] == disp[r][c] for r in range(3) for c in range(5))
    return LinearSystemResult(matrix, rank, rref, matches)


def _exact_div(num, den):
    """Exact polynomial division (Bareiss quotients are exact by construction)."""
    if num.is_zero():
        return num
    out = {}
    num_t = dict(num.coeffs)
    den_items = sorted(den.coeffs.items(), key=lambda kv: kv[0])
    lead_e, lead_c = den_items[-1]
    lead_inv = (Ex(1) / lead_c) if num.field == EXACT else 1 / lead_c
    while num_t:
        e = max(num_t)
        c = num_t[e]
        qe = tuple(a - b for a, b in zip(e, lead_e))
        if any(x < 0 for x in qe):
            raise SegreError("non-exact division in fraction-free elimination")
        qc = c * lead_inv
        out[qe] = qc
        for de, dc in den_items:
            ke = tuple(a + b for a, b in zip(qe, de))
            v = num_t.get(ke, None)
            v = -qc * dc if v is None else v - qc * dc
            if (isinstance(v, Ex) and not v) or (not isinstance(v, Ex) and abs(v) < 1e-12):
                num_t.pop(ke, None)
            else:
                num_t[ke] = v
    return TruncatedSeries(num.varspec, None, num.field, out)


def _display_rref(g, al, be, field):
    z1, z2, w = g["z1"], g["z2"], g["w"]
    i_ = to_field(I, field)
    one = series.const(_SYMspec, 1, None, field)
    zero = series.zero(_SYMspec, None, field)
    zz = z1 * z1 + z2 * z2
    zAz = al * (z1 * z1 - z2 * z2) + be * (z1 * z2).scale(2)
    F = _Frac
    return [
        [F(one, one), F(zero, one), F(zero, one), F(-z1, w),
         F(-(w * (al * z1 + be * z2)), zz.scale(2))],
        [F(zero, one), F(one, one), F(zero, one), F(-z2, w),
         F(w * (al * z2 - be * z1), zz.scale(2))],
        [F(zero, one), F(zero, one), F(one, one), F(zero, one), F(zAz.scale(i_), zz)],
    ]


# -- Case-1 reconstruction and its defining equations -------------------------

def reconstruct_case1(alpha, beta):
    """The unique rational map with normal-form matrix A_{alpha,beta}."""
    return catalog.h_A(alpha, beta)


def reconstruction_equations_check(field=EXACT):
    """The closed-form (g, Psi) satisfy both cleared reconstruction equations
    identically, with symbolic (alpha, beta)."""
    g = _poly(field)
    z1, z2, w = g["z1"], g["z2"], g["w"]
    al, be = g["alpha"], g["beta"]
    i_ = to_field(I, field)
    zz = z1 * z1 + z2 * z2
    rho2 = al * al + be * be
    four = series.const(_SYMspec, 4, None, field)
    delta = four - rho2 * w * w
    g_num = w.scale(4)                      # g = 4w / delta
    psi_num = zz.scale(4 * i_)              # Psi = 4i zz^t / delta
    two_i = 2 * i_

    # first equation, cleared by delta (g-coefficient carries the zz^t factor)
    za1 = al * z1 + be * z2
    e1 = (
        (z1.scale(two_i) * (z1.scale(two_i) - w * za1)) * zz * g_num
        + z1 * w * w * (za1.scale(2) - (w * z1 * rho2).scale(i_)) * psi_num
        + (w * z1 * z1 * zz).scale(4) * delta
    )
    # second equation, cleared by delta^2
    e2 = (
        (zz * zz).scale(4) * g_num * g_num
        + (w ** 4) * rho2 * psi_num * psi_num
        + (w * w * zz).scale(4 * i_) * psi_num * delta
    )
    return e1.is_zero(), e2.is_zero()


# -- rescaling witness ---------------------------------------------------------

@dataclass
class WitnessResult:
    sigma: object
    b_cos: object
    b_sin: object
    field: str
    verified: bool
    max_error: float
    literal_parameters_verify: bool


def rescale_witness(alpha, beta, order=8):
    """Automorphism pair conjugating the (alpha,beta) family member to the
    rational representative; scalings are solved (sigma^2 = rho/2), and the
    literal published scalings (sigma^2 = rho) are re-checked for the report.
    """
    al, be = Fr(alpha), Fr(beta)
    if al == 0 and be == 0:
        raise SegreError("witness needs (alpha, beta) != (0, 0)")
    rho2 = al * al + be * be

    field = EXACT
    sigma = ch = sh = None
    rho = rational_sqrt(rho2)
    if rho is not None:
        # cos(s/2), sin(s/2) from (cos s, sin s) = (alpha, beta)/rho
        ch = exact_sqrt(exact(Fr(rho + al, 2 * rho)))
        if ch is not None:
            if not ch:
                sh = exact(1)  # s = pi
            else:
                sh = exact(Fr(be, 2 * rho)) / ch
        sigma = exact_sqrt(exact(Fr(rho, 2)))
    if rho is None or ch is None or sigma is None:
        import math

        field = F64
        rho = float(rho2) ** 0.5
        s_ang = math.atan2(float(be), float(al))
        ch, sh = complex(math.cos(s_ang / 2)), complex(math.sin(s_ang / 2))
        sigma = complex((rho / 2) ** 0.5)

    entry = reconstruct_case1(al, be)
    verified, err = _witness_check(entry, sigma, ch, sh, order, field)

    # literal published scalings: sigma = sqrt(rho), w-scale rho
    if field == EXACT:
        sigma_lit = exact_sqrt(exact(rho))
        if sigma_lit is not None:
            lit_ok, _ = _witness_check(entry, sigma_lit, ch, sh, order, EXACT)
        else:
            lit_ok, _ = _witness_check(
                entry, complex(float(rho) ** 0.5), complex(ch), complex(sh), order, F64
            )
    else:
        lit_ok, _ = _witness_check(entry, complex(rho**0.5), ch, sh, order, F64)
    return WitnessResult(sigma, ch, sh, field, verified, err, lit_ok)


def _witness_check(entry, sigma, ch, sh, order, field):
    psi = autgroups.source_aut(
        SourceAutParams(s=sigma, u=1, a=sconj(to_field(ch, field)), b=to_field(sh, field)),
        field=field,
    )
    gam = autgroups.target_aut(
        TargetAutParams(s=sigma, p_cos=ch, p_sin=sh), field=field
    )
    H = entry.mapdef.expand(order, field)
    psin = autgroups.invert_aut(psi, order, field)
    conj_map = autgroups.compose_series(
        gam, autgroups.compose_series(list(H), psin, order, field), order, field
    )
    target = catalog.get("r").mapdef.expand(order, field)
    if field == EXACT:
        ok, _ = catalog.verify_identity(conj_map, target)
        err = 0.0 if ok else max(a.max_coeff_diff(b) for a, b in zip(conj_map, target))
    else:
        err = max(a.max_coeff_diff(b) for a, b in zip(conj_map, target))
        ok = err <= 1e-10
    return ok, err


# -- Case-2 obstruction ---------------------------------------------------------

_ZSPEC = VarSpec(("z1", "z2"), (1, 1))


@dataclass
class ObstructionResult:
    M: TruncatedSeries
    N: TruncatedSeries
    coeff_z1_4: object
    coeff_z1_3_z2: object
    expected_z1_4: object       # paper value times the engine normalization
    expected_z1_3_z2: object
    normalization: object       # the recorded proportionality constant
    m_zero: bool
    n_zero: bool


def case2_obstruction(H_or_inv, order=8, field=EXACT):
    """Obstruction polynomials M, N with M sqrt(1-4i conj(lambda) zz^t) + N = 0.

    Accepts a normalized series tuple (lambda != 0) or a NormalFormInvariants.
    The engine's minimal clearing produces conj(lambda) times the published
    leading coefficients; the factor is returned as `normalization`.
    """
    if isinstance(H_or_inv, normalform.NormalFormInvariants):
        inv = H_or_inv
        field = inv.field
    else:
        comps = _comps(H_or_inv, order, field)
        inv = normalform._extract_invariants(comps, field)
    lb = sconj(to_field(inv.lam, field))
    if (field == EXACT and not lb) or (field == F64 and abs(complex(lb)) < 1e-13):
        raise SegreError("case-2 obstruction needs lambda != 0")
    al, be = to_field(inv.alpha, field), to_field(inv.beta, field)
    nb = tuple(sconj(to_field(x, field)) for x in inv.nu)
    mb = tuple(sconj(to_field(x, field)) for x in inv.mu)
    sb = sconj(to_field(inv.sigma, field))
    i_ = to_field(I, field)

    z1 = series.generator(_ZSPEC, "z1", None, field)
    z2 = series.generator(_ZSPEC, "z2", None, field)
    one = series.const(_ZSPEC, 1, None, field)
    zz = z1 * z1 + z2 * z2
    D = one - (z1 * z1).scale(4 * i_ * lb)
    P1 = z1.scale(2) * (one.scale(al) + z1.scale(4 * nb[0]))
    P2 = z2.scale(2) * (one.scale(be) + z1.scale(4 * nb[1]))
    P3 = (z1 * z1).scale(4 * sb) + z1.scale(2 * i_ * mb[0]) - one.scale(al)
    Q1 = z1.scale(be) + z2.scale(al) + (z1 * z2).scale(8 * nb[0])
    Q2 = z1.scale(-al) + z2.scale(be) + (z1 * z2).scale(8 * nb[1])
    Q3 = -one.scale(be) + z2.scale(i_ * mb[0]) + z1.scale(i_ * mb[1]) + (z1 * z2).scale(4 * sb)
    lz = (z1 * z2).scale(4 * i_ * lb)
    A1 = Q1 * D + lz * P1
    A2 = Q2 * D + lz * P2
    B = Q3 * D + lz * P3
    M = (A1 * z1 + A2 * z2).scale(i_ * lb) + B
    N = zz.scale(2 * i_ * lb) * B - M

    c40 = M.coefficient(z1=4)
    c31 = M.coefficient(z1=3, z2=1)
    expected_40 = 4 * lb * lb * be
    expected_31 = -8 * lb * lb * al
    return ObstructionResult(
        M, N, c40, c31, expected_40, expected_31, lb,
        M.is_zero() if field == EXACT else M.max_coeff_diff(series.zero(_ZSPEC, None, field)) < 1e-12,
        N.is_zero() if field == EXACT else N.max_coeff_diff(series.zero(_ZSPEC, None, field)) < 1e-12,
    )


# -- the two tangential lemma combinations (consistency for actual maps) -------

def lemma_combination_residuals(H, order, field=EXACT):
    """Residuals of the two L-operator combinations on the first Segre set.

    Both vanish identically for residual-zero normalized maps; they are the
    inputs the Case-2 obstruction is assembled from.
    """
    comps = _comps(H, order, field)
    inv = normalform._extract_invariants(comps, field)
    spec = comps[0].varspec
    f1 = _at_sigma(comps[0], order)
    f2 = _at_sigma(comps[1], order)
    phi = _at_sigma(comps[2], order)
    F = f1 * f1 + f2 * f2
    i_ = to_field(I, field)
    lb = sconj(to_field(inv.lam, field))
    al, be = to_field(inv.alpha, field), to_field(inv.beta, field)
    nb = tuple(sconj(to_field(x, field)) for x in inv.nu)
    mb = tuple(sconj(to_field(x, field)) for x in inv.mu)
    sb = sconj(to_field(inv.sigma, field))
    z1 = series.generator(spec, "z1", order, field)
    z2 = series.generator(spec, "z2", order, field)
    one = series.const(spec, 1, order, field)
    r1 = (
        z1.scale(2) * (one.scale(al) + z1.scale(4 * nb[0])) * f1
        + z2.scale(2) * (one.scale(be) + z1.scale(4 * nb[1])) * f2
        + ((z1 * z1).scale(4 * sb) + z1.scale(2 * i_ * mb[0]) - one.scale(al)) * F
        - (one - (z1 * z1).scale(4 * i_ * lb)) * phi
    )
    r2 = (
        (z1.scale(be) + z2.scale(al) + (z1 * z2).scale(8 * nb[0])) * f1
        + (z1.scale(-al) + z2.scale(be) + (z1 * z2).scale(8 * nb[1])) * f2
        + (-one.scale(be) + z2.scale(i_ * mb[0]) + z1.scale(i_ * mb[1]) + (z1 * z2).scale(4 * sb)) * F
        + (z1 * z2).scale(4 * i_ * lb) * phi
    )
    return r1, r2
