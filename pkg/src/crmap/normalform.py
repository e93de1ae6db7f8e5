"""Normalization of transversal Heisenberg-to-model map germs to the partial
normal form, invariant extraction, geometric rank, and classification.

The normal form at the origin is

    f   = z + (i/2) w (z A) + w^2 nu + O(3),
    phi = lambda w + z A z^t + w z mu^t + sigma w^2 + O(3),
    g   = w + O(3),

with A = ((alpha, beta), (beta, -alpha)) real.  Normalization runs in three
staged group compositions (linear part, f_w kill, g_ww kill); everything the
mapping equation forces (g(z,0) = 0, the quadratic coefficient relations, A
appearing identically in f and phi) is asserted on the output rather than
normalized away.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import autgroups, models, series
from .autgroups import SourceAutParams, TargetAutParams, compose_series, invert_aut
from .expr import MapDef
from .scalars import EXACT, F64, Ex, I, exact_sqrt, sconj, to_field
from .series import TruncatedSeries


class NormalizeError(ValueError):
    pass


class NotTransversal(NormalizeError):
    pass


class InconsistentInvariants(NormalizeError):
    """Input contradicts the coefficient relations forced by the mapping equation."""


@dataclass
class NormalFormInvariants:
    alpha: object
    beta: object
    lam: object
    mu: tuple
    nu: tuple
    sigma: object
    transversal: bool
    field: str

    def rank(self):
        if _z(self.alpha, self.field) and _z(self.beta, self.field):
            return 0
        return 2

    def as_dict(self):
        def conv(x):
            c = complex(x)
            return [c.real, c.imag]

        return {
            "alpha": conv(self.alpha),
            "beta": conv(self.beta),
            "lambda": conv(self.lam),
            "mu": [conv(self.mu[0]), conv(self.mu[1])],
            "nu": [conv(self.nu[0]), conv(self.nu[1])],
            "sigma": conv(self.sigma),
            "rank": self.rank(),
            "transversal": self.transversal,
            "field": self.field,
        }


@dataclass
class NormalizeResult:
    invariants: NormalFormInvariants
    normalized: tuple
    gamma: object       # target automorphism (MapDef)
    psi_inv: tuple      # source series tuple: normalized = gamma o H o psi_inv
    field: str

    def psi(self, order=None):
        n = order or self.normalized[0].order
        return invert_aut(self.psi_inv, n, self.field)


_TOL = 1e-12


def _z(x, field, tol=_TOL):
    if field == EXACT:
        return not x
    return abs(complex(x)) <= tol


def _as_series(H, order, field):
    if isinstance(H, MapDef):
        return H.expand(order, field)
    comps = tuple(H)
    if comps[0].order is not None and comps[0].order < order:
        raise NormalizeError(f"series input carries order {comps[0].order} < {order}")
    return tuple(c.truncate(order) for c in comps)


def _coeff(c, **mono):
    return c.coefficient(**mono)


def normalize(H, order, field=EXACT):
    """Bring a residual-zero transversal germ at 0 into the partial normal form.

    Returns invariants, the normalized component series, and the automorphism
    pair realizing them.  Falls back to float automatically when the linear
    normalization needs a square root outside Q(i,sqrt2).
    """
    if order < 6:
        raise NormalizeError("normalization needs order >= 6")
    try:
        return _normalize(H, order, field)
    except _NeedsFloat:
        if field == F64:
            raise NormalizeError("float normalization failed")  # pragma: no cover
        return _normalize(H, order, F64)


class _NeedsFloat(Exception):
    pass


def _sqrt_positive(x, field):
    if field == F64:
        v = complex(x)
        if not (abs(v.imag) <= 1e-9 and v.real > 0):
            raise NotTransversal(f"g_w(0) = {v} is not a positive real")
        return v.real ** 0.5
    if not (isinstance(x, Ex) and x.is_real() and x.real > 0):
        raise NotTransversal(f"g_w(0) = {x} is not a positive real")
    r = exact_sqrt(x)
    if r is None:
        raise _NeedsFloat
    return r


def _normalize(H, order, field):
    comps = _as_series(H, order, field)
    spec = comps[0].varspec
    names = spec.names
    tol = 0.0 if field == EXACT else 1e-11
    for c in comps:
        if not _z(c.constant_term(), field, tol):
            raise NormalizeError("H(0) != 0")

    g = comps[3]
    G0 = _coeff(g, w=1)
    s0 = _sqrt_positive(G0, field)

    # E[i][m] = df_i/dz_m(0); the mapping equation forces orthogonal equal-norm
    # columns with squared norm g_w(0)
    E = [[_coeff(comps[i], **{names[m]: 1}) for m in range(2)] for i in range(2)]
    col = lambda m: (E[0][m], E[1][m])
    dot12 = col(0)[0] * sconj(col(1)[0]) + col(0)[1] * sconj(col(1)[1])
    n1 = col(0)[0] * sconj(col(0)[0]) + col(0)[1] * sconj(col(0)[1])
    n2 = col(1)[0] * sconj(col(1)[0]) + col(1)[1] * sconj(col(1)[1])
    if not (_z(dot12, field, 1e-10) and _z(n1 - G0, field, 1e-10) and _z(n2 - G0, field, 1e-10)):
        raise NormalizeError("linear part violates the mapping equation (residual nonzero?)")

    inv_s0 = (Ex(1) / s0) if field == EXACT else 1 / s0
    W = [[E[i][j] * inv_s0 for j in range(2)] for i in range(2)]
    V = [[sconj(W[i][j]) for j in range(2)] for i in range(2)]  # U = conj(W)
    u_det = V[0][0] * V[1][1] - V[0][1] * V[1][0]
    a_par, b_par = sconj(V[1][1]), sconj(V[1][0])
    if not (_z(V[0][0] - u_det * a_par, field, 1e-10) and _z(V[0][1] + u_det * b_par, field, 1e-10)):
        raise NormalizeError("linear part is not unitary after scaling")

    psi1 = autgroups.source_aut(
        SourceAutParams(s=inv_s0, u=u_det, a=a_par, b=b_par), field=field
    )
    comps = compose_series(list(comps), psi1.expand(order, field), order, field)

    # target parameter a kills phi_z(0); f_z is already the identity here
    p1, p2 = _coeff(comps[2], z1=1), _coeff(comps[2], z2=1)
    if field == EXACT:
        a_t = (p1 / Ex(2), p2 / Ex(2))
    else:
        a_t = (p1 / 2, p2 / 2)
    gamma = autgroups.target_aut(TargetAutParams(a=a_t), field=field)
    comps = compose_series(gamma, list(comps), order, field)

    # f_w kill by the source parameter c
    cw = (-_coeff(comps[0], w=1), -_coeff(comps[1], w=1))
    psi2 = autgroups.source_aut(SourceAutParams(c=cw), field=field)
    comps = compose_series(list(comps), psi2.expand(order, field), order, field)

    # g_ww kill by the source parameter r (forced real by the mapping equation)
    g2 = _coeff(comps[3], w=2)
    if field == EXACT:
        if not (isinstance(g2, Ex) and g2.is_real()):
            raise InconsistentInvariants(f"g_ww(0) = {g2} is not real")
        r_par = g2
    else:
        if abs(g2.imag) > 1e-9:
            raise InconsistentInvariants(f"g_ww(0) = {g2} is not real")
        r_par = g2.real
    psi3 = autgroups.source_aut(SourceAutParams(r=r_par), field=field)
    comps = compose_series(list(comps), psi3.expand(order, field), order, field)

    inv = _extract_invariants(comps, field)
    psi_inv = compose_series(
        psi1, compose_series(psi2, psi3.expand(order, field), order, field), order, field
    )
    return NormalizeResult(inv, tuple(comps), gamma, tuple(psi_inv), field)


def _extract_invariants(comps, field):
    f1, f2, phi, g = comps
    tol = 0.0 if field == EXACT else 1e-9

    def need(cond, what):
        if not cond:
            raise InconsistentInvariants(f"normal-form relation violated: {what}")

    names = f1.varspec.names
    # forced shape
    need(_z(_coeff(f1, z1=1) - to_field(1, field), field, tol), "f1_z1 = 1")
    need(_z(_coeff(f2, z2=1) - to_field(1, field), field, tol), "f2_z2 = 1")
    need(_z(_coeff(f1, z2=1), field, tol) and _z(_coeff(f2, z1=1), field, tol), "f_z = I")
    need(_z(_coeff(f1, w=1), field, tol) and _z(_coeff(f2, w=1), field, tol), "f_w(0) = 0")
    need(_z(_coeff(g, w=1) - to_field(1, field), field, tol), "g_w(0) = 1")
    need(_z(_coeff(g, w=2), field, tol), "g_ww(0) = 0")
    need(_z(_coeff(g, z1=1, w=1), field, tol) and _z(_coeff(g, z2=1, w=1), field, tol), "g_zw(0) = 0")
    for mono in ({"z1": 2}, {"z1": 1, "z2": 1}, {"z2": 2}):
        need(_z(_coeff(g, **mono), field, tol), "g has no pure-z quadratic terms")
        need(_z(_coeff(f1, **mono), field, tol) and _z(_coeff(f2, **mono), field, tol),
             "f has no pure-z quadratic terms")
    need(_z(_coeff(phi, z1=1), field, tol) and _z(_coeff(phi, z2=1), field, tol), "phi_z(0) = 0")

    two_over_i = to_field(Ex(0, 0, -2, 0), field)  # 2/i = -2i
    a_f = _coeff(f1, z1=1, w=1) * two_over_i
    b_f = _coeff(f1, z2=1, w=1) * two_over_i
    b_f2 = _coeff(f2, z1=1, w=1) * two_over_i
    ma_f = _coeff(f2, z2=1, w=1) * two_over_i

    alpha = _coeff(phi, z1=2)
    beta = _coeff(phi, z1=1, z2=1) * (Ex(1, 0, 0, 0) / Ex(2) if field == EXACT else 0.5)
    malpha = _coeff(phi, z2=2)

    need(_z(alpha + malpha, field, tol), "phi quadratic is trace-free")
    need(_z(a_f - alpha, field, tol) and _z(ma_f + alpha, field, tol),
         "f and phi carry the same alpha")
    need(_z(b_f - beta, field, tol) and _z(b_f2 - beta, field, tol),
         "f and phi carry the same beta")
    if field == EXACT:
        need(isinstance(alpha, Ex) and alpha.is_real(), "alpha real")
        need(isinstance(beta, Ex) and beta.is_real(), "beta real")
    else:
        need(abs(complex(alpha).imag) <= 1e-9 and abs(complex(beta).imag) <= 1e-9,
             "alpha, beta real")

    lam = _coeff(phi, w=1)
    mu = (_coeff(phi, z1=1, w=1), _coeff(phi, z2=1, w=1))
    sigma = _coeff(phi, w=2)
    nu = (_coeff(f1, w=2), _coeff(f2, w=2))
    return NormalFormInvariants(alpha, beta, lam, mu, nu, sigma, True, field)


def geometric_rank(inv):
    """Rank of the normal-form matrix A (0 or 2)."""
    return inv.rank()


def detect_degenerate(H, order, field=EXACT, tol=1e-11):
    """True iff f and g vanish identically to the given order."""
    comps = _as_series(H, order, field)
    f1, f2, _, g = comps
    if field == EXACT:
        return f1.is_zero() and f2.is_zero() and g.is_zero()
    return all(
        max((abs(complex(c)) for c in s.coeffs.values()), default=0.0) <= tol
        for s in (f1, f2, g)
    )


@dataclass
class ClassLabel:
    label: str  # Linear | Rational | Irrational | Degenerate
    invariants: object = None

    def as_dict(self):
        out = {"label": self.label}
        if self.invariants is not None:
            out.update(self.invariants.as_dict())
        return out


def classify(H, order=8, field=EXACT, tol=1e-11):
    """Theorem-level classification of a residual-zero germ at the origin."""
    comps = _as_series(H, order, field)
    gw = comps[3].coefficient(w=1)
    if _z(gw, field, tol):
        if detect_degenerate(comps, order, field, tol):
            return ClassLabel("Degenerate")
        raise NotTransversal(
            "g_w(0) = 0 but the map is not in the degenerate form (0,0,phi,0)"
        )
    res = normalize(comps, order, field)
    inv = res.invariants
    fld = res.field
    if not _z(inv.lam, fld):
        return ClassLabel("Irrational", inv)
    if inv.rank() == 2:
        return ClassLabel("Rational", inv)
    # vanishing A with lambda = 0 forces the remaining quadratic data to vanish
    leftovers = [inv.sigma, inv.mu[0], inv.mu[1], inv.nu[0], inv.nu[1]]
    if not all(_z(x, fld, 1e-9) for x in leftovers):
        raise InconsistentInvariants(
            f"lambda = 0 and A = 0 but (sigma, mu, nu) = {[complex(x) for x in leftovers]}"
        )
    return ClassLabel("Linear", inv)
