"""Numerical evaluation of the elliptic weak invariant and integral-free corner series.

For a non-singular unweighted quadrant model at a fixed step weight
``t`` in ``(0, 1/|S|)``, the kernel ``K(x, y) = t * sum x^(1+i) y^(1+j) - x y``
defines two branch curves ``Y_0(x), Y_1(x)``.  The image of the cut
``[x_1, x_2]`` under these branches is a quartic curve ``L`` in the complex
``y``-plane, and the bounded region ``G_L`` it delimits supports a conformal
gluing function ``w(y; t)`` -- the *weak invariant* -- built from Weierstrass
elliptic functions:

    w(y) = wp_{1,3}( -(omega_1 + omega_2)/2 + wp_{1,2}^{-1}(f(y)) )

where ``f`` is an explicit Moebius-type image of ``y`` driven by the
``y``-discriminant, ``wp_{1,2}`` / ``wp_{1,3}`` are Weierstrass functions for
the rectangular lattices ``(omega_1, omega_2)`` / ``(omega_1, omega_3)``, and
the inverse is taken in a fixed half-parallelogram determination.

This module computes all ingredients with mpmath (128-bit default):

* :func:`build_context` -- branch points, period integrals in Legendre form,
  elliptic invariants ``g_2, g_3`` for both lattices, and the parameters of
  ``f``, all packaged in an :class:`AnalyticContext` with validity checks.
* :class:`GluingEvaluator` -- evaluation of ``w``, its ``y``-derivatives
  (by exact series composition, never finite differences), the uniformizer
  ``Z(y)`` and its first-order equation ``Z'(y)^2 = 1/(4 dt(y))``.
* :func:`S_closed_form`, :func:`S_finite_group`, :func:`S_reverse_kreweras` --
  integral-free evaluation of ``S(y) = K(0, y) Q(0, y)`` for the decoupled
  models, using the residue/correction table of constants.
* :func:`curve_membership` -- locate a point relative to the curve ``L``.
* :func:`series_S_oracle` -- ground-truth evaluation of ``S`` from the
  truncated counting series, with a rigorous geometric tail bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath as mp

from ._rat import qq
from .algebra import Rat
from .counting import series_q0y
from .kernel import Kernel
from .steps import catalog

__all__ = [
    "AnalyticContext",
    "AnalyticError",
    "GluingEvaluator",
    "S_closed_form",
    "S_finite_group",
    "S_reverse_kreweras",
    "build_context",
    "curve_membership",
    "series_S_oracle",
    "w_derivatives",
    "w_eval",
]

DEFAULT_PREC = 128


class AnalyticError(ValueError):
    """Raised when a context cannot be built or a determination fails."""


# ---------------------------------------------------------------------------
# constants of the uniform corner formula
# ---------------------------------------------------------------------------
#
# For each decoupled model, S(y) = G(y) - g0 - r w'(p)/(w(y) - w(p)) + C with
#   C = r w'(p) / (w(alpha) - w(p))   if alpha != p,
#   C = -(r/2) w''(p) / w'(p)         if alpha == p,
# where p is the pole of the decoupling function G, r its residue there,
# alpha a root of K(0, y), and g0 the constant coefficient of G at alpha.
# The ninth infinite-group model and the reverse Kreweras model have their
# own corrections and are handled separately.
#
# Entries: key -> (p, r(t), alpha, g0) with alpha one of a number or a token.

_S_TABLE: dict[str, tuple[int, Callable, object, int]] = {
    "#1": (0, lambda t: -1, -1, 1),
    "#2": (0, lambda t: -1, "i", 0),
    "#3": (0, lambda t: -1, 0, 0),
    "#4": (0, lambda t: 1, 0, 0),
    "#5": (-1, lambda t: -(1 + t) / t, -1, 1),
    "#6": (0, lambda t: -1, -1, 1),
    "#7": (0, lambda t: -1, "j", 1),
    "#8": (0, lambda t: -1, 0, 0),
    "kreweras": (0, lambda t: -1, 0, 0),
    "double-kreweras": (0, lambda t: -1, -1, 1),
    "gessel": (-1, lambda t: -1 / t, -1, 0),
}

_INFINITE_KEYS = ("#1", "#2", "#3", "#4", "#5", "#6", "#7", "#8", "#9")
_FINITE_KEYS = ("kreweras", "double-kreweras", "gessel")


def _table_key(entry) -> str | None:
    for key in (*_INFINITE_KEYS, *_FINITE_KEYS, "reverse-kreweras"):
        if key in entry.aliases or key == entry.id:
            return key
    return None


def _resolve_alpha(token, t):
    if token == "i":
        return mp.mpc(0, 1)
    if token == "j":
        return mp.expjpi(mp.mpf(2) / 3)
    return mp.mpf(token)


# ---------------------------------------------------------------------------
# small numeric helpers
# ---------------------------------------------------------------------------


def _to_fraction(t) -> Fraction:
    if isinstance(t, Fraction):
        return t
    if isinstance(t, int):
        return Fraction(t)
    if isinstance(t, float):
        return Fraction(str(t))
    if isinstance(t, str):
        return Fraction(t)
    num = getattr(t, "numerator", None)
    den = getattr(t, "denominator", None)
    if num is not None and den is not None:
        return Fraction(int(num), int(den))
    raise AnalyticError(f"cannot interpret weight {t!r} as an exact rational")


def _frac_mp(q: Fraction):
    return mp.mpf(q.numerator) / mp.mpf(q.denominator)


def _poly_coeffs_at_t(poly, var: str, t: Fraction) -> list[Fraction]:
    """Ascending exact coefficient list of a bivariate polynomial at fixed t."""
    by_power = poly.coeffs_in(var)
    deg = max(by_power) if by_power else 0
    out = []
    for k in range(deg + 1):
        c = by_power.get(k)
        out.append(Fraction(0) if c is None else Fraction(c.eval_qq({"t": qq(t)})))
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def _eval_poly_list(coeffs: Sequence, x):
    total = mp.mpf(0)
    for c in reversed(coeffs):
        total = total * x + (c if not isinstance(c, Fraction) else _frac_mp(c))
    return total


def _derive_list(coeffs: Sequence) -> list:
    return [k * coeffs[k] for k in range(1, len(coeffs))] or [Fraction(0)]


def _real_roots(coeffs: Sequence[Fraction]) -> list:
    """All roots of an exact-coefficient polynomial; asserts they are real."""
    desc = [_frac_mp(c) for c in reversed(coeffs)]
    roots = mp.polyroots(desc, maxsteps=120, extraprec=80)
    tol = mp.mpf(2) ** (-mp.mp.prec // 2)
    scale = max(mp.mpf(1), max(abs(r) for r in roots))
    out = []
    for r in roots:
        if abs(mp.im(r)) > tol * scale:
            raise AnalyticError(f"expected real branch points, found {r}")
        out.append(mp.re(r))
    return sorted(out)


def _label_branch_points(roots: list) -> tuple:
    """Split sorted real roots into (inside pair, outside pair or (x3, inf))."""
    inside = [r for r in roots if abs(r) < 1]
    outside = [r for r in roots if abs(r) >= 1]
    if len(inside) != 2:
        raise AnalyticError("expected exactly two branch points in the unit disk")
    p1, p2 = inside
    if len(outside) == 1:
        return p1, p2, outside[0], mp.inf
    pos = [r for r in outside if r > 0]
    neg = [r for r in outside if r <= 0]
    if len(pos) == 2:
        return p1, p2, pos[0], pos[1]
    if len(pos) == 1 and len(neg) == 1:
        return p1, p2, pos[0], neg[0]
    raise AnalyticError("unexpected configuration of outer branch points")


def _sigma_power_sum(power: int, q, prec_bits: int) -> object:
    """sum_{k>=1} sigma_power(k) q^k, truncated to working precision."""
    eps = mp.mpf(2) ** (-(prec_bits + 48))
    total = mp.mpf(0)
    qk = mp.mpf(1)
    for k in range(1, 20000):
        qk *= q
        sig = 0
        d = 1
        while d * d <= k:
            if k % d == 0:
                sig += d**power
                if d != k // d:
                    sig += (k // d) ** power
            d += 1
        term = sig * qk
        total += term
        if abs(term) < eps and k > 4:
            break
    else:
        raise AnalyticError("slow nome series; lattice too degenerate")
    return total


def _g_invariants(period_a, period_b, prec_bits: int):
    """Elliptic invariants g2, g3 of the lattice spanned by two periods."""
    w1, w2 = period_a, period_b
    tau = w1 / w2
    if mp.im(tau) < 0:
        w1 = -w1
        tau = -tau
    if mp.im(tau) < 1:
        # Swap generators for a faster nome.
        w1, w2 = -w2, w1
        tau = w1 / w2
    q = mp.expjpi(2 * tau)
    a = _sigma_power_sum(3, q, prec_bits)
    b = _sigma_power_sum(5, q, prec_bits)
    g2 = 4 * mp.pi**4 / (3 * w2**4) * (1 + 240 * a)
    g3 = 8 * mp.pi**6 / (27 * w2**6) * (1 - 504 * b)
    tol = mp.mpf(2) ** (-prec_bits // 2)
    if abs(mp.im(g2)) > tol * (1 + abs(g2)) or abs(mp.im(g3)) > tol * (1 + abs(g3)):
        raise AnalyticError("elliptic invariants of a rectangular lattice must be real")
    return mp.re(g2), mp.re(g3)


# ---------------------------------------------------------------------------
# the analytic context
# ---------------------------------------------------------------------------


@dataclass
class AnalyticContext:
    """Branch data, periods and elliptic invariants of one model at fixed t."""

    name: str
    key: str | None
    t: object
    prec: int
    vectors: tuple
    x1: object
    x2: object
    x3: object
    x4: object
    y1: object
    y2: object
    y3: object
    y4: object
    Y_at_x1: object  # -inf when the curve is unbounded
    Y_at_x2: object
    omega1: object  # purely imaginary, positive imaginary part
    omega2: object
    omega3: object
    g2_12: object
    g3_12: object
    g2_13: object
    g3_13: object
    f_const: object
    f_coef: object  # residue at y4 (finite case) or linear slope (y4 = inf)
    y4_infinite: bool
    curve_bounded: bool
    d_coeffs: list = field(repr=False, default_factory=list)
    dt_coeffs: list = field(repr=False, default_factory=list)
    _a: list = field(repr=False, default_factory=list)
    _b: list = field(repr=False, default_factory=list)
    _c: list = field(repr=False, default_factory=list)
    _ta: list = field(repr=False, default_factory=list)
    _tb: list = field(repr=False, default_factory=list)
    _tc: list = field(repr=False, default_factory=list)

    # -- kernel coefficient evaluation --------------------------------------

    def a(self, x):
        return _eval_poly_list(self._a, x)

    def b(self, x):
        return _eval_poly_list(self._b, x)

    def c(self, x):
        return _eval_poly_list(self._c, x)

    def d(self, x):
        return _eval_poly_list(self.d_coeffs, x)

    def dt(self, y):
        return _eval_poly_list(self.dt_coeffs, y)

    def K0(self, y):
        """K(0, y), the y-quadratic coefficient of x^0."""
        return _eval_poly_list(self._tc, y)

    def f(self, y):
        if self.y4_infinite:
            return self.f_const + self.f_coef * y
        return self.f_const + self.f_coef / (y - self.y4)

    def f_prime(self, y):
        if self.y4_infinite:
            return self.f_coef
        return -self.f_coef / (y - self.y4) ** 2

    def Y_branches(self, x):
        """The two kernel roots in y over a point x (conjugate on the cut)."""
        av, bv, cv = self.a(x), self.b(x), self.c(x)
        if abs(av) < mp.mpf(2) ** (-self.prec):
            raise AnalyticError("branch evaluation at a zero of the leading coefficient")
        disc = mp.sqrt(bv * bv - 4 * av * cv)
        return (-bv + disc) / (2 * av), (-bv - disc) / (2 * av)

    # -- validity ------------------------------------------------------------

    def check_invariants(self, tol=None) -> dict[str, object]:
        """Residuals of the defining properties; every value should be tiny."""
        with mp.workprec(self.prec + 32):
            return self._check_invariants(tol)

    def _check_invariants(self, tol=None) -> dict[str, object]:
        tol = mp.mpf("1e-12") if tol is None else mp.mpf(tol)
        xs = [self.x1, self.x2, self.x3] + ([] if self.x4 == mp.inf else [self.x4])
        ys = [self.y1, self.y2, self.y3] + ([] if self.y4_infinite else [self.y4])
        scale_x = max(abs(v) for v in xs) + 1
        scale_y = max(abs(v) for v in ys) + 1
        res = {
            "disc_x": max(abs(self.d(v)) / scale_x**4 for v in xs),
            "disc_y": max(abs(self.dt(v)) / scale_y**4 for v in ys),
        }
        ordered = self.x1 < self.x2 < 1 and abs(self.x1) < 1
        ordered = ordered and (self.x3 > 1)
        if self.x4 != mp.inf and self.x4 > 0:
            ordered = ordered and self.x3 < self.x4
        ordered = ordered and self.y1 < self.y2 and abs(self.y1) < 1 and abs(self.y2) < 1
        ordered = ordered and self.y3 > 1
        if not self.y4_infinite and self.y4 > 0:
            ordered = ordered and self.y3 < self.y4
        if self.curve_bounded:
            ordered = ordered and self.Y_at_x1 < self.y1 + tol
        ordered = ordered and self.y2 < self.Y_at_x2 < self.y3
        res["ordering"] = mp.mpf(0) if ordered else mp.mpf(1)
        res["Y_x2_positive"] = mp.mpf(0) if self.Y_at_x2 > 0 else mp.mpf(1)
        good_y1 = (not self.curve_bounded) or self.Y_at_x1 <= tol
        res["Y_x1_nonpositive"] = mp.mpf(0) if good_y1 else mp.mpf(1)
        for tag in ("12", "13"):
            g2, g3 = getattr(self, f"g2_{tag}"), getattr(self, f"g3_{tag}")
            disc = g2**3 - 27 * g3**2
            res[f"nondegenerate_{tag}"] = mp.mpf(0) if abs(disc) > tol else mp.mpf(1)
        res["omega1_imaginary"] = abs(mp.re(self.omega1)) / (1 + abs(self.omega1))
        res["omega2_positive"] = mp.mpf(0) if self.omega2 > 0 else mp.mpf(1)
        res["omega3_positive"] = mp.mpf(0) if self.omega3 > 0 else mp.mpf(1)
        return res


def build_context(model, t, prec: int = DEFAULT_PREC) -> AnalyticContext:
    """Compute branch points, periods and elliptic invariants for a model.

    ``model`` is a catalog name or entry; ``t`` an exact rational (or float,
    read at face value) with ``0 < t < 1/|S|``.  Only unweighted non-singular
    models are supported.
    """
    entry = model if hasattr(model, "steps") else catalog().lookup(str(model))
    if entry.weighted:
        raise AnalyticError("the analytic construction requires an unweighted model")
    if entry.singular:
        raise AnalyticError("the analytic construction requires a non-singular model")
    tq = _to_fraction(t)
    nsteps = len(entry.steps.vectors())
    if not 0 < tq < Fraction(1, nsteps):
        raise AnalyticError(f"weight {tq} outside (0, 1/{nsteps})")

    with mp.workprec(prec + 32):
        ker = Kernel(entry.steps)
        tm = _frac_mp(tq)
        ax = _poly_coeffs_at_t(ker.a, "x", tq)
        bx = _poly_coeffs_at_t(ker.b, "x", tq)
        cx = _poly_coeffs_at_t(ker.c, "x", tq)
        tay = _poly_coeffs_at_t(ker.ta, "y", tq)
        tby = _poly_coeffs_at_t(ker.tb, "y", tq)
        tcy = _poly_coeffs_at_t(ker.tc, "y", tq)
        d_co = _poly_coeffs_at_t(ker.discriminant_x(), "x", tq)
        dt_co = _poly_coeffs_at_t(ker.discriminant_y(), "y", tq)

        x1, x2, x3, x4 = _label_branch_points(_real_roots(d_co))
        y1, y2, y3, y4 = _label_branch_points(_real_roots(dt_co))
        y4_inf = y4 == mp.inf

        vectors = tuple(entry.steps.vectors())
        bounded = (-1, 0) in vectors or (-1, 1) in vectors
        am = [_frac_mp(c) for c in ax]
        bm = [_frac_mp(c) for c in bx]
        if bounded:
            Y_x1 = -_eval_poly_list(bm, x1) / (2 * _eval_poly_list(am, x1))
        else:
            Y_x1 = -mp.inf
        Y_x2 = -_eval_poly_list(bm, x2) / (2 * _eval_poly_list(am, x2))

        # Legendre-form periods.
        if y4_inf:
            k1 = mp.sqrt((y2 - y1) / (y3 - y1))
            k2 = mp.sqrt((y3 - y2) / (y3 - y1))
        else:
            k1 = mp.sqrt((y2 - y1) * (y4 - y3) / ((y3 - y1) * (y4 - y2)))
            k2 = mp.sqrt((y3 - y2) * (y4 - y1) / ((y3 - y1) * (y4 - y2)))
        lead = _frac_mp(dt_co[-1])
        if y4_inf:
            pref = 2 / mp.sqrt(lead * (y1 - y3))
        else:
            pref = 2 / mp.sqrt(lead * (y3 - y1) * (y4 - y2))
        omega1 = mp.mpc(0, 1) * pref * mp.ellipk(k1**2)
        omega2 = pref * mp.ellipk(k2**2)
        if bounded:
            if y4_inf:
                v3 = mp.sqrt((y1 - Y_x1) / (y2 - Y_x1))
            else:
                v3 = mp.sqrt((y1 - Y_x1) * (y4 - y2) / ((y2 - Y_x1) * (y4 - y1)))
        else:
            if y4_inf:
                raise AnalyticError("unbounded curve with a cubic y-discriminant")
            v3 = mp.sqrt((y4 - y2) / (y4 - y1))
        omega3 = pref * mp.ellipf(mp.asin(v3), k2**2)

        g2_12, g3_12 = _g_invariants(omega1, omega2, prec)
        g2_13, g3_13 = _g_invariants(omega1, omega3, prec)

        dt1 = _derive_list(dt_co)
        dt2 = _derive_list(dt1)
        if y4_inf:
            dt3 = _derive_list(dt2)
            f_const = _eval_poly_list(dt2, mp.mpf(0)) / 6
            f_coef = _eval_poly_list(dt3, mp.mpf(0)) / 6
        else:
            f_const = _eval_poly_list(dt2, y4) / 6
            f_coef = _eval_poly_list(dt1, y4)

        ctx = AnalyticContext(
            name=entry.id,
            key=_table_key(entry),
            t=tm,
            prec=prec,
            vectors=vectors,
            x1=x1,
            x2=x2,
            x3=x3,
            x4=x4,
            y1=y1,
            y2=y2,
            y3=y3,
            y4=mp.inf if y4_inf else y4,
            Y_at_x1=Y_x1,
            Y_at_x2=Y_x2,
            omega1=omega1,
            omega2=omega2,
            omega3=omega3,
            g2_12=g2_12,
            g3_12=g3_12,
            g2_13=g2_13,
            g3_13=g3_13,
            f_const=f_const,
            f_coef=f_coef,
            y4_infinite=y4_inf,
            curve_bounded=bounded,
            d_coeffs=d_co,
            dt_coeffs=dt_co,
            _a=ax,
            _b=bx,
            _c=cx,
            _ta=tay,
            _tb=tby,
            _tc=tcy,
        )
        return ctx


# ---------------------------------------------------------------------------
# Weierstrass evaluation on a rectangular lattice
# ---------------------------------------------------------------------------


class _Lattice:
    """A rectangular lattice with cached cubic roots for wp evaluation."""

    def __init__(self, omega_im, omega_re, g2, g3):
        self.omega_im = omega_im  # purely imaginary period
        self.omega_re = omega_re  # real period
        self.g2 = g2
        self.g3 = g3
        roots = mp.polyroots([mp.mpf(4), mp.mpf(0), -g2, -g3], extraprec=60)
        roots = sorted((mp.re(r) for r in roots), reverse=True)
        self.e1, self.e2, self.e3 = roots
        self.scale = mp.sqrt(self.e1 - self.e3)
        self.m = (self.e2 - self.e3) / (self.e1 - self.e3)

    def _fold(self, z):
        nu = self.omega_re
        mu = mp.im(self.omega_im)
        zr = z - mp.floor(mp.re(z) / nu + mp.mpf("0.5")) * nu
        zi = mp.im(zr) - mp.floor(mp.im(zr) / mu + mp.mpf("0.5")) * mu
        return mp.mpc(mp.re(zr), zi)

    def wp(self, z):
        u = self._fold(z) * self.scale
        sn = mp.ellipfun("sn", u, self.m)
        return self.e3 + (self.e1 - self.e3) / sn**2

    def wp_prime(self, z):
        u = self._fold(z) * self.scale
        sn = mp.ellipfun("sn", u, self.m)
        cn = mp.ellipfun("cn", u, self.m)
        dn = mp.ellipfun("dn", u, self.m)
        return -2 * self.scale**3 * cn * dn / sn**3

    def wp_taylor(self, z, n: int) -> list:
        """Derivative list [wp(z), wp'(z), ..., wp^(n)(z)] from the cubic ODE."""
        ders = [self.wp(z), self.wp_prime(z)]
        if n >= 2:
            ders.append(6 * ders[0] ** 2 - self.g2 / 2)
        for k in range(1, n - 1):
            # differentiate wp'' = 6 wp^2 - g2/2 a further k times
            acc = mp.mpf(0)
            for i in range(k + 1):
                acc += mp.binomial(k, i) * ders[i] * ders[k - i]
            ders.append(6 * acc)
        return ders[: n + 1]


class GluingEvaluator:
    """Evaluate the weak invariant w, its derivatives, and the uniformizer.

    The inverse of the first Weierstrass function is pinned down in the
    half-parallelogram ``Re in [0, omega2/2]``, ``Im in [0, |omega1|]`` (with
    reflected boundary edges), which fixes the determination used everywhere.
    """

    def __init__(self, ctx: AnalyticContext):
        self.ctx = ctx
        with mp.workprec(ctx.prec + 32):
            self.lat12 = _Lattice(ctx.omega1, ctx.omega2, ctx.g2_12, ctx.g3_12)
            self.lat13 = _Lattice(ctx.omega1, ctx.omega3, ctx.g2_13, ctx.g3_13)
            self._half_shift = (ctx.omega1 + ctx.omega2) / 2

    # -- inverse wp_{1,2} in the half-parallelogram --------------------------

    def wp12_inv(self, value):
        """The preimage of ``value`` under wp_{1,2} in the half-parallelogram."""
        ctx = self.ctx
        with mp.workprec(ctx.prec + 32):
            lat = self.lat12
            z0 = mp.elliprf(value - lat.e1, value - lat.e2, value - lat.e3)
            z = self._reduce_half(z0)
            check = lat.wp(z)
            err = abs(check - value) / (1 + abs(value))
            if err > mp.mpf(2) ** (-ctx.prec // 3):
                raise AnalyticError(f"half-parallelogram determination failed ({err})")
            return z

    def _reduce_half(self, z):
        nu = self.ctx.omega2
        mu = mp.im(self.ctx.omega1)
        eps = mp.mpf(2) ** (-self.ctx.prec // 2) * (nu + mu)

        def wrap(v, span):
            w = mp.fmod(v, span)
            return w + span if w < 0 else w

        x = wrap(mp.re(z), nu)
        y = wrap(mp.im(z), mu)
        if x > nu / 2 + eps:
            x, y = nu - x, wrap(mu - y, mu)
        if (x < eps or x > nu / 2 - eps) and y > mu / 2 + eps:
            y = mu - y
        return mp.mpc(x, y)

    # -- the uniformizer Z and the invariant w -------------------------------

    def Z(self, y):
        """Uniformizer value with Z(y2) = 0 and Re(Z) <= 0."""
        with mp.workprec(self.ctx.prec + 32):
            return self.wp12_inv(self.ctx.f(y)) - self._half_shift

    def Z_prime(self, y):
        with mp.workprec(self.ctx.prec + 32):
            z = self.wp12_inv(self.ctx.f(y))
            return self.ctx.f_prime(y) / self.lat12.wp_prime(z)

    def Z_ode_residual(self, y):
        """|4 dt(y) Z'(y)^2 - 1| -- first-order equation of the uniformizer."""
        with mp.workprec(self.ctx.prec + 32):
            return abs(4 * self.ctx.dt(y) * self.Z_prime(y) ** 2 - 1)

    def w(self, y):
        with mp.workprec(self.ctx.prec + 32):
            return self.lat13.wp(self.Z(y))

    def w_prime(self, y):
        with mp.workprec(self.ctx.prec + 32):
            return self.lat13.wp_prime(self.Z(y)) * self.Z_prime(y)

    def ed_w_residual(self, y):
        """Relative residual of 4 dt(y) w'(y)^2 = 4 w^3 - g2 w - g3."""
        with mp.workprec(self.ctx.prec + 32):
            wv, wp = self.w(y), self.w_prime(y)
            lhs = 4 * self.ctx.dt(y) * wp**2
            rhs = 4 * wv**3 - self.ctx.g2_13 * wv - self.ctx.g3_13
            return abs(lhs - rhs) / (1 + abs(rhs))

    def invariance_residual(self, x):
        """|w(Y_0(x)) - w(Y_1(x))| for x on the open cut (x1, x2)."""
        with mp.workprec(self.ctx.prec + 32):
            u0, u1 = self.ctx.Y_branches(x)
            return abs(self.w(u0) - self.w(u1))

    # -- Taylor data ----------------------------------------------------------

    def _z_series(self, quartic: Sequence, y0, z0, z1, n: int) -> list:
        """Taylor coefficients of Z at y0 from Z'(y)^2 = 1/(4 q(y))."""
        # Taylor of q at y0 (q given by ascending coefficients), times 4.
        m = [c if not isinstance(c, Fraction) else _frac_mp(c) for c in quartic]
        shift = [mp.mpf(0)] * (n + 1)
        for k, c in enumerate(m):
            # contribute c * (y0 + h)^k
            for j in range(min(k, n) + 1):
                shift[j] += c * mp.binomial(k, j) * y0 ** (k - j)
        P = [4 * v for v in shift]
        # A = 1/P as a series
        A = [mp.mpf(0)] * (n + 1)
        A[0] = 1 / P[0]
        for k in range(1, n + 1):
            acc = mp.mpf(0)
            for j in range(1, k + 1):
                if j < len(P):
                    acc += P[j] * A[k - j]
            A[k] = -acc / P[0]
        # g = sqrt(A) with leading coefficient z1 (g0^2 == A0 by construction)
        g = [mp.mpf(0)] * (n + 1)
        g[0] = z1
        for k in range(1, n + 1):
            acc = A[k]
            for j in range(1, k):
                acc -= g[j] * g[k - j]
            g[k] = acc / (2 * g[0])
        zc = [z0] + [g[k] / (k + 1) for k in range(n)]
        return zc

    def w_taylor(self, y0, n: int) -> list:
        """[w(y0), w'(y0), ..., w^(n)(y0)] by exact series composition."""
        ctx = self.ctx
        with mp.workprec(ctx.prec + 48):
            z0 = self.Z(y0)
            wp1 = self.lat13.wp_prime(z0)
            f1 = ctx.f_prime(y0)
            p12 = self.lat12.wp_prime(self.wp12_inv(ctx.f(y0)))
            base = 1 / (2 * mp.sqrt(ctx.dt(y0)))
            if abs(p12) > mp.mpf(2) ** (-ctx.prec // 4) * (1 + abs(f1)):
                z1 = f1 / p12
            else:
                z1 = base  # half-parallelogram corner: either sign is valid
            zc = self._z_series(ctx.dt_coeffs, y0, z0, z1, n)
            ders = self.lat13.wp_taylor(z0, n)
            return _compose_taylor(ders, zc, n)

    def w_at_infinity(self, n: int) -> list:
        """Taylor coefficients of s -> w(1/s) at s = 0 (curve must reach it)."""
        ctx = self.ctx
        if ctx.y4_infinite:
            raise AnalyticError("expansion at infinity requires a quartic y-discriminant")
        with mp.workprec(ctx.prec + 48):
            z0 = self.wp12_inv(ctx.f_const) - self._half_shift
            rev = list(reversed(ctx.dt_coeffs))
            base = 1 / (2 * mp.sqrt(_frac_mp(rev[0])))
            zc = self._z_series(rev, mp.mpf(0), z0, base, n)
            ders = self.lat13.wp_taylor(z0, n)
            coeffs = _compose_taylor(ders, zc, n)
            return [coeffs[k] / mp.factorial(k) for k in range(n + 1)]


def _compose_taylor(outer_ders: list, inner_coeffs: list, n: int) -> list:
    """Derivatives of F(g(h)) at h=0 from F-derivatives at g(0) and g-coefficients."""
    u = [mp.mpf(0)] + [inner_coeffs[k] for k in range(1, n + 1)]
    powers = [[mp.mpf(1)] + [mp.mpf(0)] * n]
    comp = [outer_ders[0]] + [mp.mpf(0)] * n
    cur = powers[0]
    for j in range(1, n + 1):
        nxt = [mp.mpf(0)] * (n + 1)
        for a in range(n + 1):
            if cur[a] == 0:
                continue
            for b in range(1, n + 1 - a):
                nxt[a + b] += cur[a] * u[b]
        cur = nxt
        fac = outer_ders[j] / mp.factorial(j)
        for k in range(n + 1):
            comp[k] += fac * cur[k]
    return [comp[k] * mp.factorial(k) for k in range(n + 1)]


# ---------------------------------------------------------------------------
# public wrappers
# ---------------------------------------------------------------------------


def w_eval(ctx_or_ge, y):
    """Weak-invariant value w(y) for a context or evaluator."""
    ge = ctx_or_ge if isinstance(ctx_or_ge, GluingEvaluator) else GluingEvaluator(ctx_or_ge)
    return ge.w(mp.mpmathify(y))


def w_derivatives(ctx_or_ge, y0, n: int) -> list:
    """[w(y0), w'(y0), ..., w^(n)(y0)] by series composition (no differencing)."""
    ge = ctx_or_ge if isinstance(ctx_or_ge, GluingEvaluator) else GluingEvaluator(ctx_or_ge)
    return ge.w_taylor(mp.mpmathify(y0), n)


def _decoupling_g(key: str) -> Rat:
    from .checks import known_decoupling

    return known_decoupling(key)[1]


def _g_value(G: Rat, y, t):
    return G.eval_mp({"y": y, "t": t})


def _s_uniform(ge: GluingEvaluator, y, key: str):
    ctx = ge.ctx
    p_int, r_of_t, alpha_tok, g0 = _S_TABLE[key]
    with mp.workprec(ctx.prec + 32):
        t = ctx.t
        p = mp.mpf(p_int)
        r = mp.mpmathify(r_of_t(t))
        alpha = _resolve_alpha(alpha_tok, t)
        G = _decoupling_g(key)
        wy = ge.w(y)
        ders = ge.w_taylor(p, 2)
        wp_val, wp_d1, wp_d2 = ders[0], ders[1], ders[2]
        out = _g_value(G, y, t) - g0 - r * wp_d1 / (wy - wp_val)
        if abs(alpha - p) > mp.mpf("1e-9"):
            out += r * wp_d1 / (ge.w(alpha) - wp_val)
        else:
            out += -(r / 2) * wp_d2 / wp_d1
        return out


def S_closed_form(ctx_or_ge, y):
    """Integral-free S(y) = K(0,y) Q(0,y) for the nine decoupled infinite-group models."""
    ge = ctx_or_ge if isinstance(ctx_or_ge, GluingEvaluator) else GluingEvaluator(ctx_or_ge)
    key = ge.ctx.key
    if key not in _INFINITE_KEYS:
        raise AnalyticError(f"no corner formula registered for model {ge.ctx.name}")
    y = mp.mpmathify(y)
    if key == "#9":
        ctx = ge.ctx
        with mp.workprec(ctx.prec + 32):
            t = ctx.t
            ders = ge.w_taylor(mp.mpf(0), 4)
            w0, w2c, w4c = ders[0], ders[2] / 2, ders[4] / 24
            G = _decoupling_g("#9")
            return _g_value(G, y, t) + w2c / (ge.w(y) - w0) + w4c / w2c - 1 / t**2
    return _s_uniform(ge, y, key)


def S_finite_group(ctx_or_ge, y):
    """The same corner formula for the three bounded-curve algebraic models."""
    ge = ctx_or_ge if isinstance(ctx_or_ge, GluingEvaluator) else GluingEvaluator(ctx_or_ge)
    key = ge.ctx.key
    if key not in _FINITE_KEYS:
        raise AnalyticError(f"model {ge.ctx.name} is not one of the finite-group cases")
    return _s_uniform(ge, mp.mpmathify(y), key)


def reverse_kreweras_diagonal_root(ctx: AnalyticContext):
    """The root of K(y, y) in (0, 1) used to pin the reverse-Kreweras constant."""
    with mp.workprec(ctx.prec + 32):
        t = ctx.t
        roots = mp.polyroots([2 * t, -mp.mpf(1), mp.mpf(0), t], extraprec=60)
        for r in roots:
            if abs(mp.im(r)) < mp.mpf("1e-20") and 0 < mp.re(r) < 1:
                return mp.re(r)
    raise AnalyticError("no diagonal kernel root in (0, 1)")


def S_reverse_kreweras(ctx_or_ge, y):
    """S(y) = t Q(0,y) for the reverse Kreweras model (rootless K(0,y) = t)."""
    ge = ctx_or_ge if isinstance(ctx_or_ge, GluingEvaluator) else GluingEvaluator(ctx_or_ge)
    ctx = ge.ctx
    if ctx.key != "reverse-kreweras":
        raise AnalyticError(f"model {ctx.name} is not the reverse Kreweras model")
    y = mp.mpmathify(y)
    with mp.workprec(ctx.prec + 32):
        yc = reverse_kreweras_diagonal_root(ctx)
        ders = ge.w_taylor(mp.mpf(0), 2)
        w0, w1, w2 = ders[0], ders[1], ders[2]
        cst = yc**2 + 2 / yc - w2 / (2 * w1) - 2 * w1 / (ge.w(yc) - w0)
        return -1 / y + w1 / (ge.w(y) - w0) + cst


# ---------------------------------------------------------------------------
# curve membership
# ---------------------------------------------------------------------------


def curve_membership(ctx: AnalyticContext, y, samples: int = 400, tol=None) -> str:
    """Classify ``y`` as ``"inside"`` (in G_L), ``"on"`` the curve, or ``"outside"``.

    A point is on the curve iff some real x in [x1, x2] satisfies K(x, y) = 0;
    otherwise the parity of the crossings of a rightward ray with the sampled
    curve decides the side (the domain G_L avoids the real point at +infinity).
    """
    y = mp.mpmathify(y)
    with mp.workprec(ctx.prec):
        tol = mp.mpf("1e-9") if tol is None else mp.mpf(tol)
        ta = [_frac_mp(c) for c in ctx._ta]
        tb = [_frac_mp(c) for c in ctx._tb]
        tc = [_frac_mp(c) for c in ctx._tc]
        av = _eval_poly_list(list(reversed(ta)), y)
        bv = _eval_poly_list(list(reversed(tb)), y)
        cv = _eval_poly_list(list(reversed(tc)), y)
        coeffs = [av, bv, cv]
        while coeffs and abs(coeffs[0]) < mp.mpf(2) ** (-ctx.prec // 2):
            coeffs.pop(0)
        if len(coeffs) >= 2:
            for root in mp.polyroots(coeffs, extraprec=60):
                if abs(mp.im(root)) < tol and ctx.x1 - tol <= mp.re(root) <= ctx.x2 + tol:
                    return "on"

        # Ray casting against the sampled curve.
        pts_upper = []
        span = ctx.x2 - ctx.x1
        cap = mp.mpf("1e8")
        for k in range(1, samples):
            xk = ctx.x1 + span * mp.mpf(k) / samples
            u0, u1 = ctx.Y_branches(xk)
            up = u0 if mp.im(u0) >= 0 else u1
            if abs(up) < cap:
                pts_upper.append(up)
        loop = pts_upper + [mp.conj(p) for p in reversed(pts_upper)]
        if not ctx.curve_bounded:
            far = -mp.mpf("1e9")
            loop = (
                [mp.mpc(far, mp.im(loop[0]) + 1)]
                + loop
                + [mp.mpc(far, mp.im(loop[-1]) - 1)]
            )
        crossings = 0
        npts = len(loop)
        for i in range(npts):
            p1, p2 = loop[i], loop[(i + 1) % npts]
            y1v, y2v = mp.im(p1), mp.im(p2)
            if (y1v > mp.im(y)) == (y2v > mp.im(y)):
                continue
            xc = mp.re(p1) + (mp.im(y) - y1v) * (mp.re(p2) - mp.re(p1)) / (y2v - y1v)
            if xc > mp.re(y):
                crossings += 1
        return "inside" if crossings % 2 == 1 else "outside"


# ---------------------------------------------------------------------------
# series oracle
# ---------------------------------------------------------------------------


def series_S_oracle(model, t, y, n_max: int = 24, prec: int = DEFAULT_PREC):
    """Ground truth for S(y) = K(0,y) Q(0,y) from the truncated counting series.

    Returns ``(value, tail)`` where ``tail`` bounds the truncation error of
    ``Q(0, y)``: each length-k coefficient is at most |S|^k and contributes at
    most ``(|S| t max(1,|y|))^k``, so the discarded part is a geometric tail.
    The bound is finite only when ``|S| t max(1, |y|) < 1``.
    """
    entry = model if hasattr(model, "steps") else catalog().lookup(str(model))
    tq = _to_fraction(t)
    with mp.workprec(prec):
        tm = _frac_mp(tq)
        ym = mp.mpmathify(y)
        series = series_q0y(entry.steps, (0, 0), n_max)
        total = series.eval_mp(tm, {"y": ym})
        nsteps = len(entry.steps.vectors())
        rho = nsteps * tm * max(mp.mpf(1), abs(ym))
        tail = rho ** (n_max + 1) / (1 - rho) if rho < 1 else mp.inf
        ker = Kernel(entry.steps)
        k0y = ker.tc.eval_mp({"y": ym, "t": tm})
        return k0y * total, abs(k0y) * tail
