"""Exact multivariate polynomial, rational-function and truncated-series layer.

Everything downstream (walk counting cross-checks, kernel groups, invariant
and decoupling searches, series verification) runs on the four types defined
here:

* ``Poly``      -- multivariate polynomials over Q in the fixed variable tuple
                   (x, y, t, u, lam), stored as a map from exponent tuples to
                   nonzero rationals, ordered by graded lex with
                   x > y > t > u > lam.
* ``Rat``       -- reduced fractions of ``Poly`` (gcd removed, denominator's
                   leading coefficient scaled to 1).
* ``Series``    -- truncated Puiseux series in t (t = s**e for a declared
                   ramification e) whose coefficients are ``Rat`` in declared
                   auxiliary variables; the truncation order is tracked so
                   precision is never over-claimed.
* ``PartialFraction`` -- exact partial-fraction decompositions with respect to
                   declared candidate pole locations.

Plus the exact operations the rest of the package needs: divisibility with a
quotient witness, gcd (content recursion + subresultant PRS), square roots of
series, and fraction-free linear solving over rational-function fields.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Mapping, Sequence

from ._rat import QQ, Q0, Q1, qq

# --------------------------------------------------------------------------
# variable bookkeeping
# --------------------------------------------------------------------------

#: The global variable tuple.  Order encodes the monomial order: graded lex
#: with x > y > t > u > lam.
VARS = ("x", "y", "t", "u", "lam")
NVARS = len(VARS)
IX = {"x": 0, "y": 1, "t": 2, "u": 3, "lam": 4, "λ": 4, "lambda": 4}
ZERO_EXP = (0,) * NVARS

#: Effectively-infinite truncation order for exact (non-truncated) series.
INF_ORDER = 10**9


class AlgebraError(ValueError):
    """Raised on contract violations (division by zero, pole hits, ...)."""


class PrecisionError(AlgebraError):
    """Raised when a series is asked about orders beyond its truncation."""


def _unit_exp(i: int) -> tuple[int, ...]:
    e = [0] * NVARS
    e[i] = 1
    return tuple(e)


def _rat_gcd(a: QQ, b: QQ) -> QQ:
    """gcd on Q: gcd of numerators over lcm of denominators (positive)."""
    from math import gcd, lcm

    an, ad = abs(int(a.numerator)), int(a.denominator)
    bn, bd = abs(int(b.numerator)), int(b.denominator)
    return QQ(gcd(an, bn), lcm(ad, bd))


# --------------------------------------------------------------------------
# Poly
# --------------------------------------------------------------------------


class Poly:
    """Multivariate polynomial over Q in the fixed tuple (x, y, t, u, lam).

    ``terms`` maps exponent tuples to nonzero rational coefficients.  The
    zero polynomial has an empty map.
    """

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[tuple[int, ...], QQ] | None = None):
        self.terms: dict[tuple[int, ...], QQ] = dict(terms) if terms else {}
        self._hash: int | None = None

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "Poly":
        return Poly()

    @staticmethod
    def const(c) -> "Poly":
        c = qq(c)
        return Poly({ZERO_EXP: c}) if c != 0 else Poly()

    @staticmethod
    def var(name: str, power: int = 1) -> "Poly":
        if power < 0:
            raise AlgebraError("Poly exponents must be nonnegative")
        if power == 0:
            return Poly.const(1)
        return Poly({_unit_exp(IX[name]): Q1}) ** power if power != 1 else Poly(
            {_unit_exp(IX[name]): Q1}
        )

    @staticmethod
    def monomial(exps: Mapping[str, int], coeff=1) -> "Poly":
        c = qq(coeff)
        if c == 0:
            return Poly()
        e = [0] * NVARS
        for name, p in exps.items():
            e[IX[name]] = p
        return Poly({tuple(e): c})

    # -- predicates --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and ZERO_EXP in self.terms)

    def is_one(self) -> bool:
        return self.terms.get(ZERO_EXP) == 1 and len(self.terms) == 1

    def const_value(self) -> QQ:
        if not self.is_const():
            raise AlgebraError("polynomial is not constant")
        return self.terms.get(ZERO_EXP, Q0)

    def variables(self) -> set[str]:
        used: set[str] = set()
        for e in self.terms:
            for i, p in enumerate(e):
                if p:
                    used.add(VARS[i])
        return used

    # -- degrees and leading data ------------------------------------------

    def degree(self, var: str | None = None) -> int:
        """Total degree, or degree in one variable.  Zero polynomial: -1."""
        if not self.terms:
            return -1
        if var is None:
            return max(sum(e) for e in self.terms)
        i = IX[var]
        return max(e[i] for e in self.terms)

    def lead(self) -> tuple[tuple[int, ...], QQ]:
        """Leading (exponent, coefficient) under graded lex x>y>t>u>lam."""
        if not self.terms:
            raise AlgebraError("zero polynomial has no leading term")
        key = max(self.terms, key=lambda e: (sum(e), e))
        return key, self.terms[key]

    def lead_coeff(self) -> QQ:
        return self.lead()[1]

    # -- ring operations ----------------------------------------------------

    def __add__(self, other) -> "Poly":
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s == 0:
                    del out[e]
                else:
                    out[e] = s
        return Poly(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly({e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return _as_poly(other) + (-self)

    def __mul__(self, other) -> "Poly":
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        if not self.terms or not other.terms:
            return Poly()
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out: dict[tuple[int, ...], QQ] = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = (
                    e1[0] + e2[0],
                    e1[1] + e2[1],
                    e1[2] + e2[2],
                    e1[3] + e2[3],
                    e1[4] + e2[4],
                )
                s = out.get(e)
                if s is None:
                    out[e] = c1 * c2
                else:
                    s = s + c1 * c2
                    if s == 0:
                        del out[e]
                    else:
                        out[e] = s
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise AlgebraError("negative Poly power; use Rat")
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __truediv__(self, other) -> "Rat":
        return Rat(self, _as_poly(other))

    def __rtruediv__(self, other) -> "Rat":
        return Rat(_as_poly(other), self)

    def __eq__(self, other) -> bool:
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def scale(self, c) -> "Poly":
        c = qq(c)
        if c == 0:
            return Poly()
        return Poly({e: c * v for e, v in self.terms.items()})

    # -- calculus, views, evaluation ----------------------------------------

    def derivative(self, var: str) -> "Poly":
        i = IX[var]
        out: dict[tuple[int, ...], QQ] = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                out[tuple(e2)] = c * e[i]
        return Poly(out)

    def coeffs_in(self, var: str) -> dict[int, "Poly"]:
        """View as a univariate polynomial in ``var`` with Poly coefficients."""
        i = IX[var]
        out: dict[int, dict[tuple[int, ...], QQ]] = {}
        for e, c in self.terms.items():
            k = e[i]
            e2 = list(e)
            e2[i] = 0
            out.setdefault(k, {})[tuple(e2)] = c
        return {k: Poly(m) for k, m in out.items()}

    def coeff_of(self, var: str, power: int) -> "Poly":
        return self.coeffs_in(var).get(power, Poly())

    def subs(self, bindings: Mapping[str, object]) -> "Rat":
        """Substitute Rat/Poly/rational values for variables; returns a Rat."""
        bound = {IX[name]: _as_rat(val) for name, val in bindings.items()}
        # cache powers per bound variable
        maxp = {i: 0 for i in bound}
        for e in self.terms:
            for i in bound:
                if e[i] > maxp[i]:
                    maxp[i] = e[i]
        powers: dict[int, list[Rat]] = {}
        for i, r in bound.items():
            ps = [Rat.const(1)]
            for _ in range(maxp[i]):
                ps.append(ps[-1] * r)
            powers[i] = ps
        total = Rat.const(0)
        for e, c in self.terms.items():
            rest = [0] * NVARS
            factor = Rat.const(c)
            for i, p in enumerate(e):
                if p == 0:
                    continue
                if i in bound:
                    factor = factor * powers[i][p]
                else:
                    rest[i] = p
            if any(rest):
                factor = factor * Rat(Poly({tuple(rest): Q1}))
            total = total + factor
        return total

    def eval_qq(self, bindings: Mapping[str, QQ]) -> QQ:
        """Evaluate fully at rational points (all used variables bound)."""
        vals = {IX[k]: qq(v) for k, v in bindings.items()}
        total = Q0
        for e, c in self.terms.items():
            f = c
            for i, p in enumerate(e):
                if p:
                    if i not in vals:
                        raise AlgebraError(f"unbound variable {VARS[i]}")
                    f = f * vals[i] ** p
            total += f
        return total

    def eval_mp(self, bindings: Mapping[str, object]):
        """Evaluate at mpmath (or float/complex) points."""
        vals = {IX[k]: v for k, v in bindings.items()}
        total = 0
        for e, c in self.terms.items():
            f = 1
            for i, p in enumerate(e):
                if p:
                    if i not in vals:
                        raise AlgebraError(f"unbound variable {VARS[i]}")
                    f = f * vals[i] ** p
            total = total + _mpq_to_mp(c) * f
        return total

    # -- string form ---------------------------------------------------------

    def __repr__(self) -> str:
        return f"Poly({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        items = sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True)
        parts: list[str] = []
        for e, c in items:
            mono = "*".join(
                f"{VARS[i]}^{p}" if p > 1 else VARS[i] for i, p in enumerate(e) if p
            )
            if not mono:
                piece = str(c)
            elif c == 1:
                piece = mono
            elif c == -1:
                piece = f"-{mono}"
            else:
                piece = f"{c}*{mono}"
            parts.append(piece)
        out = parts[0]
        for piece in parts[1:]:
            out += f" - {piece[1:]}" if piece.startswith("-") else f" + {piece}"
        return out


def _mpq_to_mp(c: QQ):
    import mpmath as mp

    return mp.mpf(int(c.numerator)) / int(c.denominator)


def _as_poly(obj) -> "Poly":
    if isinstance(obj, Poly):
        return obj
    if isinstance(obj, int):
        return Poly.const(obj)
    if type(obj).__name__ in ("mpq", "Fraction"):
        return Poly.const(obj)
    return NotImplemented


# --------------------------------------------------------------------------
# divisibility / gcd
# --------------------------------------------------------------------------


def poly_divides(p: Poly, q: Poly) -> tuple[bool, Poly | None]:
    """Exact multivariate divisibility with a quotient witness.

    Requires p != 0.  Returns (True, r) with q == p*r, or (False, None).
    Single-divisor division under a monomial order is a decision procedure:
    if q is divisible, leading terms cancel at every step.
    """
    if p.is_zero():
        raise AlgebraError("poly_divides: divisor must be nonzero")
    if q.is_zero():
        return True, Poly.zero()
    pe, pc = p.lead()
    quo: dict[tuple[int, ...], QQ] = {}
    cur = q
    while not cur.is_zero():
        ce, cc = cur.lead()
        diff = tuple(a - b for a, b in zip(ce, pe))
        if any(d < 0 for d in diff):
            return False, None
        coeff = cc / pc
        quo[diff] = coeff
        cur = cur - p * Poly({diff: coeff})
    return True, Poly(quo)


def poly_exact_div(p: Poly, d: Poly) -> Poly:
    ok, r = poly_divides(d, p)
    if not ok or r is None:
        raise AlgebraError("exact division failed")
    return r


def _content_qq(p: Poly) -> QQ:
    c = Q0
    for v in p.terms.values():
        c = _rat_gcd(c, v) if c != 0 else abs(v)
    return c if c != 0 else Q1


def _normalize_gcd(p: Poly) -> Poly:
    """Scale a gcd candidate canonically: content 1, leading coefficient > 0."""
    if p.is_zero():
        return p
    c = _content_qq(p)
    if p.lead_coeff() < 0:
        c = -c
    return p.scale(Q1 / c)


def _lead_in(p: Poly, var: str) -> tuple[int, Poly]:
    cs = p.coeffs_in(var)
    d = max(cs)
    return d, cs[d]


def _from_coeffs(var: str, cs: Mapping[int, Poly]) -> Poly:
    i = IX[var]
    out: dict[tuple[int, ...], QQ] = {}
    for k, poly in cs.items():
        for e, c in poly.terms.items():
            e2 = list(e)
            e2[i] += k
            out[tuple(e2)] = c
    return Poly(out)


def _pseudo_rem(a: Poly, b: Poly, var: str) -> Poly:
    """prem(a, b) wrt var: lc(b)^(da-db+1) * a mod b."""
    db, lb = _lead_in(b, var)
    r = a
    da = r.degree(var)
    e = da - db + 1
    vpoly = Poly.var(var)
    while not r.is_zero() and r.degree(var) >= db:
        dr, lr = _lead_in(r, var)
        r = lb * r - lr * b * vpoly ** (dr - db)
        e -= 1
    if e > 0:
        r = r * lb**e
    return r


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """gcd over Q[x,y,t,u,lam]: content recursion + subresultant PRS."""
    if a.is_zero():
        return _normalize_gcd(b)
    if b.is_zero():
        return _normalize_gcd(a)
    avars, bvars = a.variables(), b.variables()
    common = avars | bvars
    if not common:
        return Poly.const(1)
    # pick the main variable with the smallest max degree (shorter PRS)
    var = min(common, key=lambda v: max(a.degree(v), b.degree(v)))
    if var not in avars or var not in bvars:
        # gcd must be free of var: gcd of one side with the other's content
        if var in avars:
            a_cont = _poly_gcd_many(list(a.coeffs_in(var).values()))
            return poly_gcd(a_cont, b)
        b_cont = _poly_gcd_many(list(b.coeffs_in(var).values()))
        return poly_gcd(a, b_cont)
    ca = _poly_gcd_many(list(a.coeffs_in(var).values()))
    cb = _poly_gcd_many(list(b.coeffs_in(var).values()))
    gc = poly_gcd(ca, cb)
    pa = poly_exact_div(a, ca)
    pb = poly_exact_div(b, cb)
    if pa.degree(var) < pb.degree(var):
        pa, pb = pb, pa
    g = Poly.const(1)
    h = Poly.const(1)
    while True:
        delta = pa.degree(var) - pb.degree(var)
        r = _pseudo_rem(pa, pb, var)
        if r.is_zero():
            pb_cont = _poly_gcd_many(list(pb.coeffs_in(var).values()))
            pp = poly_exact_div(pb, pb_cont)
            return _normalize_gcd(gc * pp)
        if r.degree(var) == 0:
            return _normalize_gcd(gc)
        pa, pb = pb, poly_exact_div(r, g * h**delta)
        _, g = _lead_in(pa, var)
        if delta > 1:
            h = poly_exact_div(g**delta, h ** (delta - 1))
        elif delta == 1:
            h = g
        # delta == 0: h unchanged


def _poly_gcd_many(polys: Sequence[Poly]) -> Poly:
    acc = Poly.zero()
    for p in polys:
        acc = poly_gcd(acc, p)
        if acc.is_one():
            return acc
    return acc if not acc.is_zero() else Poly.const(1)


def poly_lcm(a: Poly, b: Poly) -> Poly:
    if a.is_zero() or b.is_zero():
        return Poly.zero()
    return poly_exact_div(a * b, poly_gcd(a, b))


def poly_sqrt(p: Poly, var: str) -> Poly | None:
    """Exact square root of a univariate-in-var polynomial, if one exists.

    Coefficients may involve other variables; the root is found by undetermined
    coefficients from the top degree down.  Returns None if p is not a square.
    """
    if p.is_zero():
        return Poly.zero()
    cs = p.coeffs_in(var)
    d = max(cs)
    if d % 2:
        return None
    # leading coefficient must be a square (only the rational-constant case
    # and the perfect-square-poly case via recursion are supported)
    lead = cs[d]
    if lead.is_const():
        from math import isqrt

        cv = lead.const_value()
        n, m = int(cv.numerator), int(cv.denominator)
        if n < 0:
            return None
        rn, rm = isqrt(n), isqrt(m)
        if rn * rn != n or rm * rm != m:
            return None
        lead_root = Poly.const(QQ(rn, rm))
    else:
        sub = poly_sqrt(lead, next(iter(lead.variables())))
        if sub is None:
            return None
        lead_root = sub
    half = d // 2
    root: dict[int, Poly] = {half: lead_root}
    two_lead = lead_root.scale(2)
    for k in range(half - 1, -1, -1):
        # coefficient of var^(k+half) in root^2 equals cs.get(k+half)
        acc = cs.get(k + half, Poly.zero())
        for i in range(k + 1, half):
            j = k + half - i
            if k < j < half and j in root and i in root:
                acc = acc - root[i] * root[j]
        ok, q = poly_divides(two_lead, acc)
        if not ok or q is None:
            return None
        root[k] = q
    cand = _from_coeffs(var, {k: v for k, v in root.items() if not v.is_zero()})
    return cand if (cand * cand) == p else None


# --------------------------------------------------------------------------
# Rat
# --------------------------------------------------------------------------


def rf_reduce(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    """Reduce a fraction: remove gcd, scale denominator's lead coeff to 1."""
    if den.is_zero():
        raise AlgebraError("zero denominator")
    if num.is_zero():
        return Poly.zero(), Poly.const(1)
    g = poly_gcd(num, den)
    if not g.is_one():
        num = poly_exact_div(num, g)
        den = poly_exact_div(den, g)
    lc = den.lead_coeff()
    if lc != 1:
        inv = Q1 / lc
        num = num.scale(inv)
        den = den.scale(inv)
    return num, den


class Rat:
    """Reduced rational function num/den over Q in (x, y, t, u, lam)."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Poly, den: Poly | None = None, *, _reduced: bool = False):
        if den is None:
            den = Poly.const(1)
        if not _reduced:
            num, den = rf_reduce(num, den)
        self.num = num
        self.den = den
        self._hash: int | None = None

    # -- constructors --------------------------------------------------------

    @staticmethod
    def const(c) -> "Rat":
        return Rat(Poly.const(c), Poly.const(1), _reduced=True)

    @staticmethod
    def var(name: str) -> "Rat":
        return Rat(Poly.var(name), Poly.const(1), _reduced=True)

    # -- predicates -----------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_const(self) -> bool:
        return self.num.is_const() and self.den.is_const()

    def const_value(self) -> QQ:
        if not self.is_const():
            raise AlgebraError("rational function is not constant")
        if self.num.is_zero():
            return Q0
        return self.num.const_value() / self.den.const_value()

    def is_poly(self) -> bool:
        return self.den.is_const()

    def as_poly(self) -> Poly:
        if not self.den.is_const():
            raise AlgebraError("not a polynomial")
        return self.num.scale(Q1 / self.den.const_value())

    def variables(self) -> set[str]:
        return self.num.variables() | self.den.variables()

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other) -> "Rat":
        other = _as_rat(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den == other.den:
            return Rat(self.num + other.num, self.den)
        return Rat(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "Rat":
        return Rat(-self.num, self.den, _reduced=True)

    def __sub__(self, other) -> "Rat":
        other = _as_rat(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Rat":
        return _as_rat(other) + (-self)

    def __mul__(self, other) -> "Rat":
        other = _as_rat(other)
        if other is NotImplemented:
            return NotImplemented
        # cross-reduce first to keep intermediates small
        a, b = self, other
        g1 = poly_gcd(a.num, b.den)
        g2 = poly_gcd(b.num, a.den)
        n1 = a.num if g1.is_one() else poly_exact_div(a.num, g1)
        d2 = b.den if g1.is_one() else poly_exact_div(b.den, g1)
        n2 = b.num if g2.is_one() else poly_exact_div(b.num, g2)
        d1 = a.den if g2.is_one() else poly_exact_div(a.den, g2)
        num, den = n1 * n2, d1 * d2
        lc = den.lead_coeff() if not den.is_zero() else Q1
        if lc != 1:
            num = num.scale(Q1 / lc)
            den = den.scale(Q1 / lc)
        return Rat(num, den, _reduced=True)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Rat":
        other = _as_rat(other)
        if other is NotImplemented:
            return NotImplemented
        if other.num.is_zero():
            raise AlgebraError("division by zero rational function")
        return self * Rat(other.den, other.num)

    def __rtruediv__(self, other) -> "Rat":
        return _as_rat(other) / self

    def __pow__(self, n: int) -> "Rat":
        if n < 0:
            return (Rat.const(1) / self) ** (-n)
        result = Rat.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        other = _as_rat(other)
        if other is NotImplemented:
            return NotImplemented
        # equality by cross-multiplication, never by normal-form assumptions
        return (self.num * other.den) == (other.num * self.den)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    # -- calculus / evaluation --------------------------------------------------

    def derivative(self, var: str) -> "Rat":
        n, d = self.num, self.den
        return Rat(n.derivative(var) * d - n * d.derivative(var), d * d)

    def subs(self, bindings: Mapping[str, object]) -> "Rat":
        num = self.num.subs(bindings)
        den = self.den.subs(bindings)
        if den.is_zero():
            raise AlgebraError("substitution hits a pole")
        return num / den

    def eval_qq(self, bindings: Mapping[str, QQ]) -> QQ:
        d = self.den.eval_qq(bindings)
        if d == 0:
            raise AlgebraError("evaluation hits a pole")
        return self.num.eval_qq(bindings) / d

    def eval_mp(self, bindings: Mapping[str, object]):
        d = self.den.eval_mp(bindings)
        if d == 0:
            raise AlgebraError("evaluation hits a pole")
        return self.num.eval_mp(bindings) / d

    def depends_on(self, var: str) -> bool:
        return var in self.variables()

    def __repr__(self) -> str:
        return f"Rat({self})"

    def __str__(self) -> str:
        if self.den.is_one():
            return str(self.num)
        ns = str(self.num)
        if len(self.num.terms) > 1:
            ns = f"({ns})"
        ds = str(self.den)
        if len(self.den.terms) > 1 or "*" in ds:
            ds = f"({ds})"
        return f"{ns}/{ds}"


def _as_rat(obj) -> "Rat":
    if isinstance(obj, Rat):
        return obj
    if isinstance(obj, Poly):
        return Rat(obj, Poly.const(1), _reduced=True)
    if isinstance(obj, int) or type(obj).__name__ in ("mpq", "Fraction"):
        return Rat.const(obj)
    return NotImplemented


# --------------------------------------------------------------------------
# univariate helpers over the fraction field
# --------------------------------------------------------------------------


def rat_coeffs_in(f: Rat, var: str) -> dict[int, Rat]:
    """Coefficients of a Rat that is polynomial in ``var`` (den free of var)."""
    if f.den.degree(var) > 0:
        raise AlgebraError(f"denominator involves {var}")
    den = Rat(Poly.const(1), f.den)
    return {k: Rat(c) * den for k, c in f.num.coeffs_in(var).items()}


def rat_poly_divmod(
    num: dict[int, Rat], den: dict[int, Rat]
) -> tuple[dict[int, Rat], dict[int, Rat]]:
    """Division with remainder of univariate polynomials with Rat coefficients.

    Inputs/outputs are sparse coefficient maps {power: Rat}.
    """
    num = {k: v for k, v in num.items() if not v.is_zero()}
    den = {k: v for k, v in den.items() if not v.is_zero()}
    if not den:
        raise AlgebraError("division by zero polynomial")
    dd = max(den)
    lc = den[dd]
    quo: dict[int, Rat] = {}
    rem = dict(num)
    while rem and max(rem) >= dd:
        dr = max(rem)
        c = rem[dr] / lc
        quo[dr - dd] = c
        for k, v in den.items():
            idx = dr - dd + k
            acc = rem.get(idx, Rat.const(0)) - c * v
            if acc.is_zero():
                rem.pop(idx, None)
            else:
                rem[idx] = acc
        rem.pop(dr, None)
    return quo, rem


# --------------------------------------------------------------------------
# PartialFraction
# --------------------------------------------------------------------------


class PartialFraction:
    """Exact partial-fraction decomposition in one variable.

    f(v) == poly_part(v) + sum over poles r of sum_e coeffs[r][e-1]/(v-r)^e
            + residual, where residual collects any denominator factor that
            does not split over the declared candidate locations.
    """

    __slots__ = ("var", "poly_part", "poles", "residual")

    def __init__(
        self,
        var: str,
        poly_part: dict[int, Rat],
        poles: list[tuple[Rat, list[Rat]]],
        residual: Rat,
    ):
        self.var = var
        self.poly_part = poly_part
        self.poles = poles
        self.residual = residual

    def reassemble(self) -> Rat:
        v = Rat.var(self.var)
        total = Rat.const(0)
        for k, c in self.poly_part.items():
            total = total + c * v**k
        for loc, coeffs in self.poles:
            for e, c in enumerate(coeffs, start=1):
                if not c.is_zero():
                    total = total + c / (v - loc) ** e
        return total + self.residual

    def is_split(self) -> bool:
        return self.residual.is_zero()


def partial_fractions(f: Rat, var: str, candidates: Iterable) -> PartialFraction:
    """Partial fractions of f with respect to ``var`` at candidate locations.

    Candidate locations are rationals or Rats free of ``var`` (they may depend
    on t).  Any denominator factor that does not vanish at a candidate stays
    in ``residual`` and is reported there, unsplit.
    """
    cands = [_as_rat(c) for c in candidates]
    for c in cands:
        if c.depends_on(var):
            raise AlgebraError("pole location depends on the split variable")
    num_c = rat_coeffs_in(Rat(f.num), var) if f.num.degree(var) >= 0 else {}
    den_c = rat_coeffs_in(Rat(f.den), var)
    # polynomial part
    quo, rem = rat_poly_divmod(num_c, den_c)
    # factor candidate linear factors out of the denominator
    poles: list[tuple[Rat, list[Rat]]] = []
    den_work = dict(den_c)
    vpow = Rat.var(var)
    for loc in cands:
        mult = 0
        while True:
            # evaluate den_work at var=loc
            val = Rat.const(0)
            p = Rat.const(1)
            for k in sorted(den_work):
                val = val + den_work[k] * loc**k
            if not val.is_zero() or not den_work:
                break
            q, r = rat_poly_divmod(den_work, {1: Rat.const(1), 0: -loc})
            if any(not c.is_zero() for c in r.values()):
                break
            den_work = q
            mult += 1
        if mult:
            poles.append((loc, [Rat.const(0)] * mult))
    # den = den_rest * prod (var-r)^mult ; compute pole coefficients by
    # evaluating derivatives of h = rem / (den / (var-r)^e) at var=r.
    rem_rat = _coeffs_to_rat(rem, var)
    den_rat = _coeffs_to_rat(den_c, var)
    for loc, coeffs in poles:
        e = len(coeffs)
        shifted = den_rat / (Rat.var(var) - loc) ** e
        h = rem_rat / shifted
        fact = 1
        for j in range(e):
            if j:
                h = h.derivative(var)
                fact *= j
            coeffs[e - 1 - j] = h.subs({var: loc}) * Rat.const(QQ(1, fact))
    pf = PartialFraction(var, quo, poles, Rat.const(0))
    residual = f - pf.reassemble()
    pf.residual = residual
    return pf


def _coeffs_to_rat(cs: Mapping[int, Rat], var: str) -> Rat:
    v = Rat.var(var)
    total = Rat.const(0)
    for k, c in cs.items():
        total = total + c * v**k
    return total


# --------------------------------------------------------------------------
# Series
# --------------------------------------------------------------------------


def _gcd_int(a: int, b: int) -> int:
    from math import gcd

    return gcd(a, b)


class Series:
    """Truncated (possibly ramified, possibly Laurent) series in t.

    With ramification e, the underlying variable is s with t = s**e.  The
    series stores exact Rat coefficients for s-exponents low .. N-1; orders
    >= N are unknown.  ``aux`` declares which variables may appear in the
    coefficients.
    """

    __slots__ = ("aux", "e", "low", "coeffs", "N")

    def __init__(self, aux: tuple[str, ...], e: int, low: int, coeffs: list[Rat], N):
        self.aux = tuple(aux)
        self.e = e
        self.low = low
        self.coeffs = coeffs
        self.N = N
        # trim leading zeros for a canonical-ish layout
        while self.coeffs and self.coeffs[0].is_zero():
            self.coeffs.pop(0)
            self.low += 1
        while self.coeffs and self.coeffs[-1].is_zero():
            self.coeffs.pop()

    # -- constructors -----------------------------------------------------

    @staticmethod
    def zero(aux: tuple[str, ...] = (), e: int = 1, N=INF_ORDER) -> "Series":
        return Series(aux, e, 0, [], N)

    @staticmethod
    def const(c, aux: tuple[str, ...] = (), e: int = 1) -> "Series":
        r = _as_rat(c)
        return Series(aux, e, 0, [r], INF_ORDER)

    @staticmethod
    def t_power(k: int, aux: tuple[str, ...] = (), e: int = 1) -> "Series":
        return Series(aux, e, k * e, [Rat.const(1)], INF_ORDER)

    @staticmethod
    def of_rat(f: Rat, aux: tuple[str, ...], N: int, e: int = 1) -> "Series":
        """Expand a rational function of (t, aux...) as a t-series to order N.

        N is in t-units; the result has ramification e (exponents scaled).
        """
        allowed = set(aux) | {"t"}
        extra = f.variables() - allowed
        if extra:
            raise AlgebraError(f"of_rat: unexpected variables {sorted(extra)}")
        num_c = {k: Rat(c) for k, c in f.num.coeffs_in("t").items()}
        den_c = {k: Rat(c) for k, c in f.den.coeffs_in("t").items()}
        vd = min(den_c)
        vn = min(num_c) if num_c else 0
        # shift out valuations, then invert the unit part of the denominator
        n_t = N  # t-units of requested precision
        length = n_t + 1
        den_list = [den_c.get(vd + i, Rat.const(0)) for i in range(length)]
        num_list = [num_c.get(vn + i, Rat.const(0)) for i in range(length)]
        inv0 = Rat.const(1) / den_list[0]
        out: list[Rat] = []
        for i in range(length):
            acc = num_list[i] if i < len(num_list) else Rat.const(0)
            for j in range(1, i + 1):
                if not den_list[j].is_zero() and not out[i - j].is_zero():
                    acc = acc - den_list[j] * out[i - j]
            out.append(acc * inv0)
        low_t = vn - vd
        if e == 1:
            return Series(tuple(aux), 1, low_t, out, low_t + length)
        # spread over ramified exponents (intermediate orders are known zero)
        lst = [Rat.const(0)] * ((length - 1) * e + 1)
        for i, c in enumerate(out):
            lst[i * e] = c
        return Series(tuple(aux), e, low_t * e, lst, (low_t + length) * e)

    # -- basic info ---------------------------------------------------------

    def copy(self) -> "Series":
        return Series(self.aux, self.e, self.low, list(self.coeffs), self.N)

    def valuation(self) -> int:
        """Smallest s-exponent with nonzero stored coefficient, else N."""
        for i, c in enumerate(self.coeffs):
            if not c.is_zero():
                return self.low + i
        return self.N

    def coeff(self, k: int) -> Rat:
        """Coefficient of s^k (raises if k is beyond the truncation)."""
        if k >= self.N:
            raise PrecisionError(f"coefficient s^{k} beyond truncation {self.N}")
        if k < self.low or k - self.low >= len(self.coeffs):
            return Rat.const(0)
        return self.coeffs[k - self.low]

    def coeff_t(self, n: int) -> Rat:
        """Coefficient of t^n (requires ramified exponent n*e known)."""
        return self.coeff(n * self.e)

    def known_order_t(self):
        """Precision in t-units (may be fractional for ramified series)."""
        return QQ(self.N, self.e)

    def is_zero_to_t_order(self, n: int) -> bool:
        """All coefficients with s-exponent < n*e vanish.

        Raises PrecisionError when the series does not even reach that order,
        so precision is never over-claimed.
        """
        target = n * self.e
        if self.N < target:
            raise PrecisionError(
                f"series only known to s^{self.N}, asked about s^{target}"
            )
        for i, c in enumerate(self.coeffs):
            if self.low + i >= target:
                break
            if not c.is_zero():
                return False
        return True

    def first_nonzero(self) -> tuple[QQ, Rat] | None:
        """(t-order, coefficient) of the first nonzero stored term, or None."""
        for i, c in enumerate(self.coeffs):
            if not c.is_zero():
                return QQ(self.low + i, self.e), c
        return None

    # -- ramification / alignment -------------------------------------------

    def with_ram(self, e2: int) -> "Series":
        if e2 == self.e:
            return self
        if e2 % self.e:
            raise AlgebraError("ramification lift must be a multiple")
        m = e2 // self.e
        coeffs = [Rat.const(0)] * ((len(self.coeffs) - 1) * m + 1) if self.coeffs else []
        for i, c in enumerate(self.coeffs):
            coeffs[i * m] = c
        n2 = self.N * m if self.N < INF_ORDER else INF_ORDER
        return Series(self.aux, e2, self.low * m, coeffs, n2)

    def _align(self, other: "Series") -> tuple["Series", "Series"]:
        e = self.e * other.e // _gcd_int(self.e, other.e)
        return self.with_ram(e), other.with_ram(e)

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other) -> "Series":
        if isinstance(other, Series):
            return other
        r = _as_rat(other)
        if r is NotImplemented:
            return NotImplemented
        return Series(self.aux, self.e, 0, [r], INF_ORDER)

    def __add__(self, other) -> "Series":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._align(other)
        n = min(a.N, b.N)
        low = min(a.low if a.coeffs else n, b.low if b.coeffs else n)
        hi = min(
            n,
            max(
                a.low + len(a.coeffs) if a.coeffs else low,
                b.low + len(b.coeffs) if b.coeffs else low,
            ),
        )
        coeffs = []
        for k in range(low, hi):
            ca = a.coeffs[k - a.low] if a.coeffs and a.low <= k < a.low + len(a.coeffs) else Rat.const(0)
            cb = b.coeffs[k - b.low] if b.coeffs and b.low <= k < b.low + len(b.coeffs) else Rat.const(0)
            coeffs.append(ca + cb)
        aux = tuple(sorted(set(a.aux) | set(b.aux)))
        return Series(aux, a.e, low, coeffs, n)

    __radd__ = __add__

    def __neg__(self) -> "Series":
        return Series(self.aux, self.e, self.low, [-c for c in self.coeffs], self.N)

    def __sub__(self, other) -> "Series":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Series":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "Series":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._align(other)
        va, vb = a.valuation(), b.valuation()
        n = min(a.N + vb, b.N + va, INF_ORDER)
        if not a.coeffs or not b.coeffs:
            aux = tuple(sorted(set(a.aux) | set(b.aux)))
            return Series(aux, a.e, 0, [], n)
        low = a.low + b.low
        hi = min(n, a.low + len(a.coeffs) - 1 + b.low + len(b.coeffs) - 1 + 1)
        coeffs = [Rat.const(0)] * max(0, hi - low)
        for i, ca in enumerate(a.coeffs):
            if ca.is_zero():
                continue
            for j, cb in enumerate(b.coeffs):
                k = a.low + i + b.low + j
                if k >= hi:
                    break
                if not cb.is_zero():
                    coeffs[k - low] = coeffs[k - low] + ca * cb
        aux = tuple(sorted(set(a.aux) | set(b.aux)))
        return Series(aux, a.e, low, coeffs, n)

    __rmul__ = __mul__

    def inverse(self) -> "Series":
        v = self.valuation()
        if v >= self.N:
            raise AlgebraError("cannot invert a series that is zero to its order")
        nonzero = sum(1 for c in self.coeffs if not c.is_zero())
        if self.N >= INF_ORDER and nonzero > 1:
            raise PrecisionError(
                "inverting an untruncated multi-term series; truncate first"
            )
        if nonzero == 1:
            return Series(
                self.aux, self.e, -v, [Rat.const(1) / self.coeff(v)], self.N - 2 * v
                if self.N < INF_ORDER
                else INF_ORDER,
            )
        c0 = self.coeff(v)
        inv0 = Rat.const(1) / c0
        n_rel = self.N - v  # relative precision
        out = [Rat.const(0)] * n_rel
        out[0] = inv0
        for k in range(1, n_rel):
            acc = Rat.const(0)
            for j in range(1, k + 1):
                cj = self.coeff(v + j) if v + j < self.N else Rat.const(0)
                if not cj.is_zero() and not out[k - j].is_zero():
                    acc = acc + cj * out[k - j]
            out[k] = -inv0 * acc
        return Series(self.aux, self.e, -v, out, self.N - 2 * v)

    def __truediv__(self, other) -> "Series":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other) -> "Series":
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "Series":
        if n < 0:
            return self.inverse() ** (-n)
        result = Series.const(1, self.aux, self.e)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    # -- calculus -----------------------------------------------------------

    def d_dt(self) -> "Series":
        """Derivative with respect to t (exact on ramified series)."""
        e = self.e
        coeffs: list[Rat] = []
        low = self.low - e
        for i, c in enumerate(self.coeffs):
            k = self.low + i
            coeffs.append(c * Rat.const(QQ(k, e)))
        n2 = self.N - e if self.N < INF_ORDER else INF_ORDER
        return Series(self.aux, e, low, coeffs, n2)

    def dv(self, var: str, k: int = 1) -> "Series":
        """Coefficient-wise derivative in an auxiliary variable."""
        out = self
        for _ in range(k):
            out = Series(
                out.aux, out.e, out.low, [c.derivative(var) for c in out.coeffs], out.N
            )
        return out

    def at(self, var: str, value) -> "Series":
        """Coefficient-wise exact evaluation of an auxiliary variable."""
        val = _as_rat(value)
        coeffs = [c.subs({var: val}) for c in self.coeffs]
        aux = tuple(v for v in self.aux if v != var)
        return Series(aux, self.e, self.low, coeffs, self.N)

    def map_coeffs(self, fn) -> "Series":
        return Series(self.aux, self.e, self.low, [fn(c) for c in self.coeffs], self.N)

    def truncate_t(self, n: int) -> "Series":
        """Forget everything at or above t-order n."""
        target = n * self.e
        if target >= self.N:
            return self.copy()
        keep = [c for i, c in enumerate(self.coeffs) if self.low + i < target]
        return Series(self.aux, self.e, self.low, keep, target)

    def eval_mp(self, t_value, aux_values: Mapping[str, object] | None = None):
        """Numerical evaluation (truncated sum); caller controls the tail."""
        import mpmath as mp

        aux_values = aux_values or {}
        s = mp.power(t_value, mp.mpf(1) / self.e) if self.e > 1 else t_value
        total = mp.mpf(0)
        for i, c in enumerate(self.coeffs):
            k = self.low + i
            if c.is_zero():
                continue
            total = total + c.eval_mp(aux_values) * mp.power(s, k)
        return total

    def __repr__(self) -> str:
        parts = []
        for i, c in enumerate(self.coeffs[:8]):
            if c.is_zero():
                continue
            k = self.low + i
            if self.e == 1:
                parts.append(f"({c})*t^{k}")
            else:
                parts.append(f"({c})*t^({k}/{self.e})")
        ell = " + ..." if len(self.coeffs) > 8 else ""
        n = f"{self.N}/{self.e}" if self.e > 1 else str(self.N)
        body = " + ".join(parts) if parts else "0"
        return f"Series({body}{ell}; O(t^{n}))"


def series_sqrt(s: Series, lead_root: Rat) -> Series:
    """Square root of a series with even valuation.

    ``lead_root`` must square to the leading coefficient; it selects the
    branch.  The result r satisfies r*r == s to the stated precision.
    """
    v = s.valuation()
    if v >= s.N:
        raise AlgebraError("series_sqrt: zero-to-order series")
    if v % 2:
        raise AlgebraError("series_sqrt: odd valuation")
    c0 = s.coeff(v)
    lead_root = _as_rat(lead_root)
    if not (lead_root * lead_root == c0):
        raise AlgebraError("series_sqrt: lead_root^2 does not match leading coeff")
    half = v // 2
    n_rel = s.N - v
    out = [Rat.const(0)] * n_rel
    out[0] = lead_root
    inv2 = Rat.const(1) / (lead_root * 2)
    for k in range(1, n_rel):
        acc = s.coeff(v + k) if v + k < s.N else Rat.const(0)
        for i in range(1, k):
            if not out[i].is_zero() and not out[k - i].is_zero():
                acc = acc - out[i] * out[k - i]
        out[k] = acc * inv2
    return Series(s.aux, s.e, half, out, s.N - half)


def rat_compose_series(f: Rat, var: str, arg: Series, other: Mapping[str, Series] | None = None) -> Series:
    """Evaluate a rational function at series arguments.

    ``var`` -> ``arg``; entries of ``other`` bind additional variables to
    series; remaining variables (t and the aux variables of the series) stay
    symbolic inside the coefficients in the usual way: t must not appear both
    as series variable and symbolically, so f may only involve var, the other
    bound variables, and t.
    """
    bindings: dict[str, Series] = {var: arg}
    if other:
        bindings.update(other)
    allowed = set(bindings) | {"t"}
    extra = f.variables() - allowed
    if extra:
        raise AlgebraError(f"compose: unbound variables {sorted(extra)}")
    e = arg.e
    for s in bindings.values():
        e = e * s.e // _gcd_int(e, s.e)
    num = _poly_at_series(f.num, bindings, e, arg.aux)
    den = _poly_at_series(f.den, bindings, e, arg.aux)
    return num / den


def _poly_at_series(p: Poly, bindings: Mapping[str, Series], e: int, aux) -> Series:
    tpow = Series.t_power(1, aux, e)
    cache: dict[str, list[Series]] = {}

    def powers(name: str, upto: int) -> list[Series]:
        if name not in cache:
            cache[name] = [Series.const(1, aux, e)]
        lst = cache[name]
        base = bindings[name].with_ram(e) if name in bindings else tpow
        while len(lst) <= upto:
            lst.append(lst[-1] * base)
        return lst

    total = Series.zero(aux, e)
    for exp, c in p.terms.items():
        term = Series.const(c, aux, e)
        for i, k in enumerate(exp):
            if not k:
                continue
            name = VARS[i]
            if name in bindings:
                term = term * powers(name, k)[k]
            elif name == "t":
                term = term * Series.t_power(k, aux, e)
            else:
                term = term * Series.const(Rat.var(name), aux, e)
        total = total + term
    return total


# --------------------------------------------------------------------------
# linear algebra over rational-function fields
# --------------------------------------------------------------------------


def solve_linear_rat(
    rows: list[list[Rat]], rhs: list[Rat]
) -> list[Rat] | None:
    """Solve an (overdetermined) linear system with Rat entries exactly.

    Returns one solution (free unknowns set to zero) or None when the system
    is inconsistent.  Fraction-free (Bareiss-style) elimination on cleared
    rows keeps intermediate growth polynomial.
    """
    m = len(rows)
    if m == 0:
        return []
    n = len(rows[0])
    # clear denominators row by row -> Poly matrix
    mat: list[list[Poly]] = []
    for row, b in zip(rows, rhs):
        dens = [r.den for r in row] + [b.den]
        lcm = Poly.const(1)
        for d in dens:
            lcm = poly_lcm(lcm, d)
        prow = [ (r * Rat(lcm)).as_poly() for r in row ]
        prow.append((b * Rat(lcm)).as_poly())
        mat.append(prow)
    ncols = n + 1
    piv_rows: list[int] = []
    piv_cols: list[int] = []
    r0 = 0
    prev_piv = Poly.const(1)
    for col in range(n):
        # find pivot with smallest degree for stability of growth
        best = None
        for r in range(r0, m):
            p = mat[r][col]
            if not p.is_zero():
                d = p.degree()
                if best is None or d < best[0]:
                    best = (d, r)
        if best is None:
            continue
        _, rp = best
        mat[r0], mat[rp] = mat[rp], mat[r0]
        piv = mat[r0][col]
        for r in range(r0 + 1, m):
            if mat[r][col].is_zero():
                # still scale for fraction-free consistency
                mat[r] = [poly_exact_div(piv * mat[r][c], prev_piv) for c in range(ncols)]
                continue
            factor = mat[r][col]
            new_row = []
            for c in range(ncols):
                val = piv * mat[r][c] - factor * mat[r0][c]
                val = poly_exact_div(val, prev_piv)
                new_row.append(val)
            mat[r] = new_row
        piv_rows.append(r0)
        piv_cols.append(col)
        prev_piv = piv
        r0 += 1
        if r0 == m:
            break
    # consistency: rows below r0 must have zero rhs
    for r in range(r0, m):
        if any(not mat[r][c].is_zero() for c in range(n)):
            # shouldn't happen (all pivots used), but guard anyway
            continue
        if not mat[r][n].is_zero():
            return None
    # back substitution
    sol: list[Rat] = [Rat.const(0)] * n
    for i in range(len(piv_rows) - 1, -1, -1):
        r, c = piv_rows[i], piv_cols[i]
        acc = Rat(mat[r][n])
        for c2 in range(c + 1, n):
            if not mat[r][c2].is_zero() and not sol[c2].is_zero():
                acc = acc - Rat(mat[r][c2]) * sol[c2]
        sol[c] = acc / Rat(mat[r][c])
    # verify (cheap vs. the cost of being wrong)
    for row, b in zip(rows, rhs):
        acc = Rat.const(0)
        for c, v in enumerate(row):
            if not v.is_zero() and not sol[c].is_zero():
                acc = acc + v * sol[c]
        if not (acc == b):
            return None
    return sol


# --------------------------------------------------------------------------
# rational roots of low-degree polynomials over Q(t)
# --------------------------------------------------------------------------


def rational_roots(p: Poly, var: str) -> list[Rat]:
    """Roots of p (degree <= 2 in var) that lie in Q(t), including 0.

    Used to propose pole locations for decoupling searches.  Returns reduced
    Rats in t (constants included).  Quadratics are split only when their
    discriminant is a perfect square in Q(t).
    """
    roots: list[Rat] = []
    cs = p.coeffs_in(var)
    if not cs:
        return roots
    if 0 not in cs:
        roots.append(Rat.const(0))
    deg = max(cs)
    nz = {k: v for k, v in cs.items() if not v.is_zero()}
    lowk = min(nz)
    shifted = {k - lowk: v for k, v in nz.items()}
    d = max(shifted)
    if d == 1:
        roots.append(Rat(-shifted[0], shifted[1]))
    elif d == 2:
        a = shifted[2]
        b = shifted.get(1, Poly.zero())
        c = shifted.get(0, Poly.zero())
        disc = b * b - a * c * 4
        if disc.is_zero():
            roots.append(Rat(-b, a * 2))
        else:
            dvars = disc.variables()
            sq = None
            if not dvars:
                from math import isqrt

                val = disc.const_value()
                nn, dd = int(val.numerator), int(val.denominator)
                if nn >= 0:
                    rn, rd = isqrt(nn), isqrt(dd)
                    if rn * rn == nn and rd * rd == dd:
                        sq = Poly.const(QQ(rn, rd))
            else:
                sq = poly_sqrt(disc, next(iter(dvars)))
            if sq is not None:
                roots.append(Rat(-b + sq, a * 2))
                roots.append(Rat(-b - sq, a * 2))
    # dedupe
    out: list[Rat] = []
    for r in roots:
        if all(not (r == s) for s in out):
            out.append(r)
    return out


# --------------------------------------------------------------------------
# expression parsing
# --------------------------------------------------------------------------

_TOKEN_RE = None


def _tokenize_rat(text: str) -> list[tuple[str, str]]:
    global _TOKEN_RE
    if _TOKEN_RE is None:
        import re

        _TOKEN_RE = re.compile(
            r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z_]\w*|λ)|(?P<pow>\*\*|\^)"
            r"|(?P<op>[-+*/()]))"
        )
    tokens: list[tuple[str, str]] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise AlgebraError(f"cannot tokenize {text[pos:pos + 12]!r}")
        pos = m.end()
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
    return tokens


def parse_rat(text: str) -> Rat:
    """Parse '+,-,*,/,^' expressions over x, y, t, u, lam (λ) into a Rat.

    Integers only as literals; rationals arise from division.  '^'/'**' take
    a (possibly parenthesized, possibly negative) integer exponent.
    """
    tokens = _tokenize_rat(text)
    idx = 0

    def peek():
        return tokens[idx] if idx < len(tokens) else (None, None)

    def take(expect: str | None = None) -> tuple[str, str]:
        nonlocal idx
        kind, val = peek()
        if kind is None:
            raise AlgebraError(f"unexpected end of expression in {text!r}")
        if expect is not None and val != expect:
            raise AlgebraError(f"expected {expect!r}, found {val!r} in {text!r}")
        idx += 1
        return kind, val

    def parse_int() -> int:
        sign = 1
        kind, val = peek()
        while val in ("+", "-"):
            take()
            if val == "-":
                sign = -sign
            kind, val = peek()
        if val == "(":
            take()
            n = parse_int()
            take(")")
            return sign * n
        kind, val = take()
        if kind != "int":
            raise AlgebraError(f"expected integer exponent in {text!r}")
        return sign * int(val)

    def parse_atom() -> Rat:
        kind, val = peek()
        if val == "(":
            take()
            e = parse_expr()
            take(")")
            return e
        kind, val = take()
        if kind == "int":
            return Rat.const(int(val))
        if kind == "name":
            name = "lam" if val in ("λ", "lambda") else val
            if name not in VARS:
                raise AlgebraError(f"unknown variable {val!r} in {text!r}")
            return Rat.var(name)
        raise AlgebraError(f"unexpected {val!r} in {text!r}")

    def parse_power() -> Rat:
        base = parse_atom()
        kind, val = peek()
        if kind == "pow":
            take()
            n = parse_int()
            if n >= 0:
                return base**n
            return Rat.const(1) / base ** (-n)
        return base

    def parse_unary() -> Rat:
        sign = 1
        kind, val = peek()
        while val in ("+", "-"):
            take()
            if val == "-":
                sign = -sign
            kind, val = peek()
        f = parse_power()
        return f if sign > 0 else -f

    def parse_term() -> Rat:
        f = parse_unary()
        while True:
            kind, val = peek()
            if val == "*":
                take()
                f = f * parse_unary()
            elif val == "/":
                take()
                f = f / parse_unary()
            else:
                return f

    def parse_expr() -> Rat:
        f = parse_term()
        while True:
            kind, val = peek()
            if val in ("+", "-"):
                take()
                g = parse_term()
                f = f + g if val == "+" else f - g
            else:
                return f

    out = parse_expr()
    if idx != len(tokens):
        raise AlgebraError(f"trailing input {tokens[idx:]} in {text!r}")
    return out
