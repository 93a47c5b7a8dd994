"""Order-by-order verification of the identity suite for quadrant walk models.

The statements being verified live in ``data/identities.json`` as a registry.
Each entry names a catalog model, a kind, a target t-order, and an expression
that must vanish.  Expressions are written in a small arithmetic language
over named hooks:

* ``Q`` -- the quadrant counting series from the origin read on the y-axis
  (coefficients of t^n are polynomials in y recording walks ending at x=0);
  ``Qx`` is the x-axis counterpart.
* ``S`` -- ``Q`` multiplied by the x^0 row of the kernel, the boundary term
  of the kernel functional equation; ``R`` is the x-axis counterpart.
* ``I``/``J`` and ``F``/``G`` -- tabulated invariants and decoupling pairs.
* ``K`` -- the kernel polynomial itself.
* ``X``/``Y0``/``Y1`` -- a substitution point and the pair of kernel roots
  above it (see :func:`kernel_roots_series`).
* parameters declared by the entry (algebraic series produced by fixed-point
  iteration, Newton iteration, or square-root extraction), then local
  definitions, evaluated in order.

Builtins: ``at(f, v, c)`` evaluates the auxiliary variable ``v``;
``dy(f, v, k)`` differentiates coefficient-wise; ``comp(f, v, g[, tail])``
substitutes a series for an auxiliary variable -- when ``g`` has negative
valuation or ``f`` has non-polynomial coefficients the caller must supply an
explicit tail bound for the omitted slices; ``sqrt(f, lead)`` extracts a
series square root with the chosen leading coefficient root.

Order bookkeeping is pessimistic end to end: when a residual is not known to
the requested order the check raises :class:`PrecisionError` rather than
passing silently.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field
from importlib import resources

from ._rat import QQ
from .algebra import (
    INF_ORDER,
    AlgebraError,
    Poly,
    PrecisionError,
    Rat,
    Series,
    parse_rat,
    poly_sqrt,
    rat_compose_series,
    series_sqrt,
)
from .counting import series_q0y, series_qx0
from .kernel import Kernel
from .steps import StepSet, model


class CheckError(ValueError):
    """A verification request that cannot be carried out as posed."""


# ---------------------------------------------------------------------------
# registry data
# ---------------------------------------------------------------------------


def _load_data() -> dict:
    text = resources.files("quadwalks.data").joinpath("identities.json").read_text()
    return json.loads(text)


_DATA: dict | None = None


def _data() -> dict:
    global _DATA
    if _DATA is None:
        _DATA = _load_data()
    return _DATA


def registry() -> dict[str, dict]:
    """All registered check entries, keyed by identifier."""
    return {entry["id"]: entry for entry in _data()["identities"]}


def registry_ids(kind: str | None = None, model_name: str | None = None) -> list[str]:
    out = []
    for entry in _data()["identities"]:
        if kind is not None and entry["kind"] != kind:
            continue
        if model_name is not None and entry["model"] != model_name:
            continue
        out.append(entry["id"])
    return out


def known_invariants(name: str) -> tuple[Rat, Rat]:
    """The tabulated invariant pair (x-side, y-side) for a model."""
    try:
        row = _data()["invariants"][name]
    except KeyError:
        raise CheckError(f"no invariant pair on record for {name!r}") from None
    return parse_rat(row["I"]), parse_rat(row["J"])


def known_decoupling(name: str) -> tuple[Rat, Rat]:
    """The tabulated decoupling pair (F, G) for xy on a model."""
    try:
        row = _data()["decoupling"][name]
    except KeyError:
        raise CheckError(f"no decoupling pair on record for {name!r}") from None
    return parse_rat(row["F"]), parse_rat(row["G"])


@dataclass(frozen=True)
class SubstitutionInfo:
    """Shape of the small-t substitution that splits the kernel roots."""

    kind: str  # "additive" | "product"
    beta: QQ | None
    gamma: QQ


def substitution_info(name: str) -> SubstitutionInfo | None:
    row = _data()["substitutions"].get(name)
    if row is None:
        return None
    beta = QQ(row["beta"]) if row.get("beta") is not None else None
    return SubstitutionInfo(kind=row["kind"], beta=beta, gamma=QQ(row["gamma"]))


def ode_orders() -> dict[str, int]:
    """Orders of the known y-direction differential equations per model."""
    return dict(_data()["ode_orders"])


def start_point_rules() -> dict[str, dict]:
    """Which start points admit a decoupling, per model.

    A start point (a, b) is on record iff (``diagonal`` and a == b) or
    (``staircase`` and a == 2b+1) or [a, b] is listed in ``points``.
    """
    return {k: dict(v) for k, v in _data()["start_points"]["rules"].items()}


def start_point_admits(name: str, a: int, b: int) -> bool:
    rule = _data()["start_points"]["rules"].get(name)
    if rule is None:
        return False
    if rule.get("diagonal") and a == b:
        return True
    if rule.get("staircase") and a == 2 * b + 1:
        return True
    return [a, b] in rule.get("points", [])


def start_point_function(name: str, a: int, b: int) -> dict[str, Rat]:
    """Known one-sided decoupling certificates for H = x^(a+1) y^(b+1).

    Returns a dict with key "F" and/or "G" holding the recorded side(s);
    empty when nothing explicit is on record for this start point.
    """
    out: dict[str, Rat] = {}
    x = Rat.var("x")
    y = Rat.var("y")
    fams = _data()["start_points"]["families"]
    if name in fams.get("diagonal_F", []) and a == b:
        out["F"] = -(x ** 0) / x ** (a + 1)
    if name in fams.get("diagonal_G", []) and a == b:
        out["G"] = -(y ** 0) / y ** (a + 1)
    if name in fams.get("staircase_G", []) and a == 2 * b + 1:
        out["G"] = -(y ** 0) / y ** (b + 1)
    for row in _data()["start_points"]["explicit"]:
        if row["model"] == name and row["start"] == [a, b]:
            for side in ("F", "G"):
                if row.get(side):
                    out[side] = parse_rat(row[side])
    return out


# ---------------------------------------------------------------------------
# kernel roots as truncated Puiseux series
# ---------------------------------------------------------------------------


def _resolve_steps(m) -> StepSet:
    if isinstance(m, StepSet):
        return m
    return model(m)


def _rat_sqrt(c: Rat) -> Rat | None:
    """An exact square root of a rational function, or None."""
    num = c.num
    den = c.den
    for var in sorted(num.variables() | den.variables()) or ["u"]:
        rn = poly_sqrt(num, var)
        rd = poly_sqrt(den, var)
        if rn is not None and rd is not None:
            root = Rat(rn, rd)
            if root * root == c:
                return root
    if num.is_const() and den.is_const():
        val = c.const_value()
        if val == 0:
            return Rat.const(0)
        p, q = val.numerator, val.denominator
        rp, rq = _int_sqrt(p), _int_sqrt(q)
        if rp is not None and rq is not None:
            return Rat.const(QQ(rp, rq))
    return None


def _int_sqrt(n: int) -> int | None:
    if n < 0:
        return None
    r = int(n ** 0.5)
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand * cand == n:
            return cand
    return None


@dataclass(eq=False)
class KernelRootPair:
    """The two y-roots of the kernel over a substitution point.

    Without substitution the roots live over Q(x): ``y0`` is the branch with
    positive valuation in t, ``y1`` the Laurent branch.  With a substitution
    x is replaced by a series designed so that the discriminant becomes a
    perfect square over Q(u); the branches are then labelled so that the
    leading coefficient of ``y0`` has positive degree in u, and ``y1`` is its
    image under u -> 1/u.
    """

    steps: StepSet
    substitution: str
    beta: QQ | None
    gamma: QQ | None
    x: Series
    y0: Series
    y1: Series
    rows: tuple[Series, Series, Series] = field(repr=False)

    def kernel_residual(self, which: int) -> Series:
        a, b, c = self.rows
        y = (self.y0, self.y1)[which]
        return a * y * y + b * y + c

    def kernel_vanishes(self) -> bool:
        return (
            self.kernel_residual(0).first_nonzero() is None
            and self.kernel_residual(1).first_nonzero() is None
        )

    def vieta_ok(self) -> bool:
        a, b, c = self.rows
        s = a * (self.y0 + self.y1) + b
        p = a * self.y0 * self.y1 - c
        return s.first_nonzero() is None and p.first_nonzero() is None

    def swap_ok(self) -> bool:
        """y1 is the image of y0 under u -> 1/u (substituted pairs only)."""
        if self.substitution == "none":
            raise CheckError("the u -> 1/u symmetry needs a substituted pair")
        uinv = Rat.const(1) / Rat.var("u")
        mirrored = self.y0.map_coeffs(lambda c: c.subs({"u": uinv}))
        return (self.y1 - mirrored).first_nonzero() is None

    def leading(self) -> tuple[QQ, Rat]:
        fz = self.y0.first_nonzero()
        if fz is None:
            raise CheckError("small root vanished to truncation order")
        return fz


def kernel_roots_series(m, substitution: str = "none", n_max: int = 16) -> KernelRootPair:
    """Expand the two y-roots of the kernel as truncated series in t.

    ``substitution`` chooses where the roots are read:

    * ``"none"``: over the field Q(x); the roots split off valuations +1/-1.
    * ``"additive"``: x = t + (u + 1/u) t^beta with the model's recorded
      exponent beta (requires ``m`` to be a model name with an entry in the
      substitution table, or pass a StepSet plus an explicit beta via the
      table — names only here).
    * ``"product"``: x = (1 + u)(1 + 1/u) t.
    * ``"auto"``: the model's recorded substitution kind.

    Raises CheckError when the requested substitution does not split the
    discriminant into a perfect square over the coefficient field — there are
    models for which no such substitution exists.
    """
    steps = _resolve_steps(m)
    ker = Kernel(steps)
    weighted = "lam" in ker.K.variables()

    info = substitution_info(m) if isinstance(m, str) else None
    if substitution == "auto":
        if info is None:
            raise CheckError(
                f"no small-t substitution on record for {m!r}; pass an explicit kind"
            )
        substitution = info.kind
    beta = info.beta if info is not None else None
    gamma = info.gamma if info is not None else None

    if substitution == "none":
        aux = ("lam", "x") if weighted else ("x",)
        e = 1
        X = Series.of_rat(Rat.var("x"), aux, n_max, e)
    elif substitution == "additive":
        if beta is None:
            raise CheckError(
                f"additive substitution needs a recorded exponent for {m!r}"
            )
        e = int(beta.denominator)
        aux = ("lam", "u") if weighted else ("u",)
        idx0, idxb = e, int(beta * e)
        coeffs = [Rat.const(0)] * (idxb - idx0 + 1)
        coeffs[0] = Rat.const(1)
        u = Rat.var("u")
        coeffs[-1] = coeffs[-1] + u + Rat.const(1) / u
        X = Series(aux, e, idx0, coeffs, n_max * e)
    elif substitution == "product":
        e = 1
        aux = ("lam", "u") if weighted else ("u",)
        u = Rat.var("u")
        X = Series(aux, e, 1, [Rat.const(2) + u + Rat.const(1) / u], n_max)
    else:
        raise CheckError(f"unknown substitution kind {substitution!r}")

    extras = {
        v: Series.const(Rat.var(v), aux, e)
        for v in ("lam",)
        if weighted and substitution != "none"
    }
    if weighted and substitution == "none":
        extras = {"lam": Series.const(Rat.var("lam"), aux, e)}
    rows = tuple(
        rat_compose_series(Rat(p), "x", X, other=extras) for p in (ker.a, ker.b, ker.c)
    )
    A, B, C = rows
    disc = B * B - Rat.const(4) * A * C
    fz = disc.first_nonzero()
    if fz is None:
        raise CheckError("kernel discriminant vanishes to the truncation order")
    v, c0 = fz
    if int(v * e) % 2:
        raise CheckError(
            "discriminant has odd valuation; the kernel roots are not Puiseux "
            "series over this coefficient field"
        )
    lead = _rat_sqrt(c0)
    if lead is None:
        raise CheckError(
            "discriminant is not a perfect square at leading order; no root "
            "pair exists over this coefficient field"
        )
    s = series_sqrt(disc, lead)
    two_a = Rat.const(2) * A
    yp = (-B + s) / two_a
    ym = (-B - s) / two_a

    if substitution == "none":
        fp, fm = yp.first_nonzero(), ym.first_nonzero()
        if fp is None or fm is None:
            raise CheckError("a kernel root vanished to truncation order")
        y0, y1 = (yp, ym) if fp[0] > fm[0] else (ym, yp)
    else:
        du_p, du_m = _u_degree(yp), _u_degree(ym)
        if du_p == du_m:
            raise CheckError("cannot tell the kernel roots apart by u-degree")
        y0, y1 = (yp, ym) if du_p > du_m else (ym, yp)

    return KernelRootPair(
        steps=steps,
        substitution=substitution,
        beta=beta,
        gamma=gamma,
        x=X,
        y0=y0,
        y1=y1,
        rows=rows,
    )


def _u_degree(y: Series) -> int:
    fz = y.first_nonzero()
    if fz is None:
        raise CheckError("a kernel root vanished to truncation order")
    c = fz[1]
    dn = max(c.num.coeffs_in("u"), default=0)
    dd = max(c.den.coeffs_in("u"), default=0)
    return dn - dd


# ---------------------------------------------------------------------------
# the expression language
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(\*\*|[()+\-*/^,]|\d+|[A-Za-z_][A-Za-z_0-9]*)")


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise CheckError(f"cannot tokenize {text[pos : pos + 12]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expect: str | None = None) -> str:
        tok = self.peek()
        if tok is None or (expect is not None and tok != expect):
            raise CheckError(f"expected {expect or 'a token'}, got {tok!r}")
        self.i += 1
        return tok

    def parse(self):
        node = self.sum_()
        if self.peek() is not None:
            raise CheckError(f"trailing input at {self.peek()!r}")
        return node

    def sum_(self):
        node = self.product()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.product()
            node = (op, node, rhs)
        return node

    def product(self):
        node = self.factor()
        while self.peek() in ("*", "/"):
            op = self.take()
            rhs = self.factor()
            node = (op, node, rhs)
        return node

    def factor(self):
        if self.peek() == "-":
            self.take()
            return ("neg", self.factor())
        if self.peek() == "+":
            self.take()
            return self.factor()
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek() in ("^", "**"):
            self.take()
            return ("pow", node, self.factor())
        return node

    def atom(self):
        tok = self.take()
        if tok == "(":
            node = self.sum_()
            self.take(")")
            return node
        if tok.isdigit():
            return ("num", int(tok))
        if not tok[0].isalpha() and tok[0] != "_":
            raise CheckError(f"unexpected token {tok!r}")
        if self.peek() == "(":
            self.take("(")
            args = []
            if self.peek() != ")":
                args.append(self.sum_())
                while self.peek() == ",":
                    self.take(",")
                    args.append(self.sum_())
            self.take(")")
            return ("call", tok, args)
        return ("name", tok)


_BASE_NAMES = {v: Rat.var(v) for v in ("x", "y", "t", "u", "lam")}


class _Eval:
    """Evaluate parsed expressions over an environment of Rat/Series values.

    Promotion of rational functions of t to series happens here (the Series
    arithmetic itself treats foreign scalars as single coefficients, which
    would silently misread t-dependent values).
    """

    def __init__(self, env: dict, aux: tuple[str, ...], n_order: int | None, e: int = 1):
        self.env = env
        self.aux = aux
        self.n_order = n_order
        self.e = e

    def run(self, text: str):
        return self.node(_Parser(text).parse())

    # -- helpers --------------------------------------------------------------

    def promote(self, v) -> Series:
        if isinstance(v, Series):
            return v
        if not v.depends_on("t"):
            return Series.const(v, self.aux, self.e)
        if self.n_order is None:
            raise CheckError("no ambient truncation order for a t-dependent value")
        return Series.of_rat(v, self.aux, self.n_order, self.e)

    def binop(self, op, a, b):
        if isinstance(a, Series) or isinstance(b, Series):
            a, b = self.promote(a), self.promote(b)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        return a / b

    def const_int(self, node) -> int:
        v = self.node(node)
        if isinstance(v, Series):
            raise CheckError("expected an integer constant")
        c = v.const_value()
        if c.denominator != 1:
            raise CheckError("expected an integer constant")
        return int(c)

    def varname(self, node) -> str:
        if node[0] != "name":
            raise CheckError("expected a variable name")
        return node[1]

    # -- evaluation -----------------------------------------------------------

    def node(self, n):
        tag = n[0]
        if tag == "num":
            return Rat.const(n[1])
        if tag == "name":
            if n[1] in self.env:
                return self.env[n[1]]
            if n[1] in _BASE_NAMES:
                return _BASE_NAMES[n[1]]
            raise CheckError(f"unknown name {n[1]!r}")
        if tag == "neg":
            v = self.node(n[1])
            return -v
        if tag in ("+", "-", "*", "/"):
            return self.binop(tag, self.node(n[1]), self.node(n[2]))
        if tag == "pow":
            base = self.node(n[1])
            k = self.const_int(n[2])
            if isinstance(base, Series):
                return base ** k
            return base ** k
        if tag == "call":
            return self.call(n[1], n[2])
        raise CheckError(f"cannot evaluate node {tag!r}")

    def call(self, name: str, args: list):
        if name == "at":
            if len(args) != 3:
                raise CheckError("at(f, var, value) takes three arguments")
            f = self.node(args[0])
            var = self.varname(args[1])
            val = self.node(args[2])
            if isinstance(val, Series):
                raise CheckError("at() needs a constant evaluation point")
            if isinstance(f, Series):
                return f.at(var, val)
            return f.subs({var: val})
        if name == "dy":
            if len(args) != 3:
                raise CheckError("dy(f, var, k) takes three arguments")
            f = self.node(args[0])
            var = self.varname(args[1])
            k = self.const_int(args[2])
            if isinstance(f, Series):
                return f.dv(var, k)
            for _ in range(k):
                f = f.derivative(var)
            return f
        if name == "comp":
            if len(args) not in (3, 4):
                raise CheckError("comp(f, var, g[, tail]) takes three or four arguments")
            f = self.node(args[0])
            var = self.varname(args[1])
            g = self.node(args[2])
            if not isinstance(g, Series):
                g = self.promote(g)
            tail = self.const_int(args[3]) if len(args) == 4 else None
            return _compose(f, var, g, tail)
        if name == "sqrt":
            if len(args) != 2:
                raise CheckError("sqrt(f, lead) takes two arguments")
            f = self.promote(self.node(args[0]))
            lead = self.node(args[1])
            if isinstance(lead, Series):
                raise CheckError("sqrt() needs a constant leading root")
            return series_sqrt(f, lead)
        raise CheckError(f"unknown function {name!r}")


def _bind_extras(f: Rat, var: str, g: Series) -> dict[str, Series]:
    names = f.variables() - {var, "t"}
    return {v: Series.const(Rat.var(v), g.aux, g.e) for v in names}


def _compose(f, var: str, g: Series, tail: int | None) -> Series:
    """Substitute the series g for the auxiliary variable var of f."""
    if isinstance(f, Rat):
        return rat_compose_series(f, var, g, other=_bind_extras(f, var, g))
    if f.e != 1:
        raise CheckError("composition hooks must be unramified in t")
    fz = g.first_nonzero()
    gval = fz[0] if fz is not None else None
    poly_coeffs = all(not c.den.variables() & {var} for c in f.coeffs)
    if tail is None:
        if gval is None or gval < 0 or not poly_coeffs:
            raise CheckError(
                "composition with a Laurent or pole-bearing argument needs an "
                "explicit tail bound"
            )
        cap = f.N if f.N < INF_ORDER else None
    else:
        cap = tail
    pows = [Series.const(1, g.aux, g.e)]

    def gpow(k: int) -> Series:
        while len(pows) <= k:
            pows.append(pows[-1] * g)
        return pows[k]

    out = Series.zero(g.aux, g.e)
    for i, c in enumerate(f.coeffs):
        if c.is_zero():
            continue
        n = f.low + i
        if not c.depends_on(var):
            term = Series.const(c, g.aux, g.e)
        elif c.den.variables() & {var}:
            term = rat_compose_series(c, var, g, other=_bind_extras(c, var, g))
        else:
            den = c.den.const_value() if c.den.is_const() else None
            if den is None:
                term = rat_compose_series(c, var, g, other=_bind_extras(c, var, g))
            else:
                term = Series.zero(g.aux, g.e)
                inv = Rat.const(QQ(1) / den)
                for k, q in c.num.coeffs_in(var).items():
                    term = term + Series.const(Rat(q) * inv, g.aux, g.e) * gpow(k)
        out = out + term * Series.t_power(n, g.aux, g.e)
    if cap is not None:
        out = out + Series.zero(g.aux, g.e, N=cap * g.e)
    return out


# ---------------------------------------------------------------------------
# parameter series (algebraic elements of Q[[t]])
# ---------------------------------------------------------------------------


def _solve_fixpoint(p: dict, aux: tuple[str, ...], n_order: int) -> Series:
    var = p.get("var", p["name"])
    start = parse_rat(p.get("start", "0"))
    cur = Series.of_rat(start, aux, n_order, 1)
    ev = _Eval({}, aux, n_order)
    prev_agree = None
    for _ in range(2 * n_order + 4):
        ev.env = {var: cur}
        nxt = ev.promote(ev.run(p["rhs"])).truncate_t(n_order)
        delta = (nxt - cur).first_nonzero()
        if delta is None:
            return nxt
        agree = delta[0]
        if prev_agree is not None and agree <= prev_agree:
            raise CheckError(f"fixed-point iteration for {p['name']} stalls")
        prev_agree = agree
        cur = nxt
    raise CheckError(f"fixed-point iteration for {p['name']} did not converge")


def _solve_newton(p: dict, aux: tuple[str, ...], n_order: int) -> Series:
    var = p.get("var", p["name"])
    ev = _Eval({var: Rat.var("u")}, aux, None)
    poly = ev.run(p["poly"])
    if isinstance(poly, Series):
        raise CheckError("Newton polynomials must be rational in the unknown and t")
    dpoly = poly.derivative("u")
    cur = Series.of_rat(parse_rat(p["initial"]), aux, n_order, 1)
    prev_val = None
    for _ in range(40):
        resid = rat_compose_series(poly, "u", cur, other=_bind_extras(poly, "u", cur))
        fz = resid.first_nonzero()
        if fz is None:
            return cur
        val = fz[0]
        if prev_val is not None and val <= prev_val:
            raise CheckError(f"Newton iteration for {p['name']} stalls")
        prev_val = val
        slope = rat_compose_series(dpoly, "u", cur, other=_bind_extras(dpoly, "u", cur))
        cur = (cur - resid / slope).truncate_t(n_order)
    raise CheckError(f"Newton iteration for {p['name']} did not converge")


def _solve_params(entry: dict, env: dict, aux: tuple[str, ...], n_order: int) -> None:
    for p in entry.get("params", ()):
        kind = p["kind"]
        if kind == "fixpoint":
            env[p["name"]] = _solve_fixpoint(p, aux, n_order)
        elif kind == "root":
            env[p["name"]] = _solve_newton(p, aux, n_order)
        elif kind == "sqrt":
            base = env[p["of"]]
            env[p["name"]] = series_sqrt(base, parse_rat(p["lead"]))
        else:
            raise CheckError(f"unknown parameter kind {kind!r}")


# ---------------------------------------------------------------------------
# running registry entries
# ---------------------------------------------------------------------------


@dataclass
class CheckReport:
    """Outcome of one registry check."""

    identity: str
    model: str
    kind: str
    order: int | None
    passed: bool
    residual_valuation: QQ | None
    elapsed: float
    detail: str = ""

    def as_dict(self) -> dict:
        rv = self.residual_valuation
        return {
            "identity": self.identity,
            "model": self.model,
            "kind": self.kind,
            "order": self.order,
            "passed": self.passed,
            "residual_valuation": None if rv is None else str(rv),
            "elapsed": round(self.elapsed, 4),
            "detail": self.detail,
        }

    def __str__(self) -> str:
        status = "ok" if self.passed else "FAIL"
        rv = "-" if self.residual_valuation is None else str(self.residual_valuation)
        o = "-" if self.order is None else str(self.order)
        extra = f" {self.detail}" if self.detail else ""
        return (
            f"{self.identity}: {status} (order {o}, residual {rv}, "
            f"{self.elapsed:.2f}s){extra}"
        )


@dataclass
class CatalyticEquation:
    """A registered single-variable equation for the y-axis section."""

    model: str
    identity: str
    unknowns: tuple[str, ...]
    order: int

    def check(self, order: int | None = None) -> CheckReport:
        return check_identity(self.identity, order=order)


def catalytic_equation(model_name: str) -> CatalyticEquation:
    ids = registry_ids(kind="catalytic", model_name=model_name)
    if not ids:
        raise CheckError(f"no catalytic equation on record for {model_name!r}")
    entry = registry()[ids[0]]
    return CatalyticEquation(
        model=model_name,
        identity=entry["id"],
        unknowns=tuple(entry.get("unknowns", ())),
        order=entry["order"],
    )


def _build_env(entry: dict, order: int) -> tuple[dict, tuple[str, ...], int, int]:
    name = entry["model"]
    steps = model(name)
    ker = Kernel(steps)
    weighted = "lam" in ker.K.variables()
    slack = entry.get("slack", 6)
    n_order = (order + slack) if order is not None else 0
    hooks = entry.get("hooks", {})
    nq = max(n_order, hooks.get("Q", 0))

    env: dict = {"K": Rat(ker.K)}
    data = _data()
    if name in data["invariants"]:
        row = data["invariants"][name]
        env["I"] = parse_rat(row["I"])
        env["J"] = parse_rat(row["J"])
    if name in data["decoupling"]:
        row = data["decoupling"][name]
        env["F"] = parse_rat(row["F"])
        env["G"] = parse_rat(row["G"])

    sub = entry.get("substitution")
    ambient = entry.get("ambient", "y")
    if entry["kind"] == "exact":
        return env, (), None, 1  # type: ignore[return-value]

    if sub is not None:
        pair = kernel_roots_series(name, sub, n_max=entry.get("subs_order", order + 6))
        env["X"], env["Y0"], env["Y1"] = pair.x, pair.y0, pair.y1
        aux, e = pair.x.aux, pair.x.e
        n_order = entry.get("subs_order", order + 6)
    elif ambient == "x":
        aux = ("lam", "x") if weighted else ("x",)
        e = 1
    else:
        aux = ("lam", "y") if weighted else ("y",)
        e = 1

    q = series_q0y(steps, (0, 0), nq - 1)
    env["Q"] = q
    env["S"] = Series.of_rat(Rat(ker.tc), q.aux, nq, 1) * q
    if ambient == "x" or sub is not None:
        qx = series_qx0(steps, (0, 0), nq - 1)
        env["Qx"] = qx
        env["R"] = Series.of_rat(Rat(ker.c), qx.aux, nq, 1) * qx
    return env, aux, n_order, e


def _run_expr_entry(entry: dict, order: int) -> tuple[bool, QQ | None, str]:
    env, aux, n_order, e = _build_env(entry, order)
    if entry["kind"] == "exact":
        ev = _Eval(env, (), None)
        for dname, dexpr in entry.get("defs", {}).items():
            env[dname] = ev.run(dexpr)
        res = ev.run(entry["expr"])
        if isinstance(res, Series):
            raise CheckError(f"{entry['id']}: exact checks must stay rational")
        return res.is_zero(), None, "exact"

    ev = _Eval(env, aux, n_order, e)
    _solve_params(entry, env, aux if e == 1 else (), n_order)
    for dname, dexpr in entry.get("defs", {}).items():
        env[dname] = ev.run(dexpr)
    res = ev.run(entry["expr"])
    if not isinstance(res, Series):
        return res.is_zero(), None, "exact"
    known = res.known_order_t()
    if known < order:
        raise PrecisionError(
            f"{entry['id']}: residual known only to t^{known}, "
            f"order {order} requested; raise the entry's slack or hooks"
        )
    fz = res.first_nonzero()
    rv = fz[0] if fz is not None else None
    passed = rv is None or rv >= order
    return passed, rv, ""


def _run_roots_entry(entry: dict, order: int) -> tuple[bool, QQ | None, str]:
    name = entry["model"]
    pair = kernel_roots_series(
        name, entry.get("substitution", "auto"), n_max=entry.get("subs_order", order)
    )
    failures = []
    if not pair.kernel_vanishes():
        failures.append("kernel")
    if not pair.vieta_ok():
        failures.append("vieta")
    if pair.substitution != "none" and not pair.swap_ok():
        failures.append("swap")
    v, lead = pair.leading()
    if pair.gamma is not None:
        if v != pair.gamma:
            failures.append(f"valuation {v} != {pair.gamma}")
        if lead != Rat.var("u"):
            failures.append("leading coefficient != u")
    for key, text in entry.get("expected_y0", {}).items():
        k = QQ(key) * pair.y0.e
        if k.denominator != 1:
            failures.append(f"expected order {key} not representable")
            continue
        got = pair.y0.coeff(int(k))
        if got != parse_rat(text):
            failures.append(f"coefficient at t^{key} differs")
    return not failures, None, "; ".join(failures)


def check_identity(ident, order: int | None = None) -> CheckReport:
    """Run one registry entry and report the residual against the order."""
    entry = registry().get(ident) if isinstance(ident, str) else dict(ident)
    if entry is None:
        raise CheckError(f"no registered identity {ident!r}")
    o = order if order is not None else entry.get("order")
    t0 = time.perf_counter()
    if entry["kind"] == "roots":
        passed, rv, detail = _run_roots_entry(entry, o)
    else:
        passed, rv, detail = _run_expr_entry(entry, o)
    return CheckReport(
        identity=entry["id"],
        model=entry["model"],
        kind=entry["kind"],
        order=o,
        passed=passed,
        residual_valuation=rv,
        elapsed=time.perf_counter() - t0,
        detail=detail,
    )


def check_catalytic_equation(model_name: str, order: int | None = None) -> CheckReport:
    """Verify the registered catalytic equation of a model against counting."""
    return catalytic_equation(model_name).check(order=order)


def check_algebraic_solution(model_name: str, order: int | None = None) -> list[CheckReport]:
    """Verify the registered algebraic parametrizations of a model's series."""
    ids = registry_ids(kind="solution", model_name=model_name)
    if not ids:
        raise CheckError(f"no algebraic solution on record for {model_name!r}")
    return [check_identity(i, order=order) for i in ids]


def check_ode_y(model_name: str = "#4", order: int | None = None) -> list[CheckReport]:
    """Verify the registered y-direction differential identities of a model."""
    ids = registry_ids(kind="ode", model_name=model_name)
    if not ids:
        raise CheckError(f"no differential identity on record for {model_name!r}")
    return [check_identity(i, order=order) for i in ids]


def run_registry(
    ids=None, kinds=None, models=None, order: int | None = None
) -> list[CheckReport]:
    """Run registry entries (all by default), returning one report each."""
    reports = []
    for entry in _data()["identities"]:
        if ids is not None and entry["id"] not in ids:
            continue
        if kinds is not None and entry["kind"] not in kinds:
            continue
        if models is not None and entry["model"] not in models:
            continue
        reports.append(check_identity(entry["id"], order=order))
    return reports
