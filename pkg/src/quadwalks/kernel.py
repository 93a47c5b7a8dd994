"""Kernel polynomials, the associated birational group, and orbit sums.

For a model with step polynomial S(x,y) = sum of w_{ij} x^i y^j, the kernel is

    K(x, y) = xy (t S(x, y) - 1)
            = a(x) y^2 + b(x) y + c(x)
            = ta(y) x^2 + tb(y) x + tc(y).

The group is generated by the two t-free birational involutions

    Phi(u, v) = (tc(v) / (ta(v) u), v),     Psi(u, v) = (u, c(u) / (a(u) v)),

and Theta = Psi o Phi.  Finite orbits of (x, y) have size 2n and consist of
{Theta^i} and {Phi o Theta^i}; every element fixes K(x,y)=0 as a curve.

Orbit iteration keeps coordinates in factored form (exponent maps over a
store of primitive polynomial atoms) so that the only expensive operation is
expanding a generator numerator, never a large rational-function gcd.
"""

from __future__ import annotations

from ._rat import QQ, Q1
from .algebra import AlgebraError, Poly, Rat, poly_divides, poly_gcd
from .counting import series_q_poly
from .steps import StepSet


class KernelError(ValueError):
    pass


class Kernel:
    """Kernel data for one model: K and its row/column coefficients."""

    __slots__ = ("steps", "K", "a", "b", "c", "ta", "tb", "tc")

    def __init__(self, steps: StepSet):
        self.steps = steps
        t = Poly.var("t")
        x = Poly.var("x")
        y = Poly.var("y")
        total = Poly.zero()
        for (i, j), w in steps.weights.items():
            mono = Poly.monomial({"x": 1 + i, "y": 1 + j})
            total = total + mono * w.as_poly()
        self.K = t * total - x * y
        ys = self.K.coeffs_in("y")
        self.a = ys.get(2, Poly.zero())
        self.b = ys.get(1, Poly.zero())
        self.c = ys.get(0, Poly.zero())
        xs = self.K.coeffs_in("x")
        self.ta = xs.get(2, Poly.zero())
        self.tb = xs.get(1, Poly.zero())
        self.tc = xs.get(0, Poly.zero())

    def discriminant_x(self) -> Poly:
        """d(x) = b(x)^2 - 4 a(x) c(x)."""
        return self.b * self.b - self.a * self.c * 4

    def discriminant_y(self) -> Poly:
        """dt(y) = tb(y)^2 - 4 ta(y) tc(y)."""
        return self.tb * self.tb - self.ta * self.tc * 4

    # t-free step-row polynomials: C/A give the generator ratios with the
    # common factor t*var already cancelled.
    def _row_polys(self, axis: str) -> tuple[Poly, Poly]:
        """(numerator, denominator) row polynomial for Phi (axis 'x') or Psi."""
        num = Poly.zero()
        den = Poly.zero()
        other = "y" if axis == "x" else "x"
        for (i, j), w in self.steps.weights.items():
            sgn = i if axis == "x" else j
            exp = (1 + j) if axis == "x" else (1 + i)
            if sgn == -1:
                num = num + Poly.monomial({other: exp}) * w.as_poly()
            elif sgn == 1:
                den = den + Poly.monomial({other: exp}) * w.as_poly()
        return num, den

    def phi(self) -> tuple[Rat, Rat]:
        """The x-swapping involution; undefined when ta == 0."""
        num, den = self._row_polys("x")
        if den.is_zero():
            raise KernelError("undefined generator: ta(y) vanishes identically")
        return Rat(num, den * Poly.var("x")), Rat.var("y")

    def psi(self) -> tuple[Rat, Rat]:
        """The y-swapping involution; undefined when a == 0."""
        num, den = self._row_polys("y")
        if den.is_zero():
            raise KernelError("undefined generator: a(x) vanishes identically")
        return Rat.var("x"), Rat(num, den * Poly.var("y"))


def kernel_of(steps: StepSet) -> Kernel:
    return Kernel(steps)


def compose(outer: tuple[Rat, Rat], inner: tuple[Rat, Rat]) -> tuple[Rat, Rat]:
    """(outer o inner)(x, y): substitute inner's coordinates into outer."""
    bind = {"x": inner[0], "y": inner[1]}
    return outer[0].subs(bind), outer[1].subs(bind)


IDENTITY = (Rat.var("x"), Rat.var("y"))


# --------------------------------------------------------------------------
# factored coordinates for orbit iteration
# --------------------------------------------------------------------------


def _primitive(p: Poly) -> tuple[QQ, Poly]:
    """Write p = s*q with q integer-primitive and positive leading coeff."""
    if p.is_zero():
        raise AlgebraError("zero polynomial has no primitive part")
    coeffs = list(p.terms.values())
    from math import gcd, lcm

    den_l = 1
    for c in coeffs:
        den_l = lcm(den_l, int(c.denominator))
    num_g = 0
    for c in coeffs:
        num_g = gcd(num_g, int(c.numerator * (den_l // c.denominator)))
    scale = QQ(num_g, den_l)
    _, lead = p.lead()
    if lead < 0:
        scale = -scale
    return scale, p.scale(1 / scale)


class _Factored:
    """coeff * product(atom^exp) with primitive polynomial atoms."""

    __slots__ = ("coeff", "factors")

    def __init__(self, coeff: QQ, factors: dict[Poly, int]):
        self.coeff = coeff
        self.factors = factors

    @staticmethod
    def variable(name: str) -> "_Factored":
        return _Factored(Q1, {Poly.var(name): 1})

    def mul(self, other: "_Factored") -> "_Factored":
        f = dict(self.factors)
        for a, e in other.factors.items():
            ne = f.get(a, 0) + e
            if ne:
                f[a] = ne
            elif a in f:
                del f[a]
        return _Factored(self.coeff * other.coeff, f)

    def inv(self) -> "_Factored":
        return _Factored(1 / self.coeff, {a: -e for a, e in self.factors.items()})

    def is_variable(self, name: str) -> bool:
        if self.coeff != 1 or len(self.factors) != 1:
            return False
        (atom, e), = self.factors.items()
        return e == 1 and atom == Poly.var(name)

    def split(self) -> tuple[Poly, Poly]:
        """Expanded (numerator, denominator) including the coefficient."""
        num = Poly.const(self.coeff.numerator)
        den = Poly.const(self.coeff.denominator)
        for atom, e in self.factors.items():
            if e > 0:
                num = num * atom**e
            else:
                den = den * atom ** (-e)
        return num, den

    def as_rat(self, reduce: bool = True) -> Rat:
        num, den = self.split()
        if reduce:
            return Rat(num, den)
        return Rat(num, den, _reduced=True)

    def key(self) -> tuple:
        return (self.coeff, frozenset(self.factors.items()))


class _AtomStore:
    """Pairwise-coprime basis of polynomial atoms with retroactive splitting.

    Leaves are integer-primitive, positive-lead, non-constant polynomials
    with no monomial content.  Registering a polynomial that shares a proper
    factor with an existing leaf splits that leaf, so equal factors arising
    on different paths always merge structurally and exact cancellation in
    factored coordinates is complete.  Former leaves stay behind as nodes
    recording their refinement; ``normalize`` rewrites any exponent dict in
    terms of current leaves.  Polynomials above the opacity threshold are
    registered without gcd refinement: their values stay exact, only
    structural cancellation against them is not attempted (they occur only
    in truncated orbits of infinite-group models, which are expanded anyway).
    """

    _OPAQUE_TERMS = 160

    def __init__(self, refine: bool = True):
        self.refine = refine
        self.leaves: list[Poly] = []
        self.leafset: set[Poly] = set()
        self.nodes: dict[Poly, list[tuple[Poly, int]]] = {}
        self._rcache: dict[Poly, dict[Poly, int]] = {}

    def _add_leaf(self, p: Poly) -> None:
        self.leaves.append(p)
        self.leafset.add(p)
        self.leaves.sort(key=lambda a: (a.degree(), len(a.terms)))

    @staticmethod
    def _extract_power(p: Poly, g: Poly) -> tuple[int, Poly]:
        """Largest e with g^e dividing p, and the cofactor p / g^e."""
        e = 0
        while True:
            ok, q = poly_divides(g, p)
            if not ok:
                return e, p
            p, e = q, e + 1

    def _split(self, leaf: Poly, g: Poly) -> None:
        """Refine a leaf by a proper divisor g (primitive, positive lead)."""
        e, cof = self._extract_power(leaf, g)
        self.leaves.remove(leaf)
        self.leafset.discard(leaf)
        children = [(g, e)]
        if not cof.is_const():
            children.append((cof, 1))
        self.nodes[leaf] = children
        self._rcache.clear()
        self.register(g)
        if not cof.is_const():
            self.register(cof)

    def register(self, p: Poly) -> None:
        """Ensure p (primitive, positive lead, non-constant) resolves."""
        while True:
            if p in self.leafset or p in self.nodes:
                return
            for leaf in self.leaves:
                if leaf.degree() > p.degree():
                    continue
                ok, q = poly_divides(leaf, p)
                if ok:
                    e, cof = self._extract_power(q, leaf)
                    children = [(leaf, e + 1)]
                    if not cof.is_const():
                        children.append((cof, 1))
                    self.nodes[p] = children
                    if not cof.is_const():
                        self.register(cof)
                    return
            if not self.refine or len(p.terms) > self._OPAQUE_TERMS:
                self._add_leaf(p)
                return
            for leaf in self.leaves:
                if len(leaf.terms) > self._OPAQUE_TERMS:
                    continue
                g = poly_gcd(p, leaf)
                if g.is_const():
                    continue
                # proper divisor of the leaf (leaf itself cannot divide p
                # here, the trial division above would have caught it)
                self._split(leaf, g)
                break
            else:
                self._add_leaf(p)
                return

    def resolve(self, p: Poly) -> dict[Poly, int]:
        """Exponents of p over current leaves (p must be registrable)."""
        cached = self._rcache.get(p)
        if cached is not None:
            return cached
        if p in self.leafset:
            out = {p: 1}
        else:
            node = self.nodes.get(p)
            if node is None:
                self.register(p)
                return self.resolve(p)
            out: dict[Poly, int] = {}
            for f, e in node:
                for leaf, k in self.resolve(f).items():
                    out[leaf] = out.get(leaf, 0) + e * k
            out = self.normalize(out)
        self._rcache[p] = out
        return out

    def normalize(self, d: dict[Poly, int]) -> dict[Poly, int]:
        """Rewrite an exponent dict over refined leaves; identity if fresh."""
        if not any(a in self.nodes for a in d):
            return d
        out: dict[Poly, int] = {}
        stack = list(d.items())
        while stack:
            a, m = stack.pop()
            if m == 0:
                continue
            node = self.nodes.get(a)
            if node is not None:
                for f, e in node:
                    stack.append((f, e * m))
            else:
                ne = out.get(a, 0) + m
                if ne:
                    out[a] = ne
                elif a in out:
                    del out[a]
        return out

    def decompose(self, p: Poly) -> dict[Poly, int]:
        self.register(p)
        return self.resolve(p)


class _OrbitEngine:
    """Applies the t-free generators to factored coordinate pairs."""

    def __init__(self, ker: Kernel, refine: bool = True):
        self.ker = ker
        cx, ax = ker._row_polys("x")  # Phi: x' = cx(y) / (ax(y) * x)
        cy, ay = ker._row_polys("y")  # Psi: y' = cy(x) / (ay(x) * y)
        if ax.is_zero():
            raise KernelError("undefined generator: ta(y) vanishes identically")
        if ay.is_zero():
            raise KernelError("undefined generator: a(x) vanishes identically")
        self.phi_polys = (cx.coeffs_in("y"), ax.coeffs_in("y"))
        self.psi_polys = (cy.coeffs_in("x"), ay.coeffs_in("x"))
        self.store = _AtomStore(refine)

    def factor(self, p: Poly) -> _Factored:
        from .algebra import VARS

        scale, prim = _primitive(p)
        factors: dict[Poly, int] = {}
        # pull out the monomial content so variable powers always merge
        mins: tuple[int, ...] | None = None
        for exp in prim.terms:
            mins = exp if mins is None else tuple(map(min, mins, exp))
        if mins and any(mins):
            prim = Poly(
                {
                    tuple(e - m for e, m in zip(exp, mins)): c
                    for exp, c in prim.terms.items()
                }
            )
            for i, k in enumerate(mins):
                if k:
                    factors[Poly.var(VARS[i])] = k
        if not prim.is_const():
            for atom, e in self.store.decompose(prim).items():
                factors[atom] = factors.get(atom, 0) + e
        elif not prim.is_one():
            scale = scale * prim.const_value()
        return _Factored(scale, factors)

    def _eval_row(self, coeffs: dict[int, Poly], v: _Factored) -> _Factored:
        """coeffs as a polynomial row evaluated at v, as a _Factored."""
        d = max(coeffs)
        num_pos = Poly.const(1)
        den_pos = Poly.const(1)
        for atom, e in v.factors.items():
            if e > 0:
                num_pos = num_pos * atom**e
            else:
                den_pos = den_pos * atom ** (-e)
        total = Poly.zero()
        cn = QQ(v.coeff.numerator)
        cd = QQ(v.coeff.denominator)
        for j, cj in coeffs.items():
            term = cj.scale(cn**j * cd ** (d - j))
            term = term * num_pos**j * den_pos ** (d - j)
            total = total + term
        out = self.factor(total)
        if d:
            den_fac = _Factored(cd**d, {a: -e * d for a, e in v.factors.items() if e < 0})
            out = out.mul(den_fac.inv())
        return out

    def _norm(self, f: _Factored) -> _Factored:
        """Rewrite over current leaves so later products cancel exactly."""
        fresh = self.store.normalize(f.factors)
        return f if fresh is f.factors else _Factored(f.coeff, fresh)

    def apply_phi(self, pair):
        u, v = (self._norm(f) for f in pair)
        num = self._eval_row(self.phi_polys[0], v)
        den = self._eval_row(self.phi_polys[1], v)
        return self._norm(num.mul(den.inv()).mul(u.inv())), v

    def apply_psi(self, pair):
        u, v = (self._norm(f) for f in pair)
        num = self._eval_row(self.psi_polys[0], u)
        den = self._eval_row(self.psi_polys[1], u)
        return u, self._norm(num.mul(den.inv()).mul(v.inv()))

    def apply_theta(self, pair):
        return self.apply_psi(self.apply_phi(pair))

    @staticmethod
    def identity():
        return (_Factored.variable("x"), _Factored.variable("y"))

    def is_identity(self, pair) -> bool:
        for f, name in zip(pair, ("x", "y")):
            if f.coeff != 1:
                return False
            if self.store.normalize(f.factors) != {Poly.var(name): 1}:
                return False
        return True


# --------------------------------------------------------------------------
# witness points: fast certified closure probing
# --------------------------------------------------------------------------

#: deterministic generic sample points (x0, y0, lam0); poles fall through to
#: the next triple.
_WITNESSES = [
    (QQ(2, 5), QQ(3, 11), QQ(5, 7)),
    (QQ(3, 7), QQ(5, 13), QQ(9, 4)),
    (QQ(7, 3), QQ(2, 9), QQ(4, 11)),
    (QQ(5, 17), QQ(11, 6), QQ(13, 3)),
    (QQ(13, 4), QQ(7, 19), QQ(2, 13)),
]


class _PointProbe:
    """Iterate Theta on an exact rational point."""

    def __init__(self, ker: Kernel):
        self.cx, self.ax = ker._row_polys("x")
        self.cy, self.ay = ker._row_polys("y")

    def theta(self, u: QQ, v: QQ, lam: QQ) -> tuple[QQ, QQ]:
        den = self.ax.eval_qq({"y": v, "lam": lam}) * u
        if den == 0:
            raise ZeroDivisionError
        u2 = self.cx.eval_qq({"y": v, "lam": lam}) / den
        den = self.ay.eval_qq({"x": u2, "lam": lam}) * v
        if den == 0:
            raise ZeroDivisionError
        v2 = self.cy.eval_qq({"x": u2, "lam": lam}) / den
        return u2, v2

    def first_return(self, bound: int, start: int = 0) -> tuple[int | None, int]:
        """(smallest k <= bound with Theta^k(w) = w or None, witness index).

        A None certifies that no Theta power up to the bound is the identity
        map; a k is only a candidate until confirmed symbolically.
        """
        for idx in range(start, len(_WITNESSES)):
            x0, y0, lam0 = _WITNESSES[idx]
            try:
                u, v = x0, y0
                for k in range(1, bound + 1):
                    u, v = self.theta(u, v, lam0)
                    if u == x0 and v == y0:
                        return k, idx
                return None, idx
            except ZeroDivisionError:
                continue
        raise KernelError("all witness points hit poles; model too degenerate")


# --------------------------------------------------------------------------
# orbits
# --------------------------------------------------------------------------

#: stop materializing symbolic elements of a truncated orbit once the
#: factored coordinates carry more than this many terms (iterates of
#: infinite-group models grow superpolynomially, so the next step would
#: dominate the runtime).
_MATERIALIZE_TERM_CAP = 500


class Orbit:
    """Orbit of (x, y) under the kernel group, possibly truncated.

    theta_chain[i] is Theta^i for i = 0..n-1; phi_chain[i] is Phi o Theta^i.
    For a closed orbit the group order is 2n and every element is listed.
    A truncated orbit certifies (by exact evaluation at a generic rational
    witness point) that Theta^k != identity for every k <= bound; its
    symbolic elements are materialized only while they stay small, since
    iterates of infinite-group models grow without bound.
    """

    __slots__ = ("steps", "_engine", "_theta_fac", "closed", "bound", "_theta", "_phi")

    def __init__(self, steps, engine, theta_fac, closed, bound):
        self.steps = steps
        self._engine = engine
        self._theta_fac = theta_fac  # None: truncated, not yet materialized
        self.closed = closed
        self.bound = bound
        self._theta: list[tuple[Rat, Rat]] | None = None
        self._phi: list[tuple[Rat, Rat]] | None = None

    def _fac_chain(self):
        """Factored Theta powers; materialized on demand for truncated orbits."""
        if self._theta_fac is None:
            chain = [self._engine.identity()]
            cur = chain[0]
            for _ in range(1, self.bound):
                if _factored_mass(cur) > _MATERIALIZE_TERM_CAP:
                    break
                cur = self._engine.apply_theta(cur)
                chain.append(cur)
            self._theta_fac = chain
        return self._theta_fac

    @property
    def kernel(self) -> Kernel:
        return self._engine.ker

    @property
    def order(self) -> int | None:
        return 2 * len(self._theta_fac) if self.closed else None

    @property
    def materialized_powers(self) -> int:
        """How many Theta powers have explicit symbolic actions."""
        return len(self._fac_chain())

    @property
    def theta_chain(self) -> list[tuple[Rat, Rat]]:
        if self._theta is None:
            reduce = self.closed
            self._theta = [
                (u.as_rat(reduce), v.as_rat(reduce)) for u, v in self._fac_chain()
            ]
        return self._theta

    @property
    def phi_chain(self) -> list[tuple[Rat, Rat]]:
        if self._phi is None:
            reduce = self.closed
            self._phi = []
            for pair in self._fac_chain():
                u, v = self._engine.apply_phi(pair)
                self._phi.append((u.as_rat(reduce), v.as_rat(reduce)))
        return self._phi

    def elements(self) -> list[tuple[str, tuple[Rat, Rat]]]:
        """(word, action) pairs; words are reduced alternating products."""
        out = []
        for i, e in enumerate(self.theta_chain):
            word = "id" if i == 0 else ".".join(["psi.phi"] * i)
            out.append((word, e))
        for i, e in enumerate(self.phi_chain):
            word = "phi" if i == 0 else "phi." + ".".join(["psi.phi"] * i)
            out.append((word, e))
        return out

    def group_label(self):
        if self.closed:
            return self.order
        return f"infinite>={self.bound}"


def _factored_mass(pair) -> int:
    return sum(
        len(a.terms) * abs(e) for f in pair for a, e in f.factors.items()
    )


def orbit(steps: StepSet, bound: int = 16) -> Orbit:
    """Orbit of (x, y) under the group; closed, or truncated at ``bound``.

    A fast exact probe at a rational witness point finds the only candidate
    closure step (Theta^k(w) = w implies nothing closes before k); closure is
    then confirmed symbolically.  A closed orbit has 2n distinct elements; a
    truncated one certifies Theta^k != identity for all k <= bound and
    materializes symbolic elements while they stay small.
    """
    if bound < 4:
        raise ValueError("orbit bound must be at least 4")
    ker = Kernel(steps)
    probe = _PointProbe(ker)
    witness = 0
    while True:
        if witness >= len(_WITNESSES):
            raise KernelError(
                "closure candidates at every witness point failed symbolic "
                "confirmation; cannot certify the group order"
            )
        candidate, witness = probe.first_return(bound, witness)
        if candidate is None:
            # certified: no Theta power up to the bound is the identity;
            # symbolic elements materialize lazily (and only while they stay
            # small).  Factor refinement is skipped: truncated chains are
            # expanded for display rather than tested for structural identity.
            return Orbit(steps, _OrbitEngine(ker, refine=False), None, False, bound)
        # confirm the candidate closure symbolically
        engine = _OrbitEngine(ker)
        chain = [engine.identity()]
        cur = chain[0]
        for k in range(1, candidate + 1):
            cur = engine.apply_theta(cur)
            if engine.is_identity(cur):
                return Orbit(steps, engine, chain, True, bound)
            if k < candidate:
                chain.append(cur)
        # the witness returned by coincidence; try the next one
        witness += 1


def classify_group(steps: StepSet, bound: int = 16):
    """Group order (2k) if the orbit closes within the bound, else the label
    'infinite>=bound'; same certificates as orbit()."""
    return orbit(steps, bound).group_label()


def orbit_sum(orb: Orbit, H: Rat, weights: str = "uniform") -> Rat:
    """Weighted orbit sum sum_gamma c_gamma H(gamma(x, y)).

    weights: 'uniform' (all 1), 'alternating' (sign character), 'ramp'
    (-(i/n) on the i-th rotation power, zero on the reflected side), or
    'ramp_rev' (same ramp on inverse rotation powers).  Requires a closed
    orbit.
    """
    if not orb.closed:
        raise KernelError("orbit sums need a finite orbit")
    n = len(orb.theta_chain)
    total = Rat.const(0)
    for i, elem in enumerate(orb.theta_chain):
        cw = _chain_weight(weights, i, n, plus_side=True)
        if cw != 0:
            total = total + Rat.const(cw) * H.subs({"x": elem[0], "y": elem[1]})
    for i, elem in enumerate(orb.phi_chain):
        cw = _chain_weight(weights, i, n, plus_side=False)
        if cw != 0:
            total = total + Rat.const(cw) * H.subs({"x": elem[0], "y": elem[1]})
    return total


def _chain_weight(weights: str, i: int, n: int, plus_side: bool) -> QQ:
    if weights == "uniform":
        return QQ(1)
    if weights == "alternating":
        return QQ(1) if plus_side else QQ(-1)
    if weights == "ramp":
        if not plus_side or i == 0:
            return QQ(0)
        return QQ(-i, n)
    if weights == "ramp_rev":
        if not plus_side or i == 0:
            return QQ(0)
        # the inverse i-th rotation power equals the (n-i)-th forward one,
        # so the weight -(n-i)/n sits on chain slot i
        return QQ(-(n - i), n)
    raise ValueError(f"unknown orbit weights {weights!r}")


# --------------------------------------------------------------------------
# quadratic extension arithmetic
# --------------------------------------------------------------------------


class QuadExt:
    """Arithmetic in Base[Y] / (A Y^2 + B Y + C).

    ``rootvar`` names the adjoined kernel-root variable (the one eliminated),
    so elements are pairs (p, q) = p + q*Y of Rats free of rootvar.
    """

    __slots__ = ("A", "B", "C", "rootvar", "_mb_over_a", "_mc_over_a")

    def __init__(self, A: Rat, B: Rat, C: Rat, rootvar: str):
        if A.is_zero():
            raise KernelError("quadratic extension needs a nonzero leading coefficient")
        self.A, self.B, self.C = A, B, C
        self.rootvar = rootvar
        self._mb_over_a = -B / A
        self._mc_over_a = -C / A

    @staticmethod
    def in_y(ker: Kernel) -> "QuadExt":
        return QuadExt(Rat(ker.a), Rat(ker.b), Rat(ker.c), "y")

    @staticmethod
    def in_x(ker: Kernel) -> "QuadExt":
        return QuadExt(Rat(ker.ta), Rat(ker.tb), Rat(ker.tc), "x")

    # elements are plain (p, q) tuples of Rat

    def const(self, v) -> tuple[Rat, Rat]:
        r = v if isinstance(v, Rat) else Rat.const(v)
        return (r, Rat.const(0))

    def root(self) -> tuple[Rat, Rat]:
        return (Rat.const(0), Rat.const(1))

    def add(self, e1, e2):
        return (e1[0] + e2[0], e1[1] + e2[1])

    def sub(self, e1, e2):
        return (e1[0] - e2[0], e1[1] - e2[1])

    def mul(self, e1, e2):
        p1, q1 = e1
        p2, q2 = e2
        qq_ = q1 * q2
        p = p1 * p2 + qq_ * self._mc_over_a
        q = p1 * q2 + p2 * q1 + qq_ * self._mb_over_a
        return (p, q)

    def conj(self, e):
        p, q = e
        return (p + q * self._mb_over_a, -q)

    def norm(self, e) -> Rat:
        p, q = e
        return p * p + p * q * self._mb_over_a + q * q * (-self._mc_over_a)

    def trace(self, e) -> Rat:
        return e[0] * 2 + e[1] * self._mb_over_a

    def inv(self, e):
        n = self.norm(e)
        if n.is_zero():
            raise KernelError("non-invertible element (norm vanishes mod kernel)")
        cj = self.conj(e)
        return (cj[0] / n, cj[1] / n)

    def is_zero(self, e) -> bool:
        return e[0].is_zero() and e[1].is_zero()

    def eval_poly(self, p: Poly, bindings: dict[str, tuple[Rat, Rat]]):
        """Evaluate a Poly with some variables bound to extension elements.

        Unbound variables stay symbolic inside the Rat components (they must
        not include the root variable).
        """
        from .algebra import VARS

        total = self.const(0)
        cache: dict[tuple[str, int], tuple[Rat, Rat]] = {}

        def power(name: str, k: int):
            key = (name, k)
            if key not in cache:
                if k == 0:
                    cache[key] = self.const(1)
                else:
                    cache[key] = self.mul(power(name, k - 1), bindings[name])
            return cache[key]

        for exp, coeff in p.terms.items():
            term = self.const(coeff)
            for idx, k in enumerate(exp):
                if not k:
                    continue
                name = VARS[idx]
                if name in bindings:
                    term = self.mul(term, power(name, k))
                else:
                    term = self.mul(term, self.const(Rat(Poly.monomial({name: k}))))
            total = self.add(total, term)
        return total

    def eval_rat(self, f: Rat, bindings: dict[str, tuple[Rat, Rat]]):
        num = self.eval_poly(f.num, bindings)
        den = self.eval_poly(f.den, bindings)
        return self.mul(num, self.inv(den))

    def embed(self, f: Rat):
        """f(x, y) with the root variable sent to Y."""
        return self.eval_rat(f, {self.rootvar: self.root()})


# --------------------------------------------------------------------------
# functional-equation residual
# --------------------------------------------------------------------------


def poly_mul_trunc_t(a: Poly, b: Poly, n_max: int) -> Poly:
    """Product dropping every term of t-degree > n_max."""
    from .algebra import IX

    it = IX["t"]
    out: dict[tuple[int, ...], QQ] = {}
    bterms = list(b.terms.items())
    for e1, c1 in a.terms.items():
        t1 = e1[it]
        for e2, c2 in bterms:
            if t1 + e2[it] > n_max:
                continue
            e = tuple(m + n for m, n in zip(e1, e2))
            prev = out.get(e)
            if prev is None:
                out[e] = c1 * c2
            else:
                s = prev + c1 * c2
                if s == 0:
                    del out[e]
                else:
                    out[e] = s
    return Poly(out)


def functional_equation_residual(
    steps: StepSet, start: tuple[int, int], n_max: int
) -> Poly:
    """K Q - c(x) Q(x,0) - tc(y) Q(0,y) + K(0,0) Q(0,0) + x^(a+1) y^(b+1).

    Exactly zero through t-order n_max when the walk table and kernel agree.
    The returned polynomial is the residual truncated at that order.
    """
    ker = Kernel(steps)
    q = series_q_poly(steps, start, n_max)
    qx0 = q.subs({"y": Rat.const(0)}).as_poly()
    q0y = q.subs({"x": Rat.const(0)}).as_poly()
    q00 = q0y.subs({"y": Rat.const(0)}).as_poly()
    k00 = ker.c.subs({"x": Rat.const(0)}).as_poly()
    a, b = start
    res = poly_mul_trunc_t(ker.K, q, n_max)
    res = res - poly_mul_trunc_t(ker.c, qx0, n_max)
    res = res - poly_mul_trunc_t(ker.tc, q0y, n_max)
    res = res + poly_mul_trunc_t(k00, q00, n_max)
    res = res + Poly.monomial({"x": a + 1, "y": b + 1})
    # drop anything beyond the trusted order
    from .algebra import IX

    it = IX["t"]
    return Poly({e: c for e, c in res.terms.items() if e[it] <= n_max})
