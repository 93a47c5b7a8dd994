"""Rational invariants and additive decoupling for quadrant walk kernels.

An *invariant pair* is a pair of univariate rational functions (I(x), J(y))
that agree modulo the kernel polynomial K(x, y).  A *decoupling pair* for a
bivariate H(x, y) is a pair (F(x), G(y)) with H = F + G modulo K.  Both
notions are certified here by exact divisibility: the module never trusts a
construction, it always produces the quotient witness r with

    numerator(I - J)     = K * r        (invariants)
    numerator(H - F - G) = K * r        (decoupling)

Constructions come in two flavours:

* finite orbit: weighted orbit sums (uniform, alternating, ramp) evaluated
  in the quadratic extension by a kernel root give invariants whenever the
  orbit closes, and decoupling pairs exactly when the alternating orbit sum
  of H vanishes;
* any orbit: a partial-fraction ansatz for the univariate half with unknown
  coefficients in Q(t) (or Q(t, lam) for weighted models), determined by an
  exact linear system expressing that the antisymmetric part of H - G
  vanishes in the quadratic extension.

Everything is exact; no floating point enters at any stage.
"""

from __future__ import annotations

from .algebra import (
    QQ,
    AlgebraError,
    Poly,
    Rat,
    parse_rat,
    poly_divides,
    poly_exact_div,
    poly_lcm,
    solve_linear_rat,
)
from .kernel import Kernel, KernelError, Orbit, QuadExt, orbit, orbit_sum
from .steps import StepSet, model


class DecouplingError(ValueError):
    """Malformed input or broken precondition in an invariant/decoupling op."""


# --------------------------------------------------------------------------
# input coercion
# --------------------------------------------------------------------------


def _as_steps(m) -> StepSet:
    if isinstance(m, StepSet):
        return m
    if isinstance(m, str):
        return model(m)
    raise DecouplingError(f"expected a model name or StepSet, got {type(m).__name__}")


def _as_orbit(m, bound: int) -> Orbit:
    if isinstance(m, Orbit):
        return m
    return orbit(_as_steps(m), bound)


def _as_expr(f) -> Rat:
    if isinstance(f, Rat):
        return f
    if isinstance(f, Poly):
        return Rat(f)
    if isinstance(f, str):
        return parse_rat(f)
    if isinstance(f, int):
        return Rat.const(f)
    raise DecouplingError(f"expected a rational expression, got {type(f).__name__}")


def _check_vars(f: Rat, allowed: set[str], what: str) -> Rat:
    extra = f.variables() - allowed
    if extra:
        raise DecouplingError(
            f"{what} may only involve {sorted(allowed)}; found {sorted(extra)}"
        )
    return f


_X_VARS = {"x", "t", "lam"}
_Y_VARS = {"y", "t", "lam"}
_XY_VARS = {"x", "y", "t", "lam"}


# --------------------------------------------------------------------------
# result types
# --------------------------------------------------------------------------


class InvariantPair:
    """Univariate halves I(x), J(y) equal modulo K, with quotient witness."""

    __slots__ = ("I", "J", "witness")

    def __init__(self, I: Rat, J: Rat, witness: Rat):
        self.I, self.J, self.witness = I, J, witness

    def as_dict(self) -> dict:
        return {"I": str(self.I), "J": str(self.J), "witness": str(self.witness)}

    def __repr__(self) -> str:
        return f"InvariantPair(I={self.I!s}, J={self.J!s})"


class DecouplingPair:
    """Additive split H = F(x) + G(y) modulo K, with quotient witness."""

    __slots__ = ("H", "F", "G", "witness")

    def __init__(self, H: Rat, F: Rat, G: Rat, witness: Rat):
        self.H, self.F, self.G, self.witness = H, F, G, witness

    def as_dict(self) -> dict:
        return {
            "H": str(self.H),
            "F": str(self.F),
            "G": str(self.G),
            "witness": str(self.witness),
        }

    def __repr__(self) -> str:
        return f"DecouplingPair(H={self.H!s}, F={self.F!s}, G={self.G!s})"


class Ansatz:
    """Shape of the univariate unknown in a decoupling search.

    The unknown is a polynomial of degree ``degree`` with zero constant term
    (any constant belongs to the other half of the pair) plus partial
    fractions at the prescribed ``poles``, a mapping from pole location to
    multiplicity bound.  Locations may be integers, rationals, or constants
    in Q(t); the unknown count is degree + sum of multiplicities.
    """

    __slots__ = ("degree", "poles")

    def __init__(self, degree: int = 4, poles=None):
        if degree < 0:
            raise DecouplingError("ansatz degree must be nonnegative")
        if poles is None:
            poles = {0: 2, -1: 2}
        norm: list[tuple[Rat, int]] = []
        for loc, mult in poles.items():
            if mult < 1:
                raise DecouplingError("pole multiplicity must be positive")
            r = _as_expr(loc)
            if r.variables() - {"t", "lam"}:
                raise DecouplingError(f"pole location {loc!r} must be constant in x, y")
            norm.append((r, int(mult)))
        self.degree = degree
        self.poles = tuple(norm)

    @property
    def unknowns(self) -> int:
        return self.degree + sum(m for _, m in self.poles)

    def basis(self, var: str) -> list[Rat]:
        v = Rat.var(var)
        out = [v**i for i in range(1, self.degree + 1)]
        for loc, mult in self.poles:
            shifted = v - loc
            for e in range(1, mult + 1):
                out.append(Rat.const(1) / shifted**e)
        return out

    def __repr__(self) -> str:
        poles = ", ".join(f"{loc!s}: {m}" for loc, m in self.poles)
        return f"Ansatz(degree={self.degree}, poles={{{poles}}})"


DEFAULT_ANSATZ = Ansatz()


# --------------------------------------------------------------------------
# verification (divisibility with witness)
# --------------------------------------------------------------------------


def _kernel_witness(ker: Kernel, diff: Rat) -> Rat | None:
    """The cofactor r with diff = K * r, or None if K does not divide."""
    ok, quo = poly_divides(ker.K, diff.num)
    if not ok:
        return None
    return Rat(quo, diff.den)


def verify_invariants(m, I, J) -> tuple[bool, Rat | None]:
    """Certify that (I(x), J(y)) is an invariant pair for the model.

    True exactly when K divides the numerator of I - J *and* the halves are
    not both constant in their main variable.  On success the witness r
    satisfies I - J = K * r exactly.
    """
    steps = _as_steps(m)
    I = _check_vars(_as_expr(I), _X_VARS, "I")
    J = _check_vars(_as_expr(J), _Y_VARS, "J")
    if not (I.depends_on("x") or J.depends_on("y")):
        return False, None
    w = _kernel_witness(Kernel(steps), I - J)
    return (w is not None), w


def verify_decoupling(m, H, F, G) -> tuple[bool, Rat | None]:
    """Certify that (F(x), G(y)) decouples H(x, y) for the model.

    True exactly when K divides the numerator of H - F - G; the witness r
    satisfies H - F - G = K * r exactly.
    """
    steps = _as_steps(m)
    H = _check_vars(_as_expr(H), _XY_VARS, "H")
    F = _check_vars(_as_expr(F), _X_VARS, "F")
    G = _check_vars(_as_expr(G), _Y_VARS, "G")
    w = _kernel_witness(Kernel(steps), H - F - G)
    return (w is not None), w


# --------------------------------------------------------------------------
# finite-orbit constructions
# --------------------------------------------------------------------------


def _symmetric_value(ext: QuadExt, f: Rat) -> Rat:
    """Evaluate f at the kernel root and insist the result is symmetric.

    Group-symmetric functions evaluate identically at both roots, so the
    root-degree-one part must reduce to zero; this is checked, not assumed.
    """
    p, q = ext.embed(f)
    if not q.is_zero():
        raise DecouplingError(
            "orbit sum failed to be symmetric in the kernel roots; "
            "the orbit data is inconsistent"
        )
    return p


def construct_invariants(m, H=None, bound: int = 16) -> InvariantPair | None:
    """Build an invariant pair from orbit sums over a finite orbit.

    With explicit H, the pair is I(x) = sum of H over the orbit, evaluated
    at a y-root of K, and J(y) the same at an x-root; None when both halves
    degenerate to elements of Q(t).  With H omitted, the powers x^k for
    k = 1..n (half the group order) are tried in turn and the first
    nondegenerate pair is returned.

    Raises KernelError when the orbit does not close within ``bound``.
    """
    orb = _as_orbit(m, bound)
    if not orb.closed:
        raise KernelError("invariant construction needs a finite orbit")
    ker = orb.kernel
    n = len(orb.theta_chain)
    if H is not None:
        candidates = [_check_vars(_as_expr(H), _XY_VARS, "H")]
    else:
        x = Rat.var("x")
        candidates = [x**k for k in range(1, n + 1)]
    ext_y = QuadExt.in_y(ker)
    ext_x = QuadExt.in_x(ker)
    for cand in candidates:
        total = orbit_sum(orb, cand, "uniform")
        I = _symmetric_value(ext_y, total)
        J = _symmetric_value(ext_x, total)
        if not (I.depends_on("x") or J.depends_on("y")):
            continue
        ok, w = verify_invariants(orb.steps, I, J)
        if not ok:
            raise DecouplingError(
                "internal: orbit-sum invariants failed kernel divisibility"
            )
        return InvariantPair(I, J, w)
    return None


def alternating_orbit_sum(m, H, bound: int = 16) -> Rat:
    """The sign-weighted orbit sum of H; zero exactly when H decouples."""
    orb = _as_orbit(m, bound)
    if not orb.closed:
        raise KernelError("the alternating orbit sum needs a finite orbit")
    return orbit_sum(orb, _check_vars(_as_expr(H), _XY_VARS, "H"), "alternating")


def construct_decoupling_finite(m, H, bound: int = 16) -> DecouplingPair | None:
    """Decouple H over a finite orbit, or prove it impossible.

    Returns None exactly when the alternating orbit sum of H is nonzero (the
    obstruction is decisive for finite orbits).  Otherwise the ramp-weighted
    orbit sums give F directly and G up to a multiple of the J-invariant,
    and the result always carries a divisibility witness.

    Raises KernelError when the orbit does not close within ``bound``.
    """
    orb = _as_orbit(m, bound)
    if not orb.closed:
        raise KernelError("finite-orbit decoupling needs a finite orbit")
    H = _check_vars(_as_expr(H), _XY_VARS, "H")
    if not orbit_sum(orb, H, "alternating").is_zero():
        return None
    ker = orb.kernel
    n = len(orb.theta_chain)
    ext_y = QuadExt.in_y(ker)
    ext_x = QuadExt.in_x(ker)
    F = ext_y.trace(ext_y.embed(orbit_sum(orb, H, "ramp")))
    G_part = ext_x.trace(ext_x.embed(orbit_sum(orb, H, "ramp_rev")))
    J = _symmetric_value(ext_x, orbit_sum(orb, H, "uniform"))
    G = G_part + Rat.const(QQ(2 * n - 1, 2 * n)) * J
    ok, w = verify_decoupling(orb.steps, H, F, G)
    if not ok:
        raise DecouplingError(
            "internal: ramp-weighted construction failed kernel divisibility"
        )
    return DecouplingPair(H, F, G, w)


# --------------------------------------------------------------------------
# ansatz search (works for infinite orbits too)
# --------------------------------------------------------------------------


def search_decoupling_ansatz(
    m, H, ansatz: Ansatz | None = None, side: str = "y"
) -> DecouplingPair | None:
    """Search for a decoupling pair with one half in a prescribed shape.

    With ``side="y"`` the unknown is G(y) = sum of a polynomial (degree and
    zero constant term per the ansatz) and partial fractions at the ansatz
    poles; requiring the antisymmetric part of H - G to vanish at a y-root
    of K is linear in the unknown coefficients over Q(t) (Q(t, lam) when
    weights are symbolic).  The system is solved exactly; on success F is
    half the trace of H - G and the verified pair is returned, else None.
    ``side="x"`` swaps the roles and shapes F(x) instead.
    """
    steps = _as_steps(m)
    ker = Kernel(steps)
    H = _check_vars(_as_expr(H), _XY_VARS, "H")
    ansatz = DEFAULT_ANSATZ if ansatz is None else ansatz
    if side == "y":
        ext, mainvar, othervar = QuadExt.in_y(ker), "y", "x"
    elif side == "x":
        ext, mainvar, othervar = QuadExt.in_x(ker), "x", "y"
    else:
        raise DecouplingError("side must be 'y' or 'x'")

    basis = ansatz.basis(mainvar)
    try:
        basis_elts = [ext.embed(b) for b in basis]
        target = ext.embed(H)
    except KernelError as exc:
        raise DecouplingError(f"unsupported ansatz pole for this model: {exc}") from exc

    # The antisymmetric parts live in Q(othervar, t, lam); clearing their
    # common denominator and matching coefficients of each othervar power
    # yields the linear system for the ansatz coefficients.
    anti = [e[1] for e in basis_elts]
    anti_target = target[1]
    den = anti_target.den
    for q in anti:
        den = poly_lcm(den, q.den)
    cleared = [q.num * poly_exact_div(den, q.den) for q in anti]
    cleared_target = anti_target.num * poly_exact_div(den, anti_target.den)
    powers: set[int] = set()
    for p in cleared:
        powers.update(p.coeffs_in(othervar))
    powers.update(cleared_target.coeffs_in(othervar))
    rows = []
    rhs = []
    for j in sorted(powers):
        rows.append([Rat(p.coeff_of(othervar, j)) for p in cleared])
        rhs.append(Rat(cleared_target.coeff_of(othervar, j)))
    sol = solve_linear_rat(rows, rhs)
    if sol is None:
        return None

    unknown = Rat.const(0)
    for c, b in zip(sol, basis):
        if not c.is_zero():
            unknown = unknown + c * b
    other = _symmetric_value(ext, H - unknown)
    F, G = (other, unknown) if side == "y" else (unknown, other)
    ok, w = verify_decoupling(steps, H, F, G)
    if not ok:
        raise DecouplingError("internal: ansatz solution failed kernel divisibility")
    return DecouplingPair(H, F, G, w)


# --------------------------------------------------------------------------
# completing a pair from one half
# --------------------------------------------------------------------------


def complete_invariant_pair(m, I=None, J=None) -> InvariantPair | None:
    """Recover the missing invariant half from the given one.

    A valid J satisfies J(Y0) = J(Y1) at the y-roots of K, which makes the
    root evaluation symmetric; the common value is I(x).  Returns None when
    the given half does not evaluate symmetrically or the completed pair
    fails verification.  Exactly one of I, J must be supplied.
    """
    steps = _as_steps(m)
    if (I is None) == (J is None):
        raise DecouplingError("supply exactly one of I, J")
    ker = Kernel(steps)
    if J is not None:
        J = _check_vars(_as_expr(J), _Y_VARS, "J")
        p, q = QuadExt.in_y(ker).embed(J)
        if not q.is_zero():
            return None
        I = p
    else:
        I = _check_vars(_as_expr(I), _X_VARS, "I")
        p, q = QuadExt.in_x(ker).embed(I)
        if not q.is_zero():
            return None
        J = p
    ok, w = verify_invariants(steps, I, J)
    return InvariantPair(I, J, w) if ok else None


def complete_decoupling_pair(m, H, F=None, G=None) -> DecouplingPair | None:
    """Recover the missing decoupling half from the given one.

    If G is given, H - G must evaluate symmetrically at the y-roots and the
    common value is F(x); dually for a given F at the x-roots.  Returns None
    when the evaluation is not symmetric.  Exactly one of F, G must be
    supplied.
    """
    steps = _as_steps(m)
    H = _check_vars(_as_expr(H), _XY_VARS, "H")
    if (F is None) == (G is None):
        raise DecouplingError("supply exactly one of F, G")
    ker = Kernel(steps)
    if G is not None:
        G = _check_vars(_as_expr(G), _Y_VARS, "G")
        p, q = QuadExt.in_y(ker).embed(H - G)
        if not q.is_zero():
            return None
        F = p
    else:
        F = _check_vars(_as_expr(F), _X_VARS, "F")
        p, q = QuadExt.in_x(ker).embed(H - F)
        if not q.is_zero():
            return None
        G = p
    ok, w = verify_decoupling(steps, H, F, G)
    if not ok:
        raise DecouplingError("internal: completed pair failed kernel divisibility")
    return DecouplingPair(H, F, G, w)


# --------------------------------------------------------------------------
# starting-point variants and symmetry transfer
# --------------------------------------------------------------------------


def starting_point_decoupling(
    m, a: int, b: int, ansatz: Ansatz | None = None, bound: int = 16
) -> DecouplingPair | None:
    """Decouple the boundary monomial of a walk started at (a, b).

    The relevant bivariate is H = x^(a+1) * y^(b+1).  Finite orbits use the
    decisive alternating-sum criterion; infinite orbits fall back to the
    ansatz search, trying the y-side shape first and the x-side mirror
    second.  A None for an infinite orbit only means no pair exists within
    the ansatz, never that none exists at all.
    """
    if a < 0 or b < 0:
        raise DecouplingError("starting point coordinates must be nonnegative")
    steps = _as_steps(m)
    H = Rat.var("x") ** (a + 1) * Rat.var("y") ** (b + 1)
    orb = orbit(steps, bound)
    if orb.closed:
        return construct_decoupling_finite(orb, H)
    for side in ("y", "x"):
        pair = search_decoupling_ansatz(steps, H, ansatz, side)
        if pair is not None:
            return pair
    return None


def symmetry_transfer(m, pair, reflection: str):
    """Carry a verified pair to the reflected model.

    ``reflection="diagonal"`` transposes the step set and swaps the roles of
    the two halves; ``reflection="vertical"`` mirrors the steps horizontally
    and substitutes 1/x in the x-half.  The transferred pair is re-verified
    against the reflected kernel before being returned as
    (reflected steps, transferred pair).
    """
    steps = _as_steps(m)
    xr, yr = Rat.var("x"), Rat.var("y")
    if reflection == "diagonal":
        new_steps = steps.transposed()
        if isinstance(pair, InvariantPair):
            new_I = pair.J.subs({"y": xr})
            new_J = pair.I.subs({"x": yr})
            ok, w = verify_invariants(new_steps, new_I, new_J)
            if not ok:
                raise DecouplingError("diagonal transfer failed verification")
            return new_steps, InvariantPair(new_I, new_J, w)
        if isinstance(pair, DecouplingPair):
            new_H = pair.H.subs({"x": yr, "y": xr})
            new_F = pair.G.subs({"y": xr})
            new_G = pair.F.subs({"x": yr})
            ok, w = verify_decoupling(new_steps, new_H, new_F, new_G)
            if not ok:
                raise DecouplingError("diagonal transfer failed verification")
            return new_steps, DecouplingPair(new_H, new_F, new_G, w)
        raise DecouplingError("pair must be an InvariantPair or DecouplingPair")
    if reflection == "vertical":
        new_steps = steps.mirrored_x()
        inv_x = Rat.const(1) / xr
        if isinstance(pair, InvariantPair):
            new_I = pair.I.subs({"x": inv_x})
            ok, w = verify_invariants(new_steps, new_I, pair.J)
            if not ok:
                raise DecouplingError("vertical transfer failed verification")
            return new_steps, InvariantPair(new_I, pair.J, w)
        if isinstance(pair, DecouplingPair):
            new_H = pair.H.subs({"x": inv_x})
            new_F = pair.F.subs({"x": inv_x})
            ok, w = verify_decoupling(new_steps, new_H, new_F, pair.G)
            if not ok:
                raise DecouplingError("vertical transfer failed verification")
            return new_steps, DecouplingPair(new_H, new_F, pair.G, w)
        raise DecouplingError("pair must be an InvariantPair or DecouplingPair")
    raise DecouplingError("reflection must be 'diagonal' or 'vertical'")


# --------------------------------------------------------------------------
# JSON verdicts
# --------------------------------------------------------------------------


def decoupling_verdict(
    m, H, ansatz: Ansatz | None = None, bound: int = 16, name: str | None = None
) -> dict:
    """One-line JSON verdict for "does H decouple for this model?".

    Status is ``decoupled`` (with the pair and witness), or
    ``not_decoupled_finite`` (finite orbit, decisive obstruction), or
    ``no_pair_within_ansatz`` (infinite orbit, search exhausted the shape).
    """
    steps = _as_steps(m)
    if name is None:
        name = m if isinstance(m, str) else steps.text()
    H = _check_vars(_as_expr(H), _XY_VARS, "H")
    orb = orbit(steps, bound)
    if orb.closed:
        pair = construct_decoupling_finite(orb, H)
        miss = "not_decoupled_finite"
    else:
        pair = None
        for side in ("y", "x"):
            pair = search_decoupling_ansatz(steps, H, ansatz, side)
            if pair is not None:
                break
        miss = "no_pair_within_ansatz"
    out = {"model": name, "H": str(H), "status": "decoupled" if pair else miss}
    if pair is not None:
        out["pair"] = {"F": str(pair.F), "G": str(pair.G)}
        out["witness"] = str(pair.witness)
    return out
