"""Brute-force enumeration of quadrant walks: the package's ground truth.

The dynamic program is the definition itself: q(i,j;0) = [start == (i,j)],
and q(i,j;n) sums weighted counts over incoming steps, restricted to the
quarter plane.  Everything here is exact (rationals, or polynomials in lam
for symbolically weighted models).
"""

from __future__ import annotations

from ._rat import QQ
from .algebra import Poly, Rat, Series
from .steps import StepSet


def walk_tables(
    steps: StepSet, start: tuple[int, int], n_max: int
) -> list[dict[tuple[int, int], object]]:
    """Counts q(i,j;n) for n = 0..n_max.

    Returns one sparse dict per length.  Values are QQ for numeric weights
    and Rat (polynomials in lam) when a weight is symbolic.
    """
    a, b = start
    if a < 0 or b < 0:
        raise ValueError("start must lie in the quarter plane")
    symbolic = steps.is_symbolic()
    one = Rat.const(1) if symbolic else QQ(1)
    wts = {
        v: (w if symbolic else w.const_value()) for v, w in steps.weights.items()
    }
    tables: list[dict[tuple[int, int], object]] = [{(a, b): one}]
    cur = tables[0]
    for _ in range(n_max):
        nxt: dict[tuple[int, int], object] = {}
        for (i, j), cnt in cur.items():
            for (di, dj), w in wts.items():
                i2, j2 = i + di, j + dj
                if i2 < 0 or j2 < 0:
                    continue
                key = (i2, j2)
                prev = nxt.get(key)
                add = cnt * w
                nxt[key] = add if prev is None else prev + add
        tables.append(nxt)
        cur = nxt
    return tables


def count_at(
    steps: StepSet, start: tuple[int, int], end: tuple[int, int], n: int
):
    """q(end; n) for walks from start (exact)."""
    return walk_tables(steps, start, n)[n].get(end, QQ(0) if not steps.is_symbolic() else Rat.const(0))


def series_q_poly(steps: StepSet, start: tuple[int, int], n_max: int) -> Poly:
    """Full generating polynomial sum_{n<=n_max} t^n sum q(i,j;n) x^i y^j."""
    tables = walk_tables(steps, start, n_max)
    terms = {}
    symbolic = steps.is_symbolic()
    for n, tab in enumerate(tables):
        for (i, j), c in tab.items():
            if symbolic:
                poly = c.as_poly()
                for e, cc in poly.terms.items():
                    key = (i, j, n, e[3], e[4])
                    terms[key] = terms.get(key, QQ(0)) + cc
            else:
                terms[(i, j, n, 0, 0)] = c
    return Poly({k: v for k, v in terms.items() if v != 0})


def series_q0y(steps: StepSet, start: tuple[int, int], n_max: int) -> Series:
    """Q(0, y; t) to order n_max as a Series with polynomial-in-y coefficients."""
    tables = walk_tables(steps, start, n_max)
    symbolic = steps.is_symbolic()
    coeffs: list[Rat] = []
    for tab in tables:
        p = Rat.const(0)
        for (i, j), c in tab.items():
            if i != 0:
                continue
            term = (c if symbolic else Rat.const(c)) * Rat(Poly.var("y", j) if j else Poly.const(1))
            p = p + term
        coeffs.append(p)
    aux = ("y", "lam") if symbolic else ("y",)
    return Series(aux, 1, 0, coeffs, n_max + 1)


def series_qx0(steps: StepSet, start: tuple[int, int], n_max: int) -> Series:
    """Q(x, 0; t) to order n_max as a Series with polynomial-in-x coefficients."""
    tables = walk_tables(steps, start, n_max)
    symbolic = steps.is_symbolic()
    coeffs: list[Rat] = []
    for tab in tables:
        p = Rat.const(0)
        for (i, j), c in tab.items():
            if j != 0:
                continue
            term = (c if symbolic else Rat.const(c)) * Rat(Poly.var("x", i) if i else Poly.const(1))
            p = p + term
        coeffs.append(p)
    aux = ("x", "lam") if symbolic else ("x",)
    return Series(aux, 1, 0, coeffs, n_max + 1)


def series_coeff(steps: StepSet, start: tuple[int, int], i: int, j: int, n_max: int) -> Series:
    """The single-point series Q_{i,j}(t) to order n_max."""
    tables = walk_tables(steps, start, n_max)
    symbolic = steps.is_symbolic()
    coeffs = [
        (tab.get((i, j), Rat.const(0)) if symbolic else Rat.const(tab.get((i, j), QQ(0))))
        for tab in tables
    ]
    aux = ("lam",) if symbolic else ()
    return Series(aux, 1, 0, coeffs, n_max + 1)


def gessel_excursions(n: int) -> QQ:
    """Closed form for length-2n excursions of the model E,NE,W,SW:

        16^n * (1/2)_n (5/6)_n / ((2)_n (5/3)_n)

    with (a)_n the rising factorial.
    """

    def rising(a: QQ, k: int) -> QQ:
        out = QQ(1)
        for m in range(k):
            out *= a + m
        return out

    return (
        QQ(16) ** n
        * rising(QQ(1, 2), n)
        * rising(QQ(5, 6), n)
        / (rising(QQ(2), n) * rising(QQ(5, 3), n))
    )
