"""Exact rational arithmetic shim.

Everything exact in this package runs on one rational type, QQ.  gmpy2.mpq is
used when available (it is several times faster than fractions.Fraction in
the walk recurrences and gcd-heavy orbit computations); otherwise the stdlib
Fraction is a drop-in replacement.
"""

from __future__ import annotations

try:  # pragma: no cover - exercised implicitly by every test
    from gmpy2 import mpq as QQ  # type: ignore[import-untyped]

    _HAVE_GMPY2 = True
except ImportError:  # pragma: no cover
    from fractions import Fraction as QQ  # type: ignore[assignment]

    _HAVE_GMPY2 = False

#: The rational zero and one, shared to avoid re-boxing.
Q0 = QQ(0)
Q1 = QQ(1)


def qq(value) -> "QQ":
    """Coerce ints, strings like '3/4' or '-2', and rationals to QQ."""
    if isinstance(value, str):
        return QQ(value.strip())
    return QQ(value)


def rat_str(q) -> str:
    """Render a rational as 'p' or 'p/q' (no spaces); stable across backends."""
    s = str(q)
    return s


def numer(q) -> int:
    return int(q.numerator)


def denom(q) -> int:
    return int(q.denominator)
