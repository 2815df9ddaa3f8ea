"""Symmetric q-integers, q-factorials and q-binomial coefficients.

Everything here is an exact Laurent polynomial in the single variable q,
held as a dict mapping q-exponent -> int coefficient.  The conventions are
the symmetric ones:

    [i]   = (q^i - q^-i) / (q - q^-1) = q^(i-1) + q^(i-3) + ... + q^(1-i)
    [n]!  = [1][2]...[n]          ([0]! = 1, the empty product)
    [n r] = [n]! / ([r]! [n-r]!)  (0 when r < 0 or r > n)

The binomial is computed by exact Laurent division with an internal
assertion rather than by a recurrence, so the Pascal-type recurrence can be
tested independently.  With this symmetric convention the alternating sum
sum_r (-1)^r [n r] vanishes exactly for odd n; for even n it is a nonzero
palindromic polynomial (2 - q - q^-1 at n = 2).
"""

from __future__ import annotations

from typing import Dict, Iterable, Mapping, Optional

from .laurent import LaurentPoly, PolyContext, Q, Terms

QTerms = Dict[int, int]


class QScalar:
    """Laurent polynomial in q alone; immutable by convention."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Optional[Mapping[int, int]] = None) -> None:
        self.coeffs: QTerms = {}
        if coeffs:
            for exp, c in coeffs.items():
                if c:
                    self.coeffs[exp] = c

    @classmethod
    def zero(cls) -> "QScalar":
        return cls()

    @classmethod
    def one(cls) -> "QScalar":
        return cls({0: 1})

    @classmethod
    def monomial(cls, exp: int, coef: int = 1) -> "QScalar":
        return cls({exp: coef})

    def __add__(self, other: "QScalar") -> "QScalar":
        out = dict(self.coeffs)
        for exp, c in other.coeffs.items():
            new = out.get(exp, 0) + c
            if new:
                out[exp] = new
            else:
                del out[exp]
        return QScalar(out)

    def __sub__(self, other: "QScalar") -> "QScalar":
        return self + (-other)

    def __neg__(self) -> "QScalar":
        return QScalar({exp: -c for exp, c in self.coeffs.items()})

    def __mul__(self, other: "QScalar") -> "QScalar":
        out: QTerms = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                exp = e1 + e2
                new = out.get(exp, 0) + c1 * c2
                if new:
                    out[exp] = new
                else:
                    del out[exp]
        return QScalar(out)

    def scale(self, k: int) -> "QScalar":
        if k == 0:
            return QScalar()
        return QScalar({exp: c * k for exp, c in self.coeffs.items()})

    def shift(self, k: int) -> "QScalar":
        """Multiply by q**k."""
        return QScalar({exp + k: c for exp, c in self.coeffs.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QScalar):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(frozenset(self.coeffs.items()))

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def min_exp(self) -> int:
        return min(self.coeffs) if self.coeffs else 0

    def max_exp(self) -> int:
        return max(self.coeffs) if self.coeffs else 0

    def mirror(self) -> "QScalar":
        """Substitute q -> q^-1."""
        return QScalar({-exp: c for exp, c in self.coeffs.items()})

    def is_palindromic(self) -> bool:
        return self.mirror() == self

    def at_one(self) -> int:
        """Specialize q = 1."""
        return sum(self.coeffs.values())

    def truncate_below(self, floor: int) -> "QScalar":
        """Drop all terms with exponent < floor."""
        return QScalar({e: c for e, c in self.coeffs.items() if e >= floor})

    def to_laurent(self, ctx: PolyContext) -> LaurentPoly:
        terms: Terms = {}
        for exp, c in self.coeffs.items():
            terms[ctx.unit_monomial(Q, exp)] = c
        return LaurentPoly(ctx, terms)

    def __repr__(self) -> str:
        ctx = PolyContext(0)
        from .laurent import to_text

        return f"QScalar({to_text(self.to_laurent(ctx))!r})"


def q_divexact(num: QScalar, den: QScalar) -> QScalar:
    """Exact Laurent division; raises ArithmeticError if the remainder is
    nonzero or the quotient would be an infinite series."""
    if den.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if num.is_zero():
        return QScalar()
    rem = dict(num.coeffs)
    den_top = den.max_exp()
    den_lead = den.coeffs[den_top]
    # an exact quotient's exponents live in [num.min - den.min, num.max - den.max];
    # a shift below that floor means the division only closes as an infinite
    # descending series
    shift_floor = min(num.coeffs) - min(den.coeffs)
    quot: QTerms = {}
    while rem:
        top = max(rem)
        lead = rem[top]
        if lead % den_lead != 0:
            raise ArithmeticError("inexact q-division (leading coefficient)")
        shift = top - den_top
        if shift < shift_floor:
            raise ArithmeticError("inexact q-division (non-terminating)")
        factor = lead // den_lead
        quot[shift] = quot.get(shift, 0) + factor
        for exp, c in den.coeffs.items():
            key = exp + shift
            new = rem.get(key, 0) - factor * c
            if new:
                rem[key] = new
            else:
                rem.pop(key, None)
        if rem and max(rem) >= top:
            raise ArithmeticError("inexact q-division (non-terminating)")
    return QScalar(quot)


def q_int(i: int) -> QScalar:
    """[i] = q^(i-1) + q^(i-3) + ... + q^(1-i); [0] = 0."""
    if i < 0:
        raise ValueError("q_int requires i >= 0")
    return QScalar({i - 1 - 2 * k: 1 for k in range(i)})


def q_factorial(n: int) -> QScalar:
    if n < 0:
        raise ValueError("q_factorial requires n >= 0")
    out = QScalar.one()
    for i in range(1, n + 1):
        out = out * q_int(i)
    return out


def q_binomial(n: int, r: int) -> QScalar:
    """[n r] = [n]!/([r]![n-r]!); 0 for r outside 0..n.

    Computed by exact division with a verification multiply; an inexact
    division here would be a bug, not a data condition.
    """
    if n < 0:
        raise ValueError("q_binomial requires n >= 0")
    if r < 0 or r > n:
        return QScalar()
    num = q_factorial(n)
    den = q_factorial(r) * q_factorial(n - r)
    quot = q_divexact(num, den)
    if quot * den != num:
        raise ArithmeticError("internal error: inexact q-binomial division")
    return quot


def alternating_sum(n: int) -> QScalar:
    """sum_{r=0}^{n} (-1)^r [n r]; vanishes exactly for every odd n."""
    if n < 0:
        raise ValueError("alternating_sum requires n >= 0")
    out = QScalar()
    for r in range(n + 1):
        term = q_binomial(n, r)
        out = out + (term if r % 2 == 0 else -term)
    return out
