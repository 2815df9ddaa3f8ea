"""Sparse multivariate Laurent polynomials in q, w, z_1..z_n over Z.

Monomials are dense exponent tuples with a fixed slot order

    (q, w, z_1, z_2, ..., z_n)

so that hashing, addition of exponent vectors and lexicographic comparison
are cheap.  A polynomial is a dict mapping exponent tuples to nonzero int
coefficients; all arithmetic is exact.  The canonical form stores no zero
coefficients, and two polynomials are equal iff their term dicts are equal.

The symmetric group S_n acts by permuting the z-slots while fixing q and w;
``Permutation`` carries a cached sign and ``symmetrize`` sums (optionally
sign-weighted) over all of S_n with a reduction order that is independent of
the thread count.
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import permutations as _itertools_permutations
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

Monomial = Tuple[int, ...]
Terms = Dict[Monomial, int]


@dataclass(frozen=True, order=True)
class VarId:
    """One of the ring variables: q, w, or z_i (i >= 1)."""

    kind: str  # "q" | "w" | "z"
    index: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("q", "w", "z"):
            raise ValueError(f"unknown variable kind {self.kind!r}")
        if self.kind == "z" and self.index < 1:
            raise ValueError("z variables are indexed from 1")
        if self.kind != "z" and self.index != 0:
            raise ValueError(f"{self.kind} takes no index")

    @property
    def name(self) -> str:
        return self.kind if self.kind != "z" else f"z{self.index}"

    def __repr__(self) -> str:  # pragma: no cover - debugging nicety
        return f"VarId({self.name})"


Q = VarId("q")
W = VarId("w")


def Z(i: int) -> VarId:
    return VarId("z", i)


@dataclass(frozen=True)
class PolyContext:
    """Variable context: q, w and z_1..z_n_z, in that slot order."""

    n_z: int

    def __post_init__(self) -> None:
        if self.n_z < 0:
            raise ValueError("n_z must be >= 0")

    @property
    def n_slots(self) -> int:
        return self.n_z + 2

    def slot(self, var: VarId) -> int:
        if var.kind == "q":
            return 0
        if var.kind == "w":
            return 1
        if var.index > self.n_z:
            raise ValueError(f"{var.name} outside context with n_z={self.n_z}")
        return 1 + var.index

    def var_at(self, slot: int) -> VarId:
        if slot == 0:
            return Q
        if slot == 1:
            return W
        return Z(slot - 1)

    def zvars(self) -> List[VarId]:
        return [Z(i) for i in range(1, self.n_z + 1)]

    def zero_monomial(self) -> Monomial:
        return (0,) * self.n_slots

    def unit_monomial(self, var: VarId, exp: int = 1) -> Monomial:
        mono = [0] * self.n_slots
        mono[self.slot(var)] = exp
        return tuple(mono)


def _check_same_context(a: "LaurentPoly", b: "LaurentPoly") -> None:
    if a.ctx.n_z != b.ctx.n_z:
        raise ValueError(
            f"mismatched variable contexts (n_z={a.ctx.n_z} vs n_z={b.ctx.n_z})"
        )


def add_terms(a: Terms, b: Terms) -> Terms:
    out = dict(a)
    for mono, coef in b.items():
        new = out.get(mono, 0) + coef
        if new:
            out[mono] = new
        else:
            out.pop(mono, None)
    return out


def mul_terms(a: Terms, b: Terms) -> Terms:
    if len(a) > len(b):
        a, b = b, a
    out: Terms = {}
    get = out.get
    for mono_a, coef_a in a.items():
        for mono_b, coef_b in b.items():
            mono = tuple(x + y for x, y in zip(mono_a, mono_b))
            new = get(mono, 0) + coef_a * coef_b
            if new:
                out[mono] = new
            else:
                del out[mono]
    return out


def scale_terms(a: Terms, k: int) -> Terms:
    if k == 0:
        return {}
    return {mono: coef * k for mono, coef in a.items()}


class LaurentPoly:
    """Immutable-by-convention sparse Laurent polynomial."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: PolyContext, terms: Optional[Terms] = None) -> None:
        self.ctx = ctx
        self.terms: Terms = {}
        if terms:
            for mono, coef in terms.items():
                if coef:
                    if len(mono) != ctx.n_slots:
                        raise ValueError("monomial length does not match context")
                    self.terms[mono] = coef

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, ctx: PolyContext) -> "LaurentPoly":
        return cls(ctx)

    @classmethod
    def const(cls, ctx: PolyContext, c: int) -> "LaurentPoly":
        if c == 0:
            return cls(ctx)
        return cls(ctx, {ctx.zero_monomial(): c})

    @classmethod
    def var(cls, ctx: PolyContext, v: VarId, exp: int = 1, coef: int = 1) -> "LaurentPoly":
        if coef == 0:
            return cls(ctx)
        return cls(ctx, {ctx.unit_monomial(v, exp): coef})

    @classmethod
    def monomial(
        cls, ctx: PolyContext, exps: Mapping[VarId, int], coef: int = 1
    ) -> "LaurentPoly":
        if coef == 0:
            return cls(ctx)
        mono = [0] * ctx.n_slots
        for v, e in exps.items():
            mono[ctx.slot(v)] += e
        return cls(ctx, {tuple(mono): coef})

    # -- ring operations ----------------------------------------------

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        _check_same_context(self, other)
        return LaurentPoly(self.ctx, add_terms(self.terms, other.terms))

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(self.ctx, scale_terms(self.terms, -1))

    def __mul__(self, other: "LaurentPoly") -> "LaurentPoly":
        _check_same_context(self, other)
        return LaurentPoly(self.ctx, mul_terms(self.terms, other.terms))

    def scale(self, k: int) -> "LaurentPoly":
        return LaurentPoly(self.ctx, scale_terms(self.terms, k))

    def shift(self, var: VarId, exp: int) -> "LaurentPoly":
        """Multiply by var**exp."""
        if exp == 0:
            return self
        slot = self.ctx.slot(var)
        out: Terms = {}
        for mono, coef in self.terms.items():
            lst = list(mono)
            lst[slot] += exp
            out[tuple(lst)] = coef
        return LaurentPoly(self.ctx, out)

    # -- predicates / queries -----------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.ctx.n_z == other.ctx.n_z and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.ctx.n_z, frozenset(self.terms.items())))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        return f"LaurentPoly({to_text(self)!r})"

    def degree_span(self, var: VarId) -> Tuple[int, int]:
        """(min, max) exponent of var across terms; (0, 0) for the zero poly."""
        slot = self.ctx.slot(var)
        if not self.terms:
            return (0, 0)
        exps = [mono[slot] for mono in self.terms]
        return (min(exps), max(exps))

    def coeff_of_power(self, var: VarId, exp: int) -> "LaurentPoly":
        """Exact coefficient of var**exp (a polynomial not involving var)."""
        slot = self.ctx.slot(var)
        out: Terms = {}
        for mono, coef in self.terms.items():
            if mono[slot] == exp:
                lst = list(mono)
                lst[slot] = 0
                out[tuple(lst)] = coef
        return LaurentPoly(self.ctx, out)

    def powers_of(self, var: VarId) -> List[int]:
        slot = self.ctx.slot(var)
        return sorted({mono[slot] for mono in self.terms})

    # -- substitution ---------------------------------------------------

    def substitute_var(self, src: VarId, q_power: int, dst: VarId) -> "LaurentPoly":
        """Replace src by q**q_power * dst exactly (exponents relocate)."""
        if src == dst:
            raise ValueError("substitution source and destination coincide")
        s_slot = self.ctx.slot(src)
        d_slot = self.ctx.slot(dst)
        out: Terms = {}
        for mono, coef in self.terms.items():
            e = mono[s_slot]
            lst = list(mono)
            lst[s_slot] = 0
            lst[d_slot] += e
            lst[0] += q_power * e
            key = tuple(lst)
            new = out.get(key, 0) + coef
            if new:
                out[key] = new
            else:
                del out[key]
        return LaurentPoly(self.ctx, out)

    # -- permutation action -------------------------------------------

    def apply_permutation(self, perm: "Permutation") -> "LaurentPoly":
        """Relabel every z_i exponent to z_{perm(i)}; q and w are fixed."""
        if perm.degree != self.ctx.n_z:
            raise ValueError(
                f"permutation degree {perm.degree} does not match n_z={self.ctx.n_z}"
            )
        images = perm.images
        out: Terms = {}
        for mono, coef in self.terms.items():
            lst = list(mono[:2]) + [0] * self.ctx.n_z
            for i in range(self.ctx.n_z):
                lst[2 + images[i]] = mono[2 + i]
            out[tuple(lst)] = coef
        return LaurentPoly(self.ctx, out)

    # -- modular evaluation --------------------------------------------

    def eval_mod_p(self, assignment: Mapping[VarId, int], p: int) -> int:
        """Evaluate at the assignment in GF(p); negative exponents invert."""
        values = [0] * self.ctx.n_slots
        seen = [False] * self.ctx.n_slots
        for var, val in assignment.items():
            slot = self.ctx.slot(var)
            values[slot] = val % p
            seen[slot] = True
        total = 0
        for mono, coef in self.terms.items():
            prod = coef % p
            for slot, e in enumerate(mono):
                if e == 0:
                    continue
                if not seen[slot]:
                    raise ValueError(
                        f"no value assigned to {self.ctx.var_at(slot).name}"
                    )
                base = values[slot]
                if base == 0 and e < 0:
                    raise ValueError(
                        f"zero assigned to {self.ctx.var_at(slot).name} with negative exponent"
                    )
                prod = (prod * pow(base, e, p)) % p
            total = (total + prod) % p
        return total


# ---------------------------------------------------------------------------
# permutations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Permutation:
    """A bijection on {1..n}, stored as 0-indexed images.

    ``images[i]`` is the 0-indexed image of letter i+1; ``perm(i)`` uses
    1-indexed letters to match the z_i naming.
    """

    images: Tuple[int, ...]
    sign: int = field(init=False)

    def __post_init__(self) -> None:
        n = len(self.images)
        if sorted(self.images) != list(range(n)):
            raise ValueError("images do not form a bijection")
        inversions = 0
        for i in range(n):
            for j in range(i + 1, n):
                if self.images[i] > self.images[j]:
                    inversions += 1
        object.__setattr__(self, "sign", -1 if inversions % 2 else 1)

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, letter: int) -> int:
        return self.images[letter - 1] + 1

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def transposition(cls, n: int, a: int, b: int) -> "Permutation":
        images = list(range(n))
        images[a - 1], images[b - 1] = images[b - 1], images[a - 1]
        return cls(tuple(images))

    @classmethod
    def from_one_indexed(cls, images: Sequence[int]) -> "Permutation":
        return cls(tuple(i - 1 for i in images))

    def compose(self, other: "Permutation") -> "Permutation":
        """(self o other)(i) = self(other(i))."""
        if self.degree != other.degree:
            raise ValueError("degree mismatch")
        return Permutation(tuple(self.images[other.images[i]] for i in range(self.degree)))

    def inverse(self) -> "Permutation":
        images = [0] * self.degree
        for i, img in enumerate(self.images):
            images[img] = i
        return Permutation(tuple(images))


def all_permutations(n: int) -> List[Permutation]:
    """All of S_n in lexicographic order of image tuples."""
    return [Permutation(images) for images in _itertools_permutations(range(n))]


def symmetrize(
    a: LaurentPoly, n: int, signed: bool, threads: int = 1
) -> LaurentPoly:
    """Sum of sigma.a over S_n, each weighted by sign(sigma) when signed.

    The permutation list is fixed (lexicographic) and partial sums are
    reduced in chunk order, so the result is identical for every thread
    count.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if a.ctx.n_z != n:
        raise ValueError(f"polynomial context n_z={a.ctx.n_z} does not match n={n}")
    perms = all_permutations(n)

    def partial(chunk: List[Permutation]) -> Terms:
        acc: Terms = {}
        for perm in chunk:
            image = a.apply_permutation(perm)
            contrib = (
                scale_terms(image.terms, perm.sign)
                if signed and perm.sign < 0
                else image.terms
            )
            acc = add_terms(acc, contrib)
        return acc

    if threads <= 1 or len(perms) < 4:
        return LaurentPoly(a.ctx, partial(perms))

    chunk_size = max(1, (len(perms) + threads - 1) // threads)
    chunks = [perms[i : i + chunk_size] for i in range(0, len(perms), chunk_size)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        pieces = list(pool.map(partial, chunks))
    total: Terms = {}
    for piece in pieces:  # fixed chunk order -> deterministic reduction
        total = add_terms(total, piece)
    return LaurentPoly(a.ctx, total)


def vandermonde(ctx: PolyContext) -> LaurentPoly:
    """prod_{i<j} (z_i - z_j)."""
    out = LaurentPoly.const(ctx, 1)
    for i in range(1, ctx.n_z + 1):
        for j in range(i + 1, ctx.n_z + 1):
            out = out * (LaurentPoly.var(ctx, Z(i)) - LaurentPoly.var(ctx, Z(j)))
    return out


# ---------------------------------------------------------------------------
# text serialization
# ---------------------------------------------------------------------------

_TERM_RE = re.compile(r"^(-?\d+)((?: [qwz][0-9]*\^-?\d+)*)$")
_FACTOR_RE = re.compile(r"([qwz])([0-9]*)\^(-?\d+)")


def to_text(a: LaurentPoly) -> str:
    """Canonical text form: terms in descending lex order of exponent tuples.

    Each term renders as ``<coef> q^<a> w^<b> z1^<c1> ...`` with zero
    exponents omitted and the integer coefficient always printed.  The zero
    polynomial renders as ``0``.  Round-trips exactly through ``from_text``.
    """
    if not a.terms:
        return "0"
    parts = []
    for mono in sorted(a.terms, reverse=True):
        coef = a.terms[mono]
        bits = [str(coef)]
        for slot, e in enumerate(mono):
            if e != 0:
                bits.append(f"{a.ctx.var_at(slot).name}^{e}")
        parts.append(" ".join(bits))
    return " + ".join(parts)


def from_text(ctx: PolyContext, text: str) -> LaurentPoly:
    """Exact inverse of ``to_text`` for the given context."""
    text = text.strip()
    if text == "0":
        return LaurentPoly(ctx)
    terms: Terms = {}
    for chunk in text.split(" + "):
        match = _TERM_RE.match(chunk)
        if not match:
            raise ValueError(f"unparseable term {chunk!r}")
        coef = int(match.group(1))
        mono = [0] * ctx.n_slots
        for kind, idx, exp in _FACTOR_RE.findall(match.group(2)):
            var = VarId(kind, int(idx) if idx else 0)
            mono[ctx.slot(var)] = int(exp)
        key = tuple(mono)
        terms[key] = terms.get(key, 0) + coef
    return LaurentPoly(ctx, terms)
