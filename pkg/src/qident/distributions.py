"""Truncated bilateral formal series: directed expansions and delta calculus.

A rational factor 1/(A - B) never appears as such; it always carries an
expansion direction ("lead dominant"):

    inv(A, B) = sum_{n>=0} A^(-n-1) B^n.

The formal delta is the bilateral companion

    delta(a, b) = sum_{n in Z} a^(-n-1) b^n = inv(a, b) + inv(b, a),

so flipping a direction costs a delta:  inv(A, B) = -inv(B, A) + delta(B, A).

Coefficients live in exact Laurent polynomials in q truncated below a floor:
a ``CoeffSeries`` is correct modulo O(q^(-T-1)).  This q-adic truncation is
the formal counterpart of working with |q| large; geometric tails in q^(-1)
are cut, every retained digit is exact.

``coeff_of_term`` extracts one monomial coefficient from a product of
directed inverses, deltas, degenerate (same-variable) inverses and a
polynomial numerator without expanding anything: the expansion indices
satisfy one linear equation per ring variable, so the retained solutions are
enumerated by interval propagation over those equations plus the q-order
cutoff.  Products whose retained index set is infinite are not formal
distributions at all; they raise ``DivergentTermError``.

``proof_replay`` rewrites the distribution identity stage by stage: each
stage re-expands the factors facing the currently active variable, the
delta-free part of the split must vanish identically (it is the polynomial
identity read in those directions), and each fired delta eliminates its
variable from the remaining factors.  Stray deltas whose two arguments also
appear as a numerator difference are annihilated by that factor and drop
out.  After the last stage only scalar multiples of full delta chains
remain, which are compared against the closed-form right-hand side.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import permutations
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .laurent import (
    LaurentPoly,
    Monomial,
    Permutation,
    PolyContext,
    Q,
    VarId,
    W,
    Z,
    all_permutations,
    to_text,
    vandermonde,
)
from .qnum import QScalar, q_binomial
from .reports import VerifyReport


class DivergentTermError(ArithmeticError):
    """The requested coefficient is an infinite sum: the factor product is
    not a well-defined formal distribution."""


class ReplayError(RuntimeError):
    """A rewrite stage produced an object outside the calculus (an invalid
    substitution or an unexpected factor shape)."""


# ---------------------------------------------------------------------------
# factor types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonomialRef:
    """q^q_power * var, with var one of w, z_1..z_n (never q itself)."""

    q_power: int
    var: VarId

    def __post_init__(self) -> None:
        if self.var.kind == "q":
            raise ValueError("a MonomialRef names a non-q variable")

    def describe(self) -> str:
        if self.q_power == 0:
            return self.var.name
        return f"q^{self.q_power} {self.var.name}"


@dataclass(frozen=True)
class DirectedInverse:
    """1/(lead - sub) expanded lead-dominant: sum_{n>=0} lead^(-n-1) sub^n."""

    lead: MonomialRef
    sub: MonomialRef

    def __post_init__(self) -> None:
        if self.lead.var == self.sub.var:
            raise ValueError("directed inverse needs two distinct variables")

    def describe(self) -> str:
        return f"1/({self.lead.describe()} - {self.sub.describe()})"


@dataclass(frozen=True)
class GeomInverse:
    """1/(q^lead_q v - q^sub_q v) = v^(-1) / (q^lead_q - q^sub_q).

    Appears when a delta substitution collapses both sides of a directed
    inverse onto one variable.  The directed expansion converges q-adically
    iff lead_q > sub_q; the constructor enforces that.
    """

    var: VarId
    lead_q: int
    sub_q: int

    def __post_init__(self) -> None:
        if self.var.kind == "q":
            raise ValueError("a GeomInverse names a non-q variable")
        if self.lead_q <= self.sub_q:
            raise ReplayError(
                f"divergent degenerate inverse on {self.var.name}: "
                f"lead q^{self.lead_q} vs sub q^{self.sub_q}"
            )

    def series(self, floor: int) -> QScalar:
        """q-series of 1/(q^L - q^S) down to exponent >= floor (L > S)."""
        step = self.lead_q - self.sub_q
        coeffs: Dict[int, int] = {}
        exp = -self.lead_q
        while exp >= floor:
            coeffs[exp] = 1
            exp -= step
        return QScalar(coeffs)

    def max_exp(self) -> int:
        return -self.lead_q

    def describe(self) -> str:
        return f"1/(q^{self.lead_q} {self.var.name} - q^{self.sub_q} {self.var.name})"


@dataclass(frozen=True)
class DeltaFactor:
    """delta(a, b) = sum_{n in Z} a^(-n-1) b^n; symmetric in (a, b)."""

    a: MonomialRef
    b: MonomialRef

    def __post_init__(self) -> None:
        if self.a.var == self.b.var:
            raise ValueError("delta needs two distinct variables")

    def describe(self) -> str:
        return f"delta({self.a.describe()}, {self.b.describe()})"


@dataclass
class DistTerm:
    """scalar * prod(inverses) * prod(geoms) * numerator * prod(deltas)."""

    scalar: QScalar
    inverses: Tuple[DirectedInverse, ...]
    numerator: LaurentPoly
    deltas: Tuple[DeltaFactor, ...] = ()
    geoms: Tuple[GeomInverse, ...] = ()

    @property
    def ctx(self) -> PolyContext:
        return self.numerator.ctx

    def describe(self) -> str:
        bits = [f"scalar[{len(self.scalar.coeffs)} terms]"]
        bits += [f.describe() for f in self.inverses]
        bits += [g.describe() for g in self.geoms]
        bits.append(f"num({to_text(self.numerator)})")
        bits += [d.describe() for d in self.deltas]
        return " * ".join(bits)


@dataclass(frozen=True)
class TruncationSpec:
    """Per-variable exponent windows plus the q-adic order T."""

    window: Mapping[VarId, Tuple[int, int]]
    q_order: int

    def __post_init__(self) -> None:
        if self.q_order < 0:
            raise ValueError("q_order must be >= 0")
        for var, (lo, hi) in self.window.items():
            if lo > hi:
                raise ValueError(f"empty window for {var.name}")

    @classmethod
    def symmetric(cls, ctx: PolyContext, half_width: int, q_order: int) -> "TruncationSpec":
        if half_width < 1:
            raise ValueError("half_width must be >= 1")
        window = {W: (-half_width, half_width)}
        for zv in ctx.zvars():
            window[zv] = (-half_width, half_width)
        return cls(window, q_order)

    def bounds(self, var: VarId) -> Tuple[int, int]:
        if var not in self.window:
            raise ValueError(f"no window for {var.name}")
        return self.window[var]


@dataclass
class CoeffSeries:
    """Exact q-Laurent coefficient modulo O(q^(-accuracy-1))."""

    value: QScalar
    accuracy: int

    def __post_init__(self) -> None:
        self.value = self.value.truncate_below(-self.accuracy)

    def matches(self, other: "CoeffSeries") -> bool:
        acc = min(self.accuracy, other.accuracy)
        return self.value.truncate_below(-acc) == other.value.truncate_below(-acc)

    def shifted(self, k: int) -> "CoeffSeries":
        """Multiply by q^k; positive k loses k digits of accuracy."""
        return CoeffSeries(self.value.shift(k), self.accuracy - max(0, k))

    def is_zero(self) -> bool:
        return self.value.is_zero()

    def to_text(self) -> str:
        ctx = PolyContext(0)
        return f"{to_text(self.value.to_laurent(ctx))} + O(q^{-self.accuracy - 1})"


# ---------------------------------------------------------------------------
# windowed expansions (reference semantics; the compiler below never windows)
# ---------------------------------------------------------------------------


def _zero_varvec(ctx: PolyContext) -> Monomial:
    return (0,) * ctx.n_slots


def expand_inverse(
    f: DirectedInverse, spec: TruncationSpec, ctx: PolyContext
) -> Dict[Monomial, CoeffSeries]:
    """Windowed monomial table of inv(lead, sub); q-exponents are exact."""
    lead_lo, lead_hi = spec.bounds(f.lead.var)
    sub_lo, sub_hi = spec.bounds(f.sub.var)
    lead_slot = ctx.slot(f.lead.var)
    sub_slot = ctx.slot(f.sub.var)
    out: Dict[Monomial, CoeffSeries] = {}
    n = 0
    while True:
        lead_exp = -n - 1
        sub_exp = n
        if lead_exp < lead_lo:
            break
        if sub_exp > sub_hi:
            break
        if lead_exp <= lead_hi and sub_exp >= sub_lo:
            mono = list(_zero_varvec(ctx))
            mono[lead_slot] = lead_exp
            mono[sub_slot] = sub_exp
            qexp = -f.lead.q_power * (n + 1) + f.sub.q_power * n
            out[tuple(mono)] = CoeffSeries(QScalar.monomial(qexp), spec.q_order)
        n += 1
    return out


def expand_delta(
    d: DeltaFactor, spec: TruncationSpec, ctx: PolyContext
) -> Dict[Monomial, CoeffSeries]:
    """Windowed monomial table of delta(a, b): every bilateral index with
    both exponents inside the window."""
    a_lo, a_hi = spec.bounds(d.a.var)
    b_lo, b_hi = spec.bounds(d.b.var)
    a_slot = ctx.slot(d.a.var)
    b_slot = ctx.slot(d.b.var)
    out: Dict[Monomial, CoeffSeries] = {}
    # a-exponent is -n-1, b-exponent is n
    n_lo = max(-(a_hi + 1), b_lo)
    n_hi = min(-(a_lo + 1), b_hi)
    for n in range(n_lo, n_hi + 1):
        mono = list(_zero_varvec(ctx))
        mono[a_slot] = -n - 1
        mono[b_slot] = n
        qexp = -d.a.q_power * (n + 1) + d.b.q_power * n
        out[tuple(mono)] = CoeffSeries(QScalar.monomial(qexp), spec.q_order)
    return out


def series_add(
    a: Dict[Monomial, CoeffSeries], b: Dict[Monomial, CoeffSeries]
) -> Dict[Monomial, CoeffSeries]:
    out = dict(a)
    for mono, cs in b.items():
        if mono in out:
            acc = min(out[mono].accuracy, cs.accuracy)
            out[mono] = CoeffSeries(out[mono].value + cs.value, acc)
        else:
            out[mono] = cs
    return out


def series_mul(
    a: Dict[Monomial, CoeffSeries],
    b: Dict[Monomial, CoeffSeries],
    spec: TruncationSpec,
    ctx: PolyContext,
) -> Dict[Monomial, CoeffSeries]:
    """Windowed product of two monomial tables (naive reference path)."""
    out: Dict[Monomial, QScalar] = {}
    limits: List[Tuple[Optional[int], Optional[int]]] = [(None, None)] * ctx.n_slots
    for var, (lo, hi) in spec.window.items():
        limits[ctx.slot(var)] = (lo, hi)
    for mono_a, cs_a in a.items():
        for mono_b, cs_b in b.items():
            mono = tuple(x + y for x, y in zip(mono_a, mono_b))
            keep = True
            for slot, (lo, hi) in enumerate(limits):
                if lo is not None and not (lo <= mono[slot] <= hi):
                    keep = False
                    break
            if not keep:
                continue
            prod = cs_a.value * cs_b.value
            out[mono] = out.get(mono, QScalar()) + prod
    return {
        mono: CoeffSeries(val, spec.q_order)
        for mono, val in out.items()
        if not val.truncate_below(-spec.q_order).is_zero()
    }


def poly_to_series(p: LaurentPoly, spec: TruncationSpec) -> Dict[Monomial, CoeffSeries]:
    """A Laurent polynomial as an exact monomial table (q folded into the
    coefficient)."""
    out: Dict[Monomial, QScalar] = {}
    for mono, coef in p.terms.items():
        key = (0,) + mono[1:]
        out[key] = out.get(key, QScalar()) + QScalar.monomial(mono[0], coef)
    return {mono: CoeffSeries(val, spec.q_order) for mono, val in out.items()}


def delta_property_check(
    f: LaurentPoly,
    spec: TruncationSpec,
    delta: Optional[DeltaFactor] = None,
) -> bool:
    """Windowed check of f(a) delta(a, b) = f(b) delta(a, b).

    f must involve a single variable; the comparison runs on the window
    interior (shrunk by f's largest exponent) where the window loses
    nothing, and the q-order is raised internally so that coefficients
    compare exactly.
    """
    ctx = f.ctx
    if delta is None:
        delta = DeltaFactor(MonomialRef(0, Z(1)), MonomialRef(0, W))
    fvars = [
        ctx.var_at(slot)
        for slot in range(1, ctx.n_slots)
        if any(mono[slot] for mono in f.terms)
    ]
    if len(fvars) > 1:
        raise ValueError("delta_property_check needs a single-variable f")
    fvar = fvars[0] if fvars else delta.a.var
    if fvar == delta.a.var:
        other = delta.b.var
        q_shift = delta.b.q_power - delta.a.q_power
    elif fvar == delta.b.var:
        other = delta.a.var
        q_shift = delta.a.q_power - delta.b.q_power
    else:
        raise ValueError("f must involve one of the delta's variables")
    f_sub = f.substitute_var(fvar, q_shift, other)
    # f is a polynomial and every windowed delta entry is a single q-power,
    # so the comparison can be made genuinely exact: raise the q-order past
    # every exponent either product can reach, then nothing truncates
    slope = abs(delta.b.q_power - delta.a.q_power)
    widest = max(hi - lo for lo, hi in spec.window.values())
    q_span = max(
        [0] + [abs(mono[0]) for mono in f.terms] + [abs(mono[0]) for mono in f_sub.terms]
    )
    exact = TruncationSpec(
        window=spec.window,
        q_order=spec.q_order + slope * (widest + 2) + abs(delta.a.q_power) + q_span + 2,
    )
    table = expand_delta(delta, exact, ctx)
    lhs = series_mul(poly_to_series(f, exact), table, exact, ctx)
    rhs = series_mul(poly_to_series(f_sub, exact), table, exact, ctx)
    # both products shift the delta's support by up to f's largest absolute
    # exponent, so only points at least that far from the window edge are
    # present on both sides
    lo_f, hi_f = f.degree_span(fvar)
    reach = max(abs(lo_f), abs(hi_f))
    for mono in set(lhs) | set(rhs):
        interior = True
        for var, (lo, hi) in spec.window.items():
            e = mono[ctx.slot(var)]
            if not (lo + reach <= e <= hi - reach):
                interior = False
                break
        if not interior:
            continue
        got = lhs.get(mono)
        want = rhs.get(mono)
        gv = got.value if got else QScalar()
        wv = want.value if want else QScalar()
        if gv != wv:
            return False
    return True


def reexpand_split(f: DirectedInverse) -> Tuple[DirectedInverse, DeltaFactor]:
    """inv(lead, sub) = -inv(sub, lead) + delta(sub, lead).

    Only z-led factors are ever re-expanded (the w-led family keeps its
    direction throughout); other shapes are rejected.
    """
    if f.lead.var.kind != "z":
        raise ValueError(f"cannot re-expand {f.describe()}: lead must be a z variable")
    return DirectedInverse(f.sub, f.lead), DeltaFactor(f.sub, f.lead)


def split_exactness_check(
    f: DirectedInverse, spec: TruncationSpec, ctx: PolyContext
) -> bool:
    """expand(f) + expand(flipped) == expand(delta) on the full window."""
    flipped, delta = reexpand_split(f)
    left = series_add(expand_inverse(f, spec, ctx), expand_inverse(flipped, spec, ctx))
    right = expand_delta(delta, spec, ctx)
    keys = set(left) | set(right)
    for mono in keys:
        lv = left.get(mono)
        rv = right.get(mono)
        lval = lv.value if lv else QScalar()
        rval = rv.value if rv else QScalar()
        if lval != rval:
            return False
    return True


# ---------------------------------------------------------------------------
# the coefficient compiler
# ---------------------------------------------------------------------------

_NEG_INF = None  # interval endpoints: None encodes the missing bound


def _normalize_target(
    ctx: PolyContext, target: Union[Mapping[VarId, int], Sequence[int]]
) -> Tuple[int, ...]:
    if isinstance(target, Mapping):
        vec = [0] * ctx.n_slots
        for var, e in target.items():
            if var.kind == "q":
                raise ValueError("targets do not assign q")
            vec[ctx.slot(var)] = e
        return tuple(vec)
    vec = tuple(target)
    if len(vec) == ctx.n_slots - 1:  # (w, z_1..z_n) without the q slot
        return (0,) + vec
    if len(vec) != ctx.n_slots or vec[0] != 0:
        raise ValueError("bad target vector")
    return vec


@dataclass
class _Slot:
    lead_slot: int
    sub_slot: int
    slope: int  # d(q)/d(index)
    q_offset: int  # q at index 0
    lower: Optional[int]  # 0 for inverses, None (unbounded) for deltas


def _term_slots(term: DistTerm, ctx: PolyContext) -> Tuple[List[_Slot], int]:
    slots: List[_Slot] = []
    q_base = 0
    for inv in term.inverses:
        slots.append(
            _Slot(
                lead_slot=ctx.slot(inv.lead.var),
                sub_slot=ctx.slot(inv.sub.var),
                slope=inv.sub.q_power - inv.lead.q_power,
                q_offset=-inv.lead.q_power,
                lower=0,
            )
        )
    for d in term.deltas:
        slots.append(
            _Slot(
                lead_slot=ctx.slot(d.a.var),
                sub_slot=ctx.slot(d.b.var),
                slope=d.b.q_power - d.a.q_power,
                q_offset=-d.a.q_power,
                lower=_NEG_INF,
            )
        )
    for slot in slots:
        q_base += slot.q_offset
    return slots, q_base


def _interval_propagate(
    slots: List[_Slot],
    equations: List[Tuple[List[Tuple[int, int]], int]],
    qlow: Optional[int],
    intervals: List[List[Optional[int]]],
) -> bool:
    """Tighten index intervals against the equations and the q cutoff.

    Returns False when some interval empties (no solutions).  Equation form:
    sum of coef*index over the listed (factor, coef) pairs equals the rhs.
    """
    changed = True
    passes = 0
    limit = 6 * (len(slots) + len(equations)) + 12
    while changed and passes < limit:
        changed = False
        passes += 1
        for coefs, rhs in equations:
            for f_idx, coef in coefs:
                rest_lo = 0
                rest_hi = 0
                ok_lo = ok_hi = True
                for g_idx, g_coef in coefs:
                    if g_idx == f_idx:
                        continue
                    g_lo, g_hi = intervals[g_idx]
                    if g_coef > 0:
                        if g_lo is None:
                            ok_lo = False
                        else:
                            rest_lo += g_coef * g_lo
                        if g_hi is None:
                            ok_hi = False
                        else:
                            rest_hi += g_coef * g_hi
                    else:
                        if g_hi is None:
                            ok_lo = False
                        else:
                            rest_lo += g_coef * g_hi
                        if g_lo is None:
                            ok_hi = False
                        else:
                            rest_hi += g_coef * g_lo
                # coef * idx = rhs - rest;  rest in [rest_lo, rest_hi]
                if ok_hi:  # idx bound from rest_hi
                    bound = rhs - rest_hi
                    if coef > 0:
                        new_lo = -(-bound // coef) if bound % coef else bound // coef
                        lo, hi = intervals[f_idx]
                        if lo is None or new_lo > lo:
                            intervals[f_idx][0] = new_lo
                            changed = True
                    else:
                        new_hi = bound // coef
                        lo, hi = intervals[f_idx]
                        if hi is None or new_hi < hi:
                            intervals[f_idx][1] = new_hi
                            changed = True
                if ok_lo:
                    bound = rhs - rest_lo
                    if coef > 0:
                        new_hi = bound // coef
                        lo, hi = intervals[f_idx]
                        if hi is None or new_hi < hi:
                            intervals[f_idx][1] = new_hi
                            changed = True
                    else:
                        new_lo = -(-(bound) // coef) if bound % coef else bound // coef
                        lo, hi = intervals[f_idx]
                        if lo is None or new_lo > lo:
                            intervals[f_idx][0] = new_lo
                            changed = True
        if qlow is not None:
            # sum slope_f * idx_f >= qlow
            for f_idx, slot in enumerate(slots):
                if slot.slope == 0:
                    continue
                rest_hi = 0
                ok = True
                for g_idx, g in enumerate(slots):
                    if g_idx == f_idx or g.slope == 0:
                        continue
                    g_lo, g_hi = intervals[g_idx]
                    if g.slope > 0:
                        if g_hi is None:
                            ok = False
                            break
                        rest_hi += g.slope * g_hi
                    else:
                        if g_lo is None:
                            ok = False
                            break
                        rest_hi += g.slope * g_lo
                if not ok:
                    continue
                bound = qlow - rest_hi  # slope_f * idx_f >= bound
                if slot.slope > 0:
                    new_lo = -(-bound // slot.slope)
                    lo, hi = intervals[f_idx]
                    if lo is None or new_lo > lo:
                        intervals[f_idx][0] = new_lo
                        changed = True
                else:
                    new_hi = bound // slot.slope
                    lo, hi = intervals[f_idx]
                    if hi is None or new_hi < hi:
                        intervals[f_idx][1] = new_hi
                        changed = True
        for lo, hi in intervals:
            if lo is not None and hi is not None and lo > hi:
                return False
    return True


def _enumerate_solutions(
    slots: List[_Slot],
    equations: List[Tuple[List[Tuple[int, int]], int]],
    qlow: int,
    intervals: List[List[Optional[int]]],
    term_desc: str,
) -> Iterable[Tuple[int, ...]]:
    """DFS over index assignments with propagation at every level."""
    if not _interval_propagate(slots, equations, qlow, intervals):
        return
    unbounded = [
        i for i, (lo, hi) in enumerate(intervals) if lo is None or hi is None
    ]
    if unbounded:
        raise DivergentTermError(
            f"infinite retained index set (factor {unbounded[0]}) in {term_desc}"
        )
    open_idx = [i for i, (lo, hi) in enumerate(intervals) if lo < hi]
    if not open_idx:
        assignment = tuple(intervals[i][0] for i in range(len(intervals)))  # type: ignore[misc]
        for coefs, rhs in equations:
            if sum(coef * assignment[f] for f, coef in coefs) != rhs:
                return
        if sum(s.slope * assignment[i] for i, s in enumerate(slots)) < qlow:
            return
        yield assignment
        return
    pivot = min(open_idx, key=lambda i: intervals[i][1] - intervals[i][0])  # type: ignore[operator]
    lo, hi = intervals[pivot]
    for val in range(lo, hi + 1):  # type: ignore[arg-type]
        child = [list(iv) for iv in intervals]
        child[pivot] = [val, val]
        yield from _enumerate_solutions(slots, equations, qlow, child, term_desc)


def coeff_of_term(
    term: DistTerm,
    target: Union[Mapping[VarId, int], Sequence[int]],
    q_order: int,
) -> CoeffSeries:
    """Exact coefficient of the target monomial, mod O(q^(-q_order-1)).

    Enumerates the expansion indices directly: each factor touches two ring
    variables, each ring variable contributes one linear equation, and the
    q-order cutoff bounds whatever the equations leave free.  Raises
    ``DivergentTermError`` when infinitely many index tuples survive the
    cutoff (the product is not a distribution).
    """
    ctx = term.ctx
    tvec = _normalize_target(ctx, target)
    if not term.scalar.coeffs:
        return CoeffSeries(QScalar(), q_order)
    slots, q_base = _term_slots(term, ctx)

    geom_offsets = [0] * ctx.n_slots
    geom_max = 0
    for g in term.geoms:
        geom_offsets[ctx.slot(g.var)] -= 1
        geom_max += g.max_exp()
    scalar_max = term.scalar.max_exp()
    headroom = scalar_max + geom_max
    qfloor_enum = -q_order - headroom

    # per-variable equations over the factor indices
    eq_coefs: Dict[int, List[Tuple[int, int]]] = {}
    eq_const: Dict[int, int] = {}
    for f_idx, slot in enumerate(slots):
        eq_coefs.setdefault(slot.lead_slot, []).append((f_idx, -1))
        eq_const[slot.lead_slot] = eq_const.get(slot.lead_slot, 0) - 1
        eq_coefs.setdefault(slot.sub_slot, []).append((f_idx, 1))

    # connected components of the variable/factor incidence graph
    parent = list(range(ctx.n_slots))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for slot in slots:
        ra, rb = find(slot.lead_slot), find(slot.sub_slot)
        if ra != rb:
            parent[ra] = rb

    total = QScalar()
    for mono, coef in sorted(term.numerator.terms.items()):
        mu_q = mono[0]
        rhs_by_slot: Dict[int, int] = {}
        feasible = True
        comp_sum: Dict[int, int] = {}
        for vslot in range(1, ctx.n_slots):
            rhs = tvec[vslot] - mono[vslot] - geom_offsets[vslot] - eq_const.get(vslot, 0)
            if vslot not in eq_coefs:
                if rhs != 0:
                    feasible = False
                    break
                continue
            rhs_by_slot[vslot] = rhs
            root = find(vslot)
            comp_sum[root] = comp_sum.get(root, 0) + rhs
        if not feasible:
            continue
        # flow conservation: each factor adds -1/+1 inside one component,
        # so a component with nonzero rhs-sum has no solutions at all
        if any(v != 0 for v in comp_sum.values()):
            continue
        equations = [(eq_coefs[vslot], rhs_by_slot[vslot]) for vslot in sorted(rhs_by_slot)]
        intervals = [[slot.lower, None] for slot in slots]
        qlow = qfloor_enum - q_base - mu_q
        for assignment in _enumerate_solutions(
            slots, equations, qlow, intervals, term.describe()
        ):
            qexp = q_base + mu_q + sum(
                s.slope * assignment[i] for i, s in enumerate(slots)
            )
            total = total + QScalar.monomial(qexp, coef)

    return CoeffSeries(_fold_scalar_factors(total, term, q_order), q_order)


def _fold_scalar_factors(value: QScalar, term: DistTerm, q_order: int) -> QScalar:
    """value * scalar * prod(geom series), truncated below -q_order.

    Each geometric series is expanded just deep enough: a digit at -q_order
    can still receive contributions q_exp(series) + (heads of everything
    else), so each floor subtracts the other factors' maximal exponents.
    """
    result = value * term.scalar
    tail_max = [g.max_exp() for g in term.geoms]
    for i, g in enumerate(term.geoms):
        if not result.coeffs:
            return QScalar()
        rest = sum(tail_max[i + 1 :])
        result = result * g.series(-q_order - result.max_exp() - rest)
    return result


# ---------------------------------------------------------------------------
# naive windowed oracle (reference implementation for small products)
# ---------------------------------------------------------------------------


def naive_coeff_of_term(
    term: DistTerm,
    target: Union[Mapping[VarId, int], Sequence[int]],
    q_order: int,
    half_width: int,
) -> CoeffSeries:
    """Expand every factor on a window and multiply the truncated tables.

    Only meaningful when the factor product is well-defined and the window
    is wide enough; tests double the window to confirm stability.
    """
    ctx = term.ctx
    tvec = _normalize_target(ctx, target)
    spec = TruncationSpec.symmetric(ctx, half_width, q_order + 4 * half_width + 8)
    tables: List[Dict[Monomial, CoeffSeries]] = []
    for inv in term.inverses:
        tables.append(expand_inverse(inv, spec, ctx))
    for d in term.deltas:
        tables.append(expand_delta(d, spec, ctx))
    acc: Dict[Monomial, CoeffSeries] = {
        _zero_varvec(ctx): CoeffSeries(QScalar.one(), spec.q_order)
    }
    for table in tables:
        acc = series_mul(acc, table, spec, ctx)
    acc = series_mul(acc, poly_to_series(term.numerator, spec), spec, ctx)
    value = QScalar()
    entry = acc.get(tvec)
    if entry is not None:
        value = entry.value
    return CoeffSeries(_fold_scalar_factors(value, term, q_order), q_order)


# ---------------------------------------------------------------------------
# the distribution identity
# ---------------------------------------------------------------------------


def dist_lhs_terms(m: int) -> List[DistTerm]:
    """The (m+1)!(m+2) left-hand summands, with the written directions:
    z-led factors 1/(q^-m z_i - w) for i <= k, w-led factors
    1/(q^-m w - z_j) for j > k, pair factors 1/(q^2 z_i - z_j), and the
    permuted difference product as numerator."""
    if m < 0:
        raise ValueError("m must be >= 0")
    n = m + 1
    ctx = PolyContext(n)
    vand = vandermonde(ctx)
    out: List[DistTerm] = []
    for sigma in all_permutations(n):
        numer = vand.apply_permutation(sigma)
        letters = [sigma(i) for i in range(1, n + 1)]
        for k in range(n + 1):
            inverses: List[DirectedInverse] = []
            for i in range(1, k + 1):
                inverses.append(
                    DirectedInverse(
                        MonomialRef(-m, Z(letters[i - 1])), MonomialRef(0, W)
                    )
                )
            for j in range(k + 1, n + 1):
                inverses.append(
                    DirectedInverse(
                        MonomialRef(-m, W), MonomialRef(0, Z(letters[j - 1]))
                    )
                )
            for i in range(n):
                for j in range(i + 1, n):
                    inverses.append(
                        DirectedInverse(
                            MonomialRef(2, Z(letters[i])), MonomialRef(0, Z(letters[j]))
                        )
                    )
            out.append(
                DistTerm(
                    scalar=q_binomial(n, k),
                    inverses=tuple(inverses),
                    numerator=numer,
                )
            )
    return out


def dist_rhs_terms(m: int) -> List[DistTerm]:
    """The (m+1)! right-hand summands: q^(m-1) times the delta chain
    delta(w, q^-m z_s1) delta(z_s1, q^2 z_s2) ... delta(z_sm, q^2 z_s(m+1))."""
    if m < 0:
        raise ValueError("m must be >= 0")
    n = m + 1
    ctx = PolyContext(n)
    one = LaurentPoly.const(ctx, 1)
    out: List[DistTerm] = []
    for sigma in all_permutations(n):
        letters = [sigma(i) for i in range(1, n + 1)]
        deltas = [DeltaFactor(MonomialRef(0, W), MonomialRef(-m, Z(letters[0])))]
        for i in range(m):
            deltas.append(
                DeltaFactor(
                    MonomialRef(0, Z(letters[i])), MonomialRef(2, Z(letters[i + 1]))
                )
            )
        out.append(
            DistTerm(
                scalar=QScalar.monomial(m - 1),
                inverses=(),
                numerator=one,
                deltas=tuple(deltas),
            )
        )
    return out


def numerator_shrink(terms: Sequence[DistTerm]) -> int:
    """Window shrink for the interior region: the largest per-variable
    numerator span across terms, plus one unit of delta shift."""
    worst = 0
    for t in terms:
        ctx = t.ctx
        for slot in range(1, ctx.n_slots):
            var = ctx.var_at(slot)
            lo, hi = t.numerator.degree_span(var)
            worst = max(worst, hi - lo)
    return worst + 1


def interior_targets(
    ctx: PolyContext, half_width: int, shrink: int, total_degree: int
) -> List[Tuple[int, ...]]:
    """All target vectors with every exponent in [-(N-shrink), N-shrink] and
    the given total degree, in lexicographic order."""
    reach = half_width - shrink
    if reach < 0:
        raise ValueError("window too small: empty interior region")
    nvars = ctx.n_slots - 1  # w and the z's
    out: List[Tuple[int, ...]] = []

    def rec(prefix: List[int], remaining: int) -> None:
        if len(prefix) == nvars - 1:
            last = total_degree - sum(prefix)
            if -reach <= last <= reach:
                out.append(tuple(prefix + [last]))
            return
        for e in range(-reach, reach + 1):
            rec(prefix + [e], remaining - 1)

    rec([], nvars)
    return [(0,) + vec for vec in out]


def _sum_coeffs(
    terms: Sequence[DistTerm], target: Tuple[int, ...], q_order: int
) -> CoeffSeries:
    total = QScalar()
    for t in terms:
        total = total + coeff_of_term(t, target, q_order).value
    return CoeffSeries(total, q_order)


def _coeff_table(
    terms: Sequence[DistTerm],
    targets: Sequence[Tuple[int, ...]],
    q_order: int,
    threads: int = 1,
) -> List[CoeffSeries]:
    if threads <= 1 or len(targets) < 8:
        return [_sum_coeffs(terms, t, q_order) for t in targets]
    chunk_size = max(1, (len(targets) + threads - 1) // threads)
    chunks = [targets[i : i + chunk_size] for i in range(0, len(targets), chunk_size)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        pieces = list(
            pool.map(lambda ch: [_sum_coeffs(terms, t, q_order) for t in ch], chunks)
        )
    out: List[CoeffSeries] = []
    for piece in pieces:  # chunk order fixed -> deterministic
        out.extend(piece)
    return out


def _fit_scalar_power(
    lhs: Sequence[CoeffSeries], rhs: Sequence[CoeffSeries], span: int
) -> Tuple[int, int]:
    """Best single q-power c = q^s with lhs ~ q^s * rhs; returns (s, #mismatches).

    Ties prefer small |s|, then small s, so the report is deterministic.
    """
    best = (0, len(lhs) + 1)
    for s in sorted(range(-span, span + 1), key=lambda x: (abs(x), x)):
        bad = 0
        for lv, rv in zip(lhs, rhs):
            if not lv.matches(rv.shifted(s)):
                bad += 1
        if bad < best[1]:
            best = (s, bad)
    return best


def verify_distribution(
    m: int,
    half_width: int = 6,
    q_order: int = 8,
    threads: int = 1,
) -> VerifyReport:
    """Compare both sides of the distribution identity coefficient-wise on
    the interior region, each coefficient exact mod O(q^(-q_order-1)).

    On mismatch the report carries the best-fitting q-power scalar, which
    separates a global prefactor discrepancy from a genuine failure.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    start = time.perf_counter()
    lhs_terms = dist_lhs_terms(m)
    rhs_terms = dist_rhs_terms(m)
    ctx = lhs_terms[0].ctx
    shrink = numerator_shrink(lhs_terms)
    targets = interior_targets(ctx, half_width, shrink, -(m + 1))
    if not targets:
        raise ValueError("empty interior region")
    lhs_vals = _coeff_table(lhs_terms, targets, q_order, threads)
    rhs_vals = _coeff_table(rhs_terms, targets, q_order, threads)
    mismatches = [
        i for i, (lv, rv) in enumerate(zip(lhs_vals, rhs_vals)) if not lv.matches(rv)
    ]
    elapsed_ms = int((time.perf_counter() - start) * 1000)
    extras: Dict[str, object] = {
        "window": half_width,
        "order": q_order,
        "targets_checked": len(targets),
    }
    if mismatches:
        s, bad = _fit_scalar_power(lhs_vals, rhs_vals, 2 * m + 6)
        extras["fitted_scalar"] = f"q^{s}"
        extras["fitted_mismatches"] = bad
        idx = mismatches[0]
        extras["first_mismatch"] = {
            "target": list(targets[idx][1:]),
            "lhs": lhs_vals[idx].to_text(),
            "rhs": rhs_vals[idx].to_text(),
        }
    return VerifyReport(
        identity="sym-dist",
        m=m,
        mode="distribution",
        verdict="zero" if not mismatches else "nonzero",
        residual_terms=len(mismatches),
        summand_count=len(lhs_terms),
        elapsed_ms=elapsed_ms,
        extras=extras,
    )


# ---------------------------------------------------------------------------
# the w-delta coefficient after the first re-expansion
# ---------------------------------------------------------------------------


def verify_delta_coefficient(m: int, mutate: Optional[str] = None) -> VerifyReport:
    """Exact zero check of the coefficient of the first-stage delta.

    After the first re-expansion the coefficient of delta(q^-m z_1, w) is a
    sum over (k, l) of S_m-symmetrized rational functions in the z's alone
    (w eliminated via w -> q^-m z_1).  Clearing every denominator (the
    symmetrized difference product contributes sign(sigma); the k- and
    l-dependent linear factors are multiplied in explicitly) must give the
    zero polynomial.

    mutate="sign" drops the l-dependence of the sign (the flip count of the
    re-expansion) and must break the identity; mutate="weight" replaces the
    q^(m(k-1)) weight by q^(mk), which rescales every summand by the same
    q^m and therefore cannot change the verdict.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if mutate not in (None, "sign", "weight"):
        raise ValueError("mutate must be None, 'sign' or 'weight'")
    start = time.perf_counter()
    n = m + 1
    ctx = PolyContext(n)
    letters_all = list(range(2, n + 1))

    def lin(c1: int, q1: int, c2: int, q2: int) -> LaurentPoly:
        # q^q1 z_c1 - q^q2 z_c2
        return LaurentPoly.monomial(ctx, {Q: q1, Z(c1): 1}) - LaurentPoly.monomial(
            ctx, {Q: q2, Z(c2): 1}
        )

    fixed_diffs = LaurentPoly.const(ctx, 1)
    for bi in range(len(letters_all)):
        for ci in range(bi + 1, len(letters_all)):
            fixed_diffs = fixed_diffs * lin(letters_all[bi], 0, letters_all[ci], 0)

    total = LaurentPoly.zero(ctx)
    count = 0
    for perm in permutations(letters_all):
        inv = 0
        for i in range(len(perm)):
            for j in range(i + 1, len(perm)):
                if perm[i] > perm[j]:
                    inv += 1
        sigma_sign = -1 if inv % 2 else 1
        letter_at = {pos: perm[pos - 2] for pos in range(2, n + 1)}
        for k in range(1, n + 1):
            for l in range(1, k + 1):
                count += 1
                if mutate == "sign":
                    sign = sigma_sign * (-1 if (k - 1) % 2 else 1)
                else:
                    sign = sigma_sign * (-1 if (k - l) % 2 else 1)
                weight = m * k if mutate == "weight" else m * (k - 1)
                piece = q_binomial(n, k).shift(weight).scale(sign).to_laurent(ctx)
                for a in range(k + 1, n + 1):
                    piece = piece * lin(1, 0, letter_at[a], 0)  # z_1 - z_a
                for a in range(2, k + 1):
                    piece = piece * lin(1, -2 * m, letter_at[a], 0)
                for i in range(l + 1, n + 1):
                    piece = piece * lin(letter_at[i], 2, 1, 0)
                for a in range(2, l + 1):
                    piece = piece * lin(1, 2, letter_at[a], 0)
                for i in range(2, n + 1):
                    for j in range(i + 1, n + 1):
                        piece = piece * lin(letter_at[j], 2, letter_at[i], 0)
                total = total + piece * fixed_diffs
    elapsed_ms = int((time.perf_counter() - start) * 1000)
    extras: Dict[str, object] = {}
    if mutate:
        extras["mutate"] = mutate
    if not total.is_zero():
        extras["residual"] = to_text(total)
    return VerifyReport(
        identity="delta-coeff",
        m=m,
        mode="exact",
        verdict="zero" if total.is_zero() else "nonzero",
        residual_terms=len(total),
        summand_count=count,
        elapsed_ms=elapsed_ms,
        extras=extras,
    )


# ---------------------------------------------------------------------------
# staged proof replay
# ---------------------------------------------------------------------------


@dataclass
class ProofStage:
    index: int
    fired: List[DistTerm]
    residual: List[DistTerm]
    dropped: int
    residual_is_zero: bool
    targets_checked: int
    elapsed_ms: int = 0


def _substitute_ref(ref: MonomialRef, src: VarId, q_shift: int, dst: VarId) -> MonomialRef:
    if ref.var == src:
        return MonomialRef(ref.q_power + q_shift, dst)
    return ref


def _substitute_inverse(
    inv: DirectedInverse, src: VarId, q_shift: int, dst: VarId
) -> Union[DirectedInverse, GeomInverse]:
    lead = _substitute_ref(inv.lead, src, q_shift, dst)
    sub = _substitute_ref(inv.sub, src, q_shift, dst)
    if lead.var == sub.var:
        return GeomInverse(lead.var, lead.q_power, sub.q_power)  # may raise
    return DirectedInverse(lead, sub)


def _substitute_geom(g: GeomInverse, src: VarId, q_shift: int, dst: VarId) -> GeomInverse:
    if g.var == src:
        return GeomInverse(dst, g.lead_q + q_shift, g.sub_q + q_shift)
    return g


def _apply_delta_substitution(term: DistTerm, fired: DeltaFactor) -> Optional[DistTerm]:
    """Use f(a) delta = f(b) delta to eliminate the fired delta's first
    variable from every other factor.  Returns None when the numerator is
    annihilated (the stray-delta case)."""
    src = fired.a.var
    dst = fired.b.var
    q_shift = fired.b.q_power - fired.a.q_power
    numer = term.numerator.substitute_var(src, q_shift, dst)
    if numer.is_zero():
        return None
    new_invs: List[Union[DirectedInverse, GeomInverse]] = [
        _substitute_inverse(inv, src, q_shift, dst) for inv in term.inverses
    ]
    inverses = tuple(x for x in new_invs if isinstance(x, DirectedInverse))
    geoms = tuple(x for x in new_invs if isinstance(x, GeomInverse)) + tuple(
        _substitute_geom(g, src, q_shift, dst) for g in term.geoms
    )
    for d in term.deltas:
        pair = {d.a.var, d.b.var}
        if pair == {fired.a.var, fired.b.var}:
            raise ReplayError("duplicate delta on one variable pair")
    return DistTerm(
        scalar=term.scalar,
        inverses=inverses,
        numerator=numer,
        deltas=term.deltas + (fired,),
        geoms=geoms,
    )


def _stage_split(term: DistTerm, active: VarId) -> Tuple[List[DistTerm], Optional[DistTerm], int]:
    """Re-expand every inverse of ``term`` whose sub variable is ``active``.

    Telescoping form: with the family F_1..F_r (in canonical order) and
    flip(F) = -inv(sub, lead) + delta(sub, lead),

        prod F_i = prod(-flip_i)                 (the delta-free variant)
                 + sum_l prod_{i<l}(-flip_i) * delta_l * prod_{i>l} F_i.

    Members before the fired one are flipped, members after keep their
    direction; the fired delta then eliminates ``active`` from the rest.
    Returns (fired variants, delta-free variant or None, dropped count).
    """
    family = [
        (idx, inv)
        for idx, inv in enumerate(term.inverses)
        if inv.sub.var == active
    ]
    family.sort(key=lambda p: (p[1].lead.q_power, p[1].lead.var.index, p[0]))
    if not family:
        return [], term, 0

    others = [inv for idx, inv in enumerate(term.inverses) if idx not in {i for i, _ in family}]

    fired_terms: List[DistTerm] = []
    dropped = 0
    for pos, (idx, inv) in enumerate(family):
        flipped_before = [reexpand_split(f)[0] for _, f in family[:pos]]
        kept_after = [f for _, f in family[pos + 1 :]]
        delta = reexpand_split(inv)[1]
        sign = -1 if pos % 2 else 1
        base = DistTerm(
            scalar=term.scalar.scale(sign),
            inverses=tuple(flipped_before + kept_after + others),
            numerator=term.numerator,
            deltas=term.deltas,
            geoms=term.geoms,
        )
        substituted = _apply_delta_substitution(base, delta)
        if substituted is None:
            dropped += 1
            continue
        fired_terms.append(substituted)
    all_flipped = DistTerm(
        scalar=term.scalar.scale(-1 if len(family) % 2 else 1),
        inverses=tuple([reexpand_split(f)[0] for _, f in family] + others),
        numerator=term.numerator,
        deltas=term.deltas,
        geoms=term.geoms,
    )
    return fired_terms, all_flipped, dropped


def _chain_key(term: DistTerm) -> Tuple[Tuple[int, str, int, str], ...]:
    return tuple(
        (d.a.q_power, d.a.var.name, d.b.q_power, d.b.var.name) for d in term.deltas
    )


def _residual_zero(
    terms: Sequence[DistTerm],
    targets: Sequence[Tuple[int, ...]],
    q_order: int,
    threads: int,
) -> bool:
    """The delta-free leftovers of a stage must vanish within each delta
    chain class separately: terms with different chains cannot cancel."""
    if not terms:
        return True
    classes: Dict[Tuple, List[DistTerm]] = {}
    for t in terms:
        classes.setdefault(_chain_key(t), []).append(t)
    for key in sorted(classes):
        vals = _coeff_table(classes[key], targets, q_order, threads)
        if not all(v.is_zero() for v in vals):
            return False
    return True


def proof_replay(
    m: int,
    half_width: int = 6,
    q_order: int = 8,
    threads: int = 1,
) -> Tuple[List[ProofStage], VerifyReport]:
    """Stage-by-stage rewrite of the distribution identity's left side.

    Stage 1 re-expands the w-facing family; the delta-free part is the
    polynomial identity in disguise and must vanish.  Stage s >= 2
    re-expands the factors facing the chain's current tail variable; terms
    that cannot extend their chain land in that stage's residual, which must
    also vanish.  Surviving terms carry m+1 chained deltas and are compared
    against the closed-form right-hand side.
    """
    if m < 1:
        raise ValueError("replay requires m >= 1 (no stages exist below that)")
    start = time.perf_counter()
    lhs_terms = dist_lhs_terms(m)
    rhs_terms = dist_rhs_terms(m)
    ctx = lhs_terms[0].ctx
    shrink = numerator_shrink(lhs_terms)
    targets = interior_targets(ctx, half_width, shrink, -(m + 1))
    if not targets:
        raise ValueError("empty interior region")

    stages: List[ProofStage] = []
    active_terms = lhs_terms
    final_terms: List[DistTerm] = []
    for stage_index in range(1, m + 2):
        stage_start = time.perf_counter()
        fired_all: List[DistTerm] = []
        residual_all: List[DistTerm] = []
        dropped = 0
        for term in active_terms:
            active_var = W if stage_index == 1 else term.deltas[-1].b.var
            fired, leftover, ndrop = _stage_split(term, active_var)
            fired_all.extend(fired)
            dropped += ndrop
            if leftover is not None:
                residual_all.append(leftover)
        residual_ok = _residual_zero(residual_all, targets, q_order, threads)
        stages.append(
            ProofStage(
                index=stage_index,
                fired=fired_all,
                residual=residual_all,
                dropped=dropped,
                residual_is_zero=residual_ok,
                targets_checked=len(targets),
                elapsed_ms=int((time.perf_counter() - stage_start) * 1000),
            )
        )
        done = [t for t in fired_all if len(t.deltas) == m + 1]
        final_terms.extend(done)
        active_terms = [t for t in fired_all if len(t.deltas) < m + 1]
    if active_terms:
        raise ReplayError("terms left with incomplete delta chains after the last stage")
    for t in final_terms:
        if t.inverses:
            raise ReplayError("a completed term still carries a directed inverse")

    final_vals = _coeff_table(final_terms, targets, q_order, threads)
    rhs_vals = _coeff_table(rhs_terms, targets, q_order, threads)
    final_mismatches = sum(
        1 for lv, rv in zip(final_vals, rhs_vals) if not lv.matches(rv)
    )
    stages_ok = all(s.residual_is_zero for s in stages)
    verdict_zero = stages_ok and final_mismatches == 0
    s_fit, bad_fit = _fit_scalar_power(final_vals, rhs_vals, 2 * m + 6)
    elapsed_ms = int((time.perf_counter() - start) * 1000)
    extras: Dict[str, object] = {
        "window": half_width,
        "order": q_order,
        "targets_checked": len(targets),
        "stage_residuals": [s.residual_is_zero for s in stages],
        "stage_dropped": [s.dropped for s in stages],
        "final_terms": len(final_terms),
        "fitted_scalar": f"q^{s_fit}",
        "fitted_mismatches": bad_fit,
    }
    report = VerifyReport(
        identity="dist-replay",
        m=m,
        mode="replay",
        verdict="zero" if verdict_zero else "nonzero",
        residual_terms=(0 if verdict_zero else final_mismatches + sum(
            0 if s.residual_is_zero else 1 for s in stages
        )),
        summand_count=len(lhs_terms),
        elapsed_ms=elapsed_ms,
        extras=extras,
    )
    return stages, report
