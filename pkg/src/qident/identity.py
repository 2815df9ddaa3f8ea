"""Construction and zero-verification of the symmetrized polynomial identity.

For n = m+1 z-variables the cleared left-hand side is

    L(m) = sum_{sigma in S_n} sign(sigma) sigma . sum_{r=0}^{n} B(n, r)
           * prod_{i<=r} (w - q^m z_i) * prod_{r<i<=n} (z_i - q^m w)
           * prod_{i<j} (z_i - q^2 z_j)

with B the symmetric q-binomial.  This equals the rational symmetrized sum
multiplied by the Vandermonde prod_{i<j}(z_i - z_j): permuting the
Vandermonde only changes its sign, so the denominator clearing turns the
sigma-action on it into the sign weight.  The claim under test is
L(m) = 0 for every m >= 0.

Zero-verification never materializes the symmetrized polynomial.  Because
the inner sum P is antisymmetrized, L(m) = 0 iff for every z-exponent
multiset the parity-weighted sum of P's coefficients over that orbit
vanishes; monomials with a repeated z-exponent cancel within their own
orbit and are skipped.  This collapses the n!-fold symmetrization into a
single pass over P's monomials (``orbit buckets``).

A Schwartz-Zippel fast path evaluates the full signed sum at random points
of GF(p) without any symbolic expansion, using prefix/suffix products over
the linear factors so each (sigma, r) summand costs O(1) extra multiplies.
"""

from __future__ import annotations

import random
import time
from concurrent.futures import ThreadPoolExecutor
from itertools import permutations as _itertools_permutations
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .laurent import (
    LaurentPoly,
    Monomial,
    Permutation,
    PolyContext,
    Q,
    Terms,
    VarId,
    W,
    Z,
    add_terms,
    symmetrize,
    to_text,
    vandermonde,
)
from .qnum import QScalar, q_binomial
from .reports import VerifyReport

QBinOverride = Optional[Mapping[int, QScalar]]


def _qbin(m: int, r: int, override: QBinOverride) -> QScalar:
    if override is not None and r in override:
        return override[r]
    return q_binomial(m + 1, r)


def context_for(m: int) -> PolyContext:
    return PolyContext(m + 1)


def build_summand(m: int, r: int, qbin_override: QBinOverride = None) -> LaurentPoly:
    """The r-th summand of the cleared identity, before symmetrization:

    B(m+1, r) * prod_{i<=r}(w - q^m z_i) * prod_{r<i<=m+1}(z_i - q^m w)
              * prod_{i<j}(z_i - q^2 z_j)
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    n = m + 1
    if r < 0 or r > n:
        raise ValueError(f"r must lie in 0..{n}")
    ctx = context_for(m)
    out = _qbin(m, r, qbin_override).to_laurent(ctx)
    for i in range(1, r + 1):
        factor = LaurentPoly.var(ctx, W) - LaurentPoly.monomial(ctx, {Q: m, Z(i): 1})
        out = out * factor
    for i in range(r + 1, n + 1):
        factor = LaurentPoly.var(ctx, Z(i)) - LaurentPoly.monomial(ctx, {Q: m, W: 1})
        out = out * factor
    out = out * _pair_product(ctx)
    return out


def _pair_product(ctx: PolyContext) -> LaurentPoly:
    """prod_{i<j} (z_i - q^2 z_j)."""
    out = LaurentPoly.const(ctx, 1)
    for i in range(1, ctx.n_z + 1):
        for j in range(i + 1, ctx.n_z + 1):
            factor = LaurentPoly.var(ctx, Z(i)) - LaurentPoly.monomial(
                ctx, {Q: 2, Z(j): 1}
            )
            out = out * factor
    return out


def _linear_product(ctx: PolyContext, m: int, r: int) -> LaurentPoly:
    """prod_{i<=r}(w - q^m z_i) * prod_{r<i<=n}(z_i - q^m w)."""
    out = LaurentPoly.const(ctx, 1)
    for i in range(1, r + 1):
        out = out * (
            LaurentPoly.var(ctx, W) - LaurentPoly.monomial(ctx, {Q: m, Z(i): 1})
        )
    for i in range(r + 1, ctx.n_z + 1):
        out = out * (
            LaurentPoly.var(ctx, Z(i)) - LaurentPoly.monomial(ctx, {Q: m, W: 1})
        )
    return out


def inner_sum(m: int, qbin_override: QBinOverride = None) -> LaurentPoly:
    """sum_r build_summand(m, r): the polynomial handed to the symmetrizer."""
    ctx = context_for(m)
    pairs = _pair_product(ctx)
    acc = LaurentPoly.zero(ctx)
    for r in range(m + 2):
        term = _qbin(m, r, qbin_override).to_laurent(ctx) * _linear_product(ctx, m, r)
        acc = acc + term
    return acc * pairs


def build_lhs_cleared(
    m: int, threads: int = 1, qbin_override: QBinOverride = None
) -> LaurentPoly:
    """sum_{sigma} sign(sigma) sigma.(sum_r summand), fully materialized.

    Fine for small m; the verifier below avoids this expansion entirely.
    """
    return symmetrize(inner_sum(m, qbin_override), m + 1, signed=True, threads=threads)


# ---------------------------------------------------------------------------
# orbit-bucket zero test for the signed symmetrization
# ---------------------------------------------------------------------------


def _descending_parity(zexps: Sequence[int]) -> int:
    """Sign of the permutation sorting zexps into descending order.

    Assumes all entries distinct: (-1)^(# pairs i<j with zexps[i] < zexps[j]).
    """
    inversions = 0
    n = len(zexps)
    for i in range(n):
        zi = zexps[i]
        for j in range(i + 1, n):
            if zi < zexps[j]:
                inversions += 1
    return -1 if inversions % 2 else 1


def _bucket_insert(buckets: Dict[Monomial, int], mono: Monomial, coef: int) -> None:
    zpart = mono[2:]
    if len(set(zpart)) != len(zpart):
        return  # a transposition fixes the monomial: the signed orbit cancels
    sign = _descending_parity(zpart)
    key = mono[:2] + tuple(sorted(zpart, reverse=True))
    new = buckets.get(key, 0) + sign * coef
    if new:
        buckets[key] = new
    else:
        del buckets[key]


def signed_orbit_reduce(poly: LaurentPoly) -> LaurentPoly:
    """Collapse sum_sigma sign(sigma) sigma.poly onto orbit representatives.

    The result R has one term per z-exponent orbit (the descending-sorted
    representative); the full signed symmetrization equals
    symmetrize(R, n, signed=True) and is zero iff R is zero.
    """
    buckets: Dict[Monomial, int] = {}
    for mono, coef in poly.terms.items():
        _bucket_insert(buckets, mono, coef)
    return LaurentPoly(poly.ctx, buckets)


def _reduce_streamed(
    m: int, qbin_override: QBinOverride, threads: int
) -> Tuple[LaurentPoly, int]:
    """Orbit-reduce the signed symmetrization of inner_sum(m) without
    materializing the inner sum; returns (residue, monomials_streamed)."""
    ctx = context_for(m)
    pairs = _pair_product(ctx)
    pair_items = list(pairs.terms.items())
    lin_by_r = [
        (
            _qbin(m, r, qbin_override).to_laurent(ctx) * _linear_product(ctx, m, r)
        ).terms
        for r in range(m + 2)
    ]

    def work(chunk: List[Tuple[Monomial, int]]) -> Tuple[Dict[Monomial, int], int]:
        buckets: Dict[Monomial, int] = {}
        streamed = 0
        for mono_p, coef_p in chunk:
            for lin_terms in lin_by_r:
                for mono_l, coef_l in lin_terms.items():
                    mono = tuple(x + y for x, y in zip(mono_p, mono_l))
                    _bucket_insert(buckets, mono, coef_p * coef_l)
                    streamed += 1
        return buckets, streamed

    if threads <= 1 or len(pair_items) < 64:
        buckets, streamed = work(pair_items)
        return LaurentPoly(ctx, buckets), streamed

    chunk_size = max(1, (len(pair_items) + threads - 1) // threads)
    chunks = [
        pair_items[i : i + chunk_size] for i in range(0, len(pair_items), chunk_size)
    ]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(work, chunks))
    total: Dict[Monomial, int] = {}
    streamed = 0
    for buckets, count in results:  # chunk order fixed -> deterministic
        total = add_terms(total, buckets)
        streamed += count
    return LaurentPoly(ctx, total), streamed


def summand_count(m: int) -> int:
    """Number of (sigma, r) summands in the symmetrized sum."""
    out = m + 2
    for i in range(2, m + 2):
        out *= i
    return out


def verify_identity(
    m: int,
    threads: int = 1,
    qbin_override: QBinOverride = None,
) -> VerifyReport:
    """Exact zero-verification of the cleared identity for one m."""
    if m < 0:
        raise ValueError("m must be >= 0")
    start = time.perf_counter()
    residue, streamed = _reduce_streamed(m, qbin_override, threads)
    elapsed_ms = int((time.perf_counter() - start) * 1000)
    extras = {"monomials_streamed": streamed}
    if not residue.is_zero():
        extras["residual"] = to_text(residue)
        extras["residual_form"] = "orbit-representatives"
    return VerifyReport(
        identity="sym-poly",
        m=m,
        mode="exact",
        verdict="zero" if residue.is_zero() else "nonzero",
        residual_terms=len(residue),
        summand_count=summand_count(m),
        elapsed_ms=elapsed_ms,
        extras=extras,
    )


def w_coefficient_identities(
    m: int, qbin_override: QBinOverride = None
) -> List[LaurentPoly]:
    """The m+2 coefficient identities: [w^e] L(m) for e = 0..m+1.

    Each entry is materialized from its orbit-reduced residue (cheap because
    the residues are empty whenever the identity holds).
    """
    ctx = context_for(m)
    inner = inner_sum(m, qbin_override)
    out: List[LaurentPoly] = []
    for e in range(m + 2):
        slice_e = inner.coeff_of_power(W, e)
        residue = signed_orbit_reduce(slice_e)
        if residue.is_zero():
            out.append(LaurentPoly.zero(ctx))
        else:
            out.append(symmetrize(residue, m + 1, signed=True))
    return out


# ---------------------------------------------------------------------------
# modular (Schwartz-Zippel) fast path
# ---------------------------------------------------------------------------


def _degree_bound(m: int) -> int:
    n = m + 1
    pair_deg = n * (n - 1) // 2
    q_deg = m * n + 2 * pair_deg + (m + 1) * (n + 1)  # coarse but safe
    return n + pair_deg + q_deg


def _perms_with_signs(n: int) -> List[Tuple[Tuple[int, ...], int]]:
    out = []
    for perm in _itertools_permutations(range(n)):
        inv = 0
        for i in range(n):
            pi = perm[i]
            for j in range(i + 1, n):
                if pi > perm[j]:
                    inv += 1
        out.append((perm, -1 if inv % 2 else 1))
    return out


def _eval_signed_sum_mod(
    m: int,
    qv: int,
    wv: int,
    zvals: Sequence[int],
    p: int,
    perms: Sequence[Tuple[Tuple[int, ...], int]],
    qbin_vals: Sequence[int],
    threads: int = 1,
) -> int:
    """sum_{sigma, r} sign(sigma) * B(m+1,r) * (linear factors) * (pair factors)
    evaluated in GF(p), with prefix/suffix products over the linear factors."""
    n = m + 1
    qm = pow(qv, m, p)
    q2 = (qv * qv) % p

    def work(chunk: Sequence[Tuple[Tuple[int, ...], int]]) -> int:
        acc = 0
        for perm, sign in chunk:
            vals = [zvals[i] for i in perm]
            prefix = [1] * (n + 1)  # prefix[r] = prod_{i<=r} (w - q^m z_i)
            for i, v in enumerate(vals):
                prefix[i + 1] = (prefix[i] * (wv - qm * v)) % p
            suffix = [1] * (n + 2)  # suffix[r] = prod_{i>=r} (z_i - q^m w)
            for i in range(n, 0, -1):
                suffix[i] = (suffix[i + 1] * (vals[i - 1] - qm * wv)) % p
            pair = 1
            for i in range(n):
                vi = vals[i]
                for j in range(i + 1, n):
                    pair = (pair * (vi - q2 * vals[j])) % p
            inner = 0
            for r in range(n + 1):
                inner = (inner + qbin_vals[r] * prefix[r] * suffix[r + 1]) % p
            acc = (acc + sign * inner * pair) % p
        return acc

    if threads <= 1 or len(perms) < 64:
        return work(perms) % p
    chunk_size = max(1, (len(perms) + threads - 1) // threads)
    chunks = [perms[i : i + chunk_size] for i in range(0, len(perms), chunk_size)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        pieces = list(pool.map(work, chunks))
    total = 0
    for piece in pieces:
        total = (total + piece) % p
    return total


def verify_identity_modp(
    m: int,
    trials: int,
    p: int = (1 << 61) - 1,
    seed: int = 20240801,
    threads: int = 1,
    qbin_override: QBinOverride = None,
) -> VerifyReport:
    """Probabilistic zero test: evaluate the signed sum at random GF(p) points.

    One-sided: a zero polynomial passes every trial; a nonzero polynomial
    survives a trial with probability <= deg/p.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if p <= _degree_bound(m):
        raise ValueError(f"prime {p} is too small for m={m}")
    start = time.perf_counter()
    n = m + 1
    rng = random.Random(seed)
    assignments = [
        [rng.randrange(1, p) for _ in range(n + 2)] for _ in range(trials)
    ]  # (q, w, z_1..z_n) per trial, all nonzero
    perms = _perms_with_signs(n)
    qbins = [_qbin(m, r, qbin_override) for r in range(n + 1)]
    failures = []
    for t, vals in enumerate(assignments):
        qv, wv, zvals = vals[0], vals[1], vals[2:]
        qbin_vals = [
            sum(c * pow(qv, e, p) for e, c in qb.coeffs.items()) % p for qb in qbins
        ]
        result = _eval_signed_sum_mod(m, qv, wv, zvals, p, perms, qbin_vals, threads)
        if result != 0:
            failures.append({"trial": t, "value": result})
    elapsed_ms = int((time.perf_counter() - start) * 1000)
    extras = {
        "trials": trials,
        "prime": p,
        "seed": seed,
    }
    if failures:
        extras["failures"] = failures
    return VerifyReport(
        identity="sym-poly",
        m=m,
        mode="modular",
        verdict="zero" if not failures else "nonzero",
        residual_terms=len(failures),
        summand_count=summand_count(m),
        elapsed_ms=elapsed_ms,
        extras=extras,
    )
