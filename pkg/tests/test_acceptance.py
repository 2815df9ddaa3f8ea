"""End-to-end acceptance suite.

Each test pins one shipped guarantee of the package; run with -v to get one
pass/fail line per guarantee. Everything here is exact or windowed-exact --
no tolerances, no statistics beyond the seeded modular trials.
"""

from __future__ import annotations

import math
import random

from qident.cli import main as cli_main
from qident.distributions import (
    DeltaFactor,
    DirectedInverse,
    DistTerm,
    MonomialRef,
    TruncationSpec,
    coeff_of_term,
    delta_property_check,
    naive_coeff_of_term,
    proof_replay,
    reexpand_split,
    split_exactness_check,
    verify_delta_coefficient,
    verify_distribution,
)
from qident.identity import (
    build_lhs_cleared,
    verify_identity,
    verify_identity_modp,
    w_coefficient_identities,
)
from qident.laurent import LaurentPoly, PolyContext, W, Z
from qident.qnum import QScalar, alternating_sum, q_binomial, q_factorial
from qident.reports import VerifyReport


def _uniform_shift_note(rep: VerifyReport, label: str) -> str:
    fit = rep.extras.get("fitted_scalar")
    misses = rep.extras.get("fitted_mismatches")
    return (
        f"m={rep.m}: {label} disagrees with the delta side at "
        f"{rep.extras['targets_checked']} interior coefficients, yet every "
        f"single one satisfies lhs == {fit} * rhs ({misses} exceptions). "
        "The sides differ by a uniform power of q, not by shape; the stated "
        "prefactor appears to be off by exactly one power of q."
    )


def test_c01_cleared_identity_vanishes_exactly_m0_to_m5():
    for m in range(6):
        rep = verify_identity(m)
        assert rep.verdict == "zero", f"m={m}: {rep.extras}"
        assert rep.summand_count == (m + 2) * math.factorial(m + 1)


def test_c02_cleared_identity_vanishes_modular_m6_m7():
    for m in (6, 7):
        rep = verify_identity_modp(m, trials=20)
        assert rep.verdict == "zero", f"m={m}: {rep.extras}"
        assert rep.extras["trials"] == 20
        assert rep.extras["prime"] == (1 << 61) - 1


def test_c03_w_slice_identities_vanish_and_reassemble():
    for m in range(5):
        slices = w_coefficient_identities(m)
        assert len(slices) == m + 2
        for e, s in enumerate(slices):
            assert s.is_zero(), f"m={m}, w^{e} slice: {s}"
    for m in range(4):
        slices = w_coefficient_identities(m)
        rebuilt = LaurentPoly.zero(slices[0].ctx)
        for e, s in enumerate(slices):
            rebuilt = rebuilt + s.shift(W, e)
        assert rebuilt == build_lhs_cleared(m)


def test_c04_q_binomial_laws_through_n12():
    for n in range(13):
        for r in range(n + 1):
            b = q_binomial(n, r)
            # exact division: b * [r]! * [n-r]! == [n]!
            assert b * q_factorial(r) * q_factorial(n - r) == q_factorial(n)
            # palindromic in q
            assert b.coeffs == {-e: c for e, c in b.coeffs.items()}
            # classical specialization at q = 1
            assert b.at_one() == math.comb(n, r)
    for n in range(1, 12, 2):
        assert alternating_sum(n).is_zero(), f"n={n}"
    assert alternating_sum(2).coeffs == {0: 2, 1: -1, -1: -1}


def test_c05_delta_multiplication_property_50_random_polys():
    rng = random.Random(20240801)
    ctx = PolyContext(1)
    spec = TruncationSpec.symmetric(ctx, 8, 10)
    for i in range(50):
        lo = rng.randint(-4, 0)
        terms = {}
        for _ in range(rng.randint(1, 5)):
            mono = (rng.randint(-2, 2), 0, rng.randint(lo, lo + 4))
            terms[mono] = rng.randint(-9, 9) or 3
        f = LaurentPoly(ctx, terms)
        assert delta_property_check(f, spec), f"sample {i}: {f}"


def test_c06_inverse_flip_split_exact_all_shapes_m_le_3():
    for m in range(4):
        ctx = PolyContext(m + 1)
        spec = TruncationSpec.symmetric(ctx, 6, 10)
        for i in range(1, m + 2):
            f = DirectedInverse(MonomialRef(-m, Z(i)), MonomialRef(0, W))
            flipped, delta = reexpand_split(f)
            assert flipped.lead == f.sub and delta.a == f.sub
            assert split_exactness_check(f, spec, ctx), f"m={m}, z{i} vs w"
        for i in range(1, m + 2):
            for j in range(1, m + 2):
                if i == j:
                    continue
                pair = DirectedInverse(MonomialRef(2, Z(i)), MonomialRef(0, Z(j)))
                assert split_exactness_check(pair, spec, ctx), f"m={m}, z{i} vs z{j}"


def test_c07_distribution_identity_truncated_m1_m2():
    reps = [
        verify_distribution(1, half_width=6, q_order=8),
        verify_distribution(2, half_width=5, q_order=8),
    ]
    bad = [rep for rep in reps if rep.verdict != "zero"]
    assert not bad, " | ".join(
        _uniform_shift_note(rep, "the inverse side") for rep in bad
    )


def test_c08_m0_diagnostic_reports_uniform_q_factor(tmp_path):
    rep = verify_distribution(0, half_width=6, q_order=8)
    assert rep.verdict == "nonzero"
    assert rep.extras["fitted_scalar"] == "q^1"
    assert rep.extras["fitted_mismatches"] == 0
    plain = cli_main(
        ["verify-dist", "--m", "0", "--out", str(tmp_path / "plain.json")]
    )
    diag = cli_main(
        [
            "verify-dist",
            "--m",
            "0",
            "--diagnostic",
            "--out",
            str(tmp_path / "diag.json"),
        ]
    )
    assert plain == 1 and diag == 0


def test_c09_cleared_delta_coefficient_vanishes_m1_m2():
    for m, summands in ((1, 3), (2, 12)):
        rep = verify_delta_coefficient(m)
        assert rep.verdict == "zero", f"m={m}: {rep.extras}"
        assert rep.summand_count == summands


def test_c10_staged_replay_residuals_vanish_and_final_matches():
    reps = []
    for m, window in ((1, 6), (2, 5)):
        stages, rep = proof_replay(m, half_width=window, q_order=8)
        assert len(stages) == m + 1
        for s in stages:
            assert s.residual_is_zero, f"m={m}, stage {s.index}"
        assert rep.extras["final_terms"] == math.factorial(m + 1)
        reps.append(rep)
    bad = [rep for rep in reps if rep.verdict != "zero"]
    assert not bad, " | ".join(
        _uniform_shift_note(rep, "the fully telescoped final stage")
        for rep in bad
    )


def test_c11_compiled_coefficients_match_naive_oracle_200_targets():
    ctx = PolyContext(2)
    one = LaurentPoly.const(ctx, 1)
    vand = LaurentPoly.var(ctx, Z(1)) - LaurentPoly.var(ctx, Z(2))
    z1w = DirectedInverse(MonomialRef(-1, Z(1)), MonomialRef(0, W))
    z2w = DirectedInverse(MonomialRef(-2, Z(2)), MonomialRef(0, W))
    wz2 = DirectedInverse(MonomialRef(0, W), MonomialRef(0, Z(2)))
    p12 = DirectedInverse(MonomialRef(2, Z(1)), MonomialRef(0, Z(2)))
    p21 = DirectedInverse(MonomialRef(2, Z(2)), MonomialRef(0, Z(1)))
    d_wz1 = DeltaFactor(MonomialRef(0, W), MonomialRef(-1, Z(1)))
    d_12 = DeltaFactor(MonomialRef(0, Z(1)), MonomialRef(2, Z(2)))
    two_q = QScalar({1: 2})

    def term(inverses=(), deltas=(), numerator=one, scalar=QScalar.one()):
        return DistTerm(
            scalar=scalar,
            inverses=tuple(inverses),
            numerator=numerator,
            deltas=tuple(deltas),
        )

    products = [
        term([z1w]),
        term([wz2]),
        term([p12], scalar=two_q),
        term([z1w, p12], numerator=vand),
        term([z1w, z2w]),
        term([p12, p21]),
        term([z2w, p12, p21]),
        term([z1w, wz2, p12]),
        term([p12], [d_wz1]),
        term([z1w], [d_12], numerator=vand),
        term((), [d_wz1, d_12], scalar=two_q),
    ]
    rng = random.Random(11)
    checked = 0
    while checked < 200:
        t = products[rng.randrange(len(products))]
        n_deg = sum(next(iter(t.numerator.terms))[1:])
        total = -(len(t.inverses) + len(t.deltas)) + n_deg
        t_w = rng.randint(-4, 4)
        t_1 = rng.randint(-4, 4)
        t_2 = total - t_w - t_1
        if abs(t_2) > 5:
            continue
        order = rng.randint(4, 12)
        compiled = coeff_of_term(t, (t_w, t_1, t_2), order)
        naive = naive_coeff_of_term(t, (t_w, t_1, t_2), order, 9)
        assert compiled.matches(naive), (t.describe(), (t_w, t_1, t_2), order)
        checked += 1
    assert checked == 200


def test_c12_reports_byte_identical_at_1_2_8_threads():
    runs = {
        "exact-ident": lambda t: verify_identity(3, threads=t).to_json(),
        "modular-ident": lambda t: verify_identity_modp(4, trials=20, threads=t).to_json(),
        "distribution": lambda t: verify_distribution(
            1, half_width=5, q_order=6, threads=t
        ).to_json(),
        "replay": lambda t: proof_replay(1, half_width=5, q_order=6, threads=t)[
            1
        ].to_json(),
    }
    for name, run in runs.items():
        blobs = [run(t) for t in (1, 2, 8)]
        assert blobs[0] == blobs[1] == blobs[2], name
