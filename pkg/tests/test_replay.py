from __future__ import annotations

import pytest

from qident.distributions import proof_replay, verify_delta_coefficient


def test_replay_rejects_m0():
    with pytest.raises(ValueError):
        proof_replay(0)


def test_replay_m1():
    stages, rep = proof_replay(1, half_width=6, q_order=8)
    assert [s.index for s in stages] == [1, 2]
    assert all(s.residual_is_zero for s in stages)
    assert [s.dropped for s in stages] == [0, 2]
    assert rep.extras["final_terms"] == 2
    # the surviving terms are pure delta chains: no unfired inverses left
    for stage in stages:
        for term in stage.fired:
            assert term.deltas
    final = stages[-1].fired
    assert all(not t.inverses for t in final)
    assert all(len(t.deltas) == 2 for t in final)
    # chains start at w and thread through the z's in both orders
    chains = sorted(
        tuple(d.b.var.index for d in t.deltas) for t in final
    )
    assert chains == [(1, 2), (2, 1)]
    # the final sum matches the delta side up to one global power of q
    assert rep.extras["fitted_scalar"] == "q^1"
    assert rep.extras["fitted_mismatches"] == 0
    assert rep.verdict == "nonzero"


def test_replay_m2():
    stages, rep = proof_replay(2, half_width=5, q_order=8)
    assert len(stages) == 3
    assert rep.extras["stage_residuals"] == [True, True, True]
    assert rep.extras["stage_dropped"] == [0, 24, 6]
    assert rep.extras["final_terms"] == 6  # one completed chain per ordering
    assert rep.extras["fitted_scalar"] == "q^1"
    assert rep.extras["fitted_mismatches"] == 0
    final = stages[-1].fired
    assert all(not t.inverses and len(t.deltas) == 3 for t in final)
    chains = sorted(tuple(d.b.var.index for d in t.deltas) for t in final)
    assert chains == [
        (1, 2, 3),
        (1, 3, 2),
        (2, 1, 3),
        (2, 3, 1),
        (3, 1, 2),
        (3, 2, 1),
    ]


def test_replay_threads_deterministic():
    _, a = proof_replay(1, half_width=5, q_order=6, threads=1)
    _, b = proof_replay(1, half_width=5, q_order=6, threads=2)
    assert a.to_json() == b.to_json()


# -- the cleared-denominator coefficient check -------------------------------


@pytest.mark.parametrize("m,summands", [(1, 3), (2, 12)])
def test_delta_coefficient_vanishes(m, summands):
    rep = verify_delta_coefficient(m)
    assert rep.verdict == "zero"
    assert rep.summand_count == summands
    assert rep.residual_terms == 0


def test_delta_coefficient_rejects_m0():
    with pytest.raises(ValueError):
        verify_delta_coefficient(0)


def test_delta_coefficient_sign_mutation_detected():
    rep = verify_delta_coefficient(1, mutate="sign")
    assert rep.verdict == "nonzero"
    assert (
        rep.extras["residual"]
        == "2 q^3 z1^1 z2^1 + -2 q^1 z1^2 + -2 q^1 z2^2 + 2 q^-1 z1^1 z2^1"
    )
    rep2 = verify_delta_coefficient(2, mutate="sign")
    assert rep2.verdict == "nonzero"
    assert rep2.residual_terms == 82


def test_delta_coefficient_weight_mutation_invisible():
    # replacing the q^(m(k-1)) weight by q^(mk) rescales every summand by the
    # same q^m, so the sum stays zero; this mutation is not catchable here
    rep = verify_delta_coefficient(2, mutate="weight")
    assert rep.verdict == "zero"
