"""Exact symbolic verification of a symmetrized q-binomial identity.

The package has four layers:

* ``laurent``   -- sparse multivariate Laurent polynomials in q, w, z_1..z_n
                   over arbitrary-precision integers, plus the S_n action on
                   z-indices.
* ``qnum``      -- symmetric q-integers, q-factorials and q-binomial
                   coefficients as exact Laurent polynomials in q alone.
* ``identity``  -- construction and zero-verification of the symmetrized
                   polynomial identity (exact and modular fast paths).
* ``distributions`` -- truncated bilateral series: directed geometric
                   expansions, formal delta calculus, the distribution form of
                   the identity, and a staged re-expansion replay that peels
                   one delta factor per stage.

``cli`` exposes everything as subcommands with deterministic JSON reports.
"""

from __future__ import annotations

from .distributions import (
    CoeffSeries,
    DeltaFactor,
    DirectedInverse,
    DistTerm,
    DivergentTermError,
    GeomInverse,
    MonomialRef,
    TruncationSpec,
    coeff_of_term,
    proof_replay,
    verify_delta_coefficient,
    verify_distribution,
)
from .identity import verify_identity, verify_identity_modp
from .laurent import LaurentPoly, Permutation, PolyContext, VarId
from .qnum import QScalar, alternating_sum, q_binomial, q_factorial, q_int
from .reports import VerifyReport

__all__ = [
    "LaurentPoly",
    "Permutation",
    "PolyContext",
    "VarId",
    "QScalar",
    "q_int",
    "q_factorial",
    "q_binomial",
    "alternating_sum",
    "VerifyReport",
    "MonomialRef",
    "DirectedInverse",
    "GeomInverse",
    "DeltaFactor",
    "DistTerm",
    "TruncationSpec",
    "CoeffSeries",
    "DivergentTermError",
    "coeff_of_term",
    "verify_identity",
    "verify_identity_modp",
    "verify_distribution",
    "verify_delta_coefficient",
    "proof_replay",
]

__version__ = "0.1.0"
