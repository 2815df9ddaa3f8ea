"""Command-line front end.

One JSON report per line; key order is fixed and timing fields are zeroed
unless --timings is given, so runs are byte-reproducible across machines
and thread counts.

Exit codes: 0 all checks acceptable, 1 a verification failed, 2 bad usage.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from typing import List, Optional, Sequence, Tuple

from .distributions import (
    proof_replay,
    verify_delta_coefficient,
    verify_distribution,
)
from .identity import verify_identity, verify_identity_modp
from .qnum import q_binomial
from .reports import VerifyReport

DEFAULT_SEED = 20240801
DEFAULT_PRIME = (1 << 61) - 1


def _parse_m_values(text: str) -> List[int]:
    if ".." in text:
        lo_s, hi_s = text.split("..", 1)
        lo, hi = int(lo_s), int(hi_s)
        if hi < lo:
            raise ValueError(f"empty range {text!r}")
        return list(range(lo, hi + 1))
    return [int(text)]


def _default_threads() -> int:
    env = os.environ.get("QIDENT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--m", required=True, help="order m, as an int or a range like 0..3")
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--out", help="write report lines to this file instead of stdout")
    p.add_argument("--pretty", action="store_true", help="indent the JSON reports")
    p.add_argument("--timings", action="store_true", help="keep elapsed-ms fields")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qident",
        description="exact and truncated verification of the symmetrized q-identities",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-ident", help="polynomial identity, exact or modular")
    _add_common(p)
    p.add_argument("--mode", choices=["exact", "modular"], default="exact")
    p.add_argument("--trials", type=int, default=20, help="modular evaluation points")
    p.add_argument("--prime", type=int, default=DEFAULT_PRIME)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = sub.add_parser("verify-dist", help="distribution identity on a window")
    _add_common(p)
    p.add_argument("--window", type=int, default=6, help="half-width of the exponent window")
    p.add_argument("--order", type=int, default=8, help="q-adic truncation order")
    p.add_argument(
        "--diagnostic",
        action="store_true",
        help="accept a clean single-q-power mismatch (reported as fitted_scalar)",
    )

    p = sub.add_parser("replay", help="stage-by-stage rewrite of the distribution identity")
    _add_common(p)
    p.add_argument("--window", type=int, default=6)
    p.add_argument("--order", type=int, default=8)
    p.add_argument(
        "--diagnostic",
        action="store_true",
        help="accept vanishing stage residuals with a clean scalar offset in the final compare",
    )

    p = sub.add_parser("delta-coeff", help="exact zero test of the first-stage delta coefficient")
    _add_common(p)
    p.add_argument("--mutate", choices=["sign", "weight"], default=None)

    p = sub.add_parser("qbinom", help="print a table of symmetric Gaussian binomials")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")

    p = sub.add_parser("bench", help="run a verifier and record wall time")
    _add_common(p)
    p.add_argument("--mode", choices=["exact", "modular", "replay"], default="exact")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--prime", type=int, default=DEFAULT_PRIME)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--window", type=int, default=6)
    p.add_argument("--order", type=int, default=8)
    return parser


def _emit(lines: Sequence[str], out: Optional[str]) -> None:
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _clean_fit(report: VerifyReport) -> bool:
    return (
        report.extras.get("fitted_mismatches") == 0
        and "fitted_scalar" in report.extras
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "qbinom":
        lines = []
        for n in range(args.n + 1):
            for r in range(n + 1):
                from .laurent import PolyContext, to_text

                poly = q_binomial(n, r).to_laurent(PolyContext(0))
                lines.append(f"[{n},{r}] = {to_text(poly)}")
        _emit(lines, args.out)
        return 0

    try:
        m_values = _parse_m_values(args.m)
    except ValueError as exc:
        parser.error(str(exc))

    reports: List[VerifyReport] = []
    acceptable = True
    for m in m_values:
        if args.command == "verify-ident":
            if args.mode == "exact":
                rep = verify_identity(m, threads=args.threads)
            else:
                rep = verify_identity_modp(
                    m,
                    trials=args.trials,
                    p=args.prime,
                    seed=args.seed,
                    threads=args.threads,
                )
            reports.append(rep)
            acceptable &= rep.is_zero
        elif args.command == "verify-dist":
            rep = verify_distribution(
                m, half_width=args.window, q_order=args.order, threads=args.threads
            )
            reports.append(rep)
            acceptable &= rep.is_zero or (args.diagnostic and _clean_fit(rep))
        elif args.command == "replay":
            stages, rep = proof_replay(
                m, half_width=args.window, q_order=args.order, threads=args.threads
            )
            reports.append(rep)
            stages_ok = all(s.residual_is_zero for s in stages)
            acceptable &= rep.is_zero or (
                args.diagnostic and stages_ok and _clean_fit(rep)
            )
        elif args.command == "delta-coeff":
            rep = verify_delta_coefficient(m, mutate=args.mutate)
            reports.append(rep)
            acceptable &= rep.is_zero
        elif args.command == "bench":
            start = time.perf_counter()
            if args.mode == "exact":
                rep = verify_identity(m, threads=args.threads)
                ok = rep.is_zero
            elif args.mode == "modular":
                rep = verify_identity_modp(
                    m,
                    trials=args.trials,
                    p=args.prime,
                    seed=args.seed,
                    threads=args.threads,
                )
                ok = rep.is_zero
            else:
                stages, rep = proof_replay(
                    m, half_width=args.window, q_order=args.order, threads=args.threads
                )
                rep.extras["stage_wall_ms"] = [s.elapsed_ms for s in stages]
                ok = all(s.residual_is_zero for s in stages) and _clean_fit(rep)
            rep.extras["wall_s"] = round(time.perf_counter() - start, 3)
            reports.append(rep)
            acceptable &= ok

    lines = [r.to_json(pretty=args.pretty, with_timings=args.timings) for r in reports]
    _emit(lines, args.out)
    return 0 if acceptable else 1


if __name__ == "__main__":
    sys.exit(main())
