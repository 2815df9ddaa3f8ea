#!/usr/bin/env python3
"""Timing sweep for the cleared-identity verifier, exact vs modular.

Prints one line per (m, mode) and optionally dumps the numbers as JSON so
runs can be compared across machines. The exact path streams the orbit sum
without materializing it; the modular path is a seeded multi-point zero
test, so its cost is trials * (one evaluation per permutation).
"""

from __future__ import annotations

import argparse
import json
import time
from pathlib import Path

from qident.identity import verify_identity, verify_identity_modp


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-exact", type=int, default=5)
    ap.add_argument("--max-modular", type=int, default=7)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--json-out", default=None, help="optional results file")
    args = ap.parse_args()

    rows = []
    for m in range(args.max_exact + 1):
        start = time.perf_counter()
        rep = verify_identity(m, threads=args.threads)
        wall = time.perf_counter() - start
        rows.append(
            {
                "m": m,
                "mode": "exact",
                "wall_s": round(wall, 3),
                "verdict": rep.verdict,
                "summands": rep.summand_count,
                "monomials": rep.extras.get("monomials_streamed"),
            }
        )
        print(
            f"m={m} exact    {wall:8.2f}s  {rep.verdict:>7}  "
            f"{rep.summand_count} summands, "
            f"{rep.extras.get('monomials_streamed')} monomials streamed"
        )
    for m in range(args.max_exact + 1, args.max_modular + 1):
        start = time.perf_counter()
        rep = verify_identity_modp(m, trials=args.trials, threads=args.threads)
        wall = time.perf_counter() - start
        rows.append(
            {
                "m": m,
                "mode": "modular",
                "wall_s": round(wall, 3),
                "verdict": rep.verdict,
                "summands": rep.summand_count,
                "trials": args.trials,
            }
        )
        print(
            f"m={m} modular  {wall:8.2f}s  {rep.verdict:>7}  "
            f"{rep.summand_count} summands, {args.trials} trials"
        )
    if args.json_out:
        Path(args.json_out).write_text(
            json.dumps(rows, indent=2) + "\n", encoding="utf-8"
        )
    return 0 if all(r["verdict"] == "zero" for r in rows) else 1


if __name__ == "__main__":
    raise SystemExit(main())
