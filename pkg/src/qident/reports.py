"""Machine-readable verification reports with a stable serialization.

Every verifier returns a ``VerifyReport``.  The JSON rendering uses a fixed
key order (identity, m, mode, verdict, residual_terms, summand_count,
elapsed_ms, then sorted extras) so that reports are byte-identical across
thread counts.  Wall-clock time is only recorded when explicitly requested
(``with_timings``); otherwise ``elapsed_ms`` serializes as 0 so the byte
stream stays deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Dict, Optional


@dataclass
class VerifyReport:
    identity: str
    m: int
    mode: str
    verdict: str  # "zero" | "nonzero"
    residual_terms: int = 0
    summand_count: int = 0
    elapsed_ms: int = 0
    extras: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.verdict not in ("zero", "nonzero"):
            raise ValueError(f"bad verdict {self.verdict!r}")
        if (self.verdict == "zero") != (self.residual_terms == 0):
            raise ValueError("verdict zero iff residual_terms == 0")

    @property
    def is_zero(self) -> bool:
        return self.verdict == "zero"

    def as_dict(self, with_timings: bool = False) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "identity": self.identity,
            "m": self.m,
            "mode": self.mode,
            "verdict": self.verdict,
            "residual_terms": self.residual_terms,
            "summand_count": self.summand_count,
            "elapsed_ms": self.elapsed_ms if with_timings else 0,
        }
        for key in sorted(self.extras):
            out[key] = self.extras[key]
        return out

    def to_json(self, pretty: bool = False, with_timings: bool = False) -> str:
        data = self.as_dict(with_timings=with_timings)
        if pretty:
            return json.dumps(data, indent=2)
        return json.dumps(data, separators=(",", ":"))
