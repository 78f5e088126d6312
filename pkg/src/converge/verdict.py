"""Shared gate-verdict value type used by every gate predicate."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

APPROVED = "approved"
REJECTED = "rejected"


@dataclass
class GateVerdict:
    """Outcome of a gate predicate.

    ``reasons`` enumerates every failed clause when rejected (empty when
    approved). ``details`` carries predicate-specific evidence, e.g. the
    change ratio for the convergence gate or ``skip_phase3_allowed`` for the
    critique gate.
    """

    approved: bool
    reasons: list[str] = field(default_factory=list)
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def result(self) -> str:
        return APPROVED if self.approved else REJECTED

    def to_dict(self) -> dict[str, Any]:
        return {
            "approved": self.approved,
            "reasons": list(self.reasons),
            "details": dict(self.details),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "GateVerdict":
        return cls(
            approved=bool(d["approved"]),
            reasons=list(d.get("reasons", [])),
            details=dict(d.get("details", {})),
        )
