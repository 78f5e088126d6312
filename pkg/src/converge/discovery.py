"""Phase 0 mechanics: the weighted discovery rubric, the G0 predicate,
teach-back iteration records, and the five-level HSA ladder.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    DownwardRetroactionError,
    FoundationNotConvergedError,
    NonConsecutiveCycleError,
    ValidationError,
)
from .verdict import GateVerdict

# Weights for criteria 1-10; sum to 100.
RUBRIC_WEIGHTS = (10, 15, 10, 15, 10, 10, 10, 5, 10, 5)

RUBRIC_NAMES = (
    "problem clarity",
    "complete use cases",
    "defined vocabulary",
    "resolved ambiguities",
    "explicit out-of-scope",
    "measurable success criteria",
    "validated assumptions",
    "research and specs/ populated",
    "operator confirmed",
    "AI confident",
)

G0_THRESHOLD = 90

HSA_LEVELS = ("Domain", "Problem", "Elements", "Processes", "Product")

OPEN = "open"
CONVERGED = "converged"


@dataclass
class RubricCriterion:
    criterion_id: int  # 1..10
    name: str
    max_points: int
    awarded: int

    def to_dict(self) -> dict:
        return {
            "criterion_id": self.criterion_id,
            "name": self.name,
            "max_points": self.max_points,
            "awarded": self.awarded,
        }


@dataclass
class DiscoveryScore:
    criteria: list[RubricCriterion]
    total: int
    operator_confirmed: bool = False

    def to_dict(self) -> dict:
        return {
            "criteria": [c.to_dict() for c in self.criteria],
            "total": self.total,
            "operator_confirmed": self.operator_confirmed,
            "weights": list(RUBRIC_WEIGHTS),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DiscoveryScore":
        score = compute_score([c["awarded"] for c in d["criteria"]])
        score.operator_confirmed = bool(d.get("operator_confirmed", False))
        return score


@dataclass
class TeachBackIteration:
    cycle: int
    collection_notes: str
    synthesis: str
    validation_outcome: str  # "accepted" or "corrected"
    correction_notes: str = ""
    score_snapshot: DiscoveryScore | None = None

    def to_dict(self) -> dict:
        return {
            "cycle": self.cycle,
            "collection_notes": self.collection_notes,
            "synthesis": self.synthesis,
            "validation_outcome": self.validation_outcome,
            "correction_notes": self.correction_notes,
            "score_snapshot": self.score_snapshot.to_dict() if self.score_snapshot else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TeachBackIteration":
        snap = d.get("score_snapshot")
        return cls(
            cycle=int(d["cycle"]),
            collection_notes=d.get("collection_notes", ""),
            synthesis=d.get("synthesis", ""),
            validation_outcome=d["validation_outcome"],
            correction_notes=d.get("correction_notes", ""),
            score_snapshot=DiscoveryScore.from_dict(snap) if snap else None,
        )


@dataclass
class HsaState:
    """The five-level discovery ladder with epistemic restriction (level N+1
    cannot converge before level N) and forced upward retroaction."""

    statuses: list[str] = field(default_factory=lambda: [OPEN] * 5)
    notes: list[str] = field(default_factory=lambda: [""] * 5)
    retroactions: list[dict] = field(default_factory=list)

    def level_status(self, level: int) -> str:
        return self.statuses[level - 1]

    def converged_levels(self) -> list[int]:
        return [i + 1 for i, s in enumerate(self.statuses) if s == CONVERGED]

    def to_dict(self) -> dict:
        return {
            "levels": [
                {"level": i + 1, "name": HSA_LEVELS[i], "status": self.statuses[i], "notes": self.notes[i]}
                for i in range(5)
            ],
            "retroactions": list(self.retroactions),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HsaState":
        hsa = cls()
        for entry in d.get("levels", []):
            idx = int(entry["level"]) - 1
            hsa.statuses[idx] = entry["status"]
            hsa.notes[idx] = entry.get("notes", "")
        hsa.retroactions = [dict(r) for r in d.get("retroactions", [])]
        return hsa


def compute_score(awards: list[int]) -> DiscoveryScore:
    """Build a DiscoveryScore from 10 integer awards (already in points)."""
    if len(awards) != 10:
        raise ValidationError(f"expected exactly 10 awards, got {len(awards)}")
    criteria = []
    for i, (award, weight, name) in enumerate(zip(awards, RUBRIC_WEIGHTS, RUBRIC_NAMES), start=1):
        if not isinstance(award, int) or isinstance(award, bool):
            raise ValidationError(f"criterion {i}: award must be an integer")
        if not 0 <= award <= weight:
            raise ValidationError(
                f"criterion {i} ({name}): award {award} outside [0, {weight}]"
            )
        criteria.append(RubricCriterion(i, name, weight, award))
    return DiscoveryScore(criteria=criteria, total=sum(awards))


def evaluate_g0(score: DiscoveryScore) -> GateVerdict:
    """Approved iff total >= 90 AND the operator explicitly confirmed.

    The confirmation is a separate condition from criterion 9's points.
    """
    reasons = []
    if score.total < G0_THRESHOLD:
        reasons.append(f"score below threshold: {score.total} < {G0_THRESHOLD}")
    if not score.operator_confirmed:
        reasons.append("operator confirmation missing")
    return GateVerdict(
        approved=not reasons,
        reasons=reasons,
        details={"total": score.total, "operator_confirmed": score.operator_confirmed},
    )


def mark_level_converged(hsa: HsaState, level: int) -> HsaState:
    """Converge a ladder level; level N requires level N-1 already converged."""
    if not 1 <= level <= 5:
        raise ValidationError(f"level must be 1..5, got {level}")
    if level > 1 and hsa.statuses[level - 2] != CONVERGED:
        raise FoundationNotConvergedError(
            f"level {level - 1} ({HSA_LEVELS[level - 2]}) is still open; "
            f"cannot converge level {level}"
        )
    hsa.statuses[level - 1] = CONVERGED
    return hsa


def record_retroaction(
    hsa: HsaState, from_level: int, to_level: int, reason: str, timestamp: str = ""
) -> HsaState:
    """Log an upward retroaction and reopen every level >= to_level."""
    for lvl in (from_level, to_level):
        if not 1 <= lvl <= 5:
            raise ValidationError(f"level must be 1..5, got {lvl}")
    if to_level >= from_level:
        raise DownwardRetroactionError(
            f"retroaction must revise upward: to_level {to_level} >= from_level {from_level}"
        )
    if any(hsa.statuses[i] != CONVERGED for i in range(from_level - 1)):
        raise FoundationNotConvergedError(
            f"level {from_level} was never reached: a shallower level is still open"
        )
    hsa.retroactions.append(
        {"from_level": from_level, "to_level": to_level, "reason": reason, "timestamp": timestamp}
    )
    for i in range(to_level - 1, 5):
        hsa.statuses[i] = OPEN
    return hsa


def append_teachback(
    teachbacks: list[TeachBackIteration], iteration: TeachBackIteration
) -> list[TeachBackIteration]:
    """Append an iteration; cycle numbers must be consecutive from 1."""
    expected = (teachbacks[-1].cycle + 1) if teachbacks else 1
    if iteration.cycle != expected:
        raise NonConsecutiveCycleError(
            f"expected cycle {expected}, got {iteration.cycle}"
        )
    teachbacks.append(iteration)
    return teachbacks
