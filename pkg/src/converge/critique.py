"""Phase 2 artifacts: findings, the modules x lenses coverage matrix with
explicit no-finding cells, concentration analysis, triage, and the G2
predicate.

A cell that was never assessed is not the same as a cell assessed clean:
the gate verifies completeness of critique, so "inspected, no findings" is
recorded as an explicit outcome.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    IllegalDecisionError,
    InactiveLensError,
    MatrixIncompleteError,
    UnknownFindingError,
    UnknownModuleError,
    ValidationError,
)
from .verdict import GateVerdict

CRITICAL = "critical"
IMPORTANT = "important"
SUGGESTION = "suggestion"
SEVERITIES = (CRITICAL, IMPORTANT, SUGGESTION)

CARRIED_TO_PHASE3 = "carried_to_phase3"
RESOLVE_IN_PHASE3 = "resolve_in_phase3"
ACCEPT_RISK = "accept_risk"
DEFERRED = "deferred"
DECISIONS = (CARRIED_TO_PHASE3, RESOLVE_IN_PHASE3, ACCEPT_RISK, DEFERRED)

OPEN = "open"
RESOLVED = "resolved"
ACCEPTED = "accepted"
STATUS_DEFERRED = "deferred"

EXPLICIT_NONE = "explicit_none"
FINDINGS = "findings"

# Legal triage decisions per severity. Criticals are always carried into
# Phase 3; importants and suggestions take an explicit operator decision.
LEGAL_DECISIONS = {
    CRITICAL: {CARRIED_TO_PHASE3},
    IMPORTANT: {RESOLVE_IN_PHASE3, ACCEPT_RISK, DEFERRED},
    SUGGESTION: {RESOLVE_IN_PHASE3, ACCEPT_RISK, DEFERRED},
}

# Decisions that require a documented justification.
RATIONALE_REQUIRED = {ACCEPT_RISK, DEFERRED}


@dataclass
class Finding:
    finding_id: str
    module_ref: str
    lens_ref: str
    severity: str
    description: str
    decision: str | None = None
    decision_rationale: str = ""
    status: str = OPEN

    def to_dict(self) -> dict:
        return {
            "finding_id": self.finding_id,
            "module_ref": self.module_ref,
            "lens_ref": self.lens_ref,
            "severity": self.severity,
            "description": self.description,
            "decision": self.decision,
            "decision_rationale": self.decision_rationale,
            "status": self.status,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Finding":
        return cls(
            finding_id=d["finding_id"],
            module_ref=d["module_ref"],
            lens_ref=d["lens_ref"],
            severity=d["severity"],
            description=d.get("description", ""),
            decision=d.get("decision"),
            decision_rationale=d.get("decision_rationale", ""),
            status=d.get("status", OPEN),
        )


@dataclass
class CellAssessment:
    module_ref: str
    lens_ref: str
    outcome: str  # "findings" or "explicit_none"
    finding_ids: list[str] = field(default_factory=list)
    assessed_at: str = ""

    def to_dict(self) -> dict:
        return {
            "module_ref": self.module_ref,
            "lens_ref": self.lens_ref,
            "outcome": self.outcome,
            "finding_ids": list(self.finding_ids),
            "assessed_at": self.assessed_at,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CellAssessment":
        return cls(
            module_ref=d["module_ref"],
            lens_ref=d["lens_ref"],
            outcome=d["outcome"],
            finding_ids=list(d.get("finding_ids", [])),
            assessed_at=d.get("assessed_at", ""),
        )


@dataclass
class CoverageMatrix:
    modules: list[str]
    active_lenses: list[str]
    cells: dict[tuple[str, str], CellAssessment] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "modules": list(self.modules),
            "active_lenses": list(self.active_lenses),
            "cells": [c.to_dict() for c in self.cells.values()],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CoverageMatrix":
        matrix = cls(modules=list(d["modules"]), active_lenses=list(d["active_lenses"]))
        for cd in d.get("cells", []):
            cell = CellAssessment.from_dict(cd)
            matrix.cells[(cell.module_ref, cell.lens_ref)] = cell
        return matrix


@dataclass
class ConcentrationReport:
    per_module: dict[str, float]
    per_lens: dict[str, float]
    module_flags: list[str]  # fraction 1.0 -> redesign candidate
    lens_flags: list[str]  # fraction 1.0 -> systemic failure
    decisions: list[dict] = field(default_factory=list)

    def all_flags(self) -> list[str]:
        return [f"module:{m}" for m in self.module_flags] + [
            f"lens:{l}" for l in self.lens_flags
        ]

    def to_dict(self) -> dict:
        return {
            "per_module": dict(self.per_module),
            "per_lens": dict(self.per_lens),
            "module_flags": list(self.module_flags),
            "lens_flags": list(self.lens_flags),
            "decisions": list(self.decisions),
        }


def record_assessment(
    matrix: CoverageMatrix,
    findings: dict[str, Finding],
    module: str,
    lens: str,
    cell_findings: list[Finding] | None = None,
    assessed_at: str = "",
) -> CoverageMatrix:
    """Upsert a cell assessment; ``cell_findings`` empty/None means an
    explicit clean assessment. New findings are stored; criticals enter with
    decision carried_to_phase3 and status open."""
    if module not in matrix.modules:
        raise UnknownModuleError(f"unknown module: {module}")
    if lens not in matrix.active_lenses:
        raise InactiveLensError(f"lens not active for this project: {lens}")
    cell_findings = cell_findings or []
    for f in cell_findings:
        if f.severity not in SEVERITIES:
            raise ValidationError(f"unknown severity: {f.severity}")
        if (f.module_ref, f.lens_ref) != (module, lens):
            raise ValidationError(
                f"finding {f.finding_id} does not match cell ({module}, {lens})"
            )
        if f.severity == CRITICAL:
            f.decision = CARRIED_TO_PHASE3
        findings[f.finding_id] = f
    if cell_findings:
        cell = CellAssessment(
            module, lens, FINDINGS, [f.finding_id for f in cell_findings], assessed_at
        )
    else:
        cell = CellAssessment(module, lens, EXPLICIT_NONE, [], assessed_at)
    matrix.cells[(module, lens)] = cell
    return matrix


def coverage_complete(matrix: CoverageMatrix) -> tuple[bool, list[tuple[str, str]]]:
    """True iff every (module, active lens) pair carries a cell assessment;
    the missing pairs are enumerated otherwise."""
    missing = [
        (m, l)
        for m in matrix.modules
        for l in matrix.active_lenses
        if (m, l) not in matrix.cells
    ]
    return (not missing, missing)


def concentration_analysis(
    matrix: CoverageMatrix,
    findings: dict[str, Finding] | None = None,
    severities: tuple[str, ...] | None = None,
) -> ConcentrationReport:
    """Second-order diagnostic over a complete matrix.

    A module with findings under every active lens is flagged as a redesign
    candidate; a lens with findings under every module as a systemic failure.
    ``severities`` restricts which finding severities count (default: all).
    """
    complete, missing = coverage_complete(matrix)
    if not complete:
        raise MatrixIncompleteError(
            f"{len(missing)} cells unassessed", details={"missing": missing}
        )

    def cell_counts(cell: CellAssessment) -> bool:
        if cell.outcome != FINDINGS:
            return False
        if severities is None:
            return True
        assert findings is not None
        return any(
            findings[fid].severity in severities
            for fid in cell.finding_ids
            if fid in findings
        )

    per_module = {}
    for m in matrix.modules:
        hits = sum(1 for l in matrix.active_lenses if cell_counts(matrix.cells[(m, l)]))
        per_module[m] = hits / len(matrix.active_lenses) if matrix.active_lenses else 0.0
    per_lens = {}
    for l in matrix.active_lenses:
        hits = sum(1 for m in matrix.modules if cell_counts(matrix.cells[(m, l)]))
        per_lens[l] = hits / len(matrix.modules) if matrix.modules else 0.0
    return ConcentrationReport(
        per_module=per_module,
        per_lens=per_lens,
        module_flags=[m for m, frac in per_module.items() if frac == 1.0],
        lens_flags=[l for l, frac in per_lens.items() if frac == 1.0],
    )


def triage_finding(
    findings: dict[str, Finding], finding_id: str, decision: str, rationale: str = ""
) -> Finding:
    """Record an explicit triage decision on an open finding."""
    if finding_id not in findings:
        raise UnknownFindingError(f"unknown finding: {finding_id}")
    f = findings[finding_id]
    if f.status != OPEN:
        raise IllegalDecisionError(f"finding {finding_id} is not open (status {f.status})")
    if decision not in DECISIONS:
        raise IllegalDecisionError(f"unknown decision: {decision}")
    if decision not in LEGAL_DECISIONS[f.severity]:
        raise IllegalDecisionError(
            f"decision {decision} is illegal for severity {f.severity}"
        )
    if decision in RATIONALE_REQUIRED and not rationale.strip():
        raise IllegalDecisionError(f"decision {decision} requires a documented rationale")
    f.decision = decision
    f.decision_rationale = rationale
    if decision == ACCEPT_RISK:
        f.status = ACCEPTED
    elif decision == DEFERRED:
        f.status = STATUS_DEFERRED
    # carried_to_phase3 / resolve_in_phase3 stay open until resolved
    return f


def resolve_finding(findings: dict[str, Finding], finding_id: str, note: str = "") -> Finding:
    """Mark an open finding resolved (Phase 3 closed it out)."""
    if finding_id not in findings:
        raise UnknownFindingError(f"unknown finding: {finding_id}")
    f = findings[finding_id]
    if f.status != OPEN:
        raise IllegalDecisionError(f"finding {finding_id} is not open (status {f.status})")
    f.status = RESOLVED
    if note:
        f.decision_rationale = note
    return f


def evaluate_g2(
    matrix: CoverageMatrix,
    findings: dict[str, Finding],
    concentration_decisions: list[dict] | None = None,
) -> GateVerdict:
    """Critique gate: matrix complete, every important finding carries a
    decision, every concentration flag carries an operator decision.

    The verdict's details carry skip_phase3_allowed, true exactly when the
    complete critique produced zero findings.
    """
    reasons = []
    complete, missing = coverage_complete(matrix)
    if not complete:
        reasons.append(
            f"coverage matrix incomplete: {len(missing)} cells unassessed"
        )
    undecided = [
        f.finding_id
        for f in findings.values()
        if f.severity == IMPORTANT and f.decision is None
    ]
    if undecided:
        reasons.append("important findings without decision: " + ", ".join(sorted(undecided)))
    flags_decided: set[str] = {
        d["flag"] for d in (concentration_decisions or []) if d.get("decision")
    }
    if complete:
        report = concentration_analysis(matrix, findings)
        undecided_flags = [fl for fl in report.all_flags() if fl not in flags_decided]
        if undecided_flags:
            reasons.append(
                "concentration flags without operator decision: " + ", ".join(undecided_flags)
            )
    skip_allowed = complete and not findings
    return GateVerdict(
        approved=not reasons,
        reasons=reasons,
        details={"skip_phase3_allowed": skip_allowed, "total_findings": len(findings)},
    )
