"""The GA/VA verification model: verification agents, the G0-G7 gate
catalog, the conjunction evaluator, rejection feedback, the automatic-VA
command runner, the Phase-5 scope inventory, and per-module adversarial
micro-check records.

The engine never generates artifact content: it records verdicts over
artifacts produced elsewhere.
"""
from __future__ import annotations

import shutil
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    AgentNotAutomaticError,
    CommandNotFoundError,
    CommandTimeoutError,
    UnknownModuleError,
    VerdictSetMismatchError,
)
from .verdict import APPROVED, REJECTED

AUTOMATIC = "automatic"
HUMAN = "human"

DEFAULT_TIMEOUT_SECONDS = 600.0
DEFAULT_OUTPUT_LIMIT_BYTES = 1024 * 1024

MICRO_CHECK_QUESTION = "where does this implementation diverge from specs/?"


@dataclass
class VerificationAgent:
    va_id: str
    kind: str  # automatic | human
    # automatic agents
    program: str = ""
    args: list[str] = field(default_factory=list)
    workdir: str = ""
    timeout: float = DEFAULT_TIMEOUT_SECONDS
    retain_output: bool = True
    # a match of this pattern in captured output forces rejection even on exit 0
    veto_pattern: str = ""
    # human agents
    approver: str = ""

    def to_dict(self) -> dict:
        return {
            "va_id": self.va_id,
            "kind": self.kind,
            "program": self.program,
            "args": list(self.args),
            "workdir": self.workdir,
            "timeout": self.timeout,
            "retain_output": self.retain_output,
            "veto_pattern": self.veto_pattern,
            "approver": self.approver,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationAgent":
        return cls(
            va_id=d["va_id"],
            kind=d["kind"],
            program=d.get("program", ""),
            args=list(d.get("args", [])),
            workdir=d.get("workdir", ""),
            timeout=float(d.get("timeout", DEFAULT_TIMEOUT_SECONDS)),
            retain_output=bool(d.get("retain_output", True)),
            veto_pattern=d.get("veto_pattern", ""),
            approver=d.get("approver", ""),
        )


@dataclass
class GateDefinition:
    gate_id: str  # G0..G7; gate k exits phase k
    phase: int
    va_list: list[VerificationAgent]
    criteria_text: str

    def va_ids(self) -> list[str]:
        return [va.va_id for va in self.va_list]


@dataclass
class FeedbackRecord:
    gate_id: str
    items: list[dict]  # {va_id, message}
    consumed: bool = False

    def to_dict(self) -> dict:
        return {"gate_id": self.gate_id, "items": list(self.items), "consumed": self.consumed}

    @classmethod
    def from_dict(cls, d: dict) -> "FeedbackRecord":
        return cls(gate_id=d["gate_id"], items=list(d["items"]), consumed=bool(d.get("consumed", False)))


@dataclass
class GateEvaluation:
    eval_id: str
    gate_id: str
    per_va: list[dict]  # {va_id, verdict, evidence}
    result: str  # approved | rejected
    feedback: FeedbackRecord | None = None
    timestamp: str = ""
    # predicate evidence (e.g. rubric total for G0, skip_phase3_allowed for
    # G2, change ratio for G4) recorded alongside the verdict
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "eval_id": self.eval_id,
            "gate_id": self.gate_id,
            "per_va": list(self.per_va),
            "result": self.result,
            "feedback": self.feedback.to_dict() if self.feedback else None,
            "timestamp": self.timestamp,
            "details": dict(self.details),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GateEvaluation":
        fb = d.get("feedback")
        return cls(
            eval_id=d["eval_id"],
            gate_id=d["gate_id"],
            per_va=list(d["per_va"]),
            result=d["result"],
            feedback=FeedbackRecord.from_dict(fb) if fb else None,
            timestamp=d.get("timestamp", ""),
            details=dict(d.get("details", {})),
        )


@dataclass
class ScopeInventory:
    declared_modules: list[str]
    present: dict[str, bool]
    requirements: list[str]
    coverage: dict[str, list[str]]

    @property
    def missing_modules(self) -> list[str]:
        return [m for m in self.declared_modules if not self.present.get(m, False)]

    @property
    def uncovered_requirements(self) -> list[str]:
        return [r for r in self.requirements if not self.coverage.get(r)]

    @property
    def passed(self) -> bool:
        return not self.missing_modules and not self.uncovered_requirements

    def to_dict(self) -> dict:
        return {
            "declared_modules": list(self.declared_modules),
            "present": dict(self.present),
            "requirements": list(self.requirements),
            "coverage": {r: list(ms) for r, ms in self.coverage.items()},
            "missing_modules": self.missing_modules,
            "uncovered_requirements": self.uncovered_requirements,
            "passed": self.passed,
        }


@dataclass
class MicroCheckRecord:
    module_ref: str
    question: str
    response: str
    divergences: list[dict]  # {spec_ref, description, resolved}

    @property
    def clean(self) -> bool:
        return all(d.get("resolved", False) for d in self.divergences)

    def to_dict(self) -> dict:
        return {
            "module_ref": self.module_ref,
            "question": self.question,
            "response": self.response,
            "divergences": list(self.divergences),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MicroCheckRecord":
        return cls(
            module_ref=d["module_ref"],
            question=d["question"],
            response=d.get("response", ""),
            divergences=list(d.get("divergences", [])),
        )


# Gate catalog: VA composition per phase. G0-G4 human, G5 automatic,
# G6 automatic + human, G7 human.
_GATE_ROWS = [
    ("G0", 0, [HUMAN], "Score >=90/100: problem understanding"),
    ("G1", 1, [HUMAN],
     "Design review: all modules identified; interfaces between modules defined; "
     "no open questions that would block Phase 2"),
    ("G2", 2, [HUMAN],
     "Coverage matrix: critique complete; criticals recorded for Phase 3; "
     "decision for importants"),
    ("G3", 3, [HUMAN], "Complexity audit: complexity <= previous version"),
    ("G4", 4, [HUMAN],
     "Convergence gate: structural change <15% vs. prior version; zero critical "
     "findings; all important findings resolved or explicitly deferred with rationale"),
    ("G5", 5, [AUTOMATIC], "Compile + lint: syntax, types, style"),
    ("G6", 6, [AUTOMATIC, HUMAN],
     "Test suite + manual: functional correctness + UX; spec coverage verified"),
    ("G7", 7, [HUMAN], "Retrospective: lessons + method evolution"),
]


def gate_catalog() -> list[GateDefinition]:
    """The eight gate definitions G0-G7 with their VA composition."""
    catalog = []
    for gate_id, phase, kinds, criteria in _GATE_ROWS:
        vas = []
        for i, kind in enumerate(kinds):
            va_id = f"{gate_id.lower()}-{kind}" if kinds.count(kind) == 1 else f"{gate_id.lower()}-{kind}-{i}"
            vas.append(VerificationAgent(va_id=va_id, kind=kind))
        catalog.append(GateDefinition(gate_id=gate_id, phase=phase, va_list=vas, criteria_text=criteria))
    return catalog


def gate_definition(gate_id: str) -> GateDefinition:
    for defn in gate_catalog():
        if defn.gate_id == gate_id:
            return defn
    raise VerdictSetMismatchError(f"unknown gate: {gate_id}")


def evaluate_gate(
    defn: GateDefinition,
    verdicts: list[tuple[str, str, str]],
    eval_id: str = "",
    timestamp: str = "",
) -> GateEvaluation:
    """Conjunction of all assigned VA verdicts.

    ``verdicts`` must cover exactly the definition's VA list (no missing, no
    extra). Feedback is assembled from every rejection and is present exactly
    when the gate is rejected.
    """
    expected = set(defn.va_ids())
    got = [v[0] for v in verdicts]
    if set(got) != expected or len(got) != len(expected):
        raise VerdictSetMismatchError(
            f"verdicts must cover exactly {sorted(expected)}, got {sorted(got)}"
        )
    per_va = [
        {"va_id": va_id, "verdict": verdict, "evidence": evidence}
        for va_id, verdict, evidence in verdicts
    ]
    for entry in per_va:
        if entry["verdict"] not in (APPROVED, REJECTED):
            raise VerdictSetMismatchError(f"invalid verdict {entry['verdict']!r}")
    approved = all(entry["verdict"] == APPROVED for entry in per_va)
    feedback = None
    if not approved:
        feedback = FeedbackRecord(
            gate_id=defn.gate_id,
            items=[
                {"va_id": e["va_id"], "message": e["evidence"] or "rejected"}
                for e in per_va
                if e["verdict"] == REJECTED
            ],
        )
    return GateEvaluation(
        eval_id=eval_id,
        gate_id=defn.gate_id,
        per_va=per_va,
        result=APPROVED if approved else REJECTED,
        feedback=feedback,
        timestamp=timestamp,
    )


def run_automatic_va(
    agent: VerificationAgent,
    target: Path,
    output_limit: int = DEFAULT_OUTPUT_LIMIT_BYTES,
) -> tuple[str, str]:
    """Run an automatic VA command in ``target``; approved iff exit status is
    zero and the veto pattern (if configured) does not appear in the output.

    Output is captured (stdout + stderr interleaved) and truncated to
    ``output_limit`` bytes with the truncation marked.
    """
    if agent.kind != AUTOMATIC:
        raise AgentNotAutomaticError(f"VA {agent.va_id} is not automatic")
    target = Path(target)
    workdir = target / agent.workdir if agent.workdir else target
    if shutil.which(agent.program) is None and not Path(agent.program).exists():
        raise CommandNotFoundError(f"command not found: {agent.program}")
    try:
        proc = subprocess.run(
            [agent.program, *agent.args],
            cwd=str(workdir),
            capture_output=True,
            timeout=agent.timeout,
        )
    except subprocess.TimeoutExpired as exc:
        raise CommandTimeoutError(
            f"VA {agent.va_id} timed out after {agent.timeout}s",
            details={"program": agent.program},
        ) from exc
    raw = proc.stdout + proc.stderr
    truncated = len(raw) > output_limit
    output = raw[:output_limit].decode("utf-8", errors="replace")
    if truncated:
        output += f"\n[output truncated at {output_limit} bytes]"
    if not agent.retain_output:
        output = ""
    verdict = APPROVED if proc.returncode == 0 else REJECTED
    if verdict == APPROVED and agent.veto_pattern and agent.veto_pattern in output:
        verdict = REJECTED
        output += f"\n[veto pattern matched: {agent.veto_pattern!r}]"
    return verdict, output


def scope_inventory_check(
    declared: list[str],
    codebase_root: Path,
    module_paths: dict[str, str],
    requirements: list[str],
    coverage_claims: dict[str, list[str]],
) -> ScopeInventory:
    """Phase-5 exit check: presence/absence only.

    Every declared module must exist at its expected path and every
    validation requirement must be covered by at least one module. Failures
    are data on the returned inventory, not exceptions.
    """
    if set(module_paths) != set(declared):
        raise UnknownModuleError(
            "module_paths keys must equal the declared module set",
            details={
                "missing": sorted(set(declared) - set(module_paths)),
                "extra": sorted(set(module_paths) - set(declared)),
            },
        )
    root = Path(codebase_root)
    present = {m: (root / module_paths[m]).exists() for m in declared}
    coverage = {r: list(coverage_claims.get(r, [])) for r in requirements}
    return ScopeInventory(
        declared_modules=list(declared),
        present=present,
        requirements=list(requirements),
        coverage=coverage,
    )


def record_micro_check(
    declared_modules: list[str],
    module_ref: str,
    response: str,
    divergences: list[dict] | None = None,
) -> MicroCheckRecord:
    """Store the adversarial micro-check outcome for one implemented module.

    The stored question is always the adversarial form, never a confirmation
    form.
    """
    if module_ref not in declared_modules:
        raise UnknownModuleError(f"module not in current architecture: {module_ref}")
    return MicroCheckRecord(
        module_ref=module_ref,
        question=MICRO_CHECK_QUESTION,
        response=response,
        divergences=[
            {
                "spec_ref": d.get("spec_ref", ""),
                "description": d.get("description", ""),
                "resolved": bool(d.get("resolved", False)),
            }
            for d in (divergences or [])
        ],
    )


def g6_readiness(
    declared_modules: list[str], records: list[MicroCheckRecord]
) -> tuple[bool, list[str]]:
    """G6 readiness: every Phase-5 module carries a micro-check record with
    all divergences resolved. Returns (ready, blocking items)."""
    by_module = {r.module_ref: r for r in records}
    blocking = []
    for m in declared_modules:
        rec = by_module.get(m)
        if rec is None:
            blocking.append(f"module {m}: no micro-check record")
        elif not rec.clean:
            unresolved = sum(1 for d in rec.divergences if not d.get("resolved"))
            blocking.append(f"module {m}: {unresolved} unresolved divergence(s)")
    return (not blocking, blocking)
