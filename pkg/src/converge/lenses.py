"""The adversarial lens catalog and activation logic.

19 builtin lenses in three categories: 7 universal (always applied),
8 situational (activated by a project context flag), 4 domain-transfer
(activated by a detected signal, also modelled as a context flag). The
catalog is extensible through user-supplied ``.lens`` files; builtin lenses
can never be removed, only supplemented.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ValidationError

UNIVERSAL = "universal"
SITUATIONAL = "situational"
DOMAIN_TRANSFER = "domain_transfer"

CATEGORIES = (UNIVERSAL, SITUATIONAL, DOMAIN_TRANSFER)


@dataclass(frozen=True)
class Lens:
    lens_id: str
    name: str
    category: str
    central_question: str
    failure_class: str
    activation_condition: str | None = None  # context flag name; None for universal

    def to_dict(self) -> dict:
        return {
            "lens_id": self.lens_id,
            "name": self.name,
            "category": self.category,
            "central_question": self.central_question,
            "failure_class": self.failure_class,
            "activation_condition": self.activation_condition,
        }


@dataclass
class ProjectContext:
    """Twelve explicit boolean flags, one per conditional lens.

    Defaults are false; the methodology expects each to be set as an explicit
    decision at Phase 1.
    """

    # situational
    external_dependencies: bool = False
    user_facing_interface: bool = False
    replaces_production_system: bool = False
    significant_compute_costs: bool = False
    automated_decisions_affecting_people: bool = False
    multi_actor_workflows: bool = False
    # Any of: multiple teams, data domains, compliance requirements.
    multi_team_or_compliance: bool = False
    production_operability: bool = False
    # domain-transfer signals
    feedback_or_state_synchronization: bool = False
    multiple_independent_actors: bool = False
    inter_component_contracts: bool = False
    long_lived_maintenance: bool = False

    @classmethod
    def flag_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def get(self, flag: str) -> bool:
        if flag not in self.flag_names():
            raise ValidationError(f"unknown context flag: {flag}")
        return getattr(self, flag)

    def set(self, flag: str, value: bool) -> None:
        if flag not in self.flag_names():
            raise ValidationError(f"unknown context flag: {flag}")
        setattr(self, flag, bool(value))

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.flag_names()}

    @classmethod
    def from_dict(cls, d: dict) -> "ProjectContext":
        ctx = cls()
        for name in cls.flag_names():
            if name in d:
                setattr(ctx, name, bool(d[name]))
        return ctx


@dataclass
class LensActivation:
    lens_id: str
    active: bool
    rationale: str = ""
    decided_at_phase: int = 1

    def to_dict(self) -> dict:
        return {
            "lens_id": self.lens_id,
            "active": self.active,
            "rationale": self.rationale,
            "decided_at_phase": self.decided_at_phase,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LensActivation":
        return cls(
            lens_id=d["lens_id"],
            active=bool(d["active"]),
            rationale=d.get("rationale", ""),
            decided_at_phase=int(d.get("decided_at_phase", 1)),
        )


_UNIVERSAL_LENSES = [
    Lens(
        "assumptions", "Assumptions", UNIVERSAL,
        "What does this design assume without declaring?",
        "Failures from flawed/outdated system models",
    ),
    Lens(
        "architectural", "Architectural", UNIVERSAL,
        "Can each module be replaced, removed, or tested in isolation?",
        "Hidden coupling, circular dependencies",
    ),
    Lens(
        "implementability", "Implementability", UNIVERSAL,
        "Can I code this module in one session with available context?",
        "Incomplete specs, insufficient granularization",
    ),
    Lens(
        "scientific", "Scientific", UNIVERSAL,
        "Does every value, formula, and algorithm have a verifiable reference?",
        "Invented parameters, plausibility-based logic",
    ),
    Lens(
        "security", "Security", UNIVERSAL,
        "How would an attacker exploit this surface with minimum effort?",
        "Unanalyzed attack surface",
    ),
    Lens(
        "performance", "Performance", UNIVERSAL,
        "Where are the bottlenecks and what is the asymptotic behavior?",
        "Hidden bottlenecks, scale degradation",
    ),
    Lens(
        "regulatory", "Regulatory", UNIVERSAL,
        "Does every regulatory requirement trace to a module?",
        "Regulatory non-compliance",
    ),
]

_SITUATIONAL_LENSES = [
    Lens(
        "resilience", "Resilience", SITUATIONAL,
        "What happens when each external dependency fails, slows down, or returns garbage?",
        "Cascading failures, retry storms",
        "external_dependencies",
    ),
    Lens(
        "ui_ux", "UI/UX", SITUATIONAL,
        "Where can a user get lost, stuck, or locked out of this interface?",
        "Confusing flows, dead-end states, accessibility failures",
        "user_facing_interface",
    ),
    Lens(
        "migration_coexistence", "Migration / Coexistence", SITUATIONAL,
        "How does this replace the existing system without losing data, and how do we roll back?",
        "Data loss, regression vs. legacy, impossible rollback",
        "replaces_production_system",
    ),
    Lens(
        "sustainability", "Sustainability", SITUATIONAL,
        "What does this cost to run at scale, and what grows without bound?",
        "Overprovisioned infrastructure, infinite data retention",
        "significant_compute_costs",
    ),
    Lens(
        "ethical_human_impact", "Ethical / Human Impact", SITUATIONAL,
        "Who is harmed when this system decides wrongly, and what recourse do they have?",
        "Algorithmic bias, absence of human recourse",
        "automated_decisions_affecting_people",
    ),
    Lens(
        "process_workflow", "Process / Workflow", SITUATIONAL,
        "Which states, actors, or off-happy-path transitions does this workflow not handle?",
        "Orphaned states, missing actors, happy-path bias",
        "multi_actor_workflows",
    ),
    Lens(
        "governance_accountability", "Governance / Accountability", SITUATIONAL,
        "Who owns each piece of data, and which flows escape that ownership?",
        "No data ownership, shadow data flows",
        "multi_team_or_compliance",
    ),
    Lens(
        "observability_operability", "Observability / Operability", SITUATIONAL,
        "When this misbehaves in production, how do we see it and diagnose it?",
        "Opaque systems that cannot be diagnosed in production",
        "production_operability",
    ),
]

_DOMAIN_TRANSFER_LENSES = [
    Lens(
        "control_engineering", "Control Engineering", DOMAIN_TRANSFER,
        "Where does the system generate an error signal and correct it? Risk of oscillation or state drift?",
        "Systems that react to events but do not regulate state: oscillation, drift, runaway feedback",
        "feedback_or_state_synchronization",
    ),
    Lens(
        "game_theory", "Game Theory", DOMAIN_TRANSFER,
        "Do system actors have aligned incentives? Where does the design assume cooperation and may encounter strategic defection?",
        "Architectures that work under cooperation assumptions but collapse under adversarial or strategic behavior",
        "multiple_independent_actors",
    ),
    Lens(
        "linguistics_grammar", "Linguistics / Grammar", DOMAIN_TRANSFER,
        "Is the interface contract unambiguous? Can two correct implementations of the same contract produce incompatible behaviors?",
        "Protocol ambiguity: two correct implementations that are mutually incompatible",
        "inter_component_contracts",
    ),
    Lens(
        "mechanical_engineering", "Mechanical Engineering", DOMAIN_TRANSFER,
        "Where are the tolerances? Does the system work only at exact specification or does it tolerate variation?",
        "Rigid coupling disguised as tolerance: failure from small deviations in dependency versions, environment, or load",
        "long_lived_maintenance",
    ),
]

_BUILTIN = _UNIVERSAL_LENSES + _SITUATIONAL_LENSES + _DOMAIN_TRANSFER_LENSES


def builtin_catalog() -> list[Lens]:
    """The 19 builtin lenses in stable order: universal, situational,
    domain-transfer; table order within each category."""
    return list(_BUILTIN)


def load_user_lenses(lens_dir: Path) -> list[Lens]:
    """Load user-supplied lens extensions from ``<dir>/*.lens`` files.

    Format: one ``key: value`` per line with keys id, name, category,
    question, failure_class and (for conditional lenses) condition naming an
    existing context flag. User lenses may not shadow builtin ids.
    """
    lenses = []
    builtin_ids = {l.lens_id for l in _BUILTIN}
    flags = set(ProjectContext.flag_names())
    for path in sorted(Path(lens_dir).glob("*.lens")):
        entries: dict[str, str] = {}
        for line in path.read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#") or ":" not in line:
                continue
            key, _, value = line.partition(":")
            entries[key.strip()] = value.strip()
        missing = {"id", "name", "category", "question", "failure_class"} - entries.keys()
        if missing:
            raise ValidationError(f"{path.name}: missing keys {sorted(missing)}")
        if entries["category"] not in CATEGORIES:
            raise ValidationError(f"{path.name}: unknown category {entries['category']!r}")
        if entries["id"] in builtin_ids:
            raise ValidationError(f"{path.name}: cannot shadow builtin lens {entries['id']!r}")
        condition = entries.get("condition")
        if entries["category"] == UNIVERSAL:
            condition = None
        elif condition not in flags:
            raise ValidationError(
                f"{path.name}: conditional lens requires a known context flag, got {condition!r}"
            )
        lenses.append(
            Lens(
                entries["id"], entries["name"], entries["category"],
                entries["question"], entries["failure_class"], condition,
            )
        )
    return lenses


def select_lenses(
    context: ProjectContext, catalog: list[Lens] | None = None
) -> list[LensActivation]:
    """Compute the activation set for a fully-specified context.

    All universal lenses come out active; each conditional lens is active iff
    its flag is true. Inactive conditionals are still emitted (active=False)
    so that a rationale can be attached to the decision either way.
    """
    catalog = catalog if catalog is not None else builtin_catalog()
    activations = []
    for lens in catalog:
        if lens.category == UNIVERSAL:
            activations.append(LensActivation(lens.lens_id, active=True))
        else:
            activations.append(
                LensActivation(lens.lens_id, active=context.get(lens.activation_condition))
            )
    return activations


def validate_activation(
    activations: list[LensActivation], catalog: list[Lens] | None = None
) -> list[str]:
    """Check an activation list against the catalog; violations are data,
    not exceptions."""
    catalog = catalog if catalog is not None else builtin_catalog()
    by_id = {l.lens_id: l for l in catalog}
    seen = {a.lens_id for a in activations}
    violations = []
    for a in activations:
        lens = by_id.get(a.lens_id)
        if lens is None:
            violations.append(f"unknown lens_id: {a.lens_id}")
            continue
        if lens.category == UNIVERSAL and not a.active:
            violations.append(f"universal lens marked inactive: {a.lens_id}")
        if lens.category != UNIVERSAL and not a.rationale.strip():
            violations.append(f"rationale required for conditional lens: {a.lens_id}")
    for lens in catalog:
        if lens.category == UNIVERSAL and lens.lens_id not in seen:
            violations.append(f"universal lens missing: {lens.lens_id}")
    return violations
