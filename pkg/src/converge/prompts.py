"""Prompt scaffold emitter.

The engine never calls a model: scaffolds are deterministic text assembled
from templates plus project state, written under ``specs/prompts/`` for the
operator to paste into whatever tool they use. Every scaffold asks for
refutation, never validation.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import KindPhaseMismatchError, ValidationError
from .gates import MICRO_CHECK_QUESTION
from .lenses import Lens, builtin_catalog

DISCOVERY_QUESTIONS = "discovery_questions"
TEACHBACK_REQUEST = "teachback_request"
LENS_CRITIQUE = "lens_critique"
SIMPLIFICATION = "simplification"
MICRO_CHECK = "micro_check"

KINDS = (DISCOVERY_QUESTIONS, TEACHBACK_REQUEST, LENS_CRITIQUE, SIMPLIFICATION, MICRO_CHECK)

# Which phases each scaffold kind is legal in.
KIND_PHASES = {
    DISCOVERY_QUESTIONS: {0},
    TEACHBACK_REQUEST: {0},
    LENS_CRITIQUE: {2},
    SIMPLIFICATION: {3},
    MICRO_CHECK: {5},
}


@dataclass
class PromptScaffold:
    phase: int
    kind: str
    rendered_text: str
    filename: str


def _lens_by_id(lens_id: str, catalog: list[Lens]) -> Lens:
    for lens in catalog:
        if lens.lens_id == lens_id:
            return lens
    raise ValidationError(f"unknown lens: {lens_id}")


def emit_prompt(
    phase: int,
    kind: str,
    project_name: str,
    lens_id: str = "",
    module: str = "",
    active_lenses: list[str] | None = None,
    modules: list[str] | None = None,
    open_findings: list[str] | None = None,
    catalog: list[Lens] | None = None,
) -> PromptScaffold:
    """Render a scaffold for the given phase and kind.

    Deterministic for identical inputs; raises when the kind is not legal in
    the phase.
    """
    if kind not in KINDS:
        raise ValidationError(f"unknown scaffold kind: {kind}")
    if phase not in KIND_PHASES[kind]:
        raise KindPhaseMismatchError(f"scaffold kind {kind} is not legal in phase {phase}")
    catalog = catalog if catalog is not None else builtin_catalog()

    if kind == DISCOVERY_QUESTIONS:
        text = (
            f"Project: {project_name}\n\n"
            "You are in problem discovery. Ask structured questions about the\n"
            "domain, use cases, vocabulary, constraints, and negative scope.\n"
            "Do not propose any technical solution. Surface what has not been\n"
            "said: implicit assumptions, ambiguous terms, missing actors.\n"
        )
        filename = "discovery-questions.md"
    elif kind == TEACHBACK_REQUEST:
        text = (
            f"Project: {project_name}\n\n"
            "Explain back, in the domain's own language, what problem this\n"
            "project solves, for whom, and what is explicitly out of scope.\n"
            "Do not ask whether your understanding is correct; state it so\n"
            "the operator can refute it.\n"
        )
        filename = "teachback-request.md"
    elif kind == LENS_CRITIQUE:
        lens = _lens_by_id(lens_id, catalog)
        module_list = "\n".join(f"- {m}" for m in (modules or [])) or "- (none registered)"
        text = (
            f"Project: {project_name}\n"
            f"Lens: {lens.name} ({lens.category})\n\n"
            f"Central question: {lens.central_question}\n"
            f"Failure class: {lens.failure_class}\n\n"
            "Attack the current architecture through this lens only. For each\n"
            "module below, either produce concrete findings (with severity:\n"
            "critical, important, or suggestion) or state explicitly that this\n"
            "lens yields no finding for it. Refute; do not validate.\n\n"
            f"Modules:\n{module_list}\n"
        )
        filename = f"lens-critique-{lens.lens_id}.md"
    elif kind == SIMPLIFICATION:
        findings_list = "\n".join(f"- {f}" for f in (open_findings or [])) or "- (none)"
        text = (
            f"Project: {project_name}\n\n"
            "Produce the next architecture version. Resolve the open findings\n"
            "below while maintaining or reducing complexity (module count +\n"
            "interface count). Do not add components in response to fragility;\n"
            "simplify. Declare renames explicitly in the manifest.\n\n"
            f"Open findings:\n{findings_list}\n"
        )
        filename = "simplification.md"
    else:  # MICRO_CHECK
        if not module:
            raise ValidationError("micro_check scaffold requires a module name")
        text = (
            f"Project: {project_name}\n"
            f"Module just implemented: {module}\n\n"
            f"Adversarial micro-check: {MICRO_CHECK_QUESTION}\n\n"
            "List every divergence between this implementation and the\n"
            "declarations in specs/, however small. Do not confirm\n"
            "correctness; enumerate deviations.\n"
        )
        filename = f"micro-check-{module}.md"

    if kind == LENS_CRITIQUE and active_lenses is not None and lens_id not in active_lenses:
        raise ValidationError(f"lens {lens_id} is not active for this project")

    return PromptScaffold(phase=phase, kind=kind, rendered_text=text, filename=filename)
