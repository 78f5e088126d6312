from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

from converge import machine
from converge.engine import Project
from converge.gates import GateEvaluation
from converge.lenses import ProjectContext
from converge.store import ProjectState, ProjectStore, record_transition
from converge.verdict import APPROVED, REJECTED


# one pass/fail line per acceptance criterion, printed after capture ends
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    failed = [
        rep.nodeid.split("::")[-1]
        for rep in terminalreporter.stats.get("failed", [])
        if "test_acceptance" in rep.nodeid
    ]
    if not ACCEPTANCE_LINES and not failed:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
    for name in failed:
        terminalreporter.write_line(f"FAIL {name}")


def write_manifest(directory: Path, version: int, modules, interfaces=(), assumptions=(), negative_scope=(), renames=None):
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "version": version,
        "modules": [{"name": n, "responsibility": r} for n, r in modules],
        "interfaces": [
            {"provider": p, "consumer": c, "contract": t} for p, c, t in interfaces
        ],
        "assumptions": list(assumptions),
        "negative_scope": list(negative_scope),
    }
    if renames:
        manifest["renames"] = renames
    (directory / "manifest.json").write_text(json.dumps(manifest))
    return directory


@pytest.fixture
def project(tmp_path) -> Project:
    return Project.init("fixture", tmp_path / "proj")


def make_evaluation(state: ProjectState, gate_id: str, result: str) -> GateEvaluation:
    ev = GateEvaluation(
        eval_id=state.next_eval_id(),
        gate_id=gate_id,
        per_va=[{"va_id": f"{gate_id.lower()}-human", "verdict": result, "evidence": "t"}],
        result=result,
        timestamp="2026-01-01T00:00:00+00:00",
    )
    if result == REJECTED:
        from converge.gates import FeedbackRecord

        ev.feedback = FeedbackRecord(gate_id=gate_id, items=[{"va_id": "h", "message": "no"}])
    if gate_id == "G2":
        ev.details["total_findings"] = 0
    state.gate_log.append(ev)
    return ev


def random_walk(rng: random.Random, max_steps: int = 12) -> list[tuple[int, int]]:
    """A random legal transition sequence starting at phase 0."""
    phase = 0
    steps = []
    for _ in range(rng.randint(0, max_steps)):
        choices = [e for e in machine.LEGAL_EDGES if e[0] == phase]
        if not choices:
            break
        edge = rng.choice(sorted(choices))
        steps.append(edge)
        phase = edge[1]
    return steps


def apply_walk(state: ProjectState, walk: list[tuple[int, int]]) -> ProjectState:
    for from_phase, to_phase in walk:
        gate_id = machine.authorizing_gate(from_phase, to_phase)
        result = machine.required_gate_result(from_phase, to_phase)
        ev = make_evaluation(state, gate_id, result)
        record_transition(state, to_phase, ev)
    return state


def random_state(rng: random.Random, name: str = "rand") -> ProjectState:
    context = ProjectContext()
    for flag in ProjectContext.flag_names():
        context.set(flag, rng.random() < 0.5)
    state = ProjectState(
        project_id=f"pid-{rng.randint(0, 10**9)}",
        name=name,
        context=context,
        created_at="2026-01-01T00:00:00+00:00",
        updated_at="2026-01-01T00:00:00+00:00",
    )
    apply_walk(state, random_walk(rng))
    if rng.random() < 0.7:
        from converge.discovery import compute_score, RUBRIC_WEIGHTS

        state.score = compute_score([rng.randint(0, w) for w in RUBRIC_WEIGHTS])
        state.score.operator_confirmed = rng.random() < 0.5
    return state
