"""Orchestration layer: one facade object per project root that ties the
store, the gate predicates, and the VA runner together. The CLI and the
HTTP API both go through this class, so command/endpoint parity falls out
of sharing it.
"""
from __future__ import annotations

import json
from pathlib import Path

import tomli

from . import convergence, critique, discovery, gates, lenses, machine, metrics, prompts
from .critique import CoverageMatrix, Finding
from .errors import (
    IllegalEdgeError,
    MatrixIncompleteError,
    MissingProjectError,
    ValidationError,
)
from .gates import GateEvaluation, VerificationAgent
from .lenses import ProjectContext
from .store import ProjectStore, ProjectState, now_iso, record_transition
from .verdict import APPROVED, REJECTED, GateVerdict

ENGINE_VERSION = "0.1.0"
CONFIG_FILE = "iacdm-config.toml"


class EngineConfig:
    """Per-project configuration (``iacdm-config.toml``): gate VA command
    specs and threshold overrides."""

    def __init__(self, data: dict | None = None):
        data = data or {}
        thresholds = data.get("thresholds", {})
        self.change_ratio_threshold = float(
            thresholds.get("change_ratio", convergence.DEFAULT_CHANGE_RATIO_THRESHOLD)
        )
        self.output_limit = int(
            data.get("va", {}).get("output_limit", gates.DEFAULT_OUTPUT_LIMIT_BYTES)
        )
        self.default_timeout = float(
            data.get("va", {}).get("timeout", gates.DEFAULT_TIMEOUT_SECONDS)
        )
        self.gate_vas: dict[str, list[VerificationAgent]] = {}
        for gate_id, section in data.get("gates", {}).items():
            agents = []
            for spec in section.get("va", []):
                agents.append(
                    VerificationAgent(
                        va_id=spec["id"],
                        kind=gates.AUTOMATIC,
                        program=spec["program"],
                        args=list(spec.get("args", [])),
                        workdir=spec.get("workdir", ""),
                        timeout=float(spec.get("timeout", self.default_timeout)),
                        veto_pattern=spec.get("veto_pattern", ""),
                    )
                )
            self.gate_vas[gate_id] = agents

    @classmethod
    def load(cls, root: Path) -> "EngineConfig":
        path = Path(root) / CONFIG_FILE
        if not path.exists():
            return cls()
        with open(path, "rb") as f:
            return cls(tomli.load(f))


class Project:
    """Facade over one project: loads state, applies operations, persists."""

    def __init__(self, root: Path):
        self.store = ProjectStore(root)
        self.config = EngineConfig.load(root)
        self.state: ProjectState = self.store.load()
        self.findings: dict[str, Finding] = self.store.load_findings()
        self.matrix: CoverageMatrix | None = self.store.load_matrix()

    @classmethod
    def init(cls, name: str, root: Path, context: ProjectContext | None = None) -> "Project":
        ProjectStore.init_project(name, context or ProjectContext(), root)
        return cls(root)

    @classmethod
    def open(cls, root: Path) -> "Project":
        return cls(root)

    def save(self) -> None:
        with self.store.lock():
            self.store.save(self.state)
            self.store.save_findings(self.findings)
            if self.matrix is not None:
                self.store.save_matrix(self.matrix)

    # -- discovery --------------------------------------------------------

    def set_award(self, criterion_id: int, points: int) -> discovery.DiscoveryScore:
        if not 1 <= criterion_id <= 10:
            raise ValidationError(f"criterion id must be 1..10, got {criterion_id}")
        awards = (
            [c.awarded for c in self.state.score.criteria]
            if self.state.score
            else [0] * 10
        )
        awards[criterion_id - 1] = points
        confirmed = self.state.score.operator_confirmed if self.state.score else False
        self.state.score = discovery.compute_score(awards)
        self.state.score.operator_confirmed = confirmed
        self.save()
        return self.state.score

    def set_awards(self, awards: list[int]) -> discovery.DiscoveryScore:
        confirmed = self.state.score.operator_confirmed if self.state.score else False
        self.state.score = discovery.compute_score(awards)
        self.state.score.operator_confirmed = confirmed
        self.save()
        return self.state.score

    def confirm_score(self, confirmed: bool = True) -> discovery.DiscoveryScore:
        if self.state.score is None:
            self.state.score = discovery.compute_score([0] * 10)
        self.state.score.operator_confirmed = confirmed
        self.save()
        return self.state.score

    def add_teachback(self, iteration: discovery.TeachBackIteration) -> None:
        discovery.append_teachback(self.state.teachbacks, iteration)
        self.save()

    def hsa_converge(self, level: int) -> None:
        discovery.mark_level_converged(self.state.hsa, level)
        self.save()

    def hsa_retroact(self, from_level: int, to_level: int, reason: str) -> None:
        discovery.record_retroaction(self.state.hsa, from_level, to_level, reason, now_iso())
        self.save()

    # -- context / lenses -------------------------------------------------

    def set_context_flag(self, flag: str, value: bool, rationale: str) -> None:
        if not rationale.strip():
            raise ValidationError("a rationale is required when deciding a context flag")
        self.state.context.set(flag, value)
        self.state.lens_activations = self._merge_activations(rationale_for_flag=(flag, rationale))
        self.save()

    def _merge_activations(
        self, rationale_for_flag: tuple[str, str] | None = None
    ) -> list[lenses.LensActivation]:
        computed = lenses.select_lenses(self.state.context)
        previous = {a.lens_id: a for a in self.state.lens_activations}
        flag_to_lens = {
            l.activation_condition: l.lens_id
            for l in lenses.builtin_catalog()
            if l.activation_condition
        }
        for act in computed:
            prev = previous.get(act.lens_id)
            if prev is not None:
                act.rationale = prev.rationale
            if rationale_for_flag and flag_to_lens.get(rationale_for_flag[0]) == act.lens_id:
                act.rationale = rationale_for_flag[1]
        return computed

    def activations(self) -> list[lenses.LensActivation]:
        if not self.state.lens_activations:
            self.state.lens_activations = self._merge_activations()
        return self.state.lens_activations

    def active_lens_ids(self) -> list[str]:
        return [a.lens_id for a in self.activations() if a.active]

    # -- matrix / findings ------------------------------------------------

    def ensure_matrix(self) -> CoverageMatrix:
        """(Re)build the matrix axes from the latest architecture and the
        active lens set, preserving assessments for surviving cells."""
        _, latest = self.store.latest_architectures(self.state)
        if latest is None:
            raise ValidationError("no architecture version registered yet")
        modules = latest.module_names()
        active = self.active_lens_ids()
        fresh = CoverageMatrix(modules=modules, active_lenses=active)
        if self.matrix is not None:
            for key, cell in self.matrix.cells.items():
                if key[0] in modules and key[1] in active:
                    fresh.cells[key] = cell
        self.matrix = fresh
        self.save()
        return fresh

    def assess(
        self, module: str, lens: str, cell_findings: list[dict] | None = None
    ) -> CoverageMatrix:
        if self.matrix is None:
            self.ensure_matrix()
        finding_objs = []
        for d in cell_findings or []:
            fid = d.get("finding_id") or f"f-{len(self.findings) + len(finding_objs) + 1}"
            existing = self.findings.get(fid)
            if existing is not None:
                finding_objs.append(existing)
            else:
                finding_objs.append(
                    Finding(
                        finding_id=fid,
                        module_ref=module,
                        lens_ref=lens,
                        severity=d["severity"],
                        description=d.get("description", ""),
                    )
                )
        critique.record_assessment(
            self.matrix, self.findings, module, lens, finding_objs, assessed_at=now_iso()
        )
        self.save()
        return self.matrix

    def triage(self, finding_id: str, decision: str, rationale: str = "") -> Finding:
        f = critique.triage_finding(self.findings, finding_id, decision, rationale)
        self.save()
        return f

    def resolve(self, finding_id: str, note: str = "") -> Finding:
        f = critique.resolve_finding(self.findings, finding_id, note)
        self.save()
        return f

    def concentration(self, severities: tuple[str, ...] | None = None) -> critique.ConcentrationReport:
        if self.matrix is None:
            raise MatrixIncompleteError("no coverage matrix yet")
        report = critique.concentration_analysis(self.matrix, self.findings, severities)
        report.decisions = list(self.state.concentration_decisions)
        return report

    def record_concentration_decision(self, flag: str, decision: str) -> None:
        if not decision.strip():
            raise ValidationError("concentration decisions require text")
        self.state.concentration_decisions.append({"flag": flag, "decision": decision})
        self.save()

    # -- architecture -----------------------------------------------------

    def register_architecture(self, source_dir: Path) -> convergence.ArchitectureVersion:
        with self.store.lock():
            version = self.store.register_architecture(self.state, source_dir)
            self.store.save(self.state)
        return version

    def convergence_preview(self) -> dict:
        prev, latest = self.store.latest_architectures(self.state)
        if latest is None:
            raise ValidationError("no architecture version registered yet")
        result: dict = {"latest_version": latest.version, "complexity": convergence.complexity(latest).to_dict()}
        if prev is not None:
            diff = convergence.structural_diff(prev, latest)
            verdict = convergence.evaluate_g4(
                diff, self.findings, self.config.change_ratio_threshold
            )
            result.update(
                {
                    "previous_version": prev.version,
                    "diff": diff.to_dict(),
                    "g4_preview": verdict.to_dict(),
                    "previous_complexity": convergence.complexity(prev).to_dict(),
                }
            )
        return result

    # -- micro-checks / scope ---------------------------------------------

    def add_micro_check(self, module: str, response: str, divergences: list[dict]) -> None:
        _, latest = self.store.latest_architectures(self.state)
        declared = latest.module_names() if latest else []
        record = gates.record_micro_check(declared, module, response, divergences)
        # a re-check for the same module supersedes the earlier record
        self.state.micro_checks = [
            m for m in self.state.micro_checks if m.module_ref != module
        ] + [record]
        self.save()

    def scope_check(self, codebase_root: Path) -> gates.ScopeInventory:
        """Presence/absence inventory from operator-authored files under
        ``specs/validation``: ``module_paths.json``, ``requirements.txt``,
        ``coverage.json``."""
        _, latest = self.store.latest_architectures(self.state)
        declared = latest.module_names() if latest else []
        validation = self.store.specs_dir / "validation"
        paths_file = validation / "module_paths.json"
        module_paths = json.loads(paths_file.read_text()) if paths_file.exists() else {}
        req_file = validation / "requirements.txt"
        requirements = []
        if req_file.exists():
            requirements = [
                line.strip()
                for line in req_file.read_text().splitlines()
                if line.strip() and not line.startswith("#")
            ]
        cov_file = validation / "coverage.json"
        coverage = json.loads(cov_file.read_text()) if cov_file.exists() else {}
        return gates.scope_inventory_check(
            declared, codebase_root, module_paths, requirements, coverage
        )

    # -- gate evaluation --------------------------------------------------

    def _gate_predicate(self, gate_id: str) -> GateVerdict | None:
        """Engine-computed predicate backing the human VA for gates whose
        criteria are mechanized. Returns None for purely judgmental gates."""
        if gate_id == "G0":
            score = self.state.score or discovery.compute_score([0] * 10)
            return discovery.evaluate_g0(score)
        if gate_id == "G2":
            if self.matrix is None:
                return GateVerdict(False, ["no coverage matrix recorded"])
            return critique.evaluate_g2(
                self.matrix, self.findings, self.state.concentration_decisions
            )
        if gate_id == "G3":
            prev, latest = self.store.latest_architectures(self.state)
            if prev is None or latest is None:
                return GateVerdict(False, ["complexity audit needs two architecture versions"])
            return convergence.evaluate_g3(prev, latest)
        if gate_id == "G4":
            prev, latest = self.store.latest_architectures(self.state)
            if prev is None or latest is None:
                return GateVerdict(False, ["convergence gate needs two architecture versions"])
            diff = convergence.structural_diff(prev, latest)
            return convergence.evaluate_g4(
                diff, self.findings, self.config.change_ratio_threshold
            )
        if gate_id == "G6":
            _, latest = self.store.latest_architectures(self.state)
            declared = latest.module_names() if latest else []
            ready, blocking = gates.g6_readiness(declared, self.state.micro_checks)
            return GateVerdict(ready, blocking, details={"micro_checks": len(self.state.micro_checks)})
        return None

    def run_gate(
        self, gate_id: str, human_verdicts: dict[str, tuple[str, str]] | None = None
    ) -> GateEvaluation:
        """Evaluate gate ``gate_id`` now.

        Automatic VAs come from the project config (falling back to the
        catalog placeholder, which fails loudly if unconfigured). Human VA
        verdicts are supplied by the caller; where the engine computes the
        gate's criterion, a failing predicate vetoes the human approval and
        its reasons become the recorded evidence.
        """
        defn = gates.gate_definition(gate_id)
        human_verdicts = human_verdicts or {}
        predicate = self._gate_predicate(gate_id)
        configured = self.config.gate_vas.get(gate_id, [])
        va_list = []
        auto_replaced = False
        for va in defn.va_list:
            if va.kind == gates.AUTOMATIC and configured and not auto_replaced:
                va_list.extend(configured)
                auto_replaced = True
            else:
                va_list.append(va)
        defn = gates.GateDefinition(defn.gate_id, defn.phase, va_list, defn.criteria_text)

        verdicts = []
        for va in defn.va_list:
            if va.kind == gates.AUTOMATIC:
                if not va.program:
                    raise ValidationError(
                        f"gate {gate_id} has no automatic VA command configured "
                        f"(add one under [gates.{gate_id}] in {CONFIG_FILE})"
                    )
                verdict, output = gates.run_automatic_va(va, self.store.root, self.config.output_limit)
                verdicts.append((va.va_id, verdict, output))
            else:
                human = human_verdicts.get(va.va_id) or human_verdicts.get("human")
                if predicate is not None and not predicate.approved:
                    verdicts.append((va.va_id, REJECTED, "; ".join(predicate.reasons)))
                elif human is not None:
                    v, note = human
                    if v not in (APPROVED, REJECTED):
                        raise ValidationError(f"invalid human verdict {v!r}")
                    verdicts.append((va.va_id, v, note))
                elif predicate is not None:
                    # mechanized criterion satisfied and no explicit operator
                    # verdict: the predicate stands in as the evidence
                    verdicts.append((va.va_id, APPROVED, "criterion satisfied"))
                else:
                    raise ValidationError(
                        f"gate {gate_id} requires a human verdict for VA {va.va_id}"
                    )

        evaluation = gates.evaluate_gate(
            defn, verdicts, eval_id=self.state.next_eval_id(), timestamp=now_iso()
        )
        if predicate is not None:
            evaluation.details.update(predicate.details)
        warnings = []
        if gate_id == "G0" and not self.state.teachbacks:
            warnings.append(
                "no teach-back iteration recorded before exiting discovery "
                "(possible discovery bypass)"
            )
        if gate_id == "G4" and evaluation.result == APPROVED:
            warnings.append(
                "architecture converged: implementation phases operate on "
                "bounded, fully specified tasks, so a cheaper model tier is "
                "usually sufficient from here on"
            )
        if warnings:
            evaluation.details["advisories"] = warnings
        self.state.gate_log.append(evaluation)
        self.save()
        return evaluation

    def advance(self, to_phase: int) -> ProjectState:
        """Record a transition using the most recent evaluation of the
        authorizing gate."""
        edge = (self.state.current_phase, to_phase)
        if not machine.is_legal_edge(*edge):
            raise IllegalEdgeError(f"illegal edge {edge[0]}->{edge[1]}")
        gate_id = machine.authorizing_gate(*edge)
        evaluation = self.state.latest_evaluation(gate_id)
        if evaluation is None:
            raise ValidationError(f"no evaluation of gate {gate_id} recorded yet")
        record_transition(self.state, to_phase, evaluation)
        self.save()
        return self.state

    # -- prompts ----------------------------------------------------------

    def emit_prompt(self, kind: str, lens_id: str = "", module: str = "") -> prompts.PromptScaffold:
        modules: list[str] = []
        try:
            _, latest = self.store.latest_architectures(self.state)
            if latest:
                modules = latest.module_names()
        except MissingProjectError:
            pass
        open_findings = sorted(
            f"{f.finding_id} [{f.severity}] {f.module_ref}/{f.lens_ref}: {f.description}"
            for f in self.findings.values()
            if f.status == critique.OPEN
        )
        scaffold = prompts.emit_prompt(
            phase=self.state.current_phase,
            kind=kind,
            project_name=self.state.name,
            lens_id=lens_id,
            module=module,
            active_lenses=self.active_lens_ids(),
            modules=modules,
            open_findings=open_findings,
        )
        out = self.store.specs_dir / "prompts" / scaffold.filename
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(scaffold.rendered_text)
        return scaffold

    # -- metrics ----------------------------------------------------------

    def log_metric(self, record: dict) -> None:
        path = self.store.specs_dir / "lessons" / "metrics.log"
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a") as f:
            f.write(json.dumps({"at": now_iso(), **record}, sort_keys=True) + "\n")

    def efficiency(self, i0: int, c: int) -> metrics.ContextEfficiency:
        result = metrics.context_efficiency(i0, c)
        self.log_metric({"kind": "context_efficiency", **result.to_dict()})
        return result

    def adoption(self, gate_costs: list[dict], error_scenarios: list[dict]) -> metrics.AdoptionEstimate:
        result = metrics.adoption_check(gate_costs, error_scenarios)
        self.log_metric({"kind": "adoption_check", **result.to_dict()})
        return result

    # -- status -----------------------------------------------------------

    def status(self) -> dict:
        pending_gate = f"G{self.state.current_phase}"
        return {
            "project_id": self.state.project_id,
            "name": self.state.name,
            "current_phase": self.state.current_phase,
            "phase_name": machine.PHASE_NAMES[self.state.current_phase],
            "iteration_count": self.state.iteration_count,
            "pending_gate": pending_gate,
            "transitions": len(self.state.transitions),
            "gate_evaluations": len(self.state.gate_log),
            "score_total": self.state.score.total if self.state.score else 0,
            "open_findings": sum(1 for f in self.findings.values() if f.status == critique.OPEN),
            "architecture_versions": list(self.state.architecture_versions),
        }
