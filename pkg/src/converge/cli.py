"""The ``converge`` command line interface.

Every mutation reachable through the HTTP API is reachable here too; both
surfaces delegate to :class:`converge.engine.Project`.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__, machine
from .discovery import TeachBackIteration
from .engine import Project
from .errors import ConvergeError
from .lenses import ProjectContext, builtin_catalog
from .verdict import APPROVED, REJECTED


class Ctx:
    def __init__(self, root: Path, fmt: str, quiet: bool):
        self.root = root
        self.fmt = fmt
        self.quiet = quiet
        self._project: Project | None = None

    @property
    def project(self) -> Project:
        if self._project is None:
            self._project = Project.open(self.root)
        return self._project

    def emit(self, payload, human: str | None = None):
        if self.quiet:
            return
        if self.fmt == "structured":
            click.echo(json.dumps(payload, indent=2, sort_keys=True, default=str))
        else:
            click.echo(human if human is not None else json.dumps(payload, indent=2, default=str))


def _run(ctx_obj: Ctx, fn):
    try:
        return fn()
    except ConvergeError as exc:
        if not ctx_obj.quiet:
            if ctx_obj.fmt == "structured":
                click.echo(
                    json.dumps({"error": {"code": exc.code, "message": exc.message, "details": exc.details}}),
                    err=True,
                )
            else:
                click.echo(f"error [{exc.code}]: {exc.message}", err=True)
        sys.exit(exc.exit_code)


@click.group()
@click.option("--root", type=click.Path(path_type=Path), default=Path("."), help="Project root directory.")
@click.option("--format", "fmt", type=click.Choice(["human", "structured"]), default="human")
@click.option("--quiet", is_flag=True, default=False)
@click.version_option(__version__)
@click.pass_context
def main(ctx, root: Path, fmt: str, quiet: bool):
    """Process engine for gated, adversarially critiqued development."""
    ctx.obj = Ctx(root, fmt, quiet)


@main.command()
@click.argument("name")
@click.pass_obj
def init(obj: Ctx, name: str):
    """Initialize a new project in --root."""
    def go():
        project = Project.init(name, obj.root)
        obj.emit(project.status(), f"initialized project {name!r} at {obj.root} (phase 0)")
    _run(obj, go)


@main.command()
@click.pass_obj
def status(obj: Ctx):
    """Show phase, iteration count, and the pending gate."""
    def go():
        s = obj.project.status()
        obj.emit(
            s,
            f"{s['name']}: phase {s['current_phase']} ({s['phase_name']}), "
            f"iterations {s['iteration_count']}, pending gate {s['pending_gate']}, "
            f"open findings {s['open_findings']}",
        )
    _run(obj, go)


# -- score ------------------------------------------------------------------

@main.group()
def score():
    """Discovery rubric awards."""


@score.command("set")
@click.argument("criterion_id", type=int)
@click.argument("points", type=int)
@click.pass_obj
def score_set(obj: Ctx, criterion_id: int, points: int):
    def go():
        s = obj.project.set_award(criterion_id, points)
        obj.emit(s.to_dict(), f"criterion {criterion_id} = {points}; total {s.total}/100")
    _run(obj, go)


@score.command("show")
@click.pass_obj
def score_show(obj: Ctx):
    def go():
        project = obj.project
        s = project.state.score
        if s is None:
            obj.emit({"total": 0, "criteria": []}, "no awards recorded yet")
            return
        lines = [
            f"  {c.criterion_id:2d}. {c.name}: {c.awarded}/{c.max_points}" for c in s.criteria
        ]
        obj.emit(
            s.to_dict(),
            "\n".join(lines) + f"\ntotal: {s.total}/100, confirmed: {s.operator_confirmed}",
        )
    _run(obj, go)


@score.command("confirm")
@click.option("--revoke", is_flag=True, default=False)
@click.pass_obj
def score_confirm(obj: Ctx, revoke: bool):
    def go():
        s = obj.project.confirm_score(not revoke)
        obj.emit(s.to_dict(), f"operator confirmation: {s.operator_confirmed}")
    _run(obj, go)


# -- teach-back / HSA ---------------------------------------------------------

@main.group()
def teachback():
    """Teach-back iteration records."""


@teachback.command("add")
@click.option("--synthesis", required=True)
@click.option("--outcome", type=click.Choice(["accepted", "corrected"]), required=True)
@click.option("--notes", default="")
@click.option("--collection", default="")
@click.pass_obj
def teachback_add(obj: Ctx, synthesis: str, outcome: str, notes: str, collection: str):
    def go():
        project = obj.project
        cycle = (project.state.teachbacks[-1].cycle + 1) if project.state.teachbacks else 1
        snapshot = project.state.score
        project.add_teachback(
            TeachBackIteration(
                cycle=cycle,
                collection_notes=collection,
                synthesis=synthesis,
                validation_outcome=outcome,
                correction_notes=notes,
                score_snapshot=snapshot,
            )
        )
        obj.emit({"cycle": cycle}, f"teach-back cycle {cycle} recorded ({outcome})")
    _run(obj, go)


@main.group()
def hsa():
    """Hierarchical semantic analysis ladder."""


@hsa.command("converge")
@click.argument("level", type=int)
@click.pass_obj
def hsa_converge(obj: Ctx, level: int):
    def go():
        obj.project.hsa_converge(level)
        obj.emit(obj.project.state.hsa.to_dict(), f"level {level} converged")
    _run(obj, go)


@hsa.command("retroact")
@click.argument("from_level", type=int)
@click.argument("to_level", type=int)
@click.option("--reason", required=True)
@click.pass_obj
def hsa_retroact(obj: Ctx, from_level: int, to_level: int, reason: str):
    def go():
        obj.project.hsa_retroact(from_level, to_level, reason)
        obj.emit(obj.project.state.hsa.to_dict(), f"retroaction {from_level}->{to_level} logged")
    _run(obj, go)


# -- lenses -------------------------------------------------------------------

@main.group()
def lens():
    """Lens catalog and context flags."""


@lens.command("list")
@click.option("--active", "active_only", is_flag=True, default=False)
@click.pass_obj
def lens_list(obj: Ctx, active_only: bool):
    def go():
        project = obj.project
        activations = {a.lens_id: a for a in project.activations()}
        rows = []
        for l in builtin_catalog():
            act = activations.get(l.lens_id)
            if active_only and not (act and act.active):
                continue
            rows.append({**l.to_dict(), "active": bool(act and act.active)})
        human = "\n".join(
            f"  [{'x' if r['active'] else ' '}] {r['lens_id']} ({r['category']}): {r['central_question']}"
            for r in rows
        )
        obj.emit(rows, human)
    _run(obj, go)


@lens.command("set")
@click.argument("flag")
@click.argument("value", type=click.Choice(["true", "false"]))
@click.option("--rationale", required=True)
@click.pass_obj
def lens_set(obj: Ctx, flag: str, value: str, rationale: str):
    def go():
        obj.project.set_context_flag(flag, value == "true", rationale)
        active = obj.project.active_lens_ids()
        obj.emit({"flag": flag, "value": value == "true", "active_lenses": active},
                 f"{flag} = {value}; {len(active)} lenses active")
    _run(obj, go)


# -- architecture -------------------------------------------------------------

@main.group()
def arch():
    """Architecture version registration."""


@arch.command("register")
@click.argument("directory", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.pass_obj
def arch_register(obj: Ctx, directory: Path):
    def go():
        version = obj.project.register_architecture(directory)
        obj.emit(version.to_dict(), f"registered architecture v{version.version} "
                                    f"({len(version.modules)} modules, {len(version.interfaces)} interfaces)")
    _run(obj, go)


@main.command("converge-check")
@click.pass_obj
def converge_check(obj: Ctx):
    """Latest structural diff and convergence-gate preview."""
    def go():
        preview = obj.project.convergence_preview()
        if "diff" in preview:
            g4 = preview["g4_preview"]
            human = (
                f"v{preview['previous_version']} -> v{preview['latest_version']}: "
                f"change ratio {preview['diff']['change_ratio']:.4f} "
                f"(threshold {g4['details']['threshold']}); "
                f"G4 preview: {'approved' if g4['approved'] else 'rejected'}"
            )
            if g4["reasons"]:
                human += "\n  " + "\n  ".join(g4["reasons"])
        else:
            human = f"only v{preview['latest_version']} registered; nothing to diff"
        obj.emit(preview, human)
    _run(obj, go)


# -- matrix / findings --------------------------------------------------------

@main.group()
def matrix():
    """Coverage matrix operations."""


@matrix.command("init")
@click.pass_obj
def matrix_init(obj: Ctx):
    def go():
        m = obj.project.ensure_matrix()
        obj.emit(m.to_dict(), f"matrix axes: {len(m.modules)} modules x {len(m.active_lenses)} lenses")
    _run(obj, go)


@matrix.command("assess")
@click.argument("module")
@click.argument("lens_id")
@click.option("--finding", "finding_specs", multiple=True,
              help="severity:description (repeatable); omit for an explicit clean cell")
@click.pass_obj
def matrix_assess(obj: Ctx, module: str, lens_id: str, finding_specs: tuple[str, ...]):
    def go():
        parsed = []
        for spec in finding_specs:
            severity, _, description = spec.partition(":")
            parsed.append({"severity": severity, "description": description})
        obj.project.assess(module, lens_id, parsed)
        outcome = f"{len(parsed)} finding(s)" if parsed else "explicit none"
        obj.emit({"module": module, "lens": lens_id, "outcome": outcome},
                 f"assessed ({module}, {lens_id}): {outcome}")
    _run(obj, go)


@matrix.command("show")
@click.pass_obj
def matrix_show(obj: Ctx):
    def go():
        m = obj.project.matrix
        if m is None:
            obj.emit({}, "no matrix yet (run: converge matrix init)")
            return
        lines = []
        for mod in m.modules:
            cells = []
            for l in m.active_lenses:
                cell = m.cells.get((mod, l))
                cells.append("." if cell is None else ("o" if cell.outcome == "explicit_none" else "F"))
            lines.append(f"  {mod:24s} {' '.join(cells)}")
        header = "  " + " " * 24 + " ".join(l[:1] for l in m.active_lenses)
        obj.emit(m.to_dict(), header + "\n" + "\n".join(lines) + "\n  (. unassessed, o clean, F findings)")
    _run(obj, go)


@matrix.command("check")
@click.pass_obj
def matrix_check(obj: Ctx):
    def go():
        from .critique import coverage_complete
        m = obj.project.matrix or obj.project.ensure_matrix()
        complete, missing = coverage_complete(m)
        payload = {"complete": complete, "missing": [list(p) for p in missing]}
        if complete:
            obj.emit(payload, "matrix complete")
        else:
            human = "matrix incomplete; missing cells:\n" + "\n".join(
                f"  ({mod}, {l})" for mod, l in missing
            )
            obj.emit(payload, human)
            sys.exit(1)
    _run(obj, go)


@main.group()
def finding():
    """Finding records and triage."""


@finding.command("add")
@click.argument("module")
@click.argument("lens_id")
@click.argument("severity", type=click.Choice(["critical", "important", "suggestion"]))
@click.argument("description")
@click.pass_obj
def finding_add(obj: Ctx, module: str, lens_id: str, severity: str, description: str):
    def go():
        project = obj.project
        if project.matrix is None:
            project.ensure_matrix()
        cell = project.matrix.cells.get((module, lens_id))
        existing = [{"finding_id": fid} for fid in (cell.finding_ids if cell else [])]
        project.assess(module, lens_id, existing + [{"severity": severity, "description": description}])
        new_cell = project.matrix.cells[(module, lens_id)]
        obj.emit({"finding_id": new_cell.finding_ids[-1]},
                 f"finding {new_cell.finding_ids[-1]} recorded ({severity})")
    _run(obj, go)


@finding.command("triage")
@click.argument("finding_id")
@click.argument("decision", type=click.Choice(
    ["carried_to_phase3", "resolve_in_phase3", "accept_risk", "deferred"]))
@click.option("--rationale", default="")
@click.pass_obj
def finding_triage(obj: Ctx, finding_id: str, decision: str, rationale: str):
    def go():
        f = obj.project.triage(finding_id, decision, rationale)
        obj.emit(f.to_dict(), f"{finding_id}: decision {decision}, status {f.status}")
    _run(obj, go)


@finding.command("resolve")
@click.argument("finding_id")
@click.option("--note", default="")
@click.pass_obj
def finding_resolve(obj: Ctx, finding_id: str, note: str):
    def go():
        f = obj.project.resolve(finding_id, note)
        obj.emit(f.to_dict(), f"{finding_id}: resolved")
    _run(obj, go)


@finding.command("list")
@click.pass_obj
def finding_list(obj: Ctx):
    def go():
        rows = [f.to_dict() for f in obj.project.findings.values()]
        human = "\n".join(
            f"  {r['finding_id']} [{r['severity']}/{r['status']}] "
            f"{r['module_ref']}/{r['lens_ref']}: {r['description']}"
            for r in sorted(rows, key=lambda r: r["finding_id"])
        ) or "  (none)"
        obj.emit(rows, human)
    _run(obj, go)


@main.group()
def concentration():
    """Concentration analysis over the coverage matrix."""


@concentration.command("show")
@click.pass_obj
def concentration_show(obj: Ctx):
    def go():
        report = obj.project.concentration()
        human_lines = [
            f"  module {m}: {frac:.2f}" for m, frac in report.per_module.items()
        ] + [f"  lens {l}: {frac:.2f}" for l, frac in report.per_lens.items()]
        if report.module_flags:
            human_lines.append("  redesign candidates: " + ", ".join(report.module_flags))
        if report.lens_flags:
            human_lines.append("  systemic failures: " + ", ".join(report.lens_flags))
        obj.emit(report.to_dict(), "\n".join(human_lines))
    _run(obj, go)


@concentration.command("decide")
@click.argument("flag")
@click.option("--decision", required=True)
@click.pass_obj
def concentration_decide(obj: Ctx, flag: str, decision: str):
    def go():
        obj.project.record_concentration_decision(flag, decision)
        obj.emit({"flag": flag, "decision": decision}, f"decision recorded for {flag}")
    _run(obj, go)


# -- gates --------------------------------------------------------------------

@main.group()
def gate():
    """Gate evaluation."""


def _human_verdicts(approve: bool | None, approver: str, note: str):
    if approve is None:
        return {}
    verdict = APPROVED if approve else REJECTED
    evidence = note or (f"approved by {approver}" if approve else f"rejected by {approver}")
    return {"human": (verdict, evidence)}


def _emit_evaluation(obj: Ctx, ev):
    lines = [f"gate {ev.gate_id}: {ev.result} ({ev.eval_id})"]
    for entry in ev.per_va:
        lines.append(f"  {entry['va_id']}: {entry['verdict']}")
        if entry["evidence"]:
            first = entry["evidence"].strip().splitlines()[0]
            lines.append(f"    {first}")
    for advisory in ev.details.get("advisories", []):
        lines.append(f"  advisory: {advisory}")
    obj.emit(ev.to_dict(), "\n".join(lines))
    if ev.result == REJECTED:
        sys.exit(1)


@gate.command("run")
@click.argument("gate_id", type=click.Choice(list(machine.GATE_IDS)))
@click.option("--approve/--reject", "approve", default=None)
@click.option("--as", "approver", default="operator")
@click.option("--note", default="")
@click.pass_obj
def gate_run(obj: Ctx, gate_id: str, approve: bool | None, approver: str, note: str):
    """Run automatic VAs and the engine predicate, join human verdicts."""
    def go():
        ev = obj.project.run_gate(gate_id, _human_verdicts(approve, approver, note))
        _emit_evaluation(obj, ev)
    _run(obj, go)


@gate.command("approve")
@click.argument("gate_id", type=click.Choice(list(machine.GATE_IDS)))
@click.option("--as", "approver", default="operator")
@click.option("--note", default="")
@click.pass_obj
def gate_approve(obj: Ctx, gate_id: str, approver: str, note: str):
    def go():
        ev = obj.project.run_gate(gate_id, _human_verdicts(True, approver, note))
        _emit_evaluation(obj, ev)
    _run(obj, go)


@gate.command("reject")
@click.argument("gate_id", type=click.Choice(list(machine.GATE_IDS)))
@click.option("--as", "approver", default="operator")
@click.option("--note", default="")
@click.pass_obj
def gate_reject(obj: Ctx, gate_id: str, approver: str, note: str):
    def go():
        ev = obj.project.run_gate(gate_id, _human_verdicts(False, approver, note))
        lines = [f"gate {ev.gate_id}: {ev.result} ({ev.eval_id})"]
        obj.emit(ev.to_dict(), "\n".join(lines))
    _run(obj, go)


@main.command()
@click.argument("to_phase", type=int)
@click.pass_obj
def advance(obj: Ctx, to_phase: int):
    """Record a phase transition authorized by the latest gate evaluation."""
    def go():
        state = obj.project.advance(to_phase)
        obj.emit(obj.project.status(),
                 f"now at phase {state.current_phase} "
                 f"({machine.PHASE_NAMES[state.current_phase]})")
    _run(obj, go)


# -- micro-checks / scope -----------------------------------------------------

@main.command("micro-check")
@click.argument("module")
@click.option("--response", required=True)
@click.option("--divergence", "divergences", multiple=True,
              help="spec_ref=description (repeatable)")
@click.option("--resolved", is_flag=True, default=False,
              help="mark the listed divergences resolved")
@click.pass_obj
def micro_check(obj: Ctx, module: str, response: str, divergences: tuple[str, ...], resolved: bool):
    def go():
        parsed = []
        for d in divergences:
            spec_ref, _, description = d.partition("=")
            parsed.append({"spec_ref": spec_ref, "description": description, "resolved": resolved})
        obj.project.add_micro_check(module, response, parsed)
        obj.emit({"module": module, "divergences": len(parsed)},
                 f"micro-check recorded for {module} ({len(parsed)} divergence(s))")
    _run(obj, go)


@main.group()
def scope():
    """Phase-5 scope inventory."""


@scope.command("check")
@click.option("--codebase", type=click.Path(exists=True, file_okay=False, path_type=Path), required=True)
@click.pass_obj
def scope_check(obj: Ctx, codebase: Path):
    def go():
        inv = obj.project.scope_check(codebase)
        if inv.passed:
            obj.emit(inv.to_dict(), "scope inventory: pass")
        else:
            lines = ["scope inventory: fail"]
            for m in inv.missing_modules:
                lines.append(f"  missing module: {m}")
            for r in inv.uncovered_requirements:
                lines.append(f"  uncovered requirement: {r}")
            obj.emit(inv.to_dict(), "\n".join(lines))
            sys.exit(1)
    _run(obj, go)


# -- prompts ------------------------------------------------------------------

@main.command()
@click.argument("kind", type=click.Choice(
    ["discovery_questions", "teachback_request", "lens_critique", "simplification", "micro_check"]))
@click.option("--lens", "lens_id", default="")
@click.option("--module", default="")
@click.pass_obj
def prompt(obj: Ctx, kind: str, lens_id: str, module: str):
    """Emit a prompt scaffold into specs/prompts/ and print it."""
    def go():
        scaffold = obj.project.emit_prompt(kind, lens_id=lens_id, module=module)
        obj.emit({"kind": kind, "filename": scaffold.filename, "text": scaffold.rendered_text},
                 scaffold.rendered_text)
    _run(obj, go)


# -- metrics ------------------------------------------------------------------

@main.group(name="metrics")
def metrics_group():
    """Context-efficiency and adoption calculators."""


@metrics_group.command("efficiency")
@click.argument("i0", type=int)
@click.argument("c", type=int)
@click.pass_obj
def metrics_efficiency(obj: Ctx, i0: int, c: int):
    def go():
        result = obj.project.efficiency(i0, c)
        obj.emit(result.to_dict(), f"E = {i0}/{c} = {result.efficiency:.4f}")
    _run(obj, go)


@metrics_group.command("adoption")
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), required=True,
              help="JSON file with gate_costs and error_scenarios")
@click.pass_obj
def metrics_adoption(obj: Ctx, config_path: Path):
    def go():
        data = json.loads(config_path.read_text())
        result = obj.project.adoption(data.get("gate_costs", []), data.get("error_scenarios", []))
        obj.emit(result.to_dict(),
                 f"gate cost {result.lhs} vs expected error cost {result.rhs}: "
                 f"{'satisfied' if result.satisfied else 'not satisfied'}")
    _run(obj, go)


# -- serve --------------------------------------------------------------------

@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8787)
@click.pass_obj
def serve(obj: Ctx, host: str, port: int):
    """Serve the HTTP JSON API (and the dashboard, if built)."""
    import uvicorn

    from .api import create_app

    app = create_app(obj.root)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
