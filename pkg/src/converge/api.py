"""The /api/v1 HTTP JSON surface consumed by the dashboard.

Every response is wrapped in one envelope: ``{status, data | error,
engine_version, schema_version}``. Mutations are serialized through the
project-store writer lock; reads are snapshots of the last persisted state.
"""
from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import machine
from .engine import ENGINE_VERSION, Project
from .errors import (
    ConvergeError,
    CorruptStateError,
    GateVerdictMismatchError,
    IllegalEdgeError,
    LocationOccupiedError,
    MissingProjectError,
    UnknownFindingError,
    UnknownModuleError,
)
from .lenses import builtin_catalog
from .store import SCHEMA_VERSION
from .verdict import APPROVED, REJECTED

_HTTP_STATUS = {
    MissingProjectError: 404,
    UnknownFindingError: 404,
    UnknownModuleError: 404,
    LocationOccupiedError: 409,
    IllegalEdgeError: 409,
    GateVerdictMismatchError: 409,
    CorruptStateError: 500,
}


def _envelope(data=None, error=None) -> dict:
    body = {
        "status": "ok" if error is None else "error",
        "engine_version": ENGINE_VERSION,
        "schema_version": SCHEMA_VERSION,
    }
    if error is None:
        body["data"] = data
    else:
        body["error"] = error
    return body


def create_app(root: Path) -> FastAPI:
    root = Path(root)
    app = FastAPI(title="converge", version=ENGINE_VERSION)

    def project() -> Project:
        return Project.open(root)

    @app.exception_handler(ConvergeError)
    async def handle_converge_error(request: Request, exc: ConvergeError):
        status = next(
            (code for cls, code in _HTTP_STATUS.items() if isinstance(exc, cls)), 422
        )
        return JSONResponse(
            status_code=status,
            content=_envelope(error={
                "code": exc.code,
                "message": exc.message,
                "details": exc.details,
            }),
        )

    @app.get("/api/v1/project")
    def get_project():
        p = project()
        return _envelope({
            **p.status(),
            "context": p.state.context.to_dict(),
            "transitions": [t.to_dict() for t in p.state.transitions],
            "gate_log": [ev.to_dict() for ev in p.state.gate_log],
            "score": p.state.score.to_dict() if p.state.score else None,
            "hsa": p.state.hsa.to_dict(),
        })

    @app.get("/api/v1/lenses")
    def get_lenses():
        p = project()
        activations = {a.lens_id: a for a in p.activations()}
        return _envelope([
            {
                **l.to_dict(),
                "active": bool(activations.get(l.lens_id) and activations[l.lens_id].active),
                "rationale": activations[l.lens_id].rationale if l.lens_id in activations else "",
            }
            for l in builtin_catalog()
        ])

    @app.put("/api/v1/context/{flag}")
    async def put_context(flag: str, request: Request):
        body = await request.json()
        p = project()
        p.set_context_flag(flag, bool(body["value"]), body.get("rationale", ""))
        return _envelope({"flag": flag, "value": bool(body["value"]),
                          "active_lenses": p.active_lens_ids()})

    @app.get("/api/v1/score")
    def get_score():
        p = project()
        return _envelope(p.state.score.to_dict() if p.state.score else None)

    @app.post("/api/v1/score")
    async def post_score(request: Request):
        body = await request.json()
        p = project()
        if "awards" in body:
            score = p.set_awards([int(a) for a in body["awards"]])
        else:
            score = p.set_award(int(body["criterion_id"]), int(body["points"]))
        if "operator_confirmed" in body:
            score = p.confirm_score(bool(body["operator_confirmed"]))
        return _envelope(score.to_dict())

    @app.post("/api/v1/gates/{gate_id}")
    async def post_gate(gate_id: str, request: Request):
        body = await request.json()
        human = {}
        if "approve" in body:
            verdict = APPROVED if body["approve"] else REJECTED
            human["human"] = (verdict, body.get("note", ""))
        for va_id, entry in body.get("verdicts", {}).items():
            human[va_id] = (entry["verdict"], entry.get("note", ""))
        ev = project().run_gate(gate_id, human)
        return _envelope(ev.to_dict())

    @app.get("/api/v1/matrix")
    def get_matrix():
        p = project()
        if p.matrix is None:
            return _envelope(None)
        data = p.matrix.to_dict()
        data["findings"] = [f.to_dict() for f in p.findings.values()]
        return _envelope(data)

    @app.post("/api/v1/matrix/cells")
    async def post_cell(request: Request):
        body = await request.json()
        p = project()
        p.assess(body["module"], body["lens"], body.get("findings", []))
        return _envelope(p.matrix.to_dict())

    @app.post("/api/v1/findings")
    async def post_finding(request: Request):
        body = await request.json()
        p = project()
        if p.matrix is None:
            p.ensure_matrix()
        cell = p.matrix.cells.get((body["module"], body["lens"]))
        existing = [{"finding_id": fid} for fid in (cell.finding_ids if cell else [])]
        p.assess(body["module"], body["lens"], existing + [
            {"severity": body["severity"], "description": body.get("description", "")}
        ])
        new_id = p.matrix.cells[(body["module"], body["lens"])].finding_ids[-1]
        return _envelope(p.findings[new_id].to_dict())

    @app.post("/api/v1/findings/{finding_id}/triage")
    async def post_triage(finding_id: str, request: Request):
        body = await request.json()
        f = project().triage(finding_id, body["decision"], body.get("rationale", ""))
        return _envelope(f.to_dict())

    @app.get("/api/v1/convergence")
    def get_convergence():
        return _envelope(project().convergence_preview())

    @app.get("/api/v1/architecture/versions")
    def get_versions():
        p = project()
        versions = []
        for v in p.state.architecture_versions:
            arch = p.store.load_architecture(v)
            versions.append(arch.to_dict())
        return _envelope(versions)

    @app.post("/api/v1/transitions")
    async def post_transition(request: Request):
        body = await request.json()
        p = project()
        p.advance(int(body["to_phase"]))
        return _envelope(p.status())

    @app.get("/api/v1/prompts/{phase}/{kind}")
    def get_prompt(phase: int, kind: str, lens: str = "", module: str = ""):
        p = project()
        if p.state.current_phase != phase:
            p.state.current_phase = phase  # preview only; not persisted
        scaffold = p.emit_prompt(kind, lens_id=lens, module=module)
        return _envelope({
            "phase": scaffold.phase,
            "kind": scaffold.kind,
            "filename": scaffold.filename,
            "rendered_text": scaffold.rendered_text,
        })

    # dashboard static assets, when built
    dist = root / "frontend" / "dist"
    if dist.exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(dist), html=True), name="dashboard")

    return app
