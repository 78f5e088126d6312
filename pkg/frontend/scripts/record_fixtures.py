"""Build a small fixture project with the real engine and record one API
envelope per endpoint into frontend/fixtures/. The dashboard tests replay
these recordings instead of talking to a live server.

Run from the repository root:  python3 frontend/scripts/record_fixtures.py
"""
from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

sys.path.insert(0, str(Path(__file__).resolve().parents[2] / "src"))

from converge.api import create_app  # noqa: E402
from converge.engine import Project  # noqa: E402

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"
UNIVERSAL = ["assumptions", "architectural", "implementability",
             "scientific", "security", "performance", "regulatory"]
AWARDS = [10, 15, 10, 15, 10, 10, 10, 5, 5, 2]  # total 92


def record(name: str, response) -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    payload = {"status_code": response.status_code, "body": response.json()}
    (FIXTURES / f"{name}.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
    print(f"recorded {name}.json ({response.status_code})")


def main() -> None:
    workdir = Path(tempfile.mkdtemp(prefix="fixture-"))
    root = workdir / "proj"
    Project.init("fixture", root)
    client = TestClient(create_app(root))

    # phase 0 -> 1 -> 2 with a two-module architecture
    client.post("/api/v1/score", json={"awards": AWARDS, "operator_confirmed": True})
    client.post("/api/v1/gates/G0", json={})
    client.post("/api/v1/transitions", json={"to_phase": 1})
    arch_dir = workdir / "v1"
    arch_dir.mkdir()
    (arch_dir / "manifest.json").write_text(json.dumps({
        "version": 1,
        "modules": [
            {"name": "api", "responsibility": "http surface"},
            {"name": "store", "responsibility": "persistence"},
        ],
        "interfaces": [{"provider": "api", "consumer": "store", "contract": "records"}],
        "assumptions": ["single writer"],
        "negative_scope": ["no multi-tenant"],
    }))
    Project.open(root).register_architecture(arch_dir)
    client.post("/api/v1/gates/G1", json={"approve": True, "note": "design reviewed"})
    client.post("/api/v1/transitions", json={"to_phase": 2})

    # all 14 cells assessed: 12 clean, one critical, one important
    for module in ("api", "store"):
        for lens in UNIVERSAL:
            if (module, lens) in (("store", "security"), ("api", "performance")):
                continue
            client.post("/api/v1/matrix/cells", json={"module": module, "lens": lens})
    client.post("/api/v1/findings", json={
        "module": "store", "lens": "security",
        "severity": "critical", "description": "records stored unencrypted"})
    client.post("/api/v1/findings", json={
        "module": "api", "lens": "performance",
        "severity": "important", "description": "no pagination on list endpoint"})

    # read-side snapshots
    record("get_project", client.get("/api/v1/project"))
    record("get_lenses", client.get("/api/v1/lenses"))
    record("get_score", client.get("/api/v1/score"))
    record("get_matrix", client.get("/api/v1/matrix"))
    record("get_convergence", client.get("/api/v1/convergence"))
    record("get_architecture_versions", client.get("/api/v1/architecture/versions"))
    record("get_prompt", client.get("/api/v1/prompts/2/lens_critique", params={"lens": "security"}))

    # mutation responses (recorded after the snapshots so the reads above
    # reflect the 14-cell fixture state)
    record("post_score", client.post(
        "/api/v1/score", json={"awards": AWARDS, "operator_confirmed": True}))
    record("put_context_flag", client.put(
        "/api/v1/context/external_dependencies",
        json={"value": True, "rationale": "talks to a payment gateway"}))
    record("post_matrix_cell", client.post(
        "/api/v1/matrix/cells", json={"module": "api", "lens": "security"}))
    record("post_finding", client.post("/api/v1/findings", json={
        "module": "api", "lens": "security",
        "severity": "suggestion", "description": "tighten CORS"}))
    record("post_gate_rejected", client.post("/api/v1/gates/G2", json={}))
    record("post_triage_illegal", client.post(
        "/api/v1/findings/f-1/triage",
        json={"decision": "accept_risk", "rationale": "x"}))
    record("post_triage", client.post(
        "/api/v1/findings/f-2/triage",
        json={"decision": "deferred", "rationale": "after launch"}))
    record("post_transition_illegal", client.post(
        "/api/v1/transitions", json={"to_phase": 6}))


if __name__ == "__main__":
    main()
