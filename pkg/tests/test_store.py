import json
import os
import random

import pytest

from converge.errors import (
    CorruptStateError,
    GateVerdictMismatchError,
    IllegalEdgeError,
    LocationOccupiedError,
    MissingProjectError,
    ValidationError,
)
from converge.lenses import ProjectContext
from converge.store import (
    ProjectStore,
    list_artifacts,
    record_transition,
    register_artifact,
    validate_state,
)

from conftest import apply_walk, make_evaluation, random_state, random_walk, write_manifest


def fresh(tmp_path, name="proj"):
    return ProjectStore.init_project(name, ProjectContext(), tmp_path / name)


class TestLifecycle:
    def test_init_creates_sections(self, tmp_path):
        store, state = fresh(tmp_path)
        for section in ("problem", "architecture", "findings", "validation", "lessons", "prompts"):
            assert (store.specs_dir / section).is_dir()
        assert state.current_phase == 0
        assert store.state_path.exists()

    def test_init_occupied_location_refused(self, tmp_path):
        fresh(tmp_path)
        with pytest.raises(LocationOccupiedError):
            fresh(tmp_path)

    def test_load_missing(self, tmp_path):
        with pytest.raises(MissingProjectError):
            ProjectStore(tmp_path / "nowhere").load()

    def test_round_trip(self, tmp_path):
        store, state = fresh(tmp_path)
        apply_walk(state, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 2)])
        store.save(state)
        loaded = store.load()
        assert loaded.to_dict() == state.to_dict()
        assert loaded.current_phase == 2
        assert loaded.iteration_count == 1

    def test_randomized_round_trips(self, tmp_path):
        rng = random.Random(11)
        for i in range(50):
            store, state = fresh(tmp_path, f"p{i}")
            rand = random_state(rng)
            rand.project_id = state.project_id  # keep store/state pairing honest
            store.save(rand)
            assert store.load().to_dict() == rand.to_dict()


class TestCorruption:
    def test_truncated_file(self, tmp_path):
        store, state = fresh(tmp_path)
        raw = store.state_path.read_text()
        store.state_path.write_text(raw[: len(raw) // 2])
        with pytest.raises(CorruptStateError):
            store.load()

    def test_flipped_field_fails_checksum(self, tmp_path):
        store, state = fresh(tmp_path)
        doc = json.loads(store.state_path.read_text())
        doc["project"]["current_phase"] = 5
        store.state_path.write_text(json.dumps(doc, indent=2, sort_keys=True))
        with pytest.raises(CorruptStateError, match="checksum"):
            store.load()

    def test_unknown_schema_version(self, tmp_path):
        store, state = fresh(tmp_path)
        doc = json.loads(store.state_path.read_text())
        doc["schema_version"] = 99
        store.state_path.write_text(json.dumps(doc))
        with pytest.raises(CorruptStateError, match="schema_version"):
            store.load()

    def test_atomicity_under_replace_fault(self, tmp_path, monkeypatch):
        store, state = fresh(tmp_path)
        before = store.state_path.read_bytes()
        apply_walk(state, [(0, 1)])

        def boom(src, dst):
            raise OSError("simulated crash before rename")

        monkeypatch.setattr(os, "replace", boom)
        with pytest.raises(OSError):
            store.save(state)
        monkeypatch.undo()
        # prior state intact and loadable; no temp litter
        assert store.state_path.read_bytes() == before
        assert store.load().current_phase == 0
        assert list(store.root.glob(".iacdm-*.tmp")) == []


class TestTransitions:
    def test_gate_mismatch_refused(self, tmp_path):
        store, state = fresh(tmp_path)
        ev = make_evaluation(state, "G1", "approved")
        with pytest.raises(GateVerdictMismatchError):
            record_transition(state, 1, ev)

    def test_rejected_gate_cannot_advance(self, tmp_path):
        store, state = fresh(tmp_path)
        ev = make_evaluation(state, "G0", "rejected")
        with pytest.raises(GateVerdictMismatchError):
            record_transition(state, 1, ev)

    def test_loop_requires_rejected_g4(self, tmp_path):
        store, state = fresh(tmp_path)
        apply_walk(state, [(0, 1), (1, 2), (2, 3), (3, 4)])
        approved = make_evaluation(state, "G4", "approved")
        with pytest.raises(GateVerdictMismatchError):
            record_transition(state, 2, approved)
        rejected = make_evaluation(state, "G4", "rejected")
        record_transition(state, 2, rejected)
        assert state.current_phase == 2

    def test_skip_requires_zero_findings(self, tmp_path):
        store, state = fresh(tmp_path)
        apply_walk(state, [(0, 1), (1, 2)])
        ev = make_evaluation(state, "G2", "approved")
        ev.details["total_findings"] = 3
        with pytest.raises(GateVerdictMismatchError):
            record_transition(state, 4, ev)
        ev2 = make_evaluation(state, "G2", "approved")
        record_transition(state, 4, ev2)
        assert state.current_phase == 4

    def test_illegal_edge(self, tmp_path):
        store, state = fresh(tmp_path)
        ev = make_evaluation(state, "G0", "approved")
        with pytest.raises(IllegalEdgeError):
            record_transition(state, 3, ev)

    def test_iteration_counts_loop_exits(self, tmp_path):
        store, state = fresh(tmp_path)
        apply_walk(state, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 2), (2, 3), (3, 4), (4, 5)])
        assert state.iteration_count == 2

    def test_randomized_walks_validate(self, tmp_path):
        rng = random.Random(3)
        for i in range(100):
            store, state = fresh(tmp_path, f"w{i}")
            walk = random_walk(rng)
            apply_walk(state, walk)
            validate_state(state)
            assert state.iteration_count == sum(1 for e in walk if e[0] == 3)

    def test_tampered_iteration_count_detected(self, tmp_path):
        store, state = fresh(tmp_path)
        apply_walk(state, [(0, 1)])
        state.iteration_count = 7
        with pytest.raises(CorruptStateError, match="iteration_count"):
            validate_state(state)

    def test_dangling_gate_ref_detected(self, tmp_path):
        store, state = fresh(tmp_path)
        apply_walk(state, [(0, 1)])
        state.transitions[0].gate_ref = "eval-999"
        with pytest.raises(CorruptStateError, match="unresolved"):
            validate_state(state)


class TestArtifacts:
    def test_register_and_order(self, tmp_path):
        store, state = fresh(tmp_path)
        for name in ("b.md", "a.md"):
            (store.specs_dir / "problem" / name).write_text("content")
        a1 = register_artifact(state, store.root, 0, 2, "specs/problem/b.md")
        a2 = register_artifact(state, store.root, 0, 1, "specs/problem/a.md")
        assert [a.artifact_id for a in (a1, a2)] == ["art-1", "art-2"]
        ordered = list_artifacts(state, 0)
        assert [a.relative_path for a in ordered] == ["specs/problem/a.md", "specs/problem/b.md"]

    def test_duplicate_refused(self, tmp_path):
        store, state = fresh(tmp_path)
        (store.specs_dir / "problem" / "p.md").write_text("x")
        register_artifact(state, store.root, 0, 1, "specs/problem/p.md")
        with pytest.raises(ValidationError):
            register_artifact(state, store.root, 0, 1, "specs/problem/p.md")

    def test_missing_file_refused(self, tmp_path):
        store, state = fresh(tmp_path)
        with pytest.raises(ValidationError):
            register_artifact(state, store.root, 0, 1, "specs/problem/ghost.md")


class TestArchitectureVersions:
    def test_consecutive_enforced(self, tmp_path):
        store, state = fresh(tmp_path)
        src = write_manifest(tmp_path / "v2src", 2, [("a", "r")])
        with pytest.raises(ValidationError, match="expected architecture version 1"):
            store.register_architecture(state, src)

    def test_register_copies_and_indexes(self, tmp_path):
        store, state = fresh(tmp_path)
        src = write_manifest(tmp_path / "v1src", 1, [("a", "r")])
        v = store.register_architecture(state, src)
        assert v.version == 1
        assert (store.architecture_dir(1) / "manifest.json").exists()
        assert state.architecture_versions == [1]
        assert any(a.relative_path.endswith("v1/manifest.json") for a in state.artifacts)
        prev, latest = store.latest_architectures(state)
        assert prev is None and latest.version == 1

    def test_two_versions(self, tmp_path):
        store, state = fresh(tmp_path)
        store.register_architecture(state, write_manifest(tmp_path / "s1", 1, [("a", "r")]))
        store.register_architecture(state, write_manifest(tmp_path / "s2", 2, [("a", "r2")]))
        prev, latest = store.latest_architectures(state)
        assert (prev.version, latest.version) == (1, 2)


class TestFindingsPersistence:
    def test_save_load_and_stale_removal(self, tmp_path):
        from converge.critique import Finding

        store, _ = fresh(tmp_path)
        findings = {
            "f1": Finding("f1", "m", "l", "critical", "desc"),
            "f2": Finding("f2", "m", "l", "suggestion", "desc"),
        }
        store.save_findings(findings)
        assert set(store.load_findings()) == {"f1", "f2"}
        del findings["f2"]
        store.save_findings(findings)
        assert set(store.load_findings()) == {"f1"}
        assert not (store.findings_dir / "f2.json").exists()

    def test_matrix_round_trip(self, tmp_path):
        from converge.critique import CoverageMatrix, record_assessment

        store, _ = fresh(tmp_path)
        matrix = CoverageMatrix(modules=["a"], active_lenses=["security"])
        record_assessment(matrix, {}, "a", "security")
        store.save_matrix(matrix)
        loaded = store.load_matrix()
        assert loaded.to_dict() == matrix.to_dict()
