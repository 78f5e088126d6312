import json

import pytest
from click.testing import CliRunner

from converge.cli import main

from conftest import write_manifest


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, root, *args, **kw):
    return runner.invoke(main, ["--root", str(root), *args], **kw)


def ok(runner, root, *args):
    result = invoke(runner, root, *args)
    assert result.exit_code == 0, result.output
    return result


@pytest.fixture
def root(tmp_path, runner):
    root = tmp_path / "proj"
    ok(runner, root, "init", "demo")
    return root


def set_full_score(runner, root):
    for cid, pts in enumerate((10, 15, 10, 15, 10, 10, 10, 5, 10, 5), start=1):
        ok(runner, root, "score", "set", str(cid), str(pts))
    ok(runner, root, "score", "confirm")


class TestBasics:
    def test_init_and_status(self, runner, root):
        result = ok(runner, root, "status")
        assert "phase 0" in result.output
        assert "pending gate G0" in result.output

    def test_missing_project_exit_3(self, runner, tmp_path):
        result = invoke(runner, tmp_path / "empty", "status")
        assert result.exit_code == 3

    def test_init_occupied_exit_3(self, runner, root):
        result = invoke(runner, root, "init", "again")
        assert result.exit_code == 3

    def test_structured_format_is_json(self, runner, root):
        result = ok(runner, root, "--format", "structured", "status")
        payload = json.loads(result.output)
        assert payload["current_phase"] == 0

    def test_quiet_suppresses_output(self, runner, root):
        result = ok(runner, root, "--quiet", "status")
        assert result.output == ""

    def test_corrupt_state_exit_4(self, runner, root):
        state = root / "iacdm-state.json"
        state.write_text(state.read_text()[:50])
        result = invoke(runner, root, "status")
        assert result.exit_code == 4


class TestGateAndAdvance:
    def test_g0_rejected_below_threshold(self, runner, root):
        ok(runner, root, "score", "set", "1", "9")
        ok(runner, root, "score", "confirm")
        result = invoke(runner, root, "gate", "run", "G0")
        assert result.exit_code == 1
        assert "rejected" in result.output
        assert "below threshold" in result.output

    def test_g0_requires_confirmation(self, runner, root):
        set_full_score(runner, root)
        ok(runner, root, "score", "confirm", "--revoke")
        result = invoke(runner, root, "gate", "run", "G0")
        assert result.exit_code == 1
        assert "confirmation" in result.output

    def test_g0_approved_with_bypass_advisory(self, runner, root):
        set_full_score(runner, root)
        result = ok(runner, root, "gate", "run", "G0")
        assert "approved" in result.output
        assert "discovery bypass" in result.output

    def test_advance_without_evaluation_exit_6(self, runner, root):
        result = invoke(runner, root, "advance", "1")
        assert result.exit_code == 6

    def test_illegal_edge_exit_5(self, runner, root):
        result = invoke(runner, root, "advance", "3")
        assert result.exit_code == 5

    def test_rejected_gate_blocks_advance(self, runner, root):
        ok(runner, root, "score", "set", "1", "0")
        ok(runner, root, "score", "confirm")
        invoke(runner, root, "gate", "run", "G0")
        result = invoke(runner, root, "advance", "1")
        assert result.exit_code == 5


class TestDiscoveryCommands:
    def test_teachback_cycles_number_themselves(self, runner, root):
        r1 = ok(runner, root, "teachback", "add", "--synthesis", "s1", "--outcome", "corrected",
                "--notes", "vocabulary gap")
        r2 = ok(runner, root, "teachback", "add", "--synthesis", "s2", "--outcome", "accepted")
        assert "cycle 1" in r1.output and "cycle 2" in r2.output

    def test_hsa_ladder(self, runner, root):
        ok(runner, root, "hsa", "converge", "1")
        ok(runner, root, "hsa", "converge", "2")
        result = invoke(runner, root, "hsa", "converge", "4")
        assert result.exit_code == 6
        ok(runner, root, "hsa", "retroact", "2", "1", "--reason", "term redefined")

    def test_lens_set_requires_rationale(self, runner, root):
        result = invoke(runner, root, "lens", "set", "external_dependencies", "true")
        assert result.exit_code == 2  # click missing-option error

    def test_lens_set_and_list(self, runner, root):
        result = ok(runner, root, "lens", "set", "external_dependencies", "true",
                    "--rationale", "talks to a payment gateway")
        assert "8 lenses active" in result.output
        listed = ok(runner, root, "lens", "list", "--active")
        assert "resilience" in listed.output


class TestFullWalkthrough:
    """CLI-only drive of phases 0..7 including one 4->2 convergence loop."""

    def test_walkthrough(self, runner, tmp_path):
        root = tmp_path / "walk"
        ok(runner, root, "init", "walkthrough")

        # phase 0: discovery
        set_full_score(runner, root)
        ok(runner, root, "teachback", "add", "--synthesis", "billing engine for one region",
           "--outcome", "accepted")
        ok(runner, root, "gate", "run", "G0")
        ok(runner, root, "advance", "1")

        # phase 1: architecture v1
        write_manifest(tmp_path / "v1", 1,
                       modules=[("api", "http surface"), ("store", "persistence")],
                       interfaces=[("api", "store", "save/load records")],
                       assumptions=["single writer"])
        ok(runner, root, "arch", "register", str(tmp_path / "v1"))
        ok(runner, root, "gate", "run", "G1", "--approve", "--note", "design reviewed")
        ok(runner, root, "advance", "2")

        # phase 2: full critique over 2 modules x 7 universal lenses
        ok(runner, root, "matrix", "init")
        incomplete = invoke(runner, root, "matrix", "check")
        assert incomplete.exit_code == 1
        for module in ("api", "store"):
            for lens in ("assumptions", "architectural", "implementability",
                         "scientific", "security", "performance", "regulatory"):
                if (module, lens) == ("store", "security"):
                    continue
                ok(runner, root, "matrix", "assess", module, lens)
        ok(runner, root, "matrix", "assess", "store", "security",
           "--finding", "critical:records stored unencrypted")
        ok(runner, root, "matrix", "check")
        ok(runner, root, "gate", "run", "G2")
        ok(runner, root, "advance", "3")

        # phase 3: v2 keeps complexity flat but rewrites most of the design
        shared_assumptions = ["single writer", "one region", "batch window nightly",
                              "volumes under 1M records"]
        write_manifest(tmp_path / "v2", 2,
                       modules=[("gateway", "http surface, rewritten"), ("vault", "encrypted persistence")],
                       interfaces=[("gateway", "vault", "sealed record API")],
                       assumptions=shared_assumptions,
                       negative_scope=["no multi-tenant support"])
        ok(runner, root, "arch", "register", str(tmp_path / "v2"))
        ok(runner, root, "gate", "run", "G3")
        ok(runner, root, "advance", "4")

        # phase 4: G4 rejects (large ratio + open critical) -> loop to 2
        rejected = invoke(runner, root, "gate", "run", "G4")
        assert rejected.exit_code == 1
        ok(runner, root, "advance", "2")

        # second iteration: re-critique the renamed modules, resolve the critical
        ok(runner, root, "matrix", "init")
        for module in ("gateway", "vault"):
            for lens in ("assumptions", "architectural", "implementability",
                         "scientific", "security", "performance", "regulatory"):
                ok(runner, root, "matrix", "assess", module, lens)
        ok(runner, root, "finding", "resolve", "f-1", "--note", "vault encrypts at rest")
        ok(runner, root, "gate", "run", "G2")
        ok(runner, root, "advance", "3")

        # v3: one small contract tweak, well under the convergence threshold
        write_manifest(tmp_path / "v3", 3,
                       modules=[("gateway", "http surface, rewritten"),
                                ("vault", "encrypted persistence, key rotation")],
                       interfaces=[("gateway", "vault", "sealed record API")],
                       assumptions=shared_assumptions,
                       negative_scope=["no multi-tenant support"])
        ok(runner, root, "arch", "register", str(tmp_path / "v3"))
        preview = ok(runner, root, "converge-check")
        assert "approved" in preview.output
        ok(runner, root, "gate", "run", "G3")
        ok(runner, root, "advance", "4")
        approved = ok(runner, root, "gate", "run", "G4")
        assert "cheaper model tier" in approved.output
        ok(runner, root, "advance", "5")

        # phase 5: configured automatic G5, micro-checks, scope inventory
        (root / "iacdm-config.toml").write_text(
            '[[gates.G5.va]]\nid = "g5-auto"\nprogram = "true"\n'
            '[[gates.G6.va]]\nid = "g6-automatic"\nprogram = "true"\n'
        )
        (root / "src").mkdir()
        (root / "src" / "gateway.py").write_text("")
        (root / "src" / "vault.py").write_text("")
        validation = root / "specs" / "validation"
        (validation / "module_paths.json").write_text(
            json.dumps({"gateway": "src/gateway.py", "vault": "src/vault.py"}))
        (validation / "requirements.txt").write_text("encrypt-at-rest\n")
        (validation / "coverage.json").write_text(json.dumps({"encrypt-at-rest": ["vault"]}))
        ok(runner, root, "scope", "check", "--codebase", str(root))
        ok(runner, root, "micro-check", "gateway", "--response", "no divergences")
        blocked = invoke(runner, root, "gate", "run", "G6", "--approve")
        assert blocked.exit_code == 1  # vault has no micro-check yet
        ok(runner, root, "micro-check", "vault", "--response", "one naming gap",
           "--divergence", "architecture/v3=field renamed", "--resolved")
        ok(runner, root, "gate", "run", "G5")
        ok(runner, root, "advance", "6")

        # phase 6: automatic + human G6
        ok(runner, root, "gate", "run", "G6", "--approve", "--note", "manual pass ok")
        ok(runner, root, "advance", "7")

        # phase 7: retrospective
        ok(runner, root, "gate", "run", "G7", "--approve", "--note", "lessons recorded")
        ok(runner, root, "metrics", "efficiency", "800", "1000")
        status = ok(runner, root, "--format", "structured", "status")
        payload = json.loads(status.output)
        assert payload["current_phase"] == 7
        assert payload["iteration_count"] == 2
        assert payload["open_findings"] == 0
        assert (root / "specs" / "lessons" / "metrics.log").exists()


class TestMiscCommands:
    def test_prompt_writes_scaffold(self, runner, root):
        result = ok(runner, root, "prompt", "discovery_questions")
        assert "problem discovery" in result.output
        assert (root / "specs" / "prompts" / "discovery-questions.md").exists()

    def test_prompt_kind_phase_mismatch_exit_6(self, runner, root):
        result = invoke(runner, root, "prompt", "micro_check", "--module", "m")
        assert result.exit_code == 6

    def test_metrics_adoption(self, runner, root, tmp_path):
        cfg = tmp_path / "adoption.json"
        cfg.write_text(json.dumps({
            "gate_costs": [{"gate_id": "G0", "cost": 2, "unit": "hours"}],
            "error_scenarios": [{"label": "rework", "probability": 0.5, "cost": 20, "unit": "hours"}],
        }))
        result = ok(runner, root, "metrics", "adoption", "--config", str(cfg))
        assert "satisfied" in result.output

    def test_concentration_before_matrix_exit_7(self, runner, root):
        result = invoke(runner, root, "concentration", "show")
        assert result.exit_code == 7

    def test_matrix_init_without_architecture_exit_6(self, runner, root):
        result = invoke(runner, root, "matrix", "init")
        assert result.exit_code == 6
