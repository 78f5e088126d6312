"""The durable project repository: the ``specs/`` layout, the canonical
engine state file, artifact indexing, and the phase transition log.

Engine bookkeeping lives in one schema-versioned state file
(``iacdm-state.json``) beside ``specs/``; ``specs/`` itself holds only
operator-authored artifacts (plus the structured finding records the
dashboard consumes read-only). Saves are atomic (write temp, fsync,
rename) and guarded by a single-writer lock file.
"""
from __future__ import annotations

import hashlib
import json
import os
import shutil
import tempfile
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from filelock import FileLock

from . import machine
from .convergence import ArchitectureVersion
from .critique import CoverageMatrix, Finding
from .discovery import DiscoveryScore, HsaState, TeachBackIteration
from .errors import (
    CorruptStateError,
    GateVerdictMismatchError,
    IllegalEdgeError,
    LocationOccupiedError,
    MissingProjectError,
    ValidationError,
)
from .gates import GateEvaluation, MicroCheckRecord
from .lenses import LensActivation, ProjectContext

SCHEMA_VERSION = 1
CHECKSUM_ALGORITHM = "sha256"
STATE_FILE = "iacdm-state.json"
LOCK_FILE = ".iacdm.lock"
SECTIONS = ("problem", "architecture", "findings", "validation", "lessons", "prompts")


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


def file_checksum(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class PhaseTransition:
    from_phase: int
    to_phase: int
    gate_ref: str  # eval_id of the authorizing GateEvaluation
    timestamp: str

    def to_dict(self) -> dict:
        return {
            "from_phase": self.from_phase,
            "to_phase": self.to_phase,
            "gate_ref": self.gate_ref,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PhaseTransition":
        return cls(
            from_phase=int(d["from_phase"]),
            to_phase=int(d["to_phase"]),
            gate_ref=d["gate_ref"],
            timestamp=d.get("timestamp", ""),
        )


@dataclass
class Artifact:
    artifact_id: str
    phase: int
    version: int
    relative_path: str
    checksum: str
    created_at: str

    def to_dict(self) -> dict:
        return {
            "artifact_id": self.artifact_id,
            "phase": self.phase,
            "version": self.version,
            "relative_path": self.relative_path,
            "checksum": self.checksum,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Artifact":
        return cls(
            artifact_id=d["artifact_id"],
            phase=int(d["phase"]),
            version=int(d["version"]),
            relative_path=d["relative_path"],
            checksum=d["checksum"],
            created_at=d.get("created_at", ""),
        )


@dataclass
class ProjectState:
    """The full persisted engine state for one project."""

    project_id: str
    name: str
    current_phase: int = 0
    iteration_count: int = 0
    context: ProjectContext = field(default_factory=ProjectContext)
    transitions: list[PhaseTransition] = field(default_factory=list)
    gate_log: list[GateEvaluation] = field(default_factory=list)
    artifacts: list[Artifact] = field(default_factory=list)
    created_at: str = ""
    updated_at: str = ""
    # phase 0 records
    score: DiscoveryScore | None = None
    teachbacks: list[TeachBackIteration] = field(default_factory=list)
    hsa: HsaState = field(default_factory=HsaState)
    # phase 1-2 records
    lens_activations: list[LensActivation] = field(default_factory=list)
    concentration_decisions: list[dict] = field(default_factory=list)
    architecture_versions: list[int] = field(default_factory=list)
    # phase 5 records
    micro_checks: list[MicroCheckRecord] = field(default_factory=list)

    def gate_evaluation(self, eval_id: str) -> GateEvaluation | None:
        for ev in self.gate_log:
            if ev.eval_id == eval_id:
                return ev
        return None

    def latest_evaluation(self, gate_id: str) -> GateEvaluation | None:
        for ev in reversed(self.gate_log):
            if ev.gate_id == gate_id:
                return ev
        return None

    def next_eval_id(self) -> str:
        return f"eval-{len(self.gate_log) + 1}"

    def to_dict(self) -> dict:
        return {
            "project": {
                "project_id": self.project_id,
                "name": self.name,
                "current_phase": self.current_phase,
                "iteration_count": self.iteration_count,
                "context": self.context.to_dict(),
                "created_at": self.created_at,
                "updated_at": self.updated_at,
            },
            "transitions": [t.to_dict() for t in self.transitions],
            "gate_log": [ev.to_dict() for ev in self.gate_log],
            "artifacts": [a.to_dict() for a in self.artifacts],
            "discovery": {
                "score": self.score.to_dict() if self.score else None,
                "teachbacks": [tb.to_dict() for tb in self.teachbacks],
                "hsa": self.hsa.to_dict(),
            },
            "lens_activations": [a.to_dict() for a in self.lens_activations],
            "concentration_decisions": list(self.concentration_decisions),
            "architecture_versions": list(self.architecture_versions),
            "micro_checks": [m.to_dict() for m in self.micro_checks],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProjectState":
        project = d["project"]
        disc = d.get("discovery", {})
        score = disc.get("score")
        return cls(
            project_id=project["project_id"],
            name=project["name"],
            current_phase=int(project["current_phase"]),
            iteration_count=int(project["iteration_count"]),
            context=ProjectContext.from_dict(project.get("context", {})),
            transitions=[PhaseTransition.from_dict(t) for t in d.get("transitions", [])],
            gate_log=[GateEvaluation.from_dict(ev) for ev in d.get("gate_log", [])],
            artifacts=[Artifact.from_dict(a) for a in d.get("artifacts", [])],
            created_at=project.get("created_at", ""),
            updated_at=project.get("updated_at", ""),
            score=DiscoveryScore.from_dict(score) if score else None,
            teachbacks=[TeachBackIteration.from_dict(tb) for tb in disc.get("teachbacks", [])],
            hsa=HsaState.from_dict(disc.get("hsa", {})),
            lens_activations=[
                LensActivation.from_dict(a) for a in d.get("lens_activations", [])
            ],
            concentration_decisions=list(d.get("concentration_decisions", [])),
            architecture_versions=list(d.get("architecture_versions", [])),
            micro_checks=[MicroCheckRecord.from_dict(m) for m in d.get("micro_checks", [])],
        )


def validate_state(state: ProjectState) -> None:
    """Structural invariants checked on every load."""
    if state.current_phase not in machine.PHASES:
        raise CorruptStateError(f"current_phase out of range: {state.current_phase}")
    try:
        replayed = machine.replay([(t.from_phase, t.to_phase) for t in state.transitions])
    except ValueError as exc:
        raise CorruptStateError(f"transition log unsound: {exc}") from exc
    if replayed != state.current_phase:
        raise CorruptStateError(
            f"replayed phase {replayed} != recorded current_phase {state.current_phase}"
        )
    expected_iterations = sum(1 for t in state.transitions if t.from_phase == 3)
    if expected_iterations != state.iteration_count:
        raise CorruptStateError(
            f"iteration_count {state.iteration_count} != {expected_iterations} recorded loop exits"
        )
    for t in state.transitions:
        ev = state.gate_evaluation(t.gate_ref)
        if ev is None:
            raise CorruptStateError(f"transition gate_ref {t.gate_ref!r} unresolved")
        if ev.gate_id != machine.authorizing_gate(t.from_phase, t.to_phase):
            raise CorruptStateError(
                f"transition {t.from_phase}->{t.to_phase} authorized by wrong gate {ev.gate_id}"
            )
        if ev.result != machine.required_gate_result(t.from_phase, t.to_phase):
            raise CorruptStateError(
                f"transition {t.from_phase}->{t.to_phase} authorized by a "
                f"{ev.result} evaluation"
            )


def record_transition(state: ProjectState, to_phase: int, gate: GateEvaluation) -> ProjectState:
    """Advance the phase machine along a legal, gate-authorized edge."""
    edge = (state.current_phase, to_phase)
    if not machine.is_legal_edge(*edge):
        raise IllegalEdgeError(f"illegal edge {edge[0]}->{edge[1]}")
    required_gate = machine.authorizing_gate(*edge)
    required_result = machine.required_gate_result(*edge)
    if gate.gate_id != required_gate:
        raise GateVerdictMismatchError(
            f"edge {edge[0]}->{edge[1]} requires gate {required_gate}, got {gate.gate_id}"
        )
    if gate.result != required_result:
        raise GateVerdictMismatchError(
            f"edge {edge[0]}->{edge[1]} requires a {required_result} {required_gate} "
            f"evaluation, got {gate.result}"
        )
    if edge == (2, 4):
        if gate.details.get("total_findings", None) != 0:
            raise GateVerdictMismatchError(
                "skipping Phase 3 requires a G2 evaluation with zero findings"
            )
    if state.gate_evaluation(gate.eval_id) is None:
        state.gate_log.append(gate)
    state.transitions.append(
        PhaseTransition(edge[0], to_phase, gate.eval_id, now_iso())
    )
    if edge[0] == 3:
        state.iteration_count += 1
    state.current_phase = to_phase
    return state


def register_artifact(
    state: ProjectState, root: Path, phase: int, version: int, relative_path: str
) -> Artifact:
    """Index a file under root as a project artifact; (phase, version, path)
    must be unique and the file must exist."""
    target = Path(root) / relative_path
    if not target.exists():
        raise ValidationError(f"artifact file missing: {relative_path}")
    for a in state.artifacts:
        if (a.phase, a.version, a.relative_path) == (phase, version, relative_path):
            raise ValidationError(
                f"duplicate artifact registration: phase={phase} version={version} "
                f"path={relative_path}"
            )
    artifact = Artifact(
        artifact_id=f"art-{len(state.artifacts) + 1}",
        phase=phase,
        version=version,
        relative_path=relative_path,
        checksum=file_checksum(target),
        created_at=now_iso(),
    )
    state.artifacts.append(artifact)
    return artifact


def list_artifacts(state: ProjectState, phase: int) -> list[Artifact]:
    return sorted(
        (a for a in state.artifacts if a.phase == phase),
        key=lambda a: (a.version, a.created_at),
    )


class ProjectStore:
    """Filesystem owner for one project root."""

    def __init__(self, root: Path):
        self.root = Path(root)

    # -- paths ------------------------------------------------------------

    @property
    def state_path(self) -> Path:
        return self.root / STATE_FILE

    @property
    def specs_dir(self) -> Path:
        return self.root / "specs"

    @property
    def findings_dir(self) -> Path:
        return self.specs_dir / "findings"

    @property
    def lock_path(self) -> Path:
        return self.root / LOCK_FILE

    def lock(self, timeout: float = 30.0) -> FileLock:
        """Single-writer lock; all mutating operations acquire it."""
        return FileLock(str(self.lock_path), timeout=timeout)

    def architecture_dir(self, version: int) -> Path:
        return self.specs_dir / "architecture" / f"v{version}"

    # -- lifecycle --------------------------------------------------------

    @classmethod
    def init_project(
        cls, name: str, context: ProjectContext, root: Path
    ) -> tuple["ProjectStore", ProjectState]:
        store = cls(root)
        if store.state_path.exists():
            raise LocationOccupiedError(f"{root} already contains a project")
        store.root.mkdir(parents=True, exist_ok=True)
        for section in SECTIONS:
            (store.specs_dir / section).mkdir(parents=True, exist_ok=True)
        ts = now_iso()
        state = ProjectState(
            project_id=uuid.uuid4().hex,
            name=name,
            context=context,
            created_at=ts,
            updated_at=ts,
        )
        store.save(state)
        return store, state

    def save(self, state: ProjectState) -> None:
        """Atomic save: serialize, checksum, write temp, fsync, rename."""
        state.updated_at = now_iso()
        doc = {
            "schema_version": SCHEMA_VERSION,
            "checksum_algorithm": CHECKSUM_ALGORITHM,
            **state.to_dict(),
        }
        payload = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        doc["checksum"] = hashlib.sha256(payload.encode("utf-8")).hexdigest()
        data = json.dumps(doc, indent=2, sort_keys=True)
        fd, tmp = tempfile.mkstemp(dir=str(self.root), prefix=".iacdm-", suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as f:
                f.write(data)
                f.flush()
                os.fsync(f.fileno())
            os.replace(tmp, self.state_path)
        except BaseException:
            try:
                os.remove(tmp)
            except OSError:
                pass
            raise

    def load(self) -> ProjectState:
        if not self.state_path.exists():
            raise MissingProjectError(f"no project at {self.root}")
        try:
            doc = json.loads(self.state_path.read_text())
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise CorruptStateError(f"state file unreadable: {exc}") from exc
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise CorruptStateError(
                f"unsupported schema_version: {doc.get('schema_version')!r}"
            )
        recorded = doc.pop("checksum", None)
        payload = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        actual = hashlib.sha256(payload.encode("utf-8")).hexdigest()
        if recorded != actual:
            raise CorruptStateError("state file checksum mismatch")
        try:
            state = ProjectState.from_dict(doc)
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptStateError(f"state file schema failure: {exc}") from exc
        validate_state(state)
        return state

    # -- findings + matrix ------------------------------------------------

    def save_findings(self, findings: dict[str, Finding]) -> None:
        self.findings_dir.mkdir(parents=True, exist_ok=True)
        current = {p.stem for p in self.findings_dir.glob("*.json")} - {"matrix"}
        for f in findings.values():
            path = self.findings_dir / f"{f.finding_id}.json"
            path.write_text(json.dumps({"schema_version": SCHEMA_VERSION, **f.to_dict()}, indent=2))
        for stale in current - set(findings):
            (self.findings_dir / f"{stale}.json").unlink()

    def load_findings(self) -> dict[str, Finding]:
        findings: dict[str, Finding] = {}
        if not self.findings_dir.exists():
            return findings
        for path in sorted(self.findings_dir.glob("*.json")):
            if path.stem == "matrix":
                continue
            f = Finding.from_dict(json.loads(path.read_text()))
            findings[f.finding_id] = f
        return findings

    def save_matrix(self, matrix: CoverageMatrix) -> None:
        self.findings_dir.mkdir(parents=True, exist_ok=True)
        path = self.findings_dir / "matrix.json"
        path.write_text(
            json.dumps({"schema_version": SCHEMA_VERSION, **matrix.to_dict()}, indent=2)
        )

    def load_matrix(self) -> CoverageMatrix | None:
        path = self.findings_dir / "matrix.json"
        if not path.exists():
            return None
        return CoverageMatrix.from_dict(json.loads(path.read_text()))

    # -- architecture versions --------------------------------------------

    def register_architecture(self, state: ProjectState, source_dir: Path) -> ArchitectureVersion:
        """Register a manifest directory as the next architecture version.

        The directory must contain ``manifest.json``; its version must be
        exactly one past the latest registered version. The directory is
        copied under ``specs/architecture/v<N>/`` unless it already lives
        there, and indexed as a phase artifact.
        """
        source_dir = Path(source_dir)
        manifest_path = source_dir / "manifest.json"
        if not manifest_path.exists():
            raise ValidationError(f"no manifest.json in {source_dir}")
        version = ArchitectureVersion.load_manifest(manifest_path)
        expected = (state.architecture_versions[-1] + 1) if state.architecture_versions else 1
        if version.version != expected:
            raise ValidationError(
                f"expected architecture version {expected}, manifest declares {version.version}"
            )
        dest = self.architecture_dir(version.version)
        if source_dir.resolve() != dest.resolve():
            if dest.exists():
                raise LocationOccupiedError(f"{dest} already exists")
            shutil.copytree(source_dir, dest)
        state.architecture_versions.append(version.version)
        rel = str(dest.relative_to(self.root) / "manifest.json")
        register_artifact(
            state, self.root, phase=state.current_phase, version=version.version,
            relative_path=rel,
        )
        return version

    def load_architecture(self, version: int) -> ArchitectureVersion:
        manifest = self.architecture_dir(version) / "manifest.json"
        if not manifest.exists():
            raise MissingProjectError(f"architecture v{version} not registered")
        return ArchitectureVersion.load_manifest(manifest)

    def latest_architectures(self, state: ProjectState) -> tuple[ArchitectureVersion | None, ArchitectureVersion | None]:
        """(previous, latest) registered versions; None when absent."""
        versions = state.architecture_versions
        latest = self.load_architecture(versions[-1]) if versions else None
        prev = self.load_architecture(versions[-2]) if len(versions) > 1 else None
        return prev, latest
