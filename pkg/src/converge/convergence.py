"""Phases 3-4 mechanics: canonical architecture versions, the complexity
measure, the keyed-element structural diff with change ratio, and the G3/G4
predicates.

The change ratio is a keyed set comparison over four element classes
(modules, interfaces, assumptions, negative scope): changed elements over
the union of both versions' elements, bounded in [0, 1] and symmetric in
magnitude.
"""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import NonConsecutiveVersionsError, ValidationError
from .verdict import GateVerdict
from .critique import CRITICAL, IMPORTANT, OPEN, RATIONALE_REQUIRED, Finding

# "Below 15%" read strictly; overridable per project in configuration.
DEFAULT_CHANGE_RATIO_THRESHOLD = 0.15

ELEMENT_CLASSES = ("modules", "interfaces", "assumptions", "negative_scope")


def _normalize(text: str) -> str:
    # whitespace-collapsed, case-preserved
    return re.sub(r"\s+", " ", text).strip()


def _text_hash(text: str) -> str:
    return hashlib.sha256(_normalize(text).encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class ModuleDecl:
    name: str
    responsibility: str


@dataclass(frozen=True)
class InterfaceDecl:
    provider: str
    consumer: str
    contract: str


@dataclass
class ArchitectureVersion:
    version: int
    modules: list[ModuleDecl]
    interfaces: list[InterfaceDecl]
    assumptions: list[str] = field(default_factory=list)
    negative_scope: list[str] = field(default_factory=list)
    # declared renames: old module name -> new module name; a declared rename
    # keys the element stable across versions and counts as a modification
    renames: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        names = [m.name for m in self.modules]
        if len(names) != len(set(names)):
            raise ValidationError(f"v{self.version}: duplicate module names")
        declared = set(names)
        for i in self.interfaces:
            for endpoint in (i.provider, i.consumer):
                if endpoint not in declared:
                    raise ValidationError(
                        f"v{self.version}: interface endpoint {endpoint!r} is not a declared module"
                    )

    def elements(self) -> dict[str, dict[str, str]]:
        """Keyed elements per class: key -> content hash."""
        return {
            "modules": {m.name: _text_hash(m.responsibility) for m in self.modules},
            "interfaces": {
                f"{i.provider}->{i.consumer}#{_text_hash(i.contract)}": _text_hash(i.contract)
                for i in self.interfaces
            },
            "assumptions": {_text_hash(a): _text_hash(a) for a in self.assumptions},
            "negative_scope": {_text_hash(n): _text_hash(n) for n in self.negative_scope},
        }

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "modules": [{"name": m.name, "responsibility": m.responsibility} for m in self.modules],
            "interfaces": [
                {"provider": i.provider, "consumer": i.consumer, "contract": i.contract}
                for i in self.interfaces
            ],
            "assumptions": list(self.assumptions),
            "negative_scope": list(self.negative_scope),
            "renames": dict(self.renames),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ArchitectureVersion":
        return cls(
            version=int(d["version"]),
            modules=[ModuleDecl(m["name"], m.get("responsibility", "")) for m in d.get("modules", [])],
            interfaces=[
                InterfaceDecl(i["provider"], i["consumer"], i.get("contract", ""))
                for i in d.get("interfaces", [])
            ],
            assumptions=list(d.get("assumptions", [])),
            negative_scope=list(d.get("negative_scope", [])),
            renames=dict(d.get("renames", {})),
        )

    @classmethod
    def load_manifest(cls, path: Path) -> "ArchitectureVersion":
        """Parse a version manifest (``manifest.json`` inside the version dir)."""
        data = json.loads(Path(path).read_text())
        return cls.from_dict(data)

    def module_names(self) -> list[str]:
        return [m.name for m in self.modules]


@dataclass
class StructuralDiff:
    added: dict[str, int]
    removed: dict[str, int]
    modified: dict[str, int]
    change_ratio: float

    def totals(self) -> dict[str, int]:
        return {
            "added": sum(self.added.values()),
            "removed": sum(self.removed.values()),
            "modified": sum(self.modified.values()),
        }

    def to_dict(self) -> dict:
        return {
            "added": dict(self.added),
            "removed": dict(self.removed),
            "modified": dict(self.modified),
            "change_ratio": self.change_ratio,
        }


@dataclass
class ComplexityMeasure:
    module_count: int
    interface_count: int

    @property
    def total(self) -> int:
        return self.module_count + self.interface_count

    def to_dict(self) -> dict:
        return {
            "module_count": self.module_count,
            "interface_count": self.interface_count,
            "total": self.total,
        }


def structural_diff(
    v_prev: ArchitectureVersion,
    v_next: ArchitectureVersion,
    check_consecutive: bool = True,
) -> StructuralDiff:
    """Keyed-element diff between consecutive versions.

    Per class: added = keys only in next, removed = keys only in prev,
    modified = same key with different content hash. Declared renames in the
    next version map the old module key onto the new one and count as
    modifications. Ratio = changed / union over all classes (0 for two empty
    versions).
    """
    if check_consecutive and v_next.version != v_prev.version + 1:
        raise NonConsecutiveVersionsError(
            f"expected version {v_prev.version + 1}, got {v_next.version}"
        )
    prev_elements = v_prev.elements()
    next_elements = v_next.elements()

    # Apply declared renames: re-key prev modules to their new names, marking
    # the renamed element as force-modified.
    renamed_keys = set()
    prev_modules = dict(prev_elements["modules"])
    for old, new in v_next.renames.items():
        if old in prev_modules and new in next_elements["modules"]:
            prev_modules[new] = prev_modules.pop(old)
            renamed_keys.add(new)
    prev_elements["modules"] = prev_modules

    added: dict[str, int] = {}
    removed: dict[str, int] = {}
    modified: dict[str, int] = {}
    changed = 0
    union = 0
    for cls_name in ELEMENT_CLASSES:
        prev = prev_elements[cls_name]
        nxt = next_elements[cls_name]
        keys_prev, keys_next = set(prev), set(nxt)
        cls_added = keys_next - keys_prev
        cls_removed = keys_prev - keys_next
        cls_modified = {
            k
            for k in keys_prev & keys_next
            if prev[k] != nxt[k] or (cls_name == "modules" and k in renamed_keys)
        }
        added[cls_name] = len(cls_added)
        removed[cls_name] = len(cls_removed)
        modified[cls_name] = len(cls_modified)
        changed += len(cls_added) + len(cls_removed) + len(cls_modified)
        union += len(keys_prev | keys_next)
    ratio = changed / union if union else 0.0
    return StructuralDiff(added=added, removed=removed, modified=modified, change_ratio=ratio)


def complexity(v: ArchitectureVersion) -> ComplexityMeasure:
    return ComplexityMeasure(module_count=len(v.modules), interface_count=len(v.interfaces))


def evaluate_g3(v_prev: ArchitectureVersion, v_next: ArchitectureVersion) -> GateVerdict:
    """Complexity audit: the simplified version must not be more complex."""
    if v_next.version != v_prev.version + 1:
        raise NonConsecutiveVersionsError(
            f"expected version {v_prev.version + 1}, got {v_next.version}"
        )
    prev_measure = complexity(v_prev)
    next_measure = complexity(v_next)
    approved = next_measure.total <= prev_measure.total
    reasons = []
    if not approved:
        reasons.append(
            f"complexity increased: {next_measure.total} > {prev_measure.total}"
        )
    return GateVerdict(
        approved=approved,
        reasons=reasons,
        details={"previous": prev_measure.to_dict(), "next": next_measure.to_dict()},
    )


def evaluate_g4(
    diff: StructuralDiff,
    findings: dict[str, Finding],
    threshold: float = DEFAULT_CHANGE_RATIO_THRESHOLD,
) -> GateVerdict:
    """Convergence gate: structural change strictly below the threshold, zero
    open critical findings, every important finding settled (resolved,
    accepted, or deferred, with rationale where the decision demands one).
    Rejection enumerates every failed clause."""
    reasons = []
    if not diff.change_ratio < threshold:
        reasons.append(
            f"structural change {diff.change_ratio:.4f} not below threshold {threshold}"
        )
    open_criticals = sorted(
        f.finding_id for f in findings.values() if f.severity == CRITICAL and f.status == OPEN
    )
    if open_criticals:
        reasons.append("zero critical findings required; open: " + ", ".join(open_criticals))
    for f in sorted(findings.values(), key=lambda f: f.finding_id):
        if f.severity != IMPORTANT:
            continue
        if f.status == OPEN:
            reasons.append(f"important finding unsettled: {f.finding_id}")
        elif f.decision in RATIONALE_REQUIRED and not f.decision_rationale.strip():
            reasons.append(f"important finding {f.finding_id} lacks rationale for {f.decision}")
    return GateVerdict(
        approved=not reasons,
        reasons=reasons,
        details={"change_ratio": diff.change_ratio, "threshold": threshold},
    )
