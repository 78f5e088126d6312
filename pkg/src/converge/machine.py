"""Phase state machine: the eight phases and the legal transition relation.

Phases 0-7 advance strictly forward except for two special edges: 4 -> 2
(the critique/simplification loop re-entered after a rejected convergence
gate) and 2 -> 4 (skipping simplification when the critique produced zero
findings).
"""
from __future__ import annotations

PHASES = tuple(range(8))

PHASE_NAMES = {
    0: "Problem Discovery",
    1: "Architecture",
    2: "Adversarial Critique",
    3: "Simplification",
    4: "Convergence Gate",
    5: "Code Implementation",
    6: "Tests",
    7: "Post-Review",
}

# Forward edges k -> k+1, plus the loop edge 4 -> 2 and the skip edge 2 -> 4.
LEGAL_EDGES = frozenset(
    {(k, k + 1) for k in range(7)} | {(4, 2), (2, 4)}
)

GATE_IDS = tuple(f"G{k}" for k in range(8))


def is_legal_edge(from_phase: int, to_phase: int) -> bool:
    return (from_phase, to_phase) in LEGAL_EDGES


def authorizing_gate(from_phase: int, to_phase: int) -> str:
    """Gate whose evaluation authorizes the given edge.

    Every edge leaving phase k is authorized by gate Gk: forward edges need
    an approved evaluation, the 4 -> 2 loop edge needs a rejected G4.
    """
    if not is_legal_edge(from_phase, to_phase):
        raise ValueError(f"no gate authorizes illegal edge {from_phase}->{to_phase}")
    return f"G{from_phase}"


def required_gate_result(from_phase: int, to_phase: int) -> str:
    """'approved' for forward edges, 'rejected' for the 4 -> 2 loop."""
    if (from_phase, to_phase) == (4, 2):
        return "rejected"
    return "approved"


def replay(transitions: list[tuple[int, int]]) -> int:
    """Replay a transition list from phase 0 using only the legality relation.

    Returns the resulting phase; raises ValueError on any illegal or
    discontinuous edge.
    """
    phase = 0
    for from_phase, to_phase in transitions:
        if from_phase != phase:
            raise ValueError(
                f"transition {from_phase}->{to_phase} does not start at current phase {phase}"
            )
        if not is_legal_edge(from_phase, to_phase):
            raise ValueError(f"illegal edge {from_phase}->{to_phase}")
        phase = to_phase
    return phase
