"""Operator-facing calculators: context efficiency and the gate-adoption
inequality. Both record their inputs verbatim; the engine measures nothing
itself (token counts and cost estimates are operator-supplied).
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError


@dataclass
class ContextEfficiency:
    relevant_tokens: int
    total_tokens: int
    efficiency: float

    def to_dict(self) -> dict:
        return {
            "relevant_tokens": self.relevant_tokens,
            "total_tokens": self.total_tokens,
            "efficiency": self.efficiency,
        }


@dataclass
class AdoptionEstimate:
    gate_costs: list[dict]  # {gate_id, cost, unit}
    error_scenarios: list[dict]  # {label, probability, cost, unit}
    lhs: float
    rhs: float
    satisfied: bool

    def to_dict(self) -> dict:
        return {
            "gate_costs": list(self.gate_costs),
            "error_scenarios": list(self.error_scenarios),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "satisfied": self.satisfied,
        }


def context_efficiency(i0: int, c: int) -> ContextEfficiency:
    """Relevant tokens over total tokens consumed, in [0, 1]."""
    if c <= 0:
        raise ValidationError("total token count must be positive")
    if i0 < 0:
        raise ValidationError("relevant token count must be non-negative")
    if i0 > c:
        raise ValidationError(f"relevant tokens exceed total: {i0} > {c}")
    return ContextEfficiency(relevant_tokens=i0, total_tokens=c, efficiency=i0 / c)


def adoption_check(gate_costs: list[dict], error_scenarios: list[dict]) -> AdoptionEstimate:
    """Total gate cost vs. expected cost of undetected errors.

    Satisfied exactly when the summed gate costs are strictly lower than the
    expectation over error scenarios. Cost unit labels must be uniform across
    both sides; full inputs travel with the result so the provenance of the
    estimates stays auditable.
    """
    units = {g.get("unit", "") for g in gate_costs} | {
        e.get("unit", "") for e in error_scenarios
    }
    if len(units) > 1:
        raise ValidationError(f"mixed cost units: {sorted(units)}")
    for g in gate_costs:
        if float(g["cost"]) < 0:
            raise ValidationError(f"negative gate cost: {g}")
    for e in error_scenarios:
        p = float(e["probability"])
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"probability out of range: {e}")
        if float(e["cost"]) < 0:
            raise ValidationError(f"negative error cost: {e}")
    lhs = sum(float(g["cost"]) for g in gate_costs)
    rhs = sum(float(e["probability"]) * float(e["cost"]) for e in error_scenarios)
    return AdoptionEstimate(
        gate_costs=list(gate_costs),
        error_scenarios=list(error_scenarios),
        lhs=lhs,
        rhs=rhs,
        satisfied=lhs < rhs,
    )
