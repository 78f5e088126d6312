import pytest
from hypothesis import given, strategies as st

from converge.errors import ValidationError
from converge.metrics import adoption_check, context_efficiency


class TestContextEfficiency:
    def test_half(self):
        assert context_efficiency(500, 1000).efficiency == 0.5

    def test_perfect(self):
        assert context_efficiency(1000, 1000).efficiency == 1.0

    def test_zero_relevant(self):
        assert context_efficiency(0, 1000).efficiency == 0.0

    def test_zero_total_rejected(self):
        with pytest.raises(ValidationError):
            context_efficiency(0, 0)

    def test_relevant_exceeding_total_rejected(self):
        with pytest.raises(ValidationError):
            context_efficiency(1001, 1000)

    def test_negative_relevant_rejected(self):
        with pytest.raises(ValidationError):
            context_efficiency(-1, 1000)

    @given(st.integers(1, 10**9), st.integers(0, 10**9))
    def test_bounds(self, c, i0):
        if i0 <= c:
            assert 0.0 <= context_efficiency(i0, c).efficiency <= 1.0


class TestAdoptionCheck:
    def test_satisfied(self):
        est = adoption_check(
            [{"gate_id": "G0", "cost": 2, "unit": "hours"},
             {"gate_id": "G4", "cost": 3, "unit": "hours"}],
            [{"label": "prod rollback", "probability": 0.2, "cost": 40, "unit": "hours"}])
        assert est.lhs == 5 and est.rhs == 8 and est.satisfied

    def test_equality_not_satisfied(self):
        est = adoption_check(
            [{"gate_id": "G0", "cost": 8, "unit": "hours"}],
            [{"label": "e", "probability": 0.2, "cost": 40, "unit": "hours"}])
        assert est.lhs == est.rhs == 8
        assert not est.satisfied

    def test_empty_scenarios_means_not_satisfied(self):
        est = adoption_check([{"gate_id": "G0", "cost": 0, "unit": "hours"}], [])
        assert est.rhs == 0 and not est.satisfied

    def test_mixed_units_rejected(self):
        with pytest.raises(ValidationError):
            adoption_check(
                [{"gate_id": "G0", "cost": 1, "unit": "hours"}],
                [{"label": "e", "probability": 0.5, "cost": 10, "unit": "dollars"}])

    def test_probability_out_of_range(self):
        with pytest.raises(ValidationError):
            adoption_check([], [{"label": "e", "probability": 1.5, "cost": 1, "unit": "h"}])

    def test_negative_costs_rejected(self):
        with pytest.raises(ValidationError):
            adoption_check([{"gate_id": "G0", "cost": -1, "unit": "h"}], [])

    def test_inputs_travel_with_result(self):
        gates = [{"gate_id": "G0", "cost": 1, "unit": "h"}]
        scenarios = [{"label": "e", "probability": 0.9, "cost": 10, "unit": "h"}]
        est = adoption_check(gates, scenarios)
        assert est.gate_costs == gates and est.error_scenarios == scenarios
        assert est.to_dict()["satisfied"] is True
