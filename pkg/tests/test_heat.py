import math

import pytest

from arrowlab.balance import EntropyBalanceReport
from fluctuation.heat import damping_heat, effective_temperatures, energy_changes, heat_flow_trial
from qcore.exceptions import PreconditionError, SupportError, UndefinedTemperatureError
from qcore.sampling import random_density_operator
from qcore.states import DensityOperator, Hamiltonian, UnitaryOperator, gibbs_state

H_QUBIT = Hamiltonian.diagonal([0.0, 1.0])


class TestHeatFlow:
    @pytest.mark.parametrize(
        "beta_s,beta_r,omega,t",
        [(0.5, 2.0, 1.0, 0.7), (2.5, 0.3, 1.7, 1.1), (1.0, 1.4, 0.6, 0.3)],
    )
    def test_hot_side_loses_energy(self, beta_s, beta_r, omega, t):
        result = heat_flow_trial(beta_s, beta_r, omega, t)
        assert result.hot_energy_change < 0
        assert result.delta_u_s + result.delta_u_r == pytest.approx(0.0, abs=1e-12)
        assert result.balance.total >= -1e-12

    def test_temperatures_and_clausius(self):
        result = heat_flow_trial(0.5, 2.0, 1.0, 0.7)
        temps = result.temperatures
        assert temps is not None
        assert temps.heat_flow_consistent
        assert temps.clausius_lhs == pytest.approx(result.balance.total, abs=1e-12)
        assert temps.clausius_lhs >= 0

    def test_equal_temperatures_no_flow(self):
        result = heat_flow_trial(1.0, 1.0, 1.0, 0.7)
        assert result.delta_u_s == pytest.approx(0.0, abs=1e-14)
        assert result.temperatures is None

    def test_rejects_non_positive_beta(self):
        with pytest.raises(PreconditionError):
            heat_flow_trial(0.0, 1.0, 1.0, 1.0)


class TestEffectiveTemperatures:
    def test_undefined_when_entropy_unchanged(self):
        report = EntropyBalanceReport(0.0, 0.1, 0.1, 0.1, 0.0, 0.0, True)
        with pytest.raises(UndefinedTemperatureError):
            effective_temperatures(report, 0.2, -0.2)

    def test_undefined_when_energy_unchanged(self):
        report = EntropyBalanceReport(0.1, 0.1, 0.2, 0.2, 0.0, 0.01, True)
        with pytest.raises(UndefinedTemperatureError):
            effective_temperatures(report, 0.0, 0.3)

    def test_ratio(self):
        report = EntropyBalanceReport(0.1, -0.05, 0.05, 0.05, 0.0, -0.005, True)
        temps = effective_temperatures(report, 0.2, -0.2)
        assert temps.t_s == pytest.approx(2.0)
        assert temps.t_r == pytest.approx(4.0)
        assert temps.clausius_lhs == pytest.approx(0.05)
        assert temps.heat_flow_consistent is None

    def test_energy_changes_identity(self, random_product, qubits):
        assert energy_changes(random_product, qubits, UnitaryOperator.identity(4), H_QUBIT, H_QUBIT) == pytest.approx((0.0, 0.0))


class TestDampingHeat:
    BETA = math.log(3)

    def test_maximally_mixed(self):
        assert damping_heat(DensityOperator.maximally_mixed(2), H_QUBIT, self.BETA) == pytest.approx(0.143841, abs=1e-6)

    def test_excited(self):
        assert damping_heat(DensityOperator.basis_state(2, 1), H_QUBIT, self.BETA) == pytest.approx(math.log(4), abs=1e-12)

    def test_thermal_state_costs_nothing(self):
        assert damping_heat(gibbs_state(H_QUBIT, self.BETA), H_QUBIT, self.BETA) == pytest.approx(0.0, abs=1e-12)

    def test_non_negative(self, rng):
        for _ in range(10):
            assert damping_heat(random_density_operator(2, 2, rng), H_QUBIT, 0.8) >= 0

    def test_zero_temperature_limit_has_no_support(self):
        h = Hamiltonian.diagonal([0.0, 100.0])
        with pytest.raises(SupportError):
            damping_heat(DensityOperator.basis_state(2, 1), h, 1.0)
