import numpy as np
import pytest

from config.settings import SimConfig
from utils.errors import ScenarioError
from utils.scenarios import (
    BUMP_MASS, PERTURBATION_VELOCITY_MASS, bump_profile, discrete_background, perturbation_scenario, scenario_for,
    steady_state_scenario,
)


def test_bump_profile_values():
    assert bump_profile(0.0, 1.0, 1.0) == 1.0
    assert bump_profile(1.0, 1.0, 1.0) == 0.0
    assert bump_profile(2.0, 1.0, 1.0) == 0.0
    assert bump_profile(0.5, 2.0, 1.0) == pytest.approx(2.0 * 0.75 ** 3)
    np.testing.assert_allclose(bump_profile(np.array([-0.5, 0.5]), 1.0, 1.0), [0.75 ** 3] * 2)


class TestSteadyState:
    scenario = steady_state_scenario()

    def test_density_at_origin(self):
        assert float(self.scenario.initial_density(0.0, 0.0)) == pytest.approx(0.5)
        assert float(self.scenario.initial_density(1.5, 0.0)) == 0.0

    def test_analytic_field_values(self):
        field = self.scenario.analytic_field
        assert float(field(0.5)) == pytest.approx(0.84375)
        assert float(field(1.0 / np.sqrt(5.0))) == pytest.approx(0.858650, rel=1e-5)
        assert float(field(-1.5)) == 0.0

    def test_field_derivative_is_density(self):
        x = np.linspace(-0.99, 0.99, 20001)
        slope = np.gradient(self.scenario.analytic_field(x), x, edge_order=2)
        np.testing.assert_allclose(slope, self.scenario.analytic_rho(x), atol=1e-5)

    def test_background_is_density_plus_electrons(self):
        x = 0.3
        v = np.linspace(-1.0, 1.0, 200001)
        electrons = np.trapz(self.scenario.initial_density(np.full_like(v, x), v), v)
        assert electrons == pytest.approx((2.0 / 3.0) * (1 - x * x) ** 4.5, rel=1e-6)
        background = float(self.scenario.background_charge(np.array([x]))[0])
        assert background - float(self.scenario.analytic_rho(x)) == pytest.approx(electrons, rel=1e-6)


class TestPerturbation:
    def test_discrete_background_matches_integral(self):
        assert discrete_background(0.02, 1.0) == pytest.approx(BUMP_MASS, rel=1e-6)
        assert perturbation_scenario().background_charge(np.zeros(3))[0] == BUMP_MASS

    def test_perturbation_is_odd_in_x(self):
        scenario = perturbation_scenario(dv=0.02)
        F = bump_profile(0.0, 1.0, 1.0)
        assert scenario.initial_density(0.5, 0.0) - F == pytest.approx(0.5 * 0.75 ** 3 * 0.1 * 0.6 ** 3)
        assert scenario.initial_density(0.5, 0.2) + scenario.initial_density(-0.5, 0.2) == pytest.approx(
            2 * bump_profile(0.2, 1.0, 1.0))

    def test_zero_amplitude_is_background(self):
        scenario = perturbation_scenario(dv=0.02, amplitude=0.0)
        x, v = np.meshgrid(np.linspace(-2, 2, 41), np.linspace(-1, 1, 21), indexing='ij')
        np.testing.assert_array_equal(scenario.initial_density(x, v), bump_profile(v, 1.0, 1.0))
        assert scenario.perturbation_radius == 0.0

    def test_analytic_initial_field(self):
        scenario = perturbation_scenario()
        assert PERTURBATION_VELOCITY_MASS == pytest.approx(1.52972e-2, rel=1e-5)
        assert float(scenario.analytic_initial_field(0.0)) == pytest.approx(1.91215e-3, rel=1e-5)
        x = np.linspace(-0.99, 0.99, 20001)
        slope = np.gradient(scenario.analytic_initial_field(x), x, edge_order=2)
        expected = -PERTURBATION_VELOCITY_MASS * x * (1 - x * x) ** 3
        np.testing.assert_allclose(slope, expected, atol=1e-8)


def test_domain_too_small_is_rejected():
    with pytest.raises(ScenarioError):
        steady_state_scenario().check_against(SimConfig(L=1.0, R=0.5))


def test_velocity_domain_too_small_is_rejected():
    with pytest.raises(ScenarioError):
        perturbation_scenario().check_against(SimConfig(Q=0.5))


def test_scenario_for_dispatch():
    assert scenario_for(SimConfig()).name == 'perturbation'
    assert scenario_for(SimConfig(L=2.0, scenario='steady')).name == 'steady'
    with pytest.raises(ScenarioError):
        scenario_for(SimConfig(scenario='bogus'))
