"""
Closed-form scenarios: background charge, initial phase-space density and,
where known, the analytic field and charge density.

All scenario functions are vectorized over numpy arrays and total (zero
outside their support).
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import structlog

from .errors import ScenarioError

logger = structlog.get_logger()

ArrayFunc = Callable[..., np.ndarray]

# ∫ 0.1 (0.6 - v^2)^3 dv over |v| < sqrt(0.6)
PERTURBATION_VELOCITY_MASS = 0.1 * 2.0 * 0.6 ** 3.5 * 16.0 / 35.0
# ∫ (1 - v^2)^3 dv over |v| < 1
BUMP_MASS = 32.0 / 35.0


def bump_profile(z, A: float, B: float):
    """A(B - z^2)^3 on |z| < sqrt(B), 0 elsewhere."""
    z = np.asarray(z, dtype=float)
    gap = B - z * z
    value = np.where(gap > 0, A * gap ** 3, 0.0)
    return value if value.ndim else float(value)


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    initial_density: ArrayFunc
    background_charge: ArrayFunc
    perturbation_radius: float
    velocity_support: float
    analytic_field: Optional[ArrayFunc] = None
    analytic_rho: Optional[ArrayFunc] = None
    analytic_initial_field: Optional[ArrayFunc] = None

    def check_against(self, cfg) -> None:
        """Reject configurations the scenario cannot be truncated to."""
        if self.perturbation_radius >= cfg.L:
            raise ScenarioError(
                f"Scenario {self.name!r} perturbs |x| < {self.perturbation_radius}, outside [-L, L] with L={cfg.L}"
            )
        if self.velocity_support > cfg.Q * (1 + 1e-12):
            raise ScenarioError(
                f"Scenario {self.name!r} has velocity support {self.velocity_support}, wider than Q={cfg.Q}"
            )
        if self.perturbation_radius > cfg.R:
            logger.warning("Perturbation extends past R", scenario=self.name,
                           perturbation_radius=self.perturbation_radius, R=cfg.R)


def _inside_unit(x: np.ndarray) -> np.ndarray:
    return np.abs(x) < 1.0


def steady_state_scenario() -> ScenarioSpec:
    """
    Stationary solution f(x, v) = 𝓕(v²/2 + U(x)) with 𝓕(e) = max(-e, 0) and
    the potential well U(x) = -(1 - x²)³/2 on (-1, 1).
    """
    def potential(x):
        x = np.asarray(x, dtype=float)
        return np.where(_inside_unit(x), -0.5 * (1.0 - x * x) ** 3, 0.0)

    def initial_density(x, v):
        v = np.asarray(v, dtype=float)
        energy = 0.5 * v * v + potential(x)
        return np.where(energy <= 0, -energy, 0.0)

    def analytic_field(x):
        x = np.asarray(x, dtype=float)
        return np.where(_inside_unit(x), 3.0 * x * (1.0 - x * x) ** 2, 0.0)

    def analytic_rho(x):
        x = np.asarray(x, dtype=float)
        return np.where(_inside_unit(x), 3.0 * (1.0 - x * x) * (1.0 - 5.0 * x * x), 0.0)

    def electron_density(x):
        x = np.asarray(x, dtype=float)
        return np.where(_inside_unit(x), (2.0 / 3.0) * np.abs(1.0 - x * x) ** 4.5, 0.0)

    def background_charge(x):
        # the v-integral of the x-dependent background; its δ(v) factor integrates to 1
        return analytic_rho(x) + electron_density(x)

    return ScenarioSpec(
        name='steady',
        initial_density=initial_density,
        background_charge=background_charge,
        perturbation_radius=1.0,
        velocity_support=1.0,
        analytic_field=analytic_field,
        analytic_rho=analytic_rho,
        analytic_initial_field=analytic_field,
    )


def discrete_background(dv: float, Q: float) -> float:
    """Δv Riemann sum of F(v) = bump_profile(v, 1, 1) on the particle velocity lattice."""
    cells = int(round(Q / dv))
    velocities = np.arange(-cells, cells + 1) * dv
    return float(dv * np.sum(bump_profile(velocities, 1.0, 1.0)))


def perturbation_scenario(dv: Optional[float] = None, Q: float = 1.0, amplitude: float = 1.0) -> ScenarioSpec:
    """
    Background F(v) = U(v, 1, 1) with the odd perturbation
    f_0 = F(v) + amplitude * x U(x, 1, 1) U(v, 0.1, 0.6).

    With ``dv`` given, the constant background charge is the same Riemann sum
    that weights the particles, so the initial grid is neutral to round-off.
    """
    background = discrete_background(dv, Q) if dv else BUMP_MASS

    def initial_density(x, v):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        perturbation = x * bump_profile(x, 1.0, 1.0) * bump_profile(v, 0.1, 0.6)
        return bump_profile(v, 1.0, 1.0) + amplitude * perturbation

    def background_charge(x):
        return np.full(np.shape(x), background)

    def analytic_initial_field(x):
        x = np.asarray(x, dtype=float)
        inside = _inside_unit(x)
        return np.where(inside, amplitude * PERTURBATION_VELOCITY_MASS * (1.0 - x * x) ** 4 / 8.0, 0.0)

    return ScenarioSpec(
        name='perturbation',
        initial_density=initial_density,
        background_charge=background_charge,
        perturbation_radius=1.0 if amplitude else 0.0,
        velocity_support=1.0,
        analytic_initial_field=analytic_initial_field,
    )


def scenario_for(cfg) -> ScenarioSpec:
    """Build the scenario a SimConfig names."""
    if cfg.scenario == 'steady':
        scenario = steady_state_scenario()
    elif cfg.scenario == 'perturbation':
        scenario = perturbation_scenario(dv=cfg.dv, Q=cfg.Q, amplitude=cfg.amplitude)
    else:
        raise ScenarioError(f"Unknown scenario {cfg.scenario!r}")
    scenario.check_against(cfg)
    return scenario
