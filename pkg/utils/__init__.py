"""
Vlasov-Poisson Particle Simulator Utilities Package
Scenarios, particle pusher, grid field solve, validity tracking and diagnostics
"""

__version__ = "1.0.0"

from .scenarios import ScenarioSpec, perturbation_scenario, scenario_for, steady_state_scenario
from .particles import ForceSign, ParticleSet, initialize_particles
from .grid_field import FieldGrid, deposit_charge, enlarge_grid, integrate_field, interpolate_field
from .validity import EXHAUSTED, NOT_YET_REACHED, Interval, ValidityTracker
from .diagnostics import DecayFit, DiagnosticsSeries, convergence_rate, field_integral, fit_decay, net_energy, sup_field

__all__ = [
    'ScenarioSpec', 'perturbation_scenario', 'scenario_for', 'steady_state_scenario',
    'ForceSign', 'ParticleSet', 'initialize_particles',
    'FieldGrid', 'deposit_charge', 'enlarge_grid', 'integrate_field', 'interpolate_field',
    'EXHAUSTED', 'NOT_YET_REACHED', 'Interval', 'ValidityTracker',
    'DecayFit', 'DiagnosticsSeries', 'convergence_rate', 'field_integral', 'fit_decay', 'net_energy', 'sup_field',
]
