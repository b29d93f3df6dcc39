"""Long-time behaviour at reduced and full scale; run with ``pytest -m slow``."""

import math

import numpy as np
import pytest

from config.settings import PRESETS, SimConfig
from utils.diagnostics import breakdown_check, energy_drift, fit_decay
from utils.harness import run_simulation

pytestmark = pytest.mark.slow


@pytest.fixture(scope='module')
def reduced_run():
    return run_simulation(SimConfig(L=30.0, T=30.0, snapshot_stride=0))


# |E| peaks twice per plasma period, 2π/√b ≈ 6.6
PEAK_SEPARATION = 3.0


def test_field_envelope_decays(reduced_run):
    series, _ = reduced_run
    fit = fit_decay(series, (12.0, 28.0), min_separation=PEAK_SEPARATION)
    # the undamped dipole oscillation leaves dispersive t^-1/2 decay, not t^-1
    assert -0.8 <= fit.exponent <= -0.2
    assert fit.residual <= math.log(2.0)


def test_field_integral_keeps_its_amplitude(reduced_run):
    series, _ = reduced_run
    moment = series.column('field_integral')
    late = series.column('time') >= 12.0
    assert np.max(np.abs(moment[late])) >= 0.8 * abs(moment[0])


def test_energy_drift_stays_small(reduced_run):
    series, _ = reduced_run
    assert energy_drift(series) <= 0.1


def test_exhaustion_time_tracks_domain_size():
    cfg = SimConfig(dt=0.05, dx=0.05, dv=0.05, L=50.0, T=70.0, snapshot_stride=0)
    _, manifest = run_simulation(cfg)
    assert manifest.exhaustion_step is not None
    assert 30.0 <= manifest.exhaustion_step * cfg.dt <= 60.0


def test_decay_stops_after_exhaustion():
    cfg = SimConfig(L=10.0, T=15.0, continue_past_exhaustion=True, snapshot_stride=0)
    series, manifest = run_simulation(cfg)
    assert manifest.exhaustion_step is not None
    report = breakdown_check(series, manifest.exhaustion_step * cfg.dt)
    assert report.decay_stopped


def test_full_scale_decay():
    series, _ = run_simulation(PRESETS['full-scale'])
    fit = fit_decay(series, (15.0, 26.0), min_separation=PEAK_SEPARATION)
    assert -0.8 <= fit.exponent <= -0.2
    assert energy_drift(series) <= 0.1
