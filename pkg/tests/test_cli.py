import json

import numpy as np
import pytest

from main import main
from utils.diagnostics import COLUMNS, DiagnosticsSeries, FieldSnapshot
from utils.harness import RunManifest, emit_outputs

SMALL_RUN = "dt = 0.05\ndx = 0.05\ndv = 0.05\nL = 3.0\nT = 0.25\nsnapshot_stride = 0\n"


def _synthetic_run(directory):
    """Envelope 0.01/t inside |x| <= 1, a constant 1.0 outside it."""
    times = np.arange(1, 81) * 0.5
    inner = np.zeros_like(times)
    inner[1::2] = 0.01 / times[1::2]
    x = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    series = DiagnosticsSeries()
    for n, (t, v) in enumerate(zip(times, inner)):
        row = {name: 0.0 for name in COLUMNS}
        row.update(step=n, time=float(t), sup_field=float(v))
        series.append(**row)
        field = np.array([1.0, v, -v, v, 1.0])
        series.snapshots.append(FieldSnapshot(n, float(t), x, np.zeros(5), field))
    manifest = RunManifest(config='', scenario='synthetic', total_steps=len(times) - 1,
                           exhaustion_step=None, wall_clock_seconds=0.0)
    emit_outputs(series, manifest, directory)
    return directory / 'diagnostics.csv'


def test_run_writes_outputs(tmp_path):
    config = tmp_path / 'small.cfg'
    config.write_text(SMALL_RUN)
    out = tmp_path / 'out'
    assert main(['run', '--config', str(config), '--output-dir', str(out)]) == 0
    assert (out / 'diagnostics.csv').exists()
    manifest = json.loads((out / 'manifest.json').read_text())
    assert manifest['total_steps'] == 5


def test_bad_config_exits_2(tmp_path, capsys):
    config = tmp_path / 'bad.cfg'
    config.write_text('bogus = 1\n')
    assert main(['run', '--config', str(config), '--output-dir', str(tmp_path)]) == 2
    assert 'bogus' in capsys.readouterr().err


def test_missing_config_exits_2(tmp_path):
    assert main(['run', '--config', str(tmp_path / 'absent.cfg')]) == 2


def test_unwritable_output_exits_3(tmp_path):
    config = tmp_path / 'small.cfg'
    config.write_text(SMALL_RUN)
    blocker = tmp_path / 'blocker'
    blocker.write_text('')
    assert main(['run', '--config', str(config), '--output-dir', str(blocker)]) == 3


def test_fit_prints_decay_fit(tmp_path, capsys):
    diagnostics = _synthetic_run(tmp_path)
    assert main(['fit', '--input', str(diagnostics), '--window', '2,38']) == 0
    fit = json.loads(capsys.readouterr().out)
    assert fit['exponent'] == pytest.approx(-1.0)
    assert fit['coefficient'] == pytest.approx(0.01)
    assert fit['window'] == [2.0, 38.0]
    np.testing.assert_allclose(fit['products'], 0.01)


def test_fit_over_chosen_half_width(tmp_path, capsys):
    diagnostics = _synthetic_run(tmp_path)
    assert main(['fit', '--input', str(diagnostics), '--window', '2,38', '--half-width', '1.0']) == 0
    fit = json.loads(capsys.readouterr().out)
    assert fit['exponent'] == pytest.approx(-1.0)


def test_fit_with_min_separation(tmp_path, capsys):
    diagnostics = _synthetic_run(tmp_path)
    assert main(['fit', '--input', str(diagnostics), '--window', '1,40', '--min-separation', '2']) == 0
    fit = json.loads(capsys.readouterr().out)
    assert fit['exponent'] == pytest.approx(-1.0)
    assert np.all(np.diff(fit['peak_times']) >= 2.0 - 1e-9)


def test_fit_without_peaks_exits_1(tmp_path):
    diagnostics = _synthetic_run(tmp_path)
    assert main(['fit', '--input', str(diagnostics), '--window', '2,2.6']) == 1


def test_fit_missing_input_exits_3(tmp_path):
    assert main(['fit', '--input', str(tmp_path / 'none.csv'), '--window', '1,2']) == 3


def test_bad_window_is_a_usage_error(tmp_path):
    with pytest.raises(SystemExit):
        main(['fit', '--input', str(tmp_path / 'none.csv'), '--window', '5,1'])


def test_converge(tmp_path, capsys):
    assert main(['converge', '--levels', '2', '--output-dir', str(tmp_path)]) == 0
    rates = json.loads(capsys.readouterr().out)
    assert set(rates) == {'0.0', '0.12', '0.24', '0.36', '0.48'}
    assert (tmp_path / 'convergence.csv').exists()
    assert (tmp_path / 'rates.csv').exists()


def test_converge_needs_two_levels(tmp_path):
    assert main(['converge', '--levels', '1', '--output-dir', str(tmp_path)]) == 1
