"""
Simulation driver: the per-step loop, mesh-convergence studies and the
CSV / manifest outputs.
"""

import csv
import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from config.settings import Config, SimConfig, render_config
from .diagnostics import (
    COLUMNS, DiagnosticsSeries, FieldSnapshot, convergence_rate, energy_drift, field_integral, net_energy,
    percent_change, steady_error, sup_field,
)
from .errors import ConvergenceError, OutputError, SimulationError
from .grid_field import GUARD_CELLS, FieldGrid, FieldInterpolant, deposit_charge, enlarge_grid, gauss_residual, integrate_field
from .metrics import RunMetrics
from .particles import ForceSign, ParticleSet, half_step_back, initialize_particles, max_speed, push_positions, push_velocities
from .scenarios import ScenarioSpec, scenario_for, steady_state_scenario
from .validity import EXHAUSTED, Interval, ValidityTracker

logger = structlog.get_logger()

# sample times of the steady-state error table
TABLE_TIMES = (0.0, 0.12, 0.24, 0.36, 0.48)


@dataclass
class SimulationState:
    """Everything needed to continue a run exactly where it stopped."""
    step: int
    particles: ParticleSet
    grid: FieldGrid
    tracker: ValidityTracker
    series: DiagnosticsSeries
    exhaustion_step: Optional[int] = None
    cfl_violations: int = 0


@dataclass
class RunManifest:
    config: str
    scenario: str
    total_steps: int
    exhaustion_step: Optional[int]
    wall_clock_seconds: float
    particle_count: int = 0
    cfl_violations: int = 0
    energy_drift: float = 0.0
    percent_change: float = 0.0
    output_files: List[str] = field(default_factory=list)
    checksum: str = ''
    metrics: Optional[RunMetrics] = field(default=None, repr=False, compare=False)

    def as_dict(self) -> Dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != 'metrics'}


class Simulation:
    """
    One run of the particle method. The constructor initializes particles,
    solves the initial field and shifts velocities back half a step; each
    ``advance`` then moves t^n to t^{n+1}.
    """

    def __init__(self, cfg: SimConfig, scenario: Optional[ScenarioSpec] = None,
                 settings: Optional[Config] = None, state: Optional[SimulationState] = None):
        self.cfg = cfg.validate()
        self.scenario = scenario or scenario_for(cfg)
        self.scenario.check_against(cfg)
        self.settings = settings or Config()
        self.sign = ForceSign(cfg.force_sign)
        self.window = Interval(-cfg.window_half_width, cfg.window_half_width)
        self.metrics = RunMetrics(self.scenario.name)

        if state is not None:
            self._load(state)
            return

        self.step = 0
        self.exhaustion_step: Optional[int] = None
        self.cfl_violations = 0
        self.series = DiagnosticsSeries()
        self.tracker = ValidityTracker(cfg.L, cfg.dt)
        self.particles = initialize_particles(self.scenario, cfg)
        self.grid = FieldGrid.empty(cfg.dx, cfg.half_cells, guard=GUARD_CELLS)
        self.solve_field()
        self.particles = half_step_back(self.particles, FieldInterpolant(self.grid), cfg.dt, self.sign)
        self.metrics.particles.set(self.particles.count)

    @classmethod
    def resume(cls, state: SimulationState, cfg: SimConfig, scenario: Optional[ScenarioSpec] = None,
               settings: Optional[Config] = None) -> 'Simulation':
        return cls(cfg, scenario, settings, state=state)

    @property
    def time(self) -> float:
        return self.step * self.cfg.dt

    @property
    def halted(self) -> bool:
        return self.exhaustion_step is not None and not self.cfg.continue_past_exhaustion

    # -- stages, in loop order -------------------------------------------

    def push_velocities(self) -> Tuple[ParticleSet, float, ValidityTracker]:
        """Kick to t^{n+1/2}, read S^{n+1/2}, and record the row for t^n."""
        pushed = push_velocities(self.particles, FieldInterpolant(self.grid), self.cfg.dt, self.sign)
        S = max_speed(pushed)
        tracker = self.tracker.copy().record_step(S)
        if self.series.last_step != self.step:
            self._record(self.particles, pushed, tracker)
        return pushed, S, tracker

    def enlarge_grid(self, S: float) -> None:
        self.grid = enlarge_grid(self.grid, S, self.cfg.dt)
        self.metrics.grid_half_length.set(self.grid.half_length)

    def push_positions(self) -> None:
        self.particles = push_positions(self.particles, self.cfg.dt)

    def solve_field(self) -> None:
        """Deposit charge at the current positions and integrate E."""
        self.grid = integrate_field(deposit_charge(self.particles, replace(self.grid, step=self.step), self.scenario))
        if self.settings.debug:
            residual = gauss_residual(self.grid)
            if residual > 1e-12:
                raise SimulationError(f"discrete Gauss law violated at step {self.step}: residual {residual:.3e}")

    def advance(self) -> None:
        start_time = time.perf_counter()
        pushed, S, tracker = self.push_velocities()
        self._commit(pushed, S, tracker)
        self.metrics.record_step(time.perf_counter() - start_time)

    def _commit(self, pushed: ParticleSet, S: float, tracker: ValidityTracker) -> None:
        self._check_cfl(S)
        self.particles = pushed
        self.tracker = tracker
        self.enlarge_grid(S)
        self.push_positions()
        self.step += 1
        self.solve_field()

    # -- loop --------------------------------------------------------------

    def run(self, until: Optional[float] = None) -> DiagnosticsSeries:
        """Advance until t^n reaches ``until`` (default T) or validity is exhausted."""
        stop_time = self.cfg.T if until is None else until
        final_step = int(math.ceil(stop_time / self.cfg.dt - 1e-9))
        logger.info("Run started", scenario=self.scenario.name, step=self.step, final_step=final_step,
                    particles=self.particles.count, half_length=self.grid.half_length)

        while self.step < final_step and not self.halted:
            start_time = time.perf_counter()
            pushed, S, tracker = self.push_velocities()
            if self.halted:
                break
            self._commit(pushed, S, tracker)
            self.metrics.record_step(time.perf_counter() - start_time)

        if self.series.last_step != self.step:
            self.push_velocities()

        logger.info("Run finished", scenario=self.scenario.name, steps=self.step,
                    exhaustion_step=self.exhaustion_step, half_length=self.grid.half_length)
        return self.series

    def _record(self, previous: ParticleSet, pushed: ParticleSet, tracker: ValidityTracker) -> None:
        valid = tracker.valid_interval()
        if valid is EXHAUSTED and self.exhaustion_step is None:
            self.exhaustion_step = self.step
            logger.info("Validity exhausted", step=self.step, time=self.time,
                        continuing=self.cfg.continue_past_exhaustion)

        if valid is EXHAUSTED:
            sup, error = math.nan, math.nan
        else:
            sup = sup_field(self.grid, valid)
            analytic = self.scenario.analytic_field
            error = steady_error(self.grid, analytic, valid) if analytic is not None else math.nan

        self.series.append(
            step=self.step,
            time=self.time,
            sup_field=sup,
            energy=net_energy(previous, pushed, self.grid),
            grid_half_length=self.grid.half_length,
            valid_half_width=max(tracker.valid_half_width, 0.0),
            window_sup_field=sup_field(self.grid, self.window),
            steady_error=error,
            field_integral=field_integral(self.grid),
        )
        stride = self.cfg.snapshot_stride
        if stride and self.step % stride == 0:
            self.series.snapshots.append(
                FieldSnapshot(self.step, self.time, self.grid.x, self.grid.rho.copy(), self.grid.field.copy())
            )

    def _check_cfl(self, S: float) -> None:
        if S * self.cfg.dt <= self.cfg.dx:
            return
        self.cfl_violations += 1
        self.metrics.cfl_violations.inc()
        if self.cfl_violations == 1:
            logger.warning("Particles cross more than one cell per step", step=self.step,
                           max_speed=S, dt=self.cfg.dt, dx=self.cfg.dx)

    # -- state hand-off ----------------------------------------------------

    def snapshot(self) -> SimulationState:
        return SimulationState(
            step=self.step,
            particles=self.particles.copy(),
            grid=self.grid.copy(),
            tracker=self.tracker.copy(),
            series=self.series.copy(),
            exhaustion_step=self.exhaustion_step,
            cfl_violations=self.cfl_violations,
        )

    def _load(self, state: SimulationState) -> None:
        self.step = state.step
        self.particles = state.particles.copy()
        self.grid = state.grid.copy()
        self.tracker = state.tracker.copy()
        self.series = state.series.copy()
        self.exhaustion_step = state.exhaustion_step
        self.cfl_violations = state.cfl_violations
        self.metrics.particles.set(self.particles.count)


def run_simulation(cfg: SimConfig, scenario: Optional[ScenarioSpec] = None,
                   settings: Optional[Config] = None) -> Tuple[DiagnosticsSeries, RunManifest]:
    start_time = time.time()
    sim = Simulation(cfg, scenario, settings)
    series = sim.run()
    manifest = RunManifest(
        config=render_config(cfg),
        scenario=sim.scenario.name,
        total_steps=sim.step,
        exhaustion_step=sim.exhaustion_step,
        wall_clock_seconds=time.time() - start_time,
        particle_count=sim.particles.count,
        cfl_violations=sim.cfl_violations,
        energy_drift=energy_drift(series),
        percent_change=percent_change(series),
        metrics=sim.metrics,
    )
    return series, manifest


# -- convergence study ---------------------------------------------------------

@dataclass
class ConvergenceTable:
    rows: List[Tuple[float, float, float]]
    rates: Dict[float, float]

    def errors_at(self, sample_time: float) -> List[Tuple[float, float]]:
        return [(mesh, err) for mesh, t, err in self.rows if t == sample_time]


def _steady_runner(cfg: SimConfig) -> DiagnosticsSeries:
    series, _ = run_simulation(cfg, steady_state_scenario())
    return series


def _value_at(series: DiagnosticsSeries, sample_time: float, dt: float) -> float:
    times = series.column('time')
    if times.size == 0:
        raise ConvergenceError("run recorded no steps")
    nearest = int(np.argmin(np.abs(times - sample_time)))
    if abs(times[nearest] - sample_time) > 0.5 * dt * (1 + 1e-9):
        raise ConvergenceError(f"no recorded step near t = {sample_time} (closest {times[nearest]})")
    return float(series.steady_error[nearest])


def run_convergence_study(base_cfg: SimConfig, levels: int, sample_times: Sequence[float] = TABLE_TIMES,
                          runner: Optional[Callable[[SimConfig], DiagnosticsSeries]] = None,
                          settings: Optional[Config] = None) -> ConvergenceTable:
    """
    Run the steady state at ``levels`` successively halved meshes and tabulate
    steady_error at each sample time, with the fitted order per time.
    """
    if levels < 2:
        raise ConvergenceError(f"a convergence study needs at least 2 levels, got {levels}")
    settings = settings or Config()
    runner = runner or _steady_runner
    base = replace(base_cfg, scenario='steady', T=max(sample_times), snapshot_stride=0)
    configs = [
        replace(base, dt=base.dt / 2 ** k, dx=base.dx / 2 ** k, dv=base.dv / 2 ** k).validate()
        for k in range(levels)
    ]
    logger.info("Convergence study started", levels=levels, meshes=[c.dx for c in configs],
                workers=settings.max_workers)

    with ThreadPoolExecutor(max_workers=settings.max_workers) as executor:
        results = list(executor.map(runner, configs))

    rows = [
        (c.dx, float(t), _value_at(series, t, c.dt))
        for c, series in zip(configs, results)
        for t in sample_times
    ]
    rates = {}
    for t in sample_times:
        rates[float(t)] = convergence_rate([(mesh, err) for mesh, st, err in rows if st == t])
    logger.info("Convergence study finished", rates=rates)
    return ConvergenceTable(rows=rows, rates=rates)


# -- outputs -------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return repr(float(value))


def _write_csv(path: Path, header: Sequence[str], rows) -> Path:
    try:
        with path.open('w', newline='', encoding='utf-8') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(value) for value in row])
    except OSError as e:
        raise OutputError(f"Failed to write {path}: {e}") from e
    return path


def _prepare(directory) -> Path:
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(f"Cannot create output directory {directory}: {e}") from e
    return directory


def _checksum(paths: Sequence[Path]) -> str:
    digest = hashlib.sha256()
    for path in sorted(paths, key=lambda p: p.name):
        digest.update(path.name.encode('utf-8'))
        digest.update(path.read_bytes())
    return digest.hexdigest()


def _write_manifest(directory: Path, manifest: RunManifest) -> Path:
    path = directory / 'manifest.json'
    try:
        path.write_text(json.dumps(manifest.as_dict(), indent=2) + '\n', encoding='utf-8')
    except OSError as e:
        raise OutputError(f"Failed to write {path}: {e}") from e
    return path


def emit_outputs(series: DiagnosticsSeries, manifest: RunManifest, directory) -> List[Path]:
    """
    Write diagnostics.csv, field_<step>.csv snapshots, metrics.prom and
    manifest.json. Returns the written paths, manifest last.
    """
    directory = _prepare(directory)
    csv_files = [_write_csv(directory / 'diagnostics.csv', COLUMNS, series.rows())]
    for snap in series.snapshots:
        csv_files.append(_write_csv(directory / f'field_{snap.step:06d}.csv', ('x', 'rho', 'E'),
                                    zip(snap.x, snap.rho, snap.field)))

    metrics_path = directory / 'metrics.prom'
    try:
        metrics_path.write_bytes((manifest.metrics or RunMetrics(manifest.scenario)).exposition())
    except OSError as e:
        raise OutputError(f"Failed to write {metrics_path}: {e}") from e

    manifest.output_files = [str(p) for p in csv_files + [metrics_path]]
    manifest.checksum = _checksum(csv_files)
    manifest_path = _write_manifest(directory, manifest)
    logger.info("Outputs written", directory=str(directory), files=len(csv_files) + 2, checksum=manifest.checksum)
    return csv_files + [metrics_path, manifest_path]


def emit_convergence(table: ConvergenceTable, base_cfg: SimConfig, directory,
                     wall_clock_seconds: float = 0.0) -> List[Path]:
    directory = _prepare(directory)
    csv_files = [
        _write_csv(directory / 'convergence.csv', ('mesh', 'time', 'error'), table.rows),
        _write_csv(directory / 'rates.csv', ('time', 'rate'), sorted(table.rates.items())),
    ]
    manifest = RunManifest(
        config=render_config(base_cfg),
        scenario='steady',
        total_steps=0,
        exhaustion_step=None,
        wall_clock_seconds=wall_clock_seconds,
        output_files=[str(p) for p in csv_files],
        checksum=_checksum(csv_files),
    )
    return csv_files + [_write_manifest(directory, manifest)]


def read_diagnostics(path) -> DiagnosticsSeries:
    path = Path(path)
    try:
        with path.open(newline='', encoding='utf-8') as handle:
            reader = csv.DictReader(handle)
            columns: Dict[str, List[str]] = {name: [] for name in reader.fieldnames or ()}
            for row in reader:
                for name, value in row.items():
                    columns[name].append(value)
    except OSError as e:
        raise OutputError(f"Failed to read {path}: {e}") from e
    missing = {'step', 'time', 'sup_field'} - set(columns)
    if missing:
        raise OutputError(f"{path} lacks column(s) {', '.join(sorted(missing))}")
    return DiagnosticsSeries.from_columns(columns)


def read_snapshots(directory) -> List[FieldSnapshot]:
    snapshots = []
    for path in sorted(Path(directory).glob('field_*.csv')):
        try:
            data = np.loadtxt(path, delimiter=',', skiprows=1, ndmin=2)
        except (OSError, ValueError) as e:
            raise OutputError(f"Failed to read {path}: {e}") from e
        step = int(path.stem.split('_', 1)[1])
        snapshots.append(FieldSnapshot(step, math.nan, data[:, 0], data[:, 1], data[:, 2]))
    return snapshots
