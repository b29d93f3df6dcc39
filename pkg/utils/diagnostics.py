"""
Per-step observables and post-run analysis: sup-field on the valid region,
net energy, steady-state error, mesh convergence rate and the power-law
envelope fit of the decaying field.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog
from scipy.signal import find_peaks

from .errors import ConvergenceError, ExhaustedValidityError, InsufficientPeaksError, MissingAnalyticFieldError
from .grid_field import FieldGrid
from .particles import ParticleSet
from .validity import EXHAUSTED, Interval, ValidityStatus

logger = structlog.get_logger()

COLUMNS = ('step', 'time', 'sup_field', 'energy', 'grid_half_length', 'valid_half_width',
           'window_sup_field', 'steady_error', 'field_integral')


@dataclass(frozen=True)
class FieldSnapshot:
    step: int
    time: float
    x: np.ndarray
    rho: np.ndarray
    field: np.ndarray


@dataclass
class DiagnosticsSeries:
    """Column store of one row per recorded step; sup_field is nan once validity is exhausted."""
    step: List[int] = field(default_factory=list)
    time: List[float] = field(default_factory=list)
    sup_field: List[float] = field(default_factory=list)
    energy: List[float] = field(default_factory=list)
    grid_half_length: List[float] = field(default_factory=list)
    valid_half_width: List[float] = field(default_factory=list)
    window_sup_field: List[float] = field(default_factory=list)
    steady_error: List[float] = field(default_factory=list)
    field_integral: List[float] = field(default_factory=list)
    snapshots: List[FieldSnapshot] = field(default_factory=list)

    def append(self, **row) -> None:
        for name in COLUMNS:
            getattr(self, name).append(row[name])

    def __len__(self) -> int:
        return len(self.step)

    @property
    def last_step(self) -> Optional[int]:
        return self.step[-1] if self.step else None

    def column(self, name: str) -> np.ndarray:
        if name not in COLUMNS:
            raise KeyError(name)
        return np.asarray(getattr(self, name), dtype=float)

    def rows(self) -> Iterable[Tuple]:
        return zip(*(getattr(self, name) for name in COLUMNS))

    def copy(self) -> 'DiagnosticsSeries':
        clone = DiagnosticsSeries(**{name: list(getattr(self, name)) for name in COLUMNS})
        clone.snapshots = list(self.snapshots)
        return clone

    @classmethod
    def from_columns(cls, columns: dict) -> 'DiagnosticsSeries':
        series = cls()
        for name in COLUMNS:
            values = columns.get(name, [])
            cast = int if name == 'step' else float
            getattr(series, name).extend(cast(v) for v in values)
        return series


@dataclass(frozen=True)
class DecayFit:
    coefficient: float
    exponent: float
    window: Tuple[float, float]
    residual: float
    peak_times: Tuple[float, ...] = ()
    peak_values: Tuple[float, ...] = ()

    @property
    def products(self) -> Tuple[float, ...]:
        """sup·t at each peak, constant for t^-1 decay."""
        return tuple(t * v for t, v in zip(self.peak_times, self.peak_values))

    def as_dict(self) -> dict:
        return {
            'coefficient': self.coefficient,
            'exponent': self.exponent,
            'window': list(self.window),
            'residual': self.residual,
            'peak_times': list(self.peak_times),
            'peak_values': list(self.peak_values),
            'products': list(self.products),
        }


@dataclass(frozen=True)
class BreakdownReport:
    onset_time: float
    pre_onset_mean: float
    post_onset_mean: float

    @property
    def decay_stopped(self) -> bool:
        return self.post_onset_mean >= self.pre_onset_mean


def net_energy(previous: ParticleSet, current: ParticleSet, grid: FieldGrid) -> float:
    """
    ½ Σ q V^{n-1/2} V^{n+1/2} + ½ Σ_l E_l² Δx.

    ``previous`` and ``current`` are the same particles before and after the
    velocity push at step n; ``grid`` holds E^n.
    """
    kinetic = 0.5 * float(np.sum(current.charges * previous.velocities * current.velocities))
    electric = 0.5 * float(np.sum(grid.field ** 2)) * grid.spacing
    return kinetic + electric


def sup_field(grid: FieldGrid, valid: Union[Interval, ValidityStatus]) -> float:
    """max |E_l| over gridpoints inside the valid interval."""
    if valid is EXHAUSTED:
        raise ExhaustedValidityError("validity exhausted; no gridpoint is trustworthy")
    mask = grid.inside(valid.lo, valid.hi)
    if not np.any(mask):
        return 0.0
    return float(np.max(np.abs(grid.field[mask])))


def field_integral(grid: FieldGrid) -> float:
    """
    Σ_l E_l Δx over the whole grid. For a neutral grid this is the dipole
    moment Σ q X of the particles, which the leap-frog drives as an undamped
    oscillator at frequency √b for a constant background b.
    """
    return float(np.sum(grid.field)) * grid.spacing


def steady_error(grid: FieldGrid, analytic: Optional[Callable], valid: Optional[Interval] = None) -> float:
    """sup_l |E_l - 𝓔(x_l)| over the valid interval (the whole grid if none is given)."""
    if analytic is None:
        raise MissingAnalyticFieldError("scenario provides no analytic field")
    if valid is EXHAUSTED:
        raise ExhaustedValidityError("validity exhausted; no gridpoint is trustworthy")
    mask = np.ones(grid.size, dtype=bool) if valid is None else grid.inside(valid.lo, valid.hi)
    x = grid.x[mask]
    if x.size == 0:
        return 0.0
    return float(np.max(np.abs(grid.field[mask] - analytic(x))))


def convergence_rate(errors: Sequence[Tuple[float, float]]) -> float:
    """Least-squares slope of log(error) against log(mesh) over nested (halved) meshes."""
    if len(errors) < 2:
        raise ConvergenceError(f"need at least 2 mesh levels, got {len(errors)}")
    ordered = sorted(errors, key=lambda pair: pair[0], reverse=True)
    meshes = np.array([mesh for mesh, _ in ordered], dtype=float)
    values = np.array([err for _, err in ordered], dtype=float)
    ratios = meshes[:-1] / meshes[1:]
    if not np.allclose(ratios, 2.0, rtol=1e-9):
        raise ConvergenceError(f"meshes are not successive halvings: {meshes.tolist()}")
    if np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise ConvergenceError(f"errors must be positive and finite: {values.tolist()}")
    slope, _ = np.polyfit(np.log(meshes), np.log(values), 1)
    return float(slope)


def find_envelope_peaks(values: Sequence[float]) -> np.ndarray:
    """
    Indices of samples strictly greater than both neighbours. A plateau that
    rises on the left and falls on the right counts once, at its leftmost sample.
    """
    v = np.asarray(values, dtype=float)
    peaks = []
    i = 1
    while i < v.size - 1:
        if v[i] > v[i - 1]:
            j = i
            while j + 1 < v.size and v[j + 1] == v[i]:
                j += 1
            if j + 1 < v.size and v[j + 1] < v[i]:
                peaks.append(i)
            i = j + 1
        else:
            i += 1
    return np.asarray(peaks, dtype=int)


def separated_peaks(times: Sequence[float], values: Sequence[float], min_separation: float) -> np.ndarray:
    """
    Envelope peaks at least ``min_separation`` apart in time; of two closer
    peaks the lower one is dropped. Times are assumed evenly spaced.
    """
    t = np.asarray(times, dtype=float)
    if t.size < 3:
        return np.zeros(0, dtype=int)
    spacing = float(np.median(np.diff(t)))
    distance = max(1, int(math.ceil(min_separation / spacing - 1e-9)))
    peaks, _ = find_peaks(np.asarray(values, dtype=float), distance=distance)
    return peaks


def fit_power_law(times: Sequence[float], values: Sequence[float], window: Tuple[float, float],
                  min_separation: float = 0.0) -> DecayFit:
    """
    Fit C·t^p to the envelope peaks of values(t) inside the window.

    With ``min_separation`` > 0 only peaks that far apart take part, which
    keeps step-to-step jitter on a noisy envelope out of the fit.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    lo, hi = window
    if not lo < hi:
        raise ValueError(f"empty window {window!r}")
    keep = (t >= lo) & (t <= hi) & np.isfinite(v) & (t > 0)
    t, v = t[keep], v[keep]
    peaks = separated_peaks(t, v, min_separation) if min_separation > 0 else find_envelope_peaks(v)
    peaks = peaks[v[peaks] > 0] if peaks.size else peaks
    if peaks.size < 2:
        raise InsufficientPeaksError(f"window [{lo}, {hi}] holds {peaks.size} envelope peak(s); need 2")

    log_t, log_v = np.log(t[peaks]), np.log(v[peaks])
    exponent, intercept = np.polyfit(log_t, log_v, 1)
    residual = float(np.sqrt(np.mean((log_v - (intercept + exponent * log_t)) ** 2)))
    fit = DecayFit(
        coefficient=float(math.exp(intercept)),
        exponent=float(exponent),
        window=(float(lo), float(hi)),
        residual=residual,
        peak_times=tuple(float(x) for x in t[peaks]),
        peak_values=tuple(float(x) for x in v[peaks]),
    )
    logger.info("Decay fit", exponent=fit.exponent, coefficient=fit.coefficient, peaks=len(fit.peak_times))
    return fit


def fit_decay(series: DiagnosticsSeries, window: Tuple[float, float], column: str = 'sup_field',
              min_separation: float = 0.0) -> DecayFit:
    return fit_power_law(series.column('time'), series.column(column), window, min_separation)


def energy_drift(series: DiagnosticsSeries) -> float:
    """max_n |W^n - W^0| / |W^0|."""
    energy = series.column('energy')
    if energy.size == 0 or energy[0] == 0:
        return 0.0
    return float(np.max(np.abs(energy - energy[0])) / abs(energy[0]))


def percent_change(series: DiagnosticsSeries) -> float:
    """(W^0 - W^N) / W^N, the end-to-end relative change."""
    energy = series.column('energy')
    if energy.size == 0 or energy[-1] == 0:
        return 0.0
    return float((energy[0] - energy[-1]) / energy[-1])


def breakdown_check(series: DiagnosticsSeries, onset_time: float, column: str = 'window_sup_field') -> BreakdownReport:
    """
    Compare the envelope after ``onset_time`` with the last three peaks before it.
    Without a strict post-onset peak the post-onset maximum stands in.
    """
    t = series.column('time')
    v = series.column(column)
    before, after = t < onset_time, t >= onset_time
    pre_peaks = find_envelope_peaks(v[before])
    if pre_peaks.size == 0:
        raise InsufficientPeaksError(f"no envelope peak before t = {onset_time}")
    pre_mean = float(np.mean(v[before][pre_peaks[-3:]]))

    post = v[after]
    if post.size == 0:
        raise InsufficientPeaksError(f"no samples after t = {onset_time}")
    post_peaks = find_envelope_peaks(post)
    post_mean = float(np.mean(post[post_peaks])) if post_peaks.size else float(np.max(post))
    return BreakdownReport(onset_time=float(onset_time), pre_onset_mean=pre_mean, post_onset_mean=post_mean)
