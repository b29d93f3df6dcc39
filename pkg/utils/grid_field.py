"""
Uniform spatial grid: cloud-in-cell deposition, cumulative field solve,
linear field interpolation and per-step grid enlargement.

Gridpoints sit at x_l = lΔx for |l| ≤ m, m = L^n/Δx. The grid only ever
grows by whole cells, symmetrically.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
import structlog
from scipy.integrate import cumulative_trapezoid

from .errors import ParticleOutOfGridError
from .particles import ParticleSet

logger = structlog.get_logger()

# positions this close to the edge (in cells) count as on it
EDGE_TOLERANCE = 1e-9

# cells kept beyond the particle lattice so no particle ever deposits onto an edge gridpoint
GUARD_CELLS = 1


def cic_weight(x, dx: float):
    """First-order weighting δ̂(x) = (1/Δx)(1 - |x|/Δx) for |x| < Δx, else 0."""
    r = np.abs(np.asarray(x, dtype=float)) / dx
    value = np.where(r < 1.0, (1.0 - r) / dx, 0.0)
    return value if value.ndim else float(value)


@dataclass(frozen=True)
class FieldGrid:
    spacing: float
    half_cells: int
    initial_half_cells: int
    rho: np.ndarray
    field: np.ndarray
    step: int = 0

    @classmethod
    def empty(cls, dx: float, half_cells: int, guard: int = 0) -> 'FieldGrid':
        """Zeroed grid over |l| <= half_cells + guard; the background covers |l| <= half_cells."""
        size = 2 * (half_cells + guard) + 1
        return cls(dx, half_cells + guard, half_cells, np.zeros(size), np.zeros(size))

    @property
    def half_length(self) -> float:
        return self.half_cells * self.spacing

    @property
    def size(self) -> int:
        return 2 * self.half_cells + 1

    @property
    def x(self) -> np.ndarray:
        return np.arange(-self.half_cells, self.half_cells + 1) * self.spacing

    def inside(self, lo: float, hi: float) -> np.ndarray:
        """Mask of gridpoints in [lo, hi]."""
        x = self.x
        slack = EDGE_TOLERANCE * self.spacing
        return (x >= lo - slack) & (x <= hi + slack)

    def copy(self) -> 'FieldGrid':
        return replace(self, rho=self.rho.copy(), field=self.field.copy())


class FieldInterpolant:
    """Piecewise-linear view of a grid's field, zero outside [-L^n, L^n]."""

    def __init__(self, grid: FieldGrid):
        self._x = grid.x
        self._field = grid.field

    def __call__(self, x):
        return np.interp(x, self._x, self._field, left=0.0, right=0.0)


def interpolate_field(grid: FieldGrid, x):
    return FieldInterpolant(grid)(x)


def _cells(positions: np.ndarray, grid: FieldGrid):
    """Left gridpoint index and fractional offset of every position."""
    s = positions / grid.spacing + grid.half_cells
    last = 2 * grid.half_cells
    outside = (s < -EDGE_TOLERANCE) | (s > last + EDGE_TOLERANCE)
    if np.any(outside):
        worst = positions[outside][np.argmax(np.abs(positions[outside]))]
        raise ParticleOutOfGridError(
            f"{int(np.count_nonzero(outside))} particle(s) outside [-{grid.half_length}, {grid.half_length}] "
            f"at step {grid.step}, e.g. x = {worst!r}"
        )
    index = np.clip(np.floor(s).astype(np.int64), 0, max(last - 1, 0))
    frac = np.clip(s - index, 0.0, 1.0)
    return index, frac


def deposit_density(p: ParticleSet, grid: FieldGrid) -> np.ndarray:
    """Σ q δ̂(x_l - X) at every gridpoint: the particle (negative) charge density."""
    index, frac = _cells(p.positions, grid)
    density = np.bincount(index, weights=p.charges * (1.0 - frac), minlength=grid.size)
    density += np.bincount(index + 1, weights=p.charges * frac, minlength=grid.size)
    return density[:grid.size] / grid.spacing


def background_density(grid: FieldGrid, scenario) -> np.ndarray:
    """b(x_l) on the initial domain |l| ≤ L/Δx, zero on enlarged gridpoints."""
    x = grid.x
    background = np.asarray(scenario.background_charge(x), dtype=float)
    offset = grid.half_cells - grid.initial_half_cells
    if offset:
        background = background.copy()
        background[:offset] = 0.0
        background[-offset:] = 0.0
    return background


def deposit_charge(p: ParticleSet, grid: FieldGrid, scenario) -> FieldGrid:
    """ρ_l = b(x_l) - Σ q δ̂(x_l - X)."""
    rho = background_density(grid, scenario) - deposit_density(p, grid)
    return replace(grid, rho=rho)


def integrate_field(grid: FieldGrid) -> FieldGrid:
    """E_l = ∫_{-L^n}^{x_l} of the linear interpolant of ρ, pinned to 0 at the left edge."""
    field = cumulative_trapezoid(grid.rho, dx=grid.spacing, initial=0.0)
    return replace(grid, field=field)


def gauss_residual(grid: FieldGrid) -> float:
    """max |(E_{l+1} - E_l)/Δx - (ρ_l + ρ_{l+1})/2|, relative to the larger of max |ρ| and max |E|/Δx."""
    if grid.size < 2:
        return 0.0
    slope = np.diff(grid.field) / grid.spacing
    mean_rho = 0.5 * (grid.rho[1:] + grid.rho[:-1])
    scale = max(float(np.max(np.abs(grid.rho))), float(np.max(np.abs(grid.field))) / grid.spacing, 1.0)
    return float(np.max(np.abs(slope - mean_rho))) / scale


def enlarge_grid(grid: FieldGrid, S: float, dt: float) -> FieldGrid:
    """
    Grow each side by S·Δt rounded up to whole cells. New gridpoints start
    with ρ = 0 and E = 0.
    """
    if S < 0:
        raise ValueError(f"max speed must be non-negative, got {S!r}")
    reach = S * dt / grid.spacing
    cells = int(math.ceil(reach - EDGE_TOLERANCE)) if reach > EDGE_TOLERANCE else 0
    if cells == 0:
        return grid
    pad = np.zeros(cells)
    enlarged = replace(
        grid,
        half_cells=grid.half_cells + cells,
        rho=np.concatenate([pad, grid.rho, pad]),
        field=np.concatenate([pad, grid.field, pad]),
    )
    logger.debug("Grid enlarged", cells=cells, half_length=enlarged.half_length)
    return enlarged
