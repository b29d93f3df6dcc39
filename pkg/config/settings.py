"""
Configuration management

Runtime settings come from the environment (``Config``); simulation settings
come from flat ``key = value`` files (``SimConfig``).
"""

import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Dict, Optional

import structlog

from utils.errors import ConfigError

logger = structlog.get_logger()

SCENARIOS = ('perturbation', 'steady')


def configure_logging(level: str = 'INFO', fmt: str = 'json') -> None:
    """Configure structlog on top of stdlib logging, writing to stderr."""
    logging.basicConfig(format='%(message)s', stream=sys.stderr, level=getattr(logging, level.upper(), logging.INFO))
    renderer = structlog.dev.ConsoleRenderer() if fmt == 'console' else structlog.processors.JSONRenderer()
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            renderer,
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )


class Config:
    """
    Runtime settings loaded from environment variables with defaults.
    """
    def __init__(self):
        self.debug = os.getenv('VP_DEBUG', 'false').lower() in ('true', '1', 't')
        self.log_level = os.getenv('VP_LOG_LEVEL', 'INFO')
        self.log_format = os.getenv('VP_LOG_FORMAT', 'json')
        self.output_dir = os.getenv('VP_OUTPUT_DIR', 'output')

        try:
            self.max_workers = int(os.getenv('VP_MAX_WORKERS', 4))
            if self.max_workers < 1:
                raise ValueError(self.max_workers)
        except ValueError:
            logger.error("Invalid value for VP_MAX_WORKERS. Defaulting to 4.")
            self.max_workers = 4

    def as_dict(self) -> Dict:
        return {
            'debug': self.debug,
            'log_level': self.log_level,
            'log_format': self.log_format,
            'output_dir': self.output_dir,
            'max_workers': self.max_workers,
        }


@dataclass(frozen=True)
class SimConfig:
    """
    Mesh, domain and run settings for one simulation.

    ``L``, ``Q``, ``T`` and ``R`` keep their physics names: initial spatial
    half-length, initial velocity half-width, stopping time and the radius
    outside which the initial data equals the background.
    """
    dt: float = 0.02
    dx: float = 0.02
    dv: float = 0.02
    L: float = 10.0
    Q: float = 1.0
    T: float = 8.0
    R: float = 1.0
    scenario: str = 'perturbation'
    force_sign: int = -1
    snapshot_stride: int = 50
    output_dir: str = ''
    continue_past_exhaustion: bool = False
    amplitude: float = 1.0
    window_half_width: float = 1.0

    @property
    def half_cells(self) -> int:
        """Number of spatial cells between x = 0 and x = L."""
        return int(round(self.L / self.dx))

    @property
    def velocity_cells(self) -> int:
        return int(round(self.Q / self.dv))

    @property
    def total_steps(self) -> int:
        """Steps needed for t^n to reach T."""
        return int(math.ceil(self.T / self.dt - 1e-9))

    def validate(self) -> 'SimConfig':
        for name in ('dt', 'dx', 'dv', 'L', 'Q', 'T'):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ConfigError(f"{name} must be a positive number, got {value!r}")
        if not 0 <= self.R < self.L:
            raise ConfigError(f"R must satisfy 0 <= R < L, got R={self.R!r}, L={self.L!r}")
        if not _is_whole(self.L / self.dx):
            raise ConfigError(f"L/dx must be an integer, got {self.L / self.dx!r}")
        if not _is_whole(self.Q / self.dv):
            raise ConfigError(f"Q/dv must be an integer, got {self.Q / self.dv!r}")
        if self.force_sign not in (-1, 1):
            raise ConfigError(f"force_sign must be +1 or -1, got {self.force_sign!r}")
        if self.snapshot_stride < 0:
            raise ConfigError(f"snapshot_stride must be >= 0, got {self.snapshot_stride!r}")
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"Unknown scenario {self.scenario!r}; expected one of {', '.join(SCENARIOS)}")
        if not 0 < self.window_half_width <= self.L:
            raise ConfigError(f"window_half_width must lie in (0, L], got {self.window_half_width!r}")
        if self.amplitude < 0:
            raise ConfigError(f"amplitude must be >= 0, got {self.amplitude!r}")
        return self

    def with_mesh(self, delta: float) -> 'SimConfig':
        """Same run with Δt = Δx = Δv = delta."""
        return replace(self, dt=delta, dx=delta, dv=delta)

    def resolve_output_dir(self, override: Optional[str] = None) -> Path:
        return Path(override or self.output_dir or Config().output_dir)


def _is_whole(ratio: float) -> bool:
    return abs(ratio - round(ratio)) <= 1e-9 * max(1.0, abs(ratio))


_FIELD_TYPES = {f.name: f.type for f in fields(SimConfig)}


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    try:
        if kind in (float, 'float'):
            return float(raw)
        if kind in (int, 'int'):
            return int(raw)
        if kind in (bool, 'bool'):
            lowered = raw.lower()
            if lowered in ('true', '1', 'yes', 'on'):
                return True
            if lowered in ('false', '0', 'no', 'off'):
                return False
            raise ValueError(raw)
    except ValueError:
        raise ConfigError(f"Invalid value for {key}: {raw!r}") from None
    return raw


def parse_config(text: str, base: Optional[SimConfig] = None) -> SimConfig:
    """Parse flat ``key = value`` text on top of ``base`` (the desk profile by default)."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f"Line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split('=', 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"Line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"Line {lineno}: duplicate key {key!r}")
        values[key] = _coerce(key, raw)
    return replace(base or SimConfig(), **values).validate()


def render_config(cfg: SimConfig) -> str:
    """Canonical text form; ``parse_config(render_config(cfg)) == cfg``."""
    lines = []
    for key, value in asdict(cfg).items():
        if isinstance(value, bool):
            rendered = 'true' if value else 'false'
        elif isinstance(value, float):
            rendered = repr(value)
        else:
            rendered = str(value)
        lines.append(f"{key} = {rendered}")
    return '\n'.join(lines) + '\n'


def load_config(path: str) -> SimConfig:
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e
    cfg = parse_config(text)
    logger.info("Config loaded", path=str(path), scenario=cfg.scenario)
    return cfg


PRESETS: Dict[str, SimConfig] = {
    'desk': SimConfig(),
    'full-scale': SimConfig(dt=0.01, dx=0.01, dv=0.01, L=50.0, T=30.0),
    'breakdown': SimConfig(dt=0.01, dx=0.01, dv=0.01, L=50.0, T=50.0, continue_past_exhaustion=True),
    'steady': SimConfig(dt=0.04, dx=0.04, dv=0.04, L=2.0, T=0.48, scenario='steady', snapshot_stride=3),
    'neutral': SimConfig(L=5.0, T=2.0, amplitude=0.0),
}
