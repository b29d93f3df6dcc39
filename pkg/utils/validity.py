"""
Domain of validity: the part of [-L, L] no particle from outside the
truncated domain can have reached, [-L + P^n Δt, L - P^n Δt].
"""

import enum
from dataclasses import dataclass, field
from typing import List, NamedTuple, Union

import numpy as np
import structlog

logger = structlog.get_logger()


class ValidityStatus(enum.Enum):
    EXHAUSTED = 'exhausted'
    NOT_YET_REACHED = 'not_yet_reached'


EXHAUSTED = ValidityStatus.EXHAUSTED
NOT_YET_REACHED = ValidityStatus.NOT_YET_REACHED


class Interval(NamedTuple):
    lo: float
    hi: float

    @property
    def half_width(self) -> float:
        return 0.5 * (self.hi - self.lo)

    def contains(self, other: 'Interval') -> bool:
        return self.lo <= other.lo and other.hi <= self.hi


@dataclass
class ValidityTracker:
    """Running sum P^n of the per-step maximum speeds S^{k+1/2}."""
    initial_half_length: float
    dt: float
    speed_history: List[float] = field(default_factory=list)
    cumulative: float = 0.0

    def record_step(self, S: float) -> 'ValidityTracker':
        if S < 0:
            raise ValueError(f"max speed must be non-negative, got {S!r}")
        self.speed_history.append(float(S))
        self.cumulative += float(S)
        return self

    @property
    def steps(self) -> int:
        return len(self.speed_history)

    @property
    def valid_half_width(self) -> float:
        """L - P^n Δt; non-positive once exhausted."""
        return self.initial_half_length - self.cumulative * self.dt

    def valid_interval(self) -> Union[Interval, ValidityStatus]:
        width = self.valid_half_width
        if width <= 0:
            return EXHAUSTED
        return Interval(-width, width)

    def validity_time(self, half_width: float) -> Union[float, ValidityStatus]:
        """Earliest t^n at which [-I, I] leaves the valid interval."""
        if half_width > self.initial_half_length:
            raise ValueError(f"I={half_width!r} exceeds the initial half-length L={self.initial_half_length!r}")
        if half_width <= 0:
            raise ValueError(f"I must be positive, got {half_width!r}")
        widths = self.initial_half_length - np.cumsum(self.speed_history) * self.dt
        crossed = np.flatnonzero(widths < half_width)
        if crossed.size == 0:
            return NOT_YET_REACHED
        return float(crossed[0] * self.dt)

    def copy(self) -> 'ValidityTracker':
        return ValidityTracker(self.initial_half_length, self.dt, list(self.speed_history), self.cumulative)


def record_step(tracker: ValidityTracker, S: float) -> ValidityTracker:
    return tracker.record_step(S)


def valid_interval(tracker: ValidityTracker) -> Union[Interval, ValidityStatus]:
    return tracker.valid_interval()


def validity_time(tracker: ValidityTracker, half_width: float) -> Union[float, ValidityStatus]:
    return tracker.validity_time(half_width)
