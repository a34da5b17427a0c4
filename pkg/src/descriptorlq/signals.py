"""Time-sampled control signals and feedback gain schedules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import GridMismatch
from .grid import TimeGrid, TimeSeries

__all__ = ["ControlSignal", "GainSchedule"]


@dataclass(frozen=True)
class ControlSignal:
    """Control values per grid node with cubic dense output."""

    grid: TimeGrid
    u: np.ndarray
    slopes: np.ndarray | None = None

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if u.ndim == 1:
            u = u[:, None]
        if not np.all(np.isfinite(u)):
            raise ValueError("control values must be finite")
        object.__setattr__(self, "u", u)

    @property
    def n_u(self) -> int:
        return self.u.shape[1]

    def series(self) -> TimeSeries:
        return TimeSeries(self.grid, self.u, self.slopes)

    def at(self, t) -> np.ndarray:
        return self.series().at(t)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.u))) if self.u.size else 0.0

    def __add__(self, other: "ControlSignal") -> "ControlSignal":
        if not self.grid.same_as(other.grid):
            raise GridMismatch("cannot add controls on different grids")
        return ControlSignal(self.grid, self.u + other.u)

    def __sub__(self, other: "ControlSignal") -> "ControlSignal":
        if not self.grid.same_as(other.grid):
            raise GridMismatch("cannot subtract controls on different grids")
        return ControlSignal(self.grid, self.u - other.u)

    @classmethod
    def zero(cls, grid: TimeGrid, n_u: int) -> "ControlSignal":
        return cls(grid, np.zeros((grid.n_nodes, n_u)))


@dataclass(frozen=True)
class GainSchedule:
    """Feedback gains K(t) with u(t) = -K(t) x(t), sampled per grid node."""

    grid: TimeGrid
    K: np.ndarray
    slopes: np.ndarray | None = None

    def __post_init__(self):
        K = np.asarray(self.K, dtype=float)
        object.__setattr__(self, "K", K)
        if K.ndim != 3 or K.shape[0] != self.grid.n_nodes:
            raise GridMismatch("K must be (n_nodes, n_u, n_x)")

    def series(self) -> TimeSeries:
        return TimeSeries(self.grid, self.K, self.slopes)

    def at(self, t) -> np.ndarray:
        return self.series().at(t)
