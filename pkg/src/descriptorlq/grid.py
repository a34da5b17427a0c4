"""Time grids and dense-output interpolants for time-sampled quantities."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from .exceptions import GridMismatch, OutOfGrid

__all__ = ["TimeGrid", "TimeSeries"]


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing time samples on [t0, t_f], endpoints included."""

    t0: float
    t_f: float
    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("grid needs at least two nodes")
        if not (nodes[0] == self.t0 and nodes[-1] == self.t_f):
            raise ValueError("grid endpoints must equal t0 and t_f")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("grid nodes must be strictly increasing")

    @classmethod
    def uniform(cls, t0: float, t_f: float, n_nodes: int) -> "TimeGrid":
        if t_f <= t0:
            raise ValueError("t_f must exceed t0")
        return cls(t0, t_f, np.linspace(t0, t_f, n_nodes))

    @classmethod
    def terminal_refined(
        cls,
        t0: float,
        t_f: float,
        n_nodes: int,
        h_min: float,
        growth: float = 1.2,
    ) -> "TimeGrid":
        """Uniform grid with extra nodes clustered geometrically toward t_f.

        Resolves a terminal boundary layer: the spacing at t_f starts at
        h_min and grows by `growth` per interval going backward until it
        matches the uniform spacing.  Extra nodes landing within half of
        h_min of a uniform node are dropped to keep spacing ratios sane.
        """
        if t_f <= t0:
            raise ValueError("t_f must exceed t0")
        if h_min <= 0 or growth <= 1.0:
            raise ValueError("h_min must be positive and growth > 1")
        base = np.linspace(t0, t_f, n_nodes)
        h_max = (t_f - t0) / (n_nodes - 1)
        extra = []
        h = h_min
        s = h_min
        while s < t_f - t0 and h < h_max:
            extra.append(t_f - s)
            h = min(h * growth, h_max)
            s += h
        nodes = np.unique(np.concatenate([base, np.asarray(extra)]))
        keep = np.ones(nodes.size, dtype=bool)
        keep[1:] = np.diff(nodes) > 0.5 * h_min
        keep[0] = keep[-1] = True
        nodes = nodes[keep]
        if nodes[-2] >= t_f - 0.25 * h_min:
            nodes = np.delete(nodes, -2)
        return cls(t0, t_f, nodes)

    @property
    def n_nodes(self) -> int:
        return self.nodes.size

    def contains(self, t: float, strict: bool = False) -> bool:
        if strict:
            return self.t0 < t < self.t_f
        return self.t0 <= t <= self.t_f

    def require_inside(self, t: float, strict: bool = False) -> None:
        if not self.contains(t, strict=strict):
            raise OutOfGrid(f"t = {t} outside grid [{self.t0}, {self.t_f}]")

    def same_as(self, other: "TimeGrid") -> bool:
        return self.nodes.shape == other.nodes.shape and np.array_equal(
            self.nodes, other.nodes
        )


@dataclass(frozen=True)
class TimeSeries:
    """Node values plus a cubic dense-output interpolant.

    Values may be vectors or matrices; the leading axis indexes grid nodes.
    When slopes are supplied the interpolant is piecewise cubic Hermite,
    otherwise a natural cubic spline through the node values.
    """

    grid: TimeGrid
    values: np.ndarray
    slopes: np.ndarray | None = None
    _spline: object = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.shape[0] != self.grid.n_nodes:
            raise GridMismatch("leading axis of values must match grid nodes")
        if self.slopes is not None:
            slopes = np.asarray(self.slopes, dtype=float)
            if slopes.shape != values.shape:
                raise GridMismatch("slopes must have the same shape as values")
            object.__setattr__(self, "slopes", slopes)
            spline = CubicHermiteSpline(self.grid.nodes, values, slopes, axis=0)
        else:
            spline = CubicSpline(self.grid.nodes, values, axis=0)
        object.__setattr__(self, "_spline", spline)

    def at(self, t) -> np.ndarray:
        return self._spline(t)

    def derivative_at(self, t) -> np.ndarray:
        return self._spline.derivative()(t)

    def sup_norm(self) -> float:
        flat = self.values.reshape(self.grid.n_nodes, -1)
        return float(np.max(np.abs(flat))) if flat.size else 0.0
