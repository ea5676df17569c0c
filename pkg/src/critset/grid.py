"""Uniform grids on [0, pi] and functions sampled on them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import DirichletViolation, GridMismatch, InvalidGrid, InvalidParameter

__all__ = ["Grid", "GridFunction", "simpson"]

DIRICHLET_TOL = 1e-6


@dataclass(frozen=True)
class Grid:
    """Nodes t_i = i pi / n, i = 0..n, with n even and at least 16."""

    n: int = 2048

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise InvalidGrid(f"grid size must be an integer, got {self.n!r}")
        if self.n < 16 or self.n % 2:
            raise InvalidGrid(f"grid size must be even and >= 16, got {self.n}")

    @property
    def dt(self) -> float:
        return math.pi / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        t = np.arange(self.n + 1) * self.dt
        t[-1] = math.pi
        return t

    @cached_property
    def weights(self) -> np.ndarray:
        """Composite Simpson weights on the nodes."""
        w = np.ones(self.n + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return w * self.dt / 3.0

    def fine_nodes(self, substeps: int) -> np.ndarray:
        """Points t_0 + j h/2 for the RK4 step h = pi/(n substeps): every stage abscissa."""
        count = 2 * self.n * substeps
        t = np.arange(count + 1) * (math.pi / count)
        t[-1] = math.pi
        return t


def simpson(grid: Grid, values: np.ndarray) -> float:
    return float(np.dot(grid.weights, values))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A real function on a grid, stored either as node values or as a sine series.

    ``coeffs[k-1]`` multiplies sin(k t). Sine series are evaluated exactly
    off the grid; node-valued functions use cubic Hermite interpolation with
    finite-difference slopes.
    """

    grid: Grid
    values: np.ndarray = field(repr=False)
    coeffs: Optional[np.ndarray] = None

    # -- construction -----------------------------------------------------
    @classmethod
    def sine(cls, coeffs: Sequence[float], grid: Grid = Grid()) -> "GridFunction":
        c = np.asarray(coeffs, dtype=float).ravel()
        if not np.all(np.isfinite(c)):
            raise InvalidParameter("sine coefficients must be finite")
        values = _sine_eval(c, grid.nodes)
        values[0] = values[-1] = 0.0
        return cls(grid, values, c)

    @classmethod
    def from_nodes(cls, values: Sequence[float], grid: Optional[Grid] = None,
                   dirichlet: bool = True) -> "GridFunction":
        v = np.array(values, dtype=float).ravel()
        if grid is None:
            grid = Grid(v.size - 1)
        if v.size != grid.n + 1:
            raise GridMismatch(f"expected {grid.n + 1} node values, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise InvalidParameter("node values must be finite")
        if dirichlet:
            scale = max(1.0, float(np.max(np.abs(v))))
            if abs(v[0]) > DIRICHLET_TOL * scale or abs(v[-1]) > DIRICHLET_TOL * scale:
                raise DirichletViolation(
                    f"endpoint values {v[0]:.3g}, {v[-1]:.3g} violate u(0) = u(pi) = 0")
            v[0] = v[-1] = 0.0
        return cls(grid, v, None)

    @classmethod
    def zero(cls, grid: Grid = Grid()) -> "GridFunction":
        return cls.sine([], grid)

    # -- evaluation -------------------------------------------------------
    @property
    def is_sine(self) -> bool:
        return self.coeffs is not None

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.is_sine:
            return _sine_eval(self.coeffs, t)
        return self._spline(t)

    @cached_property
    def _spline(self) -> CubicHermiteSpline:
        slopes = np.gradient(self.values, self.grid.dt, edge_order=2)
        return CubicHermiteSpline(self.grid.nodes, self.values, slopes)

    def stage_values(self, substeps: int) -> np.ndarray:
        """Values at every RK4 stage abscissa for the given number of substeps."""
        t = self.grid.fine_nodes(substeps)
        out = self(t)
        # nodes coincide with every (2 substeps)-th fine point
        out[:: 2 * substeps] = self.values
        return out

    def refine(self, factor: int) -> "GridFunction":
        """The same function on a grid with ``factor`` times as many intervals."""
        if factor == 1:
            return self
        fine = Grid(self.grid.n * factor)
        if self.is_sine:
            return GridFunction.sine(self.coeffs, fine)
        values = self(fine.nodes)
        values[0], values[-1] = self.values[0], self.values[-1]
        return GridFunction(fine, values, None)

    # -- algebra ----------------------------------------------------------
    def _check(self, other: "GridFunction") -> None:
        if self.grid != other.grid:
            raise GridMismatch(f"grids differ: n={self.grid.n} vs n={other.grid.n}")

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return self.combine(1.0, other, 1.0)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return self.combine(1.0, other, -1.0)

    def __mul__(self, scalar: float) -> "GridFunction":
        return self.combine(float(scalar), self, 0.0)

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return self * -1.0

    def combine(self, alpha: float, other: "GridFunction", beta: float) -> "GridFunction":
        """alpha * self + beta * other, staying a sine series when both are."""
        self._check(other)
        values = alpha * self.values + beta * other.values
        if self.is_sine and other.is_sine:
            m = max(self.coeffs.size, other.coeffs.size)
            c = np.zeros(m)
            c[: self.coeffs.size] += alpha * self.coeffs
            c[: other.coeffs.size] += beta * other.coeffs
            return GridFunction(self.grid, values, c)
        return GridFunction(self.grid, values, None)

    def inner(self, other: "GridFunction") -> float:
        """Discrete L2 pairing with Simpson weights."""
        self._check(other)
        return simpson(self.grid, self.values * other.values)

    def norm(self) -> float:
        return math.sqrt(max(self.inner(self), 0.0))

    # -- serialization ----------------------------------------------------
    def to_json(self) -> dict:
        if self.is_sine:
            return {"type": "sine", "coeffs": [float(c) for c in self.coeffs]}
        return {"type": "nodes", "n": self.grid.n, "values": [float(v) for v in self.values]}

    @classmethod
    def from_json(cls, spec: dict, grid: Grid = Grid(), dirichlet: bool = True) -> "GridFunction":
        if not isinstance(spec, dict) or "type" not in spec:
            raise InvalidParameter("grid function spec needs a 'type' key")
        kind = spec["type"]
        if kind == "sine":
            _only(spec, {"type", "coeffs"})
            return cls.sine(spec.get("coeffs", []), grid)
        if kind == "nodes":
            _only(spec, {"type", "n", "values"})
            values = spec.get("values")
            if values is None:
                raise InvalidParameter("nodes spec needs 'values'")
            n = spec.get("n", len(values) - 1)
            if n != grid.n:
                raise GridMismatch(f"nodes spec has n={n}, grid has n={grid.n}")
            return cls.from_nodes(values, grid, dirichlet=dirichlet)
        raise InvalidParameter(f"unknown grid function type {kind!r}")


def _only(spec: dict, keys: set) -> None:
    extra = set(spec) - keys
    if extra:
        raise InvalidParameter(f"unknown key(s) in grid function spec: {sorted(extra)}")


def _sine_eval(coeffs: np.ndarray, t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for k, c in enumerate(coeffs, start=1):
        if c != 0.0:
            out += c * np.sin(k * t)
    return out
