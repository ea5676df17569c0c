"""Prüfer angle and log-amplitude of the linearized Dirichlet problem.

For a state u, v solves v'' = f'(u) v with v(0) = 0, v'(0) = 1. Writing
v = r sin W, v' = r cos W and rho = log r gives the system

    W'   = cos^2 W - q sin^2 W
    rho' = (1 + q) sin W cos W,      q = f'(u(t)),

which stays representable where (v, v') would overflow.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from ._jit import njit
from .errors import InvalidGrid, NonFiniteState
from .grid import Grid, GridFunction
from .nonlinearity import Nonlinearity

__all__ = [
    "ArgumentPath",
    "integrate_argument",
    "integrate_potential",
    "free_argument",
    "reconstruct_kernel",
    "sign_changes",
]


@dataclass(frozen=True, eq=False)
class ArgumentPath:
    grid: Grid
    W: np.ndarray = field(repr=False)
    rho: np.ndarray = field(repr=False)

    @property
    def W_pi(self) -> float:
        return float(self.W[-1])

    @property
    def rho_max(self) -> float:
        return float(np.max(self.rho))

    @property
    def v_pi_scaled(self) -> float:
        return math.exp(self.rho[-1] - self.rho_max) * math.sin(self.W[-1])

    @property
    def vp_pi_scaled(self) -> float:
        return math.exp(self.rho[-1] - self.rho_max) * math.cos(self.W[-1])

    def terminal(self) -> dict:
        return {"W_pi": self.W_pi, "v_pi_scaled": self.v_pi_scaled,
                "vp_pi_scaled": self.vp_pi_scaled, "rho_max": self.rho_max}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "W", "rho"])
        for row in zip(self.grid.nodes, self.W, self.rho):
            w.writerow([format(float(x), ".17g") for x in row])
        return buf.getvalue()


@njit
def _rk4_angle(q, n, substeps):
    # q holds f'(u) at every half-step abscissa of the fine grid
    h = math.pi / (n * substeps)
    W_out = np.empty(n + 1)
    rho_out = np.empty(n + 1)
    W = 0.0
    rho = 0.0
    W_out[0] = 0.0
    rho_out[0] = 0.0
    j = 0
    for i in range(n):
        for _ in range(substeps):
            q0 = q[2 * j]
            qm = q[2 * j + 1]
            q1 = q[2 * j + 2]

            s = math.sin(W)
            c = math.cos(W)
            k1w = c * c - q0 * s * s
            k1r = (1.0 + q0) * s * c

            Wa = W + 0.5 * h * k1w
            s = math.sin(Wa)
            c = math.cos(Wa)
            k2w = c * c - qm * s * s
            k2r = (1.0 + qm) * s * c

            Wb = W + 0.5 * h * k2w
            s = math.sin(Wb)
            c = math.cos(Wb)
            k3w = c * c - qm * s * s
            k3r = (1.0 + qm) * s * c

            Wc = W + h * k3w
            s = math.sin(Wc)
            c = math.cos(Wc)
            k4w = c * c - q1 * s * s
            k4r = (1.0 + q1) * s * c

            W += h * (k1w + 2.0 * k2w + 2.0 * k3w + k4w) / 6.0
            rho += h * (k1r + 2.0 * k2r + 2.0 * k3r + k4r) / 6.0
            j += 1
        W_out[i + 1] = W
        rho_out[i + 1] = rho
    return W_out, rho_out


def integrate_potential(q: np.ndarray, grid: Grid, substeps: int = 2) -> ArgumentPath:
    """Integrate the angle system for a potential given at all stage abscissae.

    ``q`` must have length 2 n substeps + 1 (see ``Grid.fine_nodes``).
    """
    if not isinstance(substeps, (int, np.integer)) or substeps < 1:
        raise InvalidGrid(f"substeps must be a positive integer, got {substeps!r}")
    q = np.ascontiguousarray(q, dtype=float)
    if q.shape != (2 * grid.n * substeps + 1,):
        raise InvalidGrid(f"potential has {q.size} samples, expected {2 * grid.n * substeps + 1}")
    if not np.all(np.isfinite(q)):
        raise NonFiniteState("potential f'(u) is not finite on the grid")
    W, rho = _rk4_angle(q, grid.n, int(substeps))
    if not (np.all(np.isfinite(W)) and np.all(np.isfinite(rho))):
        raise NonFiniteState("Prüfer state became non-finite")
    return ArgumentPath(grid, W, rho)


def integrate_argument(f: Nonlinearity, u: GridFunction, substeps: int = 2) -> ArgumentPath:
    """Prüfer path of the solution of v'' = f'(u) v, v(0) = 0, v'(0) = 1.

    f' is applied to the interpolated u at each RK4 stage, so the potential
    never leaves the range of f'.
    """
    if u.values[0] != 0.0 or u.values[-1] != 0.0:
        raise InvalidGrid("u must satisfy u(0) = u(pi) = 0")
    if not isinstance(substeps, (int, np.integer)) or substeps < 1:
        raise InvalidGrid(f"substeps must be a positive integer, got {substeps!r}")
    q = np.asarray(f.f1(u.stage_values(substeps)), dtype=float)
    return integrate_potential(q, u.grid, substeps)


def free_argument(omega: float, t=math.pi):
    """Closed-form argument of v'' + omega v = 0, v(0) = 0, v'(0) = 1, at time(s) t."""
    t_arr = np.asarray(t, dtype=float)
    if omega > 0:
        k = math.sqrt(omega)
        x = k * t_arr
        turns = np.floor(x / math.pi)
        y = x - turns * math.pi
        out = turns * math.pi + np.arctan2(np.sin(y) / k, np.cos(y))
    elif omega == 0:
        out = np.arctan(t_arr)
    else:
        k = math.sqrt(-omega)
        out = np.arctan(np.tanh(k * t_arr) / k)
    return float(out) if out.ndim == 0 else out


def reconstruct_kernel(path: ArgumentPath) -> GridFunction:
    """v(t) rescaled by exp(-rho_max), so that max |v| <= 1."""
    v = np.exp(path.rho - path.rho_max) * np.sin(path.W)
    v[0] = 0.0
    return GridFunction.from_nodes(v, path.grid, dirichlet=False)


def sign_changes(values: np.ndarray) -> int:
    """Sign changes of a sampled function on (0, pi], ignoring exact zeros."""
    s = np.sign(np.asarray(values)[1:])
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))
