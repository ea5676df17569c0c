"""Shooting for the Dirichlet problem -u'' + f(u) = g on [0, pi].

The initial slope s parametrizes solutions of u'' = f(u) - g, u(0) = 0,
u'(0) = s. Alongside u the kernel integrates the sensitivity v = du/ds,
which solves v'' = f'(u) v, v(0) = 0, v'(0) = 1; so the derivative of the
terminal value u_s(pi) in s is v(pi), and it vanishes exactly where the
trajectory is a critical point of F.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from ._jit import njit
from .errors import EmptyScanRange, InvalidParameter
from .grid import GridFunction
from .nonlinearity import Nonlinearity

__all__ = [
    "ShootingRecord",
    "SolutionCount",
    "FoldTransition",
    "shoot",
    "shoot_terminal",
    "count_solutions",
    "locate_fold",
    "ode_residual",
]

log = logging.getLogger(__name__)

BLOWUP = 1e100
TANGENT_TOL = 1e-6


@njit
def _builtin_f(code, params, u):
    if code == 0:
        return params[0] * u
    if code == 1:
        a = params[0]
        sp = max(u, 0.0) + math.log1p(math.exp(-abs(u)))
        return a * u + (params[1] - a) * sp
    if code == 2:
        return math.exp(u) if u < 709.0 else math.inf
    return params[0] * u * u


@njit
def _builtin_f1(code, params, u):
    if code == 0:
        return params[0]
    if code == 1:
        a = params[0]
        if u >= 0:
            sig = 1.0 / (1.0 + math.exp(-u))
        else:
            e = math.exp(u)
            sig = e / (1.0 + e)
        return a + (params[1] - a) * sig
    if code == 2:
        return math.exp(u) if u < 709.0 else math.inf
    return 2.0 * params[0] * u


def _make_kernel(fval, f1val):
    def kernel(code, params, gs, s, n, substeps, keep):
        h = math.pi / (n * substeps)
        traj = np.zeros(n + 1 if keep else 1)
        u = 0.0
        up = s
        v = 0.0
        vp = 1.0
        j = 0
        for i in range(n):
            for _ in range(substeps):
                g0 = gs[2 * j]
                gm = gs[2 * j + 1]
                g1 = gs[2 * j + 2]

                k1u = up
                k1p = fval(code, params, u) - g0
                k1v = vp
                k1w = f1val(code, params, u) * v

                u2 = u + 0.5 * h * k1u
                v2 = v + 0.5 * h * k1v
                k2u = up + 0.5 * h * k1p
                k2p = fval(code, params, u2) - gm
                k2v = vp + 0.5 * h * k1w
                k2w = f1val(code, params, u2) * v2

                u3 = u + 0.5 * h * k2u
                v3 = v + 0.5 * h * k2v
                k3u = up + 0.5 * h * k2p
                k3p = fval(code, params, u3) - gm
                k3v = vp + 0.5 * h * k2w
                k3w = f1val(code, params, u3) * v3

                u4 = u + h * k3u
                v4 = v + h * k3v
                k4u = up + h * k3p
                k4p = fval(code, params, u4) - g1
                k4v = vp + h * k3w
                k4w = f1val(code, params, u4) * v4

                u += h * (k1u + 2.0 * k2u + 2.0 * k3u + k4u) / 6.0
                up += h * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0
                v += h * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0
                vp += h * (k1w + 2.0 * k2w + 2.0 * k3w + k4w) / 6.0
                j += 1
                if not (abs(u) < BLOWUP and abs(up) < BLOWUP):
                    return traj, u, v, True, (j * h)
            if keep:
                traj[i + 1] = u
        return traj, u, v, False, math.pi

    return kernel


_builtin_kernel = njit(_make_kernel(_builtin_f, _builtin_f1))


def _kernel_for(f: Nonlinearity):
    if f.code >= 0:
        return _builtin_kernel
    fv, f1v = f.f, f.f1
    return _make_kernel(lambda code, params, u: float(fv(u)),
                        lambda code, params, u: float(f1v(u)))


@dataclass(frozen=True, eq=False)
class ShootingRecord:
    slope: float
    terminal: float
    # d terminal / d slope = v(pi)
    sensitivity: float
    trajectory: Optional[GridFunction] = field(repr=False)
    blew_up: bool = False
    escape_time: float = math.pi


class _Shooter:
    """Shooting map s -> u_s(pi) for fixed f, g and grid."""

    def __init__(self, f: Nonlinearity, g: GridFunction, substeps: int = 2):
        if substeps < 1:
            raise InvalidParameter("substeps must be positive")
        self.f, self.g, self.substeps = f, g, int(substeps)
        self.grid = g.grid
        self._gs = np.ascontiguousarray(g.stage_values(self.substeps))
        self._kernel = _kernel_for(f)
        self._code = f.code
        self._params = f.kernel_params()

    def run(self, s: float, keep: bool = False):
        return self._kernel(self._code, self._params, self._gs, float(s),
                            self.grid.n, self.substeps, keep)

    def record(self, s: float, keep: bool = True) -> ShootingRecord:
        traj, u_end, v_end, blown, t_esc = self.run(s, keep)
        if blown:
            terminal = math.copysign(math.inf, u_end) if not math.isnan(u_end) else math.nan
            return ShootingRecord(float(s), terminal, math.nan, None, True, float(t_esc))
        trajectory = None
        if keep:
            traj = traj.copy()
            traj[-1] = u_end
            trajectory = GridFunction(self.grid, traj, None)
        return ShootingRecord(float(s), float(u_end), float(v_end), trajectory, False, math.pi)

    def terminal(self, s: float) -> float:
        _, u_end, _, blown, _ = self.run(s)
        return math.nan if blown else float(u_end)

    def sensitivity(self, s: float) -> float:
        _, _, v_end, blown, _ = self.run(s)
        return math.nan if blown else float(v_end)

    def scan(self, slopes: np.ndarray, threads: int = 1):
        def one(s):
            _, u_end, v_end, blown, _ = self.run(s)
            return u_end, v_end, blown

        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                rows = list(pool.map(one, slopes))
        else:
            rows = [one(s) for s in slopes]
        T = np.array([r[0] for r in rows], dtype=float)
        D = np.array([r[1] for r in rows], dtype=float)
        blown = np.array([r[2] for r in rows], dtype=bool)
        T[blown] = np.nan
        D[blown] = np.nan
        return T, D, blown


def shoot(f: Nonlinearity, g: GridFunction, s: float, substeps: int = 2) -> ShootingRecord:
    """Integrate u'' = f(u) - g, u(0) = 0, u'(0) = s, by fixed-step RK4."""
    return _Shooter(f, g, substeps).record(s)


def shoot_terminal(f: Nonlinearity, g: GridFunction, s: float, substeps: int = 2) -> float:
    return _Shooter(f, g, substeps).terminal(s)


def ode_residual(f: Nonlinearity, g: GridFunction, u: GridFunction) -> float:
    """Max over interior nodes of |-u'' + f(u) - g| with a five-point stencil."""
    y = u.values
    dt = u.grid.dt
    d2 = (-y[:-4] + 16 * y[1:-3] - 30 * y[2:-2] + 16 * y[3:-1] - y[4:]) / (12 * dt * dt)
    r = -d2 + np.asarray(f.f(y[2:-2]), dtype=float) - g.values[2:-2]
    return float(np.max(np.abs(r)))


@dataclass(frozen=True, eq=False)
class SolutionCount:
    """Solutions of F(u) = g found in a slope window."""

    slopes: list
    terminals: list
    tangential: list
    blowups: int
    scan_slopes: np.ndarray = field(repr=False)
    scan_terminal: np.ndarray = field(repr=False)
    scan_blown: np.ndarray = field(repr=False)

    @property
    def count(self) -> int:
        return len(self.slopes) + len(self.tangential)

    def scan_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "u_pi", "blew_up"])
        for s, t, b in zip(self.scan_slopes, self.scan_terminal, self.scan_blown):
            w.writerow([format(float(s), ".17g"), format(float(t), ".17g"), int(b)])
        return buf.getvalue()


def _refine_root(shooter: _Shooter, a: float, b: float, ta: float, tb: float) -> tuple[float, float]:
    if ta == 0:
        return a, 0.0
    if tb == 0:
        return b, 0.0
    s = brentq(shooter.terminal, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return s, shooter.terminal(s)


def count_solutions(f: Nonlinearity, g: GridFunction, s_min: float = -200.0,
                    s_max: float = 200.0, samples: int = 2001, substeps: int = 2,
                    threads: int = 1) -> SolutionCount:
    """Scan the shooting map on a uniform slope grid and refine every root.

    Cells where the terminal value keeps its sign but its slope derivative
    changes sign are split at the interior extremum, which exposes root
    pairs narrower than the scan spacing. An extremum with |u_s(pi)| below
    1e-6 and no sign change is reported as a tangential (double) root.
    """
    if samples < 2:
        raise InvalidParameter("samples must be at least 2")
    if not s_min < s_max:
        raise EmptyScanRange(f"empty slope range [{s_min}, {s_max}]")
    shooter = _Shooter(f, g, substeps)
    S = np.linspace(s_min, s_max, samples)
    T, D, blown = shooter.scan(S, threads)

    roots: list[tuple[float, float]] = []
    tangential: list[float] = []
    skipped = 0
    for i in range(samples - 1):
        if blown[i] or blown[i + 1]:
            skipped += 1
            continue
        a, b, ta, tb = S[i], S[i + 1], T[i], T[i + 1]
        pieces = [(a, b, ta, tb)]
        if D[i] * D[i + 1] < 0:
            try:
                se = brentq(shooter.sensitivity, a, b, xtol=1e-15, maxiter=200)
            except ValueError:
                se = None
            if se is not None:
                te = shooter.terminal(se)
                pieces = [(a, se, ta, te), (se, b, te, tb)]
                if np.sign(te) == np.sign(ta) == np.sign(tb) and abs(te) <= TANGENT_TOL:
                    tangential.append(float(se))
        for lo, hi, tlo, thi in pieces:
            if tlo == 0 and lo != a:
                continue  # counted as the right end of the previous piece
            if np.sign(tlo) != np.sign(thi):
                roots.append(_refine_root(shooter, lo, hi, tlo, thi))
    if skipped:
        log.warning("%d scan cells skipped because of blow-up", skipped)
    # a root exactly on a scan node shows up in two cells
    uniq: list[tuple[float, float]] = []
    for s, t in sorted(roots):
        if not uniq or s - uniq[-1][0] > 1e-12 * max(1.0, abs(s)):
            uniq.append((float(s), float(t)))
    return SolutionCount([s for s, _ in uniq], [t for _, t in uniq], tangential,
                         int(np.count_nonzero(blown)), S, T, blown)


@dataclass(frozen=True, eq=False)
class FoldTransition:
    tau: float
    slope: float
    record: ShootingRecord = field(repr=False)
    tau_zero: float
    tau_two: float


def locate_fold(f: Nonlinearity, g0: GridFunction, tau_a: float, tau_b: float,
                s_min: float = -200.0, s_max: float = 200.0, samples: int = 401,
                substeps: int = 2, coarse_width: float = 1e-2) -> FoldTransition:
    """Find tau* where the solution count of F(u) = tau g0 drops from 2 to 0.

    Coarse bisection on the count narrows the tau interval; then the terminal
    value at the extremum of the shooting map is driven to zero in tau.
    """
    def count(tau):
        return count_solutions(f, g0 * tau, s_min, s_max, samples, substeps)

    ca, cb = count(tau_a), count(tau_b)
    if {ca.count, cb.count} != {0, 2}:
        raise InvalidParameter(
            f"expected counts 0 and 2 at the ends, got {ca.count} and {cb.count}")
    zero, two = (tau_a, tau_b) if ca.count == 0 else (tau_b, tau_a)
    c_two = cb if ca.count == 0 else ca
    while abs(two - zero) > coarse_width:
        mid = 0.5 * (zero + two)
        c = count(mid)
        if c.count == 0:
            zero = mid
        elif c.count >= 2:
            two, c_two = mid, c
        else:
            zero = two = mid
            break

    span = (s_max - s_min) / (samples - 1)
    lo = max(s_min, c_two.slopes[0] - span) if c_two.slopes else s_min
    hi = min(s_max, c_two.slopes[-1] + span) if c_two.slopes else s_max

    def extremum(tau):
        sh = _Shooter(f, g0 * tau, substeps)
        se = brentq(sh.sensitivity, lo, hi, xtol=1e-15, maxiter=200)
        return se, sh.terminal(se)

    if zero != two:
        tau = brentq(lambda t: extremum(t)[1], zero, two, xtol=1e-14, maxiter=200)
    else:
        tau = zero
    se, _ = extremum(tau)
    record = _Shooter(f, g0 * tau, substeps).record(se)
    return FoldTransition(float(tau), float(se), record, float(zero), float(two))
