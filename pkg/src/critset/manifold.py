"""Level sets of the terminal Prüfer angle as graphs over a hyperplane.

Fix a direction p > 0 on (0, pi) and split X = H + span(p) orthogonally.
For strictly convex or concave f the map lambda -> W(h + lambda p)(pi) is
strictly monotone, so every level set M_theta = {W(u)(pi) = theta} meets
each line h + lambda p at most once. ``find_lambda`` locates that point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import InvalidParameter, NotApplicable, NotPositive, RangeUnattainable
from .grid import Grid, GridFunction, simpson
from .nonlinearity import Nonlinearity
from .pruefer import free_argument, integrate_argument, integrate_potential
from .variational import dW_pairing

__all__ = [
    "LineFamily",
    "ManifoldPoint",
    "ComparisonResult",
    "decompose",
    "default_direction",
    "find_lambda",
    "chart_point",
    "is_Ck_nonempty",
    "asymptotic_arguments",
    "comparison_identity",
    "comparison_identity_residual",
    "lambda_scan",
]

BISECTION_WIDTH = 1e-6
RESIDUAL_TOL = 1e-8
NEWTON_TOL = 1e-11


def default_direction(grid: Grid = Grid()) -> GridFunction:
    return GridFunction.sine([1.0], grid)


def _check_positive(p: GridFunction) -> None:
    if not np.all(p.values[1:-1] > 0):
        raise NotPositive("direction p must be strictly positive on interior nodes")


def decompose(u: GridFunction, p: GridFunction) -> tuple[GridFunction, float]:
    """Split u = h + lambda p with <h, p> = 0 in the Simpson inner product."""
    _check_positive(p)
    lam = u.inner(p) / p.inner(p)
    return u.combine(1.0, p, -lam), lam


@dataclass(frozen=True, eq=False)
class LineFamily:
    """Lines h + lambda p; h is projected onto the orthogonal complement of p."""

    p: GridFunction
    h: GridFunction

    @classmethod
    def build(cls, h: GridFunction, p: Optional[GridFunction] = None) -> "LineFamily":
        if p is None:
            p = default_direction(h.grid)
        h_perp, _ = decompose(h, p)
        return cls(p, h_perp)

    def at(self, lam: float) -> GridFunction:
        return self.h.combine(1.0, self.p, lam)


@dataclass(frozen=True, eq=False)
class ManifoldPoint:
    theta: float
    h: GridFunction = field(repr=False)
    lambda_star: float
    u: GridFunction = field(repr=False)
    residual: float
    transversality: float
    k: Optional[int] = None
    W_pi: float = math.nan

    def to_json(self) -> dict:
        return {
            "theta": self.theta, "k": self.k, "lambda_star": self.lambda_star,
            "residual": self.residual, "transversality": self.transversality,
            "h": self.h.to_json(), "u": self.u.to_json(),
        }


def _require_convexity(f: Nonlinearity) -> int:
    if f.f2_sign not in (1, -1):
        raise NotApplicable(
            f"{f.family} nonlinearity is not strictly convex or concave")
    return f.f2_sign


def find_lambda(f: Nonlinearity, h: GridFunction, p: Optional[GridFunction], theta: float,
                bracket_limit: float = 1e6, substeps: int = 2) -> ManifoldPoint:
    """The unique lambda with W(h + lambda p)(pi) = theta.

    Brackets by doubling from [-1, 1], bisects to width 1e-6, then polishes
    with Newton steps using the analytic derivative along p.
    """
    sign = _require_convexity(f)
    if not theta > 0:
        raise InvalidParameter("theta must be positive")
    line = LineFamily.build(h, p)

    # W decreases in lambda when f'' > 0; flip so that g is increasing
    def g(lam: float) -> float:
        return -sign * (integrate_argument(f, line.at(lam), substeps).W_pi - theta)

    lo, hi = -1.0, 1.0
    g_lo, g_hi = g(lo), g(hi)
    while g_lo > 0:
        lo, hi, g_hi = 2.0 * lo, lo, g_lo
        if abs(lo) > bracket_limit:
            raise RangeUnattainable(
                f"theta={theta:.6g} is not reached for lambda >= {-bracket_limit:.3g}")
        g_lo = g(lo)
    while g_hi < 0:
        lo, hi, g_lo = hi, 2.0 * hi, g_hi
        if abs(hi) > bracket_limit:
            raise RangeUnattainable(
                f"theta={theta:.6g} is not reached for lambda <= {bracket_limit:.3g}")
        g_hi = g(hi)

    while hi - lo > BISECTION_WIDTH:
        mid = 0.5 * (lo + hi)
        g_mid = g(mid)
        if g_mid == 0:
            lo = hi = mid
            break
        if g_mid < 0:
            lo = mid
        else:
            hi = mid

    lam = 0.5 * (lo + hi)
    for _ in range(30):
        u = line.at(lam)
        path = integrate_argument(f, u, substeps)
        err = path.W_pi - theta
        slope = dW_pairing(f, u, line.p, path).value
        if abs(err) <= NEWTON_TOL or slope == 0:
            break
        if -sign * err < 0:
            lo = max(lo, lam)
        else:
            hi = min(hi, lam)
        new = lam - err / slope
        # stay inside the bracket
        if not lo <= new <= hi:
            new = 0.5 * (lo + hi)
        if abs(new - lam) <= 1e-15 * max(1.0, abs(lam)):
            break
        lam = new

    u = line.at(lam)
    path = integrate_argument(f, u, substeps)
    residual = abs(path.W_pi - theta)
    transversality = dW_pairing(f, u, line.p, path).value
    if residual > RESIDUAL_TOL:
        raise RangeUnattainable(
            f"could not reach residual {RESIDUAL_TOL:g} for theta={theta:.6g} (got {residual:.3g})")
    return ManifoldPoint(theta, line.h, lam, u, residual, transversality, None, path.W_pi)


def chart_point(f: Nonlinearity, h: GridFunction, p: Optional[GridFunction], k: int,
                bracket_limit: float = 1e6, substeps: int = 2) -> ManifoldPoint:
    """The point of the critical component C_k above h."""
    if k < 1:
        raise InvalidParameter("k must be a positive integer")
    point = find_lambda(f, h, p, k * math.pi, bracket_limit, substeps)
    return ManifoldPoint(point.theta, point.h, point.lambda_star, point.u,
                         point.residual, point.transversality, int(k), point.W_pi)


def _certified_range(f: Nonlinearity) -> tuple[float, float]:
    _require_convexity(f)
    if not f.range_certified:
        raise NotApplicable("range of f' is not certified")
    return f.range_f1


def is_Ck_nonempty(f: Nonlinearity, k: int) -> bool:
    """C_k is nonempty iff -k^2 lies in the open range of f'."""
    if k < 1:
        raise InvalidParameter("k must be a positive integer")
    lo, hi = _certified_range(f)
    return lo < -(k * k) < hi


def asymptotic_arguments(f: Nonlinearity) -> tuple[float, float]:
    """Limits of W(h + lambda p)(pi) as lambda -> -inf and lambda -> +inf."""
    lo, hi = _certified_range(f)

    def limit(slope: float) -> float:
        if slope == math.inf:
            return 0.0
        if slope == -math.inf:
            return math.inf
        return free_argument(-slope)

    if f.f2_sign > 0:
        return limit(lo), limit(hi)
    return limit(hi), limit(lo)


@dataclass(frozen=True, eq=False)
class ComparisonResult:
    residual: float
    U_pi: float
    lhs: float
    rhs: float
    U: np.ndarray = field(repr=False)


def comparison_identity(f: Nonlinearity, h: GridFunction, p: Optional[GridFunction],
                        lam: float, omega: float, substeps: int = 2) -> ComparisonResult:
    """Check E(pi) U(pi) = int_0^pi E H dt for U = W1 - W2.

    All quantities are sampled at every RK4 substep. W1 is the argument for
    the constant potential -omega, W2 the argument along h + lam p,
    H = (omega + f'(u)) sin^2 W2, and E = exp(int_0^t g) with
    g = -(1 - omega)(cos^2 W1 - cos^2 W2)/(W1 - W2).
    """
    if p is None:
        p = default_direction(h.grid)
    # evaluate on the lattice of RK4 substeps, not only on the nodes
    u = h.combine(1.0, p, lam).refine(substeps)
    grid = u.grid
    W2 = integrate_argument(f, u, 1).W
    # same integrator for both paths, so matched potentials give U == 0 exactly
    W1 = integrate_potential(np.full(2 * grid.n + 1, -float(omega)), grid, 1).W
    U = W1 - W2
    close = np.abs(U) < 1e-8
    safe = np.where(close, 1.0, U)
    quotient = np.where(close, -np.sin(2.0 * W2),
                        (np.cos(W1) ** 2 - np.cos(W2) ** 2) / safe)
    g = -(1.0 - omega) * quotient
    G = cumulative_simpson(g, dx=grid.dt, initial=0.0)
    E = np.exp(G)
    H = (omega + np.asarray(f.f1(u.values), dtype=float)) * np.sin(W2) ** 2
    lhs = float(E[-1] * U[-1])
    rhs = simpson(grid, E * H)
    return ComparisonResult(abs(lhs - rhs), float(U[-1]), lhs, rhs, U)


def comparison_identity_residual(f: Nonlinearity, h: GridFunction, p: Optional[GridFunction],
                                 lam: float, omega: float, substeps: int = 2) -> float:
    return comparison_identity(f, h, p, lam, omega, substeps).residual


def lambda_scan(f: Nonlinearity, h: GridFunction, p: Optional[GridFunction],
                lambdas, substeps: int = 2, threads: int = 1) -> np.ndarray:
    """W(h + lambda p)(pi) for each lambda, in input order."""
    line = LineFamily(p if p is not None else default_direction(h.grid), h)
    lambdas = [float(x) for x in lambdas]

    def one(lam: float) -> float:
        return integrate_argument(f, line.at(lam), substeps).W_pi

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(threads) as pool:
            return np.array(list(pool.map(one, lambdas)))
    return np.array([one(x) for x in lambdas])
