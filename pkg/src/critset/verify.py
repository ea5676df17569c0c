"""Property checks run by ``critset verify``.

Each group returns a list of (name, passed, detail) rows. Groups are sized
to finish in seconds at n = 2048; the pytest acceptance suite runs the full
versions.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import RangeUnattainable
from .grid import Grid, GridFunction
from .manifold import (asymptotic_arguments, chart_point, comparison_identity,
                       is_Ck_nonempty, lambda_scan)
from .nonlinearity import exponential, linear, quadratic, softplus
from .pruefer import free_argument, integrate_argument, reconstruct_kernel, sign_changes
from .variational import dW_pairing, fd_dW

Row = tuple[str, bool, str]

OMEGAS = (-25.0, -3.0, 0.0, 0.5, 1.0, 2.0, 4.0, 9.0, 12.0, 30.0)


def _oracle(grid: Grid, substeps: int, seed: int) -> list[Row]:
    zero = GridFunction.zero(grid)
    worst = max(abs(integrate_argument(linear(-w), zero, substeps).W_pi - free_argument(w))
                for w in OMEGAS)
    return [("oracle", worst <= 1e-7, f"max |W - W_free| = {worst:.2e}")]


def _convergence(grid: Grid, substeps: int, seed: int) -> list[Row]:
    coarse, fine = Grid(grid.n // 2), grid
    ratios = []
    for w in (9.0, 12.0, 30.0):
        e1 = abs(integrate_argument(linear(-w), GridFunction.zero(coarse), substeps).W_pi
                 - free_argument(w))
        e2 = abs(integrate_argument(linear(-w), GridFunction.zero(fine), substeps).W_pi
                 - free_argument(w))
        if e1 > 1e-11:
            ratios.append(e1 / max(e2, 1e-300))
    ok = bool(ratios) and min(ratios) >= 12
    return [("convergence", ok, f"min error ratio = {min(ratios, default=math.nan):.1f}")]


def _dw_formula(grid: Grid, substeps: int, seed: int) -> list[Row]:
    rng = np.random.default_rng(seed)
    f = softplus(-12.0, 3.0)
    worst = 0.0
    for _ in range(10):
        u = GridFunction.sine(rng.uniform(-3, 3, rng.integers(1, 7)), grid)
        phi = GridFunction.sine(rng.uniform(-3, 3, rng.integers(1, 7)), grid)
        a = dW_pairing(f, u, phi, substeps=substeps).value
        b = fd_dW(f, u, phi, 1e-5, substeps)
        worst = max(worst, abs(a - b) / max(abs(a), abs(b), 1e-300))
    zero_lin = dW_pairing(linear(-1.0), GridFunction.sine([1.0], grid),
                          GridFunction.sine([0.0, 1.0], grid), substeps=substeps).value
    return [("dw-formula", worst <= 1e-4, f"max rel error = {worst:.2e}"),
            ("dw-linear-zero", zero_lin == 0.0, f"value = {zero_lin:g}")]


def _sign_law(grid: Grid, substeps: int, seed: int) -> list[Row]:
    rng = np.random.default_rng(seed)
    p = GridFunction.sine([1.0], grid)
    ok = True
    for _ in range(5):
        u = GridFunction.sine(rng.uniform(-3, 3, 4), grid)
        ok &= dW_pairing(softplus(-12.0, 3.0), u, p, substeps=substeps).value < 0
        ok &= dW_pairing(softplus(3.0, -12.0), u, p, substeps=substeps).value > 0
    return [("sign-law", bool(ok), "convex < 0, concave > 0")]


def _comparison(grid: Grid, substeps: int, seed: int) -> list[Row]:
    f = softplus(-12.0, 3.0)
    zero = GridFunction.zero(grid)
    worst = max(comparison_identity(f, zero, None, lam, w, substeps).residual
                for lam in (-50.0, -5.0, 0.0, 5.0, 50.0) for w in (-3.0, 12.0))
    matched = comparison_identity(linear(2.0), zero, None, 3.0, -2.0, substeps).residual
    return [("comparison", worst <= 1e-6, f"max residual = {worst:.2e}"),
            ("comparison-matched", matched <= 1e-12, f"residual = {matched:.2e}")]


def _monotonicity(grid: Grid, substeps: int, seed: int) -> list[Row]:
    lams = np.linspace(-100, 100, 101)
    zero = GridFunction.zero(grid)
    dec = np.all(np.diff(lambda_scan(softplus(-12.0, 3.0), zero, None, lams, substeps)) < 0)
    inc = np.all(np.diff(lambda_scan(softplus(3.0, -12.0), zero, None, lams, substeps)) > 0)
    return [("monotonicity", bool(dec and inc), "convex decreasing, concave increasing")]


def _asymptotics(grid: Grid, substeps: int, seed: int) -> list[Row]:
    f = softplus(-12.0, 3.0)
    w_minus, w_plus = asymptotic_arguments(f)
    p = GridFunction.sine([1.0], grid)

    def gap(lam, limit):
        return abs(integrate_argument(f, p * lam, substeps).W_pi - limit)

    shrink = min(gap(1e3, w_plus) / gap(1e4, w_plus), gap(-1e3, w_minus) / gap(-1e4, w_minus))
    closed = abs(w_plus - math.atan(math.tanh(math.sqrt(3) * math.pi) / math.sqrt(3)))
    return [("asymptotics", shrink >= 5 and closed < 1e-15,
             f"gap shrinks x{shrink:.1f} from |lambda|=1e3 to 1e4")]


def _emptiness(grid: Grid, substeps: int, seed: int) -> list[Row]:
    f = softplus(-12.0, 3.0)
    zero = GridFunction.zero(grid)
    ok = True
    for k in (1, 2, 3, 4):
        try:
            chart_point(f, zero, None, k, substeps=substeps)
            found = True
        except RangeUnattainable:
            found = False
        ok &= found == is_Ck_nonempty(f, k)
    ok &= not any(is_Ck_nonempty(exponential(), k) for k in range(1, 6))
    ok &= all(is_Ck_nonempty(quadratic(1.0), k) for k in range(1, 6))
    return [("emptiness", bool(ok), "analytic criterion agrees with line search")]


def _zero_count(grid: Grid, substeps: int, seed: int) -> list[Row]:
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(20):
        a, b = rng.uniform(-30, 5, 2)
        f = softplus(a, b if a != b else b + 1)
        u = GridFunction.sine(rng.uniform(-3, 3, 4), grid)
        path = integrate_argument(f, u, substeps)
        if abs(path.W_pi / math.pi - round(path.W_pi / math.pi)) * math.pi < 1e-6:
            continue
        if sign_changes(reconstruct_kernel(path).values) != math.floor(path.W_pi / math.pi):
            bad += 1
    return [("zero-count", bad == 0, f"{bad} mismatches")]


GROUPS: dict[str, Callable[[Grid, int, int], list[Row]]] = {
    "oracle": _oracle,
    "convergence": _convergence,
    "dw-formula": _dw_formula,
    "sign-law": _sign_law,
    "comparison": _comparison,
    "monotonicity": _monotonicity,
    "asymptotics": _asymptotics,
    "emptiness": _emptiness,
    "zero-count": _zero_count,
}


def run(grid: Grid, substeps: int = 2, only=None, seed: int = 0) -> list[Row]:
    names = list(GROUPS) if not only else list(only)
    rows: list[Row] = []
    for name in names:
        try:
            rows.extend(GROUPS[name](grid, substeps, seed))
        except Exception as exc:  # a crash in one group is a failure, not an abort
            rows.append((name, False, f"{type(exc).__name__}: {exc}"))
    return rows
