"""Derivative of the terminal Prüfer angle with respect to the state u.

Differentiating the linearized problem in direction phi gives

    DW(u)(pi) . phi = -r(pi)^-2  int_0^pi f''(u) phi v^2 dt,

evaluated here as -int f''(u) phi exp(2(rho - rho(pi))) sin^2 W dt so the
amplitude never has to be formed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import GridMismatch, InvalidParameter, NonFiniteValue
from .grid import GridFunction, simpson
from .nonlinearity import Nonlinearity
from .pruefer import ArgumentPath, integrate_argument

__all__ = ["PairingResult", "CriticalCheck", "dW_pairing", "fd_dW", "is_critical"]


@dataclass(frozen=True, eq=False)
class PairingResult:
    value: float
    # log of v(pi)^2 + v'(pi)^2
    denominator_log: float
    integrand_samples: np.ndarray = field(repr=False)

    def __float__(self) -> float:
        return self.value


def dW_pairing(f: Nonlinearity, u: GridFunction, phi: GridFunction,
               path: Optional[ArgumentPath] = None, substeps: int = 2) -> PairingResult:
    u._check(phi)
    if path is None:
        path = integrate_argument(f, u, substeps)
    elif path.grid != u.grid:
        raise GridMismatch("path and u live on different grids")
    weight = np.exp(2.0 * (path.rho - path.rho[-1])) * np.sin(path.W) ** 2
    integrand = np.asarray(f.f2(u.values), dtype=float) * phi.values * weight
    if not np.all(np.isfinite(integrand)):
        raise NonFiniteValue("DW integrand is not finite")
    value = -simpson(u.grid, integrand)
    return PairingResult(value, 2.0 * float(path.rho[-1]), integrand)


def fd_dW(f: Nonlinearity, u: GridFunction, phi: GridFunction,
          epsilon: float = 1e-5, substeps: int = 2) -> float:
    """Central difference (W(u + eps phi)(pi) - W(u - eps phi)(pi)) / (2 eps)."""
    if not 1e-8 <= epsilon <= 1e-2:
        raise InvalidParameter(f"epsilon must lie in [1e-8, 1e-2], got {epsilon}")
    plus = integrate_argument(f, u.combine(1.0, phi, epsilon), substeps).W_pi
    minus = integrate_argument(f, u.combine(1.0, phi, -epsilon), substeps).W_pi
    return (plus - minus) / (2.0 * epsilon)


@dataclass(frozen=True)
class CriticalCheck:
    critical: bool
    k: Optional[int]
    distance: float


def is_critical(path: ArgumentPath, tol: float = 1e-8) -> CriticalCheck:
    """u is critical iff W(u)(pi) is a positive multiple of pi."""
    if not tol > 0:
        raise InvalidParameter("tol must be positive")
    w = path.W_pi
    nearest = max(1, round(w / math.pi))
    distance = abs(w - nearest * math.pi)
    if distance <= tol:
        return CriticalCheck(True, int(nearest), distance)
    return CriticalCheck(False, None, distance)
