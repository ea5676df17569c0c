"""Scalar nonlinearities f with first and second derivatives.

Every map accepts floats or numpy arrays. Built-in families carry an
analytic range for f' and a known sign of f''; custom functions only get a
sampled estimate of the range, flagged as not certified.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import expit

from .errors import InvalidParameter

__all__ = [
    "Nonlinearity",
    "ConvexityReport",
    "make_family",
    "custom",
    "classify",
    "softplus",
    "linear",
    "quadratic",
    "exponential",
]

FAMILIES = ("linear", "softplus", "exponential", "quadratic", "custom")
# integer codes used by the compiled shooting kernel
FAMILY_CODES = {"linear": 0, "softplus": 1, "exponential": 2, "quadratic": 3}


@dataclass(frozen=True)
class Nonlinearity:
    family: str
    params: dict
    f: Callable = field(repr=False)
    f1: Callable = field(repr=False)
    f2: Callable = field(repr=False)
    # open interval (inf f', sup f'); may hold +-inf
    range_f1: tuple[float, float]
    range_certified: bool = True
    # +1 strictly convex, -1 strictly concave, 0 for f'' == 0, None if unknown
    f2_sign: Optional[int] = None

    def to_json(self) -> dict:
        if self.family == "custom":
            raise InvalidParameter("custom nonlinearities have no JSON form")
        return {"family": self.family, **{k: float(v) for k, v in self.params.items()}}

    @property
    def code(self) -> int:
        return FAMILY_CODES.get(self.family, -1)

    def kernel_params(self) -> np.ndarray:
        p = self.params
        if self.family == "softplus":
            return np.array([p["a"], p["b"]], dtype=float)
        if self.family in ("linear", "quadratic"):
            return np.array([p["c"], 0.0])
        return np.zeros(2)


def _check_finite(**kw: float) -> None:
    for name, value in kw.items():
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise InvalidParameter(f"parameter {name!r} must be a finite number, got {value!r}")


def _log1pexp(u):
    # log(1 + e^u) without overflow: max(u, 0) + log1p(e^{-|u|})
    u = np.asarray(u, dtype=float)
    return np.maximum(u, 0.0) + np.log1p(np.exp(-np.abs(u)))


def _scalarize(fn):
    def wrapped(u):
        out = fn(u)
        return float(out) if np.ndim(out) == 0 else out

    return wrapped


def softplus(a: float, b: float) -> Nonlinearity:
    """f(u) = a u + (b - a) log(1 + e^u), so f' runs from a (u -> -inf) to b."""
    _check_finite(a=a, b=b)
    if a == b:
        raise InvalidParameter("softplus requires a != b (a == b makes f'' vanish)")
    a, b = float(a), float(b)
    d = b - a

    def f(u):
        u = np.asarray(u, dtype=float)
        return a * u + d * _log1pexp(u)

    def f1(u):
        return a + d * expit(np.asarray(u, dtype=float))

    def f2(u):
        u = np.asarray(u, dtype=float)
        return d * expit(u) * expit(-u)

    return Nonlinearity(
        "softplus", {"a": a, "b": b}, _scalarize(f), _scalarize(f1), _scalarize(f2),
        (min(a, b), max(a, b)), True, 1 if d > 0 else -1,
    )


def linear(c: float) -> Nonlinearity:
    _check_finite(c=c)
    c = float(c)
    return Nonlinearity(
        "linear", {"c": c},
        _scalarize(lambda u: c * np.asarray(u, dtype=float)),
        _scalarize(lambda u: np.full(np.shape(u), c) if np.ndim(u) else c),
        _scalarize(lambda u: np.zeros(np.shape(u)) if np.ndim(u) else 0.0),
        (c, c), True, 0,
    )


def quadratic(c: float) -> Nonlinearity:
    _check_finite(c=c)
    if c == 0:
        raise InvalidParameter("quadratic requires c != 0; use linear(0)")
    c = float(c)
    return Nonlinearity(
        "quadratic", {"c": c},
        _scalarize(lambda u: c * np.asarray(u, dtype=float) ** 2),
        _scalarize(lambda u: 2.0 * c * np.asarray(u, dtype=float)),
        _scalarize(lambda u: np.full(np.shape(u), 2.0 * c) if np.ndim(u) else 2.0 * c),
        (-math.inf, math.inf), True, 1 if c > 0 else -1,
    )


def exponential() -> Nonlinearity:
    e = _scalarize(lambda u: np.exp(np.asarray(u, dtype=float)))
    return Nonlinearity("exponential", {}, e, e, e, (0.0, math.inf), True, 1)


def custom(f: Callable, f1: Callable, f2: Callable,
           sample_interval: tuple[float, float] = (-50.0, 50.0),
           samples: int = 2001) -> Nonlinearity:
    """Wrap user-supplied maps. All three must accept numpy arrays.

    The range of f' is estimated on ``sample_interval`` and marked as not
    certified; the sign of f'' is left unknown.
    """
    xs = np.linspace(*sample_interval, samples)
    vals = np.asarray(f1(xs), dtype=float)
    return Nonlinearity(
        "custom", {}, f, f1, f2, (float(vals.min()), float(vals.max())), False, None,
    )


def make_family(spec: dict) -> Nonlinearity:
    """Build a nonlinearity from its JSON fragment, e.g. ``{"family": "softplus", "a": -12, "b": 3}``."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise InvalidParameter("nonlinearity spec needs a 'family' key")
    family = spec["family"]
    allowed = {
        "linear": {"c"},
        "softplus": {"a", "b"},
        "quadratic": {"c"},
        "exponential": set(),
    }
    if family not in allowed:
        raise InvalidParameter(f"unknown family {family!r}")
    keys = set(spec) - {"family"}
    extra = keys - allowed[family]
    if extra:
        raise InvalidParameter(f"unknown key(s) for {family}: {sorted(extra)}")
    missing = allowed[family] - keys
    if missing:
        raise InvalidParameter(f"missing key(s) for {family}: {sorted(missing)}")
    kw = {k: spec[k] for k in allowed[family]}
    for name, value in kw.items():
        if isinstance(value, bool):
            raise InvalidParameter(f"parameter {name!r} must be a number")
    return {"linear": linear, "softplus": softplus,
            "quadratic": quadratic, "exponential": exponential}[family](**kw)


@dataclass(frozen=True)
class ConvexityReport:
    """Hypothesis checks for a nonlinearity.

    For built-in families the flags come from the known sign of f''. For
    custom functions they are inferred from samples and are advisory only;
    isolation of the root of f'' at 0 cannot be decided by sampling and is
    reported as None.
    """

    globally_convex: bool
    globally_concave: bool
    f2_at_zero_nonzero: bool
    theoremB_degenerate_ok: Optional[bool]
    theoremC_applicable: bool
    sampled: bool


def _hits_free_eigenvalue(slope: float) -> bool:
    jmax = int(math.floor(math.sqrt(abs(slope) + 1.0)))
    return any(math.isclose(slope, -(j * j), rel_tol=1e-12, abs_tol=1e-12)
               for j in range(1, jmax + 1))


def classify(f: Nonlinearity, probe_interval: tuple[float, float] = (-20.0, 20.0),
             probe_count: int = 101) -> ConvexityReport:
    if probe_count < 3:
        raise InvalidParameter("probe_count must be at least 3")
    f2_zero = float(f.f2(0.0))
    nonzero = f2_zero != 0.0
    if f.f2_sign is not None:
        convex, concave, sampled = f.f2_sign > 0, f.f2_sign < 0, False
    else:
        probes = np.asarray(f.f2(np.linspace(*probe_interval, probe_count)), dtype=float)
        convex, concave, sampled = bool(np.all(probes > 0)), bool(np.all(probes < 0)), True

    if nonzero:
        degenerate_ok: Optional[bool] = False
    elif f.family == "linear":
        # f'' vanishes identically, so the root at 0 is not isolated
        degenerate_ok = False
    elif f.family == "custom":
        degenerate_ok = None if not _hits_free_eigenvalue(float(f.f1(0.0))) else False
    else:
        degenerate_ok = not _hits_free_eigenvalue(float(f.f1(0.0)))
    return ConvexityReport(convex, concave, nonzero, degenerate_ok, convex or concave, sampled)
