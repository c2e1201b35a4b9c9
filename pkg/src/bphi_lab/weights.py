"""Weights phi on (0, 1] and their growth integral g(x) = int_x^1 phi(t)^2 / t dt."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

G_ABS_TOL = 1e-10
MAX_DEPTH = 40

# 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1]
_XK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_WEIGHTS_K = np.concatenate([_WK[:-1], _WK[::-1]])


class DivergenceError(ArithmeticError):
    """Adaptive quadrature failed to converge; the growth integral looks infinite."""


def _gk15(func, a, b):
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    y = func(c + h * _NODES)
    if not np.all(np.isfinite(y)):
        raise DivergenceError(f"non-finite integrand on [{a}, {b}]")
    k = h * np.dot(_WEIGHTS_K, y)
    # Gauss nodes are the odd-indexed Kronrod nodes 1, 3, 5, 7(centre), 9, 11, 13
    yg = y[1::2]
    gauss = h * np.dot(np.concatenate([_WG[:-1], _WG[::-1]]), yg)
    return k, abs(k - gauss)


def adaptive_quad(func, a: float, b: float, abs_tol: float = G_ABS_TOL,
                  max_depth: int = MAX_DEPTH) -> float:
    """Integrate ``func`` over [a, b] by recursive bisection with a G7-K15 panel rule.

    A panel is accepted when its error estimate drops below its share of
    ``abs_tol``. Hitting ``max_depth`` on any panel raises DivergenceError.
    """
    total = 0.0
    stack = [(a, b, 0)]
    while stack:
        lo, hi, depth = stack.pop()
        val, err = _gk15(func, lo, hi)
        share = abs_tol * (hi - lo) / (b - a)
        if err <= max(share, 50 * np.finfo(float).eps * abs(val)):
            total += val
        elif depth >= max_depth:
            raise DivergenceError(f"no convergence near [{lo:.3g}, {hi:.3g}] after {depth} bisections")
        else:
            mid = 0.5 * (lo + hi)
            stack.append((mid, hi, depth + 1))
            stack.append((lo, mid, depth + 1))
    return total


class Weight:
    """Positive continuous weight on (0, 1]."""

    label: str = "weight"

    def phi(self, t):
        t = np.asarray(t, dtype=float)
        if np.any((t <= 0.0) | (t > 1.0)):
            raise ValueError(f"{self.label}: phi needs 0 < t <= 1")
        out = self._phi(t)
        return out[()] if out.ndim == 0 else out

    def _phi(self, t):
        raise NotImplementedError

    def _breakpoints(self, x: float) -> list[float]:
        return [x, 1.0]

    def g_quad(self, x: float, abs_tol: float = G_ABS_TOL) -> float:
        """Growth integral by adaptive quadrature, split at interpolation knots."""
        _check_x(x)
        pts = self._breakpoints(x)
        tol = abs_tol / max(len(pts) - 1, 1)
        return sum(
            adaptive_quad(lambda t: self._phi(t) ** 2 / t, lo, hi, tol)
            for lo, hi in zip(pts[:-1], pts[1:])
        )

    def g(self, x: float) -> float:
        return self.g_quad(x)


def _check_x(x):
    if not 0.0 < x < 1.0 + 1e-15:
        raise ValueError(f"growth integral needs 0 < x <= 1, got {x}")


@dataclass(frozen=True)
class PowerWeight(Weight):
    """phi(t) = t**alpha; alpha = 0 is the Bloch weight."""

    alpha: float = 0.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("power weight exponent must be >= 0")

    @property
    def label(self) -> str:
        return f"power:{self.alpha!r}"

    def _phi(self, t):
        return t**self.alpha if self.alpha else np.ones_like(t)

    def g(self, x: float) -> float:
        _check_x(x)
        if x >= 1.0:
            return 0.0
        if self.alpha == 0:
            return -math.log(x)
        two_a = 2.0 * self.alpha
        # (1 - x^{2a}) / 2a without cancellation for small a log x
        return -math.expm1(two_a * math.log(x)) / two_a


@dataclass(frozen=True)
class Tabulated(Weight):
    """Weight given at knots, interpolated linearly in (log t, log phi).

    Outside the knot range the end segments are extended, so a tabulated
    power law reproduces t**alpha everywhere.
    """

    knots: tuple
    values: tuple
    name: str = field(default="table")

    def __post_init__(self):
        t = np.asarray(self.knots, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.size < 2 or t.size != v.size:
            raise ValueError("tabulated weight needs >= 2 matching knots and values")
        if np.any(np.diff(t) <= 0) or t[0] <= 0 or t[-1] > 1:
            raise ValueError("knots must be strictly increasing in (0, 1]")
        if np.any(v <= 0):
            raise ValueError("weight values must be positive")
        object.__setattr__(self, "knots", tuple(t))
        object.__setattr__(self, "values", tuple(v))

    @property
    def label(self) -> str:
        return self.name

    @classmethod
    def from_csv(cls, path) -> "Tabulated":
        rows = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                try:
                    rows.append((float(row[0]), float(row[1])))
                except (ValueError, IndexError):
                    continue
        rows.sort()
        return cls(tuple(r[0] for r in rows), tuple(r[1] for r in rows), name=f"table:{path}")

    def _phi(self, t):
        lt, lv = np.log(self.knots), np.log(self.values)
        u = np.log(t)
        out = np.interp(u, lt, lv)
        lo, hi = u < lt[0], u > lt[-1]
        out = np.where(lo, lv[0] + (u - lt[0]) * (lv[1] - lv[0]) / (lt[1] - lt[0]), out)
        out = np.where(hi, lv[-1] + (u - lt[-1]) * (lv[-1] - lv[-2]) / (lt[-1] - lt[-2]), out)
        return np.exp(out)

    def _breakpoints(self, x):
        inner = [k for k in self.knots if x < k < 1.0]
        return [x, *inner, 1.0]


def phi(w: Weight, t):
    return w.phi(t)


def g(w: Weight, x: float) -> float:
    """Growth integral int_x^1 phi^2(t)/t dt (closed form when one exists)."""
    return w.g(x)


@dataclass
class GrowthIntegral:
    """g for a fixed weight with a chosen strategy and a memo of computed values."""

    weight: Weight
    strategy: str = "auto"
    cache: dict = field(default_factory=dict, repr=False)

    def __call__(self, x: float) -> float:
        if x not in self.cache:
            if self.strategy == "adaptive-quadrature":
                self.cache[x] = self.weight.g_quad(x)
            else:
                self.cache[x] = self.weight.g(x)
        return self.cache[x]


def check_integrable(w: Weight, probes) -> dict:
    """Evaluate g at each probe; failures are reported, never raised."""
    rows = []
    for x in probes:
        try:
            val = float(w.g(float(x)))
            ok = math.isfinite(val)
            rows.append({"x": float(x), "g": val, "finite": ok, "error": None})
        except (DivergenceError, ValueError) as exc:
            rows.append({"x": float(x), "g": math.inf, "finite": False, "error": str(exc)})
    return {"weight": w.label, "probes": rows, "integrable": all(r["finite"] for r in rows)}


def parse_weight(label: str) -> Weight:
    """``power:<alpha>`` or ``table:<csv path>``."""
    head, _, rest = label.partition(":")
    if head == "power":
        try:
            return PowerWeight(float(rest))
        except ValueError as exc:
            raise ValueError(f"bad weight label {label!r}: {exc}") from None
    if head == "table" and rest:
        try:
            return Tabulated.from_csv(rest)
        except (OSError, ValueError) as exc:
            raise ValueError(f"bad weight table {rest!r}: {exc}") from None
    raise ValueError(f"unknown weight label {label!r}")
