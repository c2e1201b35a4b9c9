"""Circle and disk quadrature against normalized measure, and sup search over D."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

RADIAL_RULES = ("gauss-legendre", "midpoint")


@dataclass(frozen=True)
class QuadratureSpec:
    """Discretization of the circle, the disk and the sup search.

    ``delta`` confines every sup search to |z| <= 1 - delta.
    """

    n_theta: int = 256
    n_rho: int = 128
    radial_rule: str = "gauss-legendre"
    delta: float = 1e-3
    refine: int = 3

    def __post_init__(self):
        if self.n_theta < 8 or self.n_rho < 4:
            raise ValueError("need n_theta >= 8 and n_rho >= 4")
        if self.radial_rule not in RADIAL_RULES:
            raise ValueError(f"radial rule must be one of {RADIAL_RULES}")
        if not 0.0 < self.delta < 0.5:
            raise ValueError("delta must lie in (0, 0.5)")
        if self.refine < 0:
            raise ValueError("refine must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "QuadratureSpec":
        known = {k: d[k] for k in ("n_theta", "n_rho", "radial_rule", "delta", "refine") if k in d}
        return cls(**known)

    @classmethod
    def from_json(cls, text: str) -> "QuadratureSpec":
        return cls.from_dict(json.loads(text))


@dataclass
class SupResult:
    value: float
    argpoint: complex
    meta: dict = field(default_factory=dict)


class QuadratureError(ArithmeticError):
    pass


def circle_nodes(n: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(n) / n)


def integrate_circle(h, n_theta: int):
    """Trapezoid rule for int_T h dm at ``n_theta`` equispaced nodes.

    Exact for trigonometric polynomials of degree < n_theta.
    """
    vals = np.asarray(h(circle_nodes(n_theta)))
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("non-finite integrand on the circle")
    out = vals.sum() / n_theta
    return out.real if np.isrealobj(vals) else complex(out)


def radial_rule(n: int, rule: str = "gauss-legendre", a: float = 0.0, b: float = 1.0):
    """Nodes and weights for int_a^b dr."""
    if rule == "gauss-legendre":
        x, w = np.polynomial.legendre.leggauss(n)
    elif rule == "midpoint":
        x = -1.0 + (2.0 * np.arange(n) + 1.0) / n
        w = np.full(n, 2.0 / n)
    else:
        raise ValueError(f"unknown radial rule {rule!r}")
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def integrate_interval(func, a: float, b: float, n: int = 64) -> float:
    """Gauss-Legendre on [a, b]; shares the radial rule of ``integrate_disk``."""
    x, w = radial_rule(n, "gauss-legendre", a, b)
    return float(np.dot(w, func(x)))


def disk_rule(spec: QuadratureSpec):
    """Radii and weights with sum(w * 2 rho) == 1, so constants integrate exactly."""
    rho, w = radial_rule(spec.n_rho, spec.radial_rule)
    w = 2.0 * rho * w
    return rho, w / w.sum()


def integrate_disk(h, spec: QuadratureSpec = QuadratureSpec(), n_theta: int | None = None) -> float:
    """int_D h dm_2 on a tensor polar grid (normalized area measure)."""
    n_theta = n_theta or spec.n_theta
    rho, w = disk_rule(spec)
    z = rho[:, None] * circle_nodes(n_theta)[None, :]
    vals = np.asarray(h(z))
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("non-finite integrand in the disk")
    return float(np.dot(w, vals.real.mean(axis=1)))


def search_radii(spec: QuadratureSpec, n_uniform: int | None = None, per_octave: int = 4) -> np.ndarray:
    """Uniform radii on [0, 1-delta] merged with a geometric cluster toward the cutoff."""
    top = 1.0 - spec.delta
    n_uniform = n_uniform or spec.n_rho
    m = max(2, int(math.ceil(per_octave * math.log2(0.5 / spec.delta))) + 1)
    geo = 1.0 - np.geomspace(0.5, spec.delta, m)
    return np.unique(np.concatenate([np.linspace(0.0, top, n_uniform), geo]))


def _eval_checked(objective, z):
    vals = np.asarray(objective(z), dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = np.asarray(z).ravel()[~np.isfinite(vals.ravel())][0]
        raise QuadratureError(f"non-finite objective at z = {bad}")
    return vals


def sup_search(objective, spec: QuadratureSpec = QuadratureSpec(), radii=None,
               n_angles: int | None = None, half_width: int = 2) -> SupResult:
    """Maximize a real objective over |z| <= 1 - delta.

    A coarse polar grid (rows = radii, columns = angles) is scanned in row-major
    order, ties going to the first node found. Then ``spec.refine`` levels of a
    (2*half_width+1)^2 stencil are centred on the running best, halving the
    pitch each level. The objective takes and returns arrays.
    """
    top = 1.0 - spec.delta
    radii = search_radii(spec) if radii is None else np.asarray(radii, dtype=float)
    n_angles = n_angles or spec.n_theta
    thetas = 2.0 * np.pi * np.arange(n_angles) / n_angles
    z = radii[:, None] * np.exp(1j * thetas)[None, :]
    vals = _eval_checked(objective, z)
    flat = int(np.argmax(vals))
    i, j = divmod(flat, n_angles)
    best_val = float(vals[i, j])
    best_rho, best_theta = float(radii[i]), float(thetas[j])
    best_z = complex(z[i, j])

    gaps = np.diff(radii)
    d_rho = max(gaps[i - 1] if i > 0 else 0.0, gaps[i] if i < gaps.size else 0.0)
    d_theta = 2.0 * np.pi / n_angles
    offsets = np.arange(-half_width, half_width + 1)
    n_evals = vals.size
    for level in range(1, spec.refine + 1):
        p_rho, p_theta = d_rho / 2**level, d_theta / 2**level
        rr = np.clip(best_rho + offsets * p_rho, 0.0, top)
        tt = best_theta + offsets * p_theta
        cand = rr[:, None] * np.exp(1j * tt)[None, :]
        cv = _eval_checked(objective, cand)
        n_evals += cv.size
        k = int(np.argmax(cv))
        a, b = divmod(k, offsets.size)
        if cv[a, b] > best_val:
            best_val = float(cv[a, b])
            best_rho, best_theta = float(rr[a]), float(tt[b])
            best_z = complex(cand[a, b])
    meta = {
        "n_radii": int(radii.size),
        "n_angles": int(n_angles),
        "levels": int(spec.refine),
        "evaluations": int(n_evals),
        "on_cutoff": bool(abs(best_z) >= top - 1e-12),
        "coarse_ring_max": [(float(r), float(v)) for r, v in zip(radii, vals.max(axis=1))],
    }
    return SupResult(best_val, best_z, meta)
