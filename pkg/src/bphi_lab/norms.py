"""Norm estimates and the boundary/radial quantities built on them."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .functions import AnalyticFunction, dilate
from .quadrature import (
    QuadratureSpec,
    circle_nodes,
    integrate_disk,
    sup_search,
)
from .weights import Weight

EXP_GUARD = 700.0
SPECTRAL_START = 256
SPECTRAL_CAP = 2**17
SPECTRAL_RTOL = 1e-11


class CutoffWarning(UserWarning):
    """Sup attained on the cutoff ring; the estimate may be biased low."""


@dataclass
class NormEstimate:
    value: float
    witness: complex
    spec: QuadratureSpec
    kind: str
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "value": self.value,
            "witness": [self.witness.real, self.witness.imag],
            "spec": self.spec.to_dict(),
            "meta": self.meta,
        }


def one_minus_sq(z):
    """1 - |z|^2 computed as (1 - |z|)(1 + |z|)."""
    a = np.abs(z)
    return (1.0 - a) * (1.0 + a)


# --------------------------------------------------------------------- B_phi

def bphi_quotient(f: AnalyticFunction, w: Weight, z):
    t = one_minus_sq(z)
    return t * np.abs(f.deriv(z)) / w.phi(t)


def bphi_norm(f: AnalyticFunction, w: Weight, spec: QuadratureSpec = QuadratureSpec()) -> NormEstimate:
    """sup over |z| <= 1 - delta of (1-|z|^2)|f'(z)| / phi(1-|z|^2)."""
    res = sup_search(lambda z: bphi_quotient(f, w, z), spec)
    meta = {k: res.meta[k] for k in ("n_radii", "n_angles", "levels", "evaluations", "on_cutoff")}
    return NormEstimate(res.value, res.argpoint, spec, "bphi", meta)


# ---------------------------------------------------------------- BMOA (area)

def _garsia_spectral(f: AnalyticFunction, xi: complex, n0=SPECTRAL_START, cap=SPECTRAL_CAP,
                     rtol=SPECTRAL_RTOL):
    """Area integral at xi via the Taylor coefficients of f o phi_xi.

    With phi_xi(w) = (xi - w)/(1 - conj(xi) w), the change of variables z = phi_xi(w)
    turns the kernel-weighted integral into int_D |(f o phi_xi)'|^2 (1-|w|^2) dm_2,
    which equals sum_n n/(n+1) |b_n|^2 for the coefficients b_n. The b_n come
    from an FFT of boundary samples; the sample count doubles until the sum
    settles to ``rtol``. Returns (value, samples used, converged).
    """
    xc = np.conj(xi)

    def samples(w):
        z = (xi - w) / (1.0 - xc * w)
        return f(z / np.abs(z))

    n = n0
    vals = samples(circle_nodes(n))
    prev = None
    while True:
        b = np.fft.fft(vals) / n
        k = np.arange(1, n // 2)
        cur = float(np.sum(k / (k + 1.0) * np.abs(b[1 : n // 2]) ** 2))
        if prev is not None and abs(cur - prev) <= rtol * cur:
            return cur, n, True
        if n >= cap:
            return cur, n, False
        odd = samples(np.exp(2j * np.pi * (2 * np.arange(n) + 1) / (2 * n)))
        merged = np.empty(2 * n, dtype=complex)
        merged[0::2], merged[1::2] = vals, odd
        vals, prev, n = merged, cur, 2 * n


def area_theta_nodes(xi: complex, spec: QuadratureSpec) -> int:
    """Angular nodes resolving the kernel peak: >= max(64, 16/(1-|xi|)), power of two."""
    need = max(spec.n_theta, 64, 16.0 / (1.0 - abs(xi)))
    return int(2 ** math.ceil(math.log2(need)))


def _garsia_area(f: AnalyticFunction, xi: complex, spec: QuadratureSpec) -> float:
    xc = np.conj(xi)
    s2 = one_minus_sq(xi)

    def h(z):
        return np.abs(f.deriv(z)) ** 2 * one_minus_sq(z) * s2 / np.abs(1.0 - xc * z) ** 2

    return integrate_disk(h, spec, area_theta_nodes(xi, spec))


def _spectral_target(f: AnalyticFunction, spec: QuadratureSpec) -> AnalyticFunction:
    # boundary samples need f continuous on T; singular members use f_{1-delta}
    return dilate(f, 1.0 - spec.delta) if f.singular_on_circle else f


def garsia_integral(f: AnalyticFunction, xi: complex, spec: QuadratureSpec = QuadratureSpec(),
                    method: str = "spectral") -> float:
    """int_D |f'(z)|^2 (1-|z|^2)(1-|xi|^2)/|1-conj(xi) z|^2 dm_2(z)."""
    xi = complex(xi)
    if method == "spectral":
        return _garsia_spectral(_spectral_target(f, spec), xi)[0]
    if method == "area":
        return _garsia_area(f, xi, spec)
    raise ValueError(f"unknown method {method!r}")


def xi_search_radii(spec: QuadratureSpec) -> np.ndarray:
    """Coarse |xi| rings: 9 uniform plus two per octave toward the cutoff."""
    top = 1.0 - spec.delta
    m = max(2, int(math.ceil(2 * math.log2(0.5 / spec.delta))) + 1)
    return np.unique(np.concatenate([np.linspace(0.0, top, 9), 1.0 - np.geomspace(0.5, spec.delta, m)]))


def bmoa_garsia_norm(f: AnalyticFunction, spec: QuadratureSpec = QuadratureSpec(),
                     method: str = "spectral", n_angles: int = 32) -> NormEstimate:
    """Square root of sup over |xi| <= 1 - delta of the kernel-weighted area integral.

    The ring profile (best value on each coarse |xi| ring) is kept in ``meta``
    so plateau or growth toward the cutoff is visible.
    """
    memo: dict[complex, float] = {}
    unconverged = []
    target = _spectral_target(f, spec)

    def one(xi):
        xi = complex(xi)
        if xi not in memo:
            if method == "spectral":
                val, n, ok = _garsia_spectral(target, xi)
                if not ok:
                    unconverged.append(xi)
            else:
                val = garsia_integral(f, xi, spec, method)
            memo[xi] = val
        return memo[xi]

    def objective(xis):
        xis = np.asarray(xis)
        return np.array([one(x) for x in xis.ravel()]).reshape(xis.shape)

    res = sup_search(objective, spec, radii=xi_search_radii(spec), n_angles=n_angles)
    meta = {
        "method": method,
        "sup_integral": res.value,
        "on_cutoff": res.meta["on_cutoff"],
        "ring_profile": [(r, math.sqrt(v)) for r, v in res.meta["coarse_ring_max"]],
        "xi_evaluations": len(memo),
        "unconverged": len(unconverged),
        "surrogate_dilation": (1.0 - spec.delta) if (method == "spectral" and target is not f) else None,
    }
    if res.meta["on_cutoff"]:
        warnings.warn(f"{f.label}: BMOA sup attained on the cutoff ring |xi| = {1 - spec.delta}",
                      CutoffWarning, stacklevel=2)
    return NormEstimate(math.sqrt(max(res.value, 0.0)), res.argpoint, spec, "bmoa_garsia", meta)


# --------------------------------------------------------------- BMO over arcs

def bmo_arc_norm(f: AnalyticFunction, n_theta: int = 256, min_points: int = 4,
                 spec: QuadratureSpec = QuadratureSpec()) -> NormEstimate:
    """Sup of (1/m(I)) int_I |f - f_I| dm over dyadic arcs of the sampled circle.

    Arc lengths are n_theta / 2^j samples down to ``min_points``; every rotation
    by one sample pitch is included.
    """
    vals = np.asarray(f(circle_nodes(n_theta)), dtype=complex)
    best, best_center, best_len = 0.0, 0.0, n_theta
    length = n_theta
    while length >= min_points:
        if length == n_theta:
            osc = np.array([np.mean(np.abs(vals - vals.mean()))])
        else:
            ext = np.concatenate([vals, vals[: length - 1]])
            win = np.lib.stride_tricks.sliding_window_view(ext, length)
            osc = np.empty(n_theta)
            step = max(1, 4_000_000 // length)
            for s in range(0, n_theta, step):
                block = win[s : s + step]
                osc[s : s + step] = np.mean(np.abs(block - block.mean(axis=1, keepdims=True)), axis=1)
        k = int(np.argmax(osc))
        if osc[k] > best:
            best, best_len = float(osc[k]), length
            best_center = 2.0 * np.pi * (k + (length - 1) / 2.0) / n_theta
        length //= 2
    witness = complex(np.exp(1j * best_center))
    return NormEstimate(best, witness, spec, "bmo_arc", {"n_theta": n_theta, "arc_points": best_len})


# ------------------------------------------------------- distribution function

@dataclass
class DistributionSample:
    lambdas: np.ndarray
    E: np.ndarray
    r: float
    n_theta: int
    max_modulus: float = 0.0

    def to_dict(self) -> dict:
        return {"r": self.r, "n_theta": self.n_theta, "max_modulus": self.max_modulus,
                "lambda": self.lambdas.tolist(), "E": self.E.tolist()}

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("lambda,E\n")
            for lam, e in zip(self.lambdas, self.E):
                fh.write(f"{lam!r},{e!r}\n")


def boundary_moduli(f: AnalyticFunction, r: float, n_theta: int) -> np.ndarray:
    return np.abs(f(r * circle_nodes(n_theta)))


def distribution_function(f: AnalyticFunction, r: float, lambdas=None, n_theta: int = 256,
                          n_lambda: int = 2000) -> DistributionSample:
    """E(lambda) = m{zeta in T : |f(r zeta)| > lambda} from equispaced boundary nodes.

    The default lambda grid is ``n_lambda`` uniform points on [0, 1.05 max|f|].
    """
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    mod = boundary_moduli(f, r, n_theta)
    top = float(mod.max())
    if lambdas is None:
        lambdas = np.linspace(0.0, 1.05 * top if top > 0 else 1.0, n_lambda)
    lambdas = np.asarray(lambdas, dtype=float)
    if np.any(np.diff(lambdas) < 0) or np.any(lambdas < 0):
        raise ValueError("lambda grid must be ascending and non-negative")
    srt = np.sort(mod)
    # a few ulps of slack so |r zeta| = r is not pushed above lambda = r by rounding
    E = (n_theta - np.searchsorted(srt, lambdas * (1.0 + 4 * np.finfo(float).eps), side="right")) / n_theta
    return DistributionSample(lambdas, E, float(r), int(n_theta), top)


def layer_cake_moment(sample: DistributionSample, p: float) -> float:
    """p int_0^inf lambda^(p-1) E(lambda) d lambda, trapezoid over the sample grid."""
    if p <= 0:
        raise ValueError("p must be positive")
    if sample.E[-1] > 1e-6:
        warnings.warn("lambda grid ends before E vanishes; moment is truncated", stacklevel=2)
    lam, E = sample.lambdas, sample.E
    if p >= 1:
        return float(np.trapezoid(p * lam ** (p - 1.0) * E, lam))
    # lambda^(p-1) is singular at 0: integrate E against d(lambda^p) instead
    return float(np.sum(np.diff(lam**p) * 0.5 * (E[1:] + E[:-1])))


def estimate_jn_constants(sample: DistributionSample, norm: float, lo: float | None = None,
                          hi: float = 0.3):
    """Fit E(lambda) <= C exp(-c lambda / norm) where lo < E < hi.

    c_hat comes from a least-squares line through log E. C_hat is then the
    smallest constant for which the bound holds at every fitted point, so on
    exactly log-linear data it is the true intercept. The default ``lo`` is
    20 / n_theta: below it E counts only a handful of nodes and the staircase
    biases the slope. Returns (c_hat, C_hat).
    """
    if lo is None:
        lo = 20.0 / sample.n_theta
    E = np.asarray(sample.E)
    mask = (E > lo) & (E < hi)
    if mask.sum() < 4:
        raise ValueError(f"only {int(mask.sum())} usable points for the tail fit")
    lam, logE = sample.lambdas[mask], np.log(E[mask])
    slope, _ = np.polyfit(lam, logE, 1)
    return float(-slope * norm), float(np.exp(np.max(logE - slope * lam)))


# ------------------------------------------------------ exponential integrability

def envelope(w: Weight, r: float) -> float:
    """sqrt(g(1 - r^2))."""
    return math.sqrt(w.g((1.0 - r) * (1.0 + r)))


def exp_integral(f: AnalyticFunction, w: Weight, r: float, gamma: float, n_theta: int = 256,
                 norm: float | None = None, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """int_T exp(gamma |f(r zeta)| / (||f||_{B_phi} sqrt(g(1-r^2)))) dm.

    Returns +inf if any exponent exceeds 700.
    """
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    if abs(f(0.0)) > 1e-14:
        raise ValueError(f"{f.label}: needs f(0) = 0")
    if norm is None:
        norm = bphi_norm(f, w, spec).value
    if not norm > 0:
        raise ValueError(f"{f.label}: B_phi norm must be positive")
    expo = gamma * boundary_moduli(f, r, n_theta) / (norm * envelope(w, r))
    if expo.max() > EXP_GUARD:
        return math.inf
    return float(np.mean(np.exp(expo)))


# ------------------------------------------------------------ radial growth

@dataclass
class RayProfile:
    zeta: complex
    r_grid: np.ndarray
    values: np.ndarray
    ratios: np.ndarray

    def to_dict(self) -> dict:
        return {"zeta": [self.zeta.real, self.zeta.imag], "r": self.r_grid.tolist(),
                "values": self.values.tolist(), "ratios": self.ratios.tolist()}


def radial_min(f: AnalyticFunction, zeta: complex, r: float, n: int = 64) -> float:
    """mu(r, zeta): min of |f(rho zeta)| over an n-point grid on [r, (r+1)/2]."""
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    if n < 16:
        raise ValueError("radial_min needs n >= 16")
    rho = np.linspace(r, 0.5 * (r + 1.0), n)
    return float(np.min(np.abs(f(rho * zeta))))


def loglog(r: float) -> float:
    """log|log(1 - r)|, positive for r > 1 - 1/e."""
    if not 1.0 - math.exp(-1.0) < r < 1.0:
        raise ValueError(f"log|log(1-r)| needs 1 - 1/e < r < 1, got {r}")
    return math.log(-math.log1p(-r))


def growth_ratio(f: AnalyticFunction, w: Weight, zeta, r: float):
    """|f(r zeta)| / (log|log(1-r)| sqrt(g(1-r^2))); zeta may be an array of rays."""
    denom = loglog(r) * envelope(w, r)
    out = np.abs(f(r * np.asarray(zeta, dtype=complex))) / denom
    return out[()] if np.ndim(out) == 0 else out


def ray_profile(f: AnalyticFunction, w: Weight, zeta: complex, r_grid) -> RayProfile:
    r_grid = np.asarray(r_grid, dtype=float)
    values = np.array([abs(f(r * zeta)) for r in r_grid])
    ratios = np.array([growth_ratio(f, w, zeta, r) for r in r_grid])
    return RayProfile(complex(zeta), r_grid, values, ratios)


def mu_envelope(w: Weight, r: float) -> float:
    """sqrt(g((1-r)(3+r)/4)) log|log(1-r)|, the scale bounding mu(r, zeta)."""
    return math.sqrt(w.g((1.0 - r) * (3.0 + r) / 4.0)) * loglog(r)
