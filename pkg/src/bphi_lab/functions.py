"""Corpus of analytic functions on the unit disk.

Every function evaluates and differentiates in closed form and is vectorised
over numpy arrays of complex points. Scalars in, scalars out.
"""

from __future__ import annotations

import csv
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SERIES_RTOL = 1e-14
DEFAULT_LACUNARY_DEPTH = 16


class DomainError(ValueError):
    """Point outside the region where the function is analytic."""


def _as_complex(z):
    return np.asarray(z, dtype=complex)


def _unwrap(a):
    return a[()] if a.ndim == 0 else a


class AnalyticFunction(ABC):
    """Analytic function on D with an exact derivative.

    Subclasses implement ``_eval`` and ``_deriv`` on complex arrays that have
    already passed the domain check.
    """

    #: True when the function has a singularity on the unit circle.
    singular_on_circle = False

    @property
    @abstractmethod
    def label(self) -> str: ...

    @abstractmethod
    def _eval(self, z: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def _deriv(self, z: np.ndarray) -> np.ndarray: ...

    def _check_domain(self, z: np.ndarray) -> None:
        if self.singular_on_circle and z.size and np.max(np.abs(z)) >= 1.0:
            raise DomainError(f"{self.label}: evaluation needs |z| < 1")

    def __call__(self, z):
        z = _as_complex(z)
        self._check_domain(z)
        return _unwrap(self._eval(z))

    def deriv(self, z):
        z = _as_complex(z)
        self._check_domain(z)
        return _unwrap(self._deriv(z))


@dataclass(frozen=True)
class Monomial(AnalyticFunction):
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("monomial degree must be >= 0")

    @property
    def label(self) -> str:
        return f"mono:{self.n}"

    def _eval(self, z):
        return z**self.n if self.n else np.ones_like(z)

    def _deriv(self, z):
        if self.n == 0:
            return np.zeros_like(z)
        return self.n * z ** (self.n - 1)


def _truncation_index(mags: np.ndarray, rtol: float) -> int:
    """Smallest N with sum_{k>N} mags[k] <= rtol * sum_{k<=N} mags[k]."""
    if mags.size == 0:
        return -1
    partial = np.cumsum(mags)
    tail = np.concatenate([np.cumsum(mags[::-1])[::-1][1:], [0.0]])
    ok = np.nonzero(tail <= rtol * partial)[0]
    return int(ok[0]) if ok.size else mags.size - 1


def _horner(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    acc = np.full(z.shape, coeffs[-1], dtype=complex)
    for c in coeffs[-2::-1]:
        acc = acc * z + c
    return acc


@dataclass(frozen=True)
class PowerSeries(AnalyticFunction):
    """sum_k a_k z^k from an explicit coefficient list.

    The sum is truncated at the first index N whose coefficient majorant tail
    sum_{k>N} |a_k| rho^k is below 1e-14 of the majorant partial sum, rho being
    the largest |z| in the batch. ``tail_radius`` is the radius of the closed
    disk on which the coefficients are trusted; evaluation beyond it raises.
    """

    coeffs: tuple
    tail_radius: float = 1.0
    name: str = "series"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))
        if not self.coeffs:
            raise ValueError("power series needs at least one coefficient")

    @property
    def label(self) -> str:
        return self.name

    @classmethod
    def from_csv(cls, path, tail_radius: float = 1.0) -> "PowerSeries":
        """Load ``index, re, im`` rows; missing indices are zero, a header row is skipped."""
        entries = {}
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    k = int(row[0])
                except ValueError:
                    continue
                im = float(row[2]) if len(row) > 2 else 0.0
                entries[k] = complex(float(row[1]), im)
        if not entries or min(entries) < 0:
            raise ValueError(f"{path}: no usable (index, re, im) rows")
        coeffs = [0j] * (max(entries) + 1)
        for k, c in entries.items():
            coeffs[k] = c
        return cls(tuple(coeffs), tail_radius, name=f"series:{path}")

    def _check_domain(self, z):
        if z.size and np.max(np.abs(z)) > self.tail_radius:
            raise DomainError(f"{self.label}: |z| exceeds tail radius {self.tail_radius}")

    def _sum(self, coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
        rho = float(np.max(np.abs(z))) if z.size else 0.0
        mags = np.abs(coeffs) * rho ** np.arange(coeffs.size)
        n = _truncation_index(mags, SERIES_RTOL)
        return _horner(coeffs[: n + 1], z)

    def _eval(self, z):
        return self._sum(np.array(self.coeffs), z)

    def _deriv(self, z):
        a = np.array(self.coeffs)
        if a.size == 1:
            return np.zeros_like(z)
        return self._sum(a[1:] * np.arange(1, a.size), z)


@dataclass(frozen=True)
class LogOneMinusZ(AnalyticFunction):
    """Principal branch of log(1 - z); in the Bloch space."""

    singular_on_circle = True

    @property
    def label(self) -> str:
        return "log1mz"

    def _eval(self, z):
        return np.log1p(-z)

    def _deriv(self, z):
        return -1.0 / (1.0 - z)


@dataclass(frozen=True)
class LogSquaredOneMinusZ(AnalyticFunction):
    """log(1 - z)**2; outside the Bloch space."""

    singular_on_circle = True

    @property
    def label(self) -> str:
        return "log2_1mz"

    def _eval(self, z):
        return np.log1p(-z) ** 2

    def _deriv(self, z):
        return -2.0 * np.log1p(-z) / (1.0 - z)


@dataclass(frozen=True)
class LacunarySeries(AnalyticFunction):
    """sum_{k<K} z^(2^k), the Hadamard-gap polynomial of depth K."""

    depth: int = DEFAULT_LACUNARY_DEPTH

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("lacunary depth must be >= 1")

    @property
    def label(self) -> str:
        return f"lacunary:{self.depth}"

    def _eval(self, z):
        out = np.zeros_like(z)
        p = z.copy()
        for _ in range(self.depth):
            out += p
            p = p * p
        return out

    def _deriv(self, z):
        # q holds z^(2^k - 1), p holds z^(2^k)
        out = np.zeros_like(z)
        q = np.ones_like(z)
        p = z.copy()
        for k in range(self.depth):
            out += (2.0**k) * q
            q = q * p
            p = p * p
        return out


@dataclass(frozen=True)
class Scaled(AnalyticFunction):
    inner: AnalyticFunction
    factor: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "factor", complex(self.factor))

    @property
    def singular_on_circle(self):
        return self.inner.singular_on_circle

    @property
    def label(self) -> str:
        if isinstance(self.inner, Monomial) and self.inner.n == 0:
            return f"const:{_fmt_complex(self.factor)}"
        return f"scale:{_fmt_complex(self.factor)}:{self.inner.label}"

    def _check_domain(self, z):
        self.inner._check_domain(z)

    def _eval(self, z):
        return self.factor * self.inner._eval(z)

    def _deriv(self, z):
        return self.factor * self.inner._deriv(z)


@dataclass(frozen=True)
class DilatedFunction(AnalyticFunction):
    """f_r(z) = f(r z); analytic on the closed disk."""

    base: AnalyticFunction
    r: float = field(default=0.5)

    def __post_init__(self):
        if not 0.0 < self.r < 1.0:
            raise ValueError(f"dilation radius must lie in (0, 1), got {self.r}")

    @property
    def label(self) -> str:
        return f"dilate({self.r!r},{self.base.label})"

    def _check_domain(self, z):
        self.base._check_domain(self.r * z)

    def _eval(self, z):
        return self.base._eval(self.r * z)

    def _deriv(self, z):
        return self.r * self.base._deriv(self.r * z)


def dilate(f: AnalyticFunction, r: float) -> DilatedFunction:
    return DilatedFunction(f, float(r))


def _fmt_complex(c: complex) -> str:
    if c.imag == 0:
        return repr(c.real)
    return repr(c).strip("()")


def parse_function(label: str) -> AnalyticFunction:
    """Build a corpus member from its label.

    Accepted forms: ``mono:<n>``, ``log1mz``, ``log2_1mz``, ``lacunary[:<K>]``,
    ``series:<csv path>``, ``const:<c>``, ``scale:<c>:<label>``.
    """
    head, _, rest = label.partition(":")
    try:
        if head == "mono":
            return Monomial(int(rest))
        if head == "log1mz" and not rest:
            return LogOneMinusZ()
        if head == "log2_1mz" and not rest:
            return LogSquaredOneMinusZ()
        if head == "lacunary":
            return LacunarySeries(int(rest) if rest else DEFAULT_LACUNARY_DEPTH)
        if head == "series" and rest:
            if not Path(rest).is_file():
                raise ValueError(f"coefficient file not found: {rest}")
            return PowerSeries.from_csv(rest)
        if head == "const":
            return Scaled(Monomial(0), complex(rest.replace(" ", "")))
        if head == "scale":
            c, _, inner = rest.partition(":")
            return Scaled(parse_function(inner), complex(c.replace(" ", "")))
    except (TypeError, ValueError) as exc:
        raise ValueError(f"bad function label {label!r}: {exc}") from None
    raise ValueError(f"unknown function label {label!r}")


BUILTIN_LABELS = ("mono:<n>", "log1mz", "log2_1mz", "lacunary:<K>", "series:<path>", "const:<c>", "scale:<c>:<label>")
