"""Relevance measures on the real target domain.

A relevance measure assigns a non-negative, finite mass to every interval of
the target domain.  All intervals are half-open ``(a, b]`` so that adjacent
intervals partition exactly.  Four concrete measures are provided:

* :class:`NormalRelevance` - a normal distribution (always total mass 1)
* :class:`UniformRelevance` - Lebesgue measure restricted to ``[lo, hi]``
* :class:`HistogramRelevance` - piecewise-constant density on bins
* :class:`PointMassRelevance` - weighted atoms; with unit weights this is the
  count measure used for classification targets

Measure objects are immutable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Union

import numpy as np
from scipy.special import erfc, ndtri

__all__ = [
    "MeasureError",
    "UnsupportedMeasureError",
    "NormalRelevance",
    "UniformRelevance",
    "HistogramRelevance",
    "PointMassRelevance",
    "RelevanceMeasure",
    "measure_interval",
    "cdf",
    "normalize",
    "relevance_function",
    "is_normalized",
    "measure_from_dict",
    "measure_from_json",
]

_SQRT2 = math.sqrt(2.0)
_NORM_TOL = 1e-9


class MeasureError(ValueError):
    """Raised for relevance measures that cannot be used (bad parameters,
    zero or infinite total mass)."""


class UnsupportedMeasureError(MeasureError):
    """Raised when an operation needs a density and the measure has none."""


def _frozen_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float).ravel()
    if not np.all(np.isfinite(arr)):
        raise MeasureError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class NormalRelevance:
    """Normal distribution used as a relevance measure (total mass 1)."""

    mean: float
    std: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.std)):
            raise MeasureError("normal relevance parameters must be finite")
        if self.std <= 0:
            raise MeasureError(f"std must be positive, got {self.std}")

    @property
    def total_mass(self) -> float:
        return 1.0

    @property
    def breakpoints(self) -> np.ndarray:
        return np.empty(0)

    @property
    def has_atoms(self) -> bool:
        return False

    def _z(self, x):
        return (np.asarray(x, dtype=float) - self.mean) / (self.std * _SQRT2)

    def cdf(self, x):
        return 0.5 * erfc(-self._z(x))

    def sf(self, x):
        return 0.5 * erfc(self._z(x))

    def cdf_left(self, x):
        return self.cdf(x)

    def measure_interval(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        # upper tail via survival function keeps relative accuracy
        upper = self.sf(a) - self.sf(b)
        lower = self.cdf(b) - self.cdf(a)
        out = np.where(a >= self.mean, upper, lower)
        return np.maximum(out, 0.0)

    def density(self, x):
        z = (np.asarray(x, dtype=float) - self.mean) / self.std
        return np.exp(-0.5 * z * z) / (self.std * math.sqrt(2.0 * math.pi))

    def log_density(self, x):
        z = (np.asarray(x, dtype=float) - self.mean) / self.std
        return -0.5 * z * z - math.log(self.std * math.sqrt(2.0 * math.pi))

    def max_density(self) -> float:
        return 1.0 / (self.std * math.sqrt(2.0 * math.pi))

    def tail_bounds(self, tail_eps: float) -> tuple[float, float]:
        """Return ``(L, U)`` with ``F(L) < tail_eps`` and ``1 - F(U) < tail_eps``."""
        z = -float(ndtri(tail_eps)) + 1e-3
        return self.mean - z * self.std, self.mean + z * self.std

    def normalize(self) -> "NormalRelevance":
        return self

    def to_dict(self) -> dict:
        return {"kind": "normal", "mean": float(self.mean), "std": float(self.std)}


@dataclass(frozen=True)
class UniformRelevance:
    """Lebesgue measure on ``[lo, hi]``.

    Without ``weight`` the total mass is the interval length ``hi - lo`` (the
    plain Lebesgue measure).  :meth:`normalize` returns the same interval with
    ``weight=1``.
    """

    lo: float
    hi: float
    weight: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise MeasureError("uniform relevance bounds must be finite")
        if not self.lo < self.hi:
            raise MeasureError(f"need lo < hi, got lo={self.lo}, hi={self.hi}")
        if self.weight is not None and not (math.isfinite(self.weight) and self.weight >= 0):
            raise MeasureError("uniform weight must be finite and non-negative")

    @property
    def total_mass(self) -> float:
        return float(self.hi - self.lo) if self.weight is None else float(self.weight)

    @property
    def breakpoints(self) -> np.ndarray:
        return np.array([self.lo, self.hi])

    @property
    def has_atoms(self) -> bool:
        return False

    def cdf(self, x):
        frac = np.clip((np.asarray(x, dtype=float) - self.lo) / (self.hi - self.lo), 0.0, 1.0)
        return self.total_mass * frac

    def cdf_left(self, x):
        return self.cdf(x)

    def measure_interval(self, a, b):
        return np.maximum(self.cdf(b) - self.cdf(a), 0.0)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        return np.where(inside, self.total_mass / (self.hi - self.lo), 0.0)

    def log_density(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.density(x))

    def max_density(self) -> float:
        return self.total_mass / (self.hi - self.lo)

    def normalize(self) -> "UniformRelevance":
        _check_total(self.total_mass)
        return UniformRelevance(self.lo, self.hi, 1.0)

    def to_dict(self) -> dict:
        d = {"kind": "uniform", "lo": float(self.lo), "hi": float(self.hi)}
        if self.weight is not None:
            d["weight"] = float(self.weight)
        return d


@dataclass(frozen=True, eq=False)
class HistogramRelevance:
    """Piecewise-constant density: ``masses[i]`` spread evenly over bin ``i``.

    For point evaluation of the density, bin ``i`` is ``[edges[i], edges[i+1])``
    with the last bin closed on the right, matching :func:`build_histogram`.
    """

    edges: np.ndarray
    masses: np.ndarray
    _cum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        edges = _frozen_array(self.edges, "edges")
        masses = _frozen_array(self.masses, "masses")
        if edges.size < 2:
            raise MeasureError("histogram needs at least two edges")
        if np.any(np.diff(edges) <= 0):
            raise MeasureError("histogram edges must be strictly ascending")
        if masses.size != edges.size - 1:
            raise MeasureError(
                f"expected {edges.size - 1} masses for {edges.size} edges, got {masses.size}"
            )
        if np.any(masses < 0):
            raise MeasureError("histogram masses must be non-negative")
        cum = np.concatenate([[0.0], np.cumsum(masses)])
        cum.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "_cum", cum)

    def __eq__(self, other):
        if not isinstance(other, HistogramRelevance):
            return NotImplemented
        return np.array_equal(self.edges, other.edges) and np.array_equal(self.masses, other.masses)

    def __hash__(self):
        return hash((self.edges.tobytes(), self.masses.tobytes()))

    @property
    def total_mass(self) -> float:
        return float(self._cum[-1])

    @property
    def breakpoints(self) -> np.ndarray:
        return self.edges

    @property
    def has_atoms(self) -> bool:
        return False

    def cdf(self, x):
        return np.interp(np.asarray(x, dtype=float), self.edges, self._cum)

    def cdf_left(self, x):
        return self.cdf(x)

    def measure_interval(self, a, b):
        return np.maximum(self.cdf(b) - self.cdf(a), 0.0)

    def _bin_index(self, x):
        idx = np.searchsorted(self.edges, x, side="right") - 1
        idx = np.where(x == self.edges[-1], self.edges.size - 2, idx)
        return idx

    def density(self, x):
        x = np.asarray(x, dtype=float)
        idx = self._bin_index(x)
        inside = (idx >= 0) & (idx < self.masses.size)
        safe = np.clip(idx, 0, self.masses.size - 1)
        widths = np.diff(self.edges)
        return np.where(inside, self.masses[safe] / widths[safe], 0.0)

    def log_density(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.density(x))

    def max_density(self) -> float:
        return float(np.max(self.masses / np.diff(self.edges)))

    def normalize(self) -> "HistogramRelevance":
        total = _check_total(self.total_mass)
        return HistogramRelevance(self.edges, self.masses / total)

    def to_dict(self) -> dict:
        return {
            "kind": "histogram",
            "edges": [float(v) for v in self.edges],
            "masses": [float(v) for v in self.masses],
        }


@dataclass(frozen=True, eq=False)
class PointMassRelevance:
    """Weighted atoms at strictly increasing ``locations``.

    With all masses equal to one this is the count measure on a finite class
    domain.  It has no density, so :func:`relevance_function` rejects it.
    """

    locations: np.ndarray
    masses: np.ndarray
    _cum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        locs = _frozen_array(self.locations, "locations")
        masses = _frozen_array(self.masses, "masses")
        if locs.size == 0:
            raise MeasureError("point mass measure needs at least one location")
        if locs.size != masses.size:
            raise MeasureError("locations and masses must have equal length")
        if np.any(np.diff(locs) <= 0):
            raise MeasureError("locations must be distinct and strictly sorted")
        if np.any(masses < 0):
            raise MeasureError("point masses must be non-negative")
        cum = np.concatenate([[0.0], np.cumsum(masses)])
        cum.setflags(write=False)
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "_cum", cum)

    @classmethod
    def from_sample(cls, values) -> "PointMassRelevance":
        """Empirical distribution of ``values`` as a normalized atomic measure."""
        locs, counts = np.unique(np.asarray(values, dtype=float), return_counts=True)
        return cls(locs, counts / counts.sum())

    @classmethod
    def count_measure(cls, classes) -> "PointMassRelevance":
        locs = np.unique(np.asarray(classes, dtype=float))
        return cls(locs, np.ones(locs.size))

    def __eq__(self, other):
        if not isinstance(other, PointMassRelevance):
            return NotImplemented
        return np.array_equal(self.locations, other.locations) and np.array_equal(
            self.masses, other.masses
        )

    def __hash__(self):
        return hash((self.locations.tobytes(), self.masses.tobytes()))

    @property
    def total_mass(self) -> float:
        return float(self._cum[-1])

    @property
    def breakpoints(self) -> np.ndarray:
        return self.locations

    @property
    def has_atoms(self) -> bool:
        return True

    def cdf(self, x):
        return self._cum[np.searchsorted(self.locations, x, side="right")]

    def cdf_left(self, x):
        return self._cum[np.searchsorted(self.locations, x, side="left")]

    def measure_interval(self, a, b):
        return np.maximum(self.cdf(b) - self.cdf(a), 0.0)

    def density(self, x):
        raise UnsupportedMeasureError("point mass measures have no density")

    log_density = density

    def max_density(self) -> float:
        raise UnsupportedMeasureError("point mass measures have no density")

    def normalize(self) -> "PointMassRelevance":
        total = _check_total(self.total_mass)
        return PointMassRelevance(self.locations, self.masses / total)

    def to_dict(self) -> dict:
        return {
            "kind": "pointmass",
            "locations": [float(v) for v in self.locations],
            "masses": [float(v) for v in self.masses],
        }


RelevanceMeasure = Union[NormalRelevance, UniformRelevance, HistogramRelevance, PointMassRelevance]


def _check_total(total: float) -> float:
    if not math.isfinite(total) or total <= 0:
        raise MeasureError(f"relevance measure has unusable total mass {total!r}")
    return total


def _scalar(v):
    return float(v) if np.ndim(v) == 0 else v


def measure_interval(m: RelevanceMeasure, a, b):
    """Mass of the half-open interval ``(a, b]``.  ``a == b`` gives 0."""
    if np.any(np.asarray(a) > np.asarray(b)):
        raise ValueError("measure_interval requires a <= b")
    return _scalar(m.measure_interval(a, b))


def cdf(m: RelevanceMeasure, x):
    """Cumulative mass ``m((-inf, x])``; tends to ``m.total_mass`` at +inf."""
    return _scalar(m.cdf(x))


def normalize(m: RelevanceMeasure) -> RelevanceMeasure:
    """Scale ``m`` to a probability measure.

    Raises
    ------
    MeasureError
        If the total mass is zero or not finite.
    """
    return m.normalize()


def is_normalized(m: RelevanceMeasure, tol: float = _NORM_TOL) -> bool:
    return abs(m.total_mass - 1.0) <= tol


def relevance_function(m: RelevanceMeasure, x):
    """Density of ``m`` rescaled so that its maximum over the domain is 1."""
    if isinstance(m, PointMassRelevance):
        raise UnsupportedMeasureError("relevance function needs a measure with a density")
    peak = m.max_density()
    if peak <= 0:
        raise MeasureError("relevance measure has zero density everywhere")
    return _scalar(m.density(x) / peak)


def measure_from_dict(spec: Mapping[str, Any]) -> RelevanceMeasure:
    """Build a measure from ``{"kind": ..., **params}``."""
    try:
        kind = spec["kind"]
        if kind == "normal":
            return NormalRelevance(float(spec["mean"]), float(spec["std"]))
        if kind == "uniform":
            w = spec.get("weight")
            return UniformRelevance(float(spec["lo"]), float(spec["hi"]), None if w is None else float(w))
        if kind == "histogram":
            return HistogramRelevance(spec["edges"], spec["masses"])
        if kind == "pointmass":
            return PointMassRelevance(spec["locations"], spec["masses"])
    except KeyError as exc:
        raise MeasureError(f"measure spec missing field {exc}") from None
    except TypeError as exc:
        raise MeasureError(f"bad measure spec: {exc}") from None
    raise MeasureError(f"unknown measure kind {spec.get('kind')!r}")


def measure_from_json(text: str) -> RelevanceMeasure:
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MeasureError(f"measure JSON is malformed: {exc}") from None
    if not isinstance(spec, dict):
        raise MeasureError("measure JSON must be an object")
    return measure_from_dict(spec)
