"""Empirical distribution functions and histogram density estimates."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Sample",
    "EmpiricalCdf",
    "HistogramDensity",
    "ecdf_eval",
    "build_histogram",
    "density_at",
    "histogram_bin_index",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Sample:
    """Target values stored sorted, with ``order`` mapping sorted position to
    the original index."""

    values: np.ndarray
    order: np.ndarray = field(repr=False)

    @classmethod
    def from_values(cls, values) -> "Sample":
        arr = np.asarray(values, dtype=float).ravel()
        if arr.size == 0:
            raise ValueError("a sample needs at least one value")
        if not np.all(np.isfinite(arr)):
            raise ValueError("sample values must be finite")
        order = np.argsort(arr, kind="stable")
        return cls(_readonly(arr[order]), _readonly(order))

    @property
    def n(self) -> int:
        return int(self.values.size)

    def original(self) -> np.ndarray:
        out = np.empty_like(self.values)
        out[self.order] = self.values
        return out

    def ecdf(self) -> "EmpiricalCdf":
        return EmpiricalCdf(self.values)


@dataclass(frozen=True, eq=False)
class EmpiricalCdf:
    """Right-continuous step function ``F(x) = #{v <= x} / n``."""

    sorted_values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.sorted_values, dtype=float).ravel()
        if v.size == 0:
            raise ValueError("empirical CDF of an empty sample")
        if not np.all(np.isfinite(v)):
            raise ValueError("sample values must be finite")
        if np.any(np.diff(v) < 0):
            v = np.sort(v)
        else:
            v = v.copy()
        object.__setattr__(self, "sorted_values", _readonly(v))

    @classmethod
    def from_sample(cls, values) -> "EmpiricalCdf":
        return cls(np.sort(np.asarray(values, dtype=float).ravel()))

    @property
    def n(self) -> int:
        return int(self.sorted_values.size)

    def __call__(self, x):
        return np.searchsorted(self.sorted_values, x, side="right") / self.n

    def left(self, x):
        """Left limit ``F(x-) = #{v < x} / n``."""
        return np.searchsorted(self.sorted_values, x, side="left") / self.n

    # measure-style accessors so an ECDF can stand in for a probability measure
    cdf = __call__
    cdf_left = left
    has_atoms = True

    @property
    def breakpoints(self) -> np.ndarray:
        return np.unique(self.sorted_values)

    @property
    def total_mass(self) -> float:
        return 1.0

    def jumps(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct sample values and the ECDF value at each of them."""
        locs, counts = np.unique(self.sorted_values, return_counts=True)
        return locs, np.cumsum(counts) / self.n


def ecdf_eval(e: EmpiricalCdf, x):
    """Fraction of sample values ``<= x``."""
    out = e(x)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class HistogramDensity:
    """Equal-width histogram.  ``n`` counts every value, including those that
    fell outside ``[edges[0], edges[-1]]`` (tracked in ``n_outside``)."""

    bin_edges: np.ndarray
    counts: np.ndarray
    n: int
    n_outside: int = 0

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def densities(self) -> np.ndarray:
        return self.counts / (self.n * self.widths)

    def to_measure(self):
        from .measures import HistogramRelevance

        return HistogramRelevance(self.bin_edges, self.counts.astype(float))

    def to_dict(self) -> dict:
        return {
            "bin_edges": [float(v) for v in self.bin_edges],
            "counts": [int(c) for c in self.counts],
            "n": self.n,
            "n_outside": self.n_outside,
        }


def histogram_bin_index(edges: np.ndarray, x) -> np.ndarray:
    """Bin of each ``x`` under ``edges[i] <= x < edges[i+1]`` with the last bin
    closed.  Values outside the range get -1."""
    x = np.asarray(x, dtype=float)
    nb = len(edges) - 1
    idx = np.searchsorted(edges, x, side="right") - 1
    idx = np.where(x == edges[-1], nb - 1, idx)
    return np.where((idx < 0) | (idx >= nb), -1, idx)


def build_histogram(s, n_bins: int, range: tuple[float, float] | None = None) -> HistogramDensity:
    """Equal-width histogram of ``s`` (a :class:`Sample` or array-like).

    A degenerate sample with ``min == max`` and no explicit range produces a
    single bin of width 1 centred on the value.
    """
    values = s.values if isinstance(s, Sample) else np.asarray(s, dtype=float).ravel()
    if values.size == 0:
        raise ValueError("cannot build a histogram of an empty sample")
    if n_bins < 1:
        raise ValueError(f"n_bins must be >= 1, got {n_bins}")
    if range is not None:
        lo, hi = float(range[0]), float(range[1])
        if not lo < hi:
            raise ValueError(f"histogram range needs lo < hi, got {range}")
        edges = np.linspace(lo, hi, n_bins + 1)
    else:
        lo, hi = float(values.min()), float(values.max())
        if lo == hi:
            edges = np.array([lo - 0.5, lo + 0.5])
        else:
            edges = np.linspace(lo, hi, n_bins + 1)
    idx = histogram_bin_index(edges, values)
    inside = idx >= 0
    counts = np.bincount(idx[inside], minlength=len(edges) - 1)
    return HistogramDensity(
        _readonly(edges), _readonly(counts), int(values.size), int(np.count_nonzero(~inside))
    )


def density_at(h: HistogramDensity, y):
    """Histogram density estimate ``counts[bin] / (n * width)``; 0 outside."""
    idx = histogram_bin_index(h.bin_edges, y)
    dens = h.densities
    out = np.where(idx >= 0, dens[np.maximum(idx, 0)], 0.0)
    return float(out) if np.ndim(out) == 0 else out
