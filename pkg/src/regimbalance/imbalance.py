"""Imbalance scores between a relevance measure and a target distribution."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import ndtr, ndtri

from .empirical import EmpiricalCdf
from .measures import MeasureError, NormalRelevance, RelevanceMeasure, is_normalized

__all__ = [
    "ImbalanceReport",
    "BalanceCheckResult",
    "kolmogorov_distance",
    "wasserstein_distance",
    "wasserstein_with_truncation",
    "mu_balance_check",
    "classification_imbalance_factor",
    "imbalance_report",
]

_GL_ORDER = 64
_GL_NODES, _GL_WEIGHTS = leggauss(_GL_ORDER)
_MAX_PANELS = 4096


@dataclass(frozen=True)
class ImbalanceReport:
    kolmogorov: float
    wasserstein: float
    n_samples: int
    measure: dict
    wasserstein_truncation: float = 0.0

    def to_dict(self) -> dict:
        return {
            "kolmogorov": self.kolmogorov,
            "wasserstein": self.wasserstein,
            "n_samples": self.n_samples,
            "measure": self.measure,
            "wasserstein_truncation": self.wasserstein_truncation,
        }


@dataclass(frozen=True)
class BalanceCheckResult:
    """Outcome of a pairwise mu-balance check on a finite partition.

    Each violation is ``((S, S'), mu(S), mu(S'), P(S), P(S'))`` where ``S`` and
    ``S'`` are ``(a, b]`` intervals with ``mu(S) <= mu(S')`` but
    ``P(S) > P(S')`` beyond ``epsilon``.
    """

    violations: list = field(default_factory=list)
    epsilon: float = 0.0

    @property
    def balanced(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "balanced": self.balanced,
            "epsilon": self.epsilon,
            "violations": [
                {"S": list(s), "S_prime": list(sp), "mu_S": a, "mu_S_prime": b, "P_S": c, "P_S_prime": d}
                for (s, sp), a, b, c, d in self.violations
            ],
        }


def _require_normalized(mu: RelevanceMeasure):
    if not is_normalized(mu):
        raise MeasureError(
            f"imbalance scores need a normalized relevance measure (total mass {mu.total_mass!r});"
            " call normalize() first"
        )


def _as_ecdf(e) -> EmpiricalCdf:
    return e if isinstance(e, EmpiricalCdf) else EmpiricalCdf.from_sample(e)


def _as_distribution(mu: RelevanceMeasure, other):
    """Second argument of a metric: an ECDF, a sample, or a probability measure.

    Measure-versus-measure comparison is exact only for piecewise-linear CDFs,
    so a normal measure may be paired with an ECDF only.
    """
    if hasattr(other, "cdf_left"):
        if not isinstance(other, EmpiricalCdf):
            _require_normalized(other)
            if isinstance(other, NormalRelevance) or isinstance(mu, NormalRelevance):
                raise MeasureError("normal measures can only be compared against empirical CDFs")
        return other
    return EmpiricalCdf.from_sample(other)


def kolmogorov_distance(mu: RelevanceMeasure, e) -> float:
    """Exact ``sup_x |F_mu(x) - F_Y(x)|``.

    ``e`` is an :class:`EmpiricalCdf` (or raw sample).  Between consecutive
    jump points the ECDF is constant and ``F_mu`` monotone, so the supremum
    sits at an interval end: comparing right values and left limits at every
    breakpoint of either function is exact.  A piecewise-linear probability
    measure is also accepted for ``e``.
    """
    _require_normalized(mu)
    e = _as_distribution(mu, e)
    pts = np.union1d(e.breakpoints, mu.breakpoints)
    right = np.abs(mu.cdf(pts) - e.cdf(pts))
    left = np.abs(mu.cdf_left(pts) - e.cdf_left(pts))
    d = float(max(right.max(), left.max()))
    return min(max(d, 0.0), 1.0)


def _abs_linear_integral(g0, g1, w):
    """Integral of ``|g|`` over width ``w`` where ``g`` is linear from g0 to g1."""
    a0, a1 = np.abs(g0), np.abs(g1)
    same = (g0 * g1) >= 0
    denom = np.where(same, 1.0, a0 + a1)
    crossing = w * (g0 * g0 + g1 * g1) / (2.0 * denom)
    return np.where(same, 0.5 * w * (a0 + a1), crossing)


def _wasserstein_piecewise_linear(mu: RelevanceMeasure, e) -> float:
    # both CDFs are linear between consecutive breakpoints, so is their difference
    pts = np.union1d(e.breakpoints, mu.breakpoints)
    if pts.size < 2:
        return 0.0
    t0, t1 = pts[:-1], pts[1:]
    g0 = mu.cdf(t0) - e.cdf(t0)
    g1 = mu.cdf_left(t1) - e.cdf_left(t1)
    return float(np.sum(_abs_linear_integral(g0, g1, t1 - t0)))


def _normal_tail_integral(mu: NormalRelevance, lo: float, hi: float) -> float:
    """Mass of ``|F_mu - F_Y|`` outside ``[lo, hi]`` when the sample lies inside."""
    s = mu.std
    z_lo = (lo - mu.mean) / s
    z_hi = (mu.mean - hi) / s
    # int_{-inf}^{z} Phi(t) dt = z Phi(z) + phi(z)
    phi = lambda z: math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    return s * (z_lo * float(ndtr(z_lo)) + phi(z_lo)) + s * (z_hi * float(ndtr(z_hi)) + phi(z_hi))


def _wasserstein_normal(mu: NormalRelevance, e: EmpiricalCdf, tail_eps: float) -> tuple[float, float]:
    L, U = mu.tail_bounds(tail_eps)
    locs, steps = e.jumps()
    lo = min(L, float(locs[0]))
    hi = max(U, float(locs[-1]))
    inner = locs[(locs > lo) & (locs < hi)]
    pts = np.concatenate([[lo], inner, [hi]])
    a, b = pts[:-1], pts[1:]
    c = e(a)
    # split where F_mu crosses the ECDF level so each panel is smooth
    with np.errstate(divide="ignore"):
        root = mu.mean + mu.std * ndtri(np.clip(c, 0.0, 1.0))
    cut = (c > 0) & (c < 1) & (root > a) & (root < b)
    a2 = np.concatenate([a, root[cut]])
    b2 = np.concatenate([np.where(cut, root, b), b[cut]])
    c2 = np.concatenate([c, c[cut]])
    keep = b2 > a2
    a2, b2, c2 = a2[keep], b2[keep], c2[keep]
    # composite rule: panels no wider than one standard deviation
    n_panels = np.clip(np.ceil((b2 - a2) / mu.std), 1, _MAX_PANELS).astype(int)
    idx = np.repeat(np.arange(a2.size), n_panels)
    offs = np.arange(idx.size) - np.repeat(np.cumsum(n_panels) - n_panels, n_panels)
    pw = (b2 - a2)[idx] / n_panels[idx]
    pa = a2[idx] + offs * pw
    mid = pa + 0.5 * pw
    x = mid[:, None] + 0.5 * pw[:, None] * _GL_NODES[None, :]
    vals = np.abs(mu.cdf(x) - c2[idx][:, None])
    total = float(np.sum(0.5 * pw * (vals @ _GL_WEIGHTS)))
    return total, _normal_tail_integral(mu, lo, hi)


def wasserstein_with_truncation(mu: RelevanceMeasure, e, tail_eps: float = 1e-6) -> tuple[float, float]:
    """Return ``(distance, neglected_tail_mass)``.

    The second value is the part of the integral lying beyond the truncation
    points; it is zero except for normal relevance measures.
    """
    _require_normalized(mu)
    e = _as_distribution(mu, e)
    if isinstance(mu, NormalRelevance):
        return _wasserstein_normal(mu, e, tail_eps)
    return _wasserstein_piecewise_linear(mu, e), 0.0


def wasserstein_distance(mu: RelevanceMeasure, e, tail_eps: float = 1e-6) -> float:
    """Order-1 Wasserstein distance ``int |F_mu(x) - F_Y(x)| dx``.

    Exact for uniform, histogram and point-mass measures.  For a normal
    measure the integral over ``[L, U]`` (``F_mu(L) < tail_eps``,
    ``1 - F_mu(U) < tail_eps``, widened to cover the sample) is evaluated with
    64-point Gauss-Legendre panels between ECDF jumps.
    """
    return wasserstein_with_truncation(mu, e, tail_eps)[0]


def _interval_masses(p, edges: np.ndarray) -> np.ndarray:
    if isinstance(p, EmpiricalCdf):
        return p(edges[1:]) - p(edges[:-1])
    return np.asarray(p.measure_interval(edges[:-1], edges[1:]), dtype=float)


def mu_balance_check(
    mu: RelevanceMeasure, p, partition, epsilon: float | None = None
) -> BalanceCheckResult:
    """Check mu-balance on the cells ``(e_i, e_{i+1}]`` of ``partition``.

    For every ordered pair of cells with ``mu(S) <= mu(S') - epsilon`` the
    probability must satisfy ``P(S) <= P(S') + epsilon``.  ``p`` is an
    :class:`EmpiricalCdf` or a probability measure.  The default epsilon is
    ``2 / sqrt(n)`` for an ECDF (its fluctuation scale) and 0 for a measure.
    """
    edges = np.asarray(partition, dtype=float)
    if edges.size < 3:
        raise ValueError("partition needs at least two cells")
    if np.any(np.diff(edges) <= 0):
        raise ValueError("partition edges must be strictly ascending")
    if epsilon is None:
        epsilon = 2.0 / math.sqrt(p.n) if isinstance(p, EmpiricalCdf) else 0.0
    mu = mu.normalize()
    m = _interval_masses(mu, edges)
    pr = _interval_masses(p, edges)
    cells = list(zip(edges[:-1].tolist(), edges[1:].tolist()))
    violations = []
    k = len(cells)
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            if m[i] <= m[j] - epsilon and pr[i] > pr[j] + epsilon:
                violations.append(
                    ((cells[i], cells[j]), float(m[i]), float(m[j]), float(pr[i]), float(pr[j]))
                )
    return BalanceCheckResult(violations, float(epsilon))


def classification_imbalance_factor(labels) -> float:
    """Majority class count divided by minority class count."""
    _, counts = np.unique(np.asarray(labels).ravel(), return_counts=True)
    if counts.size < 2:
        raise ValueError("imbalance factor needs at least two distinct classes")
    return float(counts.max() / counts.min())


def imbalance_report(mu: RelevanceMeasure, targets, tail_eps: float = 1e-6) -> ImbalanceReport:
    """Kolmogorov and Wasserstein scores of ``targets`` against ``mu``.

    ``mu`` is normalized here, so raw Lebesgue or count measures are accepted.
    """
    e = _as_ecdf(targets)
    nmu = mu.normalize()
    wst, trunc = wasserstein_with_truncation(nmu, e, tail_eps)
    return ImbalanceReport(
        kolmogorov=kolmogorov_distance(nmu, e),
        wasserstein=wst,
        n_samples=e.n,
        measure=mu.to_dict(),
        wasserstein_truncation=trunc,
    )
