"""Synthetic datasets: the bimodal imbalance protocol and an abalone-like
stand-in used when the real CSV is not available.

Randomness comes from numpy's PCG64 bit generator seeded through
``SeedSequence``; the bimodal generator spawns one child stream per mode so
that the minority-mode rows are identical for every imbalance factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

__all__ = [
    "BimodalSpec",
    "Dataset",
    "generate_bimodal",
    "to_classification",
    "train_test_split",
    "generate_abalone_like",
    "ABALONE_COLUMNS",
]


@dataclass(frozen=True)
class BimodalSpec:
    n_minority: int = 1000
    imbalance_factor: float = 1.0
    mode_centers: tuple = (0.0, 1.0)
    mode_std: float = 0.02
    feature_dim: int = 4
    feature_cluster_spread: float = 0.65
    seed: int = 0

    def __post_init__(self):
        if self.n_minority < 1:
            raise ValueError("n_minority must be >= 1")
        if not self.imbalance_factor >= 1:
            raise ValueError(f"imbalance factor must be >= 1, got {self.imbalance_factor}")
        if self.mode_std <= 0 or self.feature_cluster_spread <= 0:
            raise ValueError("mode_std and feature_cluster_spread must be positive")
        if self.feature_dim < 1:
            raise ValueError("feature_dim must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def n_majority(self) -> int:
        return int(round(self.imbalance_factor * self.n_minority))

    def to_dict(self) -> dict:
        return {
            "n_minority": self.n_minority,
            "imbalance_factor": float(self.imbalance_factor),
            "mode_centers": [float(c) for c in self.mode_centers],
            "mode_std": float(self.mode_std),
            "feature_dim": self.feature_dim,
            "feature_cluster_spread": float(self.feature_cluster_spread),
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class Dataset:
    """Aligned features, targets and (optionally) binary mode labels."""

    features: np.ndarray
    targets: np.ndarray
    mode_labels: Optional[np.ndarray] = None
    feature_names: tuple = field(default=())

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(self.targets, dtype=float).ravel()
        if X.shape[0] != y.size:
            raise ValueError(f"{X.shape[0]} feature rows but {y.size} targets")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "targets", y)
        if self.mode_labels is not None:
            lab = np.asarray(self.mode_labels, dtype=int).ravel()
            if lab.size != y.size:
                raise ValueError("mode_labels must align with targets")
            object.__setattr__(self, "mode_labels", lab)
        if not self.feature_names:
            object.__setattr__(self, "feature_names", tuple(f"f{i}" for i in range(X.shape[1])))

    def __len__(self) -> int:
        return int(self.targets.size)

    def subset(self, idx) -> "Dataset":
        labels = None if self.mode_labels is None else self.mode_labels[idx]
        return replace(self, features=self.features[idx], targets=self.targets[idx], mode_labels=labels)

    def to_csv(self, path) -> None:
        header = ",".join(list(self.feature_names) + ["target"])
        rows = np.column_stack([self.features, self.targets])
        with open(path, "w", newline="") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(format(float(v), ".17g") for v in row) + "\n")


def generate_bimodal(spec: BimodalSpec) -> Dataset:
    """Bimodal regression data: mode ``m`` has features around the all-``m``
    vector and targets ``Normal(center_m, mode_std)``.  Rows are ordered with
    all mode-0 rows first."""
    streams = np.random.SeedSequence(spec.seed).spawn(2)
    counts = (spec.n_majority, spec.n_minority)
    feats, targs = [], []
    for mode, (ss, count) in enumerate(zip(streams, counts)):
        rng = np.random.Generator(np.random.PCG64(ss))
        feats.append(mode + spec.feature_cluster_spread * rng.standard_normal((count, spec.feature_dim)))
        targs.append(spec.mode_centers[mode] + spec.mode_std * rng.standard_normal(count))
    y = np.concatenate(targs)
    threshold = 0.5 * (spec.mode_centers[0] + spec.mode_centers[1])
    return Dataset(np.vstack(feats), y, (y >= threshold).astype(int))


def to_classification(d: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Features and binary mode labels (target >= 0.5 is mode 1)."""
    labels = d.mode_labels if d.mode_labels is not None else (d.targets >= 0.5).astype(int)
    return d.features, labels


def _quantile_strata(y: np.ndarray, n_strata: int) -> np.ndarray:
    qs = np.quantile(y, np.linspace(0, 1, n_strata + 1)[1:-1])
    return np.searchsorted(np.unique(qs), y, side="right")


def train_test_split(
    d: Dataset, test_fraction: float, seed: int, n_strata: int = 10
) -> tuple[Dataset, Dataset]:
    """Seeded stratified split.

    Strata are the mode labels when present, otherwise ``n_strata`` target
    quantile bins.  Every stratum contributes ``round(test_fraction * size)``
    rows to the test set (at least one, never all).
    """
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie strictly between 0 and 1")
    strata = d.mode_labels if d.mode_labels is not None else _quantile_strata(d.targets, n_strata)
    rng = np.random.Generator(np.random.PCG64(seed))
    test_idx = []
    for s in np.unique(strata):
        members = np.flatnonzero(strata == s)
        if members.size < 2:
            raise ValueError(f"stratum {s} has {members.size} sample(s); need at least 2 to split")
        rng.shuffle(members)
        k = int(np.clip(round(test_fraction * members.size), 1, members.size - 1))
        test_idx.append(members[:k])
    test = np.sort(np.concatenate(test_idx))
    mask = np.ones(len(d), dtype=bool)
    mask[test] = False
    return d.subset(np.flatnonzero(mask)), d.subset(test)


ABALONE_COLUMNS = (
    "sex",
    "length",
    "diameter",
    "height",
    "whole_weight",
    "shucked_weight",
    "viscera_weight",
    "shell_weight",
    "rings",
)


def generate_abalone_like(n: int = 4177, seed: int = 0) -> list[dict]:
    """Rows shaped like the UCI abalone table (``ABALONE_COLUMNS``).

    Ring counts are right-skewed around 10; body measurements follow a
    saturating growth curve of age, so old animals are hard to tell apart and
    a regressor regresses them towards the common ages.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    # shifted gamma: mean ~10, std ~3.2, skewness ~1.1, a sparse tail up to 29
    rings = np.clip(np.rint(4.1 + rng.gamma(3.3, 1.77, size=n)), 1, 29).astype(int)
    age = rings + 1.5
    growth = 1.0 - np.exp(-age / 5.0)
    size = growth * np.exp(0.08 * rng.standard_normal(n))
    length = np.clip(0.72 * size + 0.02 * rng.standard_normal(n), 0.075, 0.815)
    diameter = np.clip(0.79 * length + 0.015 * rng.standard_normal(n), 0.055, 0.65)
    height = np.clip(0.27 * length + 0.012 * rng.standard_normal(n), 0.01, 0.5)
    whole = 4.0 * length**3 * np.exp(0.1 * rng.standard_normal(n))
    shucked = whole * np.clip(0.43 + 0.04 * rng.standard_normal(n), 0.2, 0.7)
    viscera = whole * np.clip(0.22 + 0.025 * rng.standard_normal(n), 0.1, 0.4)
    shell = whole * np.clip(0.24 + 0.0025 * rings + 0.03 * rng.standard_normal(n), 0.1, 0.5)
    p_infant = 1.0 / (1.0 + np.exp(rings - 7.0))
    u = rng.random(n)
    sex = np.where(u < p_infant, "I", np.where(rng.random(n) < 0.5, "M", "F"))
    rows = []
    for i in range(n):
        rows.append(
            {
                "sex": str(sex[i]),
                "length": round(float(length[i]), 3),
                "diameter": round(float(diameter[i]), 3),
                "height": round(float(height[i]), 3),
                "whole_weight": round(float(whole[i]), 4),
                "shucked_weight": round(float(shucked[i]), 4),
                "viscera_weight": round(float(viscera[i]), 4),
                "shell_weight": round(float(shell[i]), 4),
                "rings": int(rings[i]),
            }
        )
    return rows
