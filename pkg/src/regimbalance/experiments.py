"""The three studies: degeneration versus imbalance factor, the binned-error
audit, and the correlation between imbalance scores and model quality."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .empirical import EmpiricalCdf, HistogramDensity, build_histogram
from .evaluation import (
    BinnedReport,
    PredictionSet,
    binned_mae,
    classification_metrics,
    regression_precision_recall,
    weighted_mae,
)
from .imbalance import ImbalanceReport, imbalance_report, kolmogorov_distance, wasserstein_distance
from .learner import MlpConfig, Standardizer, init, predict, train
from .measures import NormalRelevance, RelevanceMeasure, relevance_function
from .synth import BimodalSpec, Dataset, generate_bimodal, train_test_split

__all__ = [
    "PRESETS",
    "SweepSpec",
    "TrainSettings",
    "DegenerationReport",
    "CorrelationReport",
    "AuditReport",
    "relevance_sweep",
    "pearson",
    "fit_predict",
    "run_degeneration",
    "run_correlation",
    "audit_binned",
]

# sweep endpoints (mean, std) for the datasets studied with this toolkit
PRESETS = {"abalone": (18.0, 5.0), "warfarin": (80.0, 10.0), "parkinson": (50.0, 7.0)}

DEGENERATION_METRICS = ("accuracy", "tnr", "tpr", "f1", "mae", "mae_mode0", "mae_mode1")
IMBALANCE_METRICS = ("kolmogorov", "wasserstein")
EVAL_METRICS = ("weighted_mae", "precision", "recall", "f1")


@dataclass(frozen=True)
class TrainSettings:
    """Optimizer settings shared by every network an experiment trains."""

    learning_rate: float = 1e-3
    epochs: int = 200
    batch_size: int = 32

    def config(self, input_dim: int, loss: str, seed: int) -> MlpConfig:
        return MlpConfig(
            input_dim=input_dim,
            loss=loss,
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            batch_size=self.batch_size,
            seed=seed,
        )

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "hidden": [20, 20, 20],
        }


@dataclass(frozen=True)
class SweepSpec:
    start: tuple
    end: tuple
    n_points: int = 20


def relevance_sweep(spec: SweepSpec) -> list[NormalRelevance]:
    """Normal relevance measures on the straight line from ``start`` to ``end``
    in (mean, std) space, endpoints included."""
    if spec.n_points < 2:
        raise ValueError("a sweep needs at least two points")
    (m0, s0), (m1, s1) = spec.start, spec.end
    out = []
    for k in range(spec.n_points):
        t = k / (spec.n_points - 1)
        mean = m0 + t * (m1 - m0)
        std = s0 + t * (s1 - s0)
        if not std > 0:
            raise ValueError(f"sweep point {k} has non-positive std {std}")
        out.append(NormalRelevance(mean, std))
    return out


def pearson(xs, ys) -> Optional[float]:
    """Sample Pearson correlation; ``None`` if either input has zero variance."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size != y.size or x.size < 2:
        raise ValueError("pearson needs two sequences of equal length >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx <= 0 or syy <= 0:
        return None
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def fit_predict(
    train_set: Dataset, test_set: Dataset, loss: str, settings: TrainSettings, seed: int, labels: bool = False
) -> np.ndarray:
    """Standardize on the training split, train one network, predict the test split."""
    scaler = Standardizer.fit(train_set.features)
    cfg = settings.config(train_set.features.shape[1], loss, seed)
    y = train_set.mode_labels if labels else train_set.targets
    model, _ = train(init(cfg), scaler.transform(train_set.features), y)
    return predict(model, scaler.transform(test_set.features))


# -- degeneration ---------------------------------------------------------------


@dataclass
class DegenerationReport:
    imbalance_factors: list
    runs: int
    rows: dict  # I -> metric -> {"mean", "std"}
    per_run: list = field(default_factory=list)

    def mean(self, I, metric) -> float:
        return self.rows[_key(I)][metric]["mean"]

    def to_dict(self) -> dict:
        return {
            "imbalance_factors": self.imbalance_factors,
            "runs": self.runs,
            "summary": self.rows,
            "per_run": self.per_run,
        }

    def to_text(self) -> str:
        labels = {
            "accuracy": "Accuracy",
            "tnr": "TNR",
            "tpr": "TPR",
            "f1": "F1",
            "mae": "MAE",
            "mae_mode0": "MAE_0",
            "mae_mode1": "MAE_1",
        }
        keys = [_key(I) for I in self.imbalance_factors]
        width = 12
        out = []
        for title, metrics in (
            ("classification", ("accuracy", "tnr", "tpr", "f1")),
            ("regression", ("mae", "mae_mode0", "mae_mode1")),
        ):
            out.append(f"{title} (mean +- std over {self.runs} runs)")
            out.append(f"{'M / I':<10}" + "".join(f"{k:>{width}}" for k in keys))
            for metric in metrics:
                cells = []
                for k in keys:
                    cell = self.rows[k][metric]
                    if cell["mean"] is None:
                        cells.append(f"{'n/a':>{width}}")
                    else:
                        cells.append(f"{_fmt2(cell['mean']) + '+-' + _fmt2(cell['std']):>{width}}")
                out.append(f"{labels[metric]:<10}" + "".join(cells))
            out.append("")
        return "\n".join(out)


def _key(I) -> str:
    I = float(I)
    return str(int(I)) if I.is_integer() else repr(I)


def _fmt2(x: float) -> str:
    s = f"{x:.2f}"
    return s[1:] if s.startswith("0.") else s.replace("-0.", "-.")


def _degeneration_run(args) -> list[dict]:
    I_values, run, base, settings, seed, test_fraction = args
    run_seed = seed + run
    rows = []
    for I in I_values:
        spec = replace(base, imbalance_factor=float(I), seed=run_seed)
        data = generate_bimodal(spec)
        tr, te = train_test_split(data, test_fraction, run_seed)
        prob = fit_predict(tr, te, "bce", settings, run_seed, labels=True)
        cls = classification_metrics(te.mode_labels, (prob >= 0.5).astype(int))
        pred = fit_predict(tr, te, "mae", settings, run_seed)
        err = np.abs(pred - te.targets)
        m0 = te.mode_labels == 0
        rows.append(
            {
                "I": float(I),
                "run": run,
                "seed": run_seed,
                **cls,
                "mae": float(err.mean()),
                "mae_mode0": float(err[m0].mean()) if m0.any() else None,
                "mae_mode1": float(err[~m0].mean()) if (~m0).any() else None,
            }
        )
    return rows


def _map(fn, jobs, n_jobs: int):
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def _summarize(values: list) -> dict:
    vals = np.array([v for v in values if v is not None], dtype=float)
    if vals.size == 0:
        return {"mean": None, "std": None, "n": 0}
    return {"mean": float(vals.mean()), "std": float(vals.std()), "n": int(vals.size)}


def run_degeneration(
    I_values: Sequence[float] = (1, 3, 10, 20),
    runs: int = 10,
    spec: BimodalSpec | None = None,
    settings: TrainSettings | None = None,
    seed: int = 0,
    test_fraction: float = 0.2,
    n_jobs: int = 1,
) -> DegenerationReport:
    """Train a classifier and a regressor per (imbalance factor, run).

    Run ``r`` uses seed ``seed + r`` for data, split and both networks, so the
    classifier and regressor of one cell share their test set.  Std is the
    population standard deviation over runs.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    spec = spec or BimodalSpec()
    settings = settings or TrainSettings()
    jobs = [(tuple(I_values), r, spec, settings, seed, test_fraction) for r in range(runs)]
    per_run = [row for rows in _map(_degeneration_run, jobs, n_jobs) for row in rows]
    per_run.sort(key=lambda r: (r["I"], r["run"]))
    summary = {}
    for I in I_values:
        cell = [r for r in per_run if r["I"] == float(I)]
        summary[_key(I)] = {m: _summarize([r[m] for r in cell]) for m in DEGENERATION_METRICS}
    return DegenerationReport([float(I) for I in I_values], runs, summary, per_run)


# -- correlation ------------------------------------------------------------------


@dataclass
class CorrelationReport:
    rows: list
    pearson: dict
    runs: int
    n_points: int
    excluded: dict
    start: tuple
    end: tuple

    def to_dict(self) -> dict:
        return {
            "runs": self.runs,
            "n_points": self.n_points,
            "sweep_start": list(self.start),
            "sweep_end": list(self.end),
            "pooling": "all (sweep point, run) pairs",
            "pearson": self.pearson,
            "excluded_undefined": self.excluded,
            "rows": self.rows,
        }

    def to_text(self) -> str:
        head = ["Weighted MAE", "Precision", "Recall", "F1"]
        out = [f"{'':<12}" + "".join(f"{h:>14}" for h in head)]
        for name, key in (("Kolmogorov", "kolmogorov"), ("Wasserstein", "wasserstein")):
            cells = []
            for ev in EVAL_METRICS:
                r = self.pearson[key][ev]
                cells.append(f"{'n/a' if r is None else f'{r:.6f}':>14}")
            out.append(f"{name:<12}" + "".join(cells))
        out.append(f"({self.n_points} relevance measures x {self.runs} runs, pooled)")
        return "\n".join(out) + "\n"


def run_correlation(
    dataset: Dataset,
    endpoint: tuple,
    runs: int = 10,
    n_points: int = 20,
    seed: int = 0,
    settings: TrainSettings | None = None,
    test_fraction: float = 0.2,
    t_rel: float = 0.5,
    t_err: float = 10.0,
    beta: float = 1.0,
    k: float = 1.0,
    n_bins: int = 20,
    n_jobs: int = 1,
) -> CorrelationReport:
    """Correlate imbalance scores of the training targets with test-set
    quality of regressors, over a sweep of normal relevance measures.

    One split (seeded with ``seed``) is shared by every run; run ``r`` trains
    its network with seed ``seed + r``.
    """
    settings = settings or TrainSettings()
    tr, te = train_test_split(dataset, test_fraction, seed)
    y = dataset.targets
    sweep = relevance_sweep(SweepSpec((float(y.mean()), float(y.std())), tuple(endpoint), n_points))
    e_train = EmpiricalCdf.from_sample(tr.targets)
    scores = [(kolmogorov_distance(mu, e_train), wasserstein_distance(mu, e_train)) for mu in sweep]
    jobs = [(tr, te, "mae", settings, seed + r) for r in range(runs)]
    preds = _map(_fit_predict_job, jobs, n_jobs)
    rows = []
    for r, pred in enumerate(preds):
        ps = PredictionSet(te.targets, pred)
        for i, mu in enumerate(sweep):
            pr = regression_precision_recall(
                ps, lambda v, mu=mu: relevance_function(mu, v), t_rel, t_err, beta, k
            )
            rows.append(
                {
                    "run": r,
                    "point": i,
                    "measure": mu.to_dict(),
                    "kolmogorov": scores[i][0],
                    "wasserstein": scores[i][1],
                    "weighted_mae": weighted_mae(ps, mu, n_bins),
                    "precision": pr.precision,
                    "recall": pr.recall,
                    "f1": pr.f_beta,
                }
            )
    table, excluded = {}, {}
    for imb in IMBALANCE_METRICS:
        table[imb] = {}
        for ev in EVAL_METRICS:
            ok = [row for row in rows if row[ev] is not None]
            excluded[ev] = len(rows) - len(ok)
            if len(ok) < 2:
                table[imb][ev] = None
            else:
                table[imb][ev] = pearson([row[imb] for row in ok], [row[ev] for row in ok])
    start = (sweep[0].mean, sweep[0].std)
    return CorrelationReport(rows, table, runs, n_points, excluded, start, tuple(float(v) for v in endpoint))


def _fit_predict_job(args):
    return fit_predict(*args)


# -- binned audit -----------------------------------------------------------------


@dataclass
class AuditReport:
    histogram: HistogramDensity
    imbalance: ImbalanceReport
    binned: Optional[BinnedReport] = None

    def to_dict(self) -> dict:
        out = {"histogram": self.histogram.to_dict(), "imbalance": self.imbalance.to_dict()}
        if self.binned is not None:
            out["binned_mae"] = self.binned.to_dict()
        return out

    def to_tsv(self) -> str:
        """Rows ``bin_center, count, mae``; ``mae`` is ``null`` for empty bins
        or when no predictions were supplied."""
        from .evaluation import format_float

        lines = ["bin_center\tcount\tmae"]
        centers = self.histogram.centers
        maes = self.binned.mae_per_bin if self.binned is not None else [None] * centers.size
        for c, k, m in zip(centers, self.histogram.counts, maes):
            lines.append(f"{format_float(c)}\t{int(k)}\t{format_float(m)}")
        return "\n".join(lines) + "\n"


def audit_binned(
    targets,
    measure: RelevanceMeasure,
    predictions: PredictionSet | None = None,
    n_bins: int = 20,
) -> AuditReport:
    """Histogram of ``targets``, their imbalance against ``measure`` and, if
    given, the per-bin test MAE on the same bins.

    The bin range covers both the targets and the true values of the
    predictions so every test sample lands in a bin.
    """
    y = np.asarray(targets, dtype=float).ravel()
    lo, hi = float(y.min()), float(y.max())
    if predictions is not None:
        lo = min(lo, float(predictions.y_true.min()))
        hi = max(hi, float(predictions.y_true.max()))
    hist = build_histogram(y, n_bins, (lo, hi) if hi > lo else None)
    binned = binned_mae(predictions, hist.bin_edges) if predictions is not None else None
    return AuditReport(hist, imbalance_report(measure, y), binned)
