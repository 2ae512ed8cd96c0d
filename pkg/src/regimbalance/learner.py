"""Small fully connected ReLU network (three hidden layers of 20 units)
trained with mini-batch Adam.

Regression uses the mean absolute error on a linear output; classification
uses binary cross-entropy on a sigmoid output, computed from logits.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

__all__ = [
    "MlpConfig",
    "Mlp",
    "TrainingError",
    "init",
    "forward",
    "predict",
    "train",
    "loss_and_grads",
    "Standardizer",
]

LOSSES = ("mae", "bce")
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class MlpConfig:
    input_dim: int
    loss: str = "mae"
    learning_rate: float = 1e-3
    epochs: int = 200
    batch_size: int = 32
    seed: int = 0
    hidden: tuple = field(default=(20, 20, 20))

    def __post_init__(self):
        if self.loss not in LOSSES:
            raise ValueError(f"loss must be one of {LOSSES}, got {self.loss!r}")
        if self.input_dim < 1:
            raise ValueError("input_dim must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))

    @property
    def classification(self) -> bool:
        return self.loss == "bce"

    @property
    def layer_sizes(self) -> list[int]:
        return [self.input_dim, *self.hidden, 1]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden"] = list(self.hidden)
        return d


@dataclass
class Mlp:
    config: MlpConfig
    weights: list
    biases: list

    def copy(self) -> "Mlp":
        return Mlp(self.config, [w.copy() for w in self.weights], [b.copy() for b in self.biases])

    @property
    def params(self) -> list:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def to_json(self) -> str:
        layers = [
            {"shape": list(w.shape), "weights": w.ravel().tolist(), "bias": b.tolist()}
            for w, b in zip(self.weights, self.biases)
        ]
        return json.dumps({"config": self.config.to_dict(), "layers": layers})

    @classmethod
    def from_json(cls, text: str) -> "Mlp":
        obj = json.loads(text)
        cfg = dict(obj["config"])
        cfg["hidden"] = tuple(cfg["hidden"])
        config = MlpConfig(**cfg)
        weights, biases = [], []
        for layer in obj["layers"]:
            weights.append(np.asarray(layer["weights"], dtype=float).reshape(layer["shape"]))
            biases.append(np.asarray(layer["bias"], dtype=float))
        model = cls(config, weights, biases)
        _check_shapes(model)
        return model


def _check_shapes(m: Mlp) -> None:
    sizes = m.config.layer_sizes
    if len(m.weights) != len(sizes) - 1:
        raise ValueError("layer count does not match config")
    for w, b, (i, o) in zip(m.weights, m.biases, zip(sizes[:-1], sizes[1:])):
        if w.shape != (i, o) or b.shape != (o,):
            raise ValueError(f"bad layer shape {w.shape}/{b.shape}, expected ({i}, {o})")


def init(config: MlpConfig, seed: int | None = None) -> Mlp:
    """Weights uniform in ``+-sqrt(6 / fan_in)``, zero biases."""
    seed = config.seed if seed is None else seed
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed).spawn(2)[0]))
    sizes = config.layer_sizes
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return Mlp(config, weights, biases)


def _as_batch(m: Mlp, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or (X.shape[0] > 0 and X.shape[1] != m.config.input_dim) or (
        X.shape[0] == 0 and X.shape[-1] not in (0, m.config.input_dim)
    ):
        raise ValueError(f"expected inputs of dimension {m.config.input_dim}, got shape {X.shape}")
    return X


def _logits(m: Mlp, X: np.ndarray) -> np.ndarray:
    h = X
    last = len(m.weights) - 1
    for i, (w, b) in enumerate(zip(m.weights, m.biases)):
        h = h @ w + b
        if i < last:
            h = np.maximum(h, 0.0)
    return h[:, 0]


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def predict(m: Mlp, X) -> np.ndarray:
    """Row-wise network output (probabilities for classification)."""
    X = _as_batch(m, X)
    if X.shape[0] == 0:
        return np.empty(0)
    z = _logits(m, X)
    return _sigmoid(z) if m.config.classification else z


def forward(m: Mlp, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("forward takes a single feature vector")
    return float(predict(m, x)[0])


def _loss(config: MlpConfig, z: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    n = z.size
    if config.loss == "mae":
        r = z - y
        return float(np.abs(r).sum()) / n, np.sign(r) / n
    # stable: max(z, 0) - z*y + log(1 + exp(-|z|))
    loss = np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))
    return float(loss.sum()) / n, (_sigmoid(z) - y) / n


def _flat_views(shapes, buf: np.ndarray) -> list:
    views, off = [], 0
    for shape in shapes:
        size = int(np.prod(shape))
        views.append(buf[off : off + size].reshape(shape))
        off += size
    return views


def _backprop(m: Mlp, X: np.ndarray, y: np.ndarray, grads: list) -> float:
    """Fill ``grads`` (ordered like ``m.params``) in place; return mean loss."""
    acts = [X]
    pre = []
    h = X
    last = len(m.weights) - 1
    for i, (w, b) in enumerate(zip(m.weights, m.biases)):
        a = h @ w + b
        pre.append(a)
        h = np.maximum(a, 0.0) if i < last else a
        acts.append(h)
    loss, g = _loss(m.config, acts[-1][:, 0], y)
    delta = g[:, None]
    for i in range(last, -1, -1):
        np.dot(acts[i].T, delta, out=grads[2 * i])
        delta.sum(axis=0, out=grads[2 * i + 1])
        if i > 0:
            delta = (delta @ m.weights[i].T) * (pre[i - 1] > 0)
    return loss


def loss_and_grads(m: Mlp, X, y) -> tuple[float, list]:
    """Mean batch loss and its gradient, ordered like :attr:`Mlp.params`."""
    X = _as_batch(m, X)
    y = np.asarray(y, dtype=float).ravel()
    grads = [np.empty_like(p) for p in m.params]
    loss = _backprop(m, X, y, grads)
    return loss, grads


def train(m: Mlp, X, y, config: MlpConfig | None = None) -> tuple[Mlp, list[float]]:
    """Mini-batch Adam.  Returns a trained copy of ``m`` and the per-epoch
    mean training loss.

    Raises
    ------
    TrainingError
        If the loss becomes non-finite.
    """
    config = m.config if config is None else config
    X = _as_batch(m, X)
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] == 0:
        raise ValueError("cannot train on an empty dataset")
    if X.shape[0] != y.size:
        raise ValueError("features and targets are misaligned")
    # all parameters live in one flat buffer so Adam runs as a few vector ops
    shapes = [p.shape for p in m.params]
    theta = np.concatenate([p.ravel() for p in m.params])
    views = _flat_views(shapes, theta)
    model = Mlp(m.config, views[0::2], views[1::2])
    gbuf = np.zeros_like(theta)
    grads = _flat_views(shapes, gbuf)
    mom = np.zeros_like(theta)
    vel = np.zeros_like(theta)
    tmp = np.empty_like(theta)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(config.seed).spawn(2)[1]))
    n, bs, lr = y.size, config.batch_size, config.learning_rate
    history = []
    step = 0
    # overflow shows up as a non-finite loss, which is reported below
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(config.epochs):
            perm = rng.permutation(n)
            Xp, yp = X[perm], y[perm]
            total = 0.0
            for start in range(0, n, bs):
                xb, yb = Xp[start : start + bs], yp[start : start + bs]
                loss = _backprop(model, xb, yb, grads)
                if not np.isfinite(loss):
                    raise TrainingError(f"non-finite loss {loss!r} at epoch {epoch}, step {step}")
                total += loss * yb.size
                step += 1
                mom *= ADAM_BETA1
                mom += (1.0 - ADAM_BETA1) * gbuf
                vel *= ADAM_BETA2
                np.multiply(gbuf, gbuf, out=tmp)
                tmp *= 1.0 - ADAM_BETA2
                vel += tmp
                # theta -= lr * m_hat / (sqrt(v_hat) + eps)
                np.divide(vel, 1.0 - ADAM_BETA2**step, out=tmp)
                np.sqrt(tmp, out=tmp)
                tmp += ADAM_EPS
                np.divide(mom, tmp, out=tmp)
                tmp *= lr / (1.0 - ADAM_BETA1**step)
                theta -= tmp
            history.append(total / n)
    return model.copy(), history


@dataclass(frozen=True)
class Standardizer:
    """Z-score transform fitted on training features."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X) -> "Standardizer":
        X = np.asarray(X, dtype=float)
        std = X.std(axis=0)
        return cls(X.mean(axis=0), np.where(std > 0, std, 1.0))

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.scale
