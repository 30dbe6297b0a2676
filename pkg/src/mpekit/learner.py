"""A small probabilistic binary classifier trained by gradient descent.

Two architectures: a logistic-linear model on a per-coordinate polynomial
feature map, and a one-hidden-layer tanh perceptron (default width 16).
Training minimizes L2-regularized cross-entropy; full-batch plain gradient
descent is the default for determinism, with optional minibatching and an
Adam update for the harness-scale fits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .core import LabeledExample, labeled_to_arrays
from .errors import DegenerateDataError, DimensionError, DomainError
from .sampling import RngStream

PROBA_CLAMP = 1e-6


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 300
    learning_rate: float = 0.1
    l2: float = 1e-4
    batch_size: Optional[int] = None  # None = full batch
    seed: int = 0
    architecture: str = "mlp"  # "logistic" or "mlp"
    hidden: int = 16
    degree: int = 1
    optimizer: str = "gd"  # "gd" or "adam"

    def __post_init__(self):
        if self.epochs <= 0 or self.learning_rate <= 0 or self.l2 < 0:
            raise DomainError("epochs and learning rate must be positive, l2 >= 0")
        if self.batch_size is not None and self.batch_size <= 0:
            raise DomainError("batch_size must be positive when given")
        if self.architecture not in ("logistic", "mlp"):
            raise DomainError("architecture must be 'logistic' or 'mlp'")
        if self.optimizer not in ("gd", "adam"):
            raise DomainError("optimizer must be 'gd' or 'adam'")


@dataclass
class ClassifierModel:
    architecture: str
    input_dim: int
    degree: int
    hidden: int
    params: List[np.ndarray]
    feature_mean: np.ndarray
    feature_scale: np.ndarray
    loss_history: List[float] = field(default_factory=list)

    def _standardize(self, X: np.ndarray) -> np.ndarray:
        return (X - self.feature_mean) / self.feature_scale

    def _features(self, X: np.ndarray) -> np.ndarray:
        if self.architecture != "logistic" or self.degree == 1:
            return X
        return np.hstack([X**p for p in range(1, self.degree + 1)])


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _forward(model: ClassifierModel, X: np.ndarray):
    """Returns (probabilities, cache-for-backward)."""
    Xs = model._standardize(X)
    if model.architecture == "logistic":
        phi = model._features(Xs)
        w, b = model.params
        logits = phi @ w + b
        return _sigmoid(logits), (phi,)
    W1, b1, w2, b2 = model.params
    z1 = Xs @ W1 + b1
    a = np.tanh(z1)
    logits = a @ w2 + b2
    return _sigmoid(logits), (Xs, a)


def _loss_and_grads(model: ClassifierModel, X: np.ndarray, y: np.ndarray, l2: float):
    n = X.shape[0]
    p, cache = _forward(model, X)
    pc = np.clip(p, 1e-12, 1.0 - 1e-12)
    loss = -float(np.mean(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc)))
    dlogits = (p - y) / n
    if model.architecture == "logistic":
        (phi,) = cache
        w, b = model.params
        loss += 0.5 * l2 * float(w @ w)
        grads = [phi.T @ dlogits + l2 * w, np.array(np.sum(dlogits))]
        return loss, grads
    Xs, a = cache
    W1, b1, w2, b2 = model.params
    loss += 0.5 * l2 * (float(np.sum(W1 * W1)) + float(w2 @ w2))
    dw2 = a.T @ dlogits + l2 * w2
    db2 = np.array(np.sum(dlogits))
    dz1 = np.outer(dlogits, w2) * (1.0 - a * a)
    dW1 = Xs.T @ dz1 + l2 * W1
    db1 = dz1.sum(axis=0)
    return loss, [dW1, db1, dw2, db2]


def _init_model(d: int, config: TrainConfig, X: np.ndarray, gen: np.random.Generator) -> ClassifierModel:
    mean = X.mean(axis=0)
    scale = np.maximum(X.std(axis=0), 1e-8)
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(scale))):
        raise DomainError("non-finite features")
    if config.architecture == "logistic":
        params = [np.zeros(d * config.degree), np.array(0.0)]
    else:
        h = config.hidden
        params = [
            gen.normal(0.0, 1.0 / np.sqrt(d), size=(d, h)),
            np.zeros(h),
            gen.normal(0.0, 1.0 / np.sqrt(h), size=h),
            np.array(0.0),
        ]
    return ClassifierModel(
        architecture=config.architecture,
        input_dim=d,
        degree=config.degree,
        hidden=config.hidden,
        params=params,
        feature_mean=mean,
        feature_scale=scale,
    )


def train(
    examples: Sequence[LabeledExample],
    config: TrainConfig,
    rng: Optional[RngStream] = None,
) -> ClassifierModel:
    """Fit a classifier to binary-labeled examples.

    Deterministic given (config, rng); when rng is omitted a stream is
    derived from config.seed.
    """
    X, y = labeled_to_arrays(examples)
    if len(set(y.tolist())) < 2:
        raise DegenerateDataError("training data contains a single class")
    if rng is None:
        rng = RngStream(config.seed)
    gen = rng.generator()
    model = _init_model(X.shape[1], config, X, gen)

    if config.optimizer == "adam":
        m = [np.zeros_like(p) for p in model.params]
        v = [np.zeros_like(p) for p in model.params]
        b1, b2, eps = 0.9, 0.999, 1e-8
        t = 0

    n = X.shape[0]
    batch = config.batch_size or n
    for epoch in range(config.epochs):
        if batch >= n:
            order = np.arange(n)
        else:
            order = gen.permutation(n)
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, n, batch):
            idx = order[start : start + batch]
            loss, grads = _loss_and_grads(model, X[idx], y[idx], config.l2)
            epoch_loss += loss
            n_batches += 1
            if config.optimizer == "gd":
                for p, g in zip(model.params, grads):
                    p -= config.learning_rate * g
            else:
                t += 1
                for i, (p, g) in enumerate(zip(model.params, grads)):
                    m[i] = b1 * m[i] + (1 - b1) * g
                    v[i] = b2 * v[i] + (1 - b2) * g * g
                    mh = m[i] / (1 - b1**t)
                    vh = v[i] / (1 - b2**t)
                    p -= config.learning_rate * mh / (np.sqrt(vh) + eps)
        model.loss_history.append(epoch_loss / n_batches)
    return model


def predict_proba(model: ClassifierModel, x) -> np.ndarray | float:
    """Probability of label 1; accepts a single vector or an (n, d) array."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim <= 1 and model.input_dim == max(arr.size, 1)
    if arr.ndim <= 1:
        arr = arr.reshape(-1, model.input_dim) if arr.size % model.input_dim == 0 else arr
    if arr.ndim != 2 or arr.shape[1] != model.input_dim:
        raise DimensionError(
            f"expected points of dimension {model.input_dim}, got shape {np.shape(x)}"
        )
    p, _ = _forward(model, arr)
    p = np.clip(p, 1e-12, 1.0 - 1e-12)
    if single and p.size == 1:
        return float(p[0])
    return p


def gradient_check(model: ClassifierModel, batch: Sequence[LabeledExample]) -> float:
    """Max relative deviation between analytic and central-difference gradients."""
    X, y = labeled_to_arrays(batch)
    if X.shape[0] == 0:
        raise DomainError("batch must be non-empty")
    _, grads = _loss_and_grads(model, X, y, l2=0.0)
    step = 1e-5
    worst = 0.0
    for p, g in zip(model.params, grads):
        flat = p.reshape(-1)
        gflat = np.asarray(g).reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            lp, _ = _loss_and_grads(model, X, y, l2=0.0)
            flat[i] = orig - step
            lm, _ = _loss_and_grads(model, X, y, l2=0.0)
            flat[i] = orig
            numeric = (lp - lm) / (2 * step)
            denom = max(abs(gflat[i]), abs(numeric), 1e-6)
            worst = max(worst, abs(gflat[i] - numeric) / denom)
    return worst
