"""Binary logistic classifier with seeded mini-batch SGD training.

Both quality-control heads and the augmentation miner share this core. The
classifier is a flat weight vector over a declared feature layout; a
two-class softmax head reduces to exactly this logistic form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

FeatureLayout = tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    epochs: int = 30
    learning_rate: float = 0.5
    batch_size: int = 16


@dataclass(frozen=True)
class LinearClassifier:
    weights: np.ndarray
    bias: float
    feature_layout: FeatureLayout
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        layout_dim = sum(length for _, length in self.feature_layout)
        if layout_dim != len(self.weights):
            raise ValueError(
                f"feature layout covers {layout_dim} dims, weights have {len(self.weights)}")
        if not (np.all(np.isfinite(self.weights)) and np.isfinite(self.bias)):
            raise ValueError("classifier parameters must be finite")

    @property
    def dim(self) -> int:
        return len(self.weights)

    def score(self, features: np.ndarray) -> float:
        """Probability of the positive class."""
        return float(sigmoid(features @ self.weights + self.bias))


def sigmoid(z):
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))),
                    np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))


def logistic_loss(weights: np.ndarray, bias: float,
                  x: np.ndarray, y: np.ndarray) -> float:
    """Mean cross-entropy, computed in the overflow-safe log1p form."""
    z = x @ weights + bias
    return float(np.mean(np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))))


def logistic_grad(weights: np.ndarray, bias: float,
                  x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    residual = sigmoid(x @ weights + bias) - y
    return x.T @ residual / len(y), float(np.mean(residual))


def train_logistic(x: np.ndarray, y: Sequence[int], feature_layout: FeatureLayout,
                   config: TrainConfig) -> LinearClassifier:
    """Zero-initialized mini-batch SGD; deterministic given the seed.

    The returned parameters are the epoch snapshot with the lowest full-data
    loss, so the recorded final loss never exceeds the initial one.
    """
    y_arr = np.asarray(y, dtype=float)
    if x.ndim != 2 or len(x) != len(y_arr):
        raise ValueError("feature matrix and labels must align")
    n, dim = x.shape
    rng = np.random.default_rng(config.seed)
    weights = np.zeros(dim)
    bias = 0.0
    initial_loss = logistic_loss(weights, bias, x, y_arr)
    loss_curve = [initial_loss]
    best = (initial_loss, weights.copy(), bias)
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            grad_w, grad_b = logistic_grad(weights, bias, x[idx], y_arr[idx])
            weights -= config.learning_rate * grad_w
            bias -= config.learning_rate * grad_b
        epoch_loss = logistic_loss(weights, bias, x, y_arr)
        loss_curve.append(epoch_loss)
        if epoch_loss < best[0]:
            best = (epoch_loss, weights.copy(), bias)
    final_loss, best_weights, best_bias = best
    return LinearClassifier(
        weights=best_weights,
        bias=best_bias,
        feature_layout=feature_layout,
        metadata={
            "seed": config.seed,
            "epochs": config.epochs,
            "learning_rate": config.learning_rate,
            "initial_loss": initial_loss,
            "final_loss": final_loss,
            "loss_curve": loss_curve,
        },
    )


def save_classifier(path: str | Path, model: LinearClassifier) -> None:
    obj = {
        "feature_layout": [[name, length] for name, length in model.feature_layout],
        "weights": [float(w) for w in model.weights],
        "bias": model.bias,
        "metadata": model.metadata,
    }
    Path(path).write_text(json.dumps(obj), encoding="utf-8")


def load_classifier(path: str | Path) -> LinearClassifier:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    return LinearClassifier(
        weights=np.array(obj["weights"]),
        bias=obj["bias"],
        feature_layout=tuple((name, length) for name, length in obj["feature_layout"]),
        metadata=obj["metadata"],
    )
