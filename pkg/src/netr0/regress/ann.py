"""Small fully connected regression network trained with Adam.

Architecture (matching a three-layer sequential model): a rectified dense layer
of ``N_i`` units, a rectified hidden layer of ``N_h`` units and one linear
output unit. Weights are stored as ``(fan_in, fan_out)`` matrices.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ..errors import DivergenceError, ParameterError

log = logging.getLogger(__name__)


def hidden_neurons_rule(n_samples: int, n_inputs: int, n_outputs: int, alpha: float) -> int:
    """Upper bound on hidden units, ``floor(N_s / (alpha (N_i + N_o)))``."""
    if not (2 <= alpha <= 10):
        raise ParameterError(f"alpha must be in [2, 10], got {alpha}")
    if min(n_samples, n_inputs, n_outputs) <= 0:
        raise ParameterError("sample, input and output counts must be positive")
    return math.floor(n_samples / (alpha * (n_inputs + n_outputs)))


@dataclass(frozen=True)
class AnnConfig:
    n_hidden: int = 23
    epochs: int = 50
    batch_size: int = 5
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    init_std: float = 0.05
    zero_init: bool = False
    input_layer: bool = True

    def __post_init__(self):
        if self.n_hidden < 1 or self.epochs < 0 or self.batch_size < 1:
            raise ParameterError("n_hidden and batch_size must be positive, epochs non-negative")
        if not self.learning_rate > 0:
            raise ParameterError("learning_rate must be positive")


@dataclass(frozen=True)
class AnnModel:
    layer_sizes: tuple[int, int, int]  # (N_i, N_h, N_o)
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    loss_history: tuple[float, ...] = ()

    @property
    def n_features(self) -> int:
        return self.weights[0].shape[0]


def layer_dims(n_inputs: int, cfg: AnnConfig) -> list[int]:
    dims = [n_inputs]
    if cfg.input_layer:
        dims.append(n_inputs)
    return dims + [cfg.n_hidden, 1]


def init_params(dims, cfg: AnnConfig, rng):
    ws, bs = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        if cfg.zero_init:
            ws.append(np.zeros((fan_in, fan_out)))
        else:
            ws.append(rng.normal(0.0, cfg.init_std, size=(fan_in, fan_out)))
        bs.append(np.zeros(fan_out))
    return ws, bs


def forward(weights, biases, X):
    """Return (output vector, pre-activations, activations)."""
    a = X
    pres, acts = [], [X]
    last = len(weights) - 1
    for li, (W, b) in enumerate(zip(weights, biases)):
        z = a @ W + b
        pres.append(z)
        a = z if li == last else np.maximum(z, 0.0)
        acts.append(a)
    return a[:, 0], pres, acts


def loss_and_grads(weights, biases, X, y):
    """Mean squared error of a batch and its gradients (ReLU'(0) taken as 0)."""
    out, pres, acts = forward(weights, biases, X)
    err = out - y
    loss = float(np.mean(err ** 2))
    delta = (2.0 / len(y)) * err[:, None]
    gw = [None] * len(weights)
    gb = [None] * len(weights)
    for li in range(len(weights) - 1, -1, -1):
        gw[li] = acts[li].T @ delta
        gb[li] = delta.sum(axis=0)
        if li:
            delta = (delta @ weights[li].T) * (pres[li - 1] > 0)
    return loss, gw, gb


def train_ann(X, y, cfg: AnnConfig = AnnConfig(), seed=None) -> AnnModel:
    """Minibatch Adam on MSE; rows are reshuffled every epoch."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != len(y):
        raise ParameterError("X must be (m, d) with one label per row")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ParameterError("non-finite value in training data")
    rng = np.random.default_rng(seed)
    dims = layer_dims(X.shape[1], cfg)
    ws, bs = init_params(dims, cfg, rng)
    params = ws + bs
    m1 = [np.zeros_like(p) for p in params]
    m2 = [np.zeros_like(p) for p in params]
    b1, b2 = cfg.beta1, cfg.beta2
    t = 0
    history = []
    nl = len(ws)
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(y))
        for start in range(0, len(y), cfg.batch_size):
            rows = order[start:start + cfg.batch_size]
            _, gw, gb = loss_and_grads(ws, bs, X[rows], y[rows])
            t += 1
            lr_t = cfg.learning_rate * math.sqrt(1 - b2 ** t) / (1 - b1 ** t)
            for k, g in enumerate(gw + gb):
                m1[k] = b1 * m1[k] + (1 - b1) * g
                m2[k] = b2 * m2[k] + (1 - b2) * g * g
                params[k] -= lr_t * m1[k] / (np.sqrt(m2[k]) + cfg.adam_eps)
        ws, bs = params[:nl], params[nl:]
        out, _, _ = forward(ws, bs, X)
        loss = float(np.mean((out - y) ** 2))
        if not math.isfinite(loss):
            raise DivergenceError(epoch, loss)
        history.append(loss)
        log.debug("epoch %d: training MSE %.5g", epoch, loss)
    return AnnModel((X.shape[1], cfg.n_hidden, 1), tuple(ws), tuple(bs), tuple(history))


def predict_ann(model: AnnModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.n_features:
        raise ParameterError(f"model expects {model.n_features} features, got {X.shape[1]}")
    out, _, _ = forward(model.weights, model.biases, X)
    return out
