"""Ordinary least squares through the Moore-Penrose pseudoinverse."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray  # [bias, w_1, ..., w_d]

    @property
    def n_features(self) -> int:
        return len(self.weights) - 1


def design_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ParameterError("X must be two-dimensional")
    return np.hstack([np.ones((X.shape[0], 1)), X])


def train_linear(X, y) -> LinearModel:
    """Minimum-norm least-squares weights ``pinv([1 X]) @ y``."""
    A = design_matrix(X)
    y = np.asarray(y, dtype=float).ravel()
    if len(y) != A.shape[0]:
        raise ParameterError(f"X has {A.shape[0]} rows but y has {len(y)} entries")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(y))):
        raise ParameterError("non-finite value in training data")
    w = np.linalg.pinv(A) @ y
    return LinearModel(w)


def predict_linear(model: LinearModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.n_features:
        raise ParameterError(f"model expects {model.n_features} features, got {X.shape[1]}")
    return design_matrix(X) @ model.weights
