"""Mean squared error and coefficient of determination."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ParameterError


@dataclass(frozen=True)
class AccuracyReport:
    mse: float
    r2: float
    per_fold: tuple[tuple[float, float], ...] = field(default=())

    def __str__(self):
        return f"(MSE={self.mse:.4g}, R2={self.r2:.4f})"


def evaluate(y_true, y_pred) -> AccuracyReport:
    y = np.asarray(y_true, dtype=float).ravel()
    yhat = np.asarray(y_pred, dtype=float).ravel()
    if y.shape != yhat.shape:
        raise ParameterError("y_true and y_pred differ in length")
    if len(y) < 2:
        raise ParameterError("need at least two points")
    sse = float(np.sum((y - yhat) ** 2))
    sst = float(np.sum((y - y.mean()) ** 2))
    if sst == 0.0:
        raise ParameterError("R2 is undefined for a constant target")
    return AccuracyReport(sse / len(y), 1.0 - sse / sst)
