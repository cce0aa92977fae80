"""k-fold cross-validation with per-fold MSE and R2."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..dataset import Dataset, kfold_plan
from ..errors import NetR0Error
from .metrics import AccuracyReport, evaluate
from .models import ModelSpec, fit_model

log = logging.getLogger(__name__)


class FoldError(NetR0Error):
    def __init__(self, fold, cause):
        self.fold = fold
        super().__init__(f"fold {fold}: {cause}")


@dataclass(frozen=True)
class CrossValidation:
    report: AccuracyReport
    predictions: np.ndarray  # out-of-fold prediction per row
    assignments: np.ndarray


def cross_validate_full(dataset: Dataset, spec: ModelSpec, k: int = 10, seed=0) -> CrossValidation:
    X, y = dataset.X, dataset.y
    plan = kfold_plan(len(dataset), k, seed)
    oof = np.empty(len(y))
    per_fold = []
    for fold, (train, test) in enumerate(plan.folds()):
        try:
            tm = fit_model(spec, X[train], y[train], dataset.feature_names, seed=seed + fold)
            pred = tm.predict(X[test])
            rep = evaluate(y[test], pred)
        except NetR0Error as exc:
            raise FoldError(fold, exc) from exc
        oof[test] = pred
        per_fold.append((rep.mse, rep.r2))
        log.debug("%s fold %d: %s", spec.kind, fold, rep)
    arr = np.array(per_fold)
    report = AccuracyReport(float(arr[:, 0].mean()), float(arr[:, 1].mean()), tuple(per_fold))
    return CrossValidation(report, oof, plan.assignments)


def cross_validate(dataset: Dataset, spec: ModelSpec, k: int = 10, seed=0) -> AccuracyReport:
    """Train on k-1 folds, score the held-out fold; report fold means."""
    return cross_validate_full(dataset, spec, k, seed).report
