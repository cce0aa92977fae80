"""Feature contribution indices from principal components of the data matrix.

Each feature column ``d_j`` is projected onto the leading ``p`` eigenvectors of
a covariance matrix; the index is ``c_j = sum_i |<d_j, X_i>|``. Absolute
projections make the index independent of eigenvector signs. Indices are then
min-max scaled to ``[0, 1]``.

Two covariance layouts are supported:

``sample``  (default) the ``n x n`` covariance across samples, ``D D' / (N - 1)``
            after centering; its eigenvectors live in sample space, the same
            space as the feature columns.
``feature`` the usual ``N x N`` feature covariance; feature columns are then
            projected onto the unit-norm score vectors ``D X_i / |D X_i|``.

For non-zero eigenvalues the two layouts share their spectrum up to the
normalizing constant and give the same indices; the sample layout is the
expensive one (``n x n`` eigenproblem).
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import ParameterError

MODES = ("sample", "feature")


class RankWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PcaResult:
    covariance: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, paired with eigenvalues
    rank: int


@dataclass(frozen=True)
class ContributionReport:
    feature_names: tuple[str, ...]
    raw_indices: np.ndarray
    normalized: np.ndarray
    ranking: tuple[str, ...]
    p_used: int
    mode: str
    standardized: bool

    def top(self, m: int) -> tuple[str, ...]:
        return self.ranking[:m]

    def rows(self):
        """(feature, raw, normalized, rank) in ranking order, rank starting at 1."""
        pos = {name: i for i, name in enumerate(self.feature_names)}
        return [(name, float(self.raw_indices[pos[name]]), float(self.normalized[pos[name]]), r + 1)
                for r, name in enumerate(self.ranking)]

    def table(self) -> str:
        lines = [f"{'rank':>4}  {'feature':<8} {'raw':>12} {'normalized':>10}"]
        for name, raw, norm, r in self.rows():
            lines.append(f"{r:>4}  {name:<8} {raw:>12.5g} {norm:>10.4f}")
        lines.append(f"components used: {self.p_used} ({self.mode} covariance, "
                     f"{'standardized' if self.standardized else 'raw'} columns, absolute projections)")
        return "\n".join(lines)


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so that its largest-magnitude entry is positive."""
    v = np.array(vectors, dtype=float)
    if v.size == 0:
        return v
    idx = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[idx, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    return v * signs


def standardize_columns(D) -> np.ndarray:
    """Zero-mean, unit-variance columns; constant columns become all zero."""
    D = np.asarray(D, dtype=float)
    sd = D.std(axis=0, ddof=1) if D.shape[0] > 1 else np.zeros(D.shape[1])
    centered = D - D.mean(axis=0)
    safe = np.where(sd > 0, sd, 1.0)
    return np.where(sd > 0, centered / safe, 0.0)


def pca(D, center: bool = True, mode: str = "sample") -> PcaResult:
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] < 2:
        raise ParameterError("data matrix must be 2-D with at least two rows")
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {MODES}")
    if center:
        D = D - D.mean(axis=0)
    n, nf = D.shape
    if mode == "sample":
        cov = D @ D.T / max(nf - 1, 1)
    else:
        cov = D.T @ D / (n - 1)
    cov = (cov + cov.T) / 2
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = fix_signs(vecs[:, order])
    scale = max(abs(vals[0]), 1.0) if len(vals) else 1.0
    rank = int(np.sum(vals > scale * 1e-10 * len(vals)))
    if rank == 0 or np.allclose(D, D[0]):
        warnings.warn("data matrix is degenerate (identical rows)", RankWarning, stacklevel=2)
    return PcaResult(cov, vals, vecs, rank)


def energy_components(eigenvalues, fraction: float = 0.9) -> int:
    """Smallest p whose leading eigenvalues hold ``fraction`` of the total."""
    lam = np.clip(np.asarray(eigenvalues, dtype=float), 0.0, None)
    total = lam.sum()
    if total <= 0:
        return 1
    return int(np.searchsorted(np.cumsum(lam) / total, fraction - 1e-12) + 1)


def contribution_indices(D, p: int | None = None, *, feature_names=None, standardize: bool = True,
                         mode: str = "sample", energy: float = 0.9) -> ContributionReport:
    D = np.asarray(D, dtype=float)
    if D.ndim != 2:
        raise ParameterError("data matrix must be 2-D")
    names = tuple(feature_names) if feature_names is not None else tuple(f"x{i}" for i in range(D.shape[1]))
    if len(names) != D.shape[1]:
        raise ParameterError("feature_names length does not match data")
    work = standardize_columns(D) if standardize else D
    res = pca(work, center=not standardize, mode=mode)
    if not standardize:
        work = work - work.mean(axis=0)
    if p is None:
        p = min(energy_components(res.eigenvalues, energy), max(res.rank, 1))
    if not 1 <= p <= max(res.rank, 1):
        raise ParameterError(f"p must be in [1, {res.rank}] (covariance rank), got {p}")
    X = res.eigenvectors[:, :p]
    if mode == "sample":
        proj = work.T @ X  # (features, p)
    else:
        # column j against the unit score vector D X_i / |D X_i|
        lam = np.clip(res.eigenvalues[:p], 0.0, None)
        proj = X * np.sqrt(lam * (D.shape[0] - 1))
    raw = np.abs(proj).sum(axis=1)
    normalized = min_max(raw)
    order = sorted(range(len(names)), key=lambda j: (-normalized[j], j))
    return ContributionReport(names, raw, normalized, tuple(names[j] for j in order), p, mode, standardize)


def min_max(values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.zeros_like(v) if hi == 0 else np.ones_like(v)
    return (v - lo) / (hi - lo)


def rank_dataset(dataset: Dataset, p: int | None = None, **kwargs) -> ContributionReport:
    return contribution_indices(dataset.X, p, feature_names=dataset.feature_names, **kwargs)


def select_features(dataset: Dataset, ranking, m: int) -> Dataset:
    """Keep the top ``m`` ranked features (in ranking order)."""
    names = list(ranking.ranking if isinstance(ranking, ContributionReport) else ranking)
    if not 1 <= m <= len(dataset.feature_names):
        raise ParameterError(f"m must be in [1, {len(dataset.feature_names)}], got {m}")
    missing = [n for n in names[:m] if n not in dataset.feature_names]
    if missing:
        raise ParameterError(f"ranked features not in dataset: {missing}")
    return dataset.columns(names[:m])


def write_report_csv(report: ContributionReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["feature", "raw_index", "normalized_index", "rank"])
        for name, raw, norm, r in report.rows():
            w.writerow([name, repr(raw), repr(norm), r])
