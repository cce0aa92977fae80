"""Linear, polynomial and RBF kernels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError

KINDS = ("linear", "polynomial", "rbf")


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"
    gamma: float = 1.0 / 6.0
    degree: int = 3
    coef0: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"kernel kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind != "linear" and not self.gamma > 0:
            raise ParameterError(f"gamma must be positive, got {self.gamma}")
        if self.kind == "polynomial" and (int(self.degree) != self.degree or self.degree < 1):
            raise ParameterError(f"degree must be a positive integer, got {self.degree}")


def kernel_eval(spec: KernelSpec, x, x2) -> float:
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x.shape != x2.shape:
        raise ParameterError("kernel arguments must have equal length")
    if spec.kind == "linear":
        return float(x @ x2)
    if spec.kind == "polynomial":
        return float((spec.gamma * (x @ x2) + spec.coef0) ** spec.degree)
    d = x - x2
    return float(np.exp(-spec.gamma * (d @ d)))


def kernel_matrix(spec: KernelSpec, A, B=None) -> np.ndarray:
    """Gram matrix ``K[i, j] = k(A[i], B[j])``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = A if B is None else np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise ParameterError("kernel arguments must have equal length")
    if spec.kind == "linear":
        return A @ B.T
    if spec.kind == "polynomial":
        return (spec.gamma * (A @ B.T) + spec.coef0) ** spec.degree
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * (A @ B.T)
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-spec.gamma * sq)
