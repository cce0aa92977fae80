"""Uniform fit/predict/serialize layer over the three regression families."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ParameterError, ParseError
from .ann import AnnConfig, AnnModel, predict_ann, train_ann
from .kernels import KernelSpec
from .linear import LinearModel, predict_linear, train_linear
from .svr import SvrModel, predict_svr, train_svr

MODEL_KINDS = ("linear", "svr-linear", "svr-poly", "svr-rbf", "ann")

FORMAT_VERSION = 1


@dataclass(frozen=True)
class ModelSpec:
    """Model kind plus hyperparameters.

    SVR params: ``C``, ``epsilon``, ``tol``, ``max_iter``, ``gamma``, ``degree``,
    ``coef0``; RBF ``gamma`` defaults to ``1 / n_features``, polynomial to 0.1
    with degree 2. ANN params are :class:`AnnConfig` fields.
    """

    kind: str
    params: dict = field(default_factory=dict)
    standardize: bool = False

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ParameterError(f"model kind must be one of {MODEL_KINDS}, got {self.kind!r}")


SVR_KEYS = ("C", "epsilon", "tol", "max_iter")


def kernel_for(spec: ModelSpec, n_features: int) -> KernelSpec:
    p = spec.params
    if spec.kind == "svr-linear":
        return KernelSpec("linear")
    if spec.kind == "svr-poly":
        return KernelSpec("polynomial", gamma=p.get("gamma", 0.1), degree=p.get("degree", 2),
                          coef0=p.get("coef0", 0.0))
    return KernelSpec("rbf", gamma=p.get("gamma") or 1.0 / n_features)


def ann_config(spec: ModelSpec) -> AnnConfig:
    return AnnConfig(**spec.params)


@dataclass(frozen=True)
class TrainedModel:
    spec: ModelSpec
    model: LinearModel | SvrModel | AnnModel
    feature_names: tuple[str, ...]
    scale_mean: np.ndarray | None = None
    scale_std: np.ndarray | None = None

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def _prep(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise ParameterError(
                f"model was trained on {self.n_features} features {self.feature_names}, got {X.shape[1]}")
        if self.scale_mean is not None:
            X = (X - self.scale_mean) / self.scale_std
        return X

    def predict(self, X) -> np.ndarray:
        X = self._prep(X)
        if isinstance(self.model, LinearModel):
            return predict_linear(self.model, X)
        if isinstance(self.model, SvrModel):
            return predict_svr(self.model, X)
        return predict_ann(self.model, X)


def fit_model(spec: ModelSpec, X, y, feature_names=None, seed=None) -> TrainedModel:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ParameterError("X must be two-dimensional")
    names = tuple(feature_names) if feature_names is not None else tuple(f"x{i}" for i in range(X.shape[1]))
    if len(names) != X.shape[1]:
        raise ParameterError("feature_names length does not match X")
    mean = std = None
    if spec.standardize:
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        std = np.where(std > 0, std, 1.0)
        X = (X - mean) / std
    if spec.kind == "linear":
        model = train_linear(X, y)
    elif spec.kind == "ann":
        model = train_ann(X, y, ann_config(spec), seed)
    else:
        kw = {k: spec.params[k] for k in SVR_KEYS if k in spec.params}
        model = train_svr(X, y, kernel_for(spec, X.shape[1]), **kw)
    return TrainedModel(spec, model, names, mean, std)


# --- serialization ------------------------------------------------------------


def _arr(a):
    return None if a is None else np.asarray(a).tolist()


def model_to_dict(tm: TrainedModel) -> dict:
    m = tm.model
    if isinstance(m, LinearModel):
        body = {"weights": _arr(m.weights)}
    elif isinstance(m, SvrModel):
        body = {
            "kernel": asdict(m.kernel),
            "C": m.C,
            "epsilon": m.epsilon,
            "dual_coefs": _arr(m.dual_coefs),
            "bias": m.bias,
            "support_inputs": _arr(m.support_inputs),
            "support_indices": _arr(m.support_indices),
            "converged": m.converged,
            "n_iter": m.n_iter,
            "gap": m.gap,
        }
    else:
        body = {
            "layer_sizes": list(m.layer_sizes),
            "weights": [_arr(w) for w in m.weights],
            "biases": [_arr(b) for b in m.biases],
            "loss_history": list(m.loss_history),
        }
    return {
        "format": FORMAT_VERSION,
        "kind": tm.spec.kind,
        "hyperparameters": tm.spec.params,
        "standardize": tm.spec.standardize,
        "feature_names": list(tm.feature_names),
        "scale_mean": _arr(tm.scale_mean),
        "scale_std": _arr(tm.scale_std),
        "model": body,
    }


def model_from_dict(d: dict) -> TrainedModel:
    try:
        spec = ModelSpec(d["kind"], dict(d.get("hyperparameters") or {}), bool(d.get("standardize")))
        b = d["model"]
        if spec.kind == "linear":
            model = LinearModel(np.array(b["weights"], dtype=float))
        elif spec.kind == "ann":
            model = AnnModel(tuple(b["layer_sizes"]),
                             tuple(np.array(w, dtype=float) for w in b["weights"]),
                             tuple(np.array(x, dtype=float) for x in b["biases"]),
                             tuple(b.get("loss_history", ())))
        else:
            nf = len(d["feature_names"])
            model = SvrModel(KernelSpec(**b["kernel"]), b["C"], b["epsilon"],
                             np.array(b["dual_coefs"], dtype=float), b["bias"],
                             np.array(b["support_inputs"], dtype=float).reshape(-1, nf),
                             np.array(b["support_indices"], dtype=np.int64),
                             b.get("converged", True), b.get("n_iter", 0), b.get("gap", 0.0))
        mean = None if d.get("scale_mean") is None else np.array(d["scale_mean"])
        std = None if d.get("scale_std") is None else np.array(d["scale_std"])
        return TrainedModel(spec, model, tuple(d["feature_names"]), mean, std)
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed model file ({exc!r})") from None


def save_model(tm: TrainedModel, path, extra: dict | None = None) -> None:
    d = model_to_dict(tm)
    if extra:
        d["provenance"] = extra
    Path(path).write_text(json.dumps(d, indent=1))


def load_model(path) -> TrainedModel:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc), path) from None
    return model_from_dict(d)
