from .ann import AnnConfig, AnnModel, hidden_neurons_rule, predict_ann, train_ann
from .crossval import cross_validate, cross_validate_full
from .kernels import KernelSpec, kernel_eval, kernel_matrix
from .linear import LinearModel, predict_linear, train_linear
from .metrics import AccuracyReport, evaluate
from .models import MODEL_KINDS, ModelSpec, TrainedModel, fit_model, load_model, save_model
from .svr import ConvergenceWarning, SvrModel, kkt_violations, predict_svr, train_svr
