"""Command line entry point: ``netr0 {generate,train,predict,rank,report}``.

Settings come from built-in profiles, then an optional YAML ``--config`` file,
then command line flags (last wins). Every data file written gets a
``<file>.meta.json`` sidecar (model files carry the same block inline) with the
effective settings, their SHA-256 digest and the seed.

Exit status: 0 success, 1 user error (bad input, bad parameters), 2 internal
or numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .dataset import PROFILES, BuildConfig, Dataset, build_dataset, load_csv, save_csv, shuffle
from .epidemic import EpidemicParams, TRACE_COLUMNS, compute_r0, herd_immunity_threshold, simulate
from .errors import DivergenceError, NetR0Error
from .graph import load_edge_list
from .netmetrics import FEATURE_NAMES, extract_features
from .ranking import MODES, rank_dataset, select_features, write_report_csv
from .regress import MODEL_KINDS, ModelSpec, cross_validate_full, evaluate, fit_model, load_model, save_model
from .regress.ann import AnnConfig, hidden_neurons_rule

log = logging.getLogger("netr0")

EXIT_OK, EXIT_USER, EXIT_INTERNAL = 0, 1, 2

DEFAULT_FOLDS = 10
DEFAULT_SEED = 0


class UsageError(NetR0Error):
    """Command line or config problem detected by the CLI itself."""


# --- settings -------------------------------------------------------------------


def deep_merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def read_config(path) -> dict:
    if path is None:
        return {}
    try:
        data = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    except yaml.YAMLError as exc:
        raise UsageError(f"{path}: invalid YAML ({exc})") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise UsageError(f"{path}: top level must be a mapping")
    return data


def digest(settings: dict) -> str:
    blob = json.dumps(settings, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def provenance(command: str, settings: dict, seed) -> dict:
    return {"tool": "netr0", "version": __version__, "command": command,
            "seed": seed, "config_digest": digest(settings), "config": settings}


def write_sidecar(path, prov: dict) -> Path:
    side = Path(str(path) + ".meta.json")
    side.write_text(json.dumps(prov, indent=1, sort_keys=True, default=str) + "\n")
    return side


def build_settings(args, cfg: dict) -> BuildConfig:
    profile = args.profile or cfg.get("profile", "desk")
    if profile not in PROFILES:
        raise UsageError(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}")
    merged = deep_merge(PROFILES[profile].to_dict(), cfg.get("build", {}))
    if args.seed is not None or "seed" in cfg:
        merged["master_seed"] = seed_of(args, cfg)
    if args.jobs is not None:
        merged["jobs"] = args.jobs
    build = BuildConfig.from_dict(merged)
    count = args.count if args.count is not None else cfg.get("count")
    if count is not None:
        build = build.with_counts(int(count))
    return build


def epidemic_settings(args, cfg: dict) -> EpidemicParams:
    profile = args.profile or cfg.get("profile", "desk")
    if profile not in PROFILES:
        raise UsageError(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}")
    base = PROFILES[profile].epidemic
    fields = {k: getattr(base, k) for k in base.__dataclass_fields__}
    fields.update(cfg.get("build", {}).get("epidemic", {}))
    fields.update(cfg.get("epidemic", {}))
    return EpidemicParams(**fields)


def seed_of(args, cfg: dict) -> int:
    return int(args.seed if args.seed is not None else cfg.get("seed", DEFAULT_SEED))


# --- generate -------------------------------------------------------------------


def cmd_generate(args, cfg: dict) -> int:
    build = build_settings(args, cfg)
    out = Path(args.out or cfg.get("out") or "dataset.csv")
    settings = build.to_dict()
    ds = build_dataset(build)
    save_csv(ds, out)
    write_sidecar(out, provenance("generate", settings, build.master_seed) | {"retries": ds.retries})
    print(f"wrote {len(ds)} rows to {out} (n={build.n}, seed={build.master_seed})")
    fams = np.array(ds.families)
    y = ds.y
    for fam in build.families:
        yy = y[fams == fam]
        if len(yy):
            print(f"  {fam:<4} {len(yy):>5} rows  R0 in [{yy.min():.3f}, {yy.max():.3f}]  "
                  f"median {np.median(yy):.3f}  zeros {int((yy == 0).sum())}")
    print(f"  connectivity retries: {ds.retries}")
    return EXIT_OK


# --- train ----------------------------------------------------------------------


def model_settings(args, cfg: dict) -> ModelSpec:
    mcfg = dict(cfg.get("model", {}))
    kind = args.model or mcfg.get("kind", "svr-rbf")
    params = dict(mcfg.get("params", {}))
    for key in ("C", "epsilon", "gamma", "degree", "coef0", "n_hidden", "epochs"):
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    standardize = bool(args.standardize or mcfg.get("standardize", False))
    return ModelSpec(kind, params, standardize)


def resolve_ann_hidden(spec: ModelSpec, n_samples: int, n_inputs: int, alpha) -> ModelSpec:
    """Fill in or check ``n_hidden`` against ``floor(N_s / (alpha (N_i + N_o)))``."""
    params = dict(spec.params)
    if alpha is not None:
        params["n_hidden"] = max(1, hidden_neurons_rule(n_samples, n_inputs, 1, alpha))
    limit = hidden_neurons_rule(n_samples, n_inputs, 1, 2)
    if "n_hidden" in params:
        if params["n_hidden"] > limit:
            raise UsageError(
                f"n_hidden={params['n_hidden']} exceeds the rule-of-thumb limit {limit} for "
                f"{n_samples} samples and {n_inputs} inputs (it would need alpha < 2); "
                f"use --alpha in [2, 10] or a smaller --n-hidden")
    else:
        params["n_hidden"] = max(1, min(AnnConfig.n_hidden, limit))
        if params["n_hidden"] != AnnConfig.n_hidden:
            log.warning("using n_hidden=%d (default %d capped by the alpha=2 limit)",
                        params["n_hidden"], AnnConfig.n_hidden)
    return ModelSpec(spec.kind, params, spec.standardize)


def load_dataset_arg(args, cfg):
    path = args.data or cfg.get("data")
    if not path:
        raise UsageError("no dataset given (--data)")
    ds = load_csv(path)
    features = args.features or cfg.get("features")
    if features:
        names = features.split(",") if isinstance(features, str) else list(features)
        ds = ds.columns([n.strip() for n in names])
    return path, ds


def cmd_train(args, cfg: dict) -> int:
    path, ds = load_dataset_arg(args, cfg)
    spec = model_settings(args, cfg)
    k = int(args.folds or cfg.get("folds", DEFAULT_FOLDS))
    seed = seed_of(args, cfg)
    if spec.kind == "ann":
        n_train = len(ds) - -(-len(ds) // k) if k else len(ds)
        spec = resolve_ann_hidden(spec, n_train, len(ds.feature_names), args.alpha)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        cv = cross_validate_full(ds, spec, k, seed)
        final = fit_model(spec, ds.X, ds.y, ds.feature_names, seed=seed)
    for w in caught:
        log.warning("%s", w.message)
    print(f"{spec.kind}: {k}-fold cross-validation on {len(ds)} rows ({','.join(ds.feature_names)})")
    for i, (mse, r2) in enumerate(cv.report.per_fold):
        print(f"  fold {i:>2}: MSE={mse:.5g}  R2={r2:.5g}")
    pooled = evaluate(ds.y, cv.predictions)
    print(f"  mean   : MSE={cv.report.mse:.5g}  R2={cv.report.r2:.5g}")
    print(f"  pooled out-of-fold: MSE={pooled.mse:.5g}  R2={pooled.r2:.5g}")
    settings = {"data": str(path), "kind": spec.kind, "params": spec.params,
                "standardize": spec.standardize, "folds": k, "features": list(ds.feature_names)}
    out = Path(args.out or cfg.get("out") or "model.json")
    prov = provenance("train", settings, seed)
    prov["cross_validation"] = {"mse": cv.report.mse, "r2": cv.report.r2,
                                "per_fold": [list(f) for f in cv.report.per_fold]}
    save_model(final, out, prov)
    print(f"wrote final model (trained on all rows) to {out}")
    return EXIT_OK


# --- predict --------------------------------------------------------------------


def parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.replace(" ", "").split(",") if v], dtype=float)
    except ValueError:
        raise UsageError(f"cannot parse feature vector {text!r}") from None


def threshold(r0: float) -> float:
    return herd_immunity_threshold(r0) if r0 > 0 else 0.0


def write_trace(trace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        w.writerows(trace.as_array().tolist())


def cmd_predict(args, cfg: dict) -> int:
    if not args.model:
        raise UsageError("--model is required")
    tm = load_model(args.model)
    seed = seed_of(args, cfg)
    result = {"model": str(args.model), "kind": tm.spec.kind}
    if (args.edges is None) == (args.vector is None):
        raise UsageError("give exactly one of --edges or --vector")
    if args.vector is not None:
        x = parse_vector(args.vector)
        if len(x) != tm.n_features:
            raise UsageError(f"model expects {tm.n_features} features {tm.feature_names}, got {len(x)}")
        if args.simulate:
            raise UsageError("--simulate needs a network (--edges)")
    else:
        graph = load_edge_list(args.edges)
        feats = extract_features(graph)
        full = dict(zip(FEATURE_NAMES, feats.as_array().tolist()))
        missing = [n for n in tm.feature_names if n not in full]
        if missing:
            raise UsageError(f"model uses features {missing} that cannot be computed from a network")
        x = np.array([full[n] for n in tm.feature_names])
        result.update(edges=str(args.edges), n=graph.n, num_edges=graph.num_edges, features=full)
        print(f"network {args.edges}: n={graph.n} edges={graph.num_edges}")
        print("  " + "  ".join(f"{k}={v:.5g}" for k, v in full.items()))
    pred = float(tm.predict(x)[0])
    result.update(predicted_r0=pred, herd_immunity_threshold=threshold(pred))
    print(f"predicted R0 = {pred:.4f}")
    print(f"herd immunity threshold = {threshold(pred):.4f}")
    if args.simulate:
        params = epidemic_settings(args, cfg)
        trace = simulate(graph, params, seed)
        true_r0 = compute_r0(trace)
        result.update(simulated_r0=true_r0, simulation_seed=seed,
                      relative_error=(pred - true_r0) / true_r0 if true_r0 else None)
        print(f"simulated R0 = {true_r0:.4f} (seed {seed})")
        if args.trace:
            write_trace(trace, args.trace)
            write_sidecar(args.trace, provenance("predict", {"edges": str(args.edges),
                                                             "epidemic": vars_of(params)}, seed))
    elif args.trace:
        raise UsageError("--trace needs --simulate")
    out = args.out or cfg.get("out")
    if out:
        settings = {"model": str(args.model), "edges": args.edges, "vector": args.vector,
                    "simulate": bool(args.simulate)}
        result["provenance"] = provenance("predict", settings, seed)
        Path(out).write_text(json.dumps(result, indent=1, default=str) + "\n")
    return EXIT_OK


def vars_of(params: EpidemicParams) -> dict:
    return {k: getattr(params, k) for k in params.__dataclass_fields__}


# --- rank -----------------------------------------------------------------------


def cmd_rank(args, cfg: dict) -> int:
    path, ds = load_dataset_arg(args, cfg)
    rcfg = dict(cfg.get("rank", {}))
    seed = seed_of(args, cfg)
    if args.shuffle:
        ds, _ = shuffle(ds, seed)
    standardize = rcfg.get("standardize", True) if args.standardize is None else args.standardize
    mode = args.mode or rcfg.get("mode", "sample")
    p = args.p if args.p is not None else rcfg.get("p")
    report = rank_dataset(ds, p, standardize=standardize, mode=mode, energy=rcfg.get("energy", 0.9))
    print(report.table())
    settings = {"data": str(path), "standardize": standardize, "mode": mode, "p": report.p_used,
                "shuffled": bool(args.shuffle)}
    prov = provenance("rank", settings, seed)
    out = args.out or cfg.get("out")
    if out:
        write_report_csv(report, out)
        write_sidecar(out, prov)
    if args.top is not None:
        projected = select_features(ds, report, args.top)
        target = args.select_out or "selected.csv"
        save_csv(projected, target)
        write_sidecar(target, prov | {"selected": list(projected.feature_names)})
        print(f"wrote {len(projected)} rows with features {','.join(projected.feature_names)} to {target}")
    return EXIT_OK


# --- report ---------------------------------------------------------------------


def cmd_report(args, cfg: dict) -> int:
    if not args.model:
        raise UsageError("--model is required")
    tm = load_model(args.model)
    path, ds = load_dataset_arg(args, cfg)
    if tuple(ds.feature_names) != tm.feature_names:
        if set(tm.feature_names) <= set(ds.feature_names):
            ds = ds.columns(tm.feature_names)
        else:
            raise UsageError(f"model features {tm.feature_names} not available in {path} "
                             f"({ds.feature_names})")
    seed = seed_of(args, cfg)
    idx = np.arange(len(ds))
    if args.subset is not None:
        if not 1 <= args.subset <= len(ds):
            raise UsageError(f"--subset must be in [1, {len(ds)}]")
        idx = np.sort(np.random.default_rng(seed).choice(len(ds), args.subset, replace=False))
    sub = ds.subset(idx.tolist())
    pred = tm.predict(sub.X)
    y = sub.y
    resid = pred - y
    out = Path(args.out or cfg.get("out") or "predictions.csv")
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "family", "true_r0", "predicted_r0", "residual"])
        for i, s, p, r in zip(idx.tolist(), sub.samples, pred.tolist(), resid.tolist()):
            w.writerow([i, s.family, repr(float(s.label)), repr(p), repr(r)])
    settings = {"model": str(args.model), "data": str(path), "subset": args.subset}
    write_sidecar(out, provenance("report", settings, seed))
    print(f"wrote {len(y)} (true, predicted) pairs to {out}")
    print(f"  residuals: mean {resid.mean():.5g}  max |r| {np.abs(resid).max():.5g}  "
          f"MSE {np.mean(resid ** 2):.5g}")
    if len(y) >= 2 and np.ptp(y) > 0:
        print(f"  R2 {evaluate(y, pred).r2:.5g}")
    return EXIT_OK


# --- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="YAML settings file")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed")
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS, help="worker processes")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output path")
    common.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="netr0", description="Predict R0 of an epidemic from network structure.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", default=None, help="YAML settings file")
    parser.add_argument("--seed", type=int, default=None, help="master seed")
    parser.add_argument("--jobs", type=int, default=None, help="worker processes")
    parser.add_argument("--out", default=None, help="output path")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="build a labeled dataset CSV")
    g.add_argument("--profile", choices=sorted(PROFILES))
    g.add_argument("--count", type=int, help="examples per family (overrides the profile)")

    t = sub.add_parser("train", parents=[common], help="cross-validate and fit a model")
    t.add_argument("--data")
    t.add_argument("--model", choices=MODEL_KINDS)
    t.add_argument("--folds", type=int)
    t.add_argument("--features", help="comma-separated feature subset")
    t.add_argument("--standardize", action="store_true", help="scale features (off by default)")
    t.add_argument("--C", type=float)
    t.add_argument("--epsilon", type=float)
    t.add_argument("--gamma", type=float)
    t.add_argument("--degree", type=int)
    t.add_argument("--coef0", type=float)
    t.add_argument("--n-hidden", dest="n_hidden", type=int)
    t.add_argument("--epochs", type=int)
    t.add_argument("--alpha", type=float, help="derive n_hidden from the rule of thumb")

    p = sub.add_parser("predict", parents=[common], help="predict R0 for a network or feature vector")
    p.add_argument("--model")
    p.add_argument("--edges", help="edge-list file")
    p.add_argument("--vector", help="comma-separated feature values")
    p.add_argument("--simulate", action="store_true", help="also simulate the epidemic on --edges")
    p.add_argument("--profile", choices=sorted(PROFILES), help="epidemic settings for --simulate")
    p.add_argument("--trace", help="write the simulated trace CSV here")

    r = sub.add_parser("rank", parents=[common], help="feature contribution indices")
    r.add_argument("--data")
    r.add_argument("--features", help="comma-separated feature subset")
    r.add_argument("--p", type=int, help="principal components (default: 90%% of variance)")
    r.add_argument("--mode", choices=MODES)
    r.add_argument("--standardize", dest="standardize", action="store_true", default=None)
    r.add_argument("--no-standardize", dest="standardize", action="store_false")
    r.add_argument("--shuffle", action="store_true", help="permute rows with --seed first")
    r.add_argument("--top", type=int, help="write the dataset projected on the top features")
    r.add_argument("--select-out", help="path for the projected dataset")

    rp = sub.add_parser("report", parents=[common], help="(true, predicted) pairs for plotting")
    rp.add_argument("--model")
    rp.add_argument("--data")
    rp.add_argument("--features", help=argparse.SUPPRESS)
    rp.add_argument("--subset", type=int, help="random subset size (seeded)")
    return parser


COMMANDS = {"generate": cmd_generate, "train": cmd_train, "predict": cmd_predict,
            "rank": cmd_rank, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = read_config(args.config)
        if args.jobs is None and "jobs" in cfg:
            args.jobs = int(cfg["jobs"])
        return COMMANDS[args.command](args, cfg)
    except (DivergenceError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (NetR0Error, ValueError, KeyError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except Exception as exc:  # pragma: no cover - last-resort guard
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
