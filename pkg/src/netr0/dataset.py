"""Labeled feature matrices: building, CSV persistence, shuffling and k-fold plans."""

from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .epidemic import EpidemicParams, compute_r0, simulate
from .errors import ParameterError, ParseError
from .graph import Graph
from .netgen import DEFAULT_MAX_RETRIES, Family, GeneratorSpec, generate_connected
from .netmetrics import FEATURE_NAMES, extract_features

log = logging.getLogger(__name__)

META_COLUMNS = ("r0", "family", "seed", "n")


@dataclass(frozen=True)
class Sample:
    features: tuple[float, ...]
    label: float
    family: str
    seed: int
    n: int


@dataclass
class Dataset:
    samples: list[Sample] = field(default_factory=list)
    feature_names: tuple[str, ...] = FEATURE_NAMES
    retries: int = field(default=0, compare=False)

    def __len__(self):
        return len(self.samples)

    def __getitem__(self, idx):
        return self.samples[idx]

    @property
    def X(self) -> np.ndarray:
        return np.array([s.features for s in self.samples], dtype=float).reshape(-1, len(self.feature_names))

    @property
    def y(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=float)

    @property
    def families(self) -> list[str]:
        return [s.family for s in self.samples]

    def subset(self, indices) -> "Dataset":
        return Dataset([self.samples[i] for i in indices], self.feature_names)

    def only_family(self, family: str) -> "Dataset":
        return Dataset([s for s in self.samples if s.family == family], self.feature_names)

    def columns(self, names) -> "Dataset":
        """Project every sample onto ``names`` (in that order)."""
        names = tuple(names)
        missing = [nm for nm in names if nm not in self.feature_names]
        if missing:
            raise ParameterError(f"unknown feature(s) {missing}")
        idx = [self.feature_names.index(nm) for nm in names]
        samples = [replace(s, features=tuple(s.features[i] for i in idx)) for s in self.samples]
        return Dataset(samples, names)


# --- build configuration ------------------------------------------------------


@dataclass(frozen=True)
class FamilyConfig:
    """Per-family example count and parameter ranges.

    Range keys: ER ``p``; WS ``k_neighbors`` (inclusive, even values only) and
    ``p_rewire`` with ``p_step``; SF ``m`` and ``p_triangle``; BA ``m``;
    SBM ``p_in``, ``p_out``.
    """

    count: int
    ranges: dict = field(default_factory=dict)


PAPER_FAMILIES = {
    "ER": FamilyConfig(525, {"p": (0.0072, 0.5)}),
    "WS": FamilyConfig(520, {"k_neighbors": (4, 14), "p_rewire": (0.1, 0.5), "p_step": 0.01}),
    "SF": FamilyConfig(548, {"m": (2, 550), "p_triangle": (0.2, 0.2)}),
    "BA": FamilyConfig(548, {"m": (2, 550)}),
    "SBM": FamilyConfig(411, {"p_in": (0.01, 0.3), "p_out": (0.002, 0.05)}),
}

# n=200: ranges keep every family in the endemic regime (mean degree ~24..100);
# sparser graphs at this size lose the infection before the averaging window.
DESK_FAMILIES = {
    "ER": FamilyConfig(20, {"p": (0.12, 0.5)}),
    "WS": FamilyConfig(20, {"k_neighbors": (24, 64), "p_rewire": (0.1, 0.5), "p_step": 0.01}),
    "SF": FamilyConfig(20, {"m": (14, 110), "p_triangle": (0.2, 0.2)}),
    "BA": FamilyConfig(20, {"m": (14, 110)}),
    "SBM": FamilyConfig(20, {"p_in": (0.2, 0.8), "p_out": (0.03, 0.2)}),
}


@dataclass(frozen=True)
class BuildConfig:
    n: int = 1000
    families: dict = field(default_factory=lambda: dict(PAPER_FAMILIES))
    epidemic: EpidemicParams = EpidemicParams()
    master_seed: int = 0
    max_retries: int = DEFAULT_MAX_RETRIES
    jobs: int = 1

    def total(self) -> int:
        return sum(fc.count for fc in self.families.values())

    def with_counts(self, count: int) -> "BuildConfig":
        fams = {k: replace(v, count=count) for k, v in self.families.items()}
        return replace(self, families=fams)

    def to_dict(self) -> dict:
        ep = self.epidemic
        return {
            "n": self.n,
            "master_seed": self.master_seed,
            "max_retries": self.max_retries,
            "jobs": self.jobs,
            "epidemic": {k: getattr(ep, k) for k in ep.__dataclass_fields__},
            "families": {
                name: {"count": fc.count, **{k: list(v) if isinstance(v, tuple) else v
                                            for k, v in fc.ranges.items()}}
                for name, fc in self.families.items()
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BuildConfig":
        base = cls()
        fams = base.families
        if "families" in data:
            fams = {}
            for name, body in data["families"].items():
                Family(name)
                body = dict(body)
                count = int(body.pop("count"))
                ranges = {k: tuple(v) if isinstance(v, list) else v for k, v in body.items()}
                fams[name] = FamilyConfig(count, ranges)
        ep = EpidemicParams(**data.get("epidemic", {}))
        return cls(
            n=int(data.get("n", base.n)),
            families=fams,
            epidemic=ep,
            master_seed=int(data.get("master_seed", base.master_seed)),
            max_retries=int(data.get("max_retries", base.max_retries)),
            jobs=int(data.get("jobs", base.jobs)),
        )


DESK_EPIDEMIC = EpidemicParams(s0_frac=0.975, i0_frac=0.025)

PROFILES = {
    "paper": BuildConfig(),
    "desk": BuildConfig(n=200, families=dict(DESK_FAMILIES), epidemic=DESK_EPIDEMIC),
}


def example_seed(master_seed: int, family: str, index: int) -> int:
    """Per-example seed; every random choice of the example derives from it."""
    fam_idx = list(Family).index(Family(family))
    return int(np.random.SeedSequence([master_seed, fam_idx, index]).generate_state(1)[0])


def _sub_seed(seed: int, purpose: int) -> int:
    return int(np.random.SeedSequence([seed, purpose]).generate_state(1)[0])


def draw_spec(family: str, n: int, ranges: dict, seed: int) -> GeneratorSpec:
    """Draw one example's generator parameters uniformly from ``ranges``."""
    rng = np.random.default_rng(_sub_seed(seed, 0))
    fam = Family(family)
    if fam is Family.ER:
        lo, hi = ranges["p"]
        params = {"p": float(rng.uniform(lo, hi))}
    elif fam is Family.WS:
        klo, khi = ranges["k_neighbors"]
        ks = [k for k in range(int(klo), int(khi) + 1) if k % 2 == 0 and 2 <= k < n]
        if not ks:
            raise ParameterError(f"no even k_neighbors in {ranges['k_neighbors']} for n={n}")
        plo, phi = ranges["p_rewire"]
        step = ranges.get("p_step")
        if step:
            grid = np.round(np.arange(plo, phi + step / 2, step), 10)
            p_rewire = float(grid[rng.integers(len(grid))])
        else:
            p_rewire = float(rng.uniform(plo, phi))
        params = {"k_neighbors": int(ks[rng.integers(len(ks))]), "p_rewire": p_rewire}
    elif fam in (Family.SF, Family.BA):
        mlo, mhi = ranges["m"]
        mhi = min(int(mhi), n - 1)
        params = {"m": int(rng.integers(int(mlo), mhi + 1))}
        if fam is Family.SF:
            tlo, thi = ranges.get("p_triangle", (0.2, 0.2))
            params["p_triangle"] = float(rng.uniform(tlo, thi)) if thi > tlo else float(tlo)
    else:
        ilo, ihi = ranges["p_in"]
        olo, ohi = ranges["p_out"]
        p_in, p_out = float(rng.uniform(ilo, ihi)), float(rng.uniform(olo, ohi))
        half = n // 2
        params = {"block_sizes": [half, n - half], "prob_matrix": [[p_in, p_out], [p_out, p_in]]}
    return GeneratorSpec(fam, n, params, _sub_seed(seed, 1))


@dataclass(frozen=True)
class BuiltSample:
    sample: Sample
    spec: GeneratorSpec
    retries: int


def make_sample(graph: Graph, params: EpidemicParams, family: str, seed: int,
                clustering: str = "transitivity") -> Sample:
    """Features + simulated R0 label for one (connected) graph."""
    feats = extract_features(graph, clustering)
    trace = simulate(graph, params, _sub_seed(seed, 2))
    label = compute_r0(trace)
    return Sample(tuple(feats.as_array().tolist()), label, family, int(seed), graph.n)


def _build_one(args) -> BuiltSample:
    family, index, cfg = args
    seed = example_seed(cfg.master_seed, family, index)
    try:
        spec = draw_spec(family, cfg.n, cfg.families[family].ranges, seed)
    except ParameterError as exc:
        raise ParameterError(f"{family} example {index} (ranges {cfg.families[family].ranges}): {exc}") from None
    result = generate_connected(spec, cfg.max_retries)
    return BuiltSample(make_sample(result.graph, cfg.epidemic, family, seed), spec, result.retries)


def build_dataset(cfg: BuildConfig) -> Dataset:
    """Generate, measure and simulate every configured example, in config order."""
    tasks = [(fam, i, cfg) for fam, fc in cfg.families.items() for i in range(fc.count)]
    t0 = time.perf_counter()
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            built = list(pool.map(_build_one, tasks, chunksize=4))
    else:
        built = []
        for i, task in enumerate(tasks, start=1):
            built.append(_build_one(task))
            if i % 50 == 0:
                log.info("built %d/%d examples (%.1fs)", i, len(tasks), time.perf_counter() - t0)
    retries = sum(b.retries for b in built)
    log.info("built %d examples in %.1fs with %d connectivity retries",
             len(built), time.perf_counter() - t0, retries)
    return Dataset([b.sample for b in built], retries=retries)


# --- CSV ---------------------------------------------------------------------


def _fmt(x) -> str:
    return repr(float(x))


def save_csv(dataset: Dataset, path) -> None:
    header = list(dataset.feature_names) + list(META_COLUMNS)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for s in dataset.samples:
            w.writerow([_fmt(v) for v in s.features] + [_fmt(s.label), s.family, s.seed, s.n])


def load_csv(path) -> Dataset:
    """Read a dataset CSV; feature columns are everything before ``r0``."""
    path = Path(path)
    with open(path, newline="") as fh:
        rows = csv.reader(fh)
        try:
            header = next(rows)
        except StopIteration:
            raise ParseError("empty file", path, 1) from None
        if tuple(header[-4:]) != META_COLUMNS or len(header) < 5:
            raise ParseError(f"header must end with {','.join(META_COLUMNS)}", path, 1)
        names = tuple(header[:-4])
        nf = len(names)
        samples = []
        for lineno, row in enumerate(rows, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", path, lineno)
            try:
                feats = tuple(float(v) for v in row[:nf])
                label = float(row[nf])
                seed = int(row[nf + 2])
                n = int(row[nf + 3])
            except ValueError as exc:
                raise ParseError(f"bad value ({exc})", path, lineno) from None
            if not all(math.isfinite(v) for v in feats + (label,)):
                raise ParseError("non-finite value", path, lineno)
            samples.append(Sample(feats, label, row[nf + 1], seed, n))
    return Dataset(samples, names)


# --- shuffling and folds --------------------------------------------------------


def shuffle(dataset: Dataset, seed) -> tuple[Dataset, np.ndarray]:
    """Uniform row permutation; row ``i`` of the result is row ``perm[i]`` of the input."""
    perm = np.random.default_rng(seed).permutation(len(dataset))
    return dataset.subset(perm.tolist()), perm


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray  # fold index per original row
    permutation: np.ndarray

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def folds(self):
        for f in range(self.k):
            yield self.train_indices(f), self.test_indices(f)


def fold_sizes(m: int, k: int) -> list[int]:
    base, extra = divmod(m, k)
    return [base + 1 if f < extra else base for f in range(k)]


def kfold_plan(dataset_or_size, k: int, seed) -> FoldPlan:
    """Shuffle rows, then cut the permuted order into ``k`` contiguous folds."""
    m = dataset_or_size if isinstance(dataset_or_size, int) else len(dataset_or_size)
    if int(k) != k or not (2 <= k <= m):
        raise ParameterError(f"need 2 <= k <= {m}, got k={k}")
    perm = np.random.default_rng(seed).permutation(m)
    assign = np.empty(m, dtype=np.int64)
    start = 0
    for f, size in enumerate(fold_sizes(m, k)):
        assign[perm[start:start + size]] = f
        start += size
    return FoldPlan(int(k), assign, perm)
