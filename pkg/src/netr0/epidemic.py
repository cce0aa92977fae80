"""Discrete-time SIR dynamics with disease death on a fixed network.

Transitions per step, all evaluated against the state at the start of the step:

* S -> I with probability ``1 - exp(-k * i)``, ``i`` = infected neighbours;
* I -> R with probability ``p_ir``; otherwise I dies with probability ``p_id``
  and the node re-enters as S (population stays constant);
* R -> S with probability ``p_rs``.

The mean-field counterpart of this process is

    dS/dt = -a S I + c I + e R
    dI/dt =  a S I - (b + c) I
    dR/dt =  b I - e R

and the rate constants a, b, c, e are estimated from the transition counts of
each step. The reproduction number is ``R0 = a N / (b + c)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .graph import Graph

S, I, R = 0, 1, 2


@dataclass(frozen=True)
class EpidemicParams:
    k: float = 0.1
    p_ir: float = 0.6
    p_id: float = 0.3
    p_rs: float = 0.1
    s0_frac: float = 0.995
    i0_frac: float = 0.005
    r0_frac: float = 0.0
    steps: int = 100
    tail: int = 20
    dt: float = 1.0

    def __post_init__(self):
        for name in ("p_ir", "p_id", "p_rs", "s0_frac", "i0_frac", "r0_frac"):
            val = getattr(self, name)
            if not (0.0 <= val <= 1.0):
                raise ParameterError(f"{name} must be in [0, 1], got {val}")
        if self.k < 0:
            raise ParameterError(f"k must be non-negative, got {self.k}")
        if not math.isclose(self.s0_frac + self.i0_frac + self.r0_frac, 1.0, abs_tol=1e-9):
            raise ParameterError("initial fractions must sum to 1")
        if self.steps < 1:
            raise ParameterError("steps must be positive")
        if not (1 <= self.tail <= self.steps):
            raise ParameterError(f"tail must be in 1..steps, got {self.tail}")
        if self.dt != 1.0:
            raise ParameterError("only unit time steps are supported")


@dataclass(frozen=True)
class StepRecord:
    t: int
    S: int
    I: int
    R: int
    new_SI: int = 0
    new_IR: int = 0
    new_ID: int = 0
    new_RS: int = 0


TRACE_COLUMNS = ("t", "S", "I", "R", "new_SI", "new_IR", "new_ID", "new_RS")


@dataclass(frozen=True)
class SimulationTrace:
    params: EpidemicParams
    n: int
    records: tuple[StepRecord, ...] = field(default_factory=tuple)

    def as_array(self) -> np.ndarray:
        return np.array([[getattr(r, c) for c in TRACE_COLUMNS] for r in self.records], dtype=np.int64)

    def to_csv(self, path) -> None:
        lines = [",".join(TRACE_COLUMNS)]
        lines.extend(",".join(str(getattr(r, c)) for c in TRACE_COLUMNS) for r in self.records)
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


@dataclass(frozen=True)
class RateEstimates:
    a: float
    b: float
    c: float
    e: float


def infection_probability(k: float, i) -> float | np.ndarray:
    """``1 - exp(-k i)``; vectorised over ``i``."""
    return -np.expm1(-k * np.asarray(i, dtype=float)) if np.ndim(i) else -math.expm1(-k * i)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def initial_counts(n: int, params: EpidemicParams) -> tuple[int, int]:
    n_inf = _round_half_up(n * params.i0_frac)
    if params.i0_frac > 0:
        n_inf = max(n_inf, 1)
    n_rec = _round_half_up(n * params.r0_frac)
    n_inf = min(n_inf, n)
    n_rec = min(n_rec, n - n_inf)
    return n_inf, n_rec


def initialize_states(graph: Graph, params: EpidemicParams, rng) -> np.ndarray:
    """Uniformly random initial assignment; at least one I when ``i0_frac > 0``."""
    n = graph.n
    n_inf, n_rec = initial_counts(n, params)
    states = np.full(n, S, dtype=np.int8)
    order = rng.permutation(n)
    states[order[:n_inf]] = I
    states[order[n_inf:n_inf + n_rec]] = R
    return states


def step(graph: Graph, states: np.ndarray, params: EpidemicParams, rng, t: int = 0):
    """One synchronous update. Returns ``(new_states, StepRecord)``.

    Random draws are consumed in a fixed order: susceptible nodes in ascending
    id, then infected nodes (recovery trial for all, then death trial for those
    that did not recover), then recovered nodes.
    """
    infected = states == I
    s_idx = np.flatnonzero(states == S)
    i_idx = np.flatnonzero(infected)
    r_idx = np.flatnonzero(states == R)

    n_inf_nbrs = graph.csr @ infected.astype(np.int32)
    p_si = -np.expm1(-params.k * n_inf_nbrs[s_idx])
    becomes_inf = rng.random(len(s_idx)) < p_si

    recovers = rng.random(len(i_idx)) < params.p_ir
    survivors = i_idx[~recovers]
    dies = rng.random(len(survivors)) < params.p_id

    loses = rng.random(len(r_idx)) < params.p_rs

    new = states.copy()
    new[s_idx[becomes_inf]] = I
    new[i_idx[recovers]] = R
    new[survivors[dies]] = S
    new[r_idx[loses]] = S

    counts = np.bincount(new, minlength=3)
    rec = StepRecord(
        t=t,
        S=int(counts[S]),
        I=int(counts[I]),
        R=int(counts[R]),
        new_SI=int(becomes_inf.sum()),
        new_IR=int(recovers.sum()),
        new_ID=int(dies.sum()),
        new_RS=int(loses.sum()),
    )
    return new, rec


def simulate(graph: Graph, params: EpidemicParams = EpidemicParams(), seed=None) -> SimulationTrace:
    """Initialise and run ``params.steps`` synchronous steps; record 0 is the initial state."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    states = initialize_states(graph, params, rng)
    counts = np.bincount(states, minlength=3)
    records = [StepRecord(0, int(counts[S]), int(counts[I]), int(counts[R]))]
    for t in range(1, params.steps + 1):
        states, rec = step(graph, states, params, rng, t)
        records.append(rec)
    return SimulationTrace(params, graph.n, tuple(records))


def estimate_rates(record: StepRecord, prev_S: int, prev_I: int, prev_R: int,
                   params: EpidemicParams) -> RateEstimates:
    """Rate constants from one step's transition counts.

    Degenerate denominators fall back to ``a = 0`` (no transmission observed)
    and to the nominal probabilities for b, c and e.
    """
    dt = params.dt
    a = record.new_SI / (prev_S * prev_I * dt) if prev_S * prev_I > 0 else 0.0
    if prev_I > 0:
        recovered_frac = record.new_IR / (prev_I * dt)
        b = recovered_frac
        c = (1.0 - recovered_frac) * (record.new_ID / (prev_I * dt))
    else:
        b = params.p_ir
        c = (1.0 - params.p_ir) * params.p_id
    e = record.new_RS / (prev_R * dt) if prev_R > 0 else params.p_rs
    return RateEstimates(a, b, c, e)


def instantaneous_r0(trace: SimulationTrace, t: int) -> float:
    """``a N / (b + c)`` for the step ending at ``t`` (0 when ``b + c = 0``)."""
    prev, rec = trace.records[t - 1], trace.records[t]
    rates = estimate_rates(rec, prev.S, prev.I, prev.R, trace.params)
    denom = rates.b + rates.c
    return rates.a * trace.n / denom if denom > 0 else 0.0


def r0_series(trace: SimulationTrace, tail: int | None = None) -> np.ndarray:
    """Instantaneous R0 over the last ``tail`` steps (``params.tail`` by default)."""
    steps = len(trace.records) - 1
    tail = trace.params.tail if tail is None else tail
    if not (1 <= tail <= steps):
        raise ParameterError(f"tail {tail} exceeds the {steps} simulated steps")
    return np.array([instantaneous_r0(trace, t) for t in range(steps - tail + 1, steps + 1)])


def compute_r0(trace: SimulationTrace, tail: int | None = None) -> float:
    """Mean instantaneous R0 over the tail window (steps 81..100 by default)."""
    return float(np.mean(r0_series(trace, tail)))


def herd_immunity_threshold(r0: float) -> float:
    """Vaccinated fraction ``max(0, 1 - 1/R0)`` that stops persistent spread."""
    if not r0 > 0:
        raise ParameterError(f"R0 must be positive, got {r0}")
    return max(0.0, 1.0 - 1.0 / r0)
