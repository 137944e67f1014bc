"""Belief propagation with guided decimation (BPGD) and its randomized variant.

Each round runs ``T`` BP iterations on persistent messages; if the hard
decision does not reproduce the syndrome, the most reliable undecimated
variable has its prior pinned to ``+-llr_max`` and the next round starts.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .bp import _VARIANTS, BpConfig, BpState, TannerGraph, _iterate_llr, _iterate_ratio, channel_llr
from .codes import CssCode, classify_x_outcome, DecodeOutcome


@dataclass(frozen=True)
class GdConfig:
    T: int = 10
    R: int | None = None  # None means the block length
    llr_max: float = 25.0
    gamma_prime: float = 1.0
    seed: int | None = None
    bp: BpConfig = field(default_factory=BpConfig)
    # convergence is tested after every BP iteration, or only at round ends
    check_each_iteration: bool = False

    def __post_init__(self):
        if self.T < 1:
            raise ValueError("T must be at least 1")
        if self.R is not None and self.R < 1:
            raise ValueError("R must be at least 1")
        if not self.llr_max > 0:
            raise ValueError("llr_max must be positive")
        if self.gamma_prime < 0:
            raise ValueError("gamma_prime must be non-negative")

    def rounds(self, n: int) -> int:
        R = n if self.R is None else self.R
        if R > n:
            raise ValueError(f"R={R} exceeds the block length {n}")
        return R


@dataclass
class GdResult:
    converged: bool
    estimate: np.ndarray | None
    rounds_used: int
    trace: list[tuple[int, int]]
    iterations: int = 0

    @property
    def decimations(self) -> int:
        return len(self.trace)


@njit(cache=True, error_model="numpy")
def _rounds(chk_ptr, edge_var, edge_chk, var_ptr, var_edges, syndrome, prior, c2v, v2c, bias, hard,
            T, K, variant, alpha, R, llr_max, gamma_prime, use_pool, draws, each_iter,
            trace_var, trace_bit):
    n = var_ptr.shape[0] - 1
    free = np.ones(n, dtype=np.bool_)
    pool = np.empty(n, dtype=np.int64)
    iters = 0
    n_dec = 0
    for r in range(R):
        if variant == 0:
            ok, used = _iterate_ratio(chk_ptr, edge_var, edge_chk, var_ptr, var_edges, syndrome, prior,
                                      c2v, v2c, bias, hard, T, K, each_iter)
        else:
            ok, used = _iterate_llr(chk_ptr, edge_var, edge_chk, var_ptr, var_edges, syndrome, prior,
                                    c2v, v2c, bias, hard, T, K, variant, alpha, each_iter)
        iters += used
        if ok:
            return True, r + 1, n_dec, iters
        best = -1
        top = -1.0
        for i in range(n):
            if free[i] and abs(bias[i]) > top:
                top = abs(bias[i])
                best = i
        if best < 0:
            break
        if use_pool:
            size = 0
            for i in range(n):
                if free[i] and abs(bias[i]) >= top - gamma_prime:
                    pool[size] = i
                    size += 1
            best = pool[min(int(draws[r] * size), size - 1)]
        bit = 0 if bias[best] > 0 else 1
        prior[best] = llr_max if bit == 0 else -llr_max
        free[best] = False
        trace_var[n_dec] = best
        trace_bit[n_dec] = bit
        n_dec += 1
    return False, R, n_dec, iters


def _decode(graph: TannerGraph, s_x, p_x: float, cfg: GdConfig, rng: np.random.Generator | None) -> GdResult:
    n = graph.n
    R = cfg.rounds(n)
    state = BpState(graph, s_x, np.full(n, channel_llr(p_x)), cfg.bp)
    if state.matches():
        return GdResult(True, state.hard.copy(), 1, [], 0)
    # one uniform per round picks from the candidate pool
    draws = rng.random(R) if rng is not None else np.zeros(0)
    trace_var = np.empty(R, dtype=np.int64)
    trace_bit = np.empty(R, dtype=np.int64)
    ok, used, n_dec, iters = _rounds(
        *state.kernel_args(), cfg.T, float(cfg.bp.K), _VARIANTS[cfg.bp.variant],
        float(cfg.bp.alpha), R, float(cfg.llr_max), float(cfg.gamma_prime), rng is not None,
        draws, cfg.check_each_iteration, trace_var, trace_bit,
    )
    trace = [(int(v), int(b)) for v, b in zip(trace_var[:n_dec], trace_bit[:n_dec])]
    return GdResult(bool(ok), state.hard.copy() if ok else None, int(used), trace, int(iters))


def bpgd_decode(graph: TannerGraph, s_x, p_x: float, cfg: GdConfig) -> GdResult:
    """Deterministic BPGD; ties in reliability go to the lowest index."""
    return _decode(graph, s_x, p_x, cfg, None)


def bpgd_rd_decode(graph: TannerGraph, s_x, p_x: float, cfg: GdConfig, rng: np.random.Generator | None = None) -> GdResult:
    """BPGD that decimates a uniform pick among the nearly-most-reliable variables.

    The candidate pool holds every undecimated variable whose reliability is
    within ``gamma_prime`` of the best. Randomness comes from ``rng`` when
    given, otherwise from ``cfg.seed``.
    """
    if rng is None:
        if cfg.seed is None:
            raise ValueError("bpgd-rd needs a seed or an rng")
        rng = np.random.default_rng(cfg.seed)
    return _decode(graph, s_x, p_x, cfg, rng)


@dataclass
class DegeneracyEntry:
    estimate: np.ndarray
    frequency: int
    weight: int
    distance: int
    outcome: DecodeOutcome


@dataclass
class DegeneracyReport:
    runs: int
    converged: int
    entries: list[DegeneracyEntry]

    @property
    def convergence_fraction(self) -> float:
        return self.converged / self.runs if self.runs else 0.0

    @property
    def distinct(self) -> int:
        return len(self.entries)

    def count(self, outcome: DecodeOutcome) -> int:
        return sum(1 for e in self.entries if e.outcome is outcome)


def degeneracy_experiment(code: CssCode, truth, runs: int, cfg: GdConfig, p_x: float, graph: TannerGraph | None = None) -> DegeneracyReport:
    """Decode one syndrome with many seeded BPGD-rd runs and tally the estimates.

    Run ``i`` uses seed ``i``. Entries are sorted by descending frequency, ties
    by the estimate's bit string.
    """
    graph = graph or TannerGraph(code.H1)
    truth = np.asarray(truth, dtype=np.uint8)
    s = graph.syndrome(truth)
    counts: Counter[bytes] = Counter()
    converged = 0
    for seed in range(runs):
        res = bpgd_rd_decode(graph, s, p_x, cfg, np.random.default_rng(seed))
        if res.converged:
            converged += 1
            counts[res.estimate.tobytes()] += 1
    entries = []
    for key, freq in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
        est = np.frombuffer(key, dtype=np.uint8).copy()
        entries.append(
            DegeneracyEntry(
                estimate=est,
                frequency=freq,
                weight=int(est.sum()),
                distance=int(np.count_nonzero(est ^ truth)),
                outcome=classify_x_outcome(code, truth, est),
            )
        )
    return DegeneracyReport(runs, converged, entries)
