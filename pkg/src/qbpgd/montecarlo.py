"""Error sampling, trial orchestration and outcome statistics.

Trial ``i`` of a run draws everything (its error and any decoder randomness)
from a generator seeded by ``(master_seed, i)``, so the set of trials does
not depend on how they are scheduled across workers. Results are aggregated
in trial order, and a run with an error target stops at the trial that
reaches it.
"""

from __future__ import annotations

import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binomtest

from .bp import BpConfig, TannerGraph, bp_run, channel_llr
from .codes import CssCode, DecodeOutcome, PauliVector, classify_quaternary_outcome, classify_x_outcome
from .decimation import GdConfig, bpgd_decode, bpgd_rd_decode
from .quaternary import QGdConfig, QuatGraph, qbp_run, qbpgd_decode

BIT_FLIP = "bit-flip"
DEPOLARIZING = "depolarizing"
BINARY_DECODERS = ("bp", "bpgd", "bpgd-rd")
QUATERNARY_DECODERS = ("qbp", "qbpgd")
DECODERS = BINARY_DECODERS + QUATERNARY_DECODERS
CHUNK = 32


@dataclass(frozen=True)
class NoiseModel:
    kind: str
    p: float

    def __post_init__(self):
        if self.kind not in (BIT_FLIP, DEPOLARIZING):
            raise ValueError(f"unknown noise model {self.kind!r}")
        hi = 0.75 if self.kind == DEPOLARIZING else 1.0
        if not 0 < self.p < hi:
            raise ValueError(f"{self.kind} probability must lie in (0, {hi}), got {self.p}")


def sample_error(model: NoiseModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. error: bits for bit-flip noise, symbols 0..3 for depolarizing."""
    u = rng.random(n)
    if model.kind == BIT_FLIP:
        return (u < model.p).astype(np.uint8)
    sym = np.minimum(1 + np.floor(3 * u / model.p), 3).astype(np.uint8)
    return np.where(u < model.p, sym, 0).astype(np.uint8)


def trial_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=master_seed, spawn_key=(index,)))


@dataclass(frozen=True)
class DecoderSpec:
    name: str = "bpgd"
    T: int = 10
    R: int | None = None
    K: float = 25.0
    llr_max: float = 25.0
    gamma_prime: float = 1.0
    eps: float = 1e-10
    variant: str = "sum-product"
    alpha: float = 0.625

    def __post_init__(self):
        if self.name not in DECODERS:
            raise ValueError(f"unknown decoder {self.name!r}; choose from {', '.join(DECODERS)}")

    @property
    def quaternary(self) -> bool:
        return self.name in QUATERNARY_DECODERS

    @property
    def decimates(self) -> bool:
        return self.name in ("bpgd", "bpgd-rd", "qbpgd")

    def bp_config(self) -> BpConfig:
        return BpConfig(variant=self.variant, K=self.K, T=self.T, alpha=self.alpha)

    def gd_config(self) -> GdConfig:
        return GdConfig(T=self.T, R=self.R, llr_max=self.llr_max, gamma_prime=self.gamma_prime, bp=self.bp_config())

    def qgd_config(self) -> QGdConfig:
        return QGdConfig(T=self.T, R=self.R, eps=self.eps, K=self.K)


@dataclass
class DecodeResult:
    converged: bool
    estimate: np.ndarray | None
    rounds: int
    trace: list[tuple[int, int]]


class Decoder:
    """A decoder bound to one code, ready to run many syndromes."""

    def __init__(self, code: CssCode, spec: DecoderSpec):
        self.code = code
        self.spec = spec
        if spec.quaternary:
            self.graph = QuatGraph.from_code(code)
        else:
            self.graph = TannerGraph(code.H1)
        if spec.decimates:
            # validates R against the block length up front
            (spec.qgd_config() if spec.quaternary else spec.gd_config()).rounds(code.n)

    def syndrome(self, error: np.ndarray) -> np.ndarray:
        return self.graph.syndrome(error)

    def decode(self, s: np.ndarray, p: float, rng: np.random.Generator | None = None) -> DecodeResult:
        spec = self.spec
        if spec.name == "bp":
            r = bp_run(self.graph, s, np.full(self.code.n, channel_llr(p)), spec.bp_config())
            return DecodeResult(r.converged, r.hard if r.converged else None, r.iterations_used, [])
        if spec.name == "qbp":
            r = qbp_run(self.graph, s, p, spec.T, spec.K)
            return DecodeResult(r.converged, r.hard if r.converged else None, r.iterations_used, [])
        if spec.name == "bpgd":
            g = bpgd_decode(self.graph, s, p, spec.gd_config())
        elif spec.name == "bpgd-rd":
            if rng is None:
                raise ValueError("bpgd-rd needs an rng")
            g = bpgd_rd_decode(self.graph, s, p, spec.gd_config(), rng)
        else:
            g = qbpgd_decode(self.graph, s, p, spec.qgd_config())
        return DecodeResult(g.converged, g.estimate, g.rounds_used, g.trace)

    def classify(self, truth: np.ndarray, estimate: np.ndarray | None) -> DecodeOutcome:
        if self.spec.quaternary:
            est = None if estimate is None else PauliVector.from_symbols(estimate)
            return classify_quaternary_outcome(self.code, PauliVector.from_symbols(truth), est)
        return classify_x_outcome(self.code, truth, estimate)


@dataclass
class TrialRecord:
    outcome: DecodeOutcome
    decimations: int
    violations: int


def wilson_interval(k: int, n: int) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    ci = binomtest(k, n).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass
class TrialStats:
    trials: int = 0
    outcomes: Counter = field(default_factory=Counter)
    decimations: int = 0
    violations: int = 0
    wall_s: float = 0.0

    def add(self, rec: TrialRecord) -> None:
        self.trials += 1
        self.outcomes[rec.outcome] += 1
        self.decimations += rec.decimations
        self.violations += rec.violations

    @property
    def block_errors(self) -> int:
        return sum(c for o, c in self.outcomes.items() if not o.is_success)

    @property
    def bler(self) -> float:
        return self.block_errors / self.trials if self.trials else 0.0

    @property
    def bler_ci(self) -> tuple[float, float]:
        return wilson_interval(self.block_errors, self.trials)

    @property
    def nonconvergent(self) -> int:
        return self.outcomes[DecodeOutcome.FAILURE_NONCONVERGENCE]

    @property
    def nonconv_frac(self) -> float:
        return self.nonconvergent / self.trials if self.trials else 0.0

    @property
    def nonconv_ci(self) -> tuple[float, float]:
        return wilson_interval(self.nonconvergent, self.trials)

    @property
    def r_avg(self) -> float:
        return self.decimations / self.trials if self.trials else 0.0


def run_trial(decoder: Decoder, model: NoiseModel, master_seed: int, index: int,
              fixed_error: np.ndarray | None = None) -> TrialRecord:
    rng = trial_rng(master_seed, index)
    n = decoder.code.n
    error = sample_error(model, n, rng) if fixed_error is None else fixed_error
    s = decoder.syndrome(error)
    res = decoder.decode(s, model.p, rng)
    violations = 0
    est = res.estimate
    if res.converged and not np.array_equal(decoder.syndrome(est), s):
        violations += 1
        est = None
    if len({v for v, _ in res.trace}) != len(res.trace):
        violations += 1
    if est is None:
        outcome = DecodeOutcome.FAILURE_NONCONVERGENCE
    else:
        outcome = decoder.classify(error, est)
    # a decimating decoder that never converges has decimated every variable
    dec = 0
    if decoder.spec.decimates:
        dec = len(res.trace) if res.converged else n
    return TrialRecord(outcome, dec, violations)


_WORKER: dict = {}


def _init_worker(code, spec, model, seed, fixed_error):
    _WORKER["args"] = (Decoder(code, spec), model, seed, fixed_error)


def _run_chunk(lo: int, hi: int) -> list[TrialRecord]:
    decoder, model, seed, fixed_error = _WORKER["args"]
    return [run_trial(decoder, model, seed, i, fixed_error) for i in range(lo, hi)]


def run_trials(code: CssCode, model: NoiseModel, spec: DecoderSpec, max_trials: int,
               target_errors: int | None = None, master_seed: int = 0, workers: int = 1,
               fixed_error=None) -> TrialStats:
    """Run seeded trials until ``max_trials`` or ``target_errors`` block errors.

    With an error target the run ends at the trial that reaches it, so the
    result is the same for any number of workers.
    """
    if spec.quaternary != (model.kind == DEPOLARIZING):
        raise ValueError(f"decoder {spec.name} does not match {model.kind} noise")
    if max_trials < 1:
        raise ValueError("max_trials must be positive")
    if fixed_error is not None:
        fixed_error = np.asarray(fixed_error, dtype=np.uint8)
        if fixed_error.shape != (code.n,):
            raise ValueError(f"fixed error must have length {code.n}")
    stats = TrialStats()
    t0 = time.perf_counter()
    chunks = [(lo, min(lo + CHUNK, max_trials)) for lo in range(0, max_trials, CHUNK)]

    def done() -> bool:
        return target_errors is not None and stats.block_errors >= target_errors

    def absorb(records: list[TrialRecord]) -> None:
        for rec in records:
            if done():
                return
            stats.add(rec)

    if workers <= 1:
        _init_worker(code, spec, model, master_seed, fixed_error)
        for lo, hi in chunks:
            absorb(_run_chunk(lo, hi))
            if done():
                break
    else:
        with ProcessPoolExecutor(workers, initializer=_init_worker,
                                 initargs=(code, spec, model, master_seed, fixed_error)) as pool:
            pending = []
            it = iter(chunks)
            for c in it:
                pending.append(pool.submit(_run_chunk, *c))
                if len(pending) >= 2 * workers:
                    break
            while pending:
                absorb(pending.pop(0).result())
                if done():
                    for f in pending:
                        f.cancel()
                    break
                nxt = next(it, None)
                if nxt is not None:
                    pending.append(pool.submit(_run_chunk, *nxt))
    stats.wall_s = time.perf_counter() - t0
    return stats
