import numpy as np
import pytest
from helpers import reference_bpgd

from qbpgd.bp import BpConfig, TannerGraph, bp_run, channel_llr
from qbpgd.codes import DecodeOutcome, classify_x_outcome, hypergraph_product, random_regular_ldpc
from qbpgd.decimation import GdConfig, bpgd_decode, bpgd_rd_decode, degeneracy_experiment


@pytest.fixture(scope="module")
def small_hgp():
    rng = np.random.default_rng(7)
    return hypergraph_product(random_regular_ldpc(8, 3, 4, rng), random_regular_ldpc(8, 3, 4, rng))


def _hard_errors(code, graph, p, count, seed, cfg):
    """Errors on which plain BP with ``cfg.T`` iterations does not converge."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        x = (rng.random(code.n) < p).astype(np.uint8)
        s = graph.syndrome(x)
        if not bp_run(graph, s, np.full(code.n, channel_llr(p)), BpConfig(T=cfg.T)).converged:
            out.append(x)
    return out


def test_config_validation():
    for kw in ({"T": 0}, {"R": 0}, {"llr_max": 0}, {"gamma_prime": -1}):
        with pytest.raises(ValueError):
            GdConfig(**kw)
    with pytest.raises(ValueError):
        GdConfig(R=8).rounds(7)


def test_zero_syndrome(steane):
    r = bpgd_decode(TannerGraph(steane.H1), np.zeros(3), 0.05, GdConfig())
    assert r.converged and r.rounds_used == 1 and r.trace == []
    assert not r.estimate.any()


def test_steane_weight_one_errors(steane):
    g = TannerGraph(steane.H1)
    for i in range(7):
        x = np.zeros(7, dtype=np.uint8)
        x[i] = 1
        r = bpgd_decode(g, g.syndrome(x), 0.05, GdConfig())
        assert r.converged
        out = classify_x_outcome(steane, x, r.estimate)
        assert out in (DecodeOutcome.SUCCESS_EXACT, DecodeOutcome.SUCCESS_DEGENERATE)


def test_steane_syndrome_111_recovers_single_flip(steane):
    """Plain BP stops on a weight-4 logical; decimation finds the weight-1 error."""
    g = TannerGraph(steane.H1)
    r = bpgd_decode(g, [1, 1, 1], 0.05, GdConfig())
    assert r.converged and np.flatnonzero(r.estimate).tolist() == [2]


def test_matches_reference_implementation(small_hgp):
    g = TannerGraph(small_hgp.H1)
    H = small_hgp.h1_dense
    cfg = GdConfig(T=4, R=30)
    decided = 0
    for x in _hard_errors(small_hgp, g, 0.06, 6, 1, cfg):
        s = g.syndrome(x)
        ok, est, trace, tie = reference_bpgd(H, s, 0.06, cfg.T, cfg.R, tie_gap=1e-5)
        r = bpgd_decode(g, s, 0.06, cfg)
        if tie is None:
            assert r.trace == trace and r.converged == ok
            if ok:
                assert np.array_equal(r.estimate, est)
        else:
            # choices agree up to the first near-tie, which floating point may break either way
            assert r.trace[:tie] == trace[:tie]
        decided += len(trace) if tie is None else tie
    assert decided >= 5


def test_trace_invariants(small_hgp):
    g = TannerGraph(small_hgp.H1)
    cfg = GdConfig(T=5)
    for x in _hard_errors(small_hgp, g, 0.07, 15, 2, cfg):
        for r in (bpgd_decode(g, g.syndrome(x), 0.07, cfg),
                  bpgd_rd_decode(g, g.syndrome(x), 0.07, cfg, np.random.default_rng(0))):
            vars_ = [v for v, _ in r.trace]
            assert len(set(vars_)) == len(vars_)
            assert len(r.trace) <= cfg.rounds(small_hgp.n)
            if r.converged:
                assert len(r.trace) == r.rounds_used - 1
                assert np.array_equal(g.syndrome(r.estimate), g.syndrome(x))


def test_decimated_priors_stay_pinned(small_hgp):
    """With llr_max above the largest possible message total, no pin is ever overturned."""
    g = TannerGraph(small_hgp.H1)
    cfg = GdConfig(T=5, llr_max=float(np.diff(g.var_ptr).max() * 25.0 + 1))
    hits = 0
    for x in _hard_errors(small_hgp, g, 0.07, 15, 3, cfg):
        r = bpgd_decode(g, g.syndrome(x), 0.07, cfg)
        if r.converged:
            hits += 1
            for v, bit in r.trace:
                assert r.estimate[v] == bit
    assert hits > 0


def test_monotone_in_round_limit(small_hgp):
    g = TannerGraph(small_hgp.H1)
    for x in _hard_errors(small_hgp, g, 0.06, 8, 4, GdConfig(T=5)):
        s = g.syndrome(x)
        r = bpgd_decode(g, s, 0.06, GdConfig(T=5))
        if not r.converged:
            continue
        for R in sorted({r.rounds_used, min(r.rounds_used + 3, small_hgp.n), small_hgp.n}):
            again = bpgd_decode(g, s, 0.06, GdConfig(T=5, R=R))
            assert again.converged and again.trace == r.trace
            assert np.array_equal(again.estimate, r.estimate)
        if r.rounds_used > 1:
            assert not bpgd_decode(g, s, 0.06, GdConfig(T=5, R=r.rounds_used - 1)).converged


def test_first_round_reduces_to_bp(small_hgp):
    g = TannerGraph(small_hgp.H1)
    rng = np.random.default_rng(5)
    seen = 0
    for _ in range(40):
        x = (rng.random(small_hgp.n) < 0.03).astype(np.uint8)
        s = g.syndrome(x)
        r = bpgd_decode(g, s, 0.03, GdConfig(T=10))
        if r.converged and r.rounds_used == 1 and x.any():
            b = bp_run(g, s, np.full(small_hgp.n, channel_llr(0.03)), BpConfig(T=10), early_stop=False)
            assert b.converged and np.array_equal(b.hard, r.estimate)
            seen += 1
    assert seen > 0


def test_check_each_iteration_option(steane):
    g = TannerGraph(steane.H1)
    r = bpgd_decode(g, [1, 1, 1], 0.05, GdConfig(check_each_iteration=True))
    # stopping at the first matching iteration reproduces plain BP
    assert r.converged and r.rounds_used == 1
    assert r.estimate.tolist() == [0, 1, 1, 0, 1, 1, 0]


def test_rd_with_zero_gap_matches_bpgd_on_unique_maximizers(small_hgp):
    g = TannerGraph(small_hgp.H1)
    H = small_hgp.h1_dense
    cfg = GdConfig(T=4, R=30, gamma_prime=0.0)
    decided = 0
    for x in _hard_errors(small_hgp, g, 0.06, 6, 1, cfg):
        s = g.syndrome(x)
        tie = reference_bpgd(H, s, 0.06, cfg.T, cfg.R, tie_gap=1e-5)[3]
        a = bpgd_decode(g, s, 0.06, cfg)
        k = len(a.trace) if tie is None else tie
        for seed in range(3):
            b = bpgd_rd_decode(g, s, 0.06, cfg, np.random.default_rng(seed))
            assert b.trace[:k] == a.trace[:k]
            if tie is None:
                assert b.trace == a.trace and b.converged == a.converged
        decided += k
    assert decided >= 5


def test_rd_is_reproducible_and_random(small_hgp):
    g = TannerGraph(small_hgp.H1)
    x = _hard_errors(small_hgp, g, 0.07, 1, 6, GdConfig())[0]
    s = g.syndrome(x)
    cfg = GdConfig(T=5, seed=11)
    a, b = bpgd_rd_decode(g, s, 0.07, cfg), bpgd_rd_decode(g, s, 0.07, cfg)
    assert a.trace == b.trace and a.rounds_used == b.rounds_used
    traces = {tuple(bpgd_rd_decode(g, s, 0.07, cfg, np.random.default_rng(i)).trace) for i in range(20)}
    assert len(traces) > 1
    with pytest.raises(ValueError):
        bpgd_rd_decode(g, s, 0.07, GdConfig())


def test_min_sum_decimation_runs(small_hgp):
    g = TannerGraph(small_hgp.H1)
    cfg = GdConfig(T=5, bp=BpConfig(variant="min-sum"))
    for x in _hard_errors(small_hgp, g, 0.05, 5, 8, cfg):
        r = bpgd_decode(g, g.syndrome(x), 0.05, cfg)
        if r.converged:
            assert np.array_equal(g.syndrome(r.estimate), g.syndrome(x))


def test_degeneracy_trivial_cases(steane):
    rep = degeneracy_experiment(steane, np.zeros(7), 1, GdConfig(), 0.05)
    assert rep.runs == 1 and rep.converged == 1 and rep.distinct == 1
    e = rep.entries[0]
    assert e.frequency == 1 and e.distance == 0 and e.weight == 0
    assert e.outcome is DecodeOutcome.SUCCESS_EXACT


def test_degeneracy_report_shape(rep_hgp):
    rng = np.random.default_rng(0)
    truth = np.zeros(rep_hgp.n, dtype=np.uint8)
    truth[rng.choice(rep_hgp.n, 3, replace=False)] = 1
    rep = degeneracy_experiment(rep_hgp, truth, 60, GdConfig(T=5), 0.08)
    freqs = [e.frequency for e in rep.entries]
    assert freqs == sorted(freqs, reverse=True) and sum(freqs) == rep.converged
    for e in rep.entries:
        assert e.weight == int(e.estimate.sum())
        assert e.distance == int((e.estimate ^ truth).sum())
    assert rep.count(DecodeOutcome.SUCCESS_DEGENERATE) + rep.count(DecodeOutcome.SUCCESS_EXACT) + rep.count(
        DecodeOutcome.FAILURE_LOGICAL
    ) == rep.distinct
