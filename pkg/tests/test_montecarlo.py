import math

import numpy as np
import pytest
from scipy import stats

from underlay import analytic as an
from underlay import montecarlo as mc
from underlay.params import DEFAULTS, ChannelModel, EstimationConfig

PL = ChannelModel.PATH_LOSS
FA = ChannelModel.FADING
P = DEFAULTS


def est(n, params=P):
    return EstimationConfig.from_n(n, params)


def run(n, model, frames=20_000, seed=3, k=None, **kw):
    k = an.scaling_k(P, est(n), model) if k is None else k
    return mc.simulate(P, est(n), k, model, mc.McConfig(frames=frames, seed=seed, **kw))


@pytest.mark.parametrize("model", [PL, FA])
def test_same_seed_same_report(model):
    a, b = run(100, model), run(100, model)
    assert a.to_csv() == b.to_csv()
    assert np.array_equal(a.pp_sorted, b.pp_sorted)


def test_different_seed_differs():
    assert run(100, FA, seed=1).mean_pp != run(100, FA, seed=2).mean_pp


@pytest.mark.parametrize("model", [PL, FA])
def test_worker_count_does_not_change_results(model):
    frames = 3 * mc.BLOCK_FRAMES + 17
    one = run(50, model, frames=frames, workers=1)
    four = run(50, model, frames=frames, workers=4)
    assert one.to_csv() == four.to_csv()
    assert one.summary() == four.summary()


def test_prefix_blocks_are_shared():
    # frames are generated block by block, so a longer run extends a shorter one
    short = run(20, FA, frames=mc.BLOCK_FRAMES)
    long = run(20, FA, frames=2 * mc.BLOCK_FRAMES)
    assert np.isin(short.pp_sorted, long.pp_sorted).all()


def test_noiseless_estimator_is_exact():
    p = P.with_(sigma2_s=1e-24)
    e = est(200, p)
    k = an.scaling_k(p, e, PL)
    rep = mc.simulate(p, e, k, PL, mc.McConfig(frames=5000, seed=1))
    assert rep.pc_hat == 1.0
    assert rep.se_pcont / rep.mean_pcont < 1e-6
    assert rep.mean_pp == pytest.approx(p.theta_i, rel=1e-6)


@pytest.mark.parametrize("n", [10, 1000, 10000])
def test_mean_interference_pathloss(n):
    rep = run(n, PL, frames=100_000, seed=7)
    assert abs(rep.mean_pp - P.theta_i) <= 3 * rep.se_pp


def test_fading_confidence_saturates_in_simulation():
    a = run(1000, FA, frames=100_000, seed=7)
    b = run(10000, FA, frames=100_000, seed=7)
    assert abs(a.pc_hat - b.pc_hat) < 0.01


@pytest.mark.parametrize("model", [PL, FA])
@pytest.mark.parametrize("n", [10, 100, 1000])
def test_self_consistent_k_agrees_with_analytic(model, n):
    k, se = mc.self_consistent_k(P, est(n), model, mc.McConfig(frames=100_000, seed=5), return_se=True)
    assert abs(k - an.scaling_k(P, est(n), model)) <= 3 * se


def test_self_consistent_k_large_n_limit():
    k = mc.self_consistent_k(P, est(50_000), PL, mc.McConfig(frames=20_000, seed=5))
    assert k == pytest.approx(2.0, rel=1e-3)


def test_self_consistent_k_noiseless_limit():
    p = P.with_(sigma2_s=1e-24)
    assert mc.self_consistent_k(p, est(100, p), PL, mc.McConfig(frames=2000)) == pytest.approx(1.0, rel=1e-9)


def test_per_sample_mode_law():
    # N complex samples average to sigma^2/(2N) times chi-squared with 2N dof
    n = 40
    rng = np.random.default_rng(9)
    x = mc._draw_prcvd(rng, P, n, np.ones(20_000), "per_sample")
    scaled = x * 2 * n / P.sigma2_s
    res = stats.kstest(scaled, stats.ncx2(2 * n, 2 * n * P.alpha_p * P.p_tran / P.sigma2_s).cdf)
    assert res.pvalue > 0.01
    assert x.mean() == pytest.approx(P.alpha_p * P.p_tran + P.sigma2_s, rel=0.01)


def test_direct_mode_law():
    n = 40
    rng = np.random.default_rng(9)
    x = mc._draw_prcvd(rng, P, n, np.ones(20_000), "direct")
    res = stats.kstest(x * n / P.sigma2_s, stats.ncx2(n, n * P.alpha_p * P.p_tran / P.sigma2_s).cdf)
    assert res.pvalue > 0.01


def test_per_sample_mode_runs_and_is_deterministic():
    a = run(30, FA, frames=3000, draw_mode="per_sample")
    b = run(30, FA, frames=3000, draw_mode="per_sample")
    assert a.to_csv() == b.to_csv()


def test_csv_layout():
    rep = run(100, FA, frames=5000)
    lines = rep.to_csv().splitlines()
    assert lines[0] == "quantity,bin_lo,bin_hi,count"
    assert lines[-1].startswith("#summary,frames=5000,seed=3,")
    body = lines[1:-1]
    assert len(body) == 3 * mc.HIST_BINS
    for name in ("pcont", "pp", "rs"):
        assert sum(int(r.split(",")[3]) for r in body if r.startswith(name + ",")) == 5000


def test_ecdf_is_a_distribution_function():
    rep = run(100, PL, frames=5000)
    assert rep.ecdf_pp(0.0) == 0.0
    assert rep.ecdf_pp(1.0) == 1.0
    assert rep.ecdf_pp(rep.pp_sorted[2499]) == pytest.approx(0.5)


@pytest.mark.parametrize("bad", [dict(frames=0), dict(draw_mode="bulk"), dict(seed=-1), dict(workers=0)])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        mc.McConfig(**bad)


def test_simulate_rejects_tiny_n():
    with pytest.raises(ValueError):
        mc.simulate(P, EstimationConfig(tau=2e-6, n=2), 1.0, PL, mc.McConfig(frames=10))


def test_mean_and_standard_error_helper():
    m, se = mc._mean_se(np.array([1.0, 2.0, 3.0, 4.0]))
    assert m == 2.5
    assert se == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)
    assert math.isnan(mc._mean_se(np.array([1.0]))[1])
