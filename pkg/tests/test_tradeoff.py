import math

import numpy as np
import pytest

from underlay import analytic as an
from underlay import montecarlo as mc
from underlay import tradeoff as tr
from underlay.params import DEFAULTS, ChannelModel, EstimationConfig

PL = ChannelModel.PATH_LOSS
FA = ChannelModel.FADING
P = DEFAULTS
GRID = np.arange(2.0, 20.01, 0.5) * 1e-3


@pytest.fixture(scope="module")
def pl_solution():
    return tr.solve(P, PL)


@pytest.fixture(scope="module")
def fading_solution():
    return tr.solve(P, FA)


def pc_at(n, params=P, model=PL):
    e = EstimationConfig.from_n(n, params)
    return an.confidence(params, e, an.scaling_k(params, e, model), model).pc


def test_pathloss_solution_frozen(pl_solution):
    s = pl_solution
    assert s.feasible
    assert s.n_star == 9221
    assert s.tau_star == pytest.approx(9.221e-3)
    assert s.max_e_rs == pytest.approx(3.140349, abs=2e-6)
    assert s.beta == pytest.approx(math.log2(11.0) - s.max_e_rs, rel=1e-12)
    assert 2e-3 <= s.tau_star <= 20e-3


def test_constraint_binds_within_one_sample(pl_solution):
    s = pl_solution
    slack = s.pc_star - s.pc_bar
    assert 0.0 <= slack <= pc_at(s.n_star + 1) - pc_at(s.n_star)
    assert pc_at(s.n_star - 1) < s.pc_bar


def test_snap_consistency(pl_solution):
    s = pl_solution
    assert s.n_star == round(s.tau_star * P.f_s)
    assert pc_at(s.n_star) >= s.pc_bar


def test_beta_positive(pl_solution):
    assert pl_solution.beta > 0


@pytest.mark.parametrize("pc_bar", [0.5, 0.9, 0.99])
def test_feasible_solutions_bind_for_other_targets(pc_bar):
    s = tr.solve(P, PL, pc_bar=pc_bar)
    assert s.feasible and s.beta > 0
    assert s.pc_star >= pc_bar > pc_at(s.n_star - 1)


def test_unconstrained_solution_is_true_maximum():
    # E[R_s] rises over the first few hundred samples, so the unconstrained
    # optimum sits above the smallest admissible tau
    s = tr.solve(P, PL, pc_bar=0.0)
    assert s.feasible and s.n_star == 162
    assert s.max_e_rs == pytest.approx(3.448258, abs=2e-6)
    ev = tr._Evaluator(P, PL)
    for n in (3, 50, 161, 163, 500):
        assert ev.e_rs(n) <= s.max_e_rs
    assert s.notes


def test_infeasible_pathloss_target():
    p = P.with_(mu=1e-4)
    s = tr.solve(p, PL, pc_bar=0.99)
    assert not s.feasible and s.tau_star is None


def test_solve_rejects_bad_target():
    with pytest.raises(ValueError):
        tr.solve(P, PL, pc_bar=1.0)


def test_pathloss_sweep_is_monotone():
    pts = tr.sweep(P, PL, GRID)
    assert len(pts) == 37 and not any(p.failed for p in pts)
    pc = np.array([p.pc for p in pts])
    rs = np.array([p.e_rs for p in pts])
    assert np.all(np.diff(pc) > 0) and np.all(np.diff(rs) < 0)
    assert pc[0] < 0.95 < pc[-1]


def test_sweep_throughput_vanishes_at_frame_end():
    pts = tr.sweep(P, PL, [P.frame_t - 1.0 / P.f_s])
    assert pts[0].e_rs == pytest.approx(0.0, abs=1e-4)


def test_sweep_rejects_out_of_range():
    with pytest.raises(ValueError):
        tr.sweep(P, PL, [1e-6])
    with pytest.raises(ValueError):
        tr.sweep(P, PL, [P.frame_t])


def test_sweep_flags_numeric_failures(monkeypatch):
    def broken(*args, **kwargs):
        raise tr.QuadratureError("forced failure", 1e-3)

    monkeypatch.setattr(an, "confidence", broken)
    pts = tr.sweep(P, PL, [2e-3, 3e-3])
    assert all(p.failed and math.isnan(p.pc) for p in pts)
    assert "QuadratureError" in pts[0].error


def test_sweep_noise_offset_moves_pc_not_throughput():
    lo, mid, hi = (tr.sweep(P, PL, [5e-3], delta_sigma_db=d)[0] for d in (-3.0, 0.0, 3.0))
    assert lo.pc > mid.pc > hi.pc
    assert lo.e_rs == mid.e_rs == hi.e_rs


def test_bounds_ordering():
    lo, mid, hi = tr.bounds(P, PL)
    assert lo.n_star == 6839 and mid.n_star == 9221 and hi.n_star == 10924
    assert lo.tau_star < mid.tau_star < hi.tau_star
    assert lo.max_e_rs > mid.max_e_rs > hi.max_e_rs


def test_bounds_ordering_confirmed_by_simulation():
    # throughput of each branch simulated at its tau* with the nominal noise
    means = []
    for s in tr.bounds(P, PL):
        e = EstimationConfig.from_n(s.n_star, P)
        rep = mc.simulate(P, e, an.scaling_k(P, e, PL), PL, mc.McConfig(frames=100_000, seed=4))
        assert rep.mean_rs == pytest.approx(s.max_e_rs, abs=3 * rep.se_rs + 1e-9)
        means.append(rep.mean_rs)
    assert means[0] > means[1] > means[2]


def test_bounds_zero_width_gives_identical_branches():
    a, b, c = tr.bounds(P, PL, rho_db=0.0)
    assert a == b == c


def test_fading_is_infeasible(fading_solution):
    s = fading_solution
    assert not s.feasible and s.tau_star is None
    assert s.pc_saturation == pytest.approx(0.0288398, abs=2e-7)
    assert s.pc_saturation < 0.95
    assert s.regime_boundary_tau < 1e-4


def test_fading_channel_dominant_beyond_boundary():
    assert tr.channel_dominant(P, 1000, FA)
    assert tr.channel_dominant(P, 100, FA)


def test_fading_feasible_for_low_target():
    s = tr.solve(P, FA, pc_bar=0.02)
    assert s.feasible and s.pc_star >= 0.02 and s.beta > 0


def test_log_grid_covers_range():
    g = tr._log_grid(99999)
    assert g[0] == 3 and g[-1] == 99999 and g == sorted(set(g))


def test_apply_axis():
    p = tr.apply_axis(P, "snr", 0.0)
    assert p.gamma == pytest.approx(1.0)
    assert tr.apply_axis(P, "snr", -10.0).gamma == pytest.approx(0.1)
    assert tr.apply_axis(P, "accuracy", 0.04).mu == 0.04
    with pytest.raises(ValueError):
        tr.apply_axis(P, "bandwidth", 1.0)


@pytest.mark.parametrize("axis, value", [("snr", 0.0), ("accuracy", 0.025), ("accuracy", 0.04)])
def test_single_value_sensitivity_equals_solve(axis, value):
    [(v, s)] = tr.sensitivity(P, PL, axis, [value])
    assert v == value
    assert s == tr.solve(tr.apply_axis(P, axis, value), PL)


def test_accuracy_sensitivity_nondecreasing():
    res = tr.sensitivity(P, PL, "accuracy", np.arange(0.015, 0.0551, 0.01))
    vals = [s.max_e_rs for _, s in res]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_higher_target_never_helps():
    for g in (-10.0, 0.0, 5.0):
        p = tr.apply_axis(P, "snr", g)
        vals = [tr.solve(p, PL, pc_bar=c).max_e_rs for c in (0.92, 0.95, 0.97)]
        assert vals[0] >= vals[1] >= vals[2]


def test_unknown_axis_rejected():
    with pytest.raises(ValueError):
        tr.sensitivity(P, PL, "power", [1.0])
