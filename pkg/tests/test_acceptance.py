"""Acceptance suite: one test per criterion, each printing a pass/fail line.

The lines are repeated in the "acceptance criteria" section of the pytest
terminal summary.
"""

import contextlib
import io
import math
import time

import numpy as np

from underlay import analytic as an
from underlay import cli
from underlay import montecarlo as mc
from underlay import specfun as sf
from underlay import tradeoff as tr
from underlay import validation
from underlay.params import DEFAULTS, ChannelModel, EstimationConfig

PL = ChannelModel.PATH_LOSS
FA = ChannelModel.FADING
P = DEFAULTS
FRAMES = 100_000
SEED = 7

# fading saturation pc from 1e7 simulated frames at n = 99999 (seed 20261015,
# standard error 5.3e-5), pinned as the regression number
PC_SATURATION_MC = 0.0289024


def est(n, params=P):
    return EstimationConfig.from_n(n, params)


def test_criterion_1_special_functions(criterion):
    start = time.perf_counter()
    worst = {}
    vals = (0.5, 1.0, 2.0, 5.0)
    err = 0.0
    for m in (1, 2, 5):
        for a in vals:
            for b in vals:
                lhs = sf.marcum_q(m + 1, a, b) - sf.marcum_q(m, a, b)
                rhs = (b / a) ** m * math.exp(-(a * a + b * b) / 2) * sf.bessel_i(m, a * b)
                err = max(err, abs(lhs - rhs))
    worst["recurrence"] = err
    worst["full_tail"] = max(abs(sf.marcum_q(m, a, 0.0) - 1.0) for m in (0.5, 1, 2.5, 7, 50) for a in (0, 0.7, 3))
    worst["rayleigh"] = max(abs(sf.marcum_q(1, 0.0, b) - math.exp(-b * b / 2)) for b in np.linspace(0, 8, 33))
    worst["gamma"] = max(abs(sf.gamma_inc_reg(s, x) + sf.gamma_inc_reg(s, x, "upper") - 1.0)
                         for s in (0.5, 1.0, 2.5, 10.0, 250.0) for x in (0.0, 0.1, 1.0, 5.0, 50.0, 400.0))
    err = 0.0
    for a in (0.5, 1.5, 2.5):
        for b in (0.5, 1.5, 2.5):
            for c in (3.0, 4.5):
                for z in (-0.9, -0.3, 0.2, 0.6, 0.9):
                    lhs = sf.hyp2f1(a, b, c, z)
                    rhs = (1 - z) ** (c - a - b) * sf.hyp2f1(c - a, c - b, c, z)
                    err = max(err, abs(lhs - rhs) / max(1.0, abs(lhs)))
    worst["euler"] = err
    elapsed = time.perf_counter() - start
    ok = all(v <= 1e-9 for v in worst.values()) and elapsed < 5.0
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f"; {elapsed:.2f} s"
    criterion(1, "special-function identities within 1e-9", ok, detail)


def test_criterion_2_mean_interference(criterion):
    start = time.perf_counter()
    zs = {}
    for model in (PL, FA):
        for n in (10, 100, 1000, 10000):
            k = an.scaling_k(P, est(n), model)
            rep = mc.simulate(P, est(n), k, model, mc.McConfig(frames=FRAMES, seed=SEED))
            zs[(model.value, n)] = abs(rep.mean_pp - P.theta_i) / rep.se_pp
    elapsed = time.perf_counter() - start
    ok = max(zs.values()) <= 3.0 and elapsed < 120.0
    detail = f"max |z| {max(zs.values()):.2f} over {len(zs)} cases; {elapsed:.1f} s"
    criterion(2, "simulated E[P_p] equals theta_I within 3 SE", ok, detail)


def test_criterion_3_distributional_equivalence(criterion):
    start = time.perf_counter()
    results = []
    for model in (PL, FA):
        for n in (100, 1000, 10000):
            k = an.scaling_k(P, est(n), model)
            rep = mc.simulate(P, est(n), k, model, mc.McConfig(frames=FRAMES, seed=SEED))
            dist = an.ScalarDistribution("pp", model, P, est(n), k)
            results.append(validation.ks_check(dist, rep))
    elapsed = time.perf_counter() - start
    ok = all(c.passed for c in results) and elapsed < 300.0
    worst = max(c.statistic / c.threshold for c in results)
    detail = f"{sum(c.passed for c in results)}/{len(results)} KS tests pass, worst D/D_crit {worst:.2f}; {elapsed:.1f} s"
    criterion(3, "interference CDF vs simulated ECDF (KS, 1%)", ok, detail)


def test_criterion_4_tradeoff_shape(criterion):
    start = time.perf_counter()
    grid = np.arange(2.0, 20.01, 0.5) * 1e-3
    pts = tr.sweep(P, PL, grid)
    pc = np.array([p.pc for p in pts])
    rs = np.array([p.e_rs for p in pts])
    fit = np.polyval(np.polyfit(grid, rs, 1), grid)
    residual = float(np.max(np.abs(rs - fit) / rs))
    sol = tr.solve(P, PL)
    conv = an.conventional_rate(P, PL)
    elapsed = time.perf_counter() - start
    checks = {
        "pc increasing": bool(np.all(np.diff(pc) > 0)),
        "E[R_s] decreasing": bool(np.all(np.diff(rs) < 0)),
        "affine": residual < 0.01,
        "crosses 0.95": bool(pc[0] < 0.95 <= pc[-1]),
        "beta > 0": sol.feasible and sol.beta > 0,
        "conventional log2(11)": abs(conv - 3.45943) < 5e-6,
        "runtime": elapsed < 60.0,
    }
    detail = (f"fit residual {residual:.1e}, tau* {sol.tau_star * 1e3:.3f} ms, beta {sol.beta:.4f}, "
              f"conventional {conv:.5f}; {elapsed:.1f} s; failed: {[k for k, v in checks.items() if not v]}")
    criterion(4, "path-loss tradeoff shape on [2, 20] ms", all(checks.values()), detail)


def test_criterion_5_noise_uncertainty_ordering(criterion):
    lo, mid, hi = tr.bounds(P, PL, rho_db=3.0)
    ok = (all(s.feasible for s in (lo, mid, hi))
          and lo.tau_star < mid.tau_star < hi.tau_star
          and lo.max_e_rs > mid.max_e_rs > hi.max_e_rs)
    detail = ("tau* " + " < ".join(f"{s.tau_star * 1e3:.3f}" for s in (lo, mid, hi)) + " ms, max E[R_s] "
              + " > ".join(f"{s.max_e_rs:.4f}" for s in (lo, mid, hi)))
    criterion(5, "noise-uncertainty ordering at -3/0/+3 dB", ok, detail)


def test_criterion_6_fading_saturation(criterion):
    ns = np.unique(np.round(np.geomspace(100, 10000, 9)).astype(int))
    pcs = []
    for n in ns:
        pcs.append(an.confidence(P, est(int(n)), an.scaling_k(P, est(int(n)), FA), FA).pc)
    spread = max(pcs) - min(pcs)
    sol = tr.solve(P, FA, pc_bar=0.95)
    pin_err = abs(sol.pc_saturation - PC_SATURATION_MC) / PC_SATURATION_MC
    ok = (spread < 0.01 and not sol.feasible and sol.regime_boundary_tau < 1e-4 and pin_err < 0.01)
    detail = (f"pc spread {spread:.1e} over 0.1-10 ms, feasible={sol.feasible}, "
              f"boundary {sol.regime_boundary_tau * 1e6:.0f} us, saturation {sol.pc_saturation:.6f} "
              f"vs pinned {PC_SATURATION_MC} ({pin_err:.2%})")
    criterion(6, "fading saturation and infeasibility", ok, detail)


def _mean_slope(x, y):
    x, y = np.asarray(x), np.asarray(y)
    return float((y[-1] - y[0]) / (x[-1] - x[0]))


def test_criterion_7_sensitivity_trends(criterion):
    gammas = np.arange(-15.0, 10.01, 1.0)
    mus = np.round(np.arange(0.015, 0.0551, 0.005), 6)
    bars = (0.92, 0.95, 0.97)
    snr = {b: [s.max_e_rs for _, s in tr.sensitivity(P, PL, "snr", gammas, pc_bar=b)] for b in bars}
    acc = {b: [s.max_e_rs for _, s in tr.sensitivity(P, PL, "accuracy", mus, pc_bar=b)] for b in bars}

    snr_nondecreasing = all(np.all(np.diff(v) >= 0) for v in snr.values())
    below, above = gammas <= 5.0, gammas >= 5.0
    ratios = []
    for v in snr.values():
        v = np.asarray(v)
        s_lo, s_hi = _mean_slope(gammas[below], v[below]), _mean_slope(gammas[above], v[above])
        ratios.append(abs(s_lo) / abs(s_hi))
    snr_steeper_below = snr_nondecreasing and min(ratios) > 2.0
    mu_nondecreasing = all(np.all(np.diff(v) >= 0) for v in acc.values())
    bar_ordered = all(snr[0.92][i] >= snr[0.95][i] >= snr[0.97][i] for i in range(len(gammas))) and \
        all(acc[0.92][i] >= acc[0.95][i] >= acc[0.97][i] for i in range(len(mus)))
    parts = {"gamma nondecreasing": snr_nondecreasing, "steeper below 5 dB": snr_steeper_below,
             "mu nondecreasing": mu_nondecreasing, "pc_bar ordering": bar_ordered}
    v95 = snr[0.95]
    detail = (f"max E[R_s] at pc_bar 0.95: {v95[0]:.3f} at -15 dB, {v95[15]:.3f} at 0 dB, "
              f"{v95[-1]:.3f} at 10 dB; |slope| ratio {min(ratios):.2f}; "
              f"mu: {acc[0.95][0]:.3f} -> {acc[0.95][-1]:.3f}; "
              + ", ".join(f"{k} {'ok' if v else 'FAILS'}" for k, v in parts.items()))
    criterion(7, "sensitivity trends in gamma, mu and pc_bar", all(parts.values()), detail)


def test_criterion_8_determinism(criterion):
    def validate_report():
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            code = cli.main(["validate", "--model", "pathloss", "--frames", str(FRAMES), "--seed", "11"])
        return code, buf.getvalue()

    first, second = validate_report(), validate_report()
    same_report = first == second and first[0] == 0
    same_workers = True
    for model in (PL, FA):
        reports = []
        for workers in (1, 4):
            k = an.scaling_k(P, est(1000), model)
            rep = mc.simulate(P, est(1000), k, model, mc.McConfig(frames=FRAMES, seed=SEED, workers=workers))
            reports.append((rep.to_csv(), rep.pp_sorted.tobytes()))
        same_workers = same_workers and reports[0] == reports[1]
    detail = f"validate reports identical: {same_report}; 1 vs 4 workers identical: {same_workers}"
    criterion(8, "determinism", same_report and same_workers, detail)
