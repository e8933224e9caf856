"""Analytic-versus-simulation check suite behind ``underlay validate``.

At three sample counts the suite compares the analytic interference CDF with
the simulated ECDF (Kolmogorov-Smirnov at the 1% level), the simulated mean
interference with ``theta_I`` and the simulated throughput with the analytic
expectation (3 standard errors each), and the simulated confidence
probability with the analytic one (3 binomial standard errors).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import interpolate, stats

from . import analytic, montecarlo
from .params import EstimationConfig, SystemParams

DEFAULT_NS = (100, 1000, 10000)
MIN_FRAMES = 10_000
KS_LEVEL = 0.01
Z_LIMIT = 3.0


@dataclass(frozen=True)
class Check:
    name: str
    n: int
    statistic: float
    threshold: float
    passed: bool

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "FAIL"


def analytic_pp_cdf_interp(dist, samples, points=240):
    """Analytic interference CDF, tabulated over the sample span and interpolated.

    The table covers the observed range widened by a fifth of its log width
    on each side; PCHIP interpolation in log(x) keeps it monotone.
    """
    lo, hi = float(samples[0]), float(samples[-1])
    span = max(hi / lo, 1.0 + 1e-9)
    grid = np.geomspace(lo / span**0.2, hi * span**0.2, points)
    table = np.maximum.accumulate(np.clip(dist.cdf(grid), 0.0, 1.0))
    spline = interpolate.PchipInterpolator(np.log(grid), table)

    def cdf(x):
        x = np.asarray(x, dtype=float)
        out = spline(np.log(np.clip(x, grid[0], grid[-1])))
        out = np.where(x < grid[0], 0.0, np.where(x > grid[-1], 1.0, out))
        return np.clip(out, 0.0, 1.0)

    return cdf, grid


def ks_check(dist, report):
    cdf, _ = analytic_pp_cdf_interp(dist, report.pp_sorted)
    res = stats.kstest(report.pp_sorted, cdf)
    crit = float(stats.kstwo.ppf(1.0 - KS_LEVEL, report.frames))
    return Check("ks_pp", report.n, float(res.statistic), crit, bool(res.statistic < crit))


def run_checks(params: SystemParams, model=None, frames=100_000, seed=7, k_scale=1.0,
               ns=DEFAULT_NS, workers=1, keep=None):
    """Run the suite; returns the list of :class:`Check`.

    ``k_scale`` multiplies the analytic scaling factor before simulation,
    which deliberately breaks the mean-interference property.  ``keep``, if
    a dict, receives ``n -> (McReport, ScalarDistribution)`` for plotting.
    """
    model = params.channel if model is None else model
    if frames < MIN_FRAMES:
        raise ValueError(f"validation needs frames >= {MIN_FRAMES} (got {frames})")
    checks = []
    for n in ns:
        n = min(int(n), params.max_samples)
        est = EstimationConfig.from_n(n, params)
        k = analytic.scaling_k(params, est, model) * k_scale
        rep = montecarlo.simulate(params, est, k, model,
                                  montecarlo.McConfig(frames=frames, seed=seed, workers=workers))
        dist = analytic.ScalarDistribution("pp", model, params, est, k)
        checks.append(ks_check(dist, rep))

        z = abs(rep.mean_pp - params.theta_i) / rep.se_pp
        checks.append(Check("mean_pp", n, z, Z_LIMIT, z <= Z_LIMIT))

        pc = analytic.confidence(params, est, k, model).pc
        bound = Z_LIMIT * math.sqrt(max(pc * (1.0 - pc), 1e-300) / frames)
        checks.append(Check("pc", n, abs(rep.pc_hat - pc), bound, abs(rep.pc_hat - pc) <= bound))

        ers = analytic.expected_throughput(params, est, k, model)
        z = abs(rep.mean_rs - ers) / rep.se_rs
        checks.append(Check("mean_rs", n, z, Z_LIMIT, z <= Z_LIMIT))
        if keep is not None:
            keep[n] = (rep, dist)
    return checks


def format_report(checks) -> str:
    lines = [f"{'check':<8} {'n':>6} {'statistic':>14} {'threshold':>14} verdict"]
    for c in checks:
        lines.append(f"{c.name:<8} {c.n:>6} {c.statistic:>14.6g} {c.threshold:>14.6g} {c.verdict}")
    failed = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - failed}/{len(checks)} checks passed")
    return "\n".join(lines) + "\n"


def checks_csv(checks) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["check", "n", "statistic", "threshold", "verdict"])
    for c in checks:
        w.writerow([c.name, c.n, repr(c.statistic), repr(c.threshold), c.verdict])
    return buf.getvalue()
