"""Estimation-time selection under the probability-of-confidence constraint.

The problem is ``max_N E[R_s](N)`` subject to ``pc(N) >= pc_bar`` over
integer sample counts ``3 <= N <= ceil(T f_s) - 1``.  Under path loss pc is
increasing in N, so the feasible set is ``[N_c, N_max]`` and ``N_c`` comes
from a bisection.  Under fading pc saturates well below 1 and the feasible
set is located on a logarithmic grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import analytic
from ._quadrature import QuadratureError
from .params import ChannelModel, EstimationConfig, SystemParams, validate
from .specfun import ConvergenceError

SATURATION_EPS = 1e-3
DEFAULT_RHO_DB = 3.0
_NUMERIC_ERRORS = (QuadratureError, ConvergenceError, ArithmeticError, FloatingPointError)


@dataclass(frozen=True)
class TradeoffPoint:
    tau: float
    n: int
    k_factor: float
    pc: float
    e_rs: float
    delta_sigma_db: float = 0.0
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass(frozen=True)
class TradeoffSolution:
    feasible: bool
    tau_star: Optional[float] = None
    n_star: Optional[int] = None
    max_e_rs: Optional[float] = None
    beta: Optional[float] = None
    pc_star: Optional[float] = None
    pc_bar: float = 0.95
    delta_sigma_db: float = 0.0
    pc_saturation: Optional[float] = None
    regime_boundary_tau: Optional[float] = None
    notes: tuple = field(default=())


def _model(params, model):
    return params.channel if model is None else model


class _Evaluator:
    """Memoized K, pc and E[R_s] per sample count for one scenario."""

    def __init__(self, params, model, throughput_params=None):
        self.params = params
        self.model = model
        # the data phase sees the nominal noise even when estimation does not
        self.tp = throughput_params or params
        self._pc = {}
        self._rs = {}

    def est(self, n):
        return EstimationConfig.from_n(n, self.params)

    def k(self, n):
        return analytic.scaling_k(self.params, self.est(n), self.model)

    def pc(self, n):
        if n not in self._pc:
            self._pc[n] = analytic.confidence(self.params, self.est(n), self.k(n), self.model).pc
        return self._pc[n]

    def e_rs(self, n):
        if n not in self._rs:
            est = self.est(n)
            k = analytic.scaling_k(self.tp, est, self.model)
            self._rs[n] = analytic.expected_throughput(self.tp, est, k, self.model)
        return self._rs[n]


def sweep(params: SystemParams, model=None, tau_grid=(), delta_sigma_db=None):
    """Evaluate ``(K, pc, E[R_s])`` at every estimation time in ``tau_grid``.

    A point whose analytic evaluation fails numerically is returned with its
    ``error`` set and NaN values; the sweep carries on.
    """
    model = _model(params, model)
    if delta_sigma_db is not None:
        params = params.with_(delta_sigma_db=delta_sigma_db)
    validate(params)
    taus = [float(t) for t in tau_grid]
    lo = 3.0 / params.f_s
    bad = [t for t in taus if not lo <= t < params.frame_t]
    if bad:
        raise ValueError(f"grid values outside [3/f_s, T): {bad[:5]}")
    points = []
    for tau in taus:
        n = int(round(tau * params.f_s))
        est = EstimationConfig(tau=tau, n=n)
        try:
            k = analytic.scaling_k(params, est, model)
            pc = analytic.confidence(params, est, k, model).pc
            e_rs = analytic.expected_throughput(params.with_(delta_sigma_db=0.0), est,
                                                analytic.scaling_k(params.with_(delta_sigma_db=0.0),
                                                                   est, model), model)
            points.append(TradeoffPoint(tau, n, k, pc, e_rs, params.delta_sigma_db))
        except _NUMERIC_ERRORS as exc:
            points.append(TradeoffPoint(tau, n, math.nan, math.nan, math.nan,
                                        params.delta_sigma_db, error=f"{type(exc).__name__}: {exc}"))
    return points


def _smallest_feasible(ev, lo, hi, predicate):
    """Smallest n in [lo, hi] with predicate true, assuming monotonicity."""
    if not predicate(hi):
        return None
    if predicate(lo):
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if predicate(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _golden_max(f, lo, hi):
    """Integer argmax of a unimodal ``f`` on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    while hi - lo > 3:
        a = int(round(hi - invphi * (hi - lo)))
        b = int(round(lo + invphi * (hi - lo)))
        if a >= b:
            b = a + 1
        if f(a) < f(b):
            lo = a
        else:
            hi = b
    return max(range(lo, hi + 1), key=f)


def _finish(params, ev, n_star, pc_bar, notes, **extra):
    max_e_rs = ev.e_rs(n_star)
    beta = analytic.conventional_rate(ev.tp, ev.model) - max_e_rs
    return TradeoffSolution(feasible=True, tau_star=n_star / params.f_s, n_star=n_star,
                            max_e_rs=max_e_rs, beta=beta, pc_star=ev.pc(n_star),
                            pc_bar=pc_bar, delta_sigma_db=params.delta_sigma_db,
                            notes=tuple(notes), **extra)


def _maximize_from(ev, n_c, n_max):
    """Best E[R_s] over [n_c, n_max] when E[R_s] is unimodal in n."""
    if n_c >= n_max or ev.e_rs(n_c) >= ev.e_rs(n_c + 1):
        return n_c
    return _golden_max(ev.e_rs, n_c, n_max)


def fading_diagnostics(params, model=None, ev=None):
    """Saturation pc and the estimation/channel-dominant regime boundary.

    The saturation value is pc at the largest admissible sample count.  The
    boundary is the smallest ``tau`` whose pc is within ``SATURATION_EPS``
    of it.
    """
    model = _model(params, model)
    ev = ev or _Evaluator(params, model)
    n_max = params.max_samples
    sat = ev.pc(n_max)
    n_b = _smallest_feasible(ev, 3, n_max, lambda n: ev.pc(n) >= sat - SATURATION_EPS)
    return sat, n_b / params.f_s


def channel_dominant(params, n, model=None) -> bool:
    """Saturation detector: pc at ``n`` and ``4n`` differ by less than 1e-3."""
    model = _model(params, model)
    ev = _Evaluator(params, model)
    n4 = min(4 * n, params.max_samples)
    return abs(ev.pc(n4) - ev.pc(n)) < SATURATION_EPS


def _log_grid(n_max, points=32):
    grid = np.unique(np.round(np.geomspace(3, n_max, points)).astype(int))
    return [int(v) for v in grid]


def solve(params: SystemParams, model=None, pc_bar=None) -> TradeoffSolution:
    """Maximize E[R_s] over the estimation time subject to ``pc >= pc_bar``.

    ``pc_bar`` defaults to ``params.pc_bar``; passing it explicitly also
    admits the unconstrained value 0.
    """
    model = _model(params, model)
    validate(params)
    pc_bar = params.pc_bar if pc_bar is None else float(pc_bar)
    if not 0.0 <= pc_bar < 1.0:
        raise ValueError(f"pc_bar must lie in [0, 1) (got {pc_bar!r})")
    nominal = params.with_(delta_sigma_db=0.0)
    ev = _Evaluator(params, model, throughput_params=nominal)
    n_max = params.max_samples
    notes = []

    if model is ChannelModel.PATH_LOSS:
        n_c = _smallest_feasible(ev, 3, n_max, lambda n: ev.pc(n) >= pc_bar)
        if n_c is None:
            return TradeoffSolution(feasible=False, pc_bar=pc_bar,
                                    delta_sigma_db=params.delta_sigma_db,
                                    notes=("pc stays below pc_bar for every admissible tau",))
        n_star = _maximize_from(ev, n_c, n_max)
        if n_star != n_c:
            notes.append("constraint slack: throughput peaks above the smallest feasible tau")
        return _finish(params, ev, n_star, pc_bar, notes)

    sat, boundary = fading_diagnostics(params, model, ev)
    diag = dict(pc_saturation=sat, regime_boundary_tau=boundary)
    grid = _log_grid(n_max)
    feasible = [n for n in grid if ev.pc(n) >= pc_bar]
    if not feasible:
        return TradeoffSolution(feasible=False, pc_bar=pc_bar,
                                delta_sigma_db=params.delta_sigma_db,
                                notes=("pc saturates below pc_bar",), **diag)
    best = max(feasible, key=ev.e_rs)
    # refine between the grid neighbours of the best feasible point
    i = grid.index(best)
    lo = grid[i - 1] if i > 0 else best
    hi = grid[i + 1] if i + 1 < len(grid) else best
    if lo < best and ev.pc(lo) < pc_bar:
        lo = _smallest_feasible(ev, lo, best, lambda n: ev.pc(n) >= pc_bar)
    if hi > best and ev.pc(hi) < pc_bar:
        hi = best
    n_star = _golden_max(ev.e_rs, lo, hi) if hi - lo > 1 else best
    if ev.pc(n_star) < pc_bar:
        n_star = best
    return _finish(params, ev, n_star, pc_bar, notes, **diag)


def bounds(params: SystemParams, model=None, rho_db=DEFAULT_RHO_DB, pc_bar=None):
    """Solutions at noise offsets ``-rho``, ``0`` and ``+rho`` dB.

    The offset shifts the noise seen by the estimator; each branch's
    throughput is evaluated at its own optimal estimation time.
    """
    return tuple(solve(params.with_(delta_sigma_db=d), model, pc_bar=pc_bar)
                 for d in (-rho_db, 0.0, rho_db))


SENSITIVITY_AXES = ("snr", "accuracy")


def apply_axis(params: SystemParams, axis: str, value: float) -> SystemParams:
    """Scenario with one sensitivity axis set.

    ``snr``: received SNR ``gamma`` in dB, realized through ``alpha_p`` with
    the transmit power and noise held fixed.  ``accuracy``: the relative
    half-width ``mu``.
    """
    if axis == "snr":
        return params.with_(alpha_p=10.0 ** (value / 10.0) * params.sigma2_s / params.p_tran)
    if axis == "accuracy":
        return params.with_(mu=float(value))
    raise ValueError(f"unknown sensitivity axis {axis!r}; expected one of {SENSITIVITY_AXES}")


def sensitivity(params: SystemParams, model=None, axis="snr", values=(), pc_bar=None):
    """Solve the tradeoff for every value along one axis."""
    if axis not in SENSITIVITY_AXES:
        raise ValueError(f"unknown sensitivity axis {axis!r}; expected one of {SENSITIVITY_AXES}")
    out = []
    for v in values:
        p = validate(apply_axis(params, axis, v))
        out.append((float(v), solve(p, model, pc_bar=pc_bar)))
    return out
