"""Frame-level Monte Carlo simulator for the power-controlled underlay link.

Each frame draws the channel gains, synthesizes the received-power estimate,
applies ``P_cont = theta_I K / P_rcvd`` and records the resulting
interference and secondary throughput.  It shares no code with the analytic
module beyond the parameter types, so it can serve as an oracle.

Frames are processed in fixed-size blocks.  Block ``b`` draws from
``SeedSequence([seed, b])`` and blocks are merged in index order, so a
report depends only on ``(seed, frames, config)`` and never on the number of
workers.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .params import ChannelModel, EstimationConfig, SystemParams, effective_noise

BLOCK_FRAMES = 65536
DRAW_MODES = ("direct", "per_sample")
HIST_BINS = 50
# memory bound for per-sample synthesis: frames * samples per sub-block
_PER_SAMPLE_BUDGET = 4_000_000


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo run settings.

    ``draw_mode`` is ``"direct"`` (scaled noncentral chi-squared deviate with
    ``N`` degrees of freedom) or ``"per_sample"`` (``N`` complex
    signal-plus-noise samples averaged, which has ``2N`` real degrees of
    freedom).
    """

    frames: int = 100_000
    seed: int = 7
    draw_mode: str = "direct"
    workers: int = 1

    def __post_init__(self):
        if int(self.frames) < 1:
            raise ValueError("frames must be >= 1")
        if self.draw_mode not in DRAW_MODES:
            raise ValueError(f"draw_mode must be one of {DRAW_MODES} (got {self.draw_mode!r})")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if int(self.workers) < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray


@dataclass
class McReport:
    config: McConfig
    n: int
    k_factor: float
    model: ChannelModel
    mean_pp: float
    se_pp: float
    mean_rs: float
    se_rs: float
    mean_pcont: float
    se_pcont: float
    pc_hat: float
    pp_sorted: np.ndarray = field(repr=False)
    histograms: dict = field(repr=False)

    @property
    def frames(self) -> int:
        return self.config.frames

    def ecdf_pp(self, x):
        """Empirical distribution function of the interference power."""
        return np.searchsorted(self.pp_sorted, np.asarray(x, dtype=float), side="right") / self.frames

    def summary(self) -> dict:
        return {
            "frames": self.frames, "seed": self.config.seed, "draw_mode": self.config.draw_mode,
            "model": self.model.value, "n": self.n, "k": self.k_factor,
            "mean_pp": self.mean_pp, "se_pp": self.se_pp,
            "mean_rs": self.mean_rs, "se_rs": self.se_rs,
            "mean_pcont": self.mean_pcont, "se_pcont": self.se_pcont,
            "pc_hat": self.pc_hat,
        }

    def to_csv(self) -> str:
        """Histogram bins (quantity, bin_lo, bin_hi, count) plus one summary line."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["quantity", "bin_lo", "bin_hi", "count"])
        for name, h in self.histograms.items():
            for lo, hi, c in zip(h.edges[:-1], h.edges[1:], h.counts):
                w.writerow([name, repr(float(lo)), repr(float(hi)), int(c)])
        summary = self.summary()
        buf.write("#summary," + ",".join(f"{k}={_fmt(v)}" for k, v in summary.items()) + "\n")
        return buf.getvalue()


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def _draw_prcvd(rng, params, n, g_p, mode):
    noise = effective_noise(params)
    gamma = params.alpha_p * params.p_tran / noise
    frames = g_p.size
    if mode == "direct":
        # noncentral chi-squared as (Z + sqrt(lam))^2 + chi-squared(N - 1)
        lam = n * gamma * g_p
        x = (rng.standard_normal(frames) + np.sqrt(lam)) ** 2 + rng.chisquare(n - 1, frames)
        return noise / n * x
    # per-sample complex baseband: y = sqrt(g alpha) x + w with unit-power
    # beacon x and circular noise of variance sigma^2
    amp = np.sqrt(g_p * params.alpha_p * params.p_tran)
    out = np.empty(frames)
    step = max(1, _PER_SAMPLE_BUDGET // n)
    scale = math.sqrt(noise / 2.0)
    for s in range(0, frames, step):
        m = min(step, frames - s)
        w = scale * (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n)))
        y = amp[s:s + m, None] + w
        out[s:s + m] = np.mean(y.real**2 + y.imag**2, axis=1)
    return out


def _block(params, est, k, model, mode, seed, index, frames):
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    if model is ChannelModel.FADING:
        g_p = rng.standard_exponential(frames)
        g_s = rng.standard_exponential(frames)
    else:
        g_p = np.ones(frames)
        g_s = np.ones(frames)
    prcvd = _draw_prcvd(rng, params, est.n, g_p, mode)
    pcont = params.theta_i * k / prcvd
    pp = g_p * params.alpha_p * pcont
    frac = (params.frame_t - est.tau) / params.frame_t
    rs = frac * np.log2(1.0 + g_s * params.alpha_s * pcont / params.sigma2_s)
    return g_p, prcvd, pcont, pp, rs


def _run_blocks(params, est, k, model, mc):
    frames = int(mc.frames)
    sizes = [min(BLOCK_FRAMES, frames - s) for s in range(0, frames, BLOCK_FRAMES)]
    job = lambda i: _block(params, est, k, model, mc.draw_mode, int(mc.seed), i, sizes[i])  # noqa: E731
    if mc.workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=mc.workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    else:
        parts = [job(i) for i in range(len(sizes))]
    return [np.concatenate([p[j] for p in parts]) for j in range(5)]


def _mean_se(x):
    # math.fsum keeps the accumulation exact regardless of block layout
    m = math.fsum(x) / x.size
    se = float(np.std(x, ddof=1)) / math.sqrt(x.size) if x.size > 1 else math.nan
    return m, se


def _log_histogram(x, bins=HIST_BINS):
    pos = x[x > 0]
    if pos.size == 0 or pos.min() == pos.max():
        lo = pos.min() if pos.size else 0.0
        edges = np.array([lo, lo * (1 + 1e-12) + 1e-300])
        return Histogram(edges, np.array([x.size]))
    edges = np.geomspace(pos.min(), pos.max(), bins + 1)
    edges[-1] = np.nextafter(edges[-1], np.inf)
    counts, _ = np.histogram(x, bins=edges)
    return Histogram(edges, counts)


def _linear_histogram(x, bins=HIST_BINS):
    lo, hi = float(x.min()), float(x.max())
    if hi <= lo:
        hi = lo + 1e-12
    counts, edges = np.histogram(x, bins=bins, range=(lo, hi))
    return Histogram(edges, counts)


def simulate(params: SystemParams, est: EstimationConfig, k: float, model=None,
             mc: McConfig = McConfig()) -> McReport:
    """Simulate ``mc.frames`` independent frames with scaling factor ``k``."""
    model = params.channel if model is None else model
    if est.n < 3:
        raise ValueError("estimation needs n >= 3 samples")
    _, _, pcont, pp, rs = _run_blocks(params, est, k, model, mc)
    mean_pp, se_pp = _mean_se(pp)
    mean_rs, se_rs = _mean_se(rs)
    mean_pc, se_pc = _mean_se(pcont)
    pc_hat = float(np.count_nonzero(np.abs(pp - params.theta_i) < params.mu * params.theta_i)) / pp.size
    hists = {"pcont": _log_histogram(pcont), "pp": _log_histogram(pp), "rs": _linear_histogram(rs)}
    return McReport(config=mc, n=est.n, k_factor=float(k), model=model,
                    mean_pp=mean_pp, se_pp=se_pp, mean_rs=mean_rs, se_rs=se_rs,
                    mean_pcont=mean_pc, se_pcont=se_pc, pc_hat=pc_hat,
                    pp_sorted=np.sort(pp), histograms=hists)


def self_consistent_k(params: SystemParams, est: EstimationConfig, model=None,
                      mc: McConfig = McConfig(), return_se=False):
    """Empirical ``K = 1 / mean(g_p alpha_p / P_rcvd)``.

    With ``return_se`` the delta-method standard error is returned as well.
    """
    model = params.channel if model is None else model
    g_p, prcvd, _, _, _ = _run_blocks(params, est, 1.0, model, mc)
    ratio = g_p * params.alpha_p / prcvd
    m, se = _mean_se(ratio)
    k = 1.0 / m
    if return_se:
        return k, se / (m * m)
    return k
