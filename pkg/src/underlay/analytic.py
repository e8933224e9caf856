"""Closed-form and semi-analytic laws of the power-controlled underlay link.

The secondary transmitter estimates the received beacon power from ``N``
samples, ``P_rcvd = (sigma^2 / N) * X`` with ``X`` noncentral chi-squared
(``N`` degrees of freedom, noncentrality ``N * g_p * gamma``), and sets its
transmit power to ``P_cont = theta_I * K / P_rcvd``.  The scaling factor
``K`` pins the mean interference at the primary receiver to ``theta_I``.

Everything here is a pure function of ``(params, est, K, model)``.  The
estimation noise is the noise-uncertainty shifted ``sigma2_s`` (see
:func:`underlay.params.effective_noise`); the secondary receiver always sees
the nominal ``sigma2_s``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from . import specfun
from ._quadrature import (QuadratureError, log_expect, panel_quad, panel_quad_vec,
                          support_window)
from .params import ChannelModel, EstimationConfig, SystemParams, effective_noise

LN2 = math.log(2.0)
# Exp(1) mass above this is below 1e-21; used as the upper end of g integrals
_G_MAX = 50.0


class EstimationError(ValueError):
    """Path-loss estimate requested from a mean at or below the noise floor."""


def _model(params, model):
    return params.channel if model is None else model


def _check_n(est):
    if est.n < 3:
        raise ValueError("mean of 1/P_rcvd diverges for n <= 2; need n >= 3")


def _gamma_est(params):
    return params.alpha_p * params.p_tran / effective_noise(params)


# -- the estimate's law -------------------------------------------------------------

def ncx2_logpdf(y, k, lam):
    """Log density of the noncentral chi-squared law (k dof, noncentrality lam)."""
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        logy = np.log(y)
        if lam == 0.0:
            return (0.5 * k - 1.0) * logy - 0.5 * y - 0.5 * k * LN2 - special.gammaln(0.5 * k)
        nu = 0.5 * k - 1.0
        # -(y + lam)/2 + sqrt(lam y) folded into one square, no cancellation
        root = np.sqrt(y)
        return (-LN2 - 0.5 * (root - math.sqrt(lam)) ** 2 + 0.5 * nu * (logy - math.log(lam))
                + specfun.log_bessel_ie(nu, np.sqrt(lam * y)))


def _ncx2_log_range(k, lam):
    """Generous [lo, hi] in log(y) covering the numerical support."""
    m = k + lam
    sd = math.sqrt(2.0 * (k + 2.0 * lam))
    lo_lin = m - 40.0 * sd
    lo = math.log(lo_lin) if lo_lin > 0 else math.log(m) - (60.0 + 240.0 / k)
    hi = math.log(m + 40.0 * sd + 100.0)
    return lo, hi


def ncx2_expect(phi, k, lam, rtol=1e-10):
    """E[phi(X)] for X ~ noncentral chi-squared(k, lam) by quadrature."""
    lo, hi = _ncx2_log_range(k, lam)
    value, _ = log_expect(phi, lambda y: ncx2_logpdf(y, k, lam), lo, hi, rtol=rtol)
    return value


def _fading_x_log_range(k, lam0):
    lo, _ = _ncx2_log_range(k, 0.0)
    _, hi = _ncx2_log_range(k, lam0 * _G_MAX)
    return lo, hi


def _log_gammainc_lower(s, x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.log(special.gammainc(s, x))
    bad = ~(out > -690.0) & (x > 0)
    if np.any(bad):
        xb = x[bad]
        k = np.arange(0, 80, dtype=float)[:, None]
        # P(s, x) = x^s e^-x / Gamma(s+1) * sum_k x^k / ((s+1)...(s+k))
        log_terms = k * np.log(xb)[None, :] - (special.gammaln(s + 1.0 + k)
                                              - special.gammaln(s + 1.0))
        out[bad] = (s * np.log(xb) - xb - special.gammaln(s + 1.0)
                    + special.logsumexp(log_terms, axis=0))
    return out


def fading_x_logpdf(y, k, lam0):
    """Log density of X when the noncentrality is lam0 * g with g ~ Exp(1).

    Mixing the Poisson index of the noncentral law over an exponential gives a
    geometric mixture of central chi-squared laws, which sums to
    ``r^(1-k/2) / (2(1+c)) * exp(-y / (2(1+c))) * P(k/2 - 1, r y / 2)``
    with ``c = lam0 / 2`` and ``r = c / (1 + c)``.
    """
    y = np.asarray(y, dtype=float)
    c = 0.5 * lam0
    r = c / (1.0 + c)
    s = 0.5 * k - 1.0
    return ((1.0 - 0.5 * k) * math.log(r) - math.log(2.0 * (1.0 + c))
            - y / (2.0 * (1.0 + c)) + _log_gammainc_lower(s, r * y / 2.0))


# -- conventional model ----------------------------------------------------------------

@functools.lru_cache(maxsize=256)
def _conventional_fading(rho):
    # inner average over g_s in closed form, outer over g_p by quadrature
    def outer(g_p):
        if g_p == 0.0:
            return 0.0
        return float(rayleigh_log2_mean(np.array([rho / g_p]))[0]) * math.exp(-g_p)

    total = 0.0
    edges = [0.0, 1e-6, 1e-3, 0.1, 1.0, 5.0, 20.0, 60.0]
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(outer, a, b, epsabs=0.0, epsrel=1e-11, limit=200)
        total += val
    return total


def conventional_rate(params: SystemParams, model=None) -> float:
    """Expected SR rate (bits/s/Hz) with perfect channel knowledge.

    The transmitter meets the interference threshold with equality,
    ``P_cont = theta_I / (g_p alpha_p)``.  Under fading the expectation over
    ``g_p, g_s ~ Exp(1)`` uses the closed-form ``g_s`` average and a
    quadrature over ``g_p``.
    """
    rho = params.alpha_s * params.theta_i / (params.alpha_p * params.sigma2_s)
    if _model(params, model) is ChannelModel.PATH_LOSS:
        return math.log2(1.0 + rho)
    return _conventional_fading(rho)


# -- scaling factor -------------------------------------------------------------------------

@functools.lru_cache(maxsize=4096)
def _scaling_k(params, model, n):
    noise = effective_noise(params)
    lam0 = n * _gamma_est(params)
    inv = lambda y: 1.0 / y  # noqa: E731
    if model is ChannelModel.PATH_LOSS:
        mean_inv_x = ncx2_expect(inv, n, lam0, rtol=1e-10)
    else:
        def outer(g):
            if g == 0.0:
                return 0.0
            return g * math.exp(-g) * ncx2_expect(inv, n, lam0 * g, rtol=1e-9)

        mean_inv_x = 0.0
        for a, b in zip([0.0, 0.5, 2.0, 8.0], [0.5, 2.0, 8.0, _G_MAX]):
            val, _ = integrate.quad(outer, a, b, epsabs=0.0, epsrel=1e-9, limit=200)
            mean_inv_x += val
    # E[g alpha_p / P_rcvd] = alpha_p * N / sigma^2 * E[g / X].  The tolerances
    # sit above the roundoff of the log-density, which cancels terms of size
    # lam at large noncentrality.
    return noise / (params.alpha_p * n * mean_inv_x)


def scaling_k(params: SystemParams, est: EstimationConfig, model=None) -> float:
    """Scaling factor ``K = 1 / E[g_p alpha_p / P_rcvd]`` (mW).

    Cached per ``(params, model, n)``; the cache is an ``lru_cache`` and thus
    safe for concurrent readers.
    """
    _check_n(est)
    return _scaling_k(params, _model(params, model), int(est.n))


# -- controlled power P_cont ---------------------------------------------------------------------

def pcont_logpdf(x, params, est, k_factor, model=None):
    x = np.asarray(x, dtype=float)
    n = est.n
    noise = effective_noise(params)
    kt = k_factor * params.theta_i
    if _model(params, model) is ChannelModel.PATH_LOSS:
        ap = params.alpha_p * params.p_tran
        with np.errstate(divide="ignore"):
            return (math.log(n * kt / (2.0 * noise)) - 2.0 * np.log(x)
                    - n / (2.0 * noise) * (kt / x + ap)
                    + (n / 4.0 - 0.5) * np.log(kt / (x * ap))
                    + specfun.log_bessel_i(n / 2.0 - 1.0, n / noise * np.sqrt(kt * ap / x)))
    # P_cont = theta K N / (sigma^2 X): change of variables from the X law
    y = n * kt / (noise * x)
    with np.errstate(divide="ignore"):
        return fading_x_logpdf(y, n, n * _gamma_est(params)) + np.log(y) - np.log(x)


def pcont_pdf(x, params, est, k_factor, model=None):
    """Density of the controlled transmit power (mW^-1)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(pcont_logpdf(x[pos], params, est, k_factor, model))
    return out if out.ndim else float(out)


def _pcont_log_range(params, est, k_factor, model):
    n = est.n
    lam0 = n * _gamma_est(params)
    if model is ChannelModel.PATH_LOSS:
        lo, hi = _ncx2_log_range(n, lam0)
    else:
        lo, hi = _fading_x_log_range(n, lam0)
    shift = math.log(n * k_factor * params.theta_i / effective_noise(params))
    return shift - hi, shift - lo


def pcont_expect(phi, params, est, k_factor, model=None, rtol=1e-10):
    model = _model(params, model)
    lo, hi = _pcont_log_range(params, est, k_factor, model)
    value, _ = log_expect(phi, lambda x: pcont_logpdf(x, params, est, k_factor, model),
                          lo, hi, rtol=rtol)
    return value


# -- interference power P_p ---------------------------------------------------------------------------

def pp_logpdf(x, params, est, k_factor, model=None):
    """Log density of the interference power at the primary receiver.

    The fading case uses the closed form with the Gauss hypergeometric
    function; it serves as a cross-check of the mixture route used for the
    distribution function.
    """
    x = np.asarray(x, dtype=float)
    n = est.n
    noise = effective_noise(params)
    kt = k_factor * params.theta_i
    ap, pt = params.alpha_p, params.p_tran
    if _model(params, model) is ChannelModel.PATH_LOSS:
        with np.errstate(divide="ignore"):
            return (math.log(ap * n * kt / (2.0 * noise)) - 2.0 * np.log(x)
                    - n * ap / (2.0 * noise) * (kt / x + pt)
                    + (n / 4.0 - 0.5) * np.log(kt / (x * pt))
                    + specfun.log_bessel_i(n / 2.0 - 1.0, n * ap / noise * np.sqrt(kt * pt / x)))
    flat = np.atleast_1d(x).ravel()
    out = np.empty_like(flat)
    a1, a2, c = (2.0 + n) / 4.0, (4.0 + n) / 4.0, n / 2.0
    for i, xi in enumerate(flat):
        denom = kt * n * ap + 2.0 * noise * xi + n * ap * pt * xi
        h = kt * n * n * ap * ap * pt * xi / denom**2
        a_half = n * ap * kt / (2.0 * noise * xi)
        beta = denom / (2.0 * noise * xi)
        out[i] = (math.log(n / 2.0) + (n / 2.0) * math.log(a_half) - math.log(xi)
                  - (n / 2.0 + 1.0) * math.log(beta)
                  + specfun.log_hyp2f1(a1, a2, c, 4.0 * h))
    return out.reshape(np.shape(x))


def pp_pdf(x, params, est, k_factor, model=None):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(pp_logpdf(x[pos], params, est, k_factor, model))
    return out if out.ndim else float(out)


def _marcum_order(n):
    # X has n degrees of freedom, so P(X > t) = Q_{n/2}(sqrt(lam), sqrt(t))
    return n / 2.0


def _g_break(x, params, k_factor):
    """Fading gain at which the large-N interference equals ``x``."""
    noise = effective_noise(params)
    denom = params.theta_i * k_factor * params.alpha_p - x * params.alpha_p * params.p_tran
    if denom <= 0:
        return None
    g = x * noise / denom
    return g if 0.0 < g < _G_MAX else None


def _fading_g_integral(fn, breaks, rtol=1e-10):
    """Integral of ``fn(g) * exp(-g)`` over g in (0, inf)."""
    edges = sorted({0.0, 0.05, 0.5, 2.0, 8.0, _G_MAX, *[b for b in breaks if b]})
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(lambda g: fn(g) * math.exp(-g), a, b,
                                epsabs=1e-14, epsrel=rtol, limit=400)
        total += val
    return total


def pp_cdf(x, params, est, k_factor, model=None):
    """Distribution function of the interference power at the PR.

    Path loss: a single Marcum-Q evaluation.  Fading: the conditional
    Marcum-Q distribution averaged over ``g_p ~ Exp(1)``.  ``x`` may be an
    array.
    """
    x = np.asarray(x, dtype=float)
    n = est.n
    noise = effective_noise(params)
    kt = k_factor * params.theta_i
    order = _marcum_order(n)
    lam0 = n * _gamma_est(params)
    flat = np.atleast_1d(x).ravel()
    out = np.zeros_like(flat)
    pos = flat > 0
    xp = flat[pos]
    if _model(params, model) is ChannelModel.PATH_LOSS:
        t = n * params.alpha_p * kt / (noise * np.where(np.isinf(xp), 1.0, xp))
        t = np.where(np.isinf(xp), 0.0, t)
        out[pos] = specfun.marcum_q(order, math.sqrt(lam0), np.sqrt(t))
    elif xp.size:
        coef = n * params.alpha_p * kt / noise

        def conditional(g):
            if g == 0.0:
                return np.ones_like(xp)
            with np.errstate(divide="ignore"):
                t = np.where(np.isinf(xp), 0.0, coef * g / xp)
            return specfun.marcum_q(order, math.sqrt(lam0 * g), np.sqrt(t)) * math.exp(-g)

        edges = sorted({0.0, 0.05, 0.5, 2.0, 8.0, _G_MAX})
        total = np.zeros_like(xp)
        for a, b in zip(edges[:-1], edges[1:]):
            val, _ = integrate.quad_vec(conditional, a, b, epsabs=1e-10, epsrel=1e-8,
                                          norm="max")
            total += val
        out[pos] = np.clip(total, 0.0, 1.0)
    out = out.reshape(np.shape(x))
    return out if out.ndim else float(out)


# -- probability of confidence --------------------------------------------------------------------

@dataclass(frozen=True)
class ConfidenceResult:
    pc: float
    e_pp: float
    band: tuple


def confidence(params: SystemParams, est: EstimationConfig, k_factor: float,
               model=None) -> ConfidenceResult:
    """Probability that the interference lies within ``(1 +- mu) * theta_I``."""
    model = _model(params, model)
    n = est.n
    e_pp = params.theta_i
    lo_x, hi_x = (1.0 - params.mu) * e_pp, (1.0 + params.mu) * e_pp
    noise = effective_noise(params)
    coef = n * params.alpha_p * k_factor * params.theta_i / noise
    order = _marcum_order(n)
    lam0 = n * _gamma_est(params)
    if model is ChannelModel.PATH_LOSS:
        q = specfun.marcum_q(order, math.sqrt(lam0), np.sqrt([coef / hi_x, coef / lo_x]))
        pc = float(q[0] - q[1])
    else:
        def band_mass(g):
            if g == 0.0:
                return 0.0
            q = specfun.marcum_q(order, math.sqrt(lam0 * g),
                                 np.sqrt([coef * g / hi_x, coef * g / lo_x]))
            return float(q[0] - q[1])

        breaks = [_g_break(lo_x, params, k_factor), _g_break(hi_x, params, k_factor)]
        pc = _fading_g_integral(band_mass, breaks)
    return ConfidenceResult(pc=min(max(pc, 0.0), 1.0), e_pp=e_pp, band=(lo_x, hi_x))


# -- secondary throughput -------------------------------------------------------------------------

def _exp_e1(t):
    """exp(t) * E1(t) for t > 0 without overflow."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    small = t < 50.0
    out[small] = np.exp(t[small]) * special.exp1(t[small])
    tl = t[~small]
    # asymptotic series, truncated well before it diverges for t >= 50
    acc = np.zeros_like(tl)
    term = 1.0 / tl
    for k in range(1, 20):
        acc += term
        term = -term * k / tl
    out[~small] = acc
    return out


def rayleigh_log2_mean(snr):
    """E[log2(1 + g snr)] for g ~ Exp(1): exp(1/snr) E1(1/snr) / ln 2."""
    snr = np.asarray(snr, dtype=float)
    out = np.zeros_like(snr)
    pos = snr > 0
    out[pos] = _exp_e1(1.0 / snr[pos]) / LN2
    return out


def time_fraction(params, est):
    return (params.frame_t - est.tau) / params.frame_t


def expected_throughput(params: SystemParams, est: EstimationConfig, k_factor: float,
                        model=None) -> float:
    """Expected secondary throughput ``E[R_s]`` in bits/s/Hz.

    Path loss integrates ``log2(1 + alpha_s P_cont / sigma_s^2)`` against the
    controlled-power density.  Fading additionally averages over ``g_s``; that
    inner average has the closed form of :func:`rayleigh_log2_mean`.
    """
    model = _model(params, model)
    frac = time_fraction(params, est)
    if frac <= 0.0:
        return 0.0
    gain = params.alpha_s / params.sigma2_s
    if model is ChannelModel.PATH_LOSS:
        phi = lambda x: np.log2(1.0 + gain * x)  # noqa: E731
        rtol = 1e-10
    else:
        phi = lambda x: rayleigh_log2_mean(gain * x)  # noqa: E731
        rtol = 1e-8
    return frac * pcont_expect(phi, params, est, k_factor, model, rtol=rtol)


def rs_log_pdf_pathloss(r, params, est, k_factor):
    """Log density of log2(1 + alpha_s P_cont / sigma_s^2), path loss.

    Written in terms of ``p(r) = 2^r - 1`` as the change of variables of the
    controlled-power density.
    """
    r = np.asarray(r, dtype=float)
    n = est.n
    noise = effective_noise(params)
    s2 = params.sigma2_s
    kt = k_factor * params.theta_i
    ap = params.alpha_p * params.p_tran
    a_s = params.alpha_s
    p = np.expm1(r * LN2)
    with np.errstate(divide="ignore"):
        return (math.log(n * kt * a_s * LN2 / (2.0 * noise * s2)) + np.log((p + 1.0) / p**2)
                - n / (2.0 * noise) * (kt * a_s / (p * s2) + ap)
                + (n / 4.0 - 0.5) * np.log(kt * a_s / (p * ap * s2))
                + specfun.log_bessel_i(n / 2.0 - 1.0, n / noise * np.sqrt(kt * ap * a_s / (p * s2))))


def rs_pdf(r, params, est, k_factor, model=None):
    """Density of the secondary throughput R_s, time fraction included."""
    model = _model(params, model)
    r = np.asarray(r, dtype=float)
    frac = time_fraction(params, est)
    ell = r / frac
    out = np.zeros_like(ell)
    pos = ell > 0
    if model is ChannelModel.PATH_LOSS:
        out[pos] = np.exp(rs_log_pdf_pathloss(ell[pos], params, est, k_factor)) / frac
    else:
        out[pos] = _rs_fading_pcont_average(ell[pos], params, est, k_factor, density=True) / frac
    return out if out.ndim else float(out)


def _rs_fading_pcont_average(ell, params, est, k_factor, density):
    """Fading R_s law averaged over the controlled power.

    Given ``P_cont = x`` and ``g_s ~ Exp(1)``, ``L = log2(1 + g_s a x)`` with
    ``a = alpha_s / sigma_s^2`` has density ``exp(-p/(a x)) 2^l ln2 / (a x)``
    and survival ``exp(-p/(a x))``, where ``p = 2^l - 1``.  Averaging those
    over the controlled-power law equals the g-integral form of the density
    with the order of integration swapped.  All ``ell`` share one grid.
    """
    ell = np.asarray(ell, dtype=float)
    if ell.size == 0:
        return np.zeros(0)
    a = params.alpha_s / params.sigma2_s
    p = np.expm1(ell * LN2)[:, None]
    lo, hi = _pcont_log_range(params, est, k_factor, ChannelModel.FADING)

    def weight(v):
        with np.errstate(under="ignore", over="ignore", divide="ignore"):
            w = np.exp(pcont_logpdf(np.exp(v), params, est, k_factor, ChannelModel.FADING) + v)
        w[~np.isfinite(w)] = 0.0
        return w

    def integrand(v):
        ax = a * np.exp(v)[None, :]
        with np.errstate(under="ignore", over="ignore", invalid="ignore"):
            if density:
                phi = np.exp(-p / ax) * (p + 1.0) * LN2 / ax
            else:
                phi = -np.expm1(-p / ax)
        out = phi * weight(v)[None, :]
        out[~np.isfinite(out)] = 0.0
        return out

    edges = support_window(weight, lo, hi, rel_floor=1e-30)
    value, _ = panel_quad_vec(integrand, edges, rtol=1e-9)
    return value


def rs_cdf(r, params, est, k_factor, model=None):
    """Distribution function of R_s (time fraction included)."""
    model = _model(params, model)
    r = np.asarray(r, dtype=float)
    frac = time_fraction(params, est)
    p = np.expm1(np.maximum(r / frac, 0.0) * LN2)
    s2, a_s = params.sigma2_s, params.alpha_s
    if model is ChannelModel.PATH_LOSS:
        out = pcont_cdf(p * s2 / a_s, params, est, k_factor, model)
    else:
        flat = np.atleast_1d(np.maximum(r / frac, 0.0)).ravel()
        out = np.zeros_like(flat)
        out[flat > 0] = _rs_fading_pcont_average(flat[flat > 0], params, est, k_factor,
                                                 density=False)
        out = out.reshape(np.shape(r))
    return np.where(r <= 0, 0.0, out) if np.ndim(out) else (0.0 if r <= 0 else float(out))


def pcont_cdf(x, params, est, k_factor, model=None):
    """Distribution function of the controlled power."""
    model = _model(params, model)
    x = np.asarray(x, dtype=float)
    n = est.n
    noise = effective_noise(params)
    kt = k_factor * params.theta_i
    order = _marcum_order(n)
    lam0 = n * _gamma_est(params)
    flat = np.atleast_1d(x).ravel()
    out = np.zeros_like(flat)
    pos = flat > 0
    xp = flat[pos]
    with np.errstate(divide="ignore"):
        t = np.where(np.isinf(xp), 0.0, n * kt / (noise * xp))
    if model is ChannelModel.PATH_LOSS:
        out[pos] = specfun.marcum_q(order, math.sqrt(lam0), np.sqrt(t))
    elif xp.size:
        def conditional(g):
            return specfun.marcum_q(order, math.sqrt(lam0 * g), np.sqrt(t)) * math.exp(-g)

        edges = sorted({0.0, 0.05, 0.5, 2.0, 8.0, _G_MAX})
        total = np.zeros_like(xp)
        for a, b in zip(edges[:-1], edges[1:]):
            val, _ = integrate.quad_vec(conditional, a, b, epsabs=1e-10, epsrel=1e-8,
                                          norm="max")
            total += val
        out[pos] = np.clip(total, 0.0, 1.0)
    out = out.reshape(np.shape(x))
    return out if out.ndim else float(out)


# -- distribution handle ------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarDistribution:
    """pdf/cdf handle for one of the link quantities.

    ``kind`` is ``"pcont"``, ``"pp"`` or ``"rs"``.
    """

    kind: str
    model: ChannelModel
    params: SystemParams
    est: EstimationConfig
    k_factor: float

    def __post_init__(self):
        if self.kind not in ("pcont", "pp", "rs"):
            raise ValueError(f"unknown kind {self.kind!r}")

    @classmethod
    def build(cls, kind, params, est, model=None):
        model = _model(params, model)
        return cls(kind, model, params, est, scaling_k(params, est, model))

    def pdf(self, x):
        fn = {"pcont": pcont_pdf, "pp": pp_pdf, "rs": rs_pdf}[self.kind]
        return fn(x, self.params, self.est, self.k_factor, self.model)

    def cdf(self, x):
        fn = {"pcont": pcont_cdf, "pp": pp_cdf, "rs": rs_cdf}[self.kind]
        return fn(x, self.params, self.est, self.k_factor, self.model)

    def log_range(self):
        """Generous support in natural-log units of the variable."""
        lo, hi = _pcont_log_range(self.params, self.est, self.k_factor, self.model)
        if self.kind == "pp":
            # P_p = g alpha_p P_cont; widen for g under fading
            shift = math.log(self.params.alpha_p)
            widen = 0.0 if self.model is ChannelModel.PATH_LOSS else 55.0
            return lo + shift - widen, hi + shift + math.log(_G_MAX)
        if self.kind == "rs":
            gain = self.params.alpha_s / self.params.sigma2_s
            top = math.log(math.log2(1.0 + gain * math.exp(hi) * _G_MAX) + 1.0)
            return -40.0, top
        return lo, hi

    def expect(self, phi, rtol=1e-9):
        lo, hi = self.log_range()
        if self.kind == "pcont" or self.kind == "pp" and self.model is ChannelModel.PATH_LOSS:
            logpdf = lambda x: np.log(np.maximum(self.pdf(x), 1e-300))  # noqa: E731
            if self.kind == "pcont":
                logpdf = lambda x: pcont_logpdf(x, self.params, self.est, self.k_factor, self.model)  # noqa: E731
            else:
                logpdf = lambda x: pp_logpdf(x, self.params, self.est, self.k_factor, self.model)  # noqa: E731
            value, _ = log_expect(phi, logpdf, lo, hi, rtol=rtol)
            return value

        def integrand(v):
            x = np.exp(v)
            return phi(x) * self.pdf(x) * x

        edges = support_window(integrand, lo, hi, points=801)
        value, _ = panel_quad(integrand, edges, rtol=rtol, max_levels=6)
        return value

    def total_mass(self, rtol=1e-9):
        return self.expect(lambda x: np.ones_like(x), rtol=rtol)

    def mean(self, rtol=1e-9):
        return self.expect(lambda x: x, rtol=rtol)


# -- path-loss estimator ---------------------------------------------------------------------------

def estimate_alpha_p(mean_prcvd: float, params: SystemParams) -> float:
    """Path-loss gain recovered from the mean received beacon power."""
    noise = effective_noise(params)
    if not mean_prcvd > noise:
        raise EstimationError(
            f"mean received power {mean_prcvd!r} mW is not above the noise floor {noise!r} mW")
    return (mean_prcvd - noise) / params.p_tran


__all__ = [
    "ConfidenceResult", "EstimationError", "QuadratureError", "ScalarDistribution",
    "confidence", "conventional_rate", "estimate_alpha_p", "expected_throughput",
    "ncx2_expect", "ncx2_logpdf", "pcont_cdf", "pcont_pdf", "pp_cdf", "pp_pdf",
    "rayleigh_log2_mean", "rs_cdf", "rs_pdf", "scaling_k", "time_fraction",
]
