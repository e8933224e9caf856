"""Special functions behind the closed-form distributions.

Modified Bessel I of real order (with a log-domain path for large orders),
regularized incomplete Gamma, the generalized Marcum-Q function of real order
and the Gauss hypergeometric function 2F1 for real arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

MARCUM_TERM_CAP = 10**6
MARCUM_TOL = 1e-12
HYP2F1_TERM_CAP = 10**7

_LOG_TINY = math.log(1e-280)
_DEBYE_MIN_ORDER = 50.0


class ConvergenceError(ArithmeticError):
    """A series did not reach its tolerance within the term cap."""

    def __init__(self, message, terms_used):
        super().__init__(f"{message} (terms used: {terms_used})")
        self.terms_used = terms_used


class ScaledResultRequired(OverflowError):
    """The unscaled value is not representable; use the log/scaled variant."""


@dataclass(frozen=True)
class SpecFunResult:
    value: float
    converged: bool
    terms_used: int
    est_abs_error: float


# -- Bessel I ----------------------------------------------------------------

def _debye_log_ive(nu, x):
    # uniform asymptotic expansion in 1/nu, four correction terms, for
    # log(I_nu(x) e^-x); nu*sqrt(1+z^2) - x is written as nu / (sqrt(1+z^2) + z)
    z = x / nu
    sq = np.sqrt(1.0 + z * z)
    t = 1.0 / sq
    t2 = t * t
    u1 = t * (3.0 - 5.0 * t2) / 24.0
    u2 = t2 * (81.0 - 462.0 * t2 + 385.0 * t2 * t2) / 1152.0
    u3 = t * t2 * (30375.0 - 369603.0 * t2 + 765765.0 * t2**2 - 425425.0 * t2**3) / 414720.0
    u4 = t2 * t2 * (4465125.0 - 94121676.0 * t2 + 349922430.0 * t2**2
                    - 446185740.0 * t2**3 + 185910725.0 * t2**4) / 39813120.0
    corr = 1.0 + u1 / nu + u2 / nu**2 + u3 / nu**3 + u4 / nu**4
    scaled_eta = 1.0 / (sq + z) + np.log(z / (1.0 + sq))
    return nu * scaled_eta - 0.5 * np.log(2.0 * np.pi * nu) + 0.5 * np.log(t) + np.log(corr)


def _hankel_log_ive(nu, x, terms=6):
    # large-argument expansion of log(I_nu(x) e^-x), for x far beyond nu^2
    mu = 4.0 * nu * nu
    acc = np.ones_like(x)
    term = np.ones_like(x)
    for k in range(1, terms):
        term = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        acc = acc + term
    return -0.5 * np.log(2.0 * np.pi * x) + np.log(acc)


def _series_log_iv(nu, x, terms=60):
    # ascending series, only used where x is tiny relative to the order
    half = 0.5 * x
    k = np.arange(terms)[:, None]
    log_terms = (2.0 * k * np.log(half)[None, :] - special.gammaln(k + 1.0)
                 - special.gammaln(k + nu + 1.0))
    return nu * np.log(half) + special.logsumexp(log_terms, axis=0)


def log_bessel_ie(nu, x):
    """Natural log of the scaled function I_nu(x) e^-x (array friendly).

    Free of the cancellation that ``log_bessel_i(nu, x) - x`` suffers for
    large ``x``.
    """
    nu = float(nu)
    if nu < 0:
        raise ValueError("order must be >= 0")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("argument must be >= 0")
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    zero = x == 0.0
    out[zero] = 0.0 if nu == 0.0 else -np.inf
    pos = ~zero
    xp = x[pos]
    with np.errstate(divide="ignore", invalid="ignore"):
        logv = np.log(special.ive(nu, xp))
    bad = ~(logv > _LOG_TINY)
    if np.any(bad):
        # scipy gives up: huge arguments take the large-argument expansion;
        # an underflowing scaled value takes the asymptotic form for large
        # orders and the ascending series otherwise
        xb = xp[bad]
        large = xb > max(1e6, nu * nu)
        fix = np.empty_like(xb)
        fix[large] = _hankel_log_ive(nu, xb[large])
        rest = xb[~large]
        fix[~large] = (_debye_log_ive(nu, rest) if nu >= _DEBYE_MIN_ORDER
                       else _series_log_iv(nu, rest) - rest)
        logv[bad] = fix
    out[pos] = logv
    return out[0] if scalar else out


def log_bessel_i(nu, x):
    """Natural log of I_nu(x) for nu >= 0, x >= 0 (array friendly)."""
    x = np.asarray(x, dtype=float)
    return log_bessel_ie(nu, x) + x


def bessel_ie(nu, x):
    """Exponentially scaled I_nu(x) * exp(-x)."""
    return np.exp(log_bessel_ie(nu, x))


def bessel_i(nu, x):
    """Modified Bessel function of the first kind, I_nu(x).

    Raises ScaledResultRequired when the value overflows a double.
    """
    logv = np.asarray(log_bessel_i(nu, x))
    if np.any(logv > 709.78):
        raise ScaledResultRequired(f"I_{nu}(x) overflows; use log_bessel_i or bessel_ie")
    v = np.exp(logv)
    return float(v) if v.ndim == 0 else v


# -- incomplete Gamma ----------------------------------------------------------

def gamma_inc_reg(s, x, tail="lower"):
    """Regularized incomplete Gamma P(s, x) (``tail="lower"``) or Q(s, x)."""
    if np.any(np.asarray(s) <= 0):
        raise ValueError("shape s must be > 0")
    if np.any(np.asarray(x) < 0):
        raise ValueError("x must be >= 0")
    if tail == "lower":
        return special.gammainc(s, x)
    if tail == "upper":
        return special.gammaincc(s, x)
    raise ValueError(f"tail must be 'lower' or 'upper', not {tail!r}")


def log_gamma(s):
    return special.gammaln(s)


# -- Marcum Q ------------------------------------------------------------------

def _stirling_error(j):
    # log(j!) - [(j + 1/2) log j - j + log(2 pi)/2]
    j = np.asarray(j, dtype=float)
    out = np.empty_like(j)
    small = j <= 15
    js = j[small]
    with np.errstate(divide="ignore", invalid="ignore"):
        out[small] = (special.gammaln(js + 1.0) - (js + 0.5) * np.log(js) + js
                      - 0.5 * math.log(2.0 * math.pi))
    jl = j[~small]
    inv = 1.0 / jl
    inv2 = inv * inv
    out[~small] = inv * (1.0 / 12 - inv2 * (1.0 / 360 - inv2 * (1.0 / 1260 - inv2 / 1680)))
    return out


def _log1p_minus(u):
    # (1 + u) log1p(u) - u without cancellation near u = 0
    u = np.asarray(u, dtype=float)
    out = (1.0 + u) * np.log1p(u) - u
    small = np.abs(u) < 0.1
    if np.any(small):
        us = u[small]
        # u^2 * sum_{k>=2} (-u)^(k-2) / (k (k-1)), Horner form
        acc = np.zeros_like(us)
        for k in range(23, 1, -1):
            acc = acc * (-us) + 1.0 / (k * (k - 1.0))
        out[small] = us * us * acc
    return out


def _log_poisson_pmf(j, mean):
    """Accurate log Pois(j; mean) for large j and mean (saddle-point form)."""
    j = np.asarray(j, dtype=float)
    out = np.empty_like(j)
    zero = j == 0
    out[zero] = -mean
    jp = j[~zero]
    deviance = mean * _log1p_minus((jp - mean) / mean)
    out[~zero] = -0.5 * np.log(2.0 * math.pi * jp) - _stirling_error(jp) - deviance
    return out


def _poisson_window(mean, tol):
    """Index range [lo, hi] holding all but ``tol`` of a Poisson(mean) law."""
    if mean == 0.0:
        return 0, 0
    half = tol * 1e-3
    spread = max(10.0, 8.0 * math.sqrt(mean))
    lo = max(0, int(math.floor(mean - spread)))
    # P(J < lo) = Q(lo, mean)  and  P(J > hi) = P(hi + 1, mean)
    while lo > 0 and special.gammaincc(lo, mean) > half:
        lo = max(0, lo - int(spread))
    hi = int(math.ceil(mean + spread))
    while special.gammainc(hi + 1, mean) > half:
        hi += int(spread)
        if hi - lo > MARCUM_TERM_CAP:
            raise ConvergenceError("Poisson window exceeds term cap", hi - lo)
    return lo, hi


def marcum_q_result(m, a, b, tol=MARCUM_TOL):
    """Generalized Marcum Q_m(a, b) with convergence metadata.

    Uses the Poisson mixture of regularized upper incomplete Gammas,
    Q_m(a, b) = sum_j Pois(j; a^2/2) * Q(m + j, b^2/2), summed over the
    window that carries all but ``tol`` of the Poisson mass.  ``b`` may be
    an array; the result then carries an array ``value``.
    """
    m = float(m)
    a = float(a)
    if m < 0.5 or a < 0:
        raise ValueError("need m >= 0.5 and a >= 0")
    b = np.asarray(b, dtype=float)
    if np.any(b < 0):
        raise ValueError("b must be >= 0")
    mean = 0.5 * a * a
    x = 0.5 * b * b
    lo, hi = _poisson_window(mean, tol)
    terms = hi - lo + 1
    j = np.arange(lo, hi + 1, dtype=float)
    if mean > 0:
        logw = _log_poisson_pmf(j, mean)
    else:
        logw = np.zeros(1)
    w = np.exp(logw)

    flat = np.atleast_1d(x).ravel()
    values = np.empty_like(flat)
    # forward recurrence Q(s+1, x) = Q(s, x) + exp(s log x - x - lgamma(s+1));
    # every increment is positive so the recurrence is stable.  Summing the
    # weighted recurrence by parts, sum_j w_j Q(m+lo+j, x) equals
    # W Q(m+lo, x) + sum_i inc_i(x) * (w_{i+1} + ... + w_last).
    tail_w = np.cumsum(w[::-1])[::-1][1:]
    total_w = math.fsum(w)
    chunk = max(1, 2_000_000 // max(terms, 1))
    for start in range(0, flat.size, chunk):
        xs = flat[start:start + chunk]
        acc = total_w * special.gammaincc(m + lo, xs)
        if terms > 1:
            s = m + j[:-1]
            with np.errstate(divide="ignore"):
                logx = np.log(xs)
            inc = np.exp(s[:, None] * logx[None, :] - xs[None, :]
                         - special.gammaln(s + 1.0)[:, None])
            inc[:, xs == 0.0] = 0.0
            acc = acc + tail_w @ inc
        values[start:start + chunk] = np.minimum(acc, 1.0)
    values = np.clip(values, 0.0, 1.0)
    # Poisson mass outside the window on both sides, plus summation roundoff
    err = 2e-3 * tol + 2.2e-16 * math.sqrt(terms)
    value = values.reshape(np.shape(x))
    return SpecFunResult(value=float(value) if value.ndim == 0 else value,
                         converged=err <= tol, terms_used=terms, est_abs_error=err)


def marcum_q(m, a, b, tol=MARCUM_TOL):
    """Generalized Marcum Q function Q_m(a, b) for real order m >= 0.5."""
    return marcum_q_result(m, a, b, tol).value


# -- Gauss hypergeometric --------------------------------------------------------

def _nonpositive_int(v):
    return v <= 0 and float(v).is_integer()


def _log_series(a, b, c, z, tol, cap=HYP2F1_TERM_CAP, chunk=20000):
    """Sign, log|sum| and diagnostics of the ascending 2F1 series."""
    if z == 0.0:
        return 1.0, 0.0, 1, 0.0
    log_acc = -np.inf       # log of running positive part
    log_neg = -np.inf       # log of running negative part
    log_t = 0.0             # log|t_n| for the first index of the chunk
    sign_t = 1.0
    n0 = 0
    log_absz = math.log(abs(z))
    sign_z = 1.0 if z > 0 else -1.0
    log_max = 0.0
    while True:
        n = np.arange(n0, n0 + chunk, dtype=float)
        num_a = a + n
        num_b = b + n
        den = (c + n) * (n + 1.0)
        ratio = num_a * num_b / den
        if np.any(ratio == 0.0):
            # polynomial case: the series terminates
            stop = int(np.argmax(ratio == 0.0))
            n = n[:stop + 1]
            ratio = ratio[:stop + 1]
        with np.errstate(divide="ignore"):
            step = np.log(np.abs(ratio)) + log_absz
        step_sign = np.sign(ratio) * sign_z
        log_terms = log_t + np.concatenate(([0.0], np.cumsum(step[:-1])))
        signs = sign_t * np.concatenate(([1.0], np.cumprod(step_sign[:-1])))
        log_max = max(log_max, float(np.max(log_terms)))
        pos = log_terms[signs > 0]
        neg = log_terms[signs < 0]
        if pos.size:
            log_acc = np.logaddexp(log_acc, special.logsumexp(pos))
        if neg.size:
            log_neg = np.logaddexp(log_neg, special.logsumexp(neg))
        terms_used = n0 + n.size
        if n.size < chunk:
            break  # terminated polynomial
        log_t = log_terms[-1] + step[-1]
        sign_t = signs[-1] * step_sign[-1]
        # tail bound once the term ratio is below one and shrinking
        last_ratio = max(math.exp(step[-1]), abs(z))
        log_total = max(log_acc, log_neg)
        if last_ratio < 1.0:
            log_tail = log_t - math.log1p(-last_ratio)
            if log_tail < math.log(tol) + log_total:
                break
        if terms_used >= cap:
            raise ConvergenceError("2F1 series did not converge", terms_used)
        n0 += chunk
    if log_neg == -np.inf:
        sign, log_abs = 1.0, float(log_acc)
    elif log_acc >= log_neg:
        sign, log_abs = 1.0, float(log_acc + np.log1p(-np.exp(log_neg - log_acc)))
    else:
        sign, log_abs = -1.0, float(log_neg + np.log1p(-np.exp(log_acc - log_neg)))
    # report the terms that matter, not the padded chunk length
    above = np.nonzero(log_terms >= max(log_acc, log_neg) + math.log(tol))[0]
    terms_used = n0 + (int(above[-1]) + 1 if above.size else 1)
    # rounding error scales with the largest term
    err_log = log_max + math.log(2.2e-16 * math.sqrt(terms_used) + tol)
    return sign, log_abs, terms_used, err_log


def _log_hyp2f1(a, b, c, z, tol):
    """Return (sign, log|value|, terms_used, log_abs_error)."""
    if _nonpositive_int(c):
        raise ValueError("c must not be a non-positive integer")
    if not z < 1.0:
        raise ValueError("2F1 is only evaluated for z < 1")
    if z < -0.5:
        # Pfaff: 2F1(a,b;c;z) = (1-z)^(-a) 2F1(a, c-b; c; z/(z-1)) with z/(z-1) in (1/3, 1)
        w = z / (z - 1.0)
        sign, log_abs, terms, err = _log_hyp2f1(a, c - b, c, w, tol)
        shift = -a * math.log1p(-z)
        return sign, log_abs + shift, terms, err + shift
    if z <= 0.5:
        return _log_series(a, b, c, z, tol)
    # 0.5 < z < 1: the direct series converges (geometrically, ratio -> z) and
    # has no cancellation when every term is positive; otherwise fall back to
    # the 1 - z connection formula when c - a - b is not an integer.
    all_positive = a > 0 and b > 0 and c > 0
    gap = c - a - b
    if all_positive or float(gap).is_integer() or 1.0 - z > 0.2:
        return _log_series(a, b, c, z, tol)
    return _log_connection(a, b, c, z, tol)


def _log_connection(a, b, c, z, tol):
    gap = c - a - b
    one_z = 1.0 - z
    parts = []
    terms = 0
    errs = []
    for coef_args, series_args, power in (
        ((c, gap, c - a, c - b), (a, b, 1.0 - gap), 0.0),
        ((c, -gap, a, b), (c - a, c - b, 1.0 + gap), gap),
    ):
        g_c, g_num, g_d1, g_d2 = coef_args
        if any(_nonpositive_int(v) for v in (g_d1, g_d2)):
            continue  # 1/Gamma vanishes
        log_coef = (special.gammaln(g_c) + special.gammaln(g_num)
                    - special.gammaln(g_d1) - special.gammaln(g_d2))
        sign_coef = (special.gammasgn(g_c) * special.gammasgn(g_num)
                     * special.gammasgn(g_d1) * special.gammasgn(g_d2))
        s, la, t, e = _log_series(*series_args, one_z, tol)
        lp = power * math.log(one_z)
        parts.append((s * sign_coef, la + log_coef + lp))
        errs.append(e + log_coef + lp)
        terms += t
    pos = [la for s, la in parts if s > 0]
    neg = [la for s, la in parts if s < 0]
    lp = special.logsumexp(pos) if pos else -np.inf
    ln = special.logsumexp(neg) if neg else -np.inf
    if lp >= ln:
        sign, log_abs = 1.0, lp + (np.log1p(-np.exp(ln - lp)) if ln > -np.inf else 0.0)
    else:
        sign, log_abs = -1.0, ln + np.log1p(-np.exp(lp - ln))
    return sign, float(log_abs), terms, float(special.logsumexp(errs))


def hyp2f1_result(a, b, c, z, tol=1e-14):
    """2F1 with metadata; ``tol`` is relative to ``max(1, |value|)``."""
    sign, log_abs, terms, err_log = _log_hyp2f1(float(a), float(b), float(c), float(z), tol)
    value = sign * math.exp(log_abs) if log_abs < 709.78 else sign * math.inf
    err = math.exp(min(err_log, 709.0))
    # roundoff of a positive-term sum grows like sqrt(terms) ulps
    allowed = max(tol, 2.2e-16 * math.sqrt(terms)) * max(1.0, abs(value))
    return SpecFunResult(value=value, converged=err <= 4.0 * allowed, terms_used=terms,
                         est_abs_error=err)


def hyp2f1(a, b, c, z, tol=1e-14):
    """Gauss hypergeometric function 2F1(a, b; c; z) for real z < 1."""
    return hyp2f1_result(a, b, c, z, tol).value


def log_hyp2f1(a, b, c, z, tol=1e-14):
    """log 2F1(a, b; c; z) for arguments where the function is positive.

    Stays finite where the value itself would overflow, which happens for the
    large parameters of the fading interference density.
    """
    sign, log_abs, _, _ = _log_hyp2f1(float(a), float(b), float(c), float(z), tol)
    if sign < 0:
        raise ValueError("2F1 is negative here; log undefined")
    return log_abs
