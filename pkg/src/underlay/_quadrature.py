"""Vectorized composite Gauss-Legendre quadrature with panel refinement.

The analytic expectations integrate smooth densities whose mass sits in a
window that is narrow relative to its location (large sample counts) or very
wide in log scale (small sample counts).  Both cases are handled by scanning
the integrand on a coarse log grid to find its support and then refining
uniform panels over that support until two successive levels agree.
"""

from __future__ import annotations

import numpy as np

_NODES = {}


class QuadratureError(ArithmeticError):
    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved relative error {achieved:.3g})")
        self.achieved = achieved


class VanishingIntegrand(QuadratureError):
    """The integrand underflowed to zero on the whole scan grid."""

    def __init__(self):
        super().__init__("integrand vanishes on the scan grid", float("inf"))


def _gauss(order):
    if order not in _NODES:
        _NODES[order] = np.polynomial.legendre.leggauss(order)
    return _NODES[order]


def _composite(f, edges, order):
    x, w = _gauss(order)
    lo = edges[:-1, None]
    half = 0.5 * np.diff(edges)[:, None]
    pts = lo + half * (x[None, :] + 1.0)
    vals = f(pts.ravel()).reshape(pts.shape)
    return float(np.sum(vals * w[None, :] * half))


def panel_quad(f, edges, rtol=1e-10, atol=0.0, order=20, max_levels=10):
    """Integrate vectorized ``f`` over ``[edges[0], edges[-1]]``.

    Every panel is bisected per level until successive estimates agree to
    ``max(rtol * |I|, atol)``.  Returns ``(value, abs_error_estimate)``.
    """
    edges = np.asarray(edges, dtype=float)
    prev = _composite(f, edges, order)
    for _ in range(max_levels):
        mids = 0.5 * (edges[:-1] + edges[1:])
        edges = np.sort(np.concatenate([edges, mids]))
        cur = _composite(f, edges, order)
        err = abs(cur - prev)
        if err <= max(rtol * abs(cur), atol):
            return cur, err
        prev = cur
    scale = abs(cur) if cur != 0 else 1.0
    raise QuadratureError("panel quadrature did not converge", err / scale)


def _composite_vec(f, edges, order):
    x, w = _gauss(order)
    lo = edges[:-1, None]
    half = 0.5 * np.diff(edges)[:, None]
    pts = lo + half * (x[None, :] + 1.0)
    vals = f(pts.ravel())
    vals = vals.reshape(vals.shape[:-1] + pts.shape)
    return np.sum(vals * (w[None, :] * half), axis=(-2, -1))


def panel_quad_vec(f, edges, rtol=1e-10, atol=0.0, order=20, max_levels=10,
                   peak_floor=1e-14):
    """Vector-valued :func:`panel_quad`; ``f(x)`` returns shape ``(m, len(x))``.

    Convergence is judged per component against
    ``max(rtol * |I_i|, atol, peak_floor * max_j |I_j|)`` so that components
    deep in a tail do not stall the refinement.
    """
    edges = np.asarray(edges, dtype=float)
    prev = _composite_vec(f, edges, order)
    for _ in range(max_levels):
        mids = 0.5 * (edges[:-1] + edges[1:])
        edges = np.sort(np.concatenate([edges, mids]))
        cur = _composite_vec(f, edges, order)
        err = np.abs(cur - prev)
        tol = np.maximum(rtol * np.abs(cur), max(atol, peak_floor * np.max(np.abs(cur))))
        if np.all(err <= tol):
            return cur, err
        prev = cur
    scale = np.where(cur != 0, np.abs(cur), 1.0)
    raise QuadratureError("panel quadrature did not converge", float(np.max(err / scale)))


def support_window(g, lo, hi, points=4001, rel_floor=1e-22):
    """Sub-interval of [lo, hi] outside which ``|g|`` is negligible.

    ``g`` is evaluated on a uniform grid; the window is widened by one grid
    step on each side.  Returns the grid points inside the window, which
    serve as initial panel edges.
    """
    grid = np.linspace(lo, hi, points)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        vals = np.abs(g(grid))
    vals[~np.isfinite(vals)] = 0.0
    peak = vals.max()
    if peak == 0.0:
        raise VanishingIntegrand()
    keep = np.nonzero(vals > peak * rel_floor)[0]
    i0 = max(keep[0] - 1, 0)
    i1 = min(keep[-1] + 1, points - 1)
    inner = grid[i0:i1 + 1]
    # about 48 starting panels regardless of how many grid points survived
    step = max(1, (inner.size - 1) // 48)
    edges = inner[::step]
    if edges[-1] != inner[-1]:
        edges = np.append(edges, inner[-1])
    return edges


def log_expect(phi, logpdf, lo, hi, rtol=1e-10, atol=0.0):
    """E[phi(X)] for a positive variable with log-density ``logpdf``.

    Integrates over ``v = log x`` on the generous range ``[lo, hi]`` (in
    log units), which is trimmed to the numerical support first.
    """
    def integrand(v):
        x = np.exp(v)
        with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
            out = phi(x) * np.exp(logpdf(x) + v)
        out[~np.isfinite(out)] = 0.0
        return out

    edges = support_window(integrand, lo, hi)
    return panel_quad(integrand, edges, rtol=rtol, atol=atol)
