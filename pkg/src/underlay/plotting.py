"""Line plots written next to the CSV outputs (``--plot``)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "savefig.dpi": 150,
}


def _save(fig, path):
    fig.tight_layout()
    # no software stamp, so the PNG bytes depend only on the data
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_tradeoff(rows, solution, path, delta_db=3.0):
    """pc and E[R_s] against the estimation time on twin axes."""
    tau = np.array([r["tau_ms"] for r in rows])
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        ax.plot(tau, [r["pc"] for r in rows], "C0-", label="pc")
        ax.plot(tau, [r["pc_minus3db"] for r in rows], "C0--", lw=0.9,
                label=f"pc, noise -{delta_db:g} dB")
        ax.plot(tau, [r["pc_plus3db"] for r in rows], "C0:", lw=0.9,
                label=f"pc, noise +{delta_db:g} dB")
        ax.axhline(solution.pc_bar, color="0.5", ls=":", lw=0.8)
        ax.set_xlabel("estimation time tau [ms]")
        ax.set_ylabel("probability of confidence")
        if tau.min() > 0 and tau.max() / tau.min() > 50:
            ax.set_xscale("log")
        ax2 = ax.twinx()
        ax2.grid(False)
        ax2.plot(tau, [r["e_rs"] for r in rows], "C3-", label="E[R_s]")
        ax2.axhline(rows[0]["conventional_rate"], color="C3", ls="-.", lw=0.9,
                    label="conventional")
        ax2.set_ylabel("expected throughput [bits/s/Hz]")
        if solution.feasible:
            ax2.plot([solution.tau_star * 1e3], [solution.max_e_rs], "ko", mfc="none")
        h1, l1 = ax.get_legend_handles_labels()
        h2, l2 = ax2.get_legend_handles_labels()
        ax.legend(h1 + h2, l1 + l2, loc="center right", fontsize=7)
        return _save(fig, path)


def plot_sensitivity(rows, axis, path):
    """Maximum expected throughput against the swept axis, one line per pc_bar."""
    label = {"snr": "received SNR gamma [dB]", "accuracy": "accuracy mu"}[axis]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        for pcb in sorted({r["pc_bar"] for r in rows}):
            sel = [r for r in rows if r["pc_bar"] == pcb and r["feasible"]]
            ax.plot([r["axis_value"] for r in sel], [r["max_e_rs"] for r in sel],
                    marker=".", label=f"pc_bar = {pcb:g}")
        ax.set_xlabel(label)
        ax.set_ylabel("max E[R_s] [bits/s/Hz]")
        ax.legend(fontsize=7)
        return _save(fig, path)


def plot_ecdf(curves, path):
    """Empirical vs analytic interference CDF; ``curves`` maps n to (x, ecdf, cdf)."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        for i, (n, (x, ecdf, cdf)) in enumerate(sorted(curves.items())):
            ax.plot(x, ecdf, color=f"C{i}", lw=2.2, alpha=0.4)
            ax.plot(x, cdf, color=f"C{i}", ls="--", lw=1.0, label=f"N = {n}")
        ax.set_xscale("log")
        ax.set_xlabel("interference power P_p [mW]")
        ax.set_ylabel("CDF (solid: simulated, dashed: analytic)")
        ax.legend(fontsize=7)
        return _save(fig, path)
