"""Figure emission for the report path.

All figures are rendered headless and written as SVG with the embedded
timestamp suppressed and a fixed hash salt, so repeated runs with the same
data produce byte-identical files.
"""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "diraclab"

_SAVE = {"format": "svg", "metadata": {"Date": None}}


def _finish(fig, path: str) -> str:
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path


def plot_deviation_magnitudes(rows, path: str, title: str = "pair + bc deviations"):
    """n against log10 |Delta_n| (skipping exact zeros, which have no log)."""
    ns, vals = [], []
    for r in rows:
        d = r["abs_Delta"] if isinstance(r, dict) else r.Delta
        n = r["n"] if isinstance(r, dict) else r.n
        if d > 0:
            ns.append(n)
            vals.append(math.log10(d))
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.scatter(ns, vals, s=14, color="#1f5fa8")
    ax.set_xlabel("n")
    ax.set_ylabel("log10 |gamma_n| + |delta_n|")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return _finish(fig, path)


def plot_theorem3_ratios(rows, path: str, title: str = "coupling / deviation ratio"):
    """R_n = (|b-(z*)|+|b+(z*)|) / (|gamma|+|delta|) against n; log scale."""
    ns, vals = [], []
    for r in rows:
        ratio = r["ratio"] if isinstance(r, dict) else r.ratio
        n = r["n"] if isinstance(r, dict) else r.n
        if ratio is not None and ratio > 0:
            ns.append(n)
            vals.append(ratio)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.scatter(ns, vals, s=14, color="#a83232")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("R_n")
    ax.set_title(title)
    ax.grid(True, alpha=0.3, which="both")
    return _finish(fig, path)


def plot_riesz_ratios(per_n, path: str, title: str = "|delta/gamma| per n"):
    ns, vals = [], []
    for item in per_n:
        if isinstance(item, dict):
            n, ratio = item["n"], item["ratio"]
        else:
            n, ratio = item[0], item[1]
        if ratio is not None and ratio > 0:
            ns.append(n)
            vals.append(ratio)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.scatter(ns, vals, s=14, color="#2d7a2d")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("|delta_n| / |gamma_n|")
    ax.set_title(title)
    ax.grid(True, alpha=0.3, which="both")
    return _finish(fig, path)


def plot_decay_fit(ns, deltas, fit, path: str, title: str = "deviation decay"):
    """Delta_n with the fitted decay law overlaid (log10 scale)."""
    pts = [(n, d) for n, d in zip(ns, deltas) if d > 0]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    if pts:
        xs = [p[0] for p in pts]
        ys = [math.log10(p[1]) for p in pts]
        ax.scatter(xs, ys, s=14, color="#1f5fa8", label="measured")
        if fit is not None:
            klass = fit["class"] if isinstance(fit, dict) else fit.klass
            rate = fit["rate"] if isinstance(fit, dict) else fit.rate
            # x_n ~ exp(-rate*n) or x_n ~ n**rate; anchor the line through
            # the data's own mean since the fit records no intercept
            if klass == "exponential":
                model = [-rate * x / math.log(10) for x in xs]
                label = f"exponential, rate {rate:.3f}"
            else:
                model = [rate * math.log(abs(x)) / math.log(10) for x in xs]
                label = f"polynomial, slope {rate:.3f}"
            shift = sum(y - m for y, m in zip(ys, model)) / len(ys)
            ax.plot(xs, [m + shift for m in model], color="#a83232",
                    lw=1.2, label=label)
        ax.legend()
    ax.set_xlabel("n")
    ax.set_ylabel("log10 Delta_n")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return _finish(fig, path)
