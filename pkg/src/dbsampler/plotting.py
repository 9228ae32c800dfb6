"""Figures written next to the CLI's CSV output (Agg backend, PNG)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def loglog_series(path, series, title="", xlabel="n", ylabel="", fits=()):
    """series: list of (label, x, y); fits: list of (label, slope, intercept, x)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, x, y in series:
        x, y = np.asarray(x, float), np.abs(np.asarray(y, float))
        m = (x > 0) & (y > 0)
        ax.loglog(x[m], y[m], ".", ms=3, label=label)
    for label, slope, icpt, x in fits:
        x = np.asarray(x, float)
        ax.loglog(x, np.exp(icpt) * x**slope, "-", lw=1, label=f"{label} slope {slope:.3f}")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize=7)
    _save(fig, path)


def error_profile(path, z, errors, title="", labels=None):
    """|error| against Re z for one or several reconstructions."""
    z = np.asarray(z)
    errors = [np.asarray(e) for e in errors]
    labels = labels or [f"run {i}" for i in range(len(errors))]
    fig, ax = plt.subplots(figsize=(6, 4))
    for e, lab in zip(errors, labels):
        ax.semilogy(z.real, np.maximum(np.abs(e), 1e-300), ".", ms=3, label=lab)
    ax.set_xlabel("Re z")
    ax.set_ylabel("|F - approximation|")
    ax.set_title(title)
    ax.legend(fontsize=7)
    _save(fig, path)


def bars(path, labels, values, title="", ylabel=""):
    fig, ax = plt.subplots(figsize=(6, 4))
    v = np.maximum(np.abs(np.asarray(values, float)), 1e-300)
    ax.bar(range(len(v)), v)
    ax.set_yscale("log")
    ax.set_xticks(range(len(v)))
    ax.set_xticklabels(labels, rotation=60, fontsize=6)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    _save(fig, path)
