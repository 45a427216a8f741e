"""PNG figures for reports (non-interactive backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # fixed metadata keeps the files reproducible
    fig.savefig(path, dpi=110, metadata={"Software": None})
    plt.close(fig)
    return path


def fiber_plot(t, v, path, C=None, title=None):
    """``t ↦ v(0, t)`` with the boundary level ``−C`` when given."""
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    ax.plot(t, v, lw=1.6, label="v(0, t)")
    if C is not None:
        ax.axhline(-C, color="0.4", ls="--", lw=1, label="-C")
    ax.set_xlabel("t = log|w|²")
    ax.set_ylabel("v")
    ax.set_title(title or "fiber profile over z = 0")
    ax.legend(loc="upper left")
    fig.tight_layout()
    return _save(fig, path)


def ladder_plot(ladder, path, title=None):
    """Minimal norm against polynomial degree."""
    N = [p[0] for p in ladder]
    m = [p[1] for p in ladder]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(N, m, "o-")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("degree N")
    ax.set_ylabel("m(N)")
    ax.set_title(title or "minimal extension norm")
    fig.tight_layout()
    return _save(fig, path)


def sweep_plot(Cs, S, S_err, m, O, path):
    """``S(C)`` with error bars against the flat levels ``m`` and ``O``."""
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    ax.errorbar(Cs, S, yerr=S_err, fmt="o-", capsize=3, label="S(C)")
    ax.axhline(m, color="tab:green", ls=":", label="m")
    ax.axhline(O, color="tab:red", ls="--", label="O")
    ax.set_xlabel("C")
    ax.set_ylabel("constant")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def bounds_plot(names, m, S, O, path):
    """Grouped bars of ``m ≤ S ≤ O`` per run."""
    x = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(max(5.0, 0.8 * len(names) + 2), 3.8))
    ax.bar(x - 0.25, m, 0.25, label="m")
    ax.bar(x, S, 0.25, label="S")
    ax.bar(x + 0.25, O, 0.25, label="O")
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)
