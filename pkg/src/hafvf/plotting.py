"""Optional PNG figures for the CLI (``--figures DIR``).

matplotlib is imported lazily with the Agg backend so the library never
needs a display.
"""

from __future__ import annotations

import os
from typing import Sequence

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _mark(ax, changes: Sequence[int], artifacts: Sequence[int] = ()):
    for c in changes:
        ax.axvline(c, color="0.6", lw=0.8, ls="--")
    for a in artifacts:
        ax.axvline(a, color="tab:red", lw=0.8, ls=":")


def _save(fig, directory: str, name: str) -> str:
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, name)
    fig.savefig(path, dpi=110, bbox_inches="tight")
    return path


def memory_figure(records: list[dict], directory: str, changes: Sequence[int] = (), name="filter.png") -> str:
    """E[w], E[b] and the effective memory against time."""
    plt = _pyplot()
    t = np.array([r["t"] for r in records])
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    ax1.plot(t, [r["e_w"] for r in records], label="E[w]")
    ax1.plot(t, [r["e_b"] for r in records], label="E[b]", alpha=0.7)
    ax1.set_ylim(0, 1.02)
    ax1.legend(loc="lower right")
    ax2.plot(t, [r["eta_eff"] for r in records], label="effective memory")
    asym = np.array([r["eta_asymptote"] if r["eta_asymptote"] is not None else np.nan for r in records], dtype=float)
    ax2.plot(t, asym, ls="--", label="asymptote")
    ax2.set_xlabel("t")
    ax2.legend(loc="upper right")
    for ax in (ax1, ax2):
        _mark(ax, changes)
    path = _save(fig, directory, name)
    plt.close(fig)
    return path


def smooth_figure(records: list[dict], directory: str, changes: Sequence[int] = ()) -> str:
    plt = _pyplot()
    t = [r["t"] for r in records]
    fig, ax = plt.subplots(figsize=(7, 3))
    ax.plot(t, [r["forward"]["eta_eff"] for r in records], label="forward")
    ax.plot(t, [r["eta_eff"] for r in records], label="forward-backward")
    ax.set_xlabel("t")
    ax.set_ylabel("effective memory")
    ax.legend()
    _mark(ax, changes)
    path = _save(fig, directory, "smooth.png")
    plt.close(fig)
    return path


def ar_figure(records: list[dict], signal: Sequence[float], directory: str, changes=(), artifacts=()) -> str:
    plt = _pyplot()
    t = [r["t"] for r in records]
    coef = np.array([r["coef_mean"] for r in records])
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    ax1.plot(np.arange(len(signal)), signal, lw=0.8, label="signal")
    ax1.plot(t, [r["pred_mean"] for r in records], lw=0.8, label="one-step prediction")
    ax1.legend(loc="upper right")
    ax2.plot(t, coef, lw=0.8)
    ax2.set_ylabel("coefficients")
    ax2.set_xlabel("t")
    for ax in (ax1, ax2):
        _mark(ax, changes, artifacts)
    path = _save(fig, directory, "ar.png")
    plt.close(fig)
    return path


def optimizer_figure(loss: np.ndarray, baseline: np.ndarray, memory: np.ndarray, outliers, directory: str) -> str:
    plt = _pyplot()
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    ax1.semilogy(loss, label="adaptive forgetting")
    ax1.semilogy(baseline, label="Adam", alpha=0.8)
    ax1.set_ylabel("loss")
    ax1.legend()
    if memory.size:
        ax2.plot(memory)
    ax2.set_ylabel("E[w]")
    ax2.set_xlabel("iteration")
    for ax in (ax1, ax2):
        _mark(ax, [], np.flatnonzero(outliers))
    path = _save(fig, directory, "optdemo.png")
    plt.close(fig)
    return path
