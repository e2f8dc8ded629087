"""Static SVG line plots (matplotlib, imported lazily)."""

from __future__ import annotations

import numpy as np


def _figure():
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "kdv-asymptotics"
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: str) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})


def plot_profiles(path: str, x: np.ndarray, curves: dict[str, np.ndarray],
                  title: str, xlabel: str = "x") -> None:
    plt = _figure()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, y in curves.items():
        ax.plot(x, y, label=label, linewidth=1.2)
    ax.set_xlabel(xlabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)


def plot_error_curve(path: str, eps: list[float], errors: dict[str, list[float]],
                     fitted_order: float, title: str) -> None:
    plt = _figure()
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for label, errs in errors.items():
        ax.loglog(eps, errs, "o-", label=label)
    if np.isfinite(fitted_order) and len(eps) >= 2:
        anchor = errors["err_linf_u"][0]
        ref = [anchor * (e / eps[0]) ** fitted_order for e in eps]
        ax.loglog(eps, ref, "k:", label=f"slope {fitted_order:.2f}")
    ax.set_xlabel("eps")
    ax.set_ylabel("error")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="best")
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)


def plot_time_series(path: str, times: list[float], series: dict[str, list[float]],
                     title: str) -> None:
    plt = _figure()
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for label, values in series.items():
        ax.plot(times, values, "o-", label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("error")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)
