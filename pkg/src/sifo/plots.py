"""Report figures.  Uses the Agg backend so it works headless."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_sweep(rows: list[dict], path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    cells = [f"{r['n_and']}/{r['n_xor']}" for r in rows]
    ax.plot(cells, [r["total_ns"] / 1e3 for r in rows], marker="o", label="total")
    ax.plot(cells, [r["pcie_ns"] / 1e3 for r in rows], marker="s", linestyle="--", label="host link")
    ax.set_xlabel("AND / XOR cells")
    ax.set_ylabel("time (us)")
    ax.set_title(title or "cell-count sweep")
    ax.legend()
    return _save(fig, path)


def plot_policies(rows: list[dict], path, title: str = "") -> Path:
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(8, 3.5))
    names = [r["policy"] for r in rows]
    ax0.bar(names, [r["total_ns"] / 1e3 for r in rows], color="tab:blue")
    ax0.set_ylabel("time (us)")
    ax1.bar(names, [r["ddr_accesses"] for r in rows], color="tab:orange")
    ax1.set_ylabel("DDR accesses")
    for ax in (ax0, ax1):
        ax.tick_params(axis="x", labelrotation=20)
    fig.suptitle(title or "memory policy comparison")
    return _save(fig, path)


def plot_layer_profile(layer_sizes: list[tuple[int, int]], path, title: str = "") -> Path:
    """Stacked AND/XOR gate counts per layer; ``layer_sizes`` holds (ands, xors)."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    xs = range(len(layer_sizes))
    ands = [a for a, _ in layer_sizes]
    xors = [x for _, x in layer_sizes]
    ax.bar(xs, ands, label="AND", color="tab:red")
    ax.bar(xs, xors, bottom=ands, label="XOR", color="tab:gray")
    ax.set_xlabel("layer")
    ax.set_ylabel("gates")
    ax.set_title(title or "gates per layer")
    ax.legend()
    return _save(fig, path)
