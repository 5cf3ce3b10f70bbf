"""Figure rendering for the report paths (saved next to the CSV outputs)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def render_dse_scatter(points, frontier, path: str, title: str = "") -> None:
    """Area/power scatter of every swept design with the frontier traced."""
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    valid = [p for p in points if p.valid and p.report is not None]
    invalid = [p for p in points if not p.valid]
    if valid:
        ax.scatter(
            [p.report.area_um2 for p in valid],
            [p.report.power_mw for p in valid],
            s=24,
            c="#7f7f7f",
            label="designs",
        )
    if frontier:
        xs = [p.report.area_um2 for p in frontier]
        ys = [p.report.power_mw for p in frontier]
        ax.plot(xs, ys, "o-", color="#d62728", label="frontier")
        for p in frontier:
            ax.annotate(f"{p.config:x}", (p.report.area_um2, p.report.power_mw), fontsize=7)
    ax.set_xlabel("memory area (um^2)")
    ax.set_ylabel("memory power (mW)")
    if title:
        ax.set_title(title)
    if invalid:
        ax.plot([], [], "x", color="#000000", label=f"{len(invalid)} invalid")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_compare_bars(rows: list[dict], path: str, title: str = "") -> None:
    """Grouped bars of buffered pixels and per-frame energy by strategy."""
    fig, axes = plt.subplots(1, 2, figsize=(7.2, 3.2))
    names = [r["strategy"] for r in rows]
    pix = [r["total_pixels"] for r in rows]
    energy = [r["energy_pj_per_frame"] for r in rows]
    axes[0].bar(names, pix, color="#1f77b4")
    axes[0].set_ylabel("buffered pixels")
    axes[1].bar(names, energy, color="#ff7f0e")
    axes[1].set_ylabel("energy (pJ/frame)")
    for ax in axes:
        ax.tick_params(axis="x", rotation=30, labelsize=7)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_access_histogram(report, path: str, ports: int, title: str = "") -> None:
    """Stacked per-block access profile from one simulation."""
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    labels = []
    series: dict[int, list[int]] = {}
    for buf, hists in sorted(report.access_histogram.items()):
        for bi, h in enumerate(hists):
            labels.append(f"{buf}.b{bi + 1}")
            for k in range(0, ports + 1):
                series.setdefault(k, []).append(h.get(k, 0))
    bottom = [0] * len(labels)
    for k in sorted(series):
        ax.bar(labels, series[k], bottom=bottom, label=f"{k} access")
        bottom = [b + v for b, v in zip(bottom, series[k])]
    ax.set_ylabel("cycles")
    ax.tick_params(axis="x", rotation=45, labelsize=6)
    ax.legend(fontsize=6)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
