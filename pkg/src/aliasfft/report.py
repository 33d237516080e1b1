"""Render summary figures from a bench CSV.

The CSV is the source of truth; every figure here is an aggregation of its
rows (means over seeds), written as PNG files next to nothing else.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def _load_rows(csv_path: str) -> list[dict]:
    rows = []
    with open(csv_path, newline="", encoding="utf-8") as handle:
        for raw in csv.DictReader(handle):
            if raw["success"].startswith("skipped"):
                continue
            rows.append(
                {
                    "algo": raw["algo"],
                    "n": int(raw["n"]),
                    "k": int(raw["k"]),
                    "snr": raw["snr"],
                    "runtime_ms": int(raw["runtime_ns"]) / 1e6,
                    "sampled_pct": float(raw["sampled_pct"]),
                    "l1": float(raw["l1"]),
                    "success": raw["success"] == "true",
                }
            )
    return rows


def _mean_by(rows, x_key, y_key):
    groups = defaultdict(lambda: defaultdict(list))
    for row in rows:
        groups[row["algo"]][row[x_key]].append(row[y_key])
    series = {}
    for algo, per_x in groups.items():
        xs = sorted(per_x)
        series[algo] = (xs, [sum(per_x[x]) / len(per_x[x]) for x in xs])
    return series


def _line_plot(series, xlabel, ylabel, title, path, logx=False, logy=False):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for algo in sorted(series):
        xs, ys = series[algo]
        ax.plot(xs, ys, marker="o", label=algo)
    if logx:
        ax.set_xscale("log", base=2)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_report(csv_path: str, outdir: str) -> list[Path]:
    """Write the standard figure set; returns the paths actually produced."""
    rows = _load_rows(csv_path)
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if not rows:
        return written

    multi_n = len({row["n"] for row in rows}) > 1
    if multi_n:
        path = out / "runtime_vs_n.png"
        _line_plot(
            _mean_by(rows, "n", "runtime_ms"),
            "signal size N", "runtime [ms]", "Runtime vs signal size",
            path, logx=True, logy=True,
        )
        written.append(path)
        path = out / "sampled_vs_n.png"
        _line_plot(
            _mean_by(rows, "n", "sampled_pct"),
            "signal size N", "fraction of signal sampled", "Sampling vs signal size",
            path, logx=True,
        )
        written.append(path)

    noisy = [row for row in rows if row["snr"] != "exact"]
    if len({row["snr"] for row in noisy}) > 1:
        for row in noisy:
            row["snr_db"] = float(row["snr"])
        path = out / "l1_error_vs_snr.png"
        _line_plot(
            _mean_by(noisy, "snr_db", "l1"),
            "SNR [dB]", "mean L1 error", "Recovery error vs SNR",
            path, logy=True,
        )
        written.append(path)
        path = out / "success_vs_snr.png"
        _line_plot(
            _mean_by(noisy, "snr_db", "success"),
            "SNR [dB]", "exact-support rate", "Success rate vs SNR",
            path,
        )
        written.append(path)

    multi_k = len({row["k"] for row in rows}) > 1
    if multi_k:
        path = out / "runtime_vs_k.png"
        _line_plot(
            _mean_by(rows, "k", "runtime_ms"),
            "sparsity K", "runtime [ms]", "Runtime vs sparsity",
            path, logy=True,
        )
        written.append(path)
    return written
