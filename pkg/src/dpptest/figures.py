"""PNG rendering for the CLI report paths (bench, hardness sweeps, and
the verification suites).

Every figure goes through save_figure, which pins the PNG metadata so a
rerun with identical inputs produces identical bytes. The Agg backend is
forced before pyplot loads; nothing here ever opens a window.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_DPI = 120
_COLORS = plt.get_cmap("tab10").colors


def save_figure(fig, path) -> None:
    """Write a PNG with fixed metadata (no timestamps, no version strings)."""
    fig.savefig(path, dpi=_DPI, metadata={"Software": "dpptest"})
    plt.close(fig)


def fig_bench(rows: list[dict], path) -> None:
    """Rate curves: accept rate on in-class inputs and reject rate on far
    inputs against the sample budget, one line per (n, eps, kind)."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    series: dict[tuple, list[tuple[int, float]]] = {}
    for row in rows:
        key = (row["n"], row["eps"], row["kind"])
        rate = row["hits"] / row["trials"] if row["trials"] else 0.0
        series.setdefault(key, []).append((row["m"], rate))
    for k, (key, pts) in enumerate(sorted(series.items())):
        n, eps, kind = key
        pts.sort()
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        label = f"n={n} eps={eps} {'accept|in-class' if kind == 'dpp' else 'reject|far'}"
        style = "-o" if kind == "dpp" else "--s"
        ax.plot(xs, ys, style, color=_COLORS[k % len(_COLORS)], label=label)
    ax.set_xscale("log")
    ax.set_ylim(-0.02, 1.05)
    ax.axhline(0.9, color="gray", lw=0.8, ls=":")
    ax.set_xlabel("samples m")
    ax.set_ylabel("correct-verdict rate")
    ax.set_title("tester operating rates")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8, loc="lower right")
    fig.tight_layout()
    save_figure(fig, path)


def fig_hardness(rows: list[dict], n: int, eps_prime: float, path) -> None:
    """Witness-count histogram with the N/64 and N/32 markers, and the
    normalizer histogram with the concentration band."""
    size = 1 << n
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 4.0))
    witness = [row["witness_count"] for row in rows]
    ax1.hist(witness, bins=30, color=_COLORS[0], alpha=0.8)
    ax1.axvline(size / 64.0, color="red", lw=1.2, label="N/64 floor")
    ax1.axvline(size / 32.0, color="black", lw=1.2, ls="--", label="N/32 mean")
    ax1.set_xlabel("witness count |S_r|")
    ax1.set_ylabel("seeds")
    ax1.legend(fontsize=8)
    ax1.grid(True, alpha=0.3)

    l_rs = [row["l_r"] for row in rows]
    band = 4.0 * eps_prime / (size**0.5)
    ax2.hist(l_rs, bins=30, color=_COLORS[1], alpha=0.8)
    ax2.axvline(1.0 - band, color="red", lw=1.2, label="concentration band")
    ax2.axvline(1.0 + band, color="red", lw=1.2)
    ax2.set_xlabel("normalizer L_r")
    ax2.set_ylabel("seeds")
    ax2.legend(fontsize=8)
    ax2.grid(True, alpha=0.3)

    fig.suptitle(f"hard-instance sweep: n={n}, eps'={eps_prime}")
    fig.tight_layout()
    save_figure(fig, path)


def fig_suites(results, path) -> None:
    """One bar per verification suite: worst slack, green when the suite
    passed. Slacks span many decades, so the axis is symlog."""
    fig, ax = plt.subplots(figsize=(7.0, 3.6))
    names = [r.name for r in results]
    slacks = [r.worst_slack for r in results]
    colors = ["#2a9d4e" if r.passed else "#d62728" for r in results]
    ax.barh(names, slacks, color=colors)
    ax.set_xscale("symlog", linthresh=1e-12)
    ax.axvline(0.0, color="black", lw=0.8)
    ax.set_xlabel("worst slack (negative = violation)")
    ax.set_title("verification suites")
    ax.grid(True, axis="x", alpha=0.3)
    fig.tight_layout()
    save_figure(fig, path)
