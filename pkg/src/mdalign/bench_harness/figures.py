"""Matplotlib summary figures written next to the tabular reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed hash salt + no timestamp keeps the SVG output byte-stable
_RC = {
    "svg.hashsalt": "mdalign",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
}
_META = {"Date": None, "Creator": None}


def _save(fig, path):
    fig.savefig(path, format="svg", metadata=_META, bbox_inches="tight")
    plt.close(fig)


def leaderboard_figure(rows, path):
    """Grouped bars of VBCS / ABHS (with CSD / HSD error bars) and Align per model."""
    with plt.rc_context(_RC):
        names = [r.model_name for r in rows]
        x = np.arange(len(rows))
        has_align = any(r.align is not None for r in rows)
        width = 0.27 if has_align else 0.38
        fig, ax = plt.subplots(figsize=(max(4.0, 1.1 * len(rows) + 2), 3.2))
        ax.bar(x - width / 2 * (2 if has_align else 1), [r.vbcs for r in rows], width,
               yerr=[r.csd for r in rows], capsize=3, label="VBCS (±CSD)", color="#4c72b0")
        ax.bar(x if has_align else x + width / 2, [r.abhs for r in rows], width,
               yerr=[r.hsd for r in rows], capsize=3, label="ABHS (±HSD)", color="#dd8452")
        if has_align:
            ax.bar(x + width, [r.align if r.align is not None else 0.0 for r in rows], width,
                   label="Align", color="#55a868")
        ax.set_xticks(x)
        ax.set_xticklabels(names, rotation=20, ha="right")
        ax.set_ylim(0, 1.05)
        ax.set_ylabel("score")
        ax.legend(frameon=False, ncol=3, loc="upper center", bbox_to_anchor=(0.5, 1.15))
        _save(fig, path)


def clip_scatter_figure(clips, path):
    """Per-clip VBCS against ABHS, one colour per model."""
    ok = [c for c in clips if c.ok]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4.2, 3.6))
        models = sorted({c.model_name for c in ok})
        cmap = plt.get_cmap("tab10")
        for i, m in enumerate(models):
            pts = np.array([[c.scores.vbcs, c.scores.abhs] for c in ok if c.model_name == m])
            ax.scatter(pts[:, 0], pts[:, 1], s=22, color=cmap(i % 10), label=m)
        ax.set_xlim(-0.02, 1.02)
        ax.set_ylim(-0.02, 1.02)
        ax.set_xlabel("VBCS")
        ax.set_ylabel("ABHS")
        if models:
            ax.legend(frameon=False, fontsize=8)
        _save(fig, path)
