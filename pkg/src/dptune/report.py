"""Report files: win matrix (CSV, text grid, SVG heatmap) and the runtime table."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from .harness import WinMatrix  # noqa: E402

WINS_CSV = "wins.csv"
WINS_TXT = "wins.txt"
WINS_SVG = "wins.svg"
RUNTIMES_CSV = "runtimes.csv"


def wins_frame(matrix: WinMatrix) -> pd.DataFrame:
    """One row per (learner, goal): transition total, then counts and percentages."""
    rows = []
    for (learner, goal), counts in matrix.counts.items():
        row = {"learner": learner, "goal": goal, "transitions": matrix.totals[(learner, goal)]}
        row.update({o: counts[o] for o in matrix.optimizers})
        row.update({f"{o}_pct": round(matrix.percent(learner, goal, o), 1)
                    for o in matrix.optimizers})
        rows.append(row)
    return pd.DataFrame(rows)


def wins_text(matrix: WinMatrix) -> str:
    header = ["learner", "goal", *matrix.optimizers]
    body = []
    for (learner, goal), counts in matrix.counts.items():
        total = matrix.totals[(learner, goal)]
        cells = [f"{counts[o]}/{total} ({matrix.percent(learner, goal, o):.0f}%)"
                 for o in matrix.optimizers]
        body.append([learner, goal, *cells])
    widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in [header, *body]]
    return "\n".join(lines) + "\n"


def plot_wins(matrix: WinMatrix, path) -> None:
    """Heatmap with cell darkness proportional to the first-rank percentage."""
    labels = [f"{l} / {g}" for l, g in matrix.counts]
    pct = np.array([[matrix.percent(l, g, o) for o in matrix.optimizers]
                    for l, g in matrix.counts])
    fig, ax = plt.subplots(figsize=(1.2 * len(matrix.optimizers) + 2.5, 0.5 * len(labels) + 1.2))
    ax.imshow(pct, cmap="Greys", vmin=0, vmax=100, aspect="auto")
    ax.set_xticks(range(len(matrix.optimizers)), matrix.optimizers)
    ax.set_yticks(range(len(labels)), labels)
    for i, (key, counts) in enumerate(matrix.counts.items()):
        for j, o in enumerate(matrix.optimizers):
            ax.text(j, i, f"{counts[o]}\n{pct[i, j]:.0f}%", ha="center", va="center", fontsize=8,
                    color="white" if pct[i, j] > 55 else "black")
    ax.set_title("Rank-1 finishes across transitions")
    fig.tight_layout()
    # Fixed salt and no date stamp keep the SVG byte-stable across runs.
    with plt.rc_context({"svg.hashsalt": "dptune"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def write_report(matrix: WinMatrix, runtimes: pd.DataFrame, out_dir, svg: bool = True) -> dict:
    """Write the report files into `out_dir`; returns their paths by kind."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"wins": out / WINS_CSV, "wins_text": out / WINS_TXT, "runtimes": out / RUNTIMES_CSV}
    wins_frame(matrix).to_csv(paths["wins"], index=False, lineterminator="\n")
    paths["wins_text"].write_text(wins_text(matrix), encoding="utf-8")
    runtimes.to_csv(paths["runtimes"], index_label="optimizer", float_format="%.4f",
                    lineterminator="\n")
    if svg:
        paths["wins_svg"] = out / WINS_SVG
        plot_wins(matrix, paths["wins_svg"])
    return paths
