"""Figure rendering for experiment result directories.

Reads result.json plus its CSV tables and writes one PNG per table next
to them: log-log trend plots for per-k tables, scatter/line plots
otherwise, and a verdict summary panel.
"""

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

FIG_SIZE = (6.0, 4.0)


def _read_table(path):
    with Path(path).open() as fh:
        rows = list(csv.DictReader(fh))
    cols = {}
    for name in rows[0].keys() if rows else []:
        try:
            cols[name] = [float(r[name]) for r in rows]
        except ValueError:
            cols[name] = [r[name] for r in rows]
    return cols


def _plot_table(name, cols, out_path):
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    numeric = {k: v for k, v in cols.items()
               if v and isinstance(v[0], float)}
    xkey = next((k for k in ("k", "s", "j") if k in numeric), None)
    if xkey is None and numeric:
        xkey = next(iter(numeric))
    if xkey:
        xs = numeric[xkey]
        loglog = (xkey == "k" and all(x > 0 for x in xs) and all(
            all(y > 0 for y in ys) for k, ys in numeric.items() if k != xkey))
        for key, ys in numeric.items():
            if key == xkey:
                continue
            if loglog:
                ax.loglog(xs, ys, marker="o", label=key)
            else:
                ax.plot(xs, ys, marker="." if len(xs) > 50 else "o",
                        label=key)
        ax.set_xlabel(xkey)
        ax.legend(fontsize=8)
    ax.set_title(name)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def _plot_verdicts(doc, out_path):
    verdicts = doc.get("verdicts", [])
    if not verdicts:
        return
    fig, ax = plt.subplots(
        figsize=(6.0, max(1.8, 0.6 + 0.4 * len(verdicts))))
    labels = [v["id"] for v in verdicts]
    colors = ["#2a9d2a" if v["passed"] else "#cc3311" for v in verdicts]
    ax.barh(range(len(verdicts)),
            [max(v["measured"], 1e-16) for v in verdicts], color=colors)
    for i, v in enumerate(verdicts):
        ax.plot([max(v["threshold"], 1e-16)] * 2, [i - 0.4, i + 0.4],
                color="k", lw=1.5)
    ax.set_yticks(range(len(verdicts)), labels, fontsize=8)
    ax.set_xscale("log")
    ax.set_xlabel("measured (bar) vs threshold (tick)")
    ax.set_title(doc.get("experiment", "verdicts"))
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_result_dir(result_dir, out_dir=None):
    """Render figures for one result directory; returns written paths."""
    result_dir = Path(result_dir)
    out = Path(out_dir) if out_dir else result_dir
    out.mkdir(parents=True, exist_ok=True)
    doc = json.loads((result_dir / "result.json").read_text())
    written = []
    for table_file in doc.get("tables", []):
        cols = _read_table(result_dir / table_file)
        png = out / (Path(table_file).stem + ".png")
        _plot_table(Path(table_file).stem, cols, png)
        written.append(png)
    vpng = out / f"{doc.get('experiment', 'result')}_verdicts.png"
    _plot_verdicts(doc, vpng)
    written.append(vpng)
    return written
