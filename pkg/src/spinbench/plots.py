"""Static SVG line charts of the summary views."""
from __future__ import annotations

import logging
import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

log = logging.getLogger(__name__)

LABELS = {
    "bell": "<B>",
    "esp": "ESP",
    "ps": "logical success rate",
    "i3": "I3 (nats)",
    "rate_X": "X error rate",
    "rate_Y": "Y error rate",
    "rate_Z": "Z error rate",
    "rate_other": "unclassified rate",
    "shuttles": "shuttles",
}


def _line_chart(path: Path, series: dict, xlabel: str, ylabel: str, zero_line: bool = False):
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    for label, pts in sorted(series.items()):
        pts = sorted(pts)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=label)
    if zero_line:
        ax.axhline(0.0, color="black", linewidth=0.8, linestyle="--")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=7)
    fig.tight_layout()
    # no timestamp so reruns produce identical files
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _series(rows, xkey, metric):
    out: dict = {}
    for r in rows:
        if r["metric"] != metric or r[xkey] in ("", None):
            continue
        label = r["cg"]
        if r.get("crosstalk"):
            label += " +xt"
        if len({x["error_rate"] for x in rows}) > 1:
            label += f" p={r['error_rate']:g}"
        y = r["shuttles"] if metric == "shuttles" else r["mean"]
        out.setdefault(label, []).append((r[xkey], y))
    return out


def emit_plots(rows, out_dir) -> list[Path]:
    """One SVG per metric for the cycle-averaged and size-averaged views."""
    from .experiment import summarize

    out = Path(out_dir)
    if not rows:
        warnings.warn("no rows to plot")
        return []
    exp = rows[0]["experiment"]
    by_size, by_cycle, _ = summarize(rows)
    metrics = sorted({r["metric"] for r in rows})
    written = []
    views = [("cols", by_size, "size (columns)", "vs-size")]
    if exp != "ame":
        views.append(("cycle", by_cycle, "cycles", "vs-cycle"))
    for xkey, view, xlabel, tag in views:
        for metric in metrics + ["shuttles"]:
            if metric == "shuttles" and xkey == "cycle" and exp == "ame":
                continue
            src = [r for r in view if r["metric"] == (metrics[0] if metric == "shuttles" else metric)]
            if metric == "shuttles":
                src = [dict(r, metric="shuttles") for r in src]
            series = _series(src, xkey, metric)
            if not series:
                log.warning("no data for %s %s; plot skipped", metric, tag)
                continue
            path = out / f"{exp}-{metric}-{tag}.svg"
            _line_chart(path, series, xlabel, LABELS.get(metric, metric), zero_line=metric == "i3")
            written.append(path)
    return written
