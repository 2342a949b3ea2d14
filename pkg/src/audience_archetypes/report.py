"""Presentation artifacts: channel summary, referral heatmap and persona report."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .ingest import CHANNELS, ViewershipMatrix
from .nmf import FactorizationResult
from .personas import _row_channels_for, label_components

__all__ = [
    "ChannelSummary",
    "HeatmapData",
    "summarize_channels",
    "heatmap_data",
    "heatmap_csv",
    "render_svg",
    "personas_report",
    "RAMP_LIGHT",
    "RAMP_DARK",
]

RAMP_LIGHT = (255, 255, 255)
RAMP_DARK = (8, 48, 107)


@dataclass
class ChannelSummary:
    """Per-channel views, share of all views (percent) and watch seconds per view.

    Shares are not rounded, so they always total 100 for a non-empty matrix.
    Real dashboards that report e.g. 42 / 22 / 20 / 14.7 leave the rest to
    the Other group.
    """

    views: dict
    share_percent: dict
    avg_watch_seconds: dict

    def to_dict(self) -> dict:
        return {
            ch.value: {
                "views": _num(self.views[ch]),
                "share_percent": float(self.share_percent[ch]),
                "avg_watch_seconds": float(self.avg_watch_seconds[ch]),
            }
            for ch in CHANNELS
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"


def _num(x):
    x = np.asarray(x).item()
    return int(x) if float(x).is_integer() else float(x)


def summarize_channels(matrix: ViewershipMatrix) -> ChannelSummary:
    row_views = matrix.data.sum(axis=1)
    views = {ch: 0 for ch in CHANNELS}
    watch = {ch: 0 for ch in CHANNELS}
    for i, ch in enumerate(matrix.row_channels):
        views[ch] += row_views[i].item()
        watch[ch] += matrix.row_watch_seconds[i].item()
    total = sum(views.values())
    share = {ch: (100.0 * views[ch] / total if total > 0 else 0.0) for ch in CHANNELS}
    avg = {ch: (watch[ch] / views[ch] if views[ch] > 0 else 0.0) for ch in CHANNELS}
    return ChannelSummary(views, share, avg)


@dataclass
class HeatmapData:
    row_labels: list
    col_labels: list
    cells: np.ndarray
    raw: np.ndarray


def heatmap_data(result: FactorizationResult, matrix: ViewershipMatrix, max_rows=15, mode="auto") -> HeatmapData:
    """Referral x component heat for the ``max_rows`` most-viewed referrals.

    Rows are picked by total views (ties by label) and each row of W is
    normalized to sum to 1, so a cell says how a referral's loading splits
    across components. Columns are named ``"k:Channel"``.
    """
    channels = _row_channels_for(result, matrix)
    labels = label_components(result.W, channels, mode)
    totals = matrix.data.sum(axis=1)
    order = sorted(range(len(matrix.row_labels)), key=lambda i: (-totals[i], matrix.row_labels[i]))[:max_rows]
    w_index = {lab: i for i, lab in enumerate(result.row_labels)}
    p = result.rank
    raw = np.zeros((len(order), p))
    for r, i in enumerate(order):
        lab = matrix.row_labels[i]
        if lab in w_index:
            raw[r] = result.W[w_index[lab]]
    sums = raw.sum(axis=1, keepdims=True)
    cells = np.divide(raw, sums, out=np.zeros_like(raw), where=sums > 0)
    return HeatmapData(
        row_labels=[matrix.row_labels[i] for i in order],
        col_labels=[f"{k}:{labels[k].value}" for k in range(p)],
        cells=cells,
        raw=raw,
    )


def heatmap_csv(heat: HeatmapData, raw=False) -> bytes:
    """CSV with header ``referral,component_0,...``; normalized cells unless ``raw``."""
    values = heat.raw if raw else heat.cells
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["referral"] + [f"component_{k}" for k in range(values.shape[1])])
    for lab, row in zip(heat.row_labels, values):
        writer.writerow([lab] + [repr(float(v)) for v in row])
    return out.getvalue().encode("utf-8")


def _fill(value):
    v = min(max(float(value), 0.0), 1.0)
    rgb = (round(a + (b - a) * v) for a, b in zip(RAMP_LIGHT, RAMP_DARK))
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def render_svg(heat: HeatmapData, cell_w=64, cell_h=22) -> bytes:
    n_rows, n_cols = heat.cells.shape
    left = 12 + 7 * max((len(lab) for lab in heat.row_labels), default=0)
    top = 30
    width = left + n_cols * cell_w + 10
    height = top + n_rows * cell_h + 10
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
    ]
    for k, lab in enumerate(heat.col_labels):
        x = left + k * cell_w + cell_w / 2
        parts.append(f'<text x="{x:g}" y="{top - 8}" text-anchor="middle">{escape(lab)}</text>')
    for r, lab in enumerate(heat.row_labels):
        y = top + r * cell_h
        parts.append(f'<text x="{left - 6}" y="{y + cell_h * 0.7:g}" text-anchor="end">{escape(lab)}</text>')
        for k in range(n_cols):
            v = heat.cells[r, k]
            parts.append(
                f'<rect class="cell" x="{left + k * cell_w}" y="{y}" width="{cell_w}" height="{cell_h}" '
                f'fill="{_fill(v)}" stroke="#cccccc"><title>{escape(lab)} / '
                f'{escape(heat.col_labels[k])}: {float(v):.4f}</title></rect>'
            )
    parts.append("</svg>")
    return ("\n".join(parts) + "\n").encode("utf-8")


def personas_report(personas, summary: ChannelSummary) -> bytes:
    """JSON document ``{"channels": ..., "personas": [...]}``.

    Each persona entry carries its full rankings plus ``preferred_video_type``,
    the single top-ranked video type.
    """
    entries = []
    for p in sorted(personas, key=lambda p: p.component_index):
        doc = p.to_dict()
        doc["preferred_video_type"] = p.preferred_video_type
        entries.append(doc)
    return (json.dumps({"channels": summary.to_dict(), "personas": entries}, indent=1) + "\n").encode("utf-8")
