import json
import re

import numpy as np
import pytest

from audience_archetypes import (
    CHANNELS,
    ChannelClass,
    FactorizationConfig,
    LabelMismatch,
    ViewershipMatrix,
    build_matrix,
    extract_personas,
    factorize,
    heatmap_csv,
    heatmap_data,
    parse_log,
    personas_report,
    render_svg,
    summarize_channels,
)
from audience_archetypes.report import RAMP_DARK, RAMP_LIGHT, HeatmapData
from audience_archetypes.synth import gen_planted_factors, sample_views

from conftest import TABLE2


def test_summary_dashboard_shares(dashboard_log):
    s = summarize_channels(build_matrix(parse_log(dashboard_log)))
    got = {ch.value: s.share_percent[ch] for ch in CHANNELS}
    assert got == pytest.approx({"Direct": 42.0, "Referral": 22.0, "Social": 20.0, "Search": 14.7, "Other": 1.3})
    assert s.avg_watch_seconds[ChannelClass.REFERRAL] == pytest.approx(191)
    assert s.avg_watch_seconds[ChannelClass.SOCIAL] == pytest.approx(96)
    assert s.avg_watch_seconds[ChannelClass.SEARCH] == pytest.approx(251)


def test_summary_single_channel():
    m = ViewershipMatrix(["g"], ["Search"], ["x", "y"], [[3, 4]], [70])
    s = summarize_channels(m)
    assert s.share_percent[ChannelClass.SEARCH] == 100.0
    assert all(s.share_percent[c] == 0 and s.views[c] == 0 and s.avg_watch_seconds[c] == 0
               for c in CHANNELS if c is not ChannelClass.SEARCH)
    assert s.avg_watch_seconds[ChannelClass.SEARCH] == 10.0


def test_summary_shares_sum_to_100():
    for seed in range(10):
        m = sample_views(gen_planted_factors(23, 9, 5, seed, noise="poisson", scale=5))
        assert sum(summarize_channels(m).share_percent.values()) == pytest.approx(100, abs=0.01)


def _fitted(g, c=12, p=5, seed=0):
    m = sample_views(gen_planted_factors(g, c, p, seed, noise="poisson", scale=20))
    return factorize(m, FactorizationConfig(rank=p, restarts=1, max_iter=200)), m


def test_heatmap_caps_at_15_rows():
    res, m = _fitted(1056, c=20)
    h = heatmap_data(res, m)
    assert h.cells.shape == (15, 5)
    assert np.allclose(h.cells.sum(axis=1), 1, atol=1e-9)
    totals = dict(zip(m.row_labels, m.data.sum(axis=1)))
    shown = [totals[lab] for lab in h.row_labels]
    assert shown == sorted(totals.values(), reverse=True)[:15]
    assert all(re.fullmatch(rf"{k}:(Search|Referral|Direct|Other|Social)", lab) for k, lab in enumerate(h.col_labels))


def test_heatmap_fewer_rows():
    res, m = _fitted(7, c=8)
    assert heatmap_data(res, m).cells.shape == (7, 5)


def test_heatmap_tie_order_and_zero_rows():
    data = np.array([[2, 2], [0, 0], [4, 0], [0, 4]])
    m = ViewershipMatrix(["b", "z", "a", "c"], ["Search", "Other", "Social", "Referral"], ["x", "y"], data)
    res = factorize(m, FactorizationConfig(rank=2, restarts=1, max_iter=50))
    h = heatmap_data(res, m, max_rows=4)
    assert h.row_labels == ["a", "b", "c", "z"]
    assert np.all(h.cells[3] == 0) and np.all(h.raw[3] == 0)


def test_heatmap_label_mismatch():
    res, m = _fitted(10)
    bad = ViewershipMatrix([f"x{i}" for i in range(10)], m.row_channels, m.col_labels, m.data)
    with pytest.raises(LabelMismatch):
        heatmap_data(res, bad)


def test_heatmap_csv_header_and_values():
    h = HeatmapData(["t.co"], ["0:Social", "1:Search"], np.array([[0.25, 0.75]]), np.array([[0.1, 0.3]]))
    assert heatmap_csv(h).decode().splitlines() == ["referral,component_0,component_1", "t.co,0.25,0.75"]
    assert heatmap_csv(h, raw=True).decode().splitlines()[1] == "t.co,0.1,0.3"


def test_svg_cells_and_determinism():
    cells = np.zeros((2, 5))
    cells[0, 0] = 1.0
    h = HeatmapData(["a & b", "c"], [f"{k}:Search" for k in range(5)], cells, cells)
    svg = render_svg(h)
    assert svg == render_svg(h)
    text = svg.decode()
    fills = re.findall(r'<rect class="cell"[^>]*fill="(#[0-9a-f]{6})"', text)
    assert len(fills) == 10
    assert fills[0] == "#{:02x}{:02x}{:02x}".format(*RAMP_DARK)
    assert fills[1] == "#{:02x}{:02x}{:02x}".format(*RAMP_LIGHT)
    assert "a &amp; b" in text
    import xml.etree.ElementTree as ET
    ET.fromstring(svg)


def test_personas_report_table2(table2_log):
    m = build_matrix(parse_log(table2_log))
    res = factorize(m, FactorizationConfig(seed=42))
    doc = json.loads(personas_report(extract_personas(res, m), summarize_channels(m)))
    assert {p["channel_label"]: p["preferred_video_type"] for p in doc["personas"]} == TABLE2
    assert [p["component_index"] for p in doc["personas"]] == list(range(5))
    assert set(doc["channels"]) == {c.value for c in CHANNELS}


def test_personas_report_empty():
    m = ViewershipMatrix(["g"], ["Search"], ["x"], [[1]])
    doc = json.loads(personas_report([], summarize_channels(m)))
    assert doc["personas"] == [] and "Search" in doc["channels"]


def test_personas_report_round_trip(table2_log):
    m = build_matrix(parse_log(table2_log))
    res = factorize(m, FactorizationConfig(restarts=1, max_iter=300))
    raw = personas_report(extract_personas(res, m), summarize_channels(m))
    doc = json.loads(raw)
    assert json.loads(json.dumps(doc)) == doc
    assert (json.dumps(doc, indent=1) + "\n").encode() == raw
