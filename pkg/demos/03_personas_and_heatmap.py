# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: light
# ---

# # From factors to archetypes
#
# The crafted log in ``tests/data/table2_log.csv`` has each channel's sources
# concentrating on one kind of Parliamentary video. After a rank-5
# factorization, each component gets a channel label from the W mass of its
# referral rows, and its preferred video type from the top of its H row.

# +
import json
import tempfile
from pathlib import Path

from audience_archetypes import (
    FactorizationConfig,
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

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"
matrix = build_matrix(parse_log((DATA / "table2_log.csv").read_bytes()))
res = factorize(matrix, FactorizationConfig(seed=42))
personas = extract_personas(res, matrix, n_referrals=3, n_videos=2)
# -

for p in personas:
    refs = ", ".join(lab for lab, _ in p.top_referrals)
    print(f"{p.component_index}: {p.channel_label.value:<9} {p.preferred_video_type}\n   via {refs}")

# The heatmap shows the most-viewed referrals (at most 15) against the
# components, with each row normalized to sum to one.

heat = heatmap_data(res, matrix)
print(heatmap_csv(heat).decode())

# +
out = Path(tempfile.mkdtemp(prefix="archetypes-"))
(out / "heatmap.svg").write_bytes(render_svg(heat))
(out / "report.json").write_bytes(personas_report(personas, summarize_channels(matrix)))
print("wrote", sorted(p.name for p in out.iterdir()), "to", out)
print(json.loads((out / "report.json").read_text())["personas"][0]["preferred_video_type"])
