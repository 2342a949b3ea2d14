# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: light
# ---

# # Ingesting an analytics log
#
# A log has one row per (date, source, medium, video type) tally. Sources
# are grouped into five acquisition channels and aggregated into a
# source x video-type matrix of view counts.

# +
from pathlib import Path

from audience_archetypes import CHANNELS, build_matrix, classify_channel, parse_log, summarize_channels

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"
# -

# Channel grouping is a pure function of source and medium.

for source, medium in [("google", "organic"), ("t.co", "referral"), ("(direct)", "(none)"),
                       ("parliament.uk", "referral"), ("newsletter", "email")]:
    print(f"{source:>16} / {medium:<9} -> {classify_channel(source, medium)}")

# +
records = parse_log((DATA / "dashboard_log.csv").read_bytes())
matrix = build_matrix(records)
print(f"{len(records)} records -> {matrix.shape[0]} sources x {matrix.shape[1]} video types")
print("total views:", matrix.total_views(), "=", sum(r.views for r in records))
# -

# The channel summary reports each channel's share of views and its watch
# seconds per view. This fixture was built so Direct, Referral, Social and
# Search take 42 / 22 / 20 / 14.7 percent, leaving 1.3 for Other.

summary = summarize_channels(matrix)
for ch in CHANNELS:
    print(f"{ch.value:<9}{summary.views[ch]:>6} views  {summary.share_percent[ch]:5.1f}%  "
          f"{summary.avg_watch_seconds[ch]:6.1f} s/view")
