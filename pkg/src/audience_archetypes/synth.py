"""Planted block models and synthetic analytics logs with known ground truth."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from datetime import date

import numpy as np

from .errors import BadDimensions
from .ingest import (
    CHANNELS,
    DEFAULT_DIRECT_SOURCES,
    DEFAULT_SOCIAL_DOMAINS,
    LOG_COLUMNS,
    ChannelClass,
    IngestConfig,
    ViewershipMatrix,
)

__all__ = [
    "PlantedModel",
    "DEFAULT_WATCH_SECONDS",
    "block_slices",
    "gen_planted_factors",
    "sample_views",
    "emit_log",
    "ingest_config_for",
]

# Mean watch seconds per view. Search, Referral and Social follow the
# dashboard averages (4m11s, 3m11s, 1m36s); Direct and Other are arbitrary.
DEFAULT_WATCH_SECONDS = {
    ChannelClass.SEARCH: 251,
    ChannelClass.REFERRAL: 191,
    ChannelClass.DIRECT: 140,
    ChannelClass.OTHER: 140,
    ChannelClass.SOCIAL: 96,
}

_MEDIUM = {
    ChannelClass.SEARCH: "organic",
    ChannelClass.REFERRAL: "referral",
    ChannelClass.DIRECT: "(none)",
    ChannelClass.OTHER: "email",
    ChannelClass.SOCIAL: "referral",
}


@dataclass
class PlantedModel:
    W_true: np.ndarray
    H_true: np.ndarray
    row_labels: list
    col_labels: list
    row_channels: list
    noise: str = "none"
    scale: float = 1.0
    seed: int = 0
    watch_seconds: dict = field(default_factory=lambda: dict(DEFAULT_WATCH_SECONDS))

    @property
    def rank(self):
        return self.W_true.shape[1]

    def product(self):
        return self.W_true @ self.H_true

    def to_dict(self) -> dict:
        return {
            "W_true": self.W_true.tolist(),
            "H_true": self.H_true.tolist(),
            "row_labels": list(self.row_labels),
            "col_labels": list(self.col_labels),
            "row_channels": [ChannelClass(c).value for c in self.row_channels],
            "noise": self.noise,
            "scale": self.scale,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, doc):
        return cls(
            W_true=np.array(doc["W_true"], dtype=np.float64),
            H_true=np.array(doc["H_true"], dtype=np.float64),
            row_labels=list(doc["row_labels"]),
            col_labels=list(doc["col_labels"]),
            row_channels=[ChannelClass(c) for c in doc["row_channels"]],
            noise=doc.get("noise", "none"),
            scale=float(doc.get("scale", 1.0)),
            seed=int(doc.get("seed", 0)),
        )


def block_slices(n, p):
    """Split ``range(n)`` into ``p`` contiguous blocks; the last takes the remainder."""
    size = n // p
    return [slice(k * size, (k + 1) * size if k < p - 1 else n) for k in range(p)]


def gen_planted_factors(g, c, p, seed, noise="none", scale=1.0) -> PlantedModel:
    """Draw a block-structured ground-truth factor pair.

    Row block k and column block k load on component k with weights from
    Uniform[0.5, 1.0]; every other entry is Uniform[0, 0.05]. Block k's rows
    carry channel ``CHANNELS[k % 5]``. Draws come from
    ``numpy.random.default_rng(seed)``: the off-block fill of W, then of H,
    then the in-block weights block by block (W rows before H columns).
    """
    if p < 1 or g < p or c < p:
        raise BadDimensions(f"need g >= p >= 1 and c >= p, got g={g}, c={c}, p={p}")
    if noise not in ("none", "poisson"):
        raise ValueError(f"noise must be 'none' or 'poisson', got {noise!r}")
    if not scale > 0:
        raise ValueError("scale must be positive")
    rng = np.random.default_rng(seed)
    W = rng.uniform(0.0, 0.05, size=(g, p))
    H = rng.uniform(0.0, 0.05, size=(p, c))
    row_blocks = block_slices(g, p)
    col_blocks = block_slices(c, p)
    for k in range(p):
        rb, cb = row_blocks[k], col_blocks[k]
        W[rb, k] = rng.uniform(0.5, 1.0, size=rb.stop - rb.start)
        H[k, cb] = rng.uniform(0.5, 1.0, size=cb.stop - cb.start)
    channels = []
    for k, rb in enumerate(row_blocks):
        channels.extend([CHANNELS[k % len(CHANNELS)]] * (rb.stop - rb.start))
    rw = max(3, len(str(g - 1)))
    cw = max(3, len(str(c - 1)))
    return PlantedModel(
        W_true=W,
        H_true=H,
        row_labels=[f"ref_{i:0{rw}d}" for i in range(g)],
        col_labels=[f"vid_{j:0{cw}d}" for j in range(c)],
        row_channels=channels,
        noise=noise,
        scale=float(scale),
        seed=int(seed),
    )


def sample_views(model: PlantedModel) -> ViewershipMatrix:
    """Realize a view matrix from the planted model.

    With ``noise="none"`` the matrix is ``scale * W_true @ H_true`` exactly
    (floats). With ``noise="poisson"`` each cell is an independent Poisson
    count with that mean, drawn from ``default_rng([seed, 1])`` so the
    stream is distinct from the one that built the factors. Row watch time
    is the channel's mean watch seconds times the row's view total.
    """
    lam = model.scale * model.product()
    if model.noise == "poisson":
        rng = np.random.default_rng([model.seed, 1])
        data = rng.poisson(lam).astype(np.int64)
        per_view = np.array([model.watch_seconds[ChannelClass(c)] for c in model.row_channels], dtype=np.int64)
    elif model.noise == "none":
        data = lam
        per_view = np.array([model.watch_seconds[ChannelClass(c)] for c in model.row_channels], dtype=np.float64)
    else:
        raise ValueError(f"unknown noise model {model.noise!r}")
    watch = per_view * data.sum(axis=1)
    return ViewershipMatrix(model.row_labels, model.row_channels, model.col_labels, data, watch)


def _apportion(total, weights):
    """Split integer ``total`` proportionally to integer ``weights`` (largest remainder)."""
    weights = np.asarray(weights, dtype=np.int64)
    wsum = int(weights.sum())
    if wsum == 0:
        return np.zeros(len(weights), dtype=np.int64)
    exact = [total * int(w) for w in weights]
    base = np.array([e // wsum for e in exact], dtype=np.int64)
    rem = [e % wsum for e in exact]
    short = total - int(base.sum())
    # stable sort: on equal remainders the earlier cell gets the extra second
    for i in sorted(range(len(rem)), key=lambda i: -rem[i])[:short]:
        base[i] += 1
    return base


def emit_log(matrix: ViewershipMatrix, day=date(2017, 2, 5)) -> bytes:
    """Write the matrix as an ingestible CSV log, one row per nonzero cell.

    Cell values are rounded to integers. Each row's watch seconds (also
    rounded) are apportioned over its cells in proportion to views, exactly
    preserving the row total. The medium encodes the row's channel; use
    :func:`ingest_config_for` when ingesting so Social and Direct rows with
    arbitrary source labels classify back to their channel.
    """
    if isinstance(day, str):
        day = date.fromisoformat(day)
    views = np.rint(np.asarray(matrix.data, dtype=np.float64)).astype(np.int64)
    watch = np.rint(np.asarray(matrix.row_watch_seconds, dtype=np.float64)).astype(np.int64)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(LOG_COLUMNS)
    stamp = day.isoformat()
    for i, source in enumerate(matrix.row_labels):
        medium = _MEDIUM[matrix.row_channels[i]]
        row = views[i]
        seconds = _apportion(int(watch[i]), row)
        for j in np.flatnonzero(row):
            writer.writerow([stamp, source, medium, matrix.col_labels[j], int(row[j]), int(seconds[j])])
    return out.getvalue().encode("utf-8")


def ingest_config_for(matrix: ViewershipMatrix) -> IngestConfig:
    """Ingest configuration under which this matrix's rows keep their channels."""
    social = {lab.lower() for lab, ch in zip(matrix.row_labels, matrix.row_channels) if ch is ChannelClass.SOCIAL}
    direct = {lab.lower() for lab, ch in zip(matrix.row_labels, matrix.row_channels) if ch is ChannelClass.DIRECT}
    return IngestConfig(
        social_domains=DEFAULT_SOCIAL_DOMAINS | social,
        direct_sources=DEFAULT_DIRECT_SOURCES | direct,
    )
