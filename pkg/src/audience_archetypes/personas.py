"""Interpret factor matrices as audience archetypes."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import BadComponent, LabelMismatch, ShapeError, TooManyComponents
from .ingest import CHANNELS, ChannelClass, ViewershipMatrix
from .nmf import FactorizationResult

__all__ = [
    "Persona",
    "MAX_EXHAUSTIVE",
    "channel_scores",
    "label_components",
    "top_referrals",
    "top_video_types",
    "extract_personas",
    "align_components",
    "personas_to_json",
    "personas_from_json",
]

# 8! = 40320 permutations keeps the brute-force searches cheap.
MAX_EXHAUSTIVE = 8


@dataclass
class Persona:
    component_index: int
    channel_label: ChannelClass
    channel_scores: dict
    top_referrals: list
    top_video_types: list

    @property
    def preferred_video_type(self):
        return self.top_video_types[0][0] if self.top_video_types else None

    def to_dict(self) -> dict:
        return {
            "component_index": self.component_index,
            "channel_label": self.channel_label.value,
            "channel_scores": {ch.value: float(self.channel_scores.get(ch, 0.0)) for ch in CHANNELS},
            "top_referrals": [[lab, float(w)] for lab, w in self.top_referrals],
            "top_video_types": [[lab, float(w)] for lab, w in self.top_video_types],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Persona":
        return cls(
            component_index=int(doc["component_index"]),
            channel_label=ChannelClass(doc["channel_label"]),
            channel_scores={ChannelClass(k): float(v) for k, v in doc["channel_scores"].items()},
            top_referrals=[(lab, float(w)) for lab, w in doc["top_referrals"]],
            top_video_types=[(lab, float(w)) for lab, w in doc["top_video_types"]],
        )


def personas_to_json(personas) -> str:
    return json.dumps([p.to_dict() for p in personas], indent=1) + "\n"


def personas_from_json(text) -> list:
    return [Persona.from_dict(d) for d in json.loads(text)]


def channel_scores(W, row_channels) -> np.ndarray:
    """Summed W mass per channel, shape (5, p), rows in channel declaration order."""
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2 or len(row_channels) != W.shape[0]:
        raise ShapeError(f"{len(row_channels)} row channels for W of shape {W.shape}")
    scores = np.zeros((len(CHANNELS), W.shape[1]))
    for i, ch in enumerate(row_channels):
        scores[ChannelClass(ch).order] += W[i]
    return scores


def label_components(W, row_channels, mode="independent"):
    """Assign a channel to every component (column) of W.

    ``independent`` takes each component's argmax channel, ties going to
    the earlier channel in declaration order. ``one_to_one`` searches all
    injective assignments of present channels to components for the
    highest total score; ties go to the lexicographically smallest
    assignment. ``auto`` uses ``one_to_one`` when the number of components
    equals the number of channels present and ``independent`` otherwise.
    """
    scores = channel_scores(W, row_channels)
    p = scores.shape[1]
    present = sorted({ChannelClass(ch).order for ch in row_channels})
    if mode == "auto":
        mode = "one_to_one" if p == len(present) else "independent"
    if mode == "independent":
        # np.argmax returns the first maximum, i.e. declaration order on ties
        return [CHANNELS[int(np.argmax(scores[:, k]))] for k in range(p)]
    if mode != "one_to_one":
        raise ValueError(f"unknown labeling mode {mode!r}")
    if p > MAX_EXHAUSTIVE:
        raise TooManyComponents(f"one_to_one labeling supports at most {MAX_EXHAUSTIVE} components, got {p}")
    if p > len(present):
        raise TooManyComponents(f"one_to_one labeling needs {p} distinct channels, only {len(present)} present")
    best, best_total = None, -np.inf
    cols = np.arange(p)
    for perm in itertools.permutations(present, p):
        # fsum is order-independent, so exact ties stay exact
        total = math.fsum(scores[list(perm), cols])
        if total > best_total:
            best, best_total = perm, total
    return [CHANNELS[ch] for ch in best]


def _top(values, labels, n):
    if n < 1:
        raise ValueError("count must be >= 1")
    order = sorted(range(len(labels)), key=lambda i: (-values[i], labels[i]))
    return [(labels[i], float(values[i])) for i in order[:n]]


def top_referrals(W, row_labels, k, n=15):
    """The ``n`` heaviest referrals of component ``k``, descending; ties by label."""
    W = np.asarray(W)
    if not 0 <= k < W.shape[1]:
        raise BadComponent(f"component {k} out of range [0, {W.shape[1]})")
    return _top(W[:, k], list(row_labels), n)


def top_video_types(H, col_labels, k, n=5):
    """The ``n`` heaviest video types of component ``k``, descending; ties by label."""
    H = np.asarray(H)
    if not 0 <= k < H.shape[0]:
        raise BadComponent(f"component {k} out of range [0, {H.shape[0]})")
    return _top(H[k], list(col_labels), n)


def _row_channels_for(result: FactorizationResult, matrix: ViewershipMatrix):
    index = {lab: i for i, lab in enumerate(matrix.row_labels)}
    missing = [lab for lab in result.row_labels if lab not in index]
    if missing:
        raise LabelMismatch(f"factor rows not in matrix: {missing[:3]}")
    if set(result.row_labels) | set(result.dropped_rows) != set(matrix.row_labels):
        raise LabelMismatch("factor row labels do not cover the matrix rows")
    if set(result.col_labels) | set(result.dropped_cols) != set(matrix.col_labels):
        raise LabelMismatch("factor column labels do not cover the matrix columns")
    return [matrix.row_channels[index[lab]] for lab in result.row_labels]


def extract_personas(result: FactorizationResult, matrix: ViewershipMatrix,
                     n_referrals=15, n_videos=5, mode="auto") -> list:
    """Build one :class:`Persona` per component, ordered by component index.

    Rows are matched to channels through their labels, so the row order of
    ``matrix`` does not matter.
    """
    channels = _row_channels_for(result, matrix)
    labels = label_components(result.W, channels, mode)
    scores = channel_scores(result.W, channels)
    personas = []
    for k in range(result.rank):
        personas.append(
            Persona(
                component_index=k,
                channel_label=labels[k],
                channel_scores={ch: float(scores[ch.order, k]) for ch in CHANNELS},
                top_referrals=top_referrals(result.W, result.row_labels, k, n_referrals),
                top_video_types=top_video_types(result.H, result.col_labels, k, n_videos),
            )
        )
    return personas


def _cosine_matrix(A, B):
    """C[a, b] = cosine(A[:, a], B[:, b]); zero columns give 0."""
    na = np.linalg.norm(A, axis=0)
    nb = np.linalg.norm(B, axis=0)
    dots = A.T @ B
    denom = np.outer(na, nb)
    with np.errstate(invalid="ignore", divide="ignore"):
        C = np.where(denom > 0, dots / np.where(denom > 0, denom, 1.0), 0.0)
    return C


def align_components(W_est, W_true):
    """Match estimated components to true ones by exhaustive search.

    Returns
    -------
    perm : tuple of int
        ``perm[k]`` is the estimated column matched with true column ``k``.
    mean_cosine : float
        Mean cosine similarity over the matched pairs.
    """
    W_est = np.asarray(W_est, dtype=np.float64)
    W_true = np.asarray(W_true, dtype=np.float64)
    if W_est.shape != W_true.shape or W_est.ndim != 2:
        raise ShapeError(f"shape mismatch: {W_est.shape} vs {W_true.shape}")
    p = W_true.shape[1]
    if p > MAX_EXHAUSTIVE:
        raise TooManyComponents(f"alignment supports at most {MAX_EXHAUSTIVE} components, got {p}")
    C = _cosine_matrix(W_est, W_true)
    cols = np.arange(p)
    best, best_total = None, -np.inf
    for perm in itertools.permutations(range(p)):
        total = math.fsum(C[list(perm), cols])
        if total > best_total:
            best, best_total = perm, total
    return tuple(int(i) for i in best), float(best_total / p)
