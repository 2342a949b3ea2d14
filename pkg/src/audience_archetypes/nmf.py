"""Rank-p non-negative matrix factorization by multiplicative updates.

Minimizes the Frobenius reconstruction error ``||V - W H||_F`` over
non-negative ``W`` (rows x p) and ``H`` (p x columns) with the classical
Lee-Seung multiplicative rules, best of several seeded restarts.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import BadDimensions, EmptyMatrix, InputFormatError, RankTooLarge, ShapeError
from .ingest import ViewershipMatrix

__all__ = [
    "FactorizationConfig",
    "FactorizationResult",
    "NormalizedFactors",
    "init_factors",
    "update_step",
    "factorize",
    "compute_residual",
    "normalize_factors",
]

TINY = np.finfo(np.float64).tiny


@dataclass(frozen=True)
class FactorizationConfig:
    """Solver settings.

    ``tol`` is compared against the drop in error between consecutive
    checks, relative to the error of the initial factors.
    """

    rank: int = 5
    max_iter: int = 10_000
    tol: float = 1e-9
    check_every: int = 10
    epsilon: float = 1e-12
    restarts: int = 5
    seed: int = 0
    log_scale: bool = False

    def __post_init__(self):
        if self.rank < 1:
            raise BadDimensions(f"rank must be >= 1, got {self.rank}")
        if self.max_iter < 1 or self.check_every < 1 or self.restarts < 1:
            raise BadDimensions("max_iter, check_every and restarts must be >= 1")
        if not (self.tol > 0 and self.epsilon > 0):
            raise BadDimensions("tol and epsilon must be positive")
        if not 0 <= self.seed < 2**64:
            raise BadDimensions("seed must be a 64-bit unsigned integer")


@dataclass
class FactorizationResult:
    W: np.ndarray
    H: np.ndarray
    final_error: float
    error_history: list
    iterations: int
    restart_index: int
    row_labels: list = field(default_factory=list)
    col_labels: list = field(default_factory=list)
    dropped_rows: list = field(default_factory=list)
    dropped_cols: list = field(default_factory=list)
    zero_components: list = field(default_factory=list)

    @property
    def rank(self) -> int:
        return self.W.shape[1]

    def to_dict(self) -> dict:
        return {
            "row_labels": list(self.row_labels),
            "col_labels": list(self.col_labels),
            "rank": self.rank,
            "W": self.W.tolist(),
            "H": self.H.tolist(),
            "final_error": float(self.final_error),
            "iterations": int(self.iterations),
            "restart_index": int(self.restart_index),
            "dropped_rows": list(self.dropped_rows),
            "dropped_cols": list(self.dropped_cols),
            "error_history": [float(e) for e in self.error_history],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "FactorizationResult":
        try:
            rank = int(doc["rank"])
            rows, cols = list(doc["row_labels"]), list(doc["col_labels"])
            W = np.array(doc["W"], dtype=np.float64).reshape(len(rows), rank)
            H = np.array(doc["H"], dtype=np.float64).reshape(rank, len(cols))
            return cls(
                W=W,
                H=H,
                final_error=float(doc["final_error"]),
                error_history=[float(e) for e in doc.get("error_history", [])],
                iterations=int(doc["iterations"]),
                restart_index=int(doc["restart_index"]),
                row_labels=rows,
                col_labels=cols,
                dropped_rows=list(doc.get("dropped_rows", [])),
                dropped_cols=list(doc.get("dropped_cols", [])),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputFormatError(f"invalid factors document: {exc}") from None

    @classmethod
    def from_json(cls, text) -> "FactorizationResult":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputFormatError(f"invalid JSON: {exc}") from None
        return cls.from_dict(doc)


class NormalizedFactors(NamedTuple):
    W: np.ndarray
    H: np.ndarray
    zero_columns: list


def init_factors(g, c, p, mean_v, seed):
    """Draw strictly positive starting factors.

    Entries are i.i.d. Uniform(lo, hi] with ``hi = sqrt(max(mean_v, tiny) / p)``
    and ``lo = 1e-3 * hi``, so ``W0 @ H0`` is on the scale of ``mean_v``.
    The stream comes from numpy's PCG64 generator (``default_rng(seed)``):
    all of ``W0`` first in row-major order, then ``H0``.
    """
    if min(g, c, p) < 1:
        raise BadDimensions(f"dimensions must be >= 1, got g={g}, c={c}, p={p}")
    if mean_v < 0:
        raise BadDimensions("mean_v must be non-negative")
    rng = np.random.default_rng(seed)
    hi = np.sqrt(max(float(mean_v), TINY) / p)
    lo = 1e-3 * hi
    # 1 - U with U in [0, 1) maps onto (0, 1], hence (lo, hi]
    W0 = lo + (1.0 - rng.random((g, p))) * (hi - lo)
    H0 = lo + (1.0 - rng.random((p, c))) * (hi - lo)
    return W0, H0


def _check_shapes(V, W, H):
    if V.ndim != 2 or W.ndim != 2 or H.ndim != 2:
        raise ShapeError("V, W and H must be 2-d")
    if W.shape[0] != V.shape[0] or H.shape[1] != V.shape[1] or W.shape[1] != H.shape[0]:
        raise ShapeError(f"shapes do not conform: V{V.shape}, W{W.shape}, H{H.shape}")


def update_step(V, W, H, epsilon=1e-12):
    """One multiplicative update, H first and then W with the new H.

    ::

        H' = H * (W^T V) / (W^T W H + eps)
        W' = W * (V H'^T) / (W H' H'^T + eps)
    """
    V = np.asarray(V, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    H = np.asarray(H, dtype=np.float64)
    _check_shapes(V, W, H)
    return _update(V, W, H, epsilon)


def _update(V, W, H, epsilon):
    H = H * (W.T @ V) / ((W.T @ W) @ H + epsilon)
    W = W * (V @ H.T) / (W @ (H @ H.T) + epsilon)
    return W, H


def compute_residual(V, W, H):
    """Return ``(E, ||E||_F, ||E||_F / ||V||_F)`` with ``E = V - W H``."""
    V = np.asarray(V, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    H = np.asarray(H, dtype=np.float64)
    _check_shapes(V, W, H)
    E = V - W @ H
    frob = float(np.linalg.norm(E))
    return E, frob, frob / max(float(np.linalg.norm(V)), TINY)


def normalize_factors(W, H) -> NormalizedFactors:
    """Scale each column of W to unit L1 norm, moving the scale into H.

    Columns of W that are entirely zero are left as they are and their
    indices returned in ``zero_columns``.
    """
    W = np.array(W, dtype=np.float64)
    H = np.array(H, dtype=np.float64)
    scale = W.sum(axis=0)
    zero = scale <= 0
    scale[zero] = 1.0
    return NormalizedFactors(W / scale, H * scale[:, None], [int(k) for k in np.flatnonzero(zero)])


def _run(V, config, seed):
    W, H = init_factors(V.shape[0], V.shape[1], config.rank, V.mean(), seed)
    err_first = float(np.linalg.norm(V - W @ H))
    history = [err_first]
    prev = err_first
    it = 0
    while it < config.max_iter:
        W, H = _update(V, W, H, config.epsilon)
        it += 1
        if it % config.check_every == 0 or it == config.max_iter:
            err = float(np.linalg.norm(V - W @ H))
            history.append(err)
            if (prev - err) / max(err_first, TINY) < config.tol:
                break
            prev = err
    return W, H, history, it


def factorize(V, config: FactorizationConfig | None = None) -> FactorizationResult:
    """Factorize a non-negative matrix, keeping the best of ``config.restarts`` runs.

    Parameters
    ----------
    V : ViewershipMatrix or array_like
        Non-negative matrix to factorize. Plain arrays get labels ``"0"``,
        ``"1"``, ... for rows and columns.
    config : FactorizationConfig, optional

    Returns
    -------
    FactorizationResult
        Factors with W columns L1-normalized. All-zero rows and columns of
        V are removed beforehand and listed in ``dropped_rows`` /
        ``dropped_cols``. Updates run on ``V / max(V)``, so ``epsilon`` is
        relative to the largest entry. Restart r uses seed
        ``config.seed + r``; the lowest final error wins, ties going to the
        earlier restart.

    Raises
    ------
    EmptyMatrix
        If V has no positive entry.
    RankTooLarge
        If the rank exceeds either dimension of the reduced matrix.
    """
    config = config or FactorizationConfig()
    if isinstance(V, ViewershipMatrix):
        rows, cols, data = V.row_labels, V.col_labels, V.data
    else:
        data = np.asarray(V)
        if data.ndim != 2:
            raise ShapeError("V must be 2-d")
        rows = [str(i) for i in range(data.shape[0])]
        cols = [str(j) for j in range(data.shape[1])]
    data = np.asarray(data, dtype=np.float64)
    if np.any(data < 0) or not np.all(np.isfinite(data)):
        raise InputFormatError("V must be finite and non-negative")
    if not np.any(data > 0):
        raise EmptyMatrix("matrix has no positive entries")

    keep_r = data.sum(axis=1) > 0
    keep_c = data.sum(axis=0) > 0
    data = data[np.ix_(keep_r, keep_c)]
    g, c = data.shape
    if config.rank > min(g, c):
        raise RankTooLarge(f"rank {config.rank} exceeds min(rows, cols) = {min(g, c)} after dropping zero rows/columns")
    if config.log_scale:
        data = np.log1p(data)

    # Run on V / max(V) so the epsilon guard is relative to the data scale;
    # the updates are otherwise scale-equivariant, and H absorbs the factor back.
    vmax = float(data.max())
    unit = data / vmax
    best = None
    for r in range(config.restarts):
        seed = (config.seed + r) % 2**64
        W, H, history, its = _run(unit, config, seed)
        if best is None or history[-1] < best[2][-1]:
            best = (W, H, history, its, r)
    W, H, history, its, r = best
    history = [e * vmax for e in history]
    Wn, Hn, zero = normalize_factors(W, H * vmax)
    return FactorizationResult(
        W=Wn,
        H=Hn,
        final_error=compute_residual(data, Wn, Hn)[1],
        error_history=history,
        iterations=its,
        restart_index=r,
        row_labels=[lab for lab, k in zip(rows, keep_r) if k],
        col_labels=[lab for lab, k in zip(cols, keep_c) if k],
        dropped_rows=[lab for lab, k in zip(rows, keep_r) if not k],
        dropped_cols=[lab for lab, k in zip(cols, keep_c) if not k],
        zero_components=zero,
    )
