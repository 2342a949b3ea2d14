import csv
import io
import json

import numpy as np
import pytest

from audience_archetypes import BadDimensions, CHANNELS, ChannelClass, ViewershipMatrix, build_matrix, parse_log
from audience_archetypes.synth import (
    DEFAULT_WATCH_SECONDS,
    PlantedModel,
    block_slices,
    emit_log,
    gen_planted_factors,
    ingest_config_for,
    sample_views,
)


def test_deterministic():
    a, b = gen_planted_factors(10, 10, 5, 7), gen_planted_factors(10, 10, 5, 7)
    assert np.array_equal(a.W_true, b.W_true) and np.array_equal(a.H_true, b.H_true)
    assert not np.array_equal(a.W_true, gen_planted_factors(10, 10, 5, 8).W_true)


@pytest.mark.parametrize("seed", range(5))
def test_block_bounds(seed):
    m = gen_planted_factors(10, 10, 5, seed)
    for k, (rb, cb) in enumerate(zip(block_slices(10, 5), block_slices(10, 5))):
        assert np.all(m.W_true[rb, k] >= 0.5)
        assert np.all(np.delete(m.W_true[rb], k, axis=1) <= 0.05)
        assert np.all(m.H_true[k, cb] >= 0.5)
        assert np.all(np.delete(m.H_true[:, cb], k, axis=0) <= 0.05)


def test_block_remainder_and_labels():
    assert block_slices(12, 5)[-1] == slice(8, 12)
    m = gen_planted_factors(12, 7, 5, 0)
    assert m.row_labels[0] == "ref_000" and m.col_labels[-1] == "vid_006"
    assert m.row_channels[:2] == [ChannelClass.SEARCH] * 2
    assert m.row_channels[8:] == [ChannelClass.SOCIAL] * 4
    # more blocks than channels cycle back through the declaration order
    m7 = gen_planted_factors(7, 7, 7, 0)
    assert m7.row_channels == list(CHANNELS) + [CHANNELS[0], CHANNELS[1]]


def test_bad_dimensions():
    with pytest.raises(BadDimensions):
        gen_planted_factors(4, 10, 5, 0)
    with pytest.raises(BadDimensions):
        gen_planted_factors(10, 4, 5, 0)


def test_noiseless_rank():
    m = gen_planted_factors(100, 200, 5, 1)
    V = sample_views(m)
    assert np.array_equal(V.data, m.product())
    assert np.linalg.matrix_rank(V.data) <= 5


def test_poisson_mean_within_three_standard_errors():
    m = gen_planted_factors(100, 200, 5, 3, noise="poisson", scale=50)
    V = sample_views(m)
    lam = 50 * m.product()
    mask = lam >= 1
    ratio = V.data[mask] / lam[mask]
    # Var(X / lam) = 1 / lam for X ~ Poisson(lam)
    se = np.sqrt(np.sum(1.0 / lam[mask])) / mask.sum()
    assert abs(ratio.mean() - 1.0) <= 3 * se
    assert V.data.dtype.kind == "i"


def test_poisson_deterministic():
    m = gen_planted_factors(20, 20, 5, 3, noise="poisson", scale=50)
    assert np.array_equal(sample_views(m).data, sample_views(m).data)


def test_watch_seconds_from_channel_means():
    m = gen_planted_factors(10, 10, 5, 0, noise="poisson", scale=40)
    V = sample_views(m)
    for i, ch in enumerate(V.row_channels):
        assert V.row_watch_seconds[i] == DEFAULT_WATCH_SECONDS[ch] * V.data[i].sum()


def test_emit_single_cell():
    m = ViewershipMatrix(["google"], ["Search"], ["house of lords"], [[5]], [50])
    rows = list(csv.reader(io.StringIO(emit_log(m).decode())))
    assert rows[0] == ["date", "source", "medium", "video_type", "views", "watch_seconds"]
    assert rows[1][1:] == ["google", "organic", "house of lords", "5", "50"]
    assert len(rows) == 2


def test_emit_zero_matrix_is_header_only():
    m = ViewershipMatrix(["a", "b"], ["Search", "Other"], ["x"], [[0], [0]])
    assert emit_log(m).decode().strip().splitlines() == ["date,source,medium,video_type,views,watch_seconds"]


def test_emit_media_per_channel():
    m = ViewershipMatrix(["g", "p", "(direct)", "n", "t.co"], list(CHANNELS), ["v"], [[1]] * 5)
    media = [r.medium for r in parse_log(emit_log(m))]
    assert media == ["organic", "referral", "(none)", "email", "referral"]
    assert build_matrix(parse_log(emit_log(m))).row_channels == list(CHANNELS)


def test_watch_apportioned_exactly():
    m = ViewershipMatrix(["a"], ["Referral"], ["x", "y", "z"], [[1, 1, 1]], [100])
    recs = parse_log(emit_log(m))
    assert sum(r.watch_seconds for r in recs) == 100
    assert sorted(r.watch_seconds for r in recs) == [33, 33, 34]


@pytest.mark.parametrize("seed", range(5))
def test_round_trip(seed):
    m = sample_views(gen_planted_factors(30, 40, 5, seed, noise="poisson", scale=20))
    back = build_matrix(parse_log(emit_log(m, "2016-06-24")), ingest_config_for(m))
    assert m.equals(back)


def test_truth_json():
    m = gen_planted_factors(10, 12, 5, 4, noise="poisson", scale=50)
    doc = json.loads(m.to_json())
    assert {"W_true", "H_true", "row_labels", "col_labels", "row_channels"} <= set(doc)
    back = PlantedModel.from_dict(doc)
    assert np.array_equal(back.W_true, m.W_true) and back.row_channels == m.row_channels
