import json
import math

import numpy as np
import pytest

import topodesc as td


def sorted_rows(d):
    return sorted(map(tuple, d.tolist()))


def test_ring_has_one_hole():
    ring = np.array([[0, 0, 0], [0, 5, 0], [0, 0, 0]], dtype=float)
    d = td.persistence(ring)
    h1 = [r for r in d if r[0] == 1 and r[2] > r[1]]
    assert [tuple(r) for r in h1] == [(1.0, 0.0, 5.0)]
    assert sum(1 for r in d if math.isinf(r[2])) == 1


def test_digit_eight_betti():
    eight = np.array(
        [[1, 1, 1, 1, 1], [1, 0, 0, 0, 1], [1, 0, 1, 0, 1], [1, 0, 0, 0, 1],
         [1, 0, 1, 0, 1], [1, 0, 0, 0, 1], [1, 1, 1, 1, 1]], dtype=float)
    assert td.betti_numbers(eight, 0.0) == (1, 2)


def test_persistence_matches_oracle():
    rng = np.random.default_rng(5)
    for _ in range(50):
        h, w = rng.integers(1, 9, size=2)
        pixels = rng.integers(0, 8, size=(h, w)).astype(float)
        for direction in ("sublevel", "superlevel"):
            assert sorted_rows(td.persistence(pixels, direction)) == sorted_rows(
                td.oracle_persistence(pixels, direction))


def test_pd_agg_of_two_lengths():
    d = np.array([[0, 0.0, 1.0], [0, 0.0, 3.0]])
    expected = [2, 1, 3, 2, 1, 1, 1.5, 2, 2.5, 1 + math.sqrt(3), 4, 10]
    np.testing.assert_allclose(td.pd_agg(d), expected, rtol=1e-15)
    assert td.PD_AGG_NAMES[0] == "count" and td.PD_AGG_NAMES[-1] == "sum_sq"
    assert not td.pd_agg(np.zeros((0, 3))).any()


def test_persistence_image_mass():
    d = np.array([[0, 0.3, 0.6], [1, 0.2, 0.9]])
    pi = td.persistence_image(d, resolution=16, sigma=0.01)
    assert pi.shape == (16, 16)
    assert pi.sum() == pytest.approx(2.0, abs=1e-9)
    with pytest.raises(ValueError):
        td.persistence_image(d, sigma=-1.0)


def test_clbp_constant_map():
    s, m, threshold = td.clbp(np.ones((20, 20)), radius=3, samples=8, encoding="riu2")
    assert s.shape == (14, 14) and m.shape == (14, 14)
    assert (s == 8).all()


def test_synthetic_features_and_boosting():
    depth, mask = td.generate_synthetic(size=192, fraction=0.166, seed=3)
    assert depth.shape == (192, 192) and mask.dtype == np.uint8
    assert 0.1 < mask.mean() < 0.25
    x, y, origins, names = td.patch_features(depth, mask, patch_size=32, patch_step=16)
    assert x.shape == (121, 256) and len(names) == 256 and origins.shape == (121, 2)
    assert set(np.unique(y)) <= {0, 1}
    model = td.RusBoost.fit(x, y.astype(np.uint8), rounds=10, seed=4)
    scores, labels = model.predict(x)
    assert ((scores >= 0.5) == (labels == 1)).all()
    assert model.feature_importance().sum() == pytest.approx(1.0)
    again = td.RusBoost.from_json(model.to_json())
    np.testing.assert_array_equal(again.predict(x)[0], scores)
    assert json.loads(model.to_json())["config"]["majority_sampling"] == "uniform"


def test_statistics():
    assert td.dsc(np.array([1, 0, 1]), np.array([1, 0, 1])) == 1.0
    assert td.dsc(np.zeros(4), np.zeros(4)) == 1.0
    r = td.wilcoxon([1, 2, 3, 4, 5, 6, 7, 8, 9, 10], [0] * 10)
    assert r["exact"] and r["p_value"] == pytest.approx(2 / 1024)
    with pytest.raises(ValueError):
        td.wilcoxon([1, 2], [0, 0])
    scores = td.fisher_scores(np.array([[0.0, 1.0], [1.0, 1.0], [4.0, 1.0], [5.0, 1.0]]),
                              np.array([0, 0, 1, 1], dtype=np.uint8))
    assert scores[0] == pytest.approx(16 / 0.5) and scores[1] == 0.0
