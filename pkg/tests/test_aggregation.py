from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zoomlens.aggregation import (
    aggregate,
    aggregate_matrix,
    crop_set_for,
    predictions_to_jsonl,
    softmax,
    validate_distributions,
)
from zoomlens.cover import CoverInstance, CoverResult, greedy_min_cover
from zoomlens.errors import DataError
from zoomlens.geometry import CropRecipe, ZoomGroup


def dists(*rows):
    return np.array(rows, dtype=np.float64)


class TestAggregate:
    def test_single_crop_identity(self):
        result = aggregate(dists([0.1, 0.7, 0.2]), "mean")
        assert result.prediction == 1
        assert np.allclose(result.fused, [0.1, 0.7, 0.2])

    def test_mean_vs_max_divergence(self):
        stack = dists([0.9, 0.1], [0.2, 0.8], [0.2, 0.8])
        mean = aggregate(stack, "mean")
        assert mean.prediction == 1
        assert mean.fused == pytest.approx([13 / 30, 17 / 30])
        mx = aggregate(stack, "max")
        assert mx.prediction == 0
        assert mx.fused == pytest.approx([0.9, 0.8])

    def test_mean_of_identical_vectors(self):
        stack = dists([0.25, 0.5, 0.25], [0.25, 0.5, 0.25])
        result = aggregate(stack, "mean")
        assert np.allclose(result.fused, [0.25, 0.5, 0.25], atol=1e-15)

    def test_mean_mode_sums_to_one(self):
        rng = np.random.default_rng(0)
        raw = rng.random((16, 50))
        stack = raw / raw.sum(axis=1, keepdims=True)
        fused = aggregate(stack, "mean").fused
        assert abs(float(fused.sum()) - 1.0) <= 1e-6

    def test_argmax_tie_breaks_low(self):
        result = aggregate(dists([0.5, 0.5]), "mean")
        assert result.prediction == 0

    def test_mean_fused_invariant_under_permutation(self):
        rng = np.random.default_rng(1)
        raw = rng.random((9, 13))
        stack = raw / raw.sum(axis=1, keepdims=True)
        perm = rng.permutation(9)
        a = aggregate(stack, "mean").fused
        b = aggregate(stack[perm], "mean").fused
        assert np.array_equal(a, b)  # exact, thanks to compensated summation

    @given(seed=st.integers(0, 10**6), k=st.integers(1, 8), c=st.integers(2, 6))
    @settings(max_examples=50, deadline=None)
    def test_max_dominates_mean_elementwise(self, seed, k, c):
        rng = np.random.default_rng(seed)
        raw = rng.random((k, c)) + 1e-9
        stack = raw / raw.sum(axis=1, keepdims=True)
        mean = aggregate(stack, "mean").fused
        mx = aggregate(stack, "max").fused
        assert np.all(mx >= mean - 1e-12)

    def test_rejects_unnormalised(self):
        with pytest.raises(DataError):
            aggregate(dists([0.5, 0.6]), "mean")

    def test_rejects_negative(self):
        with pytest.raises(DataError):
            aggregate(dists([-0.1, 1.1]), "mean")

    def test_rejects_unknown_mode(self):
        with pytest.raises(ValueError):
            aggregate(dists([1.0, 0.0]), "median")


class TestSoftmax:
    def test_rows_normalised(self):
        p = softmax(np.array([[1000.0, 999.0], [0.0, 0.0]]))
        assert np.allclose(p.sum(axis=1), 1.0)
        assert validate_distributions(p) is not None


class TestCropSetFor:
    def cover_over(self, grid, ids):
        return CoverResult(tuple(ids), tuple(1 for _ in ids), len(ids), len(ids), len(ids))

    def test_zoom_less_at_most_nine(self, default_grid):
        cover = self.cover_over(default_grid, range(324))
        ids = crop_set_for("zoom-less", default_grid, cover)
        assert 0 < len(ids) <= 9
        assert all(default_grid.group_of(t) is ZoomGroup.ZOOM_LESS for t in ids)

    def test_ten_crop_policy(self, default_grid):
        recipes = crop_set_for("10crop", default_grid)
        assert len(recipes) == 10
        assert all(isinstance(r, CropRecipe) for r in recipes)

    def test_five_crop_policy(self, default_grid):
        assert len(crop_set_for("5crop", default_grid)) == 5

    def test_zoom_in_requires_matching_cover(self, default_grid):
        cover = self.cover_over(default_grid, [0, 1, 2])  # scale 10: all zoom-out
        with pytest.raises(DataError, match="zoom-in"):
            crop_set_for("zoom-in", default_grid, cover)

    def test_zoom_policy_requires_cover(self, default_grid):
        with pytest.raises(DataError):
            crop_set_for("zoom-in", default_grid, None)

    def test_unknown_policy(self, default_grid):
        with pytest.raises(ValueError):
            crop_set_for("zoom-up", default_grid)


class TestAggregateMatrix:
    def test_demo_predictions(self, default_grid, demo_data):
        lm = demo_data["logits"]
        ci = CoverInstance.from_correctness(demo_data["bits"])
        cover = greedy_min_cover(ci)
        ids = crop_set_for("zoom-in", default_grid, cover)
        preds = aggregate_matrix(lm, ids, "mean")
        assert len(preds) == 10
        by_id = {p["image_id"]: p for p in preds}
        # zoom-in columns are planted: img_002 -> 1, img_004 -> 4, img_006 -> 7
        assert by_id["img_002"]["class"] == 1
        assert by_id["img_004"]["class"] == 4
        assert by_id["img_006"]["class"] == 7
        assert all(0.0 <= p["confidence"] <= 1.0 for p in preds)

    def test_jsonl_schema(self):
        text = predictions_to_jsonl([{"image_id": "a", "class": 3, "confidence": 0.5}])
        line = json.loads(text.strip())
        assert set(line) == {"image_id", "class", "confidence"}
