import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blobkit.errors import InvalidArgumentError, ParseError
from blobkit.evaluation import (
    BenchmarkCase,
    CaseResult,
    NumericalSpec,
    SpatialSpec,
    aggregate,
    controllability_miou,
    detections_to_layout,
    load_benchmark,
    report_to_json,
    score_numerical,
    score_spatial,
)
from blobkit.geometry import BinaryMask, Blob, BlobLayout, BlobParameter, Canvas, rasterize

CANVAS = Canvas(512, 512)


def layout_of(*categories, xs=None, ys=None):
    xs = xs or [60 + 90 * i for i in range(len(categories))]
    ys = ys or [80 + 70 * i for i in range(len(categories))]
    blobs = tuple(
        Blob(BlobParameter(x, y, 40, 20, 0.0), cat, cat)
        for cat, x, y in zip(categories, xs, ys)
    )
    return BlobLayout(CANVAS, blobs)


class TestScoreNumerical:
    def test_exact_match(self):
        r = score_numerical(NumericalSpec({"cat": 2}), layout_of("cat", "cat"))
        assert (r.precision, r.recall, r.accurate) == (1.0, 1.0, True)

    def test_overcount(self):
        r = score_numerical(NumericalSpec({"cat": 2}), layout_of("cat", "cat", "cat"))
        assert r.precision == pytest.approx(2 / 3)
        assert r.recall == 1.0
        assert not r.accurate

    def test_missing_category(self):
        r = score_numerical(NumericalSpec({"cat": 2, "dog": 1}), layout_of("cat", "cat"))
        assert r.precision == 1.0
        assert r.recall == pytest.approx(2 / 3)
        assert not r.accurate
        assert "dog" in r.detail

    def test_extra_category_breaks_accuracy(self):
        r = score_numerical(NumericalSpec({"cat": 1}), layout_of("cat", "dog"))
        assert not r.accurate
        assert "extra categories: dog" in r.detail

    def test_empty_layout(self):
        r = score_numerical(NumericalSpec({"cat": 1}), BlobLayout(CANVAS))
        assert (r.precision, r.recall, r.accurate) == (0.0, 0.0, False)

    def test_case_insensitive_hyphen_space(self):
        r = score_numerical(NumericalSpec({"Teddy Bear": 1}), layout_of("teddy-bear"))
        assert r.accurate

    def test_reorder_invariance(self):
        spec = NumericalSpec({"cat": 1, "dog": 2})
        r1 = score_numerical(spec, layout_of("dog", "cat", "dog"))
        r2 = score_numerical(spec, layout_of("dog", "dog", "cat"))
        assert (r1.precision, r1.recall, r1.accurate) == (r2.precision, r2.recall, r2.accurate)

    def test_parameters_do_not_matter(self):
        spec = NumericalSpec({"cat": 1})
        r1 = score_numerical(spec, layout_of("cat", xs=[50], ys=[50]))
        r2 = score_numerical(spec, layout_of("cat", xs=[400], ys=[400]))
        assert (r1.precision, r1.recall, r1.accurate) == (r2.precision, r2.recall, r2.accurate)

    def test_spec_validation(self):
        with pytest.raises(InvalidArgumentError):
            NumericalSpec({})
        with pytest.raises(InvalidArgumentError):
            NumericalSpec({"cat": 0})
        with pytest.raises(InvalidArgumentError):
            NumericalSpec({"cat": 1.5})

    @settings(max_examples=40)
    @given(
        want=st.integers(1, 5),
        got=st.integers(0, 8),
    )
    def test_single_category_formulas(self, want, got):
        layout = layout_of(*(["cat"] * got)) if got else BlobLayout(CANVAS)
        r = score_numerical(NumericalSpec({"cat": want}), layout)
        matched = min(want, got)
        assert r.precision == (matched / got if got else 0.0)
        assert r.recall == matched / want
        assert r.accurate == (want == got)
        assert 0.0 <= r.precision <= 1.0 and 0.0 <= r.recall <= 1.0
        if r.accurate:
            assert r.precision == r.recall == 1.0


class TestScoreSpatial:
    def test_left_of_holds(self):
        layout = layout_of("A", "B", xs=[100, 300], ys=[100, 100])
        r = score_spatial(SpatialSpec("A", "left-of", "B"), layout)
        assert r.accurate
        assert r.precision is None

    def test_right_of_fails_when_left(self):
        layout = layout_of("A", "B", xs=[100, 300], ys=[100, 100])
        assert not score_spatial(SpatialSpec("A", "right-of", "B"), layout).accurate

    def test_above_below_use_y_down(self):
        layout = layout_of("A", "B", xs=[100, 100], ys=[50, 400])
        assert score_spatial(SpatialSpec("A", "above", "B"), layout).accurate
        assert score_spatial(SpatialSpec("B", "below", "A"), layout).accurate

    def test_missing_object(self):
        layout = layout_of("A")
        r = score_spatial(SpatialSpec("A", "left-of", "B"), layout)
        assert not r.accurate
        assert r.detail == "object category absent"

    def test_missing_subject(self):
        layout = layout_of("B")
        r = score_spatial(SpatialSpec("A", "left-of", "B"), layout)
        assert not r.accurate
        assert r.detail == "subject category absent"

    def test_exact_tie_fails(self):
        layout = layout_of("A", "B", xs=[200, 200], ys=[100, 300])
        r = score_spatial(SpatialSpec("A", "left-of", "B"), layout)
        assert not r.accurate
        assert r.detail == "tie"

    def test_same_blob_is_flagged_tie(self):
        layout = layout_of("A")
        r = score_spatial(SpatialSpec("A", "left-of", "A"), layout)
        assert not r.accurate
        assert r.detail == "tie (subject equals object)"

    def test_first_blob_per_category_wins(self):
        layout = layout_of("A", "A", "B", xs=[100, 500, 300], ys=[100, 100, 100])
        # first A at cx=100 is left of B at cx=300; second A would not be
        assert score_spatial(SpatialSpec("A", "left-of", "B"), layout).accurate

    def test_radii_and_angle_irrelevant(self):
        blobs = (
            Blob(BlobParameter(100, 100, 150, 20, 1.0), "A", "A"),
            Blob(BlobParameter(300, 100, 10, 5, 0.2), "B", "B"),
        )
        layout = BlobLayout(CANVAS, blobs)
        assert score_spatial(SpatialSpec("A", "left-of", "B"), layout).accurate

    def test_relation_validation(self):
        with pytest.raises(InvalidArgumentError):
            SpatialSpec("A", "inside", "B")


class TestControllabilityMiou:
    def test_self_rasterized_pairs_are_one(self):
        params = [
            BlobParameter(100, 100, 50, 25, 0.3),
            BlobParameter(300, 300, 80, 40, 1.2),
        ]
        pairs = [(rasterize(p, CANVAS), p) for p in params]
        assert controllability_miou(pairs, CANVAS) == 1.0

    def test_zero_masks_score_zero(self):
        pairs = [(BinaryMask.zeros(512, 512), BlobParameter(100, 100, 50, 25))]
        assert controllability_miou(pairs, CANVAS) == 0.0

    def test_offset_circles_match_lens_oracle(self):
        mask = rasterize(BlobParameter(206, 256, 100, 100), CANVAS)
        value = controllability_miou([(mask, BlobParameter(306, 256, 100, 100))], CANVAS)
        assert value == pytest.approx(0.2430, abs=0.01)

    def test_empty_union_flagged(self):
        pairs = [
            (BinaryMask.zeros(512, 512), BlobParameter(-4000, -4000, 10, 5)),
            (rasterize(BlobParameter(100, 100, 50, 25), CANVAS), BlobParameter(100, 100, 50, 25)),
        ]
        mean, per_pair, flagged = controllability_miou(pairs, CANVAS, return_details=True)
        assert flagged == (0,)
        assert per_pair == (0.0, 1.0)
        assert mean == 0.5

    def test_size_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            controllability_miou(
                [(BinaryMask.zeros(64, 64), BlobParameter(10, 10, 5, 5))], CANVAS
            )

    def test_empty_pairs(self):
        with pytest.raises(InvalidArgumentError):
            controllability_miou([], CANVAS)


class TestAggregate:
    def test_single_accurate_case(self):
        report = aggregate([CaseResult("a", accurate=True)])
        assert report.accuracy == 1.0
        assert report.mean_precision is None

    def test_half_accurate(self):
        report = aggregate(
            [CaseResult("a", accurate=True), CaseResult("b", accurate=False)]
        )
        assert report.accuracy == 0.5

    def test_numerical_means_over_numerical_only(self):
        results = [
            CaseResult("n1", accurate=True, precision=1.0, recall=1.0),
            CaseResult("n2", accurate=False, precision=0.5, recall=0.25),
            CaseResult("s1", accurate=True),  # spatial: no P/R
        ]
        report = aggregate(results)
        assert report.mean_precision == pytest.approx(0.75)
        assert report.mean_recall == pytest.approx(0.625)
        assert report.accuracy == pytest.approx(2 / 3)

    def test_hand_computed_four_case_fixture(self):
        results = [
            CaseResult("a", accurate=True, precision=1.0, recall=1.0),
            CaseResult("b", accurate=False, precision=2 / 3, recall=1.0),
            CaseResult("c", accurate=False, precision=1.0, recall=2 / 3),
            CaseResult("d", accurate=False, precision=0.0, recall=0.0),
        ]
        report = aggregate(results)
        assert report.n_cases == 4
        assert report.accuracy == 0.25
        assert report.mean_precision == pytest.approx((1 + 2 / 3 + 1 + 0) / 4)
        assert report.mean_recall == pytest.approx((1 + 1 + 2 / 3 + 0) / 4)

    def test_permutation_invariant(self):
        results = [
            CaseResult("a", accurate=True, precision=1.0, recall=0.5),
            CaseResult("b", accurate=False, precision=0.25, recall=1.0),
            CaseResult("c", accurate=True),
        ]
        r1 = aggregate(results)
        r2 = aggregate(results[::-1])
        assert (r1.accuracy, r1.mean_precision, r1.mean_recall) == (
            r2.accuracy,
            r2.mean_precision,
            r2.mean_recall,
        )

    def test_empty_rejected(self):
        with pytest.raises(InvalidArgumentError):
            aggregate([])


class TestDetectionsAdapter:
    def test_boxes_become_ellipses(self):
        layout = detections_to_layout([("cat", 100, 120, 80, 40)], CANVAS)
        p = layout.blobs[0].parameter
        assert (p.cx, p.cy, p.a, p.b, p.theta) == (100, 120, 40, 20, 0.0)

    def test_tall_box_swaps_axes(self):
        layout = detections_to_layout([("cat", 100, 120, 40, 80)], CANVAS)
        p = layout.blobs[0].parameter
        assert (p.a, p.b) == (40, 20)
        assert p.theta == pytest.approx(math.pi / 2)

    def test_dict_form(self):
        layout = detections_to_layout(
            [{"category": "dog", "cx": 10, "cy": 20, "w": 8, "h": 6}], CANVAS
        )
        assert layout.blobs[0].category == "dog"

    def test_scoring_path_integration(self):
        layout = detections_to_layout(
            [("cat", 100, 100, 50, 30), ("cat", 300, 100, 50, 30)], CANVAS
        )
        assert score_numerical(NumericalSpec({"cat": 2}), layout).accurate

    def test_bad_detection(self):
        with pytest.raises(InvalidArgumentError):
            detections_to_layout([("cat", 1, 2, 0, 5)], CANVAS)


class TestBenchmarkIO:
    BENCH = "\n".join(
        [
            json.dumps(
                {
                    "id": "n1",
                    "type": "numerical",
                    "spec": {"counts": {"cat": 2}},
                    "caption": "two cats",
                }
            ),
            json.dumps(
                {
                    "id": "s1",
                    "type": "spatial",
                    "spec": {"subject": "cat", "relation": "left-of", "object": "dog"},
                    "caption": "a cat to the left of a dog",
                }
            ),
        ]
    )

    def test_load_and_score(self):
        cases = load_benchmark(self.BENCH)
        assert [c.case_id for c in cases] == ["n1", "s1"]
        layout = layout_of("cat", "cat")
        r = cases[0].score(layout)
        assert r.accurate
        r = cases[1].score(layout_of("cat", "dog", xs=[100, 300], ys=[100, 100]))
        assert r.accurate

    def test_two_case_accuracy_half(self):
        cases = load_benchmark(self.BENCH)
        layout_good = layout_of("cat", "cat")
        layout_bad = layout_of("dog", "cat", xs=[100, 300], ys=[100, 100])
        report = aggregate([cases[0].score(layout_good), cases[1].score(layout_bad)])
        assert report.accuracy == 0.5

    def test_bad_json_line(self):
        with pytest.raises(ParseError, match="line 1"):
            load_benchmark("{broken")

    def test_unknown_type(self):
        line = json.dumps({"id": "x", "type": "volumetric", "spec": {}})
        with pytest.raises(ParseError, match="unknown case type"):
            load_benchmark(line)

    def test_empty_benchmark(self):
        with pytest.raises(ParseError):
            load_benchmark("\n\n")

    def test_report_json_shape(self):
        report = aggregate(
            [
                CaseResult("a", accurate=True, precision=1.0, recall=1.0),
                CaseResult("b", accurate=False),
            ]
        )
        doc = json.loads(report_to_json(report))
        assert doc["n_cases"] == 2
        assert doc["accuracy"] == 0.5
        assert doc["per_case"][1]["precision"] is None
