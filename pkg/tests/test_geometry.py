import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blobkit.errors import DegenerateInputError, InvalidArgumentError
from blobkit.geometry import (
    AddBlob,
    BinaryMask,
    Blob,
    BlobLayout,
    BlobParameter,
    Canvas,
    MoveBlob,
    RemoveBlob,
    ResizeBlob,
    RotateBlob,
    SetDescription,
    canonicalize_angle,
    contains_point,
    edit_layout,
    ellipse_iou,
    mask_iou,
    rasterize,
)

CANVAS = Canvas(512, 512)


def circle_lens_iou(r: float, d: float) -> float:
    """Analytic IOU of two equal circles with center distance d < 2r."""
    lens = 2 * r * r * math.acos(d / (2 * r)) - (d / 2) * math.sqrt(4 * r * r - d * d)
    return lens / (2 * math.pi * r * r - lens)


# strategy: ellipse fully inside the 512x512 canvas with a small margin
def inside_ellipses(min_axis=10.0, max_axis=200.0):
    return st.builds(
        lambda a, b, t, fx, fy: BlobParameter(
            cx=a + 2 + fx * (508.0 - 2 * a),
            cy=a + 2 + fy * (508.0 - 2 * a),
            a=a,
            b=min(b, a),
            theta=t,
        ),
        a=st.floats(min_axis, max_axis),
        b=st.floats(min_axis, max_axis),
        t=st.floats(-math.pi, math.pi),
        fx=st.floats(0.0, 1.0),
        fy=st.floats(0.0, 1.0),
    )


class TestCanonicalizeAngle:
    def test_already_canonical(self):
        assert canonicalize_angle(0.0) == 0.0

    def test_wraps_down(self):
        assert canonicalize_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)

    def test_appendix_degrees_example(self):
        # 96 degrees, the teddy-bear angle
        assert canonicalize_angle(math.radians(96)) == pytest.approx(1.67552, abs=1e-5)

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidArgumentError):
            canonicalize_angle(float("nan"))
        with pytest.raises(InvalidArgumentError):
            canonicalize_angle(float("inf"))

    @given(st.floats(-50.0, 50.0))
    def test_range_and_congruence(self, theta):
        t = canonicalize_angle(theta)
        assert -math.pi < t <= math.pi
        assert math.sin(t) == pytest.approx(math.sin(theta), abs=1e-9)
        assert math.cos(t) == pytest.approx(math.cos(theta), abs=1e-9)


class TestBlobParameter:
    def test_axis_swap_normalization(self):
        p = BlobParameter(100, 100, a=30, b=80, theta=0.0)
        assert p.a == 80 and p.b == 30
        assert p.theta == pytest.approx(math.pi / 2)

    def test_rejects_nonpositive_radii(self):
        with pytest.raises(InvalidArgumentError):
            BlobParameter(0, 0, a=0, b=10)
        with pytest.raises(InvalidArgumentError):
            BlobParameter(0, 0, a=10, b=-1)

    def test_center_may_leave_canvas(self):
        BlobParameter(-300, 700, a=50, b=20)  # no raise


class TestContainsPoint:
    def test_center_inside(self):
        p = BlobParameter(256, 256, 120, 60, 0.5)
        assert contains_point(p, 256, 256)

    def test_beyond_major_axis(self):
        p = BlobParameter(256, 256, 120, 60, 0.0)
        assert not contains_point(p, 256 + 121, 256)

    def test_diagonal_point_in_circle(self):
        # 70*sqrt(2) ~ 98.99 < 100
        p = BlobParameter(256, 256, 100, 100)
        assert contains_point(p, 256 + 70, 256 + 70)

    def test_boundary_counts_as_inside(self):
        p = BlobParameter(256, 256, 100, 50, 0.0)
        assert contains_point(p, 356, 256)

    @given(
        inside_ellipses(),
        st.floats(0.0, 512.0),
        st.floats(0.0, 512.0),
    )
    def test_axis_swap_invariance(self, p, x, y):
        swapped = BlobParameter(p.cx, p.cy, a=p.b, b=p.a, theta=p.theta + math.pi / 2)
        assert contains_point(p, x, y) == contains_point(swapped, x, y)


class TestRasterize:
    def test_big_disk_area(self):
        p = BlobParameter(256, 256, 256, 256)
        count = rasterize(p, CANVAS).foreground_count()
        assert count == pytest.approx(math.pi * 256**2, rel=0.02)

    def test_fully_outside_is_empty(self):
        p = BlobParameter(-1000, 256, 50, 20)
        assert rasterize(p, CANVAS).foreground_count() == 0

    def test_pi_rotation_bit_exact_fixture(self):
        p1 = BlobParameter(256, 256, 120, 60, math.radians(30))
        p2 = BlobParameter(256, 256, 120, 60, math.radians(30) + math.pi)
        assert rasterize(p1, CANVAS) == rasterize(p2, CANVAS)

    def test_clipping_matches_predicate(self):
        p = BlobParameter(500, 500, 100, 40, 1.0)
        mask = rasterize(p, CANVAS)
        # spot-check a band of pixels against contains_point
        for j in range(480, 512, 4):
            for i in range(440, 512, 4):
                assert mask.array[j, i] == contains_point(p, i + 0.5, j + 0.5)

    @settings(max_examples=60, deadline=None)
    @given(inside_ellipses())
    def test_area_within_two_percent(self, p):
        count = rasterize(p, CANVAS).foreground_count()
        assert count == pytest.approx(math.pi * p.a * p.b, rel=0.02)

    @settings(max_examples=60, deadline=None)
    @given(inside_ellipses(min_axis=1.0, max_axis=250.0), st.floats(-8.0, 8.0))
    def test_pi_rotation_bit_exact(self, p, extra_turns_ignored):
        p2 = BlobParameter(p.cx, p.cy, p.a, p.b, p.theta + math.pi)
        m1, m2 = rasterize(p, CANVAS), rasterize(p2, CANVAS)
        assert m1 == m2


class TestMaskIou:
    def test_identical_masks(self):
        m = rasterize(BlobParameter(100, 100, 40, 20, 0.3), CANVAS)
        assert mask_iou(m, m) == 1.0

    def test_disjoint_masks(self):
        m1 = rasterize(BlobParameter(100, 100, 30, 30), CANVAS)
        m2 = rasterize(BlobParameter(400, 400, 30, 30), CANVAS)
        assert mask_iou(m1, m2) == 0.0

    def test_two_circles_lens_oracle(self):
        m1 = rasterize(BlobParameter(206, 256, 100, 100), CANVAS)
        m2 = rasterize(BlobParameter(306, 256, 100, 100), CANVAS)
        got = mask_iou(m1, m2)
        assert got == pytest.approx(0.2430, abs=0.01)
        assert got == pytest.approx(circle_lens_iou(100.0, 100.0), abs=0.01)

    def test_shape_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            mask_iou(BinaryMask.zeros(10, 10), BinaryMask.zeros(11, 10))

    def test_both_empty_is_degenerate(self):
        with pytest.raises(DegenerateInputError):
            mask_iou(BinaryMask.zeros(10, 10), BinaryMask.zeros(10, 10))

    @given(inside_ellipses(), inside_ellipses())
    @settings(max_examples=40, deadline=None)
    def test_symmetric_and_bounded(self, p1, p2):
        m1, m2 = rasterize(p1, CANVAS), rasterize(p2, CANVAS)
        v = mask_iou(m1, m2)
        assert v == mask_iou(m2, m1)
        assert 0.0 <= v <= 1.0
        assert (v == 1.0) == (m1 == m2)


class TestEllipseIou:
    def test_self_iou(self):
        p = BlobParameter(256, 256, 80, 40, 0.7)
        assert ellipse_iou(p, p, CANVAS) == 1.0

    def test_far_apart(self):
        assert ellipse_iou(
            BlobParameter(60, 60, 30, 30), BlobParameter(450, 450, 30, 30), CANVAS
        ) == 0.0

    def test_circle_pair_value(self):
        got = ellipse_iou(
            BlobParameter(206, 256, 100, 100), BlobParameter(306, 256, 100, 100), CANVAS
        )
        assert got == pytest.approx(0.2430, abs=0.01)


def make_layout(n=3):
    blobs = tuple(
        Blob(
            parameter=BlobParameter(100 + 80 * i, 150 + 40 * i, 50 + 5 * i, 25, 0.2 * i),
            description=f"object number {i}",
            category=f"thing-{i}",
        )
        for i in range(n)
    )
    return BlobLayout(canvas=CANVAS, blobs=blobs, global_caption="a test scene")


class TestEditLayout:
    def test_move_roundtrip_restores_layout(self):
        layout = make_layout()
        orig = layout.blobs[0].parameter
        moved = edit_layout(layout, MoveBlob(0, 100.0, 100.0))
        back = edit_layout(moved, MoveBlob(0, orig.cx, orig.cy))
        assert back == layout

    def test_remove_keeps_others(self):
        layout = make_layout(4)
        out = edit_layout(layout, RemoveBlob(1))
        assert len(out.blobs) == 3
        assert out.blobs == (layout.blobs[0], layout.blobs[2], layout.blobs[3])

    def test_rotate_changes_only_target_raster(self):
        layout = make_layout(3)
        out = edit_layout(layout, RotateBlob(1, 1.3))
        for i in (0, 2):
            assert rasterize(out.blobs[i].parameter, CANVAS) == rasterize(
                layout.blobs[i].parameter, CANVAS
            )
        assert rasterize(out.blobs[1].parameter, CANVAS) != rasterize(
            layout.blobs[1].parameter, CANVAS
        )

    def test_input_never_mutated(self):
        layout = make_layout()
        snapshot = layout.blobs
        edit_layout(layout, SetDescription(2, "changed"))
        edit_layout(layout, RemoveBlob(0))
        assert layout.blobs == snapshot

    def test_resize_and_description(self):
        layout = make_layout()
        out = edit_layout(layout, ResizeBlob(0, 90.0, 30.0))
        assert out.blobs[0].parameter.a == 90.0
        out = edit_layout(out, SetDescription(0, "a resized thing"))
        assert out.blobs[0].description == "a resized thing"

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            edit_layout(make_layout(), RemoveBlob(7))

    def test_add_respects_maximum(self):
        layout = make_layout(3)
        blob = Blob(BlobParameter(10, 10, 5, 5), "tiny", "dot")
        out = edit_layout(layout, AddBlob(blob), max_blobs=4)
        assert len(out.blobs) == 4
        with pytest.raises(InvalidArgumentError):
            edit_layout(out, AddBlob(blob), max_blobs=4)

    def test_invalid_resize_rejected(self):
        with pytest.raises(InvalidArgumentError):
            edit_layout(make_layout(), ResizeBlob(0, -5.0, 3.0))


class TestBlobValidation:
    def test_empty_description_rejected(self):
        with pytest.raises(InvalidArgumentError):
            Blob(BlobParameter(0, 0, 5, 5), "", "cat")

    def test_category_brace_rejected(self):
        with pytest.raises(InvalidArgumentError):
            Blob(BlobParameter(0, 0, 5, 5), "fine", "bad{name}")

    def test_canvas_validation(self):
        with pytest.raises(InvalidArgumentError):
            Canvas(0, 512)
