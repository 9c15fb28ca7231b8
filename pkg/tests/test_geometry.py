"""Annotation sessions, torso block derivation, rescaling, serialization."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shadowcast import (
    KEYPOINT_ORDER,
    AnnotationSession,
    KeypointSet,
    Point2,
    derive_torso_block,
    record_from_json,
    record_to_json,
    rescale_annotation,
    session_add_point,
    session_commit,
    session_undo,
)
from shadowcast.errors import (
    BelowMinimumError,
    DegenerateAxisError,
    EmptySessionError,
    InvalidDimsError,
    MissingKeypointError,
    OutOfBoundsError,
    SessionClosedError,
    SetFullError,
)
from conftest import STANDING_POINTS, make_record

CLICKS = [STANDING_POINTS[name] for name in KEYPOINT_ORDER]


def fill_session(n: int) -> AnnotationSession:
    session = AnnotationSession(image_id="img")
    for xy in CLICKS[:n]:
        session = session_add_point(session, Point2(*xy))
    return session


class TestSession:
    def test_first_point_binds_head(self):
        session = session_add_point(AnnotationSession(image_id="img"), Point2(120, 30))
        assert session.placed() == [("Head", Point2(120.0, 30.0))]
        assert session.next_name == "ElbowL"

    def test_full_session_rejects_points(self):
        session = fill_session(9)
        with pytest.raises(SetFullError):
            session_add_point(session, Point2(1, 1))

    def test_out_of_bounds(self):
        session = AnnotationSession(image_id="img")
        with pytest.raises(OutOfBoundsError):
            session_add_point(session, Point2(300, 10))
        with pytest.raises(OutOfBoundsError):
            session_add_point(session, Point2(10, -1))
        # canvas is half-open: 256 itself is outside
        with pytest.raises(OutOfBoundsError):
            session_add_point(session, Point2(256, 10))

    def test_undo_pops_last(self):
        session = fill_session(2)
        session = session_undo(session)
        assert [n for n, _ in session.placed()] == ["Head"]
        assert session.next_name == "ElbowL"

    def test_undo_empty(self):
        with pytest.raises(EmptySessionError):
            session_undo(AnnotationSession(image_id="img"))

    def test_add_then_undo_is_identity(self):
        session = fill_session(3)
        assert session_undo(session_add_point(session, Point2(5, 5))) == session

    @pytest.mark.parametrize("count", range(10))
    def test_commit_gate(self, count):
        session = fill_session(count)
        if count >= 9:
            committed, record = session_commit(session)
            assert committed.state == "committed"
            assert all(n in record.keypoints.points for n in KEYPOINT_ORDER)
            assert record.provenance == "manual"
            assert record.torso_block is not None
        else:
            with pytest.raises(BelowMinimumError):
                session_commit(session)

    def test_commit_twice(self):
        committed, _ = session_commit(fill_session(9))
        with pytest.raises(SessionClosedError):
            session_commit(committed)
        with pytest.raises(SessionClosedError):
            session_add_point(committed, Point2(1, 1))

    def test_replay_is_deterministic(self):
        _, rec1 = session_commit(fill_session(9))
        _, rec2 = session_commit(fill_session(9))
        assert record_to_json(rec1) == record_to_json(rec2)


class TestTorsoBlock:
    def test_hand_computed_rectangle(self):
        kps = KeypointSet(points={
            "Head": Point2(100, 20),
            "KneeL": Point2(90, 120),
            "KneeR": Point2(110, 120),
        })
        block = derive_torso_block(kps, width_ratio=0.25)
        assert block.corners == (
            Point2(75.0, 40.0),
            Point2(125.0, 40.0),
            Point2(125.0, 100.0),
            Point2(75.0, 100.0),
        )

    def test_degenerate_axis(self):
        kps = KeypointSet(points={
            "Head": Point2(100, 100),
            "KneeL": Point2(90, 100),
            "KneeR": Point2(110, 100),
        })
        with pytest.raises(DegenerateAxisError):
            derive_torso_block(kps)

    def test_missing_keypoint(self):
        kps = KeypointSet(points={"Head": Point2(10, 10)})
        with pytest.raises(MissingKeypointError):
            derive_torso_block(kps)

    def test_rotation_equivariance(self):
        # rotate inputs by 90 degrees about the canvas center
        def rot(p: Point2) -> Point2:
            cx = cy = 128.0
            return Point2(cx - (p.y - cy), cy + (p.x - cx))

        base = {
            "Head": Point2(100, 20),
            "KneeL": Point2(90, 120),
            "KneeR": Point2(110, 120),
        }
        block = derive_torso_block(KeypointSet(points=base))
        rotated = derive_torso_block(
            KeypointSet(points={n: rot(p) for n, p in base.items()})
        )
        for corner, expected in zip(rotated.corners, [rot(c) for c in block.corners]):
            assert corner.x == pytest.approx(expected.x, abs=1e-9)
            assert corner.y == pytest.approx(expected.y, abs=1e-9)

    def test_anchor_midpoints(self):
        block = derive_torso_block(KeypointSet(points={
            "Head": Point2(100, 20),
            "KneeL": Point2(90, 120),
            "KneeR": Point2(110, 120),
        }))
        assert block.top_center == Point2(100.0, 40.0)
        assert block.bottom_center == Point2(100.0, 100.0)


class TestRescale:
    def test_doubles_coordinates(self):
        rec = make_record()
        big = rescale_annotation(rec, 512, 512)
        assert big.keypoints.canvas_w == 512
        for name in KEYPOINT_ORDER:
            assert big.keypoints[name].x == rec.keypoints[name].x * 2
            assert big.keypoints[name].y == rec.keypoints[name].y * 2
        for c_big, c in zip(big.torso_block.corners, rec.torso_block.corners):
            assert c_big == Point2(c.x * 2, c.y * 2)

    def test_identity(self):
        rec = make_record()
        assert rescale_annotation(rec, 256, 256) == rec

    def test_round_trip(self):
        rec = make_record()
        back = rescale_annotation(rescale_annotation(rec, 512, 512), 256, 256)
        for name in KEYPOINT_ORDER:
            assert back.keypoints[name].x == pytest.approx(rec.keypoints[name].x, abs=1e-9)
            assert back.keypoints[name].y == pytest.approx(rec.keypoints[name].y, abs=1e-9)

    def test_invalid_dims(self):
        with pytest.raises(InvalidDimsError):
            rescale_annotation(make_record(), 0, 100)

    @settings(max_examples=25, deadline=None)
    @given(scale=st.integers(min_value=1, max_value=8))
    def test_linear_in_scale(self, scale):
        rec = make_record()
        scaled = rescale_annotation(rec, 256 * scale, 256 * scale)
        for name in KEYPOINT_ORDER:
            assert scaled.keypoints[name].x == rec.keypoints[name].x * scale


class TestSerialization:
    def test_round_trip(self):
        rec = make_record()
        text = record_to_json(rec)
        back = record_from_json(text)
        assert back == rec
        assert record_to_json(back) == text

    def test_key_layout(self):
        data = record_to_json(make_record())
        import json

        parsed = json.loads(data)
        assert list(parsed) == [
            "image_id", "pose", "canvas", "original",
            "provenance", "keypoints", "torso_block",
        ]
        assert [e["name"] for e in parsed["keypoints"]] == list(KEYPOINT_ORDER)
        assert len(parsed["torso_block"]) == 4

    def test_byte_stability(self):
        assert record_to_json(make_record()) == record_to_json(make_record())

    def test_null_block(self):
        import json

        rec = make_record()
        data = json.loads(record_to_json(rec))
        data["torso_block"] = None
        back = record_from_json(json.dumps(data))
        assert back.torso_block is None
