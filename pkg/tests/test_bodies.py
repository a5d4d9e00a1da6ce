import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from covdex.bodies import (
    Ball, BodyError, DimensionError, DirectSum, Disk, MinkowskiSum, NotGeometricError, Polygon, Segment,
    affine_class, affine_image, as_body, body_from_dict, body_key, canonical, cube, depth, is_o_symmetric,
    random_polygon, support, volume_fraction_exponent,
)

SQUARE = canonical("square")
TRIANGLE = canonical("triangle")


def test_depth_examples():
    assert depth(Disk(1.0), [0.0, 0.0]) == pytest.approx(-1.0)
    assert depth(Disk(1.0), [2.0, 0.0]) == pytest.approx(1.0)
    assert depth(SQUARE, [0.5, 0.5]) == pytest.approx(-0.5)


def test_depth_segment_and_ball():
    assert depth(Segment(1.0), [0.25]) == pytest.approx(-0.25)
    assert depth(Segment(1.0), [1.5]) == pytest.approx(0.5)
    assert depth(Ball(3, 2.0), [0.0, 0.0, 3.0]) == pytest.approx(1.0)


def test_depth_rejects_composites_and_bad_dimension():
    with pytest.raises(NotGeometricError):
        depth(cube(2), [0.0, 0.0])
    with pytest.raises(DimensionError):
        depth(Disk(1.0), [0.0, 0.0, 0.0])


def test_volume_fraction_exponent():
    assert volume_fraction_exponent(cube(3)) == 3
    assert volume_fraction_exponent(Disk(1.0)) == 2
    assert volume_fraction_exponent(DirectSum((Disk(1.0), Segment(1.0)))) == 3


def test_support_examples():
    assert support(Disk(1.0), [1.0, 0.0]) == pytest.approx(1.0)
    assert support(SQUARE, [1.0, 0.0]) == pytest.approx(1.0)
    u = np.array([1.0, 1.0]) / math.sqrt(2)
    assert support(TRIANGLE, u) == pytest.approx(1 / math.sqrt(2))


def test_affine_image_examples():
    assert affine_image(TRIANGLE, np.eye(2)) == TRIANGLE
    sheared = affine_image(SQUARE, [[1.0, 1.0], [0.0, 1.0]])
    assert sorted(sheared.vertices) == sorted([(0.0, 0.0), (1.0, 0.0), (2.0, 1.0), (1.0, 1.0)])
    assert affine_image(Segment(1.0), [[2.0]]) == Segment(2.0)


def test_affine_image_reflection_keeps_orientation():
    img = affine_image(TRIANGLE, [[-1.0, 0.0], [0.0, 1.0]])
    assert isinstance(img, Polygon) and len(img.vertices) == 3


def test_affine_image_singular():
    with pytest.raises(BodyError):
        affine_image(SQUARE, [[1.0, 1.0], [1.0, 1.0]])


@pytest.mark.parametrize("verts", [
    [(0, 0), (1, 1), (2, 2)],  # collinear
    [(0, 0), (0, 1), (1, 0)],  # clockwise
    [(0, 0), (1, 0)],
])
def test_invalid_polygons_rejected(verts):
    with pytest.raises(BodyError):
        Polygon(tuple(map(tuple, verts)))


@pytest.mark.parametrize("bad", [lambda: Segment(0.0), lambda: Disk(-1.0), lambda: Ball(1, 1.0)])
def test_invalid_round_bodies(bad):
    with pytest.raises(BodyError):
        bad()


def test_minkowski_parts_share_dimension():
    with pytest.raises(BodyError):
        MinkowskiSum((Disk(1.0), Segment(1.0)))


def test_json_round_trip():
    for name in ("disk", "ball3", "square", "triangle", "hexagon", "segment", "cube3"):
        b = canonical(name)
        again = body_from_dict(json.loads(json.dumps(b.to_dict())))
        assert again == b


def test_body_from_dict_errors():
    with pytest.raises(BodyError):
        body_from_dict({"kind": "disk"})
    with pytest.raises(BodyError):
        body_from_dict({"kind": "torus"})
    with pytest.raises(BodyError):
        as_body(3)


def test_canonical_names():
    assert canonical("@hexagon") == canonical("hexagon")
    assert cube(1) == Segment(1.0)
    assert cube(4).dim == 4
    with pytest.raises(BodyError):
        canonical("cube7")


def test_affine_class_and_key():
    sheared = affine_image(SQUARE, [[2.0, 1.0], [0.0, 3.0]], [5.0, -1.0])
    assert affine_class(sheared) == "square"
    assert body_key(sheared) == "square"
    assert body_key(Disk(3.0)) == "disk"
    odd = Polygon(((0.0, 0.0), (2.0, 0.0), (2.5, 1.0), (0.0, 1.5)))
    assert affine_class(odd) is None
    assert body_key(odd).startswith("h")
    # key ignores the starting vertex
    rolled = Polygon(odd.vertices[2:] + odd.vertices[:2])
    assert body_key(rolled) == body_key(odd)


def test_symmetry_flags():
    assert is_o_symmetric(canonical("hexagon"))
    assert is_o_symmetric(SQUARE)
    assert not is_o_symmetric(TRIANGLE)
    assert is_o_symmetric(cube(3))


@st.composite
def polygons(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(3, 16))
    return random_polygon(np.random.default_rng(seed), n)


def _bodies():
    return st.one_of(polygons(), st.sampled_from([Disk(1.0), Disk(0.3), Ball(3, 1.0), Segment(2.0)]))


@settings(max_examples=60, deadline=None)
@given(_bodies(), st.integers(0, 2**32 - 1))
def test_depth_is_1_lipschitz(body, seed):
    r = np.random.default_rng(seed)
    p = r.uniform(-2, 2, (500, body.dim))
    q = p + r.normal(scale=0.3, size=p.shape)
    gap = np.abs(body.depth(p) - body.depth(q))
    assert np.all(gap <= np.linalg.norm(p - q, axis=1) + 1e-12)


@settings(max_examples=60, deadline=None)
@given(polygons(), st.integers(0, 2**32 - 1))
def test_polygon_depth_sign_matches_halfplanes(poly, seed):
    p = np.random.default_rng(seed).uniform(-0.2, 1.2, (1000, 2))
    v = np.array(poly.vertices)
    inside = np.ones(len(p), bool)
    for a, b in zip(v, np.roll(v, -1, axis=0)):
        cross = (b[0] - a[0]) * (p[:, 1] - a[1]) - (b[1] - a[1]) * (p[:, 0] - a[0])
        inside &= cross >= 0
    d = poly.depth(p)
    clear = np.abs(d) > 1e-12
    assert np.array_equal((d <= 0)[clear], inside[clear])


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 5.0), st.integers(0, 2**32 - 1))
def test_ball_depth_is_norm_minus_radius(r, seed):
    p = np.random.default_rng(seed).normal(size=(200, 3))
    assert np.allclose(Ball(3, r).depth(p), np.linalg.norm(p, axis=1) - r)


@settings(max_examples=60, deadline=None)
@given(polygons(), st.floats(0, 2 * math.pi))
def test_support_is_max_over_vertices(poly, angle):
    u = np.array([math.cos(angle), math.sin(angle)])
    assert support(poly, u) == pytest.approx(max(np.array(poly.vertices) @ u), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(polygons(), st.lists(st.floats(-3, 3), min_size=4, max_size=4))
def test_affine_image_preserves_vertex_count(poly, entries):
    A = np.array(entries).reshape(2, 2)
    if abs(np.linalg.det(A)) < 1e-3:
        return
    img = affine_image(poly, A)
    assert len(img.vertices) == len(poly.vertices)
    assert affine_image(img, np.linalg.inv(A)).vertices  # still a valid convex polygon
