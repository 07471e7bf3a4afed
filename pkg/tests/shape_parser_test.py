import json
import logging

import numpy as np
import pytest

from conftest import make_random_convex
from core.errors import InvalidShapeError
from shape_domain.geometry import shape_stats
from shape_domain.shape_parser import load_shape, parse_shape, save_shape, soup_to_dict
from shape_domain.triangulate import triangulate, triangulate_rings

SQUARE = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]


def shoelace(ring: np.ndarray) -> float:
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


# --- A. Triangulación ---

def test_unit_square_ring():
    soup = triangulate([[SQUARE]])
    assert len(soup) == 2
    assert soup.area == pytest.approx(1.0, abs=1e-12)


def test_square_with_hole_area_and_boundary(square_with_hole):
    stats = shape_stats(square_with_hole)
    assert stats.area == pytest.approx(0.75, rel=1e-9)
    assert stats.boundary_length == pytest.approx(6.0, rel=1e-9)


def test_random_convex_matches_shoelace():
    rng = np.random.default_rng(12)
    ring = make_random_convex(rng, 12)
    soup = triangulate([[ring.tolist()]])
    assert soup.area == pytest.approx(shoelace(ring), abs=1e-12)
    assert shape_stats(soup).boundary_length == pytest.approx(
        float(np.linalg.norm(np.roll(ring, -1, axis=0) - ring, axis=1).sum()), rel=1e-9
    )


def test_closed_ring_is_accepted():
    soup = triangulate([[SQUARE + [SQUARE[0]]]])
    assert soup.area == pytest.approx(1.0)


def test_wrong_orientation_is_fixed_with_warning(caplog):
    with caplog.at_level(logging.WARNING):
        tris = triangulate_rings([SQUARE[::-1]])
    assert "orientación" in caplog.text
    assert len(tris) == 2
    assert triangulate([[SQUARE[::-1]]]).area == pytest.approx(1.0)


def test_hole_orientation_is_fixed():
    ccw_hole = [[0.25, 0.25], [0.75, 0.25], [0.75, 0.75], [0.25, 0.75]]
    soup = triangulate([[SQUARE, ccw_hole]])
    assert soup.area == pytest.approx(0.75)


def test_self_intersecting_ring_reports_index():
    bowtie = [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]
    with pytest.raises(InvalidShapeError, match="anillo 1"):
        triangulate([[SQUARE, bowtie]])


def test_ring_with_too_few_vertices():
    with pytest.raises(InvalidShapeError):
        triangulate([[[[0.0, 0.0], [1.0, 0.0]]]])


@pytest.mark.parametrize("rings, area, boundary", [
    # Puntos medios sobre los lados del cuadrado
    ([[[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [1.0, 0.5], [1.0, 1.0], [0.5, 1.0], [0.0, 1.0], [0.0, 0.5]]],
     1.0, 4.0),
    # L con tramos rectos partidos y un vértice repetido
    ([[[0.0, 0.0], [0.7, 0.0], [2.0, 0.0], [2.0, 1.0], [1.5, 1.0], [1.0, 1.0], [1.0, 1.0],
       [1.0, 2.0], [0.0, 2.0], [0.0, 1.3]]],
     3.0, 8.0),
    # Agujero con un punto colineal
    ([SQUARE, [[0.25, 0.25], [0.25, 0.5], [0.25, 0.75], [0.75, 0.75], [0.75, 0.25]]],
     0.75, 6.0),
])
def test_collinear_vertices_keep_ring_length(rings, area, boundary):
    soup = triangulate([rings])
    stats = shape_stats(soup)
    assert stats.area == pytest.approx(area, rel=1e-9)
    assert stats.boundary_length == pytest.approx(boundary, rel=1e-9)


def test_collinear_vertices_are_merged():
    ring = [[0.0, 0.0], [0.25, 0.0], [0.5, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
    assert len(triangulate_rings([ring])) == 2


def test_fully_collinear_ring_is_rejected():
    with pytest.raises(InvalidShapeError):
        triangulate([[[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]]])


def test_multiple_polygons():
    other = [[2.0, 0.0], [3.0, 0.0], [3.0, 2.0], [2.0, 2.0]]
    assert triangulate([[SQUARE], [other]]).area == pytest.approx(3.0)


# --- B. Archivos de forma ---

@pytest.mark.parametrize("payload", [
    {"triangles": [], "polygons": []},
    {},
    {"triangles": [[[0, 0], [1, 0], [0, 1]]], "color": "red"},
    {"triangles": [[[0, 0], [1, 0]]]},
    "no es json",
])
def test_parse_shape_rejects_malformed(payload):
    with pytest.raises(InvalidShapeError):
        parse_shape(payload)


def test_parse_triangles_reorients():
    soup = parse_shape({"triangles": [[[0, 0], [0, 1], [1, 0]]]})
    assert soup.area == pytest.approx(0.5)


def test_load_shape_missing_file(tmp_path):
    with pytest.raises(InvalidShapeError):
        load_shape(tmp_path / "no_existe.json")


def test_load_shape_detects_overlap(tmp_path):
    path = tmp_path / "overlap.json"
    path.write_text(json.dumps({"triangles": [
        [[0, 0], [2, 0], [0, 2]],
        [[0.1, 0.1], [1.5, 0.1], [0.1, 1.5]],
    ]}))
    with pytest.raises(InvalidShapeError):
        load_shape(path)


@pytest.mark.parametrize("name, area", [
    ("unit_square.json", 1.0),
    ("shifted_square.json", 1.0),
    ("l_shape.json", 3.0),
    ("square_with_hole.json", 0.75),
    ("thin_rectangle.json", 10.0),
])
def test_bundled_shapes(data_dir, name, area):
    assert load_shape(data_dir / name).area == pytest.approx(area)


def test_save_and_load(tmp_path, l_shape):
    path = tmp_path / "l.json"
    save_shape(l_shape, path)
    loaded = load_shape(path)
    np.testing.assert_array_equal(loaded.vertices, l_shape.vertices)
    assert soup_to_dict(loaded) == soup_to_dict(l_shape)
