import time

import numpy as np
import pytest
from scipy import stats

from conftest import make_rectangle
from core.errors import InvalidShapeError
from shape_domain.geometry import TriangleSoup, contains_many
from shape_domain.sampling import (
    RandomSource,
    build_area_index,
    check_interior_disjoint,
    sample_point,
    sample_points,
)


def grid_soup(k: int) -> TriangleSoup:
    """Cuadrado unitario dividido en k x k celdas, 2 triángulos por celda."""
    h = 1.0 / k
    tris = []
    for i in range(k):
        for j in range(k):
            a, b = (i * h, j * h), ((i + 1) * h, j * h)
            c, d = ((i + 1) * h, (j + 1) * h), (i * h, (j + 1) * h)
            tris.append([a, b, c])
            tris.append([a, c, d])
    return TriangleSoup(np.array(tris, dtype=float))


# --- A. Fuente aleatoria ---

def test_random_source_reproducible():
    a = RandomSource(42, 3).random(100)
    b = RandomSource(42, 3).random(100)
    np.testing.assert_array_equal(a, b)


def test_random_source_streams_differ():
    a = RandomSource(42, 0).random(100)
    b = RandomSource(42, 1).random(100)
    c = RandomSource(43, 0).random(100)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_substream_matches_constructor():
    np.testing.assert_array_equal(
        RandomSource(7).substream(5).random(10), RandomSource(7, 5).random(10)
    )


@pytest.mark.parametrize("streams", [(0, 1), (1, 2), (0, 7)])
def test_substreams_uncorrelated(streams):
    first, second = streams
    a = RandomSource(12345, first).random(100000)
    b = RandomSource(12345, second).random(100000)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.01


# --- B. Muestreo ---

def test_batch_equals_repeated_single_calls(l_shape):
    idx = build_area_index(l_shape)
    batch = sample_points(idx, RandomSource(9), 50)
    rng = RandomSource(9)
    single = np.array([sample_point(idx, rng).as_tuple() for _ in range(50)])
    np.testing.assert_array_equal(batch, single)


def test_samples_lie_inside(square_with_hole):
    idx = build_area_index(square_with_hole)
    pts = sample_points(idx, RandomSource(1), 5000)
    assert np.all(contains_many(square_with_hole, pts))
    # Nada cae estrictamente dentro del agujero
    hole = (pts[:, 0] > 0.25 + 1e-9) & (pts[:, 0] < 0.75 - 1e-9) \
        & (pts[:, 1] > 0.25 + 1e-9) & (pts[:, 1] < 0.75 - 1e-9)
    assert not np.any(hole)


def test_triangle_choice_proportional_to_area():
    # Triángulos de áreas 1, 2 y 3 disjuntos
    soup = TriangleSoup(np.array([
        [[0, 0], [1, 0], [0, 2]],
        [[2, 0], [4, 0], [2, 2]],
        [[5, 0], [8, 0], [5, 2]],
    ], dtype=float))
    idx = build_area_index(soup)
    _, tri = sample_points(idx, RandomSource(123), 60000, return_triangles=True)
    observed = np.bincount(tri, minlength=3)
    expected = 60000 * soup.areas / soup.area
    assert stats.chisquare(observed, expected).pvalue > 1e-4


def test_spatial_uniformity_chi_square(unit_square):
    idx = build_area_index(unit_square)
    pts = sample_points(idx, RandomSource(2024), 100000)
    cells = np.minimum((pts * 10).astype(int), 9)
    observed = np.bincount(cells[:, 0] * 10 + cells[:, 1], minlength=100)
    assert stats.chisquare(observed).pvalue > 1e-4


def thin_rectangle_counts(pts: np.ndarray) -> np.ndarray:
    """Celdas de 1 x 0.1 sobre el rectángulo 10 x 1."""
    cells = np.minimum((pts / np.array([1.0, 0.1])).astype(int), 9)
    return np.bincount(cells[:, 0] * 10 + cells[:, 1], minlength=100)


def l_shape_counts(pts: np.ndarray) -> np.ndarray:
    """Celdas de 0.2 x 0.2 sobre [0, 2]², sin las 25 del cuadrante faltante."""
    cells = np.minimum((pts / 0.2).astype(int), 9)
    counts = np.bincount(cells[:, 0] * 10 + cells[:, 1], minlength=100).reshape(10, 10)
    return np.concatenate([counts[:5].ravel(), counts[5:, :5].ravel()])


@pytest.mark.parametrize("fixture, counter", [
    ("thin_rectangle", thin_rectangle_counts),
    ("l_shape", l_shape_counts),
])
def test_spatial_uniformity_across_seeds(request, fixture, counter):
    idx = build_area_index(request.getfixturevalue(fixture))
    passed = 0
    for seed in range(10):
        observed = counter(sample_points(idx, RandomSource(seed), 200000))
        passed += stats.chisquare(observed).statistic < stats.chi2.ppf(0.999, len(observed) - 1)
    assert passed >= 9


def test_area_index_cumulative(l_shape):
    idx = build_area_index(l_shape)
    assert idx.cumulative[-1] == 1.0
    assert np.all(np.diff(idx.cumulative) > 0)


# --- C. Disjunción ---

def test_disjointness_check_passes(square_with_hole):
    check_interior_disjoint(square_with_hole)


def test_disjointness_check_detects_overlap():
    overlapping = TriangleSoup(np.concatenate([
        make_rectangle(0, 0, 1, 1).vertices,
        make_rectangle(0.5, 0.5, 1, 1).vertices,
    ]))
    with pytest.raises(InvalidShapeError):
        check_interior_disjoint(overlapping)


# --- D. Costo ---

@pytest.mark.slow
def test_sampling_cost_scales_logarithmically():
    n_points = 200000

    def per_point(soup):
        idx = build_area_index(soup)
        timings = []
        for trial in range(5):
            start = time.perf_counter()
            sample_points(idx, RandomSource(trial), n_points)
            timings.append((time.perf_counter() - start) / n_points)
        return float(np.median(timings))

    small = per_point(grid_soup(7))     # ~10² triángulos
    large = per_point(grid_soup(71))    # ~10⁴ triángulos
    assert large <= 3.0 * small
