"""
Fixtures compartidas de formas para la suite
"""
import math

import numpy as np
import pytest

from core.config import DATA_DIR
from shape_domain.geometry import TriangleSoup
from shape_domain.shape_parser import load_shape
from shape_domain.triangulate import triangulate


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: pruebas estadísticas de aceptación (minutos)")


def make_rectangle(x0: float, y0: float, width: float, height: float) -> TriangleSoup:
    a, b = (x0, y0), (x0 + width, y0)
    c, d = (x0 + width, y0 + height), (x0, y0 + height)
    return TriangleSoup(np.array([[a, b, c], [a, c, d]], dtype=float))


def make_regular_polygon(n: int, radius: float = 1.0, center=(0.0, 0.0)) -> TriangleSoup:
    """Abanico desde el centro: n triángulos."""
    angles = 2.0 * math.pi * np.arange(n) / n
    ring = np.column_stack([center[0] + radius * np.cos(angles), center[1] + radius * np.sin(angles)])
    c = np.broadcast_to(np.asarray(center, dtype=float), (n, 2))
    return TriangleSoup(np.stack([c, ring, np.roll(ring, -1, axis=0)], axis=1))


def make_random_convex(rng: np.random.Generator, n: int = 12, radius: float = 1.0) -> np.ndarray:
    """Vértices CCW de un polígono convexo aleatorio inscrito en un círculo."""
    angles = np.sort(rng.uniform(0.0, 2.0 * math.pi, n))
    return np.column_stack([radius * np.cos(angles), radius * np.sin(angles)])


@pytest.fixture
def unit_square() -> TriangleSoup:
    return make_rectangle(0.0, 0.0, 1.0, 1.0)


@pytest.fixture
def centered_square() -> TriangleSoup:
    return make_rectangle(-0.5, -0.5, 1.0, 1.0)


@pytest.fixture
def shifted_square() -> TriangleSoup:
    return make_rectangle(0.3, 0.2, 1.0, 1.0)


@pytest.fixture
def thin_rectangle() -> TriangleSoup:
    return make_rectangle(0.0, 0.0, 10.0, 1.0)


@pytest.fixture
def l_shape() -> TriangleSoup:
    return load_shape(DATA_DIR / 'l_shape.json')


@pytest.fixture
def square_with_hole() -> TriangleSoup:
    return triangulate([[
        [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        [[0.25, 0.25], [0.25, 0.75], [0.75, 0.75], [0.75, 0.25]],
    ]])


@pytest.fixture
def disk64() -> TriangleSoup:
    return make_regular_polygon(64)


@pytest.fixture
def data_dir():
    return DATA_DIR
