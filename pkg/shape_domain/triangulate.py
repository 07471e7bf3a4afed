"""
Triangulación de polígonos simples con agujeros (ear clipping con puentes)
"""
import logging
from typing import List, Sequence

import mapbox_earcut as earcut
import numpy as np
from shapely.geometry import LinearRing

from core.errors import InvalidShapeError
from shape_domain.geometry import TriangleSoup

logger = logging.getLogger(__name__)

Ring = Sequence[Sequence[float]]


def _merge_collinear(pts: np.ndarray) -> np.ndarray:
    """Quita los vértices intermedios de tramos rectos; sólo quedan las esquinas."""
    if len(pts) < 3:
        return pts
    u = pts - np.roll(pts, 1, axis=0)
    v = np.roll(pts, -1, axis=0) - pts
    cross = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
    dot = np.einsum('ij,ij->i', u, v)
    scale = np.hypot(u[:, 0], u[:, 1]) * np.hypot(v[:, 0], v[:, 1])
    straight = (np.abs(cross) <= 1e-12 * scale) & (dot > 0)
    if np.any(straight):
        logger.debug(f"📐 [TRIANGULATE] {int(straight.sum())} vértices colineales fusionados")
    return pts[~straight]


def _clean_ring(ring: Ring, label: str) -> np.ndarray:
    pts = np.asarray(ring, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InvalidShapeError(f"{label}: cada vértice debe ser [x, y]")
    if not np.all(np.isfinite(pts)):
        raise InvalidShapeError(f"{label}: coordenadas no finitas")
    # Anillo cerrado explícitamente: se descarta el punto repetido
    if len(pts) > 1 and np.array_equal(pts[0], pts[-1]):
        pts = pts[:-1]
    pts = pts[np.any(pts != np.roll(pts, 1, axis=0), axis=1)]
    pts = _merge_collinear(pts)
    if len(pts) < 3:
        raise InvalidShapeError(f"{label}: se necesitan al menos 3 vértices")
    return pts


def _oriented_rings(rings: Sequence[Ring], polygon_index: int) -> List[np.ndarray]:
    """Valida simplicidad y fuerza exterior CCW / agujeros CW."""
    oriented = []
    for ring_index, ring in enumerate(rings):
        label = f"polígono {polygon_index}, anillo {ring_index}"
        pts = _clean_ring(ring, label)
        shape_ring = LinearRing(pts)
        if not shape_ring.is_simple:
            raise InvalidShapeError(f"{label}: el anillo se auto-intersecta")

        want_ccw = ring_index == 0
        if shape_ring.is_ccw != want_ccw:
            logger.warning(
                f"⚠️ [TRIANGULATE] {label} con orientación invertida; se corrige "
                f"({'CCW' if want_ccw else 'CW'} esperado)"
            )
            pts = pts[::-1].copy()
        oriented.append(pts)
    return oriented


def triangulate_rings(rings: Sequence[Ring], polygon_index: int = 0) -> np.ndarray:
    """
    Triangula un polígono (anillo exterior + agujeros).

    Returns:
        arreglo (T, 3, 2) de triángulos CCW no degenerados
    """
    if not rings:
        raise InvalidShapeError(f"polígono {polygon_index}: sin anillos")
    oriented = _oriented_rings(rings, polygon_index)
    vertices = np.concatenate(oriented).astype(np.float64)
    ring_ends = np.cumsum([len(r) for r in oriented]).astype(np.uint32)

    indices = np.asarray(earcut.triangulate_float64(vertices, ring_ends), dtype=np.int64)
    if len(indices) == 0:
        raise InvalidShapeError(f"polígono {polygon_index}: la triangulación no produjo triángulos")
    tris = vertices[indices.reshape(-1, 3)]

    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    signed = 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
                    - (c[:, 0] - a[:, 0]) * (b[:, 1] - a[:, 1]))
    tris[signed < 0] = tris[signed < 0][:, ::-1]

    degenerate = np.abs(signed) <= 1e-15 * max(np.abs(signed).sum(), 1e-300)
    if np.any(degenerate):
        logger.debug(f"📐 [TRIANGULATE] Descartados {int(degenerate.sum())} triángulos degenerados")
    return tris[~degenerate]


def triangulate(polygons: Sequence[Sequence[Ring]]) -> TriangleSoup:
    """Triangula una lista de polígonos (cada uno, lista de anillos) en una sola forma."""
    parts = [triangulate_rings(rings, i) for i, rings in enumerate(polygons)]
    if not parts:
        raise InvalidShapeError("No hay polígonos para triangular")
    return TriangleSoup(np.concatenate(parts))
