"""
Geometría plana exacta (a precisión double)
- Representación: Point2, Triangle, TriangleSoup
- Transformaciones: Translation, RigidMotion (ángulo en revoluciones)
- Área de solapamiento por recorte convexo triángulo vs triángulo
- Estadísticas de forma: área, longitud de borde, diámetro
"""
import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

from core.errors import ConfigError, InvalidShapeError
from match_domain.config import (
    CLIP_CHUNK_ROWS,
    CONTAINS_CHUNK_CELLS,
    CONTAINS_EPS,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


# ═══════════════════════════════════════════════════════════════
# TIPOS
# ═══════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidShapeError(f"Coordenadas no finitas: ({self.x}, {self.y})")

    def as_tuple(self) -> Tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Triangle:
    a: Point2
    b: Point2
    c: Point2

    def __post_init__(self):
        if self.signed_area <= 0.0:
            raise InvalidShapeError(
                f"Triángulo degenerado o en sentido horario: {self.as_array().tolist()}"
            )

    @property
    def signed_area(self) -> float:
        return 0.5 * ((self.b.x - self.a.x) * (self.c.y - self.a.y)
                      - (self.c.x - self.a.x) * (self.b.y - self.a.y))

    def as_array(self) -> np.ndarray:
        return np.array([self.a.as_tuple(), self.b.as_tuple(), self.c.as_tuple()], dtype=float)


class TriangleSoup:
    """
    Forma como lista ordenada de triángulos CCW con interiores disjuntos.

    Internamente guarda un arreglo (n, 3, 2); los triángulos se
    materializan como `Triangle` sólo bajo demanda.
    """

    def __init__(self, triangles: Union[Sequence[Triangle], np.ndarray]):
        if isinstance(triangles, np.ndarray):
            vertices = np.array(triangles, dtype=float)
        else:
            vertices = np.array([t.as_array() for t in triangles], dtype=float)

        if vertices.ndim != 3 or vertices.shape[1:] != (3, 2) or len(vertices) == 0:
            raise InvalidShapeError("La forma debe ser una lista no vacía de triángulos (n, 3, 2)")
        if not np.all(np.isfinite(vertices)):
            raise InvalidShapeError("La forma contiene coordenadas no finitas")

        areas = _signed_areas(vertices)
        bad = np.nonzero(areas <= 0.0)[0]
        if len(bad):
            raise InvalidShapeError(
                f"Triángulo {int(bad[0])} con área no positiva ({areas[bad[0]]:.3g}); "
                f"se esperan triángulos CCW no degenerados"
            )

        vertices.setflags(write=False)
        areas.setflags(write=False)
        self._vertices = vertices
        self._areas = areas

    @classmethod
    def from_points(cls, triangles, reorient: bool = True) -> 'TriangleSoup':
        """Construye desde listas de 3 puntos; invierte los triángulos CW si reorient."""
        vertices = np.array(triangles, dtype=float)
        if vertices.ndim != 3 or vertices.shape[1:] != (3, 2):
            raise InvalidShapeError("Cada triángulo debe tener exactamente 3 puntos [x, y]")
        if reorient:
            cw = _signed_areas(vertices) < 0.0
            if np.any(cw):
                vertices[cw] = vertices[cw][:, ::-1]
        return cls(vertices)

    @property
    def vertices(self) -> np.ndarray:
        return self._vertices

    @property
    def areas(self) -> np.ndarray:
        return self._areas

    @property
    def area(self) -> float:
        return float(self._areas.sum())

    @property
    def triangles(self) -> List[Triangle]:
        return [Triangle(*(Point2(float(x), float(y)) for x, y in tri)) for tri in self._vertices]

    @property
    def bbox(self) -> Tuple[float, float, float, float]:
        pts = self._vertices.reshape(-1, 2)
        return (float(pts[:, 0].min()), float(pts[:, 0].max()),
                float(pts[:, 1].min()), float(pts[:, 1].max()))

    def __len__(self) -> int:
        return len(self._vertices)

    def __repr__(self) -> str:
        return f"TriangleSoup(n={len(self)}, area={self.area:.6g})"


@dataclass(frozen=True)
class Translation:
    tx: float
    ty: float

    def __post_init__(self):
        if not (math.isfinite(self.tx) and math.isfinite(self.ty)):
            raise ConfigError(f"Traslación no finita: ({self.tx}, {self.ty})")


@dataclass(frozen=True)
class RigidMotion:
    """x ↦ M_α x + t, con M_α la rotación CCW de ángulo 2π·alpha."""
    alpha: float
    tx: float
    ty: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.alpha, self.tx, self.ty)):
            raise ConfigError(f"Movimiento rígido no finito: {self}")
        if not (-0.5 <= self.alpha < 0.5):
            raise ConfigError(f"alpha={self.alpha} fuera de [-1/2, 1/2)")


Transform = Union[Translation, RigidMotion]


@dataclass(frozen=True)
class ShapeStats:
    area: float
    boundary_length: float
    diameter: float
    bbox: Tuple[float, float, float, float]  # (min_x, max_x, min_y, max_y)


# ═══════════════════════════════════════════════════════════════
# TRANSFORMACIONES
# ═══════════════════════════════════════════════════════════════

def normalize_angle(alpha):
    """Lleva ángulos (revoluciones) a [-1/2, 1/2). Acepta escalares o arreglos."""
    alpha = np.asarray(alpha, dtype=float)
    wrapped = np.mod(alpha + 0.5, 1.0) - 0.5
    # np.mod puede devolver 1.0 por redondeo para negativos minúsculos
    wrapped = np.where(wrapped >= 0.5, wrapped - 1.0, wrapped)
    # Los valores ya normalizados se devuelven sin tocar sus bits
    wrapped = np.where((alpha >= -0.5) & (alpha < 0.5), alpha, wrapped)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def transform_params(t: Transform) -> Tuple[float, float, float]:
    """(alpha, tx, ty); las traslaciones tienen alpha = 0."""
    if isinstance(t, RigidMotion):
        return (t.alpha, t.tx, t.ty)
    return (0.0, t.tx, t.ty)


def apply_points(t: Transform, points: np.ndarray) -> np.ndarray:
    """Aplica t a un arreglo (..., 2) de puntos."""
    pts = np.asarray(points, dtype=float)
    if isinstance(t, Translation):
        return pts + np.array([t.tx, t.ty])
    c, s = math.cos(TWO_PI * t.alpha), math.sin(TWO_PI * t.alpha)
    x, y = pts[..., 0], pts[..., 1]
    return np.stack([c * x - s * y + t.tx, s * x + c * y + t.ty], axis=-1)


def apply(t: Transform, p: Point2) -> Point2:
    if isinstance(t, Translation):
        return Point2(p.x + t.tx, p.y + t.ty)
    c, s = math.cos(TWO_PI * t.alpha), math.sin(TWO_PI * t.alpha)
    return Point2(c * p.x - s * p.y + t.tx, s * p.x + c * p.y + t.ty)


def invert(t: Transform) -> Transform:
    if isinstance(t, Translation):
        return Translation(-t.tx, -t.ty)
    # x = M_{-α}(y - t)
    c, s = math.cos(TWO_PI * t.alpha), math.sin(TWO_PI * t.alpha)
    tx = -(c * t.tx + s * t.ty)
    ty = -(-s * t.tx + c * t.ty)
    return RigidMotion(normalize_angle(-t.alpha), tx, ty)


# ═══════════════════════════════════════════════════════════════
# SOLAPAMIENTO
# ═══════════════════════════════════════════════════════════════

def overlap_areas(A: TriangleSoup, B: TriangleSoup, params) -> np.ndarray:
    """
    Área |t(A) ∩ B| para un lote de transformaciones.

    Args:
        params: arreglo (K, 3) de (alpha, tx, ty); alpha = 0 para traslaciones

    Returns:
        arreglo (K,) de áreas
    """
    params = np.atleast_2d(np.asarray(params, dtype=float))
    K = len(params)
    result = np.zeros(K)
    nA, nB = len(A), len(B)

    b_tris = B.vertices
    b_lo = b_tris.min(axis=1)
    b_hi = b_tris.max(axis=1)

    k_chunk = max(1, CLIP_CHUNK_ROWS // (nA * nB))
    a_chunk = nA if k_chunk > 1 else max(1, CLIP_CHUNK_ROWS // nB)

    for k0 in range(0, K, k_chunk):
        chunk = params[k0:k0 + k_chunk]
        c = np.cos(TWO_PI * chunk[:, 0])[:, None, None]
        s = np.sin(TWO_PI * chunk[:, 0])[:, None, None]
        for a0 in range(0, nA, a_chunk):
            a_tris = A.vertices[a0:a0 + a_chunk]
            x, y = a_tris[None, ..., 0], a_tris[None, ..., 1]
            moved = np.stack([
                c * x - s * y + chunk[:, 1, None, None],
                s * x + c * y + chunk[:, 2, None, None],
            ], axis=-1)  # (k, a, 3, 2)

            m_lo = moved.min(axis=2)
            m_hi = moved.max(axis=2)
            hits = np.all(
                (m_lo[:, :, None, :] <= b_hi[None, None, :, :])
                & (m_hi[:, :, None, :] >= b_lo[None, None, :, :]),
                axis=-1,
            )  # (k, a, nB)
            ik, ia, ib = np.nonzero(hits)
            if len(ik) == 0:
                continue
            areas = clip_triangle_pairs(moved[ik, ia], b_tris[ib])
            result[k0:k0 + len(chunk)] += np.bincount(ik, weights=areas, minlength=len(chunk))

    return result


def overlap_area(A: TriangleSoup, B: TriangleSoup, t: Transform) -> float:
    return float(overlap_areas(A, B, [transform_params(t)])[0])


def symmetric_difference_area(A: TriangleSoup, B: TriangleSoup, t: Transform) -> float:
    return A.area + B.area - 2.0 * overlap_area(A, B, t)


def clip_triangle_pairs(subject: np.ndarray, clipper: np.ndarray) -> np.ndarray:
    """
    Área de la intersección de pares de triángulos CCW (Sutherland-Hodgman vectorizado).

    Args:
        subject, clipper: arreglos (R, 3, 2)

    Returns:
        arreglo (R,) de áreas
    """
    R = len(subject)
    # Trasladar al primer vértice del recortador mejora la precisión del shoelace
    origin = clipper[:, 0, :]
    poly = subject - origin[:, None, :]
    clip = clipper - origin[:, None, :]
    count = np.full(R, 3)

    for e in range(3):
        p = clip[:, e]
        edge = clip[:, (e + 1) % 3] - p
        n_in = poly.shape[1]
        idx = np.arange(n_in)
        valid = idx[None, :] < count[:, None]
        nxt_idx = (idx[None, :] + 1) % np.maximum(count, 1)[:, None]
        nxt = np.take_along_axis(poly, nxt_idx[..., None], axis=1)

        d_cur = (edge[:, None, 0] * (poly[..., 1] - p[:, None, 1])
                 - edge[:, None, 1] * (poly[..., 0] - p[:, None, 0]))
        d_nxt = np.take_along_axis(d_cur, nxt_idx, axis=1)
        in_cur = d_cur >= 0.0
        in_nxt = d_nxt >= 0.0

        crossing = valid & (in_cur != in_nxt)
        denom = np.where(crossing, d_cur - d_nxt, 1.0)
        frac = np.where(crossing, d_cur / denom, 0.0)
        inter = poly + frac[..., None] * (nxt - poly)

        emitted = np.stack([inter, nxt], axis=2).reshape(R, 2 * n_in, 2)
        keep = np.stack([crossing, valid & in_nxt], axis=2).reshape(R, 2 * n_in)
        order = np.argsort(~keep, axis=1, kind='stable')
        width = min(2 * n_in, 9)
        poly = np.take_along_axis(emitted, order[..., None], axis=1)[:, :width]
        count = np.minimum(keep.sum(axis=1), width)

    return _polygon_areas(poly, count)


def _polygon_areas(poly: np.ndarray, count: np.ndarray) -> np.ndarray:
    width = poly.shape[1]
    idx = np.arange(width)
    valid = idx[None, :] < count[:, None]
    nxt_idx = (idx[None, :] + 1) % np.maximum(count, 1)[:, None]
    x, y = poly[..., 0], poly[..., 1]
    xn = np.take_along_axis(x, nxt_idx, axis=1)
    yn = np.take_along_axis(y, nxt_idx, axis=1)
    twice = np.where(valid, x * yn - xn * y, 0.0).sum(axis=1)
    return np.where(count >= 3, np.maximum(0.5 * twice, 0.0), 0.0)


def _signed_areas(vertices: np.ndarray) -> np.ndarray:
    a, b, c = vertices[:, 0], vertices[:, 1], vertices[:, 2]
    return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
                  - (c[:, 0] - a[:, 0]) * (b[:, 1] - a[:, 1]))


# ═══════════════════════════════════════════════════════════════
# PERTENENCIA
# ═══════════════════════════════════════════════════════════════

def _edge_tests(A: TriangleSoup, pts: np.ndarray):
    """Productos cruzados (n, m) de cada punto contra las 3 aristas de cada triángulo."""
    tris = A.vertices
    px, py = pts[:, 0, None], pts[:, 1, None]
    out = []
    for i in range(3):
        a = tris[:, i]
        b = tris[:, (i + 1) % 3]
        out.append((b[:, 0] - a[:, 0]) * (py - a[:, 1]) - (b[:, 1] - a[:, 1]) * (px - a[:, 0]))
    return out


def contains_many(A: TriangleSoup, points) -> np.ndarray:
    """Pertenencia (borde inclusivo) para un arreglo (n, 2) de puntos."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    inside = np.zeros(len(pts), dtype=bool)
    min_x, max_x, min_y, max_y = A.bbox
    in_box = np.nonzero(
        (pts[:, 0] >= min_x - CONTAINS_EPS) & (pts[:, 0] <= max_x + CONTAINS_EPS)
        & (pts[:, 1] >= min_y - CONTAINS_EPS) & (pts[:, 1] <= max_y + CONTAINS_EPS)
    )[0]

    step = max(1, CONTAINS_CHUNK_CELLS // len(A))
    for i0 in range(0, len(in_box), step):
        rows = in_box[i0:i0 + step]
        d0, d1, d2 = _edge_tests(A, pts[rows])
        hit = (d0 >= -CONTAINS_EPS) & (d1 >= -CONTAINS_EPS) & (d2 >= -CONTAINS_EPS)
        inside[rows] = hit.any(axis=1)
    return inside


def contains(A: TriangleSoup, p: Point2) -> bool:
    return bool(contains_many(A, [[p.x, p.y]])[0])


def count_strictly_inside(A: TriangleSoup, points) -> np.ndarray:
    """Cantidad de triángulos que contienen estrictamente cada punto."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    counts = np.zeros(len(pts), dtype=int)
    step = max(1, CONTAINS_CHUNK_CELLS // len(A))
    for i0 in range(0, len(pts), step):
        d0, d1, d2 = _edge_tests(A, pts[i0:i0 + step])
        strict = (d0 > CONTAINS_EPS) & (d1 > CONTAINS_EPS) & (d2 > CONTAINS_EPS)
        counts[i0:i0 + step] = strict.sum(axis=1)
    return counts


# ═══════════════════════════════════════════════════════════════
# ESTADÍSTICAS
# ═══════════════════════════════════════════════════════════════

def boundary_edges(A: TriangleSoup) -> np.ndarray:
    """
    Aristas de borde (multiplicidad 1) como arreglo (E, 2, 2).
    Las aristas compartidas por dos triángulos son interiores.
    """
    counter = Counter()
    for tri in A.vertices.tolist():
        for i in range(3):
            p = tuple(tri[i])
            q = tuple(tri[(i + 1) % 3])
            counter[(p, q) if p <= q else (q, p)] += 1

    crowded = [edge for edge, mult in counter.items() if mult > 2]
    if crowded:
        raise InvalidShapeError(
            f"Arista {crowded[0]} compartida por más de dos triángulos (descomposición solapada)"
        )
    edges = [edge for edge, mult in counter.items() if mult == 1]
    return np.array(edges, dtype=float).reshape(-1, 2, 2)


def distance_to_boundary(A: TriangleSoup, points, edges: np.ndarray = None) -> np.ndarray:
    """Distancia euclídea de cada punto (n, 2) al segmento de borde más cercano."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if edges is None:
        edges = boundary_edges(A)
    start = edges[:, 0]
    seg = edges[:, 1] - edges[:, 0]
    seg_len2 = np.maximum((seg ** 2).sum(axis=1), np.finfo(float).tiny)

    result = np.empty(len(pts))
    step = max(1, CONTAINS_CHUNK_CELLS // len(edges))
    for i0 in range(0, len(pts), step):
        rel = pts[i0:i0 + step, None, :] - start[None, :, :]
        u = np.clip((rel * seg[None]).sum(axis=-1) / seg_len2, 0.0, 1.0)
        gap = rel - u[..., None] * seg[None]
        result[i0:i0 + step] = np.sqrt((gap ** 2).sum(axis=-1)).min(axis=1)
    return result


def shape_stats(A: TriangleSoup) -> ShapeStats:
    edges = boundary_edges(A)
    boundary = float(np.linalg.norm(edges[:, 1] - edges[:, 0], axis=1).sum())

    pts = np.unique(A.vertices.reshape(-1, 2), axis=0)
    try:
        pts = pts[ConvexHull(pts).vertices]
    except (QhullError, ValueError):
        logger.debug("📐 [GEOMETRY] Envolvente degenerada, diámetro sobre todos los vértices")
    diameter = float(pdist(pts).max()) if len(pts) > 1 else 0.0

    return ShapeStats(
        area=A.area,
        boundary_length=boundary,
        diameter=diameter,
        bbox=A.bbox,
    )
