"""
Punto más profundo de la nube de votos
- Exacto: branch-and-bound sobre una grilla de celdas con cota superior
  rigurosa y, en cada celda, sumas prefijas sobre las esquinas candidatas
- Aproximado: histograma en grilla fina (δ/2) y sumas de bloques 4^d
- Eje angular circular en [-1/2, 1/2) para modos rígidos
"""
import itertools
import logging
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from core.config import DEPTH_CONFIG
from core.errors import ConfigError
from match_domain.config import APPROX_FACTOR, MAX_WRAP_DELTA, MODE_T
from match_domain.votes import VoteCloud
from shape_domain.geometry import (
    RigidMotion,
    Transform,
    Translation,
    normalize_angle,
    transform_params,
)
from shape_domain.sampling import RandomSource

logger = logging.getLogger(__name__)

METHOD_EXACT = 'exact'
METHOD_APPROX = 'approx'


# ═══════════════════════════════════════════════════════════════
# TIPOS
# ═══════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class DepthQuery:
    """
    δ-vecindad en norma máximo: caja de semiancho delta·scale[k] por eje.

    scale=None equivale a 1 en todos los ejes. Para modos rígidos el eje 0
    es alpha (revoluciones).
    """
    delta: float
    scale: Optional[Tuple[float, ...]] = None
    angle_wrap: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.delta) and self.delta > 0):
            raise ConfigError(f"delta debe ser > 0 (recibido {self.delta})")
        if self.scale is not None:
            scale = tuple(float(s) for s in self.scale)
            if not all(np.isfinite(s) and s > 0 for s in scale):
                raise ConfigError(f"scale debe ser positiva en todos los ejes (recibido {scale})")
            object.__setattr__(self, 'scale', scale)

    @classmethod
    def for_cloud(cls, cloud: VoteCloud, delta: float,
                  scale: Optional[Sequence[float]] = None) -> 'DepthQuery':
        return cls(delta=delta, scale=None if scale is None else tuple(scale),
                   angle_wrap=cloud.is_rigid)

    def half_widths(self, dims: int) -> np.ndarray:
        if self.scale is None:
            return np.full(dims, float(self.delta))
        if len(self.scale) != dims:
            raise ConfigError(f"scale tiene {len(self.scale)} ejes; la nube tiene {dims}")
        return self.delta * np.asarray(self.scale, dtype=float)

    def box_volume(self, dims: int) -> float:
        """μ_δ: volumen de la δ-vecindad (4δ² en T, 8δ³ en modos rígidos con scale 1)."""
        return float(np.prod(2.0 * self.half_widths(dims)))


@dataclass(frozen=True)
class DepthResult:
    """
    En el método exacto argmax es el punto evento de la celda más profunda
    (su esquina inferior, la que define el desempate) y `center` el centro de
    esa celda. En el aproximado argmax es el centro del bloque elegido.
    """
    argmax: Transform
    depth: int
    method: str
    approx_factor: float = 1.0
    center: Optional[Transform] = None


# ═══════════════════════════════════════════════════════════════
# PREPARACIÓN
# ═══════════════════════════════════════════════════════════════

def _wraps(cloud: VoteCloud, q: DepthQuery) -> bool:
    if q.angle_wrap and not cloud.is_rigid:
        raise ConfigError("angle_wrap sólo aplica a nubes de movimientos rígidos")
    return q.angle_wrap


def _check_wrap(h: np.ndarray, wrap: bool) -> None:
    if wrap and h[0] >= MAX_WRAP_DELTA:
        raise ConfigError(
            f"Semiancho angular {h[0]:.6g} >= {MAX_WRAP_DELTA}: las cajas se "
            f"solaparían consigo mismas al dar la vuelta"
        )


def _extended(points: np.ndarray, h: np.ndarray, wrap: bool) -> np.ndarray:
    """Duplica (desplazados en ±1) los votos cuya caja cruza ±1/2 en alpha."""
    if not wrap:
        return points
    alpha = points[:, 0]
    high = points[alpha + h[0] >= 0.5].copy()
    high[:, 0] -= 1.0
    low = points[alpha - h[0] < -0.5].copy()
    low[:, 0] += 1.0
    return np.concatenate([points, high, low])


def _prepare(cloud: VoteCloud, q: DepthQuery):
    if len(cloud) < 1:
        raise ConfigError("La nube de votos está vacía")
    wrap = _wraps(cloud, q)
    h = q.half_widths(cloud.points.shape[1])
    _check_wrap(h, wrap)
    ext = _extended(cloud.points, h, wrap)
    return ext - h, ext + h, h, wrap


def _to_transform(cloud: VoteCloud, point: np.ndarray) -> Transform:
    if cloud.mode == MODE_T:
        return Translation(float(point[0]), float(point[1]))
    return RigidMotion(normalize_angle(float(point[0])), float(point[1]), float(point[2]))


def _as_point(cloud: VoteCloud, point: Union[Transform, Sequence[float]], wrap: bool) -> np.ndarray:
    if isinstance(point, (Translation, RigidMotion)):
        alpha, tx, ty = transform_params(point)
        p = np.array([tx, ty]) if cloud.mode == MODE_T else np.array([alpha, tx, ty])
    else:
        p = np.asarray(point, dtype=float).copy()
    if p.shape != (cloud.points.shape[1],):
        raise ConfigError(f"Punto de dimensión {p.shape} para nube de {cloud.points.shape[1]} ejes")
    if wrap:
        p[0] = normalize_angle(p[0])
    return p


# ═══════════════════════════════════════════════════════════════
# CONTEO
# ═══════════════════════════════════════════════════════════════

def _box_counts(shape: Sequence[int], first: np.ndarray, last: np.ndarray) -> np.ndarray:
    """
    counts[c] = número de cajas de índices enteros [first_i, last_i] (inclusivo)
    que contienen a c. Arreglo de diferencias en las 2^d esquinas + cumsum por eje.
    """
    d = len(shape)
    diff = np.zeros(tuple(n + 1 for n in shape), dtype=np.int32)
    for bits in itertools.product((0, 1), repeat=d):
        index = tuple(last[:, k] + 1 if bit else first[:, k] for k, bit in enumerate(bits))
        np.add.at(diff, index, -1 if sum(bits) % 2 else 1)
    for k in range(d):
        np.cumsum(diff, axis=k, out=diff)
    return diff[tuple(slice(0, n) for n in shape)]


def _count_covering(lo: np.ndarray, hi: np.ndarray, p: np.ndarray) -> int:
    return int(np.count_nonzero(np.all((lo <= p) & (p <= hi), axis=1)))


def depth_at(cloud: VoteCloud, point: Union[Transform, Sequence[float]], q: DepthQuery) -> int:
    """Votos dentro de la δ-vecindad cerrada de `point` (circular en alpha)."""
    lo, hi, _, wrap = _prepare(cloud, q)
    return _count_covering(lo, hi, _as_point(cloud, point, wrap))


def density_estimate(cloud: VoteCloud, point: Union[Transform, Sequence[float]],
                     q: DepthQuery) -> float:
    """depth_at / (N · μ_δ)"""
    dims = cloud.points.shape[1]
    return depth_at(cloud, point, q) / (len(cloud) * q.box_volume(dims))


# ═══════════════════════════════════════════════════════════════
# MÉTODO EXACTO
# ═══════════════════════════════════════════════════════════════

def _best_on_candidates(cands: List[np.ndarray], lo: np.ndarray, hi: np.ndarray,
                        max_cells: int) -> Tuple[int, Optional[np.ndarray]]:
    """
    Máximo de cobertura sobre la grilla producto de candidatos (ordenados).
    argmax en orden C devuelve el primer máximo: el lexicográficamente menor.
    """
    d = len(cands)
    sizes = [len(c) for c in cands]
    first = np.stack([np.searchsorted(cands[k], lo[:, k], side='left') for k in range(d)], axis=1)
    last = np.stack([np.searchsorted(cands[k], hi[:, k], side='right') - 1 for k in range(d)], axis=1)
    keep = np.all(first <= last, axis=1)
    first, last = first[keep], last[keep]
    if len(first) == 0:
        return 0, None

    rows = max(1, max_cells // max(1, int(np.prod(sizes[1:]))))
    best, best_index = 0, None
    for start in range(0, sizes[0], rows):
        stop = min(sizes[0], start + rows)
        f0 = np.maximum(first[:, 0], start)
        l0 = np.minimum(last[:, 0], stop - 1)
        inside = f0 <= l0
        if not np.any(inside):
            continue
        f = first[inside].copy()
        l = last[inside].copy()
        f[:, 0] = f0[inside] - start
        l[:, 0] = l0[inside] - start
        counts = _box_counts([stop - start] + sizes[1:], f, l)
        flat = int(np.argmax(counts))
        value = int(counts.flat[flat])
        if value > best:
            best = value
            best_index = np.array(np.unravel_index(flat, counts.shape))
            best_index[0] += start
    point = np.array([cands[k][best_index[k]] for k in range(d)])
    return best, point


def _cell_grid(lo: np.ndarray, hi: np.ndarray, h: np.ndarray, cell_split: int, max_cells: int):
    d = lo.shape[1]
    origin = lo.min(axis=0)
    extent = hi.max(axis=0) - origin
    width = h / max(1, cell_split)
    while True:
        shape = (np.floor(extent / width).astype(np.int64) + 1)
        total = float(np.prod(shape.astype(float)))
        if total <= max_cells:
            break
        width = width * max((total / max_cells) ** (1.0 / d), 1.0 + 1e-6)
    return origin, width, tuple(int(n) for n in shape)


def _exact_deepest(lo: np.ndarray, hi: np.ndarray, h: np.ndarray, wrap: bool,
                   config: dict) -> Tuple[int, np.ndarray, int]:
    d = lo.shape[1]
    origin, width, shape = _cell_grid(lo, hi, h, config['cell_split'], config['max_grid_cells'])
    upper = np.array(shape) - 1
    first = np.clip(np.floor((lo - origin) / width).astype(np.int64), 0, upper)
    last = np.clip(np.floor((hi - origin) / width).astype(np.int64), 0, upper)

    # Sólo votos cuyo lo es candidato válido aportan coordenadas candidatas
    valid = np.ones(len(lo), dtype=bool)
    if wrap:
        valid = (lo[:, 0] >= -0.5) & (lo[:, 0] < 0.5)

    bound = _box_counts(shape, first, last)
    for k in range(d):
        axis_has = np.zeros(shape[k], dtype=bool)
        axis_has[first[valid if k == 0 else slice(None), k]] = True
        view = [np.newaxis] * d
        view[k] = slice(None)
        bound = np.where(axis_has[tuple(view)], bound, 0)

    flat_bound = bound.ravel()
    nonzero = np.flatnonzero(flat_bound)
    order = nonzero[np.argsort(-flat_bound[nonzero], kind='stable')]

    perm = np.argsort(first[:, 0], kind='stable')
    lo_s, hi_s, first_s, last_s, valid_s = lo[perm], hi[perm], first[perm], last[perm], valid[perm]
    span0 = int(np.max(last[:, 0] - first[:, 0]))

    best_depth, best_point, visited = 0, None, 0
    for cell_flat in order:
        if flat_bound[cell_flat] < best_depth:
            break
        visited += 1
        cell = np.array(np.unravel_index(cell_flat, shape))
        start = np.searchsorted(first_s[:, 0], cell[0] - span0, side='left')
        stop = np.searchsorted(first_s[:, 0], cell[0], side='right')
        window = slice(start, stop)
        covers = np.all((first_s[window] <= cell) & (last_s[window] >= cell), axis=1)
        glo, ghi = lo_s[window][covers], hi_s[window][covers]
        gfirst, gvalid = first_s[window][covers], valid_s[window][covers]

        cands = []
        for k in range(d):
            own = gfirst[:, k] == cell[k]
            if k == 0:
                own &= gvalid
            cands.append(np.unique(glo[own, k]))
        if any(len(c) == 0 for c in cands):
            continue

        value, point = _best_on_candidates(cands, glo, ghi, config['max_candidate_cells'])
        if point is None:
            continue
        if value > best_depth or (value == best_depth and tuple(point) < tuple(best_point)):
            best_depth, best_point = value, point

    return best_depth, best_point, visited


def _deepest_exact(cloud: VoteCloud, q: DepthQuery) -> DepthResult:
    start = time.time()
    lo, hi, h, wrap = _prepare(cloud, q)
    depth, corner, visited = _exact_deepest(lo, hi, h, wrap, DEPTH_CONFIG)
    # La celda es [corner, min hi] sobre los votos que cubren la esquina
    covering = np.all((lo <= corner) & (corner <= hi), axis=1)
    center = 0.5 * (corner + hi[covering].min(axis=0))
    result = DepthResult(argmax=_to_transform(cloud, corner), depth=depth,
                         method=METHOD_EXACT, approx_factor=1.0,
                         center=_to_transform(cloud, center))
    logger.info(
        f"📐 [DEPTH] Exacto: profundidad {depth}/{len(cloud)} en {result.argmax} "
        f"({visited} celdas visitadas, {time.time() - start:.2f}s)"
    )
    return result


def deepest_2d(votes: VoteCloud, q: DepthQuery) -> DepthResult:
    """Traslación de máxima profundidad; desempate lexicográfico (x, y)."""
    if votes.mode != MODE_T:
        raise ConfigError(f"deepest_2d requiere votos de traslación (modo {votes.mode})")
    return _deepest_exact(votes, q)


def deepest_3d(votes: VoteCloud, q: DepthQuery) -> DepthResult:
    """Movimiento rígido de máxima profundidad; desempate lexicográfico (alpha, x, y)."""
    if not votes.is_rigid:
        raise ConfigError(f"deepest_3d requiere votos rígidos (modo {votes.mode})")
    return _deepest_exact(votes, q)


# ═══════════════════════════════════════════════════════════════
# MÉTODO APROXIMADO
# ═══════════════════════════════════════════════════════════════

def deepest_approx(votes: VoteCloud, q: DepthQuery,
                   rng: Optional[RandomSource] = None) -> DepthResult:
    """
    Celdas de ancho 2δ desplazadas en pasos de δ/2 sobre cada eje.

    Toda caja de semiancho δ/2 cabe en alguna de esas celdas, y la δ-vecindad
    del centro de una celda la contiene; por eso la profundidad en el centro
    elegido es al menos el máximo de las (δ/2)-vecindades. Con `rng`, el
    ancla de la grilla se desplaza al azar dentro de una celda fina.
    """
    start = time.time()
    lo, hi, h, wrap = _prepare(votes, q)
    ext = _extended(votes.points, h, wrap)
    d = ext.shape[1]
    step = 0.5 * h
    anchor = np.zeros(d) if rng is None else rng.random(d) * step

    fine = np.floor((ext - anchor) / step).astype(np.int64)
    cells, counts = np.unique(fine, axis=0, return_counts=True)

    # Cada celda fina aporta a los 4^d bloques 4x..x4 que la contienen
    base = cells.min(axis=0) - 3
    dims = tuple(int(n) for n in cells.max(axis=0) - base + 1)
    offsets = np.array(list(itertools.product(range(4), repeat=d)), dtype=np.int64)
    corners = (cells[:, None, :] - offsets[None, :, :] - base).reshape(-1, d)
    keys = np.ravel_multi_index(tuple(corners.T), dims)
    weights = np.repeat(counts, len(offsets))
    block_keys, inverse = np.unique(keys, return_inverse=True)
    block_counts = np.bincount(inverse.ravel(), weights=weights).astype(np.int64)

    lower = np.stack(np.unravel_index(block_keys, dims), axis=1) + base
    centers = anchor + (lower + 2) * step
    if wrap:
        inside = (centers[:, 0] >= -0.5) & (centers[:, 0] < 0.5)
        block_counts = np.where(inside, block_counts, -1)

    # block_keys viene ordenado: el primer máximo es el centro lexicográficamente menor
    best = int(np.argmax(block_counts))
    center = centers[best]
    depth = _count_covering(lo, hi, center)
    result = DepthResult(argmax=_to_transform(votes, center), depth=depth,
                         method=METHOD_APPROX, approx_factor=APPROX_FACTOR)
    logger.info(
        f"📐 [DEPTH] Aproximado: profundidad {depth}/{len(votes)} en {result.argmax} "
        f"({len(block_keys)} bloques, {time.time() - start:.2f}s)"
    )
    return result


def deepest(votes: VoteCloud, q: DepthQuery, method: str = METHOD_EXACT,
            rng: Optional[RandomSource] = None) -> DepthResult:
    """Despacha por método y modo."""
    if method == METHOD_APPROX:
        return deepest_approx(votes, q, rng)
    if method != METHOD_EXACT:
        raise ConfigError(f"Método de profundidad desconocido: {method!r} (exact o approx)")
    if votes.mode == MODE_T:
        return deepest_2d(votes, q)
    return deepest_3d(votes, q)
