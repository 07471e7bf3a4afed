"""
Oráculo independiente para validar el matching
- grid_search: máximo del área de solapamiento por fuerza bruta sobre una grilla
- mc_overlap: estimación Monte Carlo del área de solapamiento
"""
import logging
import math
import time
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from core.config import ORACLE_CONFIG
from core.errors import ConfigError
from match_domain.config import MODE_T, normalize_mode
from shape_domain.geometry import (
    TWO_PI,
    RigidMotion,
    Transform,
    Translation,
    TriangleSoup,
    apply_points,
    contains_many,
    overlap_area,
    overlap_areas,
    shape_stats,
)
from shape_domain.sampling import RandomSource, build_area_index, sample_points

logger = logging.getLogger(__name__)

Range = Tuple[float, float]


@dataclass(frozen=True)
class GridSpec:
    """
    Grilla de búsqueda anclada en múltiplos enteros de los pasos.

    angle_step en revoluciones; None → step / (2πD) con D el diámetro de A.
    Los rangos explícitos reemplazan a los derivados de las cajas envolventes.
    """
    step: float
    angle_step: Optional[float] = None
    tx_range: Optional[Range] = None
    ty_range: Optional[Range] = None
    angle_range: Optional[Range] = None

    def __post_init__(self):
        if not (math.isfinite(self.step) and self.step > 0):
            raise ConfigError(f"El paso de traslación debe ser > 0 (recibido {self.step})")
        if self.angle_step is not None and not (math.isfinite(self.angle_step) and self.angle_step > 0):
            raise ConfigError(f"El paso angular debe ser > 0 (recibido {self.angle_step})")


# ═══════════════════════════════════════════════════════════════
# GRILLA
# ═══════════════════════════════════════════════════════════════

def _axis_values(lo: float, hi: float, step: float) -> np.ndarray:
    """Múltiplos de step que cubren [lo, hi] con un paso de margen."""
    if lo > hi:
        return np.empty(0)
    first = math.floor(lo / step) - 1
    last = math.ceil(hi / step) + 1
    return np.arange(first, last + 1) * step


def _angle_values(spec: GridSpec, angle_step: float) -> np.ndarray:
    lo, hi = spec.angle_range if spec.angle_range is not None else (-0.5, 0.5)
    lo, hi = max(lo, -0.5), min(hi, 0.5)
    if lo >= hi:
        return np.empty(0)
    ks = np.arange(math.ceil(lo / angle_step), math.floor(hi / angle_step) + 1)
    angles = ks * angle_step
    if spec.angle_range is None:
        return angles[(angles >= -0.5) & (angles < 0.5)]
    return angles[(angles >= lo) & (angles <= hi) & (angles < 0.5)]


def _translation_block(A: TriangleSoup, B: TriangleSoup, alpha: float, spec: GridSpec) -> np.ndarray:
    """Parámetros (k, 3) para un ángulo fijo, en orden lexicográfico (tx, ty)."""
    b_min_x, b_max_x, b_min_y, b_max_y = B.bbox
    if spec.tx_range is not None:
        tx_lo, tx_hi = spec.tx_range
    if spec.ty_range is not None:
        ty_lo, ty_hi = spec.ty_range
    if spec.tx_range is None or spec.ty_range is None:
        moved = apply_points(RigidMotion(alpha, 0.0, 0.0), A.vertices.reshape(-1, 2))
        a_min, a_max = moved.min(axis=0), moved.max(axis=0)
        if spec.tx_range is None:
            tx_lo, tx_hi = b_min_x - a_max[0], b_max_x - a_min[0]
        if spec.ty_range is None:
            ty_lo, ty_hi = b_min_y - a_max[1], b_max_y - a_min[1]

    xs = _axis_values(tx_lo, tx_hi, spec.step)
    ys = _axis_values(ty_lo, ty_hi, spec.step)
    if len(xs) == 0 or len(ys) == 0:
        return np.empty((0, 3))
    gx, gy = np.meshgrid(xs, ys, indexing='ij')
    return np.column_stack([np.full(gx.size, alpha), gx.ravel(), gy.ravel()])


def grid_params(A: TriangleSoup, B: TriangleSoup, mode: str, spec: GridSpec) -> np.ndarray:
    """Todos los puntos de la grilla como (alpha, tx, ty), en orden lexicográfico de índices."""
    mode = normalize_mode(mode)
    if mode == MODE_T:
        return _translation_block(A, B, 0.0, spec)

    angle_step = spec.angle_step
    if angle_step is None:
        angle_step = spec.step / (TWO_PI * shape_stats(A).diameter)
    blocks = [_translation_block(A, B, float(a), spec) for a in _angle_values(spec, angle_step)]
    return np.concatenate(blocks) if blocks else np.empty((0, 3))


def _to_transform(mode: str, row: np.ndarray) -> Transform:
    if mode == MODE_T:
        return Translation(float(row[1]), float(row[2]))
    return RigidMotion(float(row[0]), float(row[1]), float(row[2]))


# ═══════════════════════════════════════════════════════════════
# OPERACIONES
# ═══════════════════════════════════════════════════════════════

def grid_search(A: TriangleSoup, B: TriangleSoup, mode: str, spec: GridSpec) -> Tuple[Transform, float]:
    """
    Máximo de overlap_area sobre la grilla; empate → menor índice de grilla.

    Rango vacío → identidad con su solapamiento.
    """
    mode = normalize_mode(mode)
    start = time.time()
    params = grid_params(A, B, mode, spec)
    cap = min(A.area, B.area)

    if len(params) == 0:
        identity = Translation(0.0, 0.0) if mode == MODE_T else RigidMotion(0.0, 0.0, 0.0)
        value = min(overlap_area(A, B, identity), cap)
        logger.warning(f"⚠️ [ORACLE] Rango de búsqueda vacío; se evalúa la identidad ({value:.6g})")
        return identity, value

    logger.info(f"🔎 [ORACLE] Evaluando {len(params)} puntos de grilla (modo {mode}, paso {spec.step})")
    chunk = ORACLE_CONFIG['chunk_rows']
    values = np.concatenate([
        overlap_areas(A, B, params[i:i + chunk]) for i in range(0, len(params), chunk)
    ])
    best = int(np.argmax(values))
    value = float(min(values[best], cap))
    transform = _to_transform(mode, params[best])
    logger.info(f"✅ [ORACLE] Óptimo {value:.6g} en {transform} ({time.time() - start:.2f}s)")
    return transform, value


def mc_overlap(A: TriangleSoup, B: TriangleSoup, t: Transform, n_samples: int,
               rng: RandomSource) -> Tuple[float, float]:
    """
    Returns:
        (|A|·p̂, |A|·√(p̂(1-p̂)/n)) con p̂ la fracción de a ∈ A tal que t(a) ∈ B
    """
    if n_samples < 1:
        raise ConfigError(f"n_samples debe ser >= 1 (recibido {n_samples})")
    points = sample_points(build_area_index(A), rng, int(n_samples))
    hits = int(np.count_nonzero(contains_many(B, apply_points(t, points))))
    p_hat = hits / n_samples
    estimate = A.area * p_hat
    sigma = A.area * math.sqrt(p_hat * (1.0 - p_hat) / n_samples)
    logger.debug(f"🎯 [ORACLE] Monte Carlo: {estimate:.6g} ± {sigma:.2g} ({n_samples} muestras)")
    return estimate, sigma
