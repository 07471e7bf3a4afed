"""
Planificador de parámetros
- Constantes de Lipschitz por modo
- δ, η y cantidad de votos N (M aceptados e intentos para RM3+1) en forma cerrada
- Estimación de κ (gordura) por círculo inscrito
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional

import numpy as np

from core.config import MATCH_CONFIG
from core.errors import ConfigError
from match_domain.config import (
    CIRCLE_CHECK_POINTS,
    KAPPA_REFINE_POINTS,
    KAPPA_REFINE_ROUNDS,
    MODE_RM31,
    MODE_RMRA,
    MODE_T,
    normalize_mode,
)
from shape_domain.geometry import (
    ShapeStats,
    TriangleSoup,
    boundary_edges,
    contains_many,
    distance_to_boundary,
)

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)


@dataclass
class MatchPlan:
    mode: str
    epsilon: float
    tau: float
    delta: float
    eta: float
    votes_needed: int
    kappa: Optional[float] = None
    attempts_budget: Optional[int] = None
    relative: bool = False
    constants: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


# ═══════════════════════════════════════════════════════════════
# VALIDACIÓN
# ═══════════════════════════════════════════════════════════════

def _check_open_unit(name: str, value: float) -> None:
    if not (0.0 < value < 1.0):
        raise ConfigError(f"{name} debe estar en (0, 1) (recibido {value})")


def _check_kappa(kappa: Optional[float]) -> float:
    if kappa is None or not (0.0 < kappa <= 1.0):
        raise ConfigError(f"kappa debe estar en (0, 1] (recibido {kappa})")
    return float(kappa)


def _rigid_factor(stats: ShapeStats) -> float:
    """√2 + 2πD"""
    return SQRT2 + 2.0 * math.pi * stats.diameter


# ═══════════════════════════════════════════════════════════════
# CONSTANTES
# ═══════════════════════════════════════════════════════════════

def lipschitz_constant(mode: str, statsA: ShapeStats, statsB: ShapeStats) -> float:
    """
    L del modo sobre la densidad inducida.
    Para RM3+1 es una cota: la constante c del modelo se reemplaza por |A|²|B|.
    """
    mode = normalize_mode(mode)
    area_a, area_b = statsA.area, statsB.area
    delta_len = statsA.boundary_length
    if mode == MODE_T:
        return SQRT2 * delta_len / (area_a * area_b)
    if mode == MODE_RMRA:
        return _rigid_factor(statsA) * delta_len / (area_a * area_b)
    c_bound = area_a ** 2 * area_b
    return 2.0 * _rigid_factor(statsA) * delta_len * min(area_a, area_b) / c_bound


def overlap_lipschitz(stats: ShapeStats) -> float:
    """Cota de Lipschitz del área de solapamiento en movimientos rígidos: (√2 + 2πD)Δ."""
    return _rigid_factor(stats) * stats.boundary_length


def _votes_count(eta: float, tau_term: float, offset: int, factor: int) -> int:
    """ceil(max(16/η²·ln(tau_term) + offset, factor/η²·ln(factor/η²)))"""
    inv = 1.0 / (eta * eta)
    n = max(16.0 * inv * math.log(tau_term) + offset, factor * inv * math.log(factor * inv))
    if not math.isfinite(n):
        raise ConfigError(f"η = {eta:.3g} demasiado pequeño: la cantidad de votos desborda")
    n = math.ceil(n)
    # La cota de Chernoff del conteo exige N > 6/η + 2
    return max(n, math.floor(6.0 / eta + 2.0) + 1)


def _base_constants(statsA: ShapeStats, statsB: ShapeStats, mode: str) -> Dict[str, float]:
    return {
        'areaA': statsA.area,
        'areaB': statsB.area,
        'Delta': statsA.boundary_length,
        'D': statsA.diameter,
        'L': lipschitz_constant(mode, statsA, statsB),
    }


# ═══════════════════════════════════════════════════════════════
# PLANES
# ═══════════════════════════════════════════════════════════════

def plan_translation(statsA: ShapeStats, statsB: ShapeStats, eps: float, tau: float) -> MatchPlan:
    _check_open_unit('epsilon', eps)
    _check_open_unit('tau', tau)
    area_a, area_b, delta_len = statsA.area, statsB.area, statsA.boundary_length

    delta = eps * area_a / (9.0 * SQRT2 * delta_len)
    eta = eps ** 3 * area_a ** 2 / (243.0 * delta_len ** 2 * area_b)
    constants = _base_constants(statsA, statsB, MODE_T)
    constants['mu_delta'] = 4.0 * delta ** 2
    constants['c'] = area_b ** 2 * delta_len ** 4 / area_a ** 4

    return MatchPlan(
        mode=MODE_T, epsilon=eps, tau=tau, delta=delta, eta=eta,
        votes_needed=_votes_count(eta, 1.0 / tau, 2, 80),
        constants=constants,
    )


def plan_rmra(statsA: ShapeStats, statsB: ShapeStats, eps: float, tau: float) -> MatchPlan:
    _check_open_unit('epsilon', eps)
    _check_open_unit('tau', tau)
    area_a, area_b, delta_len = statsA.area, statsB.area, statsA.boundary_length
    rigid = _rigid_factor(statsA)

    delta = eps * area_a / (8.0 * rigid * delta_len)
    eta = eps ** 4 * area_a ** 3 / (512.0 * rigid ** 3 * delta_len ** 3 * area_b)
    constants = _base_constants(statsA, statsB, MODE_RMRA)
    constants['mu_delta'] = 8.0 * delta ** 3
    constants['C'] = area_b ** 2 * delta_len ** 6 * statsA.diameter ** 6 / area_a ** 6

    return MatchPlan(
        mode=MODE_RMRA, epsilon=eps, tau=tau, delta=delta, eta=eta,
        votes_needed=_votes_count(eta, 1.0 / tau, 3, 112),
        constants=constants,
    )


def plan_rm31(statsA: ShapeStats, statsB: ShapeStats, eps: float, tau: float,
              kappa: float) -> MatchPlan:
    """
    Plan para RM3+1. Supone que el círculo inscrito máximo de A no es mayor
    que el de B (el pipeline lo verifica y avisa).
    """
    _check_open_unit('epsilon', eps)
    _check_open_unit('tau', tau)
    kappa = _check_kappa(kappa)
    area_a, area_b, delta_len = statsA.area, statsB.area, statsA.boundary_length
    rigid = _rigid_factor(statsA)

    delta = eps * area_a / (16.0 * rigid * delta_len)
    eta = eps ** 4 * kappa * area_a ** 3 / (4096.0 * area_b * rigid ** 3 * delta_len ** 3)
    votes = _votes_count(eta, 2.0 / tau, 3, 112)
    p = (kappa / 4.0) ** 3
    attempts = math.ceil(max(2.0 * votes / p, 8.0 / p ** 2 * math.log(4.0 / tau)))

    constants = _base_constants(statsA, statsB, MODE_RM31)
    constants['L_is_bound'] = 1.0
    constants['mu_delta'] = 8.0 * delta ** 3
    constants['C_prime'] = area_b ** 2 * delta_len ** 6 * statsA.diameter ** 6 / area_a ** 6
    constants['p'] = p

    return MatchPlan(
        mode=MODE_RM31, epsilon=eps, tau=tau, kappa=kappa, delta=delta, eta=eta,
        votes_needed=votes, attempts_budget=attempts, constants=constants,
    )


def plan(mode: str, statsA: ShapeStats, statsB: ShapeStats, eps: float, tau: float,
         kappa: Optional[float] = None, relative: bool = False) -> MatchPlan:
    """
    Despacha por modo. Con `relative`, planifica con ε' = ε·κ para garantizar
    error relativo ε respecto del óptimo.
    """
    mode = normalize_mode(mode)
    _check_open_unit('epsilon', eps)
    eps_used = eps
    if relative:
        eps_used = eps * _check_kappa(kappa)

    if mode == MODE_T:
        result = plan_translation(statsA, statsB, eps_used, tau)
    elif mode == MODE_RMRA:
        result = plan_rmra(statsA, statsB, eps_used, tau)
    else:
        result = plan_rm31(statsA, statsB, eps_used, tau, kappa)

    if relative:
        result.epsilon = eps
        result.kappa = kappa
        result.relative = True
        result.constants['epsilon_used'] = eps_used

    warn_limit = MATCH_CONFIG['vote_warn_limit']
    if result.votes_needed > warn_limit:
        logger.warning(
            f"⚠️ [PLANNER] El plan teórico pide {result.votes_needed:.3g} votos "
            f"(> {warn_limit:.0e}); las cotas son conservadoras, usar --n-votes"
        )
    logger.info(
        f"📋 [PLANNER] {mode}: δ={result.delta:.6g}, η={result.eta:.6g}, "
        f"N={result.votes_needed:.6g}"
    )
    return result


# ═══════════════════════════════════════════════════════════════
# KAPPA
# ═══════════════════════════════════════════════════════════════

def _circle_fits(A: TriangleSoup, center: np.ndarray, radius: float) -> bool:
    angles = np.linspace(0.0, 2.0 * math.pi, CIRCLE_CHECK_POINTS, endpoint=False)
    ring = center + radius * np.column_stack([np.cos(angles), np.sin(angles)])
    return bool(np.all(contains_many(A, ring)) and contains_many(A, center[None])[0])


def inscribed_circle(A: TriangleSoup, grid_resolution: Optional[int] = None):
    """
    Centro y radio de un círculo inscrito grande: máximo de la distancia al
    borde sobre una grilla de puntos interiores, refinado localmente.

    Returns:
        (centro (2,), radio)
    """
    resolution = int(grid_resolution or MATCH_CONFIG['kappa_resolution'])
    if resolution < 2:
        raise ConfigError(f"grid_resolution debe ser >= 2 (recibido {resolution})")
    edges = boundary_edges(A)
    min_x, max_x, min_y, max_y = A.bbox
    step = np.array([(max_x - min_x) / resolution, (max_y - min_y) / resolution])

    xs = min_x + (np.arange(resolution) + 0.5) * step[0]
    ys = min_y + (np.arange(resolution) + 0.5) * step[1]
    gx, gy = np.meshgrid(xs, ys, indexing='ij')
    grid = np.column_stack([gx.ravel(), gy.ravel()])
    # Los baricentros cubren formas más finas que la grilla
    points = np.concatenate([grid, A.vertices.mean(axis=1)])
    points = points[contains_many(A, points)]

    dist = distance_to_boundary(A, points, edges)
    best = int(np.argmax(dist))
    center, radius = points[best], float(dist[best])

    offsets = np.linspace(-1.0, 1.0, KAPPA_REFINE_POINTS)
    for _ in range(KAPPA_REFINE_ROUNDS):
        ox, oy = np.meshgrid(offsets * step[0], offsets * step[1], indexing='ij')
        local = center + np.column_stack([ox.ravel(), oy.ravel()])
        local = local[contains_many(A, local)]
        if len(local):
            local_dist = distance_to_boundary(A, local, edges)
            i = int(np.argmax(local_dist))
            if local_dist[i] > radius:
                center, radius = local[i], float(local_dist[i])
        step = step * 2.0 / (KAPPA_REFINE_POINTS - 1)

    for _ in range(50):
        if _circle_fits(A, center, radius):
            break
        logger.debug(f"📐 [PLANNER] Círculo de radio {radius:.6g} no cabe; se reduce")
        radius *= 0.99
    return center, radius


def estimate_kappa(A: TriangleSoup, grid_resolution: Optional[int] = None) -> float:
    """κ̂ = π·r̂²/|A| con r̂ el radio inscrito estimado; nunca mayor a 1."""
    center, radius = inscribed_circle(A, grid_resolution)
    kappa = min(1.0, math.pi * radius ** 2 / A.area)
    logger.info(
        f"📐 [PLANNER] κ̂ = {kappa:.4f} (radio {radius:.6g} en "
        f"({center[0]:.4g}, {center[1]:.4g}))"
    )
    return kappa
