"""
Generación de puntos uniformes sobre una TriangleSoup
- Preproceso O(n): partición de [0,1] proporcional al área de cada triángulo
- O(log n) por punto: búsqueda binaria + coordenadas baricéntricas
- Fuente aleatoria determinística con substreams (Philox + SeedSequence)
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from core.errors import InvalidShapeError
from match_domain.config import DISJOINTNESS_SAMPLES, DISJOINTNESS_SEED
from shape_domain.geometry import Point2, TriangleSoup, count_strictly_inside

logger = logging.getLogger(__name__)

_UINT64 = 2 ** 64


class RandomSource:
    """
    Generador determinístico identificado por (seed, stream).

    Mismo (seed, stream) → misma secuencia en cualquier corrida y plataforma
    (Philox es un generador basado en contador). No compartir entre hilos:
    cada worker usa su propio stream.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed) % _UINT64
        self.stream = int(stream) % _UINT64
        sequence = np.random.SeedSequence([self.seed, self.stream])
        self._generator = np.random.Generator(np.random.Philox(sequence))

    def random(self, size=None):
        """Uniformes en [0, 1)."""
        return self._generator.random(size)

    def substream(self, stream: int) -> 'RandomSource':
        return RandomSource(self.seed, stream)

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed}, stream={self.stream})"


@dataclass(frozen=True)
class AreaIndex:
    soup: TriangleSoup
    cumulative: np.ndarray


def build_area_index(A: TriangleSoup) -> AreaIndex:
    areas = A.areas
    if np.any(areas <= 0.0):
        raise InvalidShapeError("Triángulo de área nula en la forma")
    cumulative = np.cumsum(areas) / areas.sum()
    cumulative[-1] = 1.0
    cumulative.setflags(write=False)
    return AreaIndex(soup=A, cumulative=cumulative)


def sample_points(idx: AreaIndex, rng: RandomSource, n: int, return_triangles: bool = False):
    """
    n puntos uniformes sobre la forma.

    Consume exactamente 3 uniformes por punto, en el mismo orden que n
    llamadas a sample_point: selección de triángulo y dos baricéntricas.
    """
    u = rng.random((n, 3))
    tri = np.searchsorted(idx.cumulative, u[:, 0], side='right')
    tri = np.minimum(tri, len(idx.cumulative) - 1)

    s, t = u[:, 1], u[:, 2]
    fold = s + t > 1.0
    s = np.where(fold, 1.0 - s, s)
    t = np.where(fold, 1.0 - t, t)

    v = idx.soup.vertices[tri]
    points = v[:, 0] + s[:, None] * (v[:, 1] - v[:, 0]) + t[:, None] * (v[:, 2] - v[:, 0])
    if return_triangles:
        return points, tri
    return points


def sample_point(idx: AreaIndex, rng: RandomSource) -> Point2:
    x, y = sample_points(idx, rng, 1)[0]
    return Point2(float(x), float(y))


def check_interior_disjoint(A: TriangleSoup, n_samples: int = DISJOINTNESS_SAMPLES,
                            seed: Optional[int] = None) -> None:
    """
    Verificación probabilística de interiores disjuntos.
    Un punto muestreado estrictamente dentro de 2+ triángulos es error de carga.
    """
    if len(A) < 2:
        return
    rng = RandomSource(DISJOINTNESS_SEED if seed is None else seed)
    points = sample_points(build_area_index(A), rng, n_samples)
    counts = count_strictly_inside(A, points)
    overlapping = np.nonzero(counts >= 2)[0]
    if len(overlapping):
        p = points[overlapping[0]]
        raise InvalidShapeError(
            f"Triángulos solapados: el punto ({p[0]:.6g}, {p[1]:.6g}) está dentro de "
            f"{int(counts[overlapping[0]])} triángulos ({len(overlapping)}/{n_samples} muestras)"
        )
    logger.debug(f"✅ [SAMPLING] Disjunción interior verificada con {n_samples} muestras")
