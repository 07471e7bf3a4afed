"""
Experimentos aleatorios que generan "votos" en el espacio de transformaciones
- T:    a ∈ A, b ∈ B  →  traslación b - a
- RMRA: a ∈ A, b ∈ B, α uniforme  →  x ↦ M_α x + (b - M_α a)
- RM31: a₁, a₂ ∈ A, b₁ ∈ B, β uniforme; b₂ = b₁ + ‖a₂-a₁‖ M_β (1,0)ᵀ
        se acepta sólo si b₂ ∈ B  →  el movimiento que lleva (a₁,a₂) a (b₁,b₂)
"""
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from core.errors import AcceptanceStarvationError, ConfigError
from match_domain.config import (
    MODE_RM31,
    MODE_RMRA,
    MODE_T,
    RM31_ATTEMPTS_PER_VOTE_CAP,
    RM31_MIN_ATTEMPT_CAP,
    VOTE_BLOCK_SIZE,
    is_rigid,
    normalize_mode,
)
from shape_domain.geometry import (
    TWO_PI,
    Point2,
    RigidMotion,
    Transform,
    Translation,
    TriangleSoup,
    contains_many,
    normalize_angle,
)
from shape_domain.sampling import AreaIndex, RandomSource, build_area_index, sample_points

logger = logging.getLogger(__name__)


# ═══════════════════════════════════════════════════════════════
# TIPOS
# ═══════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class Vote:
    transform: Transform
    # Puntos que generaron el voto: (a, b) o (a₁, a₂, b₁, b₂)
    witness: Tuple[Point2, ...] = ()


@dataclass
class VoteCloud:
    """
    Multiconjunto de votos en unidades nativas.

    points: (N, 2) con (tx, ty) para T; (N, 3) con (alpha, tx, ty) para modos rígidos
    """
    mode: str
    points: np.ndarray
    attempted: int
    rejected: int = 0
    seed: Optional[int] = None

    def __post_init__(self):
        self.mode = normalize_mode(self.mode)
        dims = 2 if self.mode == MODE_T else 3
        self.points = np.asarray(self.points, dtype=float).reshape(-1, dims)
        if len(self.points) != self.attempted - self.rejected:
            raise ValueError(
                f"Nube inconsistente: {len(self.points)} votos vs "
                f"{self.attempted} intentos - {self.rejected} rechazos"
            )
        if self.mode != MODE_RM31 and self.rejected != 0:
            raise ValueError(f"El modo {self.mode} no rechaza muestras")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def is_rigid(self) -> bool:
        return is_rigid(self.mode)

    def vote(self, i: int) -> Vote:
        row = self.points[i]
        if self.mode == MODE_T:
            return Vote(Translation(float(row[0]), float(row[1])))
        return Vote(RigidMotion(float(row[0]), float(row[1]), float(row[2])))

    @property
    def votes(self) -> List[Vote]:
        return [self.vote(i) for i in range(len(self))]

    @property
    def acceptance_rate(self) -> float:
        return len(self) / self.attempted if self.attempted else 0.0

    def to_frame(self) -> pd.DataFrame:
        if self.mode == MODE_T:
            alpha = np.full(len(self), np.nan)
            tx, ty = self.points[:, 0], self.points[:, 1]
        else:
            alpha, tx, ty = self.points[:, 0], self.points[:, 1], self.points[:, 2]
        return pd.DataFrame({'mode': self.mode, 'alpha': alpha, 'tx': tx, 'ty': ty},
                            columns=['mode', 'alpha', 'tx', 'ty'])

    def to_csv(self, path: Union[str, Path]) -> None:
        """CSV `mode,alpha,tx,ty` con 17 dígitos significativos (alpha vacío en T)."""
        self.to_frame().to_csv(path, index=False, float_format='%.17g', na_rep='')
        logger.info(f"💾 [VOTES] {len(self)} votos exportados a {path}")


# ═══════════════════════════════════════════════════════════════
# EXPERIMENTOS POR LOTE
# ═══════════════════════════════════════════════════════════════

def _translation_batch(idxA: AreaIndex, idxB: AreaIndex, rng: RandomSource, n: int):
    a = sample_points(idxA, rng, n)
    b = sample_points(idxB, rng, n)
    return b - a, (a, b)


def _rotate(alpha: np.ndarray, pts: np.ndarray) -> np.ndarray:
    c, s = np.cos(TWO_PI * alpha), np.sin(TWO_PI * alpha)
    return np.stack([c * pts[:, 0] - s * pts[:, 1], s * pts[:, 0] + c * pts[:, 1]], axis=1)


def _rmra_batch(idxA: AreaIndex, idxB: AreaIndex, rng: RandomSource, n: int):
    a = sample_points(idxA, rng, n)
    b = sample_points(idxB, rng, n)
    alpha = rng.random(n) - 0.5
    t = b - _rotate(alpha, a)
    return np.column_stack([alpha, t]), (a, b)


def _rm31_batch(idxA: AreaIndex, idxB: AreaIndex, B: TriangleSoup, rng: RandomSource, n: int):
    """Devuelve (aceptados, votos, testigos) para n intentos; votos sólo válidos donde aceptados."""
    a1 = sample_points(idxA, rng, n)
    a2 = sample_points(idxA, rng, n)
    b1 = sample_points(idxB, rng, n)
    beta = rng.random(n) - 0.5

    d_a = a2 - a1
    length = np.hypot(d_a[:, 0], d_a[:, 1])
    b2 = b1 + length[:, None] * np.column_stack([np.cos(TWO_PI * beta), np.sin(TWO_PI * beta)])

    # a₁ = a₂ exacto tiene probabilidad cero; se trata como rechazo
    accepted = (length > 0.0) & contains_many(B, b2)

    d_b = b2 - b1
    turn = (np.arctan2(d_b[:, 1], d_b[:, 0]) - np.arctan2(d_a[:, 1], d_a[:, 0])) / TWO_PI
    alpha = normalize_angle(turn)
    t = b1 - _rotate(alpha, a1)
    return accepted, np.column_stack([alpha, t]), (a1, a2, b1, b2)


def _point(row) -> Point2:
    return Point2(float(row[0]), float(row[1]))


# ═══════════════════════════════════════════════════════════════
# EXPERIMENTOS INDIVIDUALES
# ═══════════════════════════════════════════════════════════════

def vote_translation(idxA: AreaIndex, idxB: AreaIndex, rng: RandomSource) -> Vote:
    points, (a, b) = _translation_batch(idxA, idxB, rng, 1)
    return Vote(Translation(float(points[0, 0]), float(points[0, 1])), (_point(a[0]), _point(b[0])))


def vote_rmra(idxA: AreaIndex, idxB: AreaIndex, rng: RandomSource) -> Vote:
    points, (a, b) = _rmra_batch(idxA, idxB, rng, 1)
    alpha, tx, ty = (float(v) for v in points[0])
    return Vote(RigidMotion(alpha, tx, ty), (_point(a[0]), _point(b[0])))


def vote_rm31(idxA: AreaIndex, idxB: AreaIndex, B: TriangleSoup, rng: RandomSource) -> Optional[Vote]:
    accepted, points, witness = _rm31_batch(idxA, idxB, B, rng, 1)
    if not accepted[0]:
        return None
    alpha, tx, ty = (float(v) for v in points[0])
    return Vote(RigidMotion(alpha, tx, ty), tuple(_point(w[0]) for w in witness))


# ═══════════════════════════════════════════════════════════════
# NUBE DE VOTOS
# ═══════════════════════════════════════════════════════════════

def _block_sizes(total: int):
    blocks = []
    b = 0
    while b * VOTE_BLOCK_SIZE < total:
        blocks.append((b, min(VOTE_BLOCK_SIZE, total - b * VOTE_BLOCK_SIZE)))
        b += 1
    return blocks


def _run_blocks(fn, blocks, threads: int):
    if threads <= 1 or len(blocks) <= 1:
        return [fn(b, size) for b, size in blocks]
    return Parallel(n_jobs=threads, backend='threading')(
        delayed(fn)(b, size) for b, size in blocks
    )


def generate_cloud(mode: str, A: TriangleSoup, B: TriangleSoup, N: int, seed: int,
                   threads: int = 1,
                   indices: Optional[Tuple[AreaIndex, AreaIndex]] = None) -> VoteCloud:
    """
    Ejecuta N experimentos (en RM31, hasta N votos aceptados).

    Los experimentos se agrupan en bloques de VOTE_BLOCK_SIZE; el bloque b
    usa RandomSource(seed, b), así el resultado no depende de `threads`.
    """
    mode = normalize_mode(mode)
    if N < 1:
        raise ConfigError(f"N debe ser >= 1 (recibido {N})")
    threads = max(1, int(threads))

    idxA, idxB = indices if indices is not None else (build_area_index(A), build_area_index(B))
    start = time.time()
    logger.info(f"🎲 [VOTES] Modo {mode}: generando {N} votos (seed={seed}, threads={threads})")

    if mode == MODE_T:
        def run(b, size):
            return _translation_batch(idxA, idxB, RandomSource(seed, b), size)[0]
    elif mode == MODE_RMRA:
        def run(b, size):
            return _rmra_batch(idxA, idxB, RandomSource(seed, b), size)[0]
    else:
        return _generate_rm31(idxA, idxB, B, N, seed, threads, start)

    points = np.concatenate(_run_blocks(run, _block_sizes(N), threads))
    logger.info(f"✅ [VOTES] {len(points)} votos en {time.time() - start:.2f}s")
    return VoteCloud(mode, points, attempted=N, rejected=0, seed=seed)


def _generate_rm31(idxA, idxB, B, N, seed, threads, start) -> VoteCloud:
    cap = max(RM31_MIN_ATTEMPT_CAP, RM31_ATTEMPTS_PER_VOTE_CAP * N)

    def run(b, size):
        accepted, points, _ = _rm31_batch(idxA, idxB, B, RandomSource(seed, b), size)
        return accepted, points

    chunks = []
    n_accepted = 0
    attempted = 0
    next_block = 0

    while n_accepted < N:
        wave = [
            (b, min(VOTE_BLOCK_SIZE, cap - b * VOTE_BLOCK_SIZE))
            for b in range(next_block, next_block + threads)
            if b * VOTE_BLOCK_SIZE < cap
        ]
        if not wave:
            if n_accepted == 0:
                raise AcceptanceStarvationError(
                    f"RM3+1: ningún voto aceptado tras {attempted} intentos (tope {cap}); "
                    f"las formas probablemente no admiten muestreo 3+1",
                    attempted=attempted,
                    accepted=0,
                )
            logger.warning(
                f"⚠️ [VOTES] RM3+1: tope de {cap} intentos alcanzado con {n_accepted} "
                f"de {N} votos aceptados; se sigue con la nube parcial"
            )
            break
        next_block += len(wave)

        for (b, size), (accepted, points) in zip(wave, _run_blocks(run, wave, threads)):
            hits = np.nonzero(accepted)[0]
            need = N - n_accepted
            if len(hits) >= need:
                chunks.append(points[hits[:need]])
                attempted += int(hits[need - 1]) + 1
                n_accepted = N
                break
            chunks.append(points[hits])
            attempted += size
            n_accepted += len(hits)

    points = np.concatenate(chunks)
    rate = n_accepted / attempted
    logger.info(
        f"✅ [VOTES] RM3+1: {n_accepted} aceptados de {attempted} intentos "
        f"(tasa {rate:.4f}) en {time.time() - start:.2f}s"
    )
    return VoteCloud(MODE_RM31, points, attempted=attempted, rejected=attempted - n_accepted, seed=seed)
