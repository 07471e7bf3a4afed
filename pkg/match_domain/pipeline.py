"""
Pipeline completo de matching: plan → votos → punto más profundo → reporte
"""
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

from core.config import MATCH_CONFIG
from core.errors import ConfigError
from match_domain.config import MODE_RM31, MODE_T, normalize_mode
from match_domain.depth import (
    METHOD_APPROX,
    METHOD_EXACT,
    DepthQuery,
    deepest,
    density_estimate,
)
from match_domain.oracle import GridSpec, grid_search
from match_domain.planner import MatchPlan, estimate_kappa, inscribed_circle, plan
from match_domain.reports import (
    MatchReport,
    OracleEcho,
    PlanEcho,
    PlanValue,
    Timings,
    TransformModel,
    VoteSummary,
)
from match_domain.votes import generate_cloud
from shape_domain.geometry import TriangleSoup, overlap_area, shape_stats
from shape_domain.sampling import RandomSource, build_area_index

logger = logging.getLogger(__name__)


@dataclass
class MatchOptions:
    """Parámetros de una corrida; None significa 'usar el plan'."""
    mode: str = MODE_T
    epsilon: float = 0.1
    tau: float = 0.1
    kappa: Optional[float] = None
    n_votes: Optional[int] = None
    delta: Optional[float] = None
    depth_method: str = METHOD_EXACT
    seed: int = field(default_factory=lambda: MATCH_CONFIG['default_seed'])
    threads: int = field(default_factory=lambda: MATCH_CONFIG['threads'])
    emit_votes: Optional[Union[str, Path]] = None
    oracle_step: Optional[float] = None
    relative: bool = False

    def validate(self) -> None:
        self.mode = normalize_mode(self.mode)
        if self.depth_method not in (METHOD_EXACT, METHOD_APPROX):
            raise ConfigError(f"--depth debe ser exact o approx (recibido {self.depth_method!r})")
        if self.kappa is not None and self.mode != MODE_RM31 and not self.relative:
            raise ConfigError("--kappa sólo aplica a rm31 o junto con --relative")
        if self.n_votes is not None and self.n_votes < 1:
            raise ConfigError(f"--n-votes debe ser >= 1 (recibido {self.n_votes})")
        if self.delta is not None and not self.delta > 0:
            raise ConfigError(f"--delta debe ser > 0 (recibido {self.delta})")
        if self.oracle_step is not None and not self.oracle_step > 0:
            raise ConfigError(f"--oracle-step debe ser > 0 (recibido {self.oracle_step})")
        if self.threads < 1:
            raise ConfigError(f"--threads debe ser >= 1 (recibido {self.threads})")


def _resolve_votes(options: MatchOptions, match_plan: MatchPlan) -> int:
    if options.n_votes is not None:
        return int(options.n_votes)
    hard_limit = MATCH_CONFIG['vote_hard_limit']
    if match_plan.votes_needed > hard_limit:
        raise ConfigError(
            f"El plan pide {match_plan.votes_needed:.3g} votos (> {hard_limit:.0e}); "
            f"indicar --n-votes explícitamente"
        )
    return int(match_plan.votes_needed)


def _inscribed_warning(A: TriangleSoup, B: TriangleSoup) -> Optional[str]:
    _, radius_a = inscribed_circle(A)
    _, radius_b = inscribed_circle(B)
    if radius_a > radius_b:
        return (
            f"El círculo inscrito de A (r={radius_a:.4g}) es mayor que el de B "
            f"(r={radius_b:.4g}); la cota de aceptación RM3+1 supone lo contrario"
        )
    return None


def run_match(A: TriangleSoup, B: TriangleSoup, options: MatchOptions) -> MatchReport:
    """
    Ejecuta el pipeline con (N, δ) planificados o indicados.

    Raises:
        ConfigError: flags en conflicto o plan inviable sin --n-votes
        AcceptanceStarvationError: RM3+1 sin aceptaciones suficientes
    """
    options.validate()
    mode = options.mode
    warnings: List[str] = []
    start = time.time()

    statsA, statsB = shape_stats(A), shape_stats(B)
    kappa = options.kappa
    if kappa is None and (mode == MODE_RM31 or options.relative):
        kappa = estimate_kappa(A)
    if mode == MODE_RM31:
        message = _inscribed_warning(A, B)
        if message:
            logger.warning(f"⚠️ [PIPELINE] {message}")
            warnings.append(message)

    match_plan = plan(mode, statsA, statsB, options.epsilon, options.tau,
                      kappa=kappa, relative=options.relative)
    n_votes = _resolve_votes(options, match_plan)
    delta = float(options.delta) if options.delta is not None else match_plan.delta
    logger.info(
        f"🚀 [PIPELINE] {mode}: N={n_votes}{' (override)' if options.n_votes else ''}, "
        f"δ={delta:.6g}{' (override)' if options.delta else ''}, depth={options.depth_method}"
    )

    t0 = time.time()
    indices = (build_area_index(A), build_area_index(B))
    t_sampling = time.time() - t0

    t0 = time.time()
    cloud = generate_cloud(mode, A, B, n_votes, options.seed, options.threads, indices=indices)
    t_voting = time.time() - t0
    csv_path = None
    if options.emit_votes:
        cloud.to_csv(options.emit_votes)
        csv_path = str(options.emit_votes)

    t0 = time.time()
    query = DepthQuery.for_cloud(cloud, delta)
    rng = RandomSource(options.seed, 2 ** 63) if options.depth_method == METHOD_APPROX else None
    result = deepest(cloud, query, options.depth_method, rng)
    t_depth = time.time() - t0

    overlap = overlap_area(A, B, result.argmax)
    density = density_estimate(cloud, result.argmax, query)

    oracle_echo, t_oracle = None, None
    if options.oracle_step is not None:
        t0 = time.time()
        oracle_transform, oracle_value = grid_search(A, B, mode, GridSpec(step=options.oracle_step))
        source = 'grid'
        if overlap > oracle_value:
            oracle_transform, oracle_value, source = result.argmax, overlap, 'result'
        oracle_echo = OracleEcho(
            step=options.oracle_step,
            value=oracle_value,
            transform=TransformModel.from_transform(oracle_transform),
            gap=oracle_value - overlap,
            source=source,
        )
        t_oracle = time.time() - t0

    report = MatchReport(
        mode=mode,
        seed=options.seed,
        plan=PlanEcho(
            delta=PlanValue(planned=match_plan.delta, used=delta, override=options.delta is not None),
            n_votes=PlanValue(planned=match_plan.votes_needed, used=n_votes,
                              override=options.n_votes is not None),
            eta=match_plan.eta,
            epsilon=match_plan.epsilon,
            tau=match_plan.tau,
            kappa=match_plan.kappa,
            relative=match_plan.relative,
            attempts_budget=match_plan.attempts_budget,
            constants=match_plan.constants,
        ),
        result=TransformModel.from_transform(result.argmax),
        depth=result.depth,
        depth_method=result.method,
        approx_factor=result.approx_factor,
        density_estimate=density,
        overlap=overlap,
        votes=VoteSummary(
            accepted=len(cloud),
            attempted=cloud.attempted,
            acceptance_rate=cloud.acceptance_rate,
            csv=csv_path,
        ),
        oracle=oracle_echo,
        warnings=warnings,
        timings=Timings(
            sampling=t_sampling,
            voting=t_voting,
            depth=t_depth,
            oracle=t_oracle,
            total=time.time() - start,
        ),
    )
    logger.info(
        f"✅ [PIPELINE] Resultado {result.argmax}: profundidad {result.depth}, "
        f"solapamiento {overlap:.6g}"
    )
    return report
