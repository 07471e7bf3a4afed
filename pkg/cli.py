"""
cli.py
Línea de comandos de shapematch: match, stats, oracle, triangulate, plan

Los reportes salen como JSON por stdout; el logging va a stderr.
Códigos de salida: 2 forma inválida, 3 RM3+1 sin aceptaciones, 4 flags en conflicto.
"""
import json
import sys
import time
from functools import wraps
from pathlib import Path
from typing import Optional

import typer

sys.path.insert(0, str(Path(__file__).resolve().parent))

from core.config import MATCH_CONFIG, setup_logging
from core.errors import ShapeMatchError
from match_domain.config import MODE_RM31, MODE_T, normalize_mode
from match_domain.depth import METHOD_EXACT
from match_domain.oracle import GridSpec, grid_params, grid_search
from match_domain.pipeline import MatchOptions, run_match
from match_domain.planner import estimate_kappa, overlap_lipschitz, plan
from match_domain.reports import OracleReport, PlanReport, StatsReport, TransformModel
from shape_domain.geometry import shape_stats
from shape_domain.shape_parser import load_shape, save_shape, soup_to_dict

app = typer.Typer(help="Coincidencia probabilística de formas planas por área de solapamiento")


def _handle_errors(fn):
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ShapeMatchError as e:
            typer.echo(f"❌ {type(e).__name__}: {e}", err=True)
            raise typer.Exit(code=e.exit_code) from e
    return wrapper


@app.callback()
def main(
    log_level: Optional[str] = typer.Option(None, "--log-level", help="DEBUG, INFO, WARNING (default: SHAPEMATCH_LOG_LEVEL)"),
):
    setup_logging(log_level)


# ═══════════════════════════════════════════════════════════════
# COMANDOS
# ═══════════════════════════════════════════════════════════════

@app.command("match")
@_handle_errors
def match_command(
    shape_a: Path = typer.Argument(..., help="Forma A (JSON)"),
    shape_b: Path = typer.Argument(..., help="Forma B (JSON)"),
    mode: str = typer.Option(MODE_T, "--mode", help="t, rmra o rm31"),
    epsilon: float = typer.Option(0.1, "--epsilon", help="Error absoluto objetivo (fracción de |A|)"),
    tau: float = typer.Option(0.1, "--tau", help="Probabilidad de fallo admitida"),
    kappa: Optional[float] = typer.Option(None, "--kappa", help="Gordura de A (rm31; default: estimada)"),
    n_votes: Optional[int] = typer.Option(None, "--n-votes", help="Cantidad de votos (reemplaza el plan)"),
    delta: Optional[float] = typer.Option(None, "--delta", help="Semiancho de la vecindad (reemplaza el plan)"),
    depth: str = typer.Option(METHOD_EXACT, "--depth", help="exact o approx"),
    seed: int = typer.Option(MATCH_CONFIG['default_seed'], "--seed"),
    threads: int = typer.Option(MATCH_CONFIG['threads'], "--threads"),
    emit_votes: Optional[Path] = typer.Option(None, "--emit-votes", help="CSV con la nube de votos"),
    oracle_step: Optional[float] = typer.Option(None, "--oracle-step", help="Paso de grilla para calcular el gap"),
    relative: bool = typer.Option(False, "--relative", help="Error relativo: planifica con ε·κ"),
):
    """Corre el pipeline completo y emite un MatchReport."""
    A = load_shape(shape_a)
    B = load_shape(shape_b)
    options = MatchOptions(
        mode=mode, epsilon=epsilon, tau=tau, kappa=kappa, n_votes=n_votes, delta=delta,
        depth_method=depth, seed=seed, threads=threads, emit_votes=emit_votes,
        oracle_step=oracle_step, relative=relative,
    )
    report = run_match(A, B, options)
    typer.echo(report.model_dump_json(indent=2))


@app.command("stats")
@_handle_errors
def stats_command(
    shape: Path = typer.Argument(..., help="Forma (JSON)"),
    kappa: bool = typer.Option(False, "--kappa", help="Incluir κ̂ estimado"),
    resolution: int = typer.Option(MATCH_CONFIG['kappa_resolution'], "--resolution",
                                   help="Resolución de grilla para κ̂"),
):
    """Área, longitud de borde, diámetro y caja envolvente."""
    A = load_shape(shape)
    kappa_value = estimate_kappa(A, resolution) if kappa else None
    report = StatsReport.from_stats(shape_stats(A), len(A), kappa_value)
    typer.echo(report.model_dump_json(indent=2))


@app.command("oracle")
@_handle_errors
def oracle_command(
    shape_a: Path = typer.Argument(...),
    shape_b: Path = typer.Argument(...),
    mode: str = typer.Option(MODE_T, "--mode", help="t, rmra o rm31"),
    step: float = typer.Option(0.01, "--step", help="Paso de traslación"),
    angle_step: Optional[float] = typer.Option(None, "--angle-step", help="Paso angular (revoluciones)"),
):
    """Máximo del solapamiento por búsqueda exhaustiva en grilla."""
    A = load_shape(shape_a)
    B = load_shape(shape_b)
    mode = normalize_mode(mode)
    spec = GridSpec(step=step, angle_step=angle_step)
    start = time.time()
    transform, value = grid_search(A, B, mode, spec)

    stats = shape_stats(A)
    # Lipschitz del solapamiento: √2Δ en traslaciones, (√2 + 2πD)Δ en movimientos rígidos
    lipschitz = 2 ** 0.5 * stats.boundary_length if mode == MODE_T else overlap_lipschitz(stats)
    report = OracleReport(
        mode=mode,
        step=step,
        angle_step=angle_step,
        transform=TransformModel.from_transform(transform),
        value=value,
        lipschitz_bound=lipschitz * step,
        evaluated=len(grid_params(A, B, mode, spec)),
        elapsed=time.time() - start,
    )
    typer.echo(report.model_dump_json(indent=2))


@app.command("triangulate")
@_handle_errors
def triangulate_command(
    shape: Path = typer.Argument(..., help="Archivo con 'polygons' (o 'triangles')"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Destino; default stdout"),
):
    """Convierte polígonos con agujeros a formato 'triangles'."""
    soup = load_shape(shape)
    if output is None:
        typer.echo(json.dumps(soup_to_dict(soup), indent=2))
    else:
        save_shape(soup, output)
        typer.echo(f"✅ {len(soup)} triángulos escritos en {output}", err=True)


@app.command("plan")
@_handle_errors
def plan_command(
    shape_a: Path = typer.Argument(...),
    shape_b: Path = typer.Argument(...),
    mode: str = typer.Option(MODE_T, "--mode", help="t, rmra o rm31"),
    epsilon: float = typer.Option(0.1, "--epsilon"),
    tau: float = typer.Option(0.1, "--tau"),
    kappa: Optional[float] = typer.Option(None, "--kappa", help="Default: estimada sobre A"),
    relative: bool = typer.Option(False, "--relative"),
):
    """Parámetros teóricos (δ, η, N) sin correr el pipeline."""
    A = load_shape(shape_a)
    B = load_shape(shape_b)
    mode = normalize_mode(mode)
    if kappa is None and (mode == MODE_RM31 or relative):
        kappa = estimate_kappa(A)
    match_plan = plan(mode, shape_stats(A), shape_stats(B), epsilon, tau,
                      kappa=kappa, relative=relative)
    typer.echo(PlanReport.from_plan(match_plan).model_dump_json(indent=2))


if __name__ == "__main__":
    app()
