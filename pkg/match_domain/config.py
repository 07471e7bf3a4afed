"""
Configuración del dominio de matching - constantes numéricas y de muestreo
"""
from core.errors import ConfigError


# ═══════════════════════════════════════════════════════════════
# GEOMETRÍA
# ═══════════════════════════════════════════════════════════════

# Holgura de comparación en unidades de forma
GEOMETRY_EPS = 1e-9

# Tolerancia del test de pertenencia (borde inclusivo)
CONTAINS_EPS = 1e-12

# Puntos de muestreo para validar disjunción interior al cargar
DISJOINTNESS_SAMPLES = 1000
DISJOINTNESS_SEED = 20240101

# Máximo de filas (pares de triángulos x transformaciones) por lote de recorte
CLIP_CHUNK_ROWS = 200_000

# Máximo de celdas (puntos x triángulos) por lote de pertenencia
CONTAINS_CHUNK_CELLS = 4_000_000


# ═══════════════════════════════════════════════════════════════
# VOTOS
# ═══════════════════════════════════════════════════════════════

# Experimentos por bloque; el bloque b usa el substream b de la semilla.
# Cambiarlo cambia qué voto produce cada semilla.
VOTE_BLOCK_SIZE = 8192

# Modos de votación
MODE_T = 'T'
MODE_RMRA = 'RMRA'
MODE_RM31 = 'RM31'
RIGID_MODES = (MODE_RMRA, MODE_RM31)

# Tope de intentos RM3+1: max(RM31_MIN_ATTEMPT_CAP, RM31_ATTEMPTS_PER_VOTE_CAP * N)
RM31_MIN_ATTEMPT_CAP = 10_000_000
RM31_ATTEMPTS_PER_VOTE_CAP = 10_000


# ═══════════════════════════════════════════════════════════════
# PROFUNDIDAD
# ═══════════════════════════════════════════════════════════════

# Radio garantizado del método aproximado, relativo a delta
APPROX_FACTOR = 0.5

# Con wraparound, delta debe ser menor a esto (revoluciones)
MAX_WRAP_DELTA = 0.25


# ═══════════════════════════════════════════════════════════════
# PLANNER / KAPPA
# ═══════════════════════════════════════════════════════════════

# Puntos sobre el círculo para verificar que el círculo inscrito está en la forma
CIRCLE_CHECK_POINTS = 256

# Refinamiento local del centro del círculo inscrito: rondas y puntos por eje
KAPPA_REFINE_ROUNDS = 8
KAPPA_REFINE_POINTS = 11


# ═══════════════════════════════════════════════════════════════
# HELPERS
# ═══════════════════════════════════════════════════════════════

_MODE_ALIASES = {
    't': MODE_T,
    'rmra': MODE_RMRA,
    'rm31': MODE_RM31,
    'rm3+1': MODE_RM31,
}


def normalize_mode(mode: str) -> str:
    """Acepta 't', 'rmra', 'rm31' (cualquier capitalización)"""
    key = str(mode).strip().lower()
    if key not in _MODE_ALIASES:
        raise ConfigError(f"Modo desconocido: {mode!r} (esperado t, rmra o rm31)")
    return _MODE_ALIASES[key]


def is_rigid(mode: str) -> bool:
    return normalize_mode(mode) in RIGID_MODES
