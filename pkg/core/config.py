"""
Configuración centralizada de shapematch
Carga variables de entorno y define valores por defecto
"""
import logging
import os
import sys
from pathlib import Path
from dotenv import load_dotenv

# Cargar variables de entorno
load_dotenv()

# ==================== MATCHING ====================
MATCH_CONFIG = {
    'default_seed': int(os.getenv('SHAPEMATCH_SEED', 0)),
    'threads': int(os.getenv('SHAPEMATCH_THREADS', 1)),
    'vote_warn_limit': int(float(os.getenv('SHAPEMATCH_VOTE_WARN', 1e8))),
    'vote_hard_limit': int(float(os.getenv('SHAPEMATCH_VOTE_LIMIT', 5e7))),
    'kappa_resolution': int(os.getenv('SHAPEMATCH_KAPPA_RES', 200)),
}

# ==================== PROFUNDIDAD ====================
DEPTH_CONFIG = {
    # Celdas por semiancho de caja en la grilla de cotas
    'cell_split': int(os.getenv('SHAPEMATCH_CELL_SPLIT', 4)),
    'max_grid_cells': int(os.getenv('SHAPEMATCH_MAX_GRID_CELLS', 2 ** 23)),
    'max_candidate_cells': int(os.getenv('SHAPEMATCH_MAX_CANDIDATE_CELLS', 2 ** 24)),
}

# ==================== ORÁCULO ====================
ORACLE_CONFIG = {
    'mc_samples': int(float(os.getenv('SHAPEMATCH_MC_SAMPLES', 1e6))),
    'chunk_rows': int(float(os.getenv('SHAPEMATCH_CHUNK_ROWS', 2e5))),
}

# ==================== LOGGING ====================
LOG_CONFIG = {
    'level': os.getenv('SHAPEMATCH_LOG_LEVEL', 'INFO'),
}

# ==================== PATHS ====================
BASE_DIR = Path(__file__).resolve().parent.parent
DATA_DIR = BASE_DIR / 'data'


def setup_logging(level: str = None):
    """Configura logging a stderr (stdout queda libre para los reportes JSON)"""
    logging.basicConfig(
        level=(level or LOG_CONFIG['level']).upper(),
        format='%(message)s',
        stream=sys.stderr,
        force=True
    )
