"""
Errores de shapematch con su código de salida para el CLI
"""


class ShapeMatchError(Exception):
    exit_code = 1


class InvalidShapeError(ShapeMatchError, ValueError):
    """Forma inválida: triángulos degenerados, solapados o archivo mal formado."""
    exit_code = 2


class AcceptanceStarvationError(ShapeMatchError):
    """RM3+1 no aceptó ninguna muestra dentro del tope de intentos."""
    exit_code = 3

    def __init__(self, message: str, attempted: int = 0, accepted: int = 0):
        super().__init__(message)
        self.attempted = attempted
        self.accepted = accepted


class ConfigError(ShapeMatchError, ValueError):
    """Flags en conflicto o parámetros fuera de rango."""
    exit_code = 4
