"""
Parser de archivos de forma (JSON)

Formato esperado (claves mutuamente excluyentes):
- triangles: [[[x, y], [x, y], [x, y]], ...]
- polygons:  [[anillo_exterior, agujero_1, ...], ...]  con anillo = [[x, y], ...]
"""
import json
import logging
from pathlib import Path
from typing import List, Optional, Union

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from core.errors import InvalidShapeError
from shape_domain.geometry import TriangleSoup
from shape_domain.sampling import check_interior_disjoint
from shape_domain.triangulate import triangulate

logger = logging.getLogger(__name__)

Coord = List[float]


class ShapeFile(BaseModel):
    model_config = ConfigDict(extra='forbid')

    triangles: Optional[List[List[Coord]]] = None
    polygons: Optional[List[List[List[Coord]]]] = None

    @model_validator(mode='after')
    def _exactly_one_key(self):
        if (self.triangles is None) == (self.polygons is None):
            raise ValueError("se requiere exactamente una de las claves 'triangles' o 'polygons'")
        return self

    def to_soup(self) -> TriangleSoup:
        if self.triangles is not None:
            for i, tri in enumerate(self.triangles):
                if len(tri) != 3 or any(len(p) != 2 for p in tri):
                    raise InvalidShapeError(f"Triángulo {i}: se esperan 3 puntos [x, y]")
            return TriangleSoup.from_points(self.triangles, reorient=True)
        return triangulate(self.polygons)


def parse_shape(data: Union[dict, str]) -> TriangleSoup:
    """Parsea un dict (o texto JSON) y devuelve la forma, sin chequeo de disjunción."""
    try:
        if isinstance(data, str):
            shape_file = ShapeFile.model_validate_json(data)
        else:
            shape_file = ShapeFile.model_validate(data)
    except ValidationError as e:
        raise InvalidShapeError(f"Archivo de forma inválido: {e.errors()[0]['msg']}") from e
    return shape_file.to_soup()


def load_shape(path: Union[str, Path], check_disjoint: bool = True) -> TriangleSoup:
    """
    Carga una forma desde archivo JSON

    Args:
        path: Ruta al archivo
        check_disjoint: Verifica por muestreo que los triángulos no se solapen

    Returns:
        TriangleSoup validada
    """
    shape_path = Path(path)
    if not shape_path.exists():
        raise InvalidShapeError(f"Archivo de forma no encontrado: {path}")

    try:
        text = shape_path.read_text(encoding='utf-8')
    except OSError as e:
        raise InvalidShapeError(f"No se pudo leer {path}: {e}") from e

    soup = parse_shape(text)
    if check_disjoint:
        check_interior_disjoint(soup)
    logger.info(f"📄 [SHAPES] {shape_path.name}: {len(soup)} triángulos, área {soup.area:.6g}")
    return soup


def soup_to_dict(soup: TriangleSoup) -> dict:
    return {'triangles': soup.vertices.tolist()}


def save_shape(soup: TriangleSoup, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(soup_to_dict(soup), indent=2), encoding='utf-8')
