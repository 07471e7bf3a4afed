"""
Modelos de reporte (JSON a stdout)
"""
from typing import Dict, List, Optional

from pydantic import BaseModel

from match_domain.planner import MatchPlan
from shape_domain.geometry import RigidMotion, ShapeStats, Transform


class TransformModel(BaseModel):
    kind: str
    alpha: Optional[float] = None
    tx: float
    ty: float

    @classmethod
    def from_transform(cls, t: Transform) -> 'TransformModel':
        if isinstance(t, RigidMotion):
            return cls(kind='rigid', alpha=t.alpha, tx=t.tx, ty=t.ty)
        return cls(kind='translation', tx=t.tx, ty=t.ty)


class PlanValue(BaseModel):
    planned: float
    used: float
    override: bool


class PlanReport(BaseModel):
    mode: str
    epsilon: float
    tau: float
    kappa: Optional[float] = None
    relative: bool = False
    delta: float
    eta: float
    votes_needed: int
    attempts_budget: Optional[int] = None
    constants: Dict[str, float]

    @classmethod
    def from_plan(cls, plan: MatchPlan) -> 'PlanReport':
        return cls(**plan.to_dict())


class PlanEcho(BaseModel):
    delta: PlanValue
    n_votes: PlanValue
    eta: float
    epsilon: float
    tau: float
    kappa: Optional[float] = None
    relative: bool = False
    attempts_budget: Optional[int] = None
    constants: Dict[str, float]


class VoteSummary(BaseModel):
    accepted: int
    attempted: int
    acceptance_rate: float
    csv: Optional[str] = None


class OracleEcho(BaseModel):
    step: float
    value: float
    transform: TransformModel
    gap: float
    source: str


class Timings(BaseModel):
    sampling: float
    voting: float
    depth: float
    oracle: Optional[float] = None
    total: float


class MatchReport(BaseModel):
    mode: str
    seed: int
    plan: PlanEcho
    result: TransformModel
    depth: int
    depth_method: str
    approx_factor: float
    density_estimate: float
    overlap: float
    votes: VoteSummary
    oracle: Optional[OracleEcho] = None
    warnings: List[str] = []
    timings: Timings


class StatsReport(BaseModel):
    area: float
    boundary_length: float
    diameter: float
    bbox: List[float]
    triangles: int
    kappa: Optional[float] = None

    @classmethod
    def from_stats(cls, stats: ShapeStats, triangles: int,
                   kappa: Optional[float] = None) -> 'StatsReport':
        return cls(area=stats.area, boundary_length=stats.boundary_length,
                   diameter=stats.diameter, bbox=list(stats.bbox),
                   triangles=triangles, kappa=kappa)


class OracleReport(BaseModel):
    mode: str
    step: float
    angle_step: Optional[float] = None
    transform: TransformModel
    value: float
    lipschitz_bound: float
    evaluated: int
    elapsed: float
