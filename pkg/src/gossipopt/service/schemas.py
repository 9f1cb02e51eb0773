"""Pydantic request/response models for the experiment service."""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class RunRequest(BaseModel):
    config: Dict[str, Any]
    csv_filename: str = "trace.csv"


class TraceRecordModel(BaseModel):
    k: int
    grad_evals: int
    comm_rounds: int
    sim_time: float
    bregman: float
    fem: float
    consensus_err: float
    certified_ub: Optional[float] = None
    lower_bound_ref: Optional[float] = None


class RunResponse(BaseModel):
    config: Dict[str, Any]
    meta: Dict[str, Any]
    records: List[TraceRecordModel]
    csv: str
    csv_filename: str
    plot_script: str


class SweepRequest(BaseModel):
    configs: List[Dict[str, Any]]
    jobs: int = Field(default=1, ge=1)
    csv_pattern: str = "trace_{index:03d}.csv"


class SweepItemResult(BaseModel):
    index: int
    ok: bool
    error: Optional[str] = None
    run: Optional[RunResponse] = None


class SweepResponse(BaseModel):
    results: List[SweepItemResult]
    plot_script: str


class SpectrumRequest(BaseModel):
    edges: str  # edge-list text, one "i j" pair per line


class SpectrumResponse(BaseModel):
    m: int
    edge_count: int
    lambda2: float
    lambda_max: float
    eigengap: float
    gossip_rounds: int  # ceil(1/sqrt(eigengap))


class HardInstanceRequest(BaseModel):
    kind: str  # "two_agent" or "line"
    k: int
    d: int
    lf: float = 1.0
    m: int = 2
    zeta: float = 1.0 / 32.0


class HardInstanceResponse(BaseModel):
    kind: str
    m: int
    d: int
    k: int
    lf: float
    pairs: int
    x_star: List[float]
    f_star: float
    grad_norm_star: float
    restricted_optima: Dict[str, float]
    quadratic_terms: List[List[List[float]]]  # per-agent Q_i
    linear_terms: List[List[float]]           # per-agent c_i


class ValidateRequest(BaseModel):
    config: Dict[str, Any]


class CheckResult(BaseModel):
    name: str
    passed: bool
    detail: str


class ValidateResponse(BaseModel):
    valid: bool
    config: Optional[Dict[str, Any]] = None
    errors: List[str] = Field(default_factory=list)
    checks: List[CheckResult] = Field(default_factory=list)
