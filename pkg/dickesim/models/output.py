from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class RunMetadata(BaseModel):
    """Everything needed to reproduce the tables of one scenario run."""
    scenario: str
    config: Dict[str, Any]
    settings: Dict[str, Any] = Field(default_factory=dict)
    residuals: Dict[str, float] = Field(default_factory=dict)
    warnings: List[str] = Field(default_factory=list)
    files: List[str] = Field(default_factory=list)
    timings: Dict[str, float] = Field(default_factory=dict)
    versions: Dict[str, str] = Field(default_factory=dict)
    started_at: Optional[str] = None


class BenchEntry(BaseModel):
    n_tls: int
    n_ds: int
    lindbladian_nnz: int
    lindbladian_s: float
    rate_matrix_s: float
    pisolve_s: float
    evolve_s: Optional[float] = None
    oracle_s: Optional[float] = None


class BenchReport(BaseModel):
    machine: Dict[str, str]
    steps: int
    t_max_in_t_d: float
    entries: List[BenchEntry] = Field(default_factory=list)
