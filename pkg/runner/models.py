from typing import Any, Dict, List

from pydantic import BaseModel, Field


# ---------- Risultati ----------

class ExperimentOutcome(BaseModel):
    """Quello che un esperimento restituisce al runner."""

    rows: List[Dict[str, Any]]
    summary: Dict[str, Any] = Field(default_factory=dict)
    failures: List[str] = Field(default_factory=list)


class ResultRecord(BaseModel):
    experiment: str
    config: Dict[str, Any]
    seed: int
    rows: List[Dict[str, Any]]
    summary: Dict[str, Any] = Field(default_factory=dict)
    failures: List[str] = Field(default_factory=list)
    tolerances: Dict[str, float]
    library_version: str
    rng_algorithm: str
    duration_sec: float

    @property
    def passed(self) -> bool:
        return not self.failures

    def metadata(self) -> Dict[str, Any]:
        return self.model_dump(exclude={"rows"})
