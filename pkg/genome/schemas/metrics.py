from typing import Dict, List

from pydantic import BaseModel, Field, field_validator

# Fixed order of the repository metric vector
REPO_METRICS = ("stars", "forks", "issues", "commits", "contributors")


class MetricSet(BaseModel):
    halstead_volume: float = Field(ge=0)
    cyclomatic: int = Field(ge=1)
    loc: int = Field(ge=1)
    value: float


class RepoMetadata(BaseModel):
    repo_id: str
    url: str = ""
    stars: int = Field(0, ge=0)
    forks: int = Field(0, ge=0)
    issues: int = Field(0, ge=0)
    commits: int = Field(0, ge=0)
    contributors: int = Field(0, ge=0)

    def vector(self) -> List[float]:
        return [float(getattr(self, name)) for name in REPO_METRICS]


class RepoStats(BaseModel):
    repo_id: str
    function_count: int = Field(0, ge=0)
    unique_func_count: int = Field(0, ge=0)
    contribution: float = Field(0.0, ge=0)


class SelectionConfig(BaseModel):
    thresholds: Dict[str, int] = Field(default_factory=lambda: {name: 0 for name in REPO_METRICS})
    lof_k: int = Field(5, ge=1)
    common_frequency_cap: int = Field(100, ge=1)

    @field_validator("thresholds")
    @classmethod
    def cover_every_metric(cls, v: Dict[str, int]) -> Dict[str, int]:
        if set(v) != set(REPO_METRICS):
            raise ValueError(f"thresholds must name exactly {', '.join(REPO_METRICS)}")
        if any(t < 0 for t in v.values()):
            raise ValueError("thresholds must be non-negative")
        return {name: v[name] for name in REPO_METRICS}


# select_repos output plus the LOF-ordered review queue
class SelectionResult(BaseModel):
    selected: List[RepoMetadata] = []
    excluded: List[RepoMetadata] = []
    prioritized: List[RepoMetadata] = []
    lof: Dict[str, float] = {}
    notices: List[str] = []
