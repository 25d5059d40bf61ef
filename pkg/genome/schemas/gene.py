from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from genome.schemas.corpus import FunctionRecord
from genome.schemas.metrics import RepoStats

INDEX_FORMAT_VERSION = 1


class CallGraph(BaseModel):
    repo_id: str = ""
    nodes: List[str] = []
    edges: List[Tuple[str, str]] = []


class Centrality(BaseModel):
    degree: float = 0.0
    closeness: float = 0.0
    betweenness: float = 0.0


class RankWeights(BaseModel):
    w_centrality: float = Field(0.5, ge=0, le=1)
    w_value: float = Field(0.5, ge=0, le=1)

    @model_validator(mode="after")
    def weights_sum_to_one(self) -> "RankWeights":
        if abs(self.w_centrality + self.w_value - 1.0) > 1e-9:
            raise ValueError("w_centrality + w_value must equal 1")
        return self


class Gene(BaseModel):
    fingerprint: str = Field(pattern=r"^[0-9a-f]{16}$")
    exemplar: str
    value: float
    frequency: int = Field(ge=1)
    degree: float = Field(0.0, ge=0)
    closeness: float = Field(0.0, ge=0)
    betweenness: float = Field(0.0, ge=0)
    rank_score: float = 0.0
    # distinct repos containing the fingerprint, sorted
    repos: List[str] = []


class WindowIndex(BaseModel):
    n_lines: int = Field(4, ge=1)
    abstract_windows: bool = True
    postings: Dict[str, List[str]] = {}


class PoolMeta(BaseModel):
    format_version: int = INDEX_FORMAT_VERSION
    n_lines: int = 4
    abstract_windows: bool = True
    weights: RankWeights = RankWeights()
    tau: float = 0.2
    f_common: Optional[int] = 100
    # corpus-wide (min, max) of degree, closeness, betweenness and value
    norm_ranges: Dict[str, Tuple[float, float]] = {}


class GenePool(BaseModel):
    meta: PoolMeta = PoolMeta()
    genes: List[Gene] = []
    functions: List[FunctionRecord] = []
    windows: WindowIndex = WindowIndex()
    repos: List[RepoStats] = []

    def gene_map(self) -> Dict[str, Gene]:
        return {g.fingerprint: g for g in self.genes}

    def function_map(self) -> Dict[str, FunctionRecord]:
        return {f.function_id: f for f in self.functions}


class GeneCluster(BaseModel):
    members: List[str]
    repos: List[str] = []


class ReplacedGene(BaseModel):
    old: str
    new: str
    similarity: float


class PoolDiff(BaseModel):
    added: List[str] = []
    removed: List[str] = []
    replaced: List[ReplacedGene] = []

    @property
    def is_empty(self) -> bool:
        return not (self.added or self.removed or self.replaced)
