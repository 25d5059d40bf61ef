import enum
import logging
from typing import List

from pydantic import BaseModel, Field, model_validator

logger = logging.getLogger(__name__)


class CloneConfig(BaseModel):
    n_lines: int = Field(4, ge=1)
    min_shared: int = Field(1, ge=1)
    theta_token: float = Field(0.6, ge=0, le=1)
    theta_verify: float = Field(0.8, ge=0, le=1)
    # combined = token_weight·token_sim + (1 − token_weight)·tree_sim
    token_weight: float = Field(0.5, ge=0, le=1)
    min_subtree_nodes: int = Field(3, ge=1)
    depth_buckets: int = Field(16, ge=1)
    arity_buckets: int = Field(8, ge=1)
    abstract_windows: bool = True

    @model_validator(mode="after")
    def warn_on_inverted_thresholds(self) -> "CloneConfig":
        if self.theta_token > self.theta_verify:
            logger.warning(
                "theta_token (%.3f) exceeds theta_verify (%.3f); the token filter dominates.",
                self.theta_token,
                self.theta_verify,
            )
        return self


class CloneCategory(str, enum.Enum):
    TYPE1 = "Type1"
    TYPE2 = "Type2"
    TYPE3 = "Type3"
    NONE = "None"


class CloneCandidate(BaseModel):
    function_id: str
    shared_windows: int


# One side of a clone pair, with where it came from
class CloneSide(BaseModel):
    function_id: str
    role: str  # "target" | "pool"
    repo_id: str
    file_path: str
    start_line: int
    end_line: int
    name: str
    fingerprint: str


class ClonePair(BaseModel):
    a: str
    b: str
    shared_windows: int = Field(0, ge=0)
    token_sim: float = Field(ge=0, le=1)
    tree_sim: float = Field(ge=0, le=1)
    combined: float = Field(ge=0, le=1)
    verdict: bool
    category: CloneCategory
    provenance: List[CloneSide] = []

    def side(self, role: str) -> CloneSide:
        return next(s for s in self.provenance if s.role == role)


# File-level clone-based dependency link
class CloneLink(BaseModel):
    source: str
    target: str
    pairs: int
    mean_similarity: float
