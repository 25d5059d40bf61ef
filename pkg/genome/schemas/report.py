from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from genome.schemas.advisory import Finding, Portrait
from genome.schemas.clone import ClonePair
from genome.schemas.deps import DependencyGraph, LineageStep


class MatchedGene(BaseModel):
    fingerprint: str
    function_id: str


class ComponentMatch(BaseModel):
    component: str
    version: Optional[str] = None
    likelihood: float = Field(ge=0, le=1)
    matched_genes: List[MatchedGene] = []


class ReportMeta(BaseModel):
    target: str
    generated_at: str
    config: Dict[str, Any] = {}
    # optional stages that did not run, and why
    notices: List[str] = []


class ScaReport(BaseModel):
    meta: ReportMeta
    components: List[ComponentMatch] = []
    clones: List[ClonePair] = []
    dependency_graph: Optional[DependencyGraph] = None
    lineage: Optional[Dict[str, List[List[LineageStep]]]] = None
    findings: List[Finding] = []
    portrait: Portrait = Portrait()

    @property
    def has_findings(self) -> bool:
        return bool(self.findings)

    def to_json_dict(self) -> Dict[str, Any]:
        """Stable field order; absent optional sections are left out, not null."""
        data = self.model_dump(mode="json")
        for key in ("dependency_graph", "lineage"):
            if data[key] is None:
                del data[key]
        return data
