import enum
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_serializer, model_validator

from genome.schemas.deps import VersionRange


class AdvisoryKind(str, enum.Enum):
    VULNERABILITY = "Vulnerability"
    MALICIOUS = "Malicious"
    SENSITIVE_USER = "SensitiveUser"
    SENSITIVE_BEHAVIOUR = "SensitiveBehaviour"
    SENSITIVE_POLITICS = "SensitivePolitics"


class Dimension(str, enum.Enum):
    SECURITY = "security"
    QUALITY = "quality"
    OSS_COMPOSITION = "oss_composition"
    MAINTAINABILITY = "maintainability"
    BUSINESS_RISK = "business_risk"


_SECURITY_KINDS = {AdvisoryKind.VULNERABILITY, AdvisoryKind.MALICIOUS}


class Advisory(BaseModel):
    id: str = Field(min_length=1)
    kind: AdvisoryKind
    ecosystem: str = ""
    package: str = ""
    affected: List[VersionRange] = []
    severity: float = Field(ge=0, le=10)
    description: str = ""
    family: Optional[str] = None
    origin: Optional[str] = None
    timestamp: Optional[str] = None
    gene_fingerprints: List[str] = []
    # explicit override of the kind-derived dimension
    dimension: Optional[Dimension] = None

    @model_validator(mode="after")
    def matchable(self) -> "Advisory":
        if not self.affected and not self.gene_fingerprints:
            raise ValueError("an advisory needs affected ranges or gene_fingerprints")
        if self.affected and not self.package:
            raise ValueError("affected ranges need a package name")
        return self

    @field_serializer("affected")
    def ranges_as_text(self, affected: List[VersionRange]) -> List[str]:
        return [str(r) for r in affected]

    @property
    def effective_dimension(self) -> Dimension:
        if self.dimension is not None:
            return self.dimension
        return Dimension.SECURITY if self.kind in _SECURITY_KINDS else Dimension.BUSINESS_RISK


class AdvisoryDb(BaseModel):
    advisories: List[Advisory] = []

    def __len__(self) -> int:
        return len(self.advisories)

    def ids(self) -> List[str]:
        return [a.id for a in self.advisories]

    def by_fingerprint(self) -> Dict[str, List[Advisory]]:
        index: Dict[str, List[Advisory]] = {}
        for advisory in self.advisories:
            for fp in advisory.gene_fingerprints:
                index.setdefault(fp, []).append(advisory)
        return index


class MatchedVia(BaseModel):
    kind: Literal["PackageRange", "GeneFingerprint"]
    node: Optional[str] = None
    function_id: Optional[str] = None
    fingerprint: Optional[str] = None


class Finding(BaseModel):
    advisory_id: str
    matched_via: MatchedVia
    dimension: Dimension
    severity: float = Field(ge=0, le=10)


class PortraitWeights(BaseModel):
    security: float = Field(0.40, ge=0)
    quality: float = Field(0.20, ge=0)
    oss_composition: float = Field(0.15, ge=0)
    maintainability: float = Field(0.15, ge=0)
    business_risk: float = Field(0.10, ge=0)

    @model_validator(mode="after")
    def sum_to_one(self) -> "PortraitWeights":
        total = sum(self.as_dict().values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"portrait weights must sum to 1, got {total}")
        return self

    def as_dict(self) -> Dict[str, float]:
        return {d.value: getattr(self, d.value) for d in Dimension}


class Portrait(BaseModel):
    total: float = Field(0.0, ge=0, le=1)
    dimensions: Dict[str, float] = Field(default_factory=lambda: {d.value: 0.0 for d in Dimension})
