from __future__ import annotations

from typing import Annotated, Dict, List, Literal, Optional, Protocol, Tuple, Union

import semver
from pydantic import BaseModel, ConfigDict, Field


class Version(BaseModel):
    """SemVer 2.0 version; build metadata is dropped, precedence follows semver."""

    model_config = ConfigDict(frozen=True)

    major: int = Field(ge=0)
    minor: int = Field(0, ge=0)
    patch: int = Field(0, ge=0)
    prerelease: Optional[str] = None

    @classmethod
    def parse(cls, text: str) -> "Version":
        v = semver.Version.parse(text.strip().lstrip("v"), optional_minor_and_patch=True)
        return cls(major=v.major, minor=v.minor, patch=v.patch, prerelease=v.prerelease)

    def to_semver(self) -> semver.Version:
        return semver.Version(self.major, self.minor, self.patch, prerelease=self.prerelease)

    def compare(self, other: "Version") -> int:
        return self.to_semver().compare(other.to_semver())

    def __lt__(self, other: "Version") -> bool:
        return self.compare(other) < 0

    def __le__(self, other: "Version") -> bool:
        return self.compare(other) <= 0

    def __gt__(self, other: "Version") -> bool:
        return self.compare(other) > 0

    def __ge__(self, other: "Version") -> bool:
        return self.compare(other) >= 0

    def __str__(self) -> str:
        return str(self.to_semver())


# ---------------------------------------------------------------------------
# Version ranges
# ---------------------------------------------------------------------------


class Exact(BaseModel):
    kind: Literal["exact"] = "exact"
    version: Version

    def contains(self, v: Version) -> bool:
        return v.compare(self.version) == 0

    def __str__(self) -> str:
        return str(self.version)


class Caret(BaseModel):
    kind: Literal["caret"] = "caret"
    version: Version

    def upper(self) -> Version:
        base = self.version
        if base.major == 0:
            return Version(major=0, minor=base.minor + 1, patch=0)
        return Version(major=base.major + 1, minor=0, patch=0)

    def contains(self, v: Version) -> bool:
        return v.prerelease is None and self.version <= v < self.upper()

    def __str__(self) -> str:
        return f"^{self.version}"


class Tilde(BaseModel):
    kind: Literal["tilde"] = "tilde"
    version: Version

    def contains(self, v: Version) -> bool:
        upper = Version(major=self.version.major, minor=self.version.minor + 1, patch=0)
        return v.prerelease is None and self.version <= v < upper

    def __str__(self) -> str:
        return f"~{self.version}"


class Comparator(BaseModel):
    kind: Literal["comparator"] = "comparator"
    op: Literal["<", "<=", ">", ">="]
    version: Version

    def contains(self, v: Version) -> bool:
        if v.prerelease is not None:
            return False
        c = v.compare(self.version)
        return {"<": c < 0, "<=": c <= 0, ">": c > 0, ">=": c >= 0}[self.op]

    def __str__(self) -> str:
        return f"{self.op}{self.version}"


class Wildcard(BaseModel):
    kind: Literal["wildcard"] = "wildcard"

    def contains(self, v: Version) -> bool:
        return v.prerelease is None

    def __str__(self) -> str:
        return "*"


class Conjunction(BaseModel):
    kind: Literal["conjunction"] = "conjunction"
    ranges: List["VersionRange"] = Field(min_length=1)

    def contains(self, v: Version) -> bool:
        return all(r.contains(v) for r in self.ranges)

    def __str__(self) -> str:
        return " ".join(str(r) for r in self.ranges)


VersionRange = Annotated[
    Union[Exact, Caret, Tilde, Comparator, Wildcard, Conjunction],
    Field(discriminator="kind"),
]
Conjunction.model_rebuild()


# ---------------------------------------------------------------------------
# Manifests, registry, graphs
# ---------------------------------------------------------------------------


class Dependency(BaseModel):
    name: str
    range: VersionRange


class Manifest(BaseModel):
    ecosystem: str
    name: str
    version: Version
    dependencies: List[Dependency] = []
    # adapter that produced this manifest: canonical | package.json | requirements
    source_format: str = "canonical"

    @property
    def node_id(self) -> str:
        return f"{self.name}@{self.version}"


class RegistryEntry(BaseModel):
    version: Version
    dependencies: List[Dependency] = []


class MetadataSource(Protocol):
    """Where package metadata comes from; the local snapshot is the only implementation."""

    def versions(self, name: str) -> List[RegistryEntry]:
        ...


class RegistrySnapshot(BaseModel):
    packages: Dict[str, List[RegistryEntry]] = {}

    def versions(self, name: str) -> List[RegistryEntry]:
        return self.packages.get(name, [])

    def package_edges(self) -> List[Tuple[str, str]]:
        """Package-level (dependent, dependency) pairs across every published version."""
        edges = {
            (name, dep.name)
            for name, entries in self.packages.items()
            for entry in entries
            for dep in entry.dependencies
        }
        return sorted(edges)


class DependencyEdge(BaseModel):
    source: str
    target: str
    range: str


class DependencyGraph(BaseModel):
    root: str
    ecosystem: str = ""
    nodes: List[str] = []
    edges: List[DependencyEdge] = []


class LineageStep(BaseModel):
    node: str
    range: str
