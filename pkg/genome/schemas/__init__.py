from genome.schemas.common import ErrorResponse, Diagnostic
from genome.schemas.corpus import (
    TokenKind, Token, LexResult, LanguageProfile, FunctionDetection,
    FunctionRecord, NestingTree, Corpus,
)
from genome.schemas.metrics import MetricSet, RepoMetadata, RepoStats, SelectionConfig, SelectionResult
from genome.schemas.gene import (
    CallGraph, Centrality, RankWeights, Gene, WindowIndex, PoolMeta, GenePool,
    GeneCluster, ReplacedGene, PoolDiff,
)
from genome.schemas.clone import CloneConfig, CloneCategory, CloneCandidate, CloneSide, ClonePair, CloneLink
from genome.schemas.deps import (
    Version, VersionRange, Exact, Caret, Tilde, Comparator, Wildcard, Conjunction,
    Dependency, Manifest, RegistryEntry, RegistrySnapshot, MetadataSource,
    DependencyEdge, DependencyGraph, LineageStep,
)
from genome.schemas.advisory import (
    AdvisoryKind, Dimension, Advisory, AdvisoryDb, MatchedVia, Finding,
    PortraitWeights, Portrait,
)
from genome.schemas.report import MatchedGene, ComponentMatch, ReportMeta, ScaReport
