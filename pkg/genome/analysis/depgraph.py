"""
Package-manager dependency analysis: manifests, ranges, resolution against a
registry snapshot, lineage paths and cycles.
"""

import json
import logging
import re
from collections import deque
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Set, Tuple

import networkx as nx
from pydantic import ValidationError

from genome.core.errors import (
    DuplicateDependency,
    MalformedRange,
    NodeNotFound,
    UnknownFormat,
    UnresolvableDependency,
)
from genome.schemas.deps import (
    Caret,
    Comparator,
    Conjunction,
    Dependency,
    DependencyEdge,
    DependencyGraph,
    Exact,
    LineageStep,
    Manifest,
    MetadataSource,
    RegistryEntry,
    RegistrySnapshot,
    Tilde,
    Version,
    VersionRange,
    Wildcard,
)

logger = logging.getLogger(__name__)

MANIFEST_FORMATS = ("canonical", "package.json", "requirements")

_TERM = re.compile(r"(\^|~|>=|<=|>|<|==|=)?\s*([0-9A-Za-z.*+\-]+)")
_SEPARATORS = re.compile(r"[\s,]*")
_WILDCARDS = {"*", "x", "X", "latest"}
_REQUIREMENT = re.compile(r"^([A-Za-z0-9][A-Za-z0-9._\-]*)\s*(?:\[[^\]]*\])?\s*(.*)$")


# ---------------------------------------------------------------------------
# Ranges
# ---------------------------------------------------------------------------


def _version(text: str, source: str, position: int) -> Version:
    try:
        return Version.parse(text)
    except (ValueError, TypeError) as exc:
        raise MalformedRange(source, position, reason=f"invalid version {text!r}") from exc


def _x_range(text: str, source: str, position: int) -> Optional[VersionRange]:
    """``1.x`` / ``1.2.*`` style partial wildcards."""
    parts = text.split(".")
    if parts[-1] not in _WILDCARDS or len(parts) == 1:
        return None
    fixed = parts[:-1]
    if any(p in _WILDCARDS or not p.isdigit() for p in fixed) or len(fixed) > 2:
        raise MalformedRange(source, position, reason=f"invalid wildcard version {text!r}")
    major = int(fixed[0])
    if len(fixed) == 1:
        lower, upper = Version(major=major), Version(major=major + 1)
    else:
        minor = int(fixed[1])
        lower, upper = Version(major=major, minor=minor), Version(major=major, minor=minor + 1)
    return Conjunction(ranges=[Comparator(op=">=", version=lower), Comparator(op="<", version=upper)])


def parse_range(text: str) -> VersionRange:
    """
    Parse ``^1.2.3``, ``~1.2.3``, ``>=1.0.0 <2.0.0``, ``1.2.3``, ``*``.

    Space- or comma-separated terms form a conjunction; partial versions
    fill with zeros.
    """
    source = text
    text = text.strip()
    if text in _WILDCARDS or text == "":
        return Wildcard()

    terms: List[VersionRange] = []
    pos = 0
    while pos < len(source):
        pos = _SEPARATORS.match(source, pos).end()
        if pos >= len(source):
            break
        m = _TERM.match(source, pos)
        if m is None:
            raise MalformedRange(source, pos, reason="unexpected character")
        op, vtext = m.group(1), m.group(2)
        vpos = m.start(2)

        if vtext in _WILDCARDS:
            if op not in (None, "=", "=="):
                raise MalformedRange(source, vpos, reason=f"operator {op} needs a version")
            terms.append(Wildcard())
        elif (partial := _x_range(vtext, source, vpos)) is not None:
            if op not in (None, "=", "=="):
                raise MalformedRange(source, vpos, reason=f"operator {op} needs a version")
            terms.append(partial)
        else:
            version = _version(vtext, source, vpos)
            if op == "^":
                terms.append(Caret(version=version))
            elif op == "~":
                terms.append(Tilde(version=version))
            elif op in ("<", "<=", ">", ">="):
                terms.append(Comparator(op=op, version=version))
            else:
                terms.append(Exact(version=version))
        pos = m.end()

    if not terms:
        return Wildcard()
    return terms[0] if len(terms) == 1 else Conjunction(ranges=terms)


def range_contains(r: VersionRange, v: Version) -> bool:
    return r.contains(v)


# ---------------------------------------------------------------------------
# Manifest adapters
# ---------------------------------------------------------------------------


def _check_unique(dependencies: Iterable[Dependency]) -> List[Dependency]:
    seen: Set[str] = set()
    deps = list(dependencies)
    for dep in deps:
        if dep.name in seen:
            raise DuplicateDependency(dep.name)
        seen.add(dep.name)
    return deps


def _canonical(obj: dict) -> Manifest:
    deps = []
    for entry in obj.get("dependencies", []):
        if not isinstance(entry, dict) or "name" not in entry:
            raise UnknownFormat("canonical manifest dependencies need {name, range} objects")
        deps.append(Dependency(name=entry["name"], range=parse_range(str(entry.get("range", "*")))))
    return Manifest(
        ecosystem=str(obj.get("ecosystem", "")),
        name=str(obj.get("name", "root")),
        version=_version(str(obj.get("version", "0.0.0")), "version", 0),
        dependencies=_check_unique(deps),
        source_format="canonical",
    )


def _package_json(obj: dict) -> Manifest:
    deps = obj.get("dependencies") or {}
    if not isinstance(deps, dict):
        raise UnknownFormat("package.json dependencies must be an object")
    return Manifest(
        ecosystem="npm",
        name=str(obj.get("name", "root")),
        version=_version(str(obj.get("version", "0.0.0")), "version", 0),
        # JSON objects cannot repeat keys, so no uniqueness check here
        dependencies=[Dependency(name=n, range=parse_range(str(r))) for n, r in deps.items()],
        source_format="package.json",
    )


def _requirement_range(specifier: str) -> VersionRange:
    terms: List[VersionRange] = []
    offset = 0
    for part in specifier.split(","):
        stripped = part.strip()
        at = offset + (len(part) - len(part.lstrip()))
        offset += len(part) + 1
        if not stripped:
            continue
        if stripped.startswith("~="):
            base = _version(stripped[2:].strip(), specifier, at + 2)
            if len(stripped[2:].strip().split(".")) >= 3:
                terms.append(Tilde(version=base))
            else:
                terms.append(Caret(version=base))
        elif stripped.startswith("!="):
            raise MalformedRange(specifier, at, reason="exclusions are not supported")
        else:
            try:
                terms.append(parse_range(stripped))
            except MalformedRange as exc:
                raise MalformedRange(specifier, at + exc.position, reason="invalid requirement") from exc
    if not terms:
        return Wildcard()
    return terms[0] if len(terms) == 1 else Conjunction(ranges=terms)


def _requirements(text: str, name: str) -> Manifest:
    deps = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("-"):
            logger.warning("Ignoring requirements option line: %s", line)
            continue
        m = _REQUIREMENT.match(line)
        if m is None:
            raise UnknownFormat(f"not a requirement line: {raw!r}")
        deps.append(Dependency(name=m.group(1), range=_requirement_range(m.group(2))))
    return Manifest(
        ecosystem="pypi",
        name=name,
        version=Version(major=0),
        dependencies=_check_unique(deps),
        source_format="requirements",
    )


def parse_manifest(data: bytes, ecosystem_hint: Optional[str] = None, name: str = "root") -> Manifest:
    """
    Normalize a manifest. ``ecosystem_hint`` picks the adapter (canonical,
    package.json / npm, requirements / pypi); without it the format is sniffed.
    """
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise UnknownFormat(f"manifest is not UTF-8 text: {exc}") from exc

    hint = (ecosystem_hint or "").lower()
    if hint in ("requirements", "requirements.txt", "pypi"):
        return _requirements(text, name)

    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        obj = None

    try:
        if hint == "canonical":
            if not isinstance(obj, dict):
                raise UnknownFormat("canonical manifest must be a JSON object")
            return _canonical(obj)
        if hint in ("package.json", "npm"):
            if not isinstance(obj, dict):
                raise UnknownFormat("package.json must be a JSON object")
            return _package_json(obj)
        if hint:
            raise UnknownFormat(f"unknown manifest format {ecosystem_hint!r}; expected one of {', '.join(MANIFEST_FORMATS)}")

        if isinstance(obj, dict):
            if isinstance(obj.get("dependencies"), list):
                return _canonical(obj)
            if "dependencies" in obj or "name" in obj:
                return _package_json(obj)
            raise UnknownFormat("JSON manifest has neither a dependency list nor a dependency mapping")
        if obj is not None:
            raise UnknownFormat("JSON manifest must be an object")
        return _requirements(text, name)
    except ValidationError as exc:
        raise UnknownFormat(f"invalid manifest: {exc.errors()[0]['msg']}") from exc


def load_manifest(path: Path, ecosystem_hint: Optional[str] = None) -> Manifest:
    path = Path(path)
    hint = ecosystem_hint
    if hint is None and path.name == "package.json":
        hint = "package.json"
    elif hint is None and path.suffix == ".txt":
        hint = "requirements"
    return parse_manifest(path.read_bytes(), hint, name=path.parent.name or "root")


def load_registry(path: Path) -> RegistrySnapshot:
    """Registry snapshot JSON: ``{name: [{version, dependencies: [{name, range}]}]}``."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UnknownFormat(f"registry {path} is not JSON: {exc.msg} (line {exc.lineno})") from exc
    if not isinstance(raw, dict):
        raise UnknownFormat(f"registry {path} must map package names to version lists")

    packages: Dict[str, List[RegistryEntry]] = {}
    for name, entries in sorted(raw.items()):
        if not isinstance(entries, list):
            raise UnknownFormat(f"registry entry for {name!r} must be a list")
        parsed = []
        for entry in entries:
            if not isinstance(entry, dict) or "version" not in entry:
                raise UnknownFormat(f"registry entry for {name!r} needs a version")
            deps = []
            for d in entry.get("dependencies", []):
                if not isinstance(d, dict) or "name" not in d:
                    raise UnknownFormat(f"dependency of {name}@{entry['version']} needs a name")
                deps.append(Dependency(name=d["name"], range=parse_range(str(d.get("range", "*")))))
            parsed.append(
                RegistryEntry(
                    version=_version(str(entry["version"]), f"{name} version", 0),
                    dependencies=_check_unique(deps),
                )
            )
        packages[name] = parsed
    return RegistrySnapshot(packages=packages)


# ---------------------------------------------------------------------------
# Resolution
# ---------------------------------------------------------------------------


def _graph(root: str, ecosystem: str, nodes: Set[str], edges: Dict[Tuple[str, str], str]) -> DependencyGraph:
    return DependencyGraph(
        root=root,
        ecosystem=ecosystem,
        nodes=sorted(nodes),
        edges=[DependencyEdge(source=s, target=t, range=r) for (s, t), r in sorted(edges.items())],
    )


def resolve(root: Manifest, registry: MetadataSource) -> DependencyGraph:
    """
    Breadth-first, highest-satisfying-version resolution; one node per
    name@version. A range nothing satisfies aborts with the graph built so far.
    """
    root_id = root.node_id
    nodes: Set[str] = {root_id}
    edges: Dict[Tuple[str, str], str] = {}
    queue = deque([(root_id, root.dependencies)])

    while queue:
        source, deps = queue.popleft()
        for dep in sorted(deps, key=lambda d: d.name):
            entries = registry.versions(dep.name)
            satisfying = [e for e in entries if dep.range.contains(e.version)]
            if not satisfying:
                available = [str(e.version) for e in sorted(entries, key=lambda e: e.version.to_semver())]
                raise UnresolvableDependency(
                    dep.name,
                    str(dep.range),
                    available,
                    partial_graph=_graph(root_id, root.ecosystem, nodes, edges),
                )
            chosen = max(satisfying, key=lambda e: e.version.to_semver())
            target = f"{dep.name}@{chosen.version}"
            edges[(source, target)] = str(dep.range)
            if target not in nodes:
                nodes.add(target)
                queue.append((target, chosen.dependencies))

    graph = _graph(root_id, root.ecosystem, nodes, edges)
    logger.info("Resolved %d package(s) under %s.", len(graph.nodes) - 1, root_id)
    return graph


def to_networkx(g: DependencyGraph) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(g.nodes)
    for edge in g.edges:
        graph.add_edge(edge.source, edge.target, range=edge.range)
    return graph


def split_node(node: str) -> Tuple[str, str]:
    name, _, version = node.rpartition("@")
    return name, version


def find_node(g: DependencyGraph, node: str) -> str:
    """Accept a full ``name@version`` id or a bare package name with one resolved version."""
    if node in g.nodes:
        return node
    matches = [n for n in g.nodes if split_node(n)[0] == node]
    if len(matches) == 1:
        return matches[0]
    if matches:
        raise NodeNotFound(f"{node!r} is ambiguous: {', '.join(matches)}")
    raise NodeNotFound(f"{node!r} is not in the dependency graph")


def lineage_paths(g: DependencyGraph, node: str) -> List[List[LineageStep]]:
    """Every simple root → node path as (node, declared range) steps; the root has one empty path."""
    target = find_node(g, node)
    if target == g.root:
        return [[]]

    graph = to_networkx(g)
    paths = []
    for path in nx.all_simple_paths(graph, g.root, target):
        paths.append(
            [LineageStep(node=v, range=graph.edges[u, v]["range"]) for u, v in zip(path, path[1:])]
        )
    paths.sort(key=lambda p: [step.node for step in p])
    return paths


def detect_cycles(g: DependencyGraph) -> List[List[str]]:
    cycles = []
    for cycle in nx.simple_cycles(to_networkx(g)):
        i = cycle.index(min(cycle))
        cycles.append(cycle[i:] + cycle[:i])
    cycles.sort()
    return cycles


def package_edges(graphs: Iterable[DependencyGraph]) -> List[Tuple[str, str]]:
    """Collapse resolved graphs to package-name edges."""
    edges = {
        (split_node(e.source)[0], split_node(e.target)[0])
        for g in graphs
        for e in g.edges
    }
    return sorted(edges)
