"""Function catalogs: the alias -> lineage table that anchors every analysis.

A catalog lists each system function once, keyed by a short alias, with a
lineage path of one to three segments (System/Subsystem/Function). Two
extraction paths exist: a deterministic graph walk over a parsed
architecture, and an LLM-backed identification over raw model text. The
catch-all alias _OF_ ("Other Function") is always present so downstream
classification has a place for requirements that fit no function.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import NoPrimarySystemError, SchemaViolationError
from .gateway import (
    Backend,
    LlmRequestParams,
    PromptEnvelope,
    PromptResource,
    assemble_prompt,
    extract_results_root,
    send,
)
from .opl import ArchitectureGraph, RelationKind, ThingKind

CATCH_ALL_ALIAS = "_OF_"
CATCH_ALL_LINEAGE = "Other Function"

_SKIP_WORDS = {"and", "of", "the", "a", "an", "to", "for", "or"}

FUNCTION_IDENTIFICATION_INSTRUCTIONS = """\
You are given a system architecture model inside the tag architecture_model.
Identify the primary systems and their functions, and return them as JSON.

Rules:
1. A primary system is a system object that is not a part, attribute, or
   exhibited feature of any other object.
2. A function is a process that a system or one of its sub-systems exhibits.
   Report every function under the primary system that owns it, delineated
   as a lineage of at most three segments: system name/sub-system
   name/function name. Omit the sub-system segment when the primary system
   exhibits the function directly.
3. DO NOT REPORT input or output objects that are merely passed from
   function to function; they are flows, not functions.
4. Give every function a short unique uppercase alias. Also include the
   placeholder alias "_OF_" mapped to "Other Function" for requirements
   that will not match any listed function.

Answer with a single JSON document of the form
{"results": {"<primary system>": {"<ALIAS>": "<lineage>", ...}, ...}}
with no commentary.
"""


@dataclass(frozen=True)
class CatalogEntry:
    alias: str
    lineage: str  # 1-3 slash-separated segments
    primary_system: str


@dataclass
class FunctionCatalog:
    entries: list[CatalogEntry] = field(default_factory=list)
    primary_systems: list[str] = field(default_factory=list)
    contains_catch_all: bool = False
    warnings: list[str] = field(default_factory=list)

    @property
    def aliases(self) -> list[str]:
        return [e.alias for e in self.entries]

    def entry(self, alias: str) -> CatalogEntry | None:
        for e in self.entries:
            if e.alias == alias:
                return e
        return None

    def has_alias(self, alias: str) -> bool:
        return any(e.alias == alias for e in self.entries)

    def alias_map(self) -> dict[str, str]:
        """Flat {alias: lineage} view, the shape prompts embed."""
        return {e.alias: e.lineage for e in self.entries}

    def to_mapping(self) -> dict[str, dict[str, str]]:
        """Nested {primary: {alias: lineage}} view, the serialized shape."""
        grouped: dict[str, dict[str, str]] = {}
        for e in self.entries:
            key = e.primary_system or "Functions"
            grouped.setdefault(key, {})[e.alias] = e.lineage
        return grouped

    def to_json(self) -> str:
        return json.dumps(self.to_mapping(), indent=2, ensure_ascii=False)


# ---------------------------------------------------------------------------
# Construction from mappings
# ---------------------------------------------------------------------------


def catalog_from_mapping(mapping: dict, warnings: list[str] | None = None) -> FunctionCatalog:
    """Build a catalog from the nested {primary: {alias: lineage}} shape.

    Raises SchemaViolationError naming the offending key for malformed
    pairs or lineages deeper than three segments.
    """
    if not isinstance(mapping, dict):
        raise SchemaViolationError("catalog root must be a JSON object")
    catalog = FunctionCatalog(warnings=list(warnings or []))
    for primary, functions in mapping.items():
        if not isinstance(functions, dict):
            raise SchemaViolationError(
                f"catalog node {primary!r} must map aliases to lineages"
            )
        catalog.primary_systems.append(str(primary))
        for alias, lineage in functions.items():
            if not isinstance(alias, str) or not isinstance(lineage, str) or not lineage:
                raise SchemaViolationError(
                    f"malformed alias:lineage pair under {primary!r}: "
                    f"{alias!r}: {lineage!r}"
                )
            if len(lineage.split("/")) > 3:
                raise SchemaViolationError(
                    f"lineage for {alias!r} has more than three segments: {lineage!r}"
                )
            catalog.entries.append(
                CatalogEntry(alias=alias, lineage=lineage, primary_system=str(primary))
            )
            if alias == CATCH_ALL_ALIAS:
                catalog.contains_catch_all = True
    _ensure_catch_all(catalog)
    return catalog


def catalog_from_alias_map(mapping: dict[str, str]) -> FunctionCatalog:
    """Build a catalog from a flat {alias: lineage} map (resource files)."""
    catalog = FunctionCatalog()
    for alias, lineage in mapping.items():
        if not isinstance(alias, str) or not isinstance(lineage, str) or not lineage:
            raise SchemaViolationError(
                f"malformed alias:lineage pair: {alias!r}: {lineage!r}"
            )
        segments = lineage.split("/")
        if len(segments) > 3:
            raise SchemaViolationError(
                f"lineage for {alias!r} has more than three segments: {lineage!r}"
            )
        primary = segments[0] if len(segments) > 1 else ""
        catalog.entries.append(
            CatalogEntry(alias=alias, lineage=lineage, primary_system=primary)
        )
        if alias == CATCH_ALL_ALIAS:
            catalog.contains_catch_all = True
        if primary and primary not in catalog.primary_systems:
            catalog.primary_systems.append(primary)
    _ensure_catch_all(catalog)
    return catalog


def _ensure_catch_all(catalog: FunctionCatalog) -> None:
    if catalog.contains_catch_all:
        return
    primary = catalog.primary_systems[0] if catalog.primary_systems else ""
    catalog.entries.append(
        CatalogEntry(alias=CATCH_ALL_ALIAS, lineage=CATCH_ALL_LINEAGE, primary_system=primary)
    )
    catalog.contains_catch_all = True
    catalog.warnings.append(f"catch-all {CATCH_ALL_ALIAS} was missing and has been added")


# ---------------------------------------------------------------------------
# Alias derivation
# ---------------------------------------------------------------------------


def derive_alias(name: str) -> str:
    """Uppercase initials of the capitalized words, CamelCase-aware."""
    letters: list[str] = []
    for word in name.split():
        if not word or not word[0].isalpha() or word.lower() in _SKIP_WORDS:
            continue
        letters.append(word[0].upper())
        letters.extend(c for c in word[1:] if c.isupper())
    if not letters:
        cleaned = "".join(c for c in name if c.isalpha())
        return (cleaned[:1] or "F").upper()
    return "".join(letters)


class _AliasAllocator:
    def __init__(self, hints: dict[str, str]):
        self.hints = dict(hints)
        self.taken: set[str] = {CATCH_ALL_ALIAS}

    def allocate(self, leaf_name: str, lineage: str) -> str:
        base = self.hints.get(leaf_name) or self.hints.get(lineage) or derive_alias(leaf_name)
        if base == CATCH_ALL_ALIAS:
            base = derive_alias(leaf_name)
        alias = base
        n = 2
        while alias in self.taken:
            alias = f"{base}{n}"
            n += 1
        self.taken.add(alias)
        return alias


# ---------------------------------------------------------------------------
# Deterministic extraction
# ---------------------------------------------------------------------------


def extract_catalog(
    graph: ArchitectureGraph, alias_hints: dict[str, str] | None = None
) -> FunctionCatalog:
    """Walk an architecture graph and derive the function catalog.

    Primary systems are Objects with no incoming Aggregation/Exhibition
    from another Object. Functions are the aggregation-leaf Processes
    reached from Object exhibitions, plus the leaves of root process
    trees (processes nothing exhibits or contains). Objects that appear
    only as Requires/Yields endpoints are flows and are ignored entirely.

    Raises:
        NoPrimarySystemError: no primary system and no root process exists.
    """
    things = graph.things
    object_names = {t.name for t in graph.objects()}
    process_names = {t.name for t in graph.processes()}

    flow_objects = _flow_objects(graph, object_names)

    owned_objects: dict[str, str] = {}  # object -> first owner object
    exhibited: list[tuple[str, str]] = []  # (object, process), relation order
    part_children: dict[str, list[str]] = {}  # process -> child processes
    process_has_parent: set[str] = set()

    for rel in graph.relations:
        src_is_obj = rel.source in object_names
        for target in rel.targets:
            if rel.kind in (RelationKind.AGGREGATION, RelationKind.EXHIBITION):
                if src_is_obj and target in object_names:
                    if rel.source not in flow_objects:
                        owned_objects.setdefault(target, rel.source)
                elif src_is_obj and target in process_names:
                    if rel.kind is RelationKind.EXHIBITION:
                        exhibited.append((rel.source, target))
                        process_has_parent.add(target)
                    else:
                        # An object aggregating a process also anchors it.
                        exhibited.append((rel.source, target))
                        process_has_parent.add(target)
                elif rel.source in process_names and target in process_names:
                    part_children.setdefault(rel.source, []).append(target)
                    process_has_parent.add(target)

    primaries = [
        t.name
        for t in graph.objects()
        if t.name not in flow_objects and t.name not in owned_objects
    ]
    root_processes = [
        t.name for t in graph.processes() if t.name not in process_has_parent
    ]
    if not primaries and not root_processes:
        raise NoPrimarySystemError(
            "no primary system found (containment is empty or cyclic)"
        )

    catalog = FunctionCatalog(primary_systems=list(primaries))
    allocator = _AliasAllocator(alias_hints or {})
    seen: set[tuple[str, str]] = set()

    def leaves(process: str, visited: set[str]) -> list[str]:
        if process in visited:
            catalog.warnings.append(f"cyclic process containment at {process!r}")
            return []
        children = [c for c in part_children.get(process, []) if c in process_names]
        if not children:
            return [process]
        visited = visited | {process}
        out: list[str] = []
        for child in children:
            for leaf in leaves(child, visited):
                if leaf not in out:
                    out.append(leaf)
        return out

    def primary_ancestor(obj: str) -> str | None:
        current, visited = obj, set()
        while current in owned_objects:
            if current in visited:
                catalog.warnings.append(f"cyclic containment at {current!r}")
                return None
            visited.add(current)
            current = owned_objects[current]
        return current if current in primaries else None

    # Functions exhibited by objects, in declaration-then-relation order.
    for obj in (t.name for t in graph.objects()):
        for owner, process in exhibited:
            if owner != obj:
                continue
            primary = primary_ancestor(obj)
            if primary is None:
                catalog.warnings.append(
                    f"no primary ancestor for {obj!r}; skipping {process!r}"
                )
                continue
            for leaf in leaves(process, set()):
                if (primary, leaf) in seen:
                    continue
                seen.add((primary, leaf))
                segments = [primary, leaf] if obj == primary else [primary, obj, leaf]
                lineage = "/".join(segments)
                alias = allocator.allocate(leaf, lineage)
                catalog.entries.append(
                    CatalogEntry(alias=alias, lineage=lineage, primary_system=primary)
                )

    # Root process trees act as their own functional roots.
    for root in root_processes:
        for leaf in leaves(root, set()):
            if (root, leaf) in seen:
                continue
            seen.add((root, leaf))
            lineage = root if leaf == root else f"{root}/{leaf}"
            alias = allocator.allocate(leaf, lineage)
            catalog.entries.append(
                CatalogEntry(alias=alias, lineage=lineage, primary_system=root)
            )
        if root not in catalog.primary_systems:
            catalog.primary_systems.append(root)

    if not any(e.alias != CATCH_ALL_ALIAS for e in catalog.entries):
        catalog.warnings.append("model yields no functions; catalog is catch-all only")

    first_root = catalog.primary_systems[0] if catalog.primary_systems else ""
    catalog.entries.append(
        CatalogEntry(
            alias=CATCH_ALL_ALIAS, lineage=CATCH_ALL_LINEAGE, primary_system=first_root
        )
    )
    catalog.contains_catch_all = True
    return catalog


def _flow_objects(graph: ArchitectureGraph, object_names: set[str]) -> set[str]:
    """Objects whose only role is Requires/Yields target of a process."""
    flowish: set[str] = set()
    other_role: set[str] = set()
    for rel in graph.relations:
        other_role.add(rel.source)
        for target in rel.targets:
            if rel.kind in (RelationKind.REQUIRES, RelationKind.YIELDS):
                flowish.add(target)
            else:
                other_role.add(target)
    return {name for name in flowish & object_names if name not in other_role}


# ---------------------------------------------------------------------------
# LLM-backed extraction
# ---------------------------------------------------------------------------


def extract_catalog_llm(
    model_text: str,
    params: LlmRequestParams,
    backend: Backend,
    instructions: str = FUNCTION_IDENTIFICATION_INSTRUCTIONS,
) -> FunctionCatalog:
    """Ask the backend to identify primary systems and functions.

    The model text is wrapped in an architecture_model resource tag; the
    response must carry the nested {primary: {alias: lineage}} shape under
    "results". The catch-all _OF_ is injected (with a warning) when the
    model omits it.
    """
    envelope = PromptEnvelope(
        instructions=instructions,
        resources=(PromptResource(tag="architecture_model", body=model_text),),
    )
    result = send(assemble_prompt(envelope), params, backend)
    root = extract_results_root(result.raw_text)
    if not isinstance(root, dict):
        raise SchemaViolationError("function identification results must be a JSON object")
    warnings = []
    if not root:
        warnings.append("backend returned an empty function map")
    return catalog_from_mapping(root, warnings=warnings)
