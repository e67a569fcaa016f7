"""Line-oriented parser for Object-Process Language architecture text.

The grammar covers the sentence patterns used by object-process system
models: thing declarations, state enumerations, structural relations
(exhibits, consists of, specialization, instantiation), procedural
relations (requires, yields, handles, changes ... from ... to), and the
diagram-unfolding forms. Markdown bold markers and leading sentence
numbering are stripped before matching.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import EmptyModelError, UnresolvedNameError

# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


class ThingKind(str, Enum):
    OBJECT = "Object"
    PROCESS = "Process"


class RelationKind(str, Enum):
    AGGREGATION = "Aggregation"
    EXHIBITION = "Exhibition"
    SPECIALIZATION = "Specialization"
    INSTANTIATION = "Instantiation"
    REQUIRES = "Requires"
    YIELDS = "Yields"
    HANDLES = "Handles"
    STATE_CHANGE = "StateChange"


@dataclass
class OplThing:
    """A declared model thing (object or process)."""

    name: str
    kind: ThingKind
    essence: str = "informatical"  # informatical | physical
    affiliation: str = "systemic"  # systemic | environmental
    qualifier: str | None = None  # the "of X" owner phrase, verbatim
    states: tuple[str, ...] = ()


@dataclass
class OplRelation:
    """A linked relation between declared things.

    Specialization is stored source=general, targets=specifics;
    Instantiation is stored source=class, targets=instances. All other
    kinds keep the sentence subject as source.
    """

    kind: RelationKind
    source: str
    targets: tuple[str, ...]
    state_from: str | None = None
    state_to: str | None = None


@dataclass
class ArchitectureGraph:
    """Things plus relations parsed from one model document."""

    things: dict[str, OplThing] = field(default_factory=dict)
    relations: list[OplRelation] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    source_format: str = "opl"

    def objects(self) -> list[OplThing]:
        return [t for t in self.things.values() if t.kind is ThingKind.OBJECT]

    def processes(self) -> list[OplThing]:
        return [t for t in self.things.values() if t.kind is ThingKind.PROCESS]


# ---------------------------------------------------------------------------
# Sentence patterns
# ---------------------------------------------------------------------------

_NUMBERING_RE = re.compile(r"^\s*\d+[.)]\s+")

_DECL_RE = re.compile(
    r"^(?P<subject>.+?) is an? (?P<essence>informatical|physical)"
    r" and (?P<affiliation>systemic|environmental)"
    r" (?P<kind>object|process)\.$"
)
_STATES_RE = re.compile(r"^(?P<subject>.+?) can be (?P<states>.+?)\.$")
_CHANGES_RE = re.compile(
    r"^(?P<subject>.+?) changes (?P<target>.+?)"
    r" from (?P<state_from>.+?) to (?P<state_to>.+?)\.$"
)
_UNFOLD_RE = re.compile(
    r"^(?P<subject>.+?) from \S+ (?P<flavor>specialization|part)-unfolds"
    r" in \S+ into (?P<targets>.+?)\.$"
)
_INSTANCES_RE = re.compile(r"^(?P<subjects>.+?) (?:are|is an) instances? of (?P<target>.+?)\.$")
_PLURAL_SPEC_RE = re.compile(r"^(?P<subjects>.+?) are (?P<target>.+?)\.$")
_IS_A_RE = re.compile(r"^(?P<subject>.+?) is an? (?P<target>.+?)\.$")
_VERB_RES = (
    ("exhibits", RelationKind.EXHIBITION),
    ("consists of", RelationKind.AGGREGATION),
    ("requires", RelationKind.REQUIRES),
    ("yields", RelationKind.YIELDS),
    ("handles", RelationKind.HANDLES),
)

# OPL ellipsis for things elided from the current diagram.
_ELLIPSIS_RE = re.compile(r",?\s*and \w+ more (?:operations?|objects?|processes?|parts?)")


def _clean_sentence(line: str) -> str:
    line = _NUMBERING_RE.sub("", line.strip())
    line = line.replace("**", "")
    return re.sub(r"\s+", " ", line).strip()


def _split_subject(subject: str) -> tuple[str, str | None]:
    """Split a declaration subject into (name, qualifier phrase)."""
    head, sep, tail = subject.partition(" of ")
    if sep:
        return head.strip(), tail.strip()
    return subject.strip(), None


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class _Linker:
    """Resolves name phrases against the declared thing table."""

    def __init__(self, things: dict[str, OplThing]):
        self.things = things
        self.failures: list[str] = []

    def resolve(self, phrase: str) -> str | None:
        phrase = phrase.strip()
        if phrase in self.things:
            return phrase
        # Qualified reference: "Subsystem of System" -> "Subsystem".
        head, sep, _ = phrase.partition(" of ")
        if sep and head.strip() in self.things:
            return head.strip()
        # Plural reference: "Safety Requirements" -> "Safety Requirement".
        if phrase.endswith("s") and phrase[:-1] in self.things:
            return phrase[:-1]
        if sep and head.strip().endswith("s") and head.strip()[:-1] in self.things:
            return head.strip()[:-1]
        return None

    def require(self, phrase: str) -> str | None:
        name = self.resolve(phrase)
        if name is None:
            self.failures.append(phrase)
        return name

    def split_list(self, phrase: str) -> list[str]:
        """Split a target-list phrase into resolved names.

        Splits on commas first; a comma segment that resolves as a whole
        is kept intact, otherwise it is split at " and " boundaries
        (leftmost resolvable prefix first), so names that themselves
        contain " and " survive.
        """
        phrase = _ELLIPSIS_RE.sub("", phrase)
        phrase = phrase.replace(", as well as ", ", ").replace(" as well as ", " and ")
        names: list[str] = []
        for segment in re.split(r"\s*,\s*", phrase):
            segment = segment.strip()
            if segment.startswith("and "):
                segment = segment[4:].strip()
            if not segment:
                continue
            names.extend(self._split_segment(segment))
        return names

    def _split_segment(self, segment: str) -> list[str]:
        if self.resolve(segment) is not None or " and " not in segment:
            name = self.require(segment)
            return [name] if name is not None else []
        parts = segment.split(" and ")
        for cut in range(1, len(parts)):
            left = " and ".join(parts[:cut])
            if self.resolve(left) is not None:
                rest = " and ".join(parts[cut:])
                return [self.resolve(left)] + self._split_segment(rest)
        name = self.require(segment)
        return [name] if name is not None else []


def parse_opl(text: str) -> ArchitectureGraph:
    """Parse OPL text into an architecture graph.

    Declarations are collected in a first pass so relations may reference
    things declared later in the document. Unrecognized sentences become
    warnings; unresolved relation endpoints raise UnresolvedNameError
    listing every failure.

    Raises:
        EmptyModelError: no sentence yielded a thing or relation.
        UnresolvedNameError: a relation endpoint matched no declaration.
    """
    sentences = [s for s in (_clean_sentence(ln) for ln in text.splitlines()) if s]

    graph = ArchitectureGraph(source_format="opl")
    pending: list[str] = []

    for sentence in sentences:
        m = _DECL_RE.match(sentence)
        if m:
            name, qualifier = _split_subject(m.group("subject"))
            kind = ThingKind.OBJECT if m.group("kind") == "object" else ThingKind.PROCESS
            existing = graph.things.get(name)
            if existing is None:
                graph.things[name] = OplThing(
                    name=name,
                    kind=kind,
                    essence=m.group("essence"),
                    affiliation=m.group("affiliation"),
                    qualifier=qualifier,
                )
            else:
                if existing.kind is not kind:
                    graph.warnings.append(
                        f"conflicting redeclaration ignored: {sentence!r}"
                    )
                elif qualifier and not existing.qualifier:
                    existing.qualifier = qualifier
            continue
        pending.append(sentence)

    linker = _Linker(graph.things)

    for sentence in pending:
        if not _parse_relation(sentence, graph, linker):
            graph.warnings.append(f"unrecognized sentence: {sentence!r}")

    if not graph.things and not graph.relations:
        raise EmptyModelError("no recognizable OPL sentences found")
    if linker.failures:
        raise UnresolvedNameError(linker.failures)
    return graph


def _parse_relation(sentence: str, graph: ArchitectureGraph, linker: _Linker) -> bool:
    m = _STATES_RE.match(sentence)
    if m:
        name = linker.require(m.group("subject"))
        if name is not None:
            states = tuple(
                s.strip()
                for s in re.split(r"\s*,\s*(?:or\s+)?|\s+or\s+", m.group("states"))
                if s.strip()
            )
            graph.things[name].states = states
        return True

    m = _CHANGES_RE.match(sentence)
    if m:
        source = linker.require(m.group("subject"))
        target = linker.require(m.group("target"))
        if source is not None and target is not None:
            graph.relations.append(
                OplRelation(
                    kind=RelationKind.STATE_CHANGE,
                    source=source,
                    targets=(target,),
                    state_from=m.group("state_from").strip(),
                    state_to=m.group("state_to").strip(),
                )
            )
        return True

    m = _UNFOLD_RE.match(sentence)
    if m:
        kind = (
            RelationKind.SPECIALIZATION
            if m.group("flavor") == "specialization"
            else RelationKind.AGGREGATION
        )
        source = linker.require(m.group("subject"))
        targets = tuple(linker.split_list(m.group("targets")))
        if source is not None and targets:
            graph.relations.append(OplRelation(kind=kind, source=source, targets=targets))
        return True

    for verb, kind in _VERB_RES:
        marker = f" {verb} "
        if marker in sentence and sentence.endswith("."):
            subject, _, rest = sentence.partition(marker)
            source = linker.require(subject)
            targets = tuple(linker.split_list(rest[:-1]))
            if source is not None and targets:
                graph.relations.append(OplRelation(kind=kind, source=source, targets=targets))
            return True

    m = _INSTANCES_RE.match(sentence)
    if m:
        target = linker.require(m.group("target"))
        instances = tuple(linker.split_list(m.group("subjects")))
        if target is not None and instances:
            graph.relations.append(
                OplRelation(kind=RelationKind.INSTANTIATION, source=target, targets=instances)
            )
        return True

    m = _IS_A_RE.match(sentence)
    if m and " are " not in sentence:
        specific = linker.require(m.group("subject"))
        general = linker.require(m.group("target"))
        if specific is not None and general is not None:
            graph.relations.append(
                OplRelation(
                    kind=RelationKind.SPECIALIZATION, source=general, targets=(specific,)
                )
            )
        return True

    m = _PLURAL_SPEC_RE.match(sentence)
    if m:
        general = linker.require(m.group("target"))
        specifics = tuple(linker.split_list(m.group("subjects")))
        if general is not None and specifics:
            graph.relations.append(
                OplRelation(kind=RelationKind.SPECIALIZATION, source=general, targets=specifics)
            )
        return True

    return False
