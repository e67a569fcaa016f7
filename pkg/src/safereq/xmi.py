"""Parser for SysML block definition diagrams serialized as XMI.

Only the structural subset needed for function cataloguing is read:
blocks (uml:Class / sysml:Block) become Object things, composite
part-properties become Aggregation relations, and owned operations or
behaviors become Process things attached by Exhibition. Everything else
is reported as a warning, never an error.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET

from .errors import EmptyModelError, MalformedXmlError, UnresolvedNameError
from .opl import ArchitectureGraph, OplRelation, OplThing, RelationKind, ThingKind

_BLOCK_TYPES = {"uml:Class", "sysml:Block", "Class", "Block"}
_BEHAVIOR_TAGS = {"ownedOperation", "ownedBehavior"}


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _attr(elem: ET.Element, name: str) -> str | None:
    """Fetch an attribute by local name regardless of namespace prefix."""
    for key, value in elem.attrib.items():
        if key == name or key.endswith("}" + name):
            return value
    return None


def parse_xmi_bdd(xmi_text: str) -> ArchitectureGraph:
    """Parse XMI text into an architecture graph.

    Raises:
        MalformedXmlError: the document is not well-formed XML.
        EmptyModelError: no block elements were found.
        UnresolvedNameError: a part-property references an unknown block id.
    """
    try:
        root = ET.fromstring(xmi_text)
    except ET.ParseError as exc:
        raise MalformedXmlError(f"not well-formed XML: {exc}") from exc

    graph = ArchitectureGraph(source_format="xmi")
    blocks_by_id: dict[str, str] = {}
    block_elems: list[ET.Element] = []

    for elem in root.iter():
        if _local(elem.tag) != "packagedElement":
            continue
        elem_type = _attr(elem, "type") or ""
        if elem_type in _BLOCK_TYPES:
            name = (_attr(elem, "name") or "").strip()
            if not name:
                graph.warnings.append("skipped block with no name")
                continue
            elem_id = _attr(elem, "id")
            if elem_id:
                blocks_by_id[elem_id] = name
            if name not in graph.things:
                graph.things[name] = OplThing(
                    name=name, kind=ThingKind.OBJECT, essence="physical"
                )
            block_elems.append(elem)
        else:
            graph.warnings.append(f"unsupported element kind: {elem_type or _local(elem.tag)}")

    if not graph.things:
        raise EmptyModelError("no block elements found in XMI")

    unresolved: list[str] = []
    for elem in block_elems:
        owner = (_attr(elem, "name") or "").strip()
        for child in elem:
            tag = _local(child.tag)
            if tag == "ownedAttribute":
                if (_attr(child, "aggregation") or "") != "composite":
                    continue
                ref = _attr(child, "type")
                if ref is None:
                    type_child = next(
                        (c for c in child if _local(c.tag) == "type"), None
                    )
                    ref = _attr(type_child, "idref") if type_child is not None else None
                part = blocks_by_id.get(ref or "")
                if part is None:
                    unresolved.append(
                        f"{owner}.{_attr(child, 'name') or '?'} -> {ref or '<missing>'}"
                    )
                    continue
                graph.relations.append(
                    OplRelation(
                        kind=RelationKind.AGGREGATION, source=owner, targets=(part,)
                    )
                )
            elif tag in _BEHAVIOR_TAGS:
                op_name = (_attr(child, "name") or "").strip()
                if not op_name:
                    graph.warnings.append(f"skipped unnamed operation on {owner}")
                    continue
                if op_name not in graph.things:
                    graph.things[op_name] = OplThing(
                        name=op_name, kind=ThingKind.PROCESS, essence="informatical"
                    )
                graph.relations.append(
                    OplRelation(
                        kind=RelationKind.EXHIBITION, source=owner, targets=(op_name,)
                    )
                )

    if unresolved:
        raise UnresolvedNameError(unresolved)
    return graph
