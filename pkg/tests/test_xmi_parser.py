"""XMI block-definition ingestion into the shared architecture graph."""

from pathlib import Path

import pytest

from safereq import RelationKind, ThingKind, parse_xmi_bdd
from safereq.errors import EmptyModelError, MalformedXmlError, UnresolvedNameError

DATA = Path(__file__).parent / "data"

WRAP = (
    '<?xml version="1.0"?>\n'
    '<xmi:XMI xmlns:xmi="http://schema.omg.org/spec/XMI/2.1"'
    ' xmlns:uml="http://schema.omg.org/spec/UML/2.1">\n'
    '<uml:Model xmi:id="m" name="M">\n{body}\n</uml:Model>\n</xmi:XMI>\n'
)


def rel_set(graph, kind):
    return {(r.source, r.targets) for r in graph.relations if r.kind is kind}


def test_minimal_fixture_shape():
    graph = parse_xmi_bdd((DATA / "minimal.xmi").read_text())
    assert graph.source_format == "xmi"
    assert {t.name for t in graph.objects()} == {"Vehicle", "Brake", "Sensor"}
    assert {t.name for t in graph.processes()} == {"Braking", "Sensing"}
    assert rel_set(graph, RelationKind.AGGREGATION) == {
        ("Vehicle", ("Brake",)),
        ("Vehicle", ("Sensor",)),
    }
    assert rel_set(graph, RelationKind.EXHIBITION) == {
        ("Brake", ("Braking",)),
        ("Sensor", ("Sensing",)),
    }


def test_blocks_become_objects_and_operations_become_processes():
    graph = parse_xmi_bdd(
        WRAP.format(
            body='<packagedElement xmi:type="uml:Class" xmi:id="b1" name="Pump">'
            '<ownedOperation xmi:id="o1" name="Pumping"/>'
            "</packagedElement>"
        )
    )
    assert graph.things["Pump"].kind is ThingKind.OBJECT
    assert graph.things["Pumping"].kind is ThingKind.PROCESS


def test_sysml_block_type_accepted():
    graph = parse_xmi_bdd(
        WRAP.format(
            body='<packagedElement xmi:type="sysml:Block" xmi:id="b1" name="Tank"/>'
        )
    )
    assert "Tank" in graph.things


def test_non_composite_attributes_are_ignored():
    # The dangling "external" reference sits on aggregation="none", so it
    # must not raise and must not create a relation.
    graph = parse_xmi_bdd((DATA / "minimal.xmi").read_text())
    targets = [t for r in graph.relations for t in r.targets]
    assert "external" not in targets
    assert len(rel_set(graph, RelationKind.AGGREGATION)) == 2


def test_composite_attribute_with_dangling_reference_raises():
    body = (
        '<packagedElement xmi:type="uml:Class" xmi:id="b1" name="Car">'
        '<ownedAttribute xmi:id="a1" name="wheel" aggregation="composite" type="nowhere"/>'
        "</packagedElement>"
    )
    with pytest.raises(UnresolvedNameError) as exc:
        parse_xmi_bdd(WRAP.format(body=body))
    assert "Car.wheel" in str(exc.value)


def test_nested_type_idref_form_is_supported():
    body = (
        '<packagedElement xmi:type="uml:Class" xmi:id="b1" name="Car">'
        '<ownedAttribute xmi:id="a1" name="wheel" aggregation="composite">'
        '<type xmi:idref="b2"/></ownedAttribute></packagedElement>'
        '<packagedElement xmi:type="uml:Class" xmi:id="b2" name="Wheel"/>'
    )
    graph = parse_xmi_bdd(WRAP.format(body=body))
    assert rel_set(graph, RelationKind.AGGREGATION) == {("Car", ("Wheel",))}


def test_unsupported_elements_become_warnings():
    body = (
        '<packagedElement xmi:type="uml:Class" xmi:id="b1" name="Car"/>'
        '<packagedElement xmi:type="uml:DataType" xmi:id="d1" name="Speed"/>'
    )
    graph = parse_xmi_bdd(WRAP.format(body=body))
    assert any("uml:DataType" in w for w in graph.warnings)
    assert "Speed" not in graph.things


def test_unnamed_block_and_operation_warn():
    body = (
        '<packagedElement xmi:type="uml:Class" xmi:id="b0" name=""/>'
        '<packagedElement xmi:type="uml:Class" xmi:id="b1" name="Car">'
        '<ownedOperation xmi:id="o1" name=""/></packagedElement>'
    )
    graph = parse_xmi_bdd(WRAP.format(body=body))
    assert any("no name" in w for w in graph.warnings)
    assert any("unnamed operation" in w for w in graph.warnings)


def test_malformed_xml_raises():
    with pytest.raises(MalformedXmlError):
        parse_xmi_bdd("<xmi:XMI><unclosed>")


def test_document_without_blocks_raises():
    with pytest.raises(EmptyModelError):
        parse_xmi_bdd(
            WRAP.format(
                body='<packagedElement xmi:type="uml:DataType" xmi:id="d1" name="X"/>'
            )
        )
