"""Tests for report emission, the metric gate, and the Markdown summary."""

import json

import pytest

from safereq import (
    ClassifiedRequirement,
    PairFinding,
    ReportInputs,
    build_matrix,
    catalog_from_alias_map,
    emit_report_set,
    metrics_summary,
    render_summary,
)
from safereq.errors import SafereqError


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def small_catalog():
    return catalog_from_alias_map(
        {
            "NAV": "Drone/Navigation/Navigating",
            "EN": "Drone/Energy/Energy Storing",
            "_OF_": "Other Function",
        }
    )


def crow(req_id, function="NAV", rtype="FUNC", confidence=90, flags=()):
    return ClassifiedRequirement(
        req_id=req_id,
        function=function,
        rtype=rtype,
        confidence=confidence,
        system_requirement=f"The system shall satisfy {req_id}.",
        function_explanation="fits the function",
        type_explanation="stated as a capability",
        flags=tuple(flags),
    )


def full_inputs():
    catalog = small_catalog()
    classified = [
        crow("1000"),
        crow("1001", rtype="PROB"),
        crow("1002"),
        crow("1003"),
        crow("1004", function="EN", rtype="_OT_", confidence=70, flags=("LowConfidence",)),
        crow("1005", function="_OF_", rtype="_OT_", confidence=0),
    ]
    return ReportInputs(
        classified=classified,
        catalog=catalog,
        coverage=build_matrix(classified, catalog),
        duplicates=[
            PairFinding("1000", "1002", "Duplicate", "NAV", "same behaviour")
        ],
        contradictions=[
            PairFinding("1001", "1003", "Contradiction", "NAV", "opposite limits")
        ],
        scores={"classification": 82.72, "stability": 71.43},
    )


def read_all(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


# ---------------------------------------------------------------------------
# Metric gate
# ---------------------------------------------------------------------------


def test_metrics_summary_judges_against_default_thresholds():
    rows = metrics_summary({"classification": 82.72, "stability": 71.43})
    by_name = {r.metric: r for r in rows}
    assert by_name["classification"].passed is True
    assert by_name["classification"].threshold == 80.0
    assert by_name["stability"].passed is False
    assert by_name["stability"].threshold == 80.0


def test_metrics_summary_uses_strict_inequality():
    exactly, above = metrics_summary({"duplicates": 80.0, "contradictions": 80.01})
    assert exactly.passed is False
    assert above.passed is True


def test_metrics_summary_preserves_score_order():
    rows = metrics_summary({"stability": 90.0, "classification": 10.0})
    assert [r.metric for r in rows] == ["stability", "classification"]


def test_metrics_summary_rejects_empty_scores():
    with pytest.raises(ValueError):
        metrics_summary({})


def test_metrics_summary_rejects_unknown_metric():
    with pytest.raises(SafereqError) as err:
        metrics_summary({"latency": 12.0})
    assert "latency" in str(err.value)


def test_metrics_summary_custom_thresholds_override_and_extend():
    rows = metrics_summary(
        {"classification": 82.72, "latency": 5.0},
        thresholds={"classification": 90.0, "latency": 1.0},
    )
    by_name = {r.metric: r for r in rows}
    assert by_name["classification"].passed is False
    assert by_name["classification"].threshold == 90.0
    assert by_name["latency"].passed is True


def test_metrics_summary_overrides_leave_other_defaults_intact():
    rows = metrics_summary(
        {"classification": 82.72, "stability": 81.0},
        thresholds={"classification": 85.0},
    )
    by_name = {r.metric: r for r in rows}
    assert by_name["classification"].passed is False
    assert by_name["stability"].passed is True  # default 80.0 still applies


# ---------------------------------------------------------------------------
# Report set emission
# ---------------------------------------------------------------------------


def test_emit_report_set_writes_expected_file_names(tmp_path):
    report_set = emit_report_set(full_inputs(), tmp_path, "V1")
    expected = {
        "classification_V1.csv",
        "classification_V1.json",
        "allocation_V1.csv",
        "allocation_V1.json",
        "duplicates_V1.csv",
        "duplicates_V1.json",
        "contradictions_V1.csv",
        "contradictions_V1.json",
        "coverage_V1.csv",
        "metrics_V1.json",
        "summary_V1.md",
    }
    assert {p.name for p in tmp_path.iterdir()} == expected
    assert {p.name for p in report_set.files.values()} == expected
    assert report_set.summary_path == tmp_path / "summary_V1.md"


def test_emit_report_set_skips_parts_without_artifacts(tmp_path):
    inputs = ReportInputs(classified=[crow("1000")], catalog=small_catalog())
    emit_report_set(inputs, tmp_path, "V1")
    assert {p.name for p in tmp_path.iterdir()} == {
        "classification_V1.csv",
        "classification_V1.json",
        "allocation_V1.csv",
        "allocation_V1.json",
        "summary_V1.md",
    }


def test_emit_report_set_omits_metrics_file_when_scores_empty(tmp_path):
    inputs = full_inputs()
    inputs.scores = {}
    emit_report_set(inputs, tmp_path, "V1")
    assert "metrics_V1.json" not in {p.name for p in tmp_path.iterdir()}
    summary = (tmp_path / "summary_V1.md").read_text(encoding="utf-8")
    assert "## Metrics\n_Not run._" in summary


def test_emit_report_set_is_byte_deterministic(tmp_path):
    first = tmp_path / "first"
    second = tmp_path / "second"
    emit_report_set(full_inputs(), first, "2024-08-17")
    emit_report_set(full_inputs(), second, "2024-08-17")
    assert read_all(first) == read_all(second)


def test_emit_report_set_embeds_tag_in_every_name(tmp_path):
    emit_report_set(full_inputs(), tmp_path, "rc2")
    assert all("rc2" in p.name for p in tmp_path.iterdir())


# ---------------------------------------------------------------------------
# Individual report contents
# ---------------------------------------------------------------------------


def test_classification_csv_shape(tmp_path):
    emit_report_set(full_inputs(), tmp_path, "V1")
    lines = (tmp_path / "classification_V1.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == (
        "ReqID,Function,Type,Confidence,System Requirement,"
        "Function_Explanation,Type_Explanation,Flags"
    )
    assert len(lines) == 7  # header + six rows
    assert lines[1].startswith("1000,NAV,FUNC,90,")
    assert lines[5].endswith(",LowConfidence")


def test_classification_json_mirrors_csv(tmp_path):
    emit_report_set(full_inputs(), tmp_path, "V1")
    payload = json.loads((tmp_path / "classification_V1.json").read_text(encoding="utf-8"))
    assert [r["ReqID"] for r in payload] == ["1000", "1001", "1002", "1003", "1004", "1005"]
    assert payload[0]["Function"] == "NAV"
    assert payload[4]["Flags"] == "LowConfidence"


def test_allocation_report_resolves_lineage_from_catalog(tmp_path):
    emit_report_set(full_inputs(), tmp_path, "V1")
    payload = json.loads((tmp_path / "allocation_V1.json").read_text(encoding="utf-8"))
    assert payload[0]["Lineage"] == "Drone/Navigation/Navigating"
    assert payload[5]["Lineage"] == "Other Function"


def test_allocation_report_blank_lineage_without_catalog(tmp_path):
    inputs = ReportInputs(classified=[crow("1000")])
    emit_report_set(inputs, tmp_path, "V1")
    payload = json.loads((tmp_path / "allocation_V1.json").read_text(encoding="utf-8"))
    assert payload[0]["Lineage"] == ""


def test_pair_report_rows(tmp_path):
    emit_report_set(full_inputs(), tmp_path, "V1")
    lines = (tmp_path / "duplicates_V1.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "ReqID_A,ReqID_B,Relation,Function,Rationale"
    assert lines[1] == "1000,1002,Duplicate,NAV,same behaviour"
    lines = (tmp_path / "contradictions_V1.csv").read_text(encoding="utf-8").splitlines()
    assert lines[1] == "1001,1003,Contradiction,NAV,opposite limits"


def test_coverage_csv_ends_with_total_row(tmp_path):
    emit_report_set(full_inputs(), tmp_path, "V1")
    lines = (tmp_path / "coverage_V1.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "Function,Lineage,N_FUNC,N_PROB,N_OTHER,Verdict,Triage"
    assert lines[1] == "NAV,Drone/Navigation/Navigating,3,1,0,Complete,"
    assert lines[-1] == "TOTAL,,3,1,2,,"
    assert any(line.startswith("_OF_,") and line.endswith(",yes") for line in lines)


def test_metrics_report_payload(tmp_path):
    emit_report_set(full_inputs(), tmp_path, "V1")
    payload = json.loads((tmp_path / "metrics_V1.json").read_text(encoding="utf-8"))
    assert payload == {
        "metrics": [
            {
                "metric": "classification",
                "value": 82.72,
                "threshold": 80.0,
                "passed": True,
            },
            {
                "metric": "stability",
                "value": 71.43,
                "threshold": 80.0,
                "passed": False,
            },
        ]
    }


# ---------------------------------------------------------------------------
# Markdown summary
# ---------------------------------------------------------------------------


def test_summary_sections_appear_in_fixed_order():
    text = render_summary(full_inputs(), "V1")
    headings = [
        "# Requirement Analysis Summary (V1)",
        "## Coverage",
        "## Coverage Gaps",
        "## Duplicate Requirements",
        "## Contradicting Requirements",
        "## Triage",
        "## Metrics",
    ]
    positions = [text.index(h) for h in headings]
    assert positions == sorted(positions)


def test_summary_marks_absent_parts_as_not_run():
    text = render_summary(ReportInputs(), "V1")
    # Coverage, gaps, two pair sections, triage, metrics: six in total.
    assert text.count("_Not run._") == 6
    assert "## Triage\n_Not run._" in text


def test_summary_empty_findings_read_none_found():
    inputs = full_inputs()
    inputs.duplicates = []
    inputs.contradictions = []
    text = render_summary(inputs, "V1")
    assert "## Duplicate Requirements\nNone found." in text
    assert "## Contradicting Requirements\nNone found." in text


def test_summary_clean_classification_reads_nothing_to_triage():
    inputs = ReportInputs(classified=[crow("1000"), crow("1001")])
    text = render_summary(inputs, "V1")
    assert "Nothing to triage." in text


def test_summary_triage_lists_catch_all_and_flagged_rows():
    text = render_summary(full_inputs(), "V1")
    triage = text.split("## Triage")[1].split("## Metrics")[0]
    assert "| 1004 | EN | _OT_ | 70 | LowConfidence |" in triage
    assert "| 1005 | _OF_ | _OT_ | 0 |  |" in triage
    assert "| 1000 " not in triage


def test_summary_complete_coverage_message():
    catalog = catalog_from_alias_map({"NAV": "Drone/Navigation/Navigating"})
    classified = [
        crow("1000"),
        crow("1001"),
        crow("1002"),
        crow("1003", rtype="PROB"),
    ]
    inputs = ReportInputs(
        classified=classified,
        catalog=catalog,
        coverage=build_matrix(classified, catalog),
    )
    text = render_summary(inputs, "V1")
    assert "All functions have complete coverage." in text


def test_summary_coverage_table_includes_total_row():
    text = render_summary(full_inputs(), "V1")
    assert "| NAV | 3 | 1 | 0 | Complete |" in text
    assert "| TOTAL | 3 | 1 | 2 |  |" in text


def test_summary_gap_table_ranks_by_shortfall():
    text = render_summary(full_inputs(), "V1")
    gaps = text.split("## Coverage Gaps")[1].split("## Duplicate")[0]
    # EN has one _OT_ row only: shortfall 4. _OF_ is excluded as triage bucket.
    assert "| EN | 4 | 0 | 0 |" in gaps
    assert "_OF_" not in gaps


def test_summary_metrics_table_shows_pass_and_fail():
    text = render_summary(full_inputs(), "V1")
    assert "| classification | 82.72 | 80.00 | pass |" in text
    assert "| stability | 71.43 | 80.00 | fail |" in text


def test_summary_render_is_deterministic():
    assert render_summary(full_inputs(), "V1") == render_summary(full_inputs(), "V1")
