"""Report-set emission: the four analysis reports plus summary and metrics.

All writers are deterministic: emitting the same artifacts with the same
version tag twice produces byte-identical files. Nothing here embeds
wall-clock time; the version tag is the only run identifier.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .catalog import CATCH_ALL_ALIAS, FunctionCatalog
from .classify import ClassifiedRequirement
from .coverage import CoverageMatrix, gap_ranking
from .errors import SafereqError
from .pairwise import PairFinding

DEFAULT_THRESHOLDS = {
    "subsystem_identification": 90.0,
    "classification": 80.0,
    "duplicates": 80.0,
    "contradictions": 80.0,
    "stability": 80.0,
}

_NOT_RUN = "_Not run._"


@dataclass
class MetricRow:
    metric: str
    value: float
    threshold: float
    passed: bool


@dataclass
class ReportInputs:
    """Everything emit_report_set may render; None marks a part as not run."""

    classified: list[ClassifiedRequirement] | None = None
    catalog: FunctionCatalog | None = None
    coverage: CoverageMatrix | None = None
    duplicates: list[PairFinding] | None = None
    contradictions: list[PairFinding] | None = None
    scores: dict[str, float] | None = None
    thresholds: dict[str, float] | None = None


@dataclass
class ReportSet:
    files: dict[str, Path] = field(default_factory=dict)

    @property
    def summary_path(self) -> Path | None:
        return self.files.get("summary")


# ---------------------------------------------------------------------------
# Low-level writers
# ---------------------------------------------------------------------------


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# Individual reports
# ---------------------------------------------------------------------------


def write_classification_report(
    rows: list[ClassifiedRequirement], out_dir: Path, tag: str
) -> list[Path]:
    header = [
        "ReqID",
        "Function",
        "Type",
        "Confidence",
        "System Requirement",
        "Function_Explanation",
        "Type_Explanation",
        "Flags",
    ]
    table = [
        [
            r.req_id,
            r.function,
            r.rtype,
            r.confidence,
            r.system_requirement,
            r.function_explanation,
            r.type_explanation,
            "|".join(r.flags),
        ]
        for r in rows
    ]
    csv_path = out_dir / f"classification_{tag}.csv"
    json_path = out_dir / f"classification_{tag}.json"
    _write_csv(csv_path, header, table)
    _write_json(json_path, [dict(zip(header, row)) for row in table])
    return [csv_path, json_path]


def write_allocation_report(
    rows: list[ClassifiedRequirement],
    catalog: FunctionCatalog | None,
    out_dir: Path,
    tag: str,
) -> list[Path]:
    lineages = catalog.alias_map() if catalog is not None else {}
    header = ["ReqID", "Function", "Lineage", "System Requirement"]
    table = [
        [r.req_id, r.function, lineages.get(r.function, ""), r.system_requirement]
        for r in rows
    ]
    csv_path = out_dir / f"allocation_{tag}.csv"
    json_path = out_dir / f"allocation_{tag}.json"
    _write_csv(csv_path, header, table)
    _write_json(json_path, [dict(zip(header, row)) for row in table])
    return [csv_path, json_path]


def write_pair_report(
    findings: list[PairFinding], stem: str, out_dir: Path, tag: str
) -> list[Path]:
    header = ["ReqID_A", "ReqID_B", "Relation", "Function", "Rationale"]
    table = [[f.req_a, f.req_b, f.kind, f.function, f.rationale] for f in findings]
    csv_path = out_dir / f"{stem}_{tag}.csv"
    json_path = out_dir / f"{stem}_{tag}.json"
    _write_csv(csv_path, header, table)
    _write_json(json_path, [dict(zip(header, row)) for row in table])
    return [csv_path, json_path]


def write_coverage_report(matrix: CoverageMatrix, out_dir: Path, tag: str) -> list[Path]:
    header = ["Function", "Lineage", "N_FUNC", "N_PROB", "N_OTHER", "Verdict", "Triage"]
    table = [
        [
            row.alias,
            row.lineage,
            row.n_func,
            row.n_prob,
            row.n_other,
            row.verdict,
            "yes" if row.is_triage_bucket else "",
        ]
        for row in matrix.rows
    ]
    table.append(["TOTAL", "", *matrix.totals, "", ""])
    csv_path = out_dir / f"coverage_{tag}.csv"
    _write_csv(csv_path, header, table)
    return [csv_path]


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def metrics_summary(
    scores: dict[str, float], thresholds: dict[str, float] | None = None
) -> list[MetricRow]:
    """Judge each score against its acceptance threshold (strictly greater).

    Raises:
        ValueError: no scores given.
        SafereqError: a score has no configured threshold.
    """
    if not scores:
        raise ValueError("metrics_summary needs at least one score")
    limits = {**DEFAULT_THRESHOLDS, **(thresholds or {})}
    rows = []
    for metric, value in scores.items():
        if metric not in limits:
            raise SafereqError(f"no threshold configured for metric {metric!r}")
        threshold = limits[metric]
        rows.append(
            MetricRow(
                metric=metric,
                value=value,
                threshold=threshold,
                passed=value > threshold,
            )
        )
    return rows


def write_metrics_report(metrics: list[MetricRow], out_dir: Path, tag: str) -> list[Path]:
    payload = {
        "metrics": [
            {
                "metric": m.metric,
                "value": m.value,
                "threshold": m.threshold,
                "passed": m.passed,
            }
            for m in metrics
        ]
    }
    json_path = out_dir / f"metrics_{tag}.json"
    _write_json(json_path, payload)
    return [json_path]


# ---------------------------------------------------------------------------
# Markdown summary and full report set
# ---------------------------------------------------------------------------


def _md_table(header: list[str], rows: list[list]) -> str:
    lines = [
        "| " + " | ".join(header) + " |",
        "| " + " | ".join("---" for _ in header) + " |",
    ]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return "\n".join(lines)


def render_summary(inputs: ReportInputs, tag: str) -> str:
    """Markdown summary; absent artifacts render as not run."""
    parts = [f"# Requirement Analysis Summary ({tag})", ""]

    parts.append("## Coverage")
    if inputs.coverage is None:
        parts.append(_NOT_RUN)
    else:
        rows = [
            [r.alias, r.n_func, r.n_prob, r.n_other, r.verdict]
            for r in inputs.coverage.rows
        ]
        rows.append(["TOTAL", *inputs.coverage.totals, ""])
        parts.append(_md_table(["Function", "FUNC", "PROB", "OTHER", "Verdict"], rows))

    parts.append("\n## Coverage Gaps")
    if inputs.coverage is None:
        parts.append(_NOT_RUN)
    else:
        gaps = gap_ranking(inputs.coverage)
        if not gaps:
            parts.append("All functions have complete coverage.")
        else:
            parts.append(
                _md_table(
                    ["Function", "Shortfall", "FUNC", "PROB"],
                    [[r.alias, s, r.n_func, r.n_prob] for r, s in gaps],
                )
            )

    for title, findings in (
        ("Duplicate Requirements", inputs.duplicates),
        ("Contradicting Requirements", inputs.contradictions),
    ):
        parts.append(f"\n## {title}")
        if findings is None:
            parts.append(_NOT_RUN)
        elif not findings:
            parts.append("None found.")
        else:
            parts.append(
                _md_table(
                    ["ReqID A", "ReqID B", "Relation", "Function"],
                    [[f.req_a, f.req_b, f.kind, f.function] for f in findings],
                )
            )

    parts.append("\n## Triage")
    if inputs.classified is None:
        parts.append(_NOT_RUN)
    else:
        triage = [
            r
            for r in inputs.classified
            if r.function == CATCH_ALL_ALIAS or r.flags
        ]
        if not triage:
            parts.append("Nothing to triage.")
        else:
            parts.append(
                _md_table(
                    ["ReqID", "Function", "Type", "Confidence", "Flags"],
                    [
                        [r.req_id, r.function, r.rtype, r.confidence, "|".join(r.flags)]
                        for r in triage
                    ],
                )
            )

    parts.append("\n## Metrics")
    if not inputs.scores:
        parts.append(_NOT_RUN)
    else:
        rows = [
            [m.metric, f"{m.value:.2f}", f"{m.threshold:.2f}", "pass" if m.passed else "fail"]
            for m in metrics_summary(inputs.scores, inputs.thresholds)
        ]
        parts.append(_md_table(["Metric", "Value", "Threshold", "Result"], rows))

    return "\n".join(parts) + "\n"


def emit_report_set(inputs: ReportInputs, out_dir: str | Path, version_tag: str) -> ReportSet:
    """Write every available report plus the Markdown summary.

    Returns a ReportSet mapping report names to the files written. Parts
    with no artifact are only mentioned (as not run) in the summary.
    """
    out = Path(out_dir)
    report_set = ReportSet()

    if inputs.classified is not None:
        csv_path, json_path = write_classification_report(
            inputs.classified, out, version_tag
        )
        report_set.files["classification"] = csv_path
        report_set.files["classification_json"] = json_path
        csv_path, json_path = write_allocation_report(
            inputs.classified, inputs.catalog, out, version_tag
        )
        report_set.files["allocation"] = csv_path
        report_set.files["allocation_json"] = json_path
    if inputs.duplicates is not None:
        csv_path, json_path = write_pair_report(
            inputs.duplicates, "duplicates", out, version_tag
        )
        report_set.files["duplicates"] = csv_path
        report_set.files["duplicates_json"] = json_path
    if inputs.contradictions is not None:
        csv_path, json_path = write_pair_report(
            inputs.contradictions, "contradictions", out, version_tag
        )
        report_set.files["contradictions"] = csv_path
        report_set.files["contradictions_json"] = json_path
    if inputs.coverage is not None:
        (csv_path,) = write_coverage_report(inputs.coverage, out, version_tag)
        report_set.files["coverage"] = csv_path
    if inputs.scores:
        (json_path,) = write_metrics_report(
            metrics_summary(inputs.scores, inputs.thresholds), out, version_tag
        )
        report_set.files["metrics"] = json_path

    summary_path = out / f"summary_{version_tag}.md"
    _write_text(summary_path, render_summary(inputs, version_tag))
    report_set.files["summary"] = summary_path
    return report_set
