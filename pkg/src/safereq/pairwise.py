"""Pairwise requirement analysis: duplicates, contradictions, scoring.

Requirements are grouped by classified function and each group is
submitted to the backend in one call. Finding kinds are mutually
exclusive per pair. Contradiction detection runs over a duplicate-free
consolidated list so duplicate groups are argued once.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

from .catalog import CATCH_ALL_ALIAS, FunctionCatalog
from .classify import ClassifiedRequirement
from .errors import (
    AliasClosureViolationError,
    EmptyGoldError,
    FindingConflictError,
)
from .gateway import (
    Backend,
    LlmRequestParams,
    PromptEnvelope,
    RecordSchema,
    assemble_prompt,
    parse_results_json,
    send,
)
from .rounding import percentage

KIND_DUPLICATE = "Duplicate"
KIND_COMPLEMENTARY = "Complementary"
KIND_REFINEMENT = "Refinement"
KIND_CONTRADICTION = "Contradiction"
FINDING_KINDS = (KIND_DUPLICATE, KIND_COMPLEMENTARY, KIND_REFINEMENT, KIND_CONTRADICTION)

_RESULT_SHAPE_NOTE = (
    'Answer with a single JSON document of the form {"results": [{"ReqID_A": "...", '
    '"ReqID_B": "...", "Relation": "...", "Rationale": "..."}, ...]} and nothing else. '
    'Use an empty list when there is nothing to report.'
)

DUPLICATE_PROMPTS = {
    "V1": (
        "For all the requirements in the list, mark the duplicate requirements.\n"
        'Set "Relation" to "Duplicate" for each duplicate pair.\n' + _RESULT_SHAPE_NOTE
    ),
    "V2": (
        "For all the requirements in the list, mark the duplicate requirements.\n"
        "If two requirements are similar but refer to two different functions it is "
        "not considered duplicate.\n"
        'Set "Relation" to "Duplicate" for each duplicate pair.\n' + _RESULT_SHAPE_NOTE
    ),
    "V3": (
        "For all the requirements in the list, mark the duplicate requirements.\n"
        "If two requirements are similar and refer to the same function it means that "
        "they are duplicate.\n"
        "If two requirements are similar but refer to two different functions it means "
        "that they are complementary.\n"
        'If one of the requirements refers to the function "_OF_" (Other Function), it '
        "could mean that the requirement refers to a system-level functionality or to "
        "each one of the functions; in that case the specific function's requirement "
        "might be a refinement of the top-level requirement.\n"
        'Set "Relation" to "Duplicate", "Complementary", or "Refinement" accordingly.\n'
        + _RESULT_SHAPE_NOTE
    ),
}

CONTRADICTION_PROMPT = (
    "For all the requirements in the list, mark the contradicting requirements.\n"
    'Set "Relation" to "Contradiction" for each contradicting pair.\n'
    + _RESULT_SHAPE_NOTE
)

_PAIR_SCHEMA = RecordSchema(required=("ReqID_A", "ReqID_B"))


@dataclass(frozen=True)
class PairFinding:
    """One finding about a requirement pair, canonically ordered."""

    req_a: str
    req_b: str
    kind: str
    function: str = ""
    rationale: str = ""

    def __post_init__(self):
        if self.req_b < self.req_a:
            a, b = self.req_a, self.req_b
            object.__setattr__(self, "req_a", b)
            object.__setattr__(self, "req_b", a)

    @property
    def pair(self) -> tuple[str, str]:
        return (self.req_a, self.req_b)


@dataclass
class GoldPairs:
    kind: str
    pairs: frozenset[tuple[str, str]]


@dataclass
class PairScore:
    detected_true: int
    gold_total: int
    false_positive: int
    rate: float
    meets_target: bool


@dataclass
class DetectionResult:
    findings: list[PairFinding]
    notes: list[str] = field(default_factory=list)
    rejected: list[tuple[dict, str]] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Clustering
# ---------------------------------------------------------------------------


def cluster_by_function(
    classified: list[ClassifiedRequirement],
    catalog: FunctionCatalog | None = None,
) -> dict[str, list[ClassifiedRequirement]]:
    """Group rows by function alias; catalog order, then req_id order.

    Every requirement lands in exactly one cluster. Empty clusters are
    omitted. Without a catalog, clusters keep first-seen alias order.
    """
    grouped: dict[str, list[ClassifiedRequirement]] = {}
    for row in classified:
        if catalog is not None and not catalog.has_alias(row.function):
            raise AliasClosureViolationError(
                f"requirement {row.req_id} names unknown alias {row.function!r}"
            )
        grouped.setdefault(row.function, []).append(row)

    order = catalog.aliases if catalog is not None else list(grouped)
    clusters: dict[str, list[ClassifiedRequirement]] = {}
    for alias in order:
        if alias in grouped:
            clusters[alias] = sorted(grouped[alias], key=lambda r: r.req_id)
    return clusters


def _row_text(row: ClassifiedRequirement) -> str:
    return f"[Function: {row.function}] {row.system_requirement}"


def _pair_envelope(
    instructions: str, alias: str, rows: list[ClassifiedRequirement]
) -> PromptEnvelope:
    return PromptEnvelope(
        instructions=instructions,
        dataset_name=f"{alias} Requirements",
        rows=tuple((row.req_id, _row_text(row)) for row in rows),
    )


# ---------------------------------------------------------------------------
# Duplicate detection
# ---------------------------------------------------------------------------


def detect_duplicates(
    clusters: dict[str, list[ClassifiedRequirement]],
    params: LlmRequestParams,
    backend: Backend,
    prompt_version: str = "V3",
) -> DetectionResult:
    """Submit each function cluster and collect duplicate-family findings.

    V1 sends the bare instruction; V2 adds the different-functions rule;
    V3 adds the complementary and _OF_ refinement rules and co-submits
    the _OF_ cluster with every function cluster. The validator
    canonicalizes pairs, drops unknown ids, de-duplicates, downgrades
    cross-function duplicates to complementary under V2/V3, and raises
    FindingConflictError when one pair carries two kinds.
    """
    if prompt_version not in DUPLICATE_PROMPTS:
        raise ValueError(f"unknown prompt version {prompt_version!r}")
    instructions = DUPLICATE_PROMPTS[prompt_version]
    allowed = (
        {KIND_DUPLICATE, KIND_COMPLEMENTARY, KIND_REFINEMENT}
        if prompt_version == "V3"
        else {KIND_DUPLICATE}
    )

    function_of = {
        row.req_id: alias for alias, rows in clusters.items() for row in rows
    }
    of_rows = clusters.get(CATCH_ALL_ALIAS, []) if prompt_version == "V3" else []

    result = DetectionResult(findings=[])
    seen: dict[tuple[str, str], str] = {}
    conflicts: list[tuple[str, str]] = []

    for alias, rows in clusters.items():
        if prompt_version == "V3" and alias == CATCH_ALL_ALIAS:
            continue  # rides along with every function cluster instead
        submitted = rows + [r for r in of_rows if r not in rows]
        if len(submitted) < 2:
            continue
        envelope = _pair_envelope(instructions, alias, submitted)
        response = send(assemble_prompt(envelope), params, backend)
        parsed = parse_results_json(response.raw_text, schema=_PAIR_SCHEMA)
        result.rejected.extend(parsed.rejected)
        submitted_ids = {row.req_id for row in submitted}

        for record in parsed.records:
            finding = _record_to_finding(
                record, submitted_ids, allowed, alias, result.notes
            )
            if finding is None:
                continue
            if prompt_version in ("V2", "V3") and finding.kind == KIND_DUPLICATE:
                fa = function_of.get(finding.req_a, "")
                fb = function_of.get(finding.req_b, "")
                if fa != fb:
                    result.notes.append(
                        f"downgraded cross-function duplicate ({finding.req_a}, "
                        f"{finding.req_b}): {fa} vs {fb}"
                    )
                    finding = PairFinding(
                        req_a=finding.req_a,
                        req_b=finding.req_b,
                        kind=KIND_COMPLEMENTARY,
                        function=finding.function,
                        rationale=finding.rationale,
                    )
            previous = seen.get(finding.pair)
            if previous is None:
                seen[finding.pair] = finding.kind
                result.findings.append(finding)
            elif previous != finding.kind:
                conflicts.append(finding.pair)

    if conflicts:
        raise FindingConflictError(sorted(set(conflicts)))
    return result


def _record_to_finding(
    record: dict,
    submitted_ids: set[str],
    allowed: set[str],
    alias: str,
    notes: list[str],
) -> PairFinding | None:
    a = str(record.get("ReqID_A", "")).strip()
    b = str(record.get("ReqID_B", "")).strip()
    kind = str(record.get("Relation", KIND_DUPLICATE)).strip().title() or KIND_DUPLICATE
    if a == b or a not in submitted_ids or b not in submitted_ids:
        notes.append(f"dropped finding with unknown or degenerate pair ({a!r}, {b!r})")
        return None
    if kind not in allowed:
        notes.append(f"dropped finding ({a}, {b}) with disallowed relation {kind!r}")
        return None
    return PairFinding(
        req_a=a,
        req_b=b,
        kind=kind,
        function=alias,
        rationale=str(record.get("Rationale", "")).strip(),
    )


# ---------------------------------------------------------------------------
# Contradiction detection
# ---------------------------------------------------------------------------


def consolidate(
    clusters: dict[str, list[ClassifiedRequirement]],
    duplicates: list[PairFinding],
) -> dict[str, list[ClassifiedRequirement]]:
    """Drop all but one representative per duplicate group.

    Union-find over Duplicate findings; the lexicographically smallest
    req_id represents each group.
    """
    parent: dict[str, str] = {}

    def find(x: str) -> str:
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for finding in duplicates:
        if finding.kind != KIND_DUPLICATE:
            continue
        ra, rb = find(finding.req_a), find(finding.req_b)
        if ra != rb:
            keep, drop = min(ra, rb), max(ra, rb)
            parent[drop] = keep

    survivors: dict[str, list[ClassifiedRequirement]] = {}
    for alias, rows in clusters.items():
        kept = [row for row in rows if find(row.req_id) == row.req_id]
        if kept:
            survivors[alias] = kept
    return survivors


def detect_contradictions(
    clusters: dict[str, list[ClassifiedRequirement]],
    params: LlmRequestParams,
    backend: Backend,
    duplicates: list[PairFinding] = (),
) -> DetectionResult:
    """Find contradicting pairs within each function's consolidated list."""
    consolidated = consolidate(clusters, list(duplicates))
    result = DetectionResult(findings=[])
    seen: set[tuple[str, str]] = set()

    for alias, rows in consolidated.items():
        if len(rows) < 2:
            continue
        envelope = _pair_envelope(CONTRADICTION_PROMPT, alias, rows)
        response = send(assemble_prompt(envelope), params, backend)
        parsed = parse_results_json(response.raw_text, schema=_PAIR_SCHEMA)
        result.rejected.extend(parsed.rejected)
        submitted_ids = {row.req_id for row in rows}
        for record in parsed.records:
            finding = _record_to_finding(
                record, submitted_ids, {KIND_CONTRADICTION}, alias, result.notes
            )
            if finding is None or finding.pair in seen:
                continue
            seen.add(finding.pair)
            result.findings.append(finding)
    return result


# ---------------------------------------------------------------------------
# Merging and scoring
# ---------------------------------------------------------------------------


def merge_findings(*finding_lists: list[PairFinding]) -> list[PairFinding]:
    """Merge findings, enforcing one kind per pair.

    Raises:
        FindingConflictError: some pair appears with two different kinds.
    """
    kind_of: dict[tuple[str, str], str] = {}
    merged: list[PairFinding] = []
    conflicts: list[tuple[str, str]] = []
    for findings in finding_lists:
        for finding in findings:
            previous = kind_of.get(finding.pair)
            if previous is None:
                kind_of[finding.pair] = finding.kind
                merged.append(finding)
            elif previous != finding.kind:
                conflicts.append(finding.pair)
    if conflicts:
        raise FindingConflictError(sorted(set(conflicts)))
    return sorted(merged, key=lambda f: (f.req_a, f.req_b, f.kind))


def load_gold_pairs(path: str | Path, kind: str) -> GoldPairs:
    """Load a two-column CSV (req_a, req_b) of gold pairs for one kind."""
    pairs: set[tuple[str, str]] = set()
    with open(path, encoding="utf-8-sig", newline="") as handle:
        for row in csv.DictReader(handle):
            a = (row.get("req_a") or "").strip()
            b = (row.get("req_b") or "").strip()
            if a and b:
                pairs.add((min(a, b), max(a, b)))
    if not pairs:
        raise EmptyGoldError(f"no gold pairs in {path}")
    return GoldPairs(kind=kind, pairs=frozenset(pairs))


def score(
    findings: list[PairFinding], gold: GoldPairs, threshold: float = 80.0
) -> PairScore:
    """Detection rate of findings of the gold kind against the gold pairs.

    rate = 100 * detected_true / gold_total, rounded half-up to 2
    decimals; meets_target uses a strictly-greater comparison.
    """
    if not gold.pairs:
        raise EmptyGoldError("gold pair set is empty")
    relevant = {f.pair for f in findings if f.kind == gold.kind}
    detected_true = len(relevant & gold.pairs)
    rate = percentage(detected_true, len(gold.pairs))
    return PairScore(
        detected_true=detected_true,
        gold_total=len(gold.pairs),
        false_positive=len(relevant - gold.pairs),
        rate=rate,
        meets_target=rate > threshold,
    )
