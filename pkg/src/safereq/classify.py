"""Requirement classification against a function catalog.

Each requirement is assigned a function alias from the catalog and a
safety type (FUNC, PROB, or the _OT_ placeholder), with a confidence
score and explanations. Validation guarantees join totality: every input
requirement appears exactly once in the output, whatever the backend
returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .catalog import CATCH_ALL_ALIAS, FunctionCatalog
from .errors import MismatchedIdSetsError
from .gateway import (
    Backend,
    LlmRequestParams,
    PromptEnvelope,
    PromptResource,
    RecordSchema,
    assemble_prompt,
    parse_results_json,
    send,
)
from .requirements import Requirement, RequirementChunk
from .rounding import percentage

OTHER_TYPE = "_OT_"
TYPE_VALUES = ("FUNC", "PROB", OTHER_TYPE)

FLAG_REMAPPED = "RemappedToOF"
FLAG_UNRETURNED = "Unreturned"
FLAG_LOW_CONFIDENCE = "LowConfidence"

LOW_CONFIDENCE_THRESHOLD = 80

SAFETY_TYPE_DEFINITIONS = {
    "FUNC": (
        "Functional safety requirement: mandates a safety behavior, "
        "capability, interlock, or constraint the system shall implement."
    ),
    "PROB": (
        "Probabilistic safety requirement: bounds a failure rate, "
        "probability, availability, or quantitative reliability target."
    ),
    OTHER_TYPE: (
        "Other type: the requirement fits neither definition with at "
        "least 80% confidence."
    ),
}

CLASSIFICATION_RESULT_SCHEMA = RecordSchema(
    required=("ReqID",), int_fields=("Confidence",)
)


@dataclass
class ClassifiedRequirement:
    req_id: str
    function: str  # catalog alias, _OF_ when unknown
    rtype: str  # FUNC | PROB | _OT_
    confidence: int  # 0..100
    system_requirement: str = ""
    function_explanation: str = ""
    type_explanation: str = ""
    flags: tuple[str, ...] = ()


@dataclass
class ClassifyOutcome:
    rows: list[ClassifiedRequirement]
    quarantined: list[tuple[dict, str]] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Prompt construction
# ---------------------------------------------------------------------------


def build_classification_prompt(
    chunk: RequirementChunk,
    catalog: FunctionCatalog,
    instructions_text: str,
    dataset_name: str = "Requirements",
) -> PromptEnvelope:
    """Envelope with the catalog and type definitions as tagged resources."""
    return PromptEnvelope(
        instructions=instructions_text,
        resources=(
            PromptResource(tag="ARCHITECTURE", body=catalog.alias_map()),
            PromptResource(tag="safety_function_type", body=SAFETY_TYPE_DEFINITIONS),
        ),
        dataset_name=dataset_name,
        rows=tuple((req.req_id, req.text) for req in chunk.rows),
    )


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate_records(
    records: list[dict],
    inputs: list[Requirement],
    catalog: FunctionCatalog,
) -> ClassifyOutcome:
    """Turn raw result records into one validated row per input requirement.

    Aliases outside the catalog are remapped to _OF_ (flag RemappedToOF);
    ids the backend never returned get placeholder rows (flag Unreturned,
    function _OF_, type _OT_); records with unknown or repeated ids are
    quarantined; confidence below the threshold flags LowConfidence.
    """
    known = {req.req_id: req for req in inputs}
    returned: dict[str, dict] = {}
    quarantined: list[tuple[dict, str]] = []

    for record in records:
        rid = str(record.get("ReqID", "")).strip()
        if rid not in known:
            quarantined.append((record, f"unknown ReqID {rid!r}"))
        elif rid in returned:
            quarantined.append((record, f"repeated ReqID {rid!r}; first record kept"))
        else:
            returned[rid] = record

    rows: list[ClassifiedRequirement] = []
    for req in inputs:
        record = returned.get(req.req_id)
        if record is None:
            rows.append(
                ClassifiedRequirement(
                    req_id=req.req_id,
                    function=CATCH_ALL_ALIAS,
                    rtype=OTHER_TYPE,
                    confidence=0,
                    system_requirement=req.text,
                    function_explanation="not returned by the backend",
                    type_explanation="not returned by the backend",
                    flags=(FLAG_LOW_CONFIDENCE, FLAG_UNRETURNED),
                )
            )
            continue

        flags: list[str] = []
        function = str(record.get("Function", "")).strip()
        if not catalog.has_alias(function):
            function = CATCH_ALL_ALIAS
            flags.append(FLAG_REMAPPED)

        rtype = str(record.get("Type", "")).strip().upper()
        if rtype not in TYPE_VALUES:
            rtype = OTHER_TYPE

        try:
            confidence = int(float(str(record.get("Confidence", 0))))
        except (TypeError, ValueError):
            confidence = 0
        confidence = max(0, min(100, confidence))
        if confidence < LOW_CONFIDENCE_THRESHOLD:
            flags.append(FLAG_LOW_CONFIDENCE)

        rows.append(
            ClassifiedRequirement(
                req_id=req.req_id,
                function=function,
                rtype=rtype,
                confidence=confidence,
                system_requirement=str(
                    record.get("System_Requirement", record.get("System Requirement", ""))
                ).strip(),
                function_explanation=str(record.get("Function_Explanation", "")).strip(),
                type_explanation=str(record.get("Type_Explanation", "")).strip(),
                flags=tuple(sorted(flags)),
            )
        )
    return ClassifyOutcome(rows=rows, quarantined=quarantined)


# ---------------------------------------------------------------------------
# End-to-end classification
# ---------------------------------------------------------------------------


def classify(
    chunks: list[RequirementChunk],
    catalog: FunctionCatalog,
    params: LlmRequestParams,
    backend: Backend,
    instructions_text: str,
    dataset_name: str = "Requirements",
) -> ClassifyOutcome:
    """Classify every chunk through the backend and validate the union."""
    records: list[dict] = []
    quarantined: list[tuple[dict, str]] = []
    for chunk in chunks:
        envelope = build_classification_prompt(
            chunk, catalog, instructions_text, dataset_name=dataset_name
        )
        result = send(assemble_prompt(envelope), params, backend)
        parsed = parse_results_json(result.raw_text, schema=CLASSIFICATION_RESULT_SCHEMA)
        records.extend(parsed.records)
        quarantined.extend(parsed.rejected)

    inputs = [req for chunk in chunks for req in chunk.rows]
    outcome = validate_records(records, inputs, catalog)
    outcome.quarantined = quarantined + outcome.quarantined
    return outcome


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def _label(row: ClassifiedRequirement, strict: bool) -> tuple[str, ...]:
    return (row.function, row.rtype) if strict else (row.function,)


def consistency(
    runs: list[list[ClassifiedRequirement]],
    reference: list[ClassifiedRequirement] | None = None,
    strict: bool = False,
) -> float:
    """Percentage of requirements labeled identically across runs.

    Compares function labels (and types too when strict) either mutually
    across all runs or against a reference labeling when one is given.
    Rounded half-up to 2 decimals.

    Raises:
        MismatchedIdSetsError: the runs do not cover the same ids.
        ValueError: fewer than two labelings to compare.
    """
    tables = list(runs) + ([reference] if reference is not None else [])
    if len(tables) < 2:
        raise ValueError("consistency needs two runs, or one run and a reference")
    maps = [{row.req_id: _label(row, strict) for row in table} for table in tables]
    ids = set(maps[0])
    for m in maps[1:]:
        if set(m) != ids:
            raise MismatchedIdSetsError(
                "runs cover different requirement ids; cannot compare"
            )
    if not ids:
        raise MismatchedIdSetsError("no requirements to compare")
    matches = sum(
        1 for rid in ids if all(m[rid] == maps[0][rid] for m in maps[1:])
    )
    return percentage(matches, len(ids))


def accuracy(
    rows: list[ClassifiedRequirement],
    gold: dict[str, tuple[str, str]],
    include_type: bool = True,
) -> float:
    """Percentage of rows matching a gold (function, type) labeling."""
    if not gold:
        raise ValueError("gold labeling is empty")
    ids = {row.req_id for row in rows}
    if set(gold) != ids:
        raise MismatchedIdSetsError("gold labeling covers different ids than the rows")
    matches = 0
    for row in rows:
        want_func, want_type = gold[row.req_id]
        ok = row.function == want_func and (not include_type or row.rtype == want_type)
        matches += 1 if ok else 0
    return percentage(matches, len(rows))
