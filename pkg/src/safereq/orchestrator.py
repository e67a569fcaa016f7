"""Config-driven task pipeline.

A pipeline config is a JSON object whose top-level keys are task names;
the keys "defaults", "llm" and "thresholds" are reserved. "defaults"
holds field values merged under every task, "llm" configures the backend
and request parameters, and "thresholds" overrides metric acceptance
thresholds. Paths inside a task resolve against its project_dir, which
itself resolves against the directory holding the config file.

Each successful task writes its primary output to
<output_path>/raw/<task>_<version tag>.json. A task with delta enabled
is skipped (zero backend calls) when that file already exists; its
artifacts are rehydrated from the file so downstream tasks and the final
report set behave exactly as on the first run. Failures leave a
.partial file beside the missing output instead.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

from .catalog import (
    FunctionCatalog,
    catalog_from_alias_map,
    catalog_from_mapping,
)
from .classify import (
    CLASSIFICATION_RESULT_SCHEMA,
    ClassifiedRequirement,
    accuracy,
    validate_records,
)
from .coverage import CoverageMatrix, build_matrix, gap_ranking
from .errors import (
    EmptyDatasetError,
    EmptyGoldError,
    InvalidConfigError,
    MissingColumnError,
    SafereqError,
    UnknownAnalysisFunctionError,
)
from .gateway import (
    Backend,
    HttpBackend,
    LlmRequestParams,
    MockBackend,
    PromptEnvelope,
    PromptResource,
    assemble_prompt,
    parse_results_json,
    send,
)
from .pairwise import (
    KIND_CONTRADICTION,
    KIND_DUPLICATE,
    PairFinding,
    PairScore,
    cluster_by_function,
    detect_contradictions,
    detect_duplicates,
    load_gold_pairs,
    score,
)
from .reporting import DEFAULT_THRESHOLDS, ReportInputs, ReportSet, emit_report_set
from .requirements import Requirement, load_requirements
from .requirements import chunk as chunk_requirements

TASK_TYPE = "GENERATIVE_ANALYSIS_TASK"
RESERVED_KEYS = ("defaults", "llm", "thresholds")

ANALYSIS_COMPLETENESS = "analyze_requirement_completeness"
ANALYSIS_COVERAGE = "analyze_coverage_gaps"
ANALYSIS_DUPLICATES = "analyze_duplicate_requirements"
ANALYSIS_CONTRADICTIONS = "analyze_contradicting_requirements"

# Coverage is computed locally; it never talks to the backend.
LOCAL_FUNCTIONS = {ANALYSIS_COVERAGE}

STATUS_SUCCEEDED = "Succeeded"
STATUS_SKIPPED = "Skipped"
STATUS_FAILED = "Failed"
STATUS_PLANNED = "Planned"  # dry runs only


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass
class TaskConfig:
    name: str
    type: str = TASK_TYPE
    run: bool = True
    delta: bool = False
    project_dir: str = "."
    readme: str = ""
    input_file: str = ""
    dataset_name: str = "Requirements"
    dataset_id_column: str = "ReqID"
    dataset_columns: list[str] = field(default_factory=list)
    result_columns: list[str] = field(default_factory=list)
    instructions: str = ""
    resources: str = ""
    output_path: str = "results"
    chunk_size: int = 10
    max_items: int = -1
    execute: bool = True
    analyze: bool = True
    analysis_function: str = ANALYSIS_COMPLETENESS
    verbose: bool = False
    extra: dict = field(default_factory=dict)


@dataclass
class PipelineConfig:
    tasks: list[TaskConfig]
    llm: dict
    thresholds: dict[str, float]
    config_dir: Path

    def task(self, name: str) -> TaskConfig:
        for task in self.tasks:
            if task.name == name:
                return task
        raise KeyError(name)


_TASK_FIELDS = {
    f.name for f in dataclasses.fields(TaskConfig) if f.name not in ("name", "extra")
}

_RESULT_GETTERS = {
    "Function": lambda r: r.function,
    "Type": lambda r: r.rtype,
    "Confidence": lambda r: r.confidence,
    "System Requirement": lambda r: r.system_requirement,
    "Function_Explanation": lambda r: r.function_explanation,
    "Type_Explanation": lambda r: r.type_explanation,
    "Flags": lambda r: "|".join(r.flags),
}


def _validate_task(t: TaskConfig) -> list[tuple[str, str, str]]:
    problems: list[tuple[str, str, str]] = []

    def need(condition: bool, field_name: str, message: str) -> None:
        if not condition:
            problems.append((t.name, field_name, message))

    def is_str_list(value) -> bool:
        return isinstance(value, list) and all(
            isinstance(item, str) and item for item in value
        )

    need(t.type == TASK_TYPE, "type", f"must be {TASK_TYPE!r}")
    for flag in ("run", "delta", "execute", "analyze", "verbose"):
        need(isinstance(getattr(t, flag), bool), flag, "must be true or false")
    need(bool(t.input_file) and isinstance(t.input_file, str), "input_file", "required")
    need(bool(t.output_path) and isinstance(t.output_path, str), "output_path", "required")
    need(
        bool(t.dataset_id_column) and isinstance(t.dataset_id_column, str),
        "dataset_id_column",
        "required",
    )
    need(
        isinstance(t.chunk_size, int)
        and not isinstance(t.chunk_size, bool)
        and t.chunk_size >= 1,
        "chunk_size",
        "must be a positive integer",
    )
    need(
        isinstance(t.max_items, int)
        and not isinstance(t.max_items, bool)
        and t.max_items >= -1,
        "max_items",
        "must be an integer >= -1 (-1 means no limit)",
    )
    need(
        t.analysis_function in BUILTIN_FUNCTIONS,
        "analysis_function",
        "unknown; expected one of " + ", ".join(sorted(BUILTIN_FUNCTIONS)),
    )
    need(is_str_list(t.result_columns), "result_columns", "must be a list of column names")

    local = t.analysis_function in LOCAL_FUNCTIONS
    if t.analysis_function == ANALYSIS_COMPLETENESS:
        need(
            is_str_list(t.dataset_columns) and bool(t.dataset_columns),
            "dataset_columns",
            "must be a non-empty list of column names",
        )
        unknown = [c for c in t.result_columns if c not in _RESULT_GETTERS]
        need(
            not unknown,
            "result_columns",
            "unknown result columns: " + ", ".join(unknown),
        )
        if t.execute is True:
            need(bool(t.instructions), "instructions", "required when execute is true")
    if local:
        need(t.execute is False, "execute", "analysis is local; must be false")
    if t.run is True and t.execute is False and t.analyze is False:
        problems.append((t.name, "analyze", "task neither executes nor analyzes"))
    return problems


def load_config(path: str | Path) -> PipelineConfig:
    """Parse and validate a pipeline config file.

    Raises:
        InvalidConfigError: carrying every (task, field, problem) found,
            not just the first.
    """
    config_path = Path(path)
    try:
        raw = json.loads(config_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InvalidConfigError([("", "config", f"file not found: {config_path}")])
    except json.JSONDecodeError as exc:
        raise InvalidConfigError([("", "config", f"not valid JSON: {exc}")])
    if not isinstance(raw, dict):
        raise InvalidConfigError([("", "config", "root must be a JSON object")])

    problems: list[tuple[str, str, str]] = []
    defaults = raw.get("defaults", {})
    if not isinstance(defaults, dict):
        problems.append(("defaults", "", "must be a JSON object"))
        defaults = {}
    llm = raw.get("llm", {})
    if not isinstance(llm, dict):
        problems.append(("llm", "", "must be a JSON object"))
        llm = {}
    thresholds_raw = raw.get("thresholds", {})
    thresholds: dict[str, float] = {}
    if not isinstance(thresholds_raw, dict):
        problems.append(("thresholds", "", "must be a JSON object"))
    else:
        for key, value in thresholds_raw.items():
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                thresholds[key] = float(value)
            else:
                problems.append(("thresholds", key, "must be a number"))

    tasks: list[TaskConfig] = []
    for name, body in raw.items():
        if name in RESERVED_KEYS:
            continue
        if not isinstance(body, dict):
            problems.append((name, "", "task must be a JSON object"))
            continue
        merged = {**defaults, **body}
        known = {k: v for k, v in merged.items() if k in _TASK_FIELDS}
        extra = {k: v for k, v in merged.items() if k not in _TASK_FIELDS}
        task = TaskConfig(name=name, extra=extra, **known)
        problems.extend(_validate_task(task))
        metric = task.extra.get("metric")
        if metric is not None and metric not in {**DEFAULT_THRESHOLDS, **thresholds}:
            problems.append((name, "metric", f"no threshold configured for {metric!r}"))
        tasks.append(task)

    if not tasks and not problems:
        problems.append(("", "config", "no tasks defined"))
    if problems:
        raise InvalidConfigError(problems)
    return PipelineConfig(
        tasks=tasks, llm=llm, thresholds=thresholds, config_dir=config_path.parent.resolve()
    )


def params_from_llm_config(llm: dict) -> LlmRequestParams:
    params = LlmRequestParams()
    for name in (
        "model_id",
        "temperature",
        "max_retries",
        "backoff_start",
        "timeout",
        "system_context",
    ):
        if name in llm:
            setattr(params, name, llm[name])
    return params


def build_backend(llm: dict, config_dir: Path, kind: str | None = None) -> Backend:
    """Construct the backend the llm config (or the override) names."""
    kind = kind or llm.get("backend", "mock")
    if kind == "mock":
        fixture_dir = config_dir / llm.get("fixture_dir", "fixtures")
        return MockBackend(fixture_dir)
    if kind == "http":
        endpoint = llm.get("endpoint_url", "")
        if not endpoint:
            raise InvalidConfigError(
                [("llm", "endpoint_url", "required for the http backend")]
            )
        key_file = llm.get("api_key_file")
        return HttpBackend(
            endpoint,
            api_key_file=config_dir / key_file if key_file else None,
            api_key_env=llm.get("api_key_env", "OPENAI_API_KEY"),
        )
    raise InvalidConfigError([("llm", "backend", f"unknown backend {kind!r}")])


# ---------------------------------------------------------------------------
# Pipeline state and results
# ---------------------------------------------------------------------------


@dataclass
class PipelineContext:
    """Artifacts shared across the tasks of one pipeline run."""

    config: PipelineConfig
    backend: Backend
    params: LlmRequestParams
    version_tag: str
    force: bool = False
    verbose: bool = False
    catalog: FunctionCatalog | None = None
    classified: list[ClassifiedRequirement] | None = None
    coverage: CoverageMatrix | None = None
    duplicates: list[PairFinding] | None = None
    contradictions: list[PairFinding] | None = None
    scores: dict[str, float] = field(default_factory=dict)


@dataclass
class TaskResult:
    name: str
    status: str
    detail: str = ""
    files: list[Path] = field(default_factory=list)
    backend_calls: int = 0


@dataclass
class RunReport:
    results: list[TaskResult]
    report_set: ReportSet | None = None

    @property
    def failed(self) -> list[TaskResult]:
        return [r for r in self.results if r.status == STATUS_FAILED]


# ---------------------------------------------------------------------------
# Path helpers
# ---------------------------------------------------------------------------


def _project_dir(cfg: PipelineConfig, task: TaskConfig) -> Path:
    return (cfg.config_dir / task.project_dir).resolve()


def _resolve(cfg: PipelineConfig, task: TaskConfig, relative: str) -> Path:
    return _project_dir(cfg, task) / relative


def _out_dir(cfg: PipelineConfig, task: TaskConfig) -> Path:
    return _resolve(cfg, task, task.output_path)


def _raw_path(cfg: PipelineConfig, task: TaskConfig, tag: str) -> Path:
    return _out_dir(cfg, task) / "raw" / f"{task.name}_{tag}.json"


def _joined_path(cfg: PipelineConfig, task: TaskConfig) -> Path:
    return _out_dir(cfg, task) / "joined" / f"{task.name}_joined.csv"


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )


def _under_some_output(cfg: PipelineConfig, path: Path) -> bool:
    return any(path.is_relative_to(_out_dir(cfg, task)) for task in cfg.tasks)


# ---------------------------------------------------------------------------
# Shared task ingredients
# ---------------------------------------------------------------------------


def _read_instructions(ctx: PipelineContext, task: TaskConfig) -> str:
    path = _resolve(ctx.config, task, task.instructions)
    if not path.exists():
        raise SafereqError(f"instructions file not found: {path}")
    return path.read_text(encoding="utf-8")


def _resources_payload(ctx: PipelineContext, task: TaskConfig) -> dict:
    if not task.resources:
        return {}
    path = _resolve(ctx.config, task, task.resources)
    if not path.exists():
        raise SafereqError(f"resources file not found: {path}")
    payload = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(payload, dict):
        raise SafereqError(f"resources file must hold a JSON object: {path}")
    return payload


def _prompt_resources(payload: dict) -> tuple[PromptResource, ...]:
    return tuple(PromptResource(tag=key, body=value) for key, value in payload.items())


def _catalog_for(ctx: PipelineContext, task: TaskConfig) -> FunctionCatalog | None:
    """Catalog from the task's ARCHITECTURE resource, if one is configured.

    Accepts the nested {system: {alias: lineage}} shape as well as the
    flat {alias: lineage} shape.
    """
    payload = _resources_payload(ctx, task)
    architecture = payload.get("ARCHITECTURE")
    if architecture is None:
        return None
    if not isinstance(architecture, dict):
        raise SafereqError("ARCHITECTURE resource must be a JSON object")
    if architecture and all(isinstance(v, str) for v in architecture.values()):
        return catalog_from_alias_map(architecture)
    return catalog_from_mapping(architecture)


def _require_catalog(ctx: PipelineContext, task: TaskConfig) -> FunctionCatalog:
    catalog = ctx.catalog or _catalog_for(ctx, task)
    if catalog is None:
        raise SafereqError(
            "no ARCHITECTURE resource configured; cannot build the function catalog"
        )
    return catalog


def _classified_from_file(path: Path, id_column: str) -> list[ClassifiedRequirement]:
    """Reload classified rows from a joined CSV written by an earlier task."""
    with open(path, encoding="utf-8-sig", newline="") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        missing = [c for c in (id_column, "Function", "Type") if c not in header]
        if missing:
            raise MissingColumnError(
                f"columns missing from {path}: " + ", ".join(missing)
            )
        rows: list[ClassifiedRequirement] = []
        for record in reader:
            req_id = (record.get(id_column) or "").strip()
            if not req_id:
                continue
            try:
                confidence = int(float(record.get("Confidence") or 0))
            except ValueError:
                confidence = 0
            rows.append(
                ClassifiedRequirement(
                    req_id=req_id,
                    function=(record.get("Function") or "").strip(),
                    rtype=(record.get("Type") or "").strip(),
                    confidence=max(0, min(100, confidence)),
                    system_requirement=(record.get("System Requirement") or "").strip(),
                    flags=tuple(
                        f for f in (record.get("Flags") or "").split("|") if f
                    ),
                )
            )
    if not rows:
        raise EmptyDatasetError(f"no classified rows in {path}")
    return rows


def _classified_for(ctx: PipelineContext, task: TaskConfig) -> list[ClassifiedRequirement]:
    """Classified rows from the pipeline context, else from input_file."""
    if ctx.classified is not None:
        return ctx.classified
    path = _resolve(ctx.config, task, task.input_file)
    if not path.exists():
        if _under_some_output(ctx.config, path):
            raise SafereqError(f"missing upstream output: {path}")
        raise SafereqError(f"input file not found: {path}")
    return _classified_from_file(path, task.dataset_id_column)


def _row_dict(row: ClassifiedRequirement) -> dict:
    return {
        "ReqID": row.req_id,
        "Function": row.function,
        "Type": row.rtype,
        "Confidence": row.confidence,
        "System Requirement": row.system_requirement,
        "Function_Explanation": row.function_explanation,
        "Type_Explanation": row.type_explanation,
        "Flags": list(row.flags),
    }


def _rows_from_raw(path: Path) -> tuple[list[ClassifiedRequirement], list[tuple[dict, str]]]:
    payload = json.loads(path.read_text(encoding="utf-8"))
    rows = [
        ClassifiedRequirement(
            req_id=str(r["ReqID"]),
            function=r["Function"],
            rtype=r["Type"],
            confidence=int(r["Confidence"]),
            system_requirement=r.get("System Requirement", ""),
            function_explanation=r.get("Function_Explanation", ""),
            type_explanation=r.get("Type_Explanation", ""),
            flags=tuple(r.get("Flags", [])),
        )
        for r in payload.get("rows", [])
    ]
    quarantined = [(rec, reason) for rec, reason in payload.get("quarantined", [])]
    return rows, quarantined


def _finding_dict(finding: PairFinding) -> dict:
    return {
        "ReqID_A": finding.req_a,
        "ReqID_B": finding.req_b,
        "Relation": finding.kind,
        "Function": finding.function,
        "Rationale": finding.rationale,
    }


def _findings_from_raw(path: Path) -> tuple[list[PairFinding], list[str]]:
    payload = json.loads(path.read_text(encoding="utf-8"))
    findings = [
        PairFinding(
            req_a=str(f["ReqID_A"]),
            req_b=str(f["ReqID_B"]),
            kind=f["Relation"],
            function=f.get("Function", ""),
            rationale=f.get("Rationale", ""),
        )
        for f in payload.get("findings", [])
    ]
    return findings, list(payload.get("notes", []))


def _score_dict(pair_score: PairScore) -> dict:
    return {
        "detected_true": pair_score.detected_true,
        "gold_total": pair_score.gold_total,
        "false_positive": pair_score.false_positive,
        "rate": pair_score.rate,
        "meets_target": pair_score.meets_target,
    }


def _load_gold_labels(path: Path) -> dict[str, tuple[str, str]]:
    gold: dict[str, tuple[str, str]] = {}
    with open(path, encoding="utf-8-sig", newline="") as handle:
        for record in csv.DictReader(handle):
            req_id = (record.get("ReqID") or "").strip()
            if req_id:
                gold[req_id] = (
                    (record.get("Function") or "").strip(),
                    (record.get("Type") or "").strip(),
                )
    if not gold:
        raise EmptyGoldError(f"no gold labels in {path}")
    return gold


def _score_classification(
    ctx: PipelineContext, task: TaskConfig, rows: list[ClassifiedRequirement]
) -> float | None:
    gold_file = task.extra.get("gold_file")
    if not gold_file:
        return None
    gold = _load_gold_labels(_resolve(ctx.config, task, gold_file))
    value = accuracy(rows, gold, include_type=bool(task.extra.get("gold_include_type", True)))
    ctx.scores[task.extra.get("metric", "classification")] = value
    return value


def _score_pairs(
    ctx: PipelineContext,
    task: TaskConfig,
    findings: list[PairFinding],
    kind: str,
    default_metric: str,
) -> PairScore | None:
    gold_file = task.extra.get("gold_file")
    if not gold_file:
        return None
    gold = load_gold_pairs(_resolve(ctx.config, task, gold_file), kind)
    metric = task.extra.get("metric", default_metric)
    threshold = {**DEFAULT_THRESHOLDS, **ctx.config.thresholds}.get(metric, 80.0)
    pair_score = score(findings, gold, threshold=threshold)
    ctx.scores[metric] = pair_score.rate
    return pair_score


# ---------------------------------------------------------------------------
# Task bodies, one per analysis function
# ---------------------------------------------------------------------------


def _task_completeness(
    ctx: PipelineContext, task: TaskConfig, raw_path: Path
) -> tuple[list[Path], str]:
    catalog = _require_catalog(ctx, task)
    input_path = _resolve(ctx.config, task, task.input_file)
    if not input_path.exists():
        raise SafereqError(f"input file not found: {input_path}")
    requirements = load_requirements(
        input_path, task.dataset_id_column, list(task.dataset_columns)
    )
    chunks = chunk_requirements(requirements, task.chunk_size, task.max_items)
    inputs = [req for piece in chunks for req in piece.rows]

    if task.execute:
        records: list[dict] = []
        rejected: list[tuple[dict, str]] = []
        instructions = _read_instructions(ctx, task)
        resources = _prompt_resources(_resources_payload(ctx, task))
        for piece in chunks:
            envelope = PromptEnvelope(
                instructions=instructions,
                resources=resources,
                dataset_name=task.dataset_name,
                rows=tuple((req.req_id, req.text) for req in piece.rows),
            )
            response = send(assemble_prompt(envelope), ctx.params, ctx.backend)
            parsed = parse_results_json(
                response.raw_text, schema=CLASSIFICATION_RESULT_SCHEMA
            )
            records.extend(parsed.records)
            rejected.extend(parsed.rejected)
        outcome = validate_records(records, inputs, catalog)
        rows = outcome.rows
        quarantined = rejected + outcome.quarantined
    elif raw_path.exists():
        rows, quarantined = _rows_from_raw(raw_path)
    else:
        raise SafereqError("execute is false and no previous raw output exists")

    files: list[Path] = []
    if quarantined:
        quarantine_path = (
            _out_dir(ctx.config, task)
            / "quarantine"
            / f"{task.name}_{ctx.version_tag}.json"
        )
        _write_json(
            quarantine_path,
            [{"record": record, "reason": reason} for record, reason in quarantined],
        )
        files.append(quarantine_path)

    gold_value = None
    if task.analyze:
        joined_path = _joined_path(ctx.config, task)
        joined_path.parent.mkdir(parents=True, exist_ok=True)
        header = [task.dataset_id_column, *task.dataset_columns, *task.result_columns]
        with open(joined_path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for req, row in zip(inputs, rows):
                writer.writerow(
                    [req.req_id]
                    + [req.extra.get(col, "") for col in task.dataset_columns]
                    + [_RESULT_GETTERS[col](row) for col in task.result_columns]
                )
        files.append(joined_path)
        ctx.catalog = catalog
        ctx.classified = rows
        gold_value = _score_classification(ctx, task, rows)

    _write_json(
        raw_path,
        {
            "task": task.name,
            "analysis_function": task.analysis_function,
            "rows": [_row_dict(row) for row in rows],
            "quarantined": [[record, reason] for record, reason in quarantined],
            "accuracy": gold_value,
        },
    )
    files.insert(0, raw_path)
    detail = f"{len(rows)} requirements classified, {len(quarantined)} quarantined"
    if gold_value is not None:
        detail += f", accuracy {gold_value:.2f}"
    return files, detail


def _task_coverage(
    ctx: PipelineContext, task: TaskConfig, raw_path: Path
) -> tuple[list[Path], str]:
    classified = _classified_for(ctx, task)
    catalog = _require_catalog(ctx, task)
    matrix = build_matrix(classified, catalog)
    gaps = gap_ranking(matrix)
    if task.analyze:
        ctx.coverage = matrix
        if ctx.catalog is None:
            ctx.catalog = catalog
    _write_json(
        raw_path,
        {
            "task": task.name,
            "analysis_function": task.analysis_function,
            "rows": [
                {
                    "Function": row.alias,
                    "Lineage": row.lineage,
                    "N_FUNC": row.n_func,
                    "N_PROB": row.n_prob,
                    "N_OTHER": row.n_other,
                    "Verdict": row.verdict,
                    "Triage": row.is_triage_bucket,
                }
                for row in matrix.rows
            ],
            "totals": list(matrix.totals),
            "gap_ranking": [
                {"Function": row.alias, "Shortfall": missing} for row, missing in gaps
            ],
        },
    )
    detail = f"{len(matrix.rows)} functions, {len(gaps)} with missing coverage"
    return [raw_path], detail


def _task_duplicates(
    ctx: PipelineContext, task: TaskConfig, raw_path: Path
) -> tuple[list[Path], str]:
    classified = _classified_for(ctx, task)
    catalog = ctx.catalog or _catalog_for(ctx, task)
    clusters = cluster_by_function(classified, catalog)
    prompt_version = str(task.extra.get("prompt_version", "V3"))

    if task.execute:
        detection = detect_duplicates(
            clusters, ctx.params, ctx.backend, prompt_version=prompt_version
        )
        findings, notes = detection.findings, detection.notes
    elif raw_path.exists():
        findings, notes = _findings_from_raw(raw_path)
    else:
        raise SafereqError("execute is false and no previous raw output exists")

    pair_score = None
    if task.analyze:
        ctx.duplicates = findings
        pair_score = _score_pairs(ctx, task, findings, KIND_DUPLICATE, "duplicates")

    _write_json(
        raw_path,
        {
            "task": task.name,
            "analysis_function": task.analysis_function,
            "prompt_version": prompt_version,
            "findings": [_finding_dict(f) for f in findings],
            "notes": notes,
            "score": _score_dict(pair_score) if pair_score else None,
        },
    )
    detail = f"{len(findings)} findings across {len(clusters)} function clusters"
    if pair_score:
        detail += f", detection rate {pair_score.rate:.2f}"
    return [raw_path], detail


def _task_contradictions(
    ctx: PipelineContext, task: TaskConfig, raw_path: Path
) -> tuple[list[Path], str]:
    classified = _classified_for(ctx, task)
    catalog = ctx.catalog or _catalog_for(ctx, task)
    clusters = cluster_by_function(classified, catalog)

    if task.execute:
        detection = detect_contradictions(
            clusters, ctx.params, ctx.backend, duplicates=ctx.duplicates or []
        )
        findings, notes = detection.findings, detection.notes
    elif raw_path.exists():
        findings, notes = _findings_from_raw(raw_path)
    else:
        raise SafereqError("execute is false and no previous raw output exists")

    pair_score = None
    if task.analyze:
        ctx.contradictions = findings
        pair_score = _score_pairs(
            ctx, task, findings, KIND_CONTRADICTION, "contradictions"
        )

    _write_json(
        raw_path,
        {
            "task": task.name,
            "analysis_function": task.analysis_function,
            "findings": [_finding_dict(f) for f in findings],
            "notes": notes,
            "score": _score_dict(pair_score) if pair_score else None,
        },
    )
    detail = f"{len(findings)} findings across {len(clusters)} function clusters"
    if pair_score:
        detail += f", detection rate {pair_score.rate:.2f}"
    return [raw_path], detail


BUILTIN_FUNCTIONS = {
    ANALYSIS_COMPLETENESS: _task_completeness,
    ANALYSIS_COVERAGE: _task_coverage,
    ANALYSIS_DUPLICATES: _task_duplicates,
    ANALYSIS_CONTRADICTIONS: _task_contradictions,
}


# ---------------------------------------------------------------------------
# Delta rehydration
# ---------------------------------------------------------------------------


def _hydrate_task(ctx: PipelineContext, task: TaskConfig, raw_path: Path) -> str:
    """Restore a skipped task's artifacts into the context from its raw file.

    Keeps downstream tasks and the final report set identical to a full
    run, without any backend calls.
    """
    func = task.analysis_function
    if func == ANALYSIS_COMPLETENESS:
        rows, _ = _rows_from_raw(raw_path)
        if task.analyze:
            ctx.catalog = ctx.catalog or _require_catalog(ctx, task)
            ctx.classified = rows
            _score_classification(ctx, task, rows)
        return f"reused {len(rows)} classified rows"
    if func == ANALYSIS_DUPLICATES:
        findings, _ = _findings_from_raw(raw_path)
        if task.analyze:
            ctx.duplicates = findings
            _score_pairs(ctx, task, findings, KIND_DUPLICATE, "duplicates")
        return f"reused {len(findings)} findings"
    if func == ANALYSIS_CONTRADICTIONS:
        findings, _ = _findings_from_raw(raw_path)
        if task.analyze:
            ctx.contradictions = findings
            _score_pairs(ctx, task, findings, KIND_CONTRADICTION, "contradictions")
        return f"reused {len(findings)} findings"
    raise UnknownAnalysisFunctionError(func)


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------


def run_task(ctx: PipelineContext, task: TaskConfig, dry_run: bool = False) -> TaskResult:
    """Run (or skip) one task and return its outcome.

    Failures never raise; they come back as a Failed result and leave a
    .partial marker beside the raw output the task did not produce.
    """
    if task.analysis_function not in BUILTIN_FUNCTIONS:
        raise UnknownAnalysisFunctionError(task.analysis_function)
    raw_path = _raw_path(ctx.config, task, ctx.version_tag)
    if not task.run:
        return TaskResult(task.name, STATUS_SKIPPED, "run is false")

    # Local analyses recompute for free; delta only guards backend work.
    delta_hit = (
        task.delta
        and not ctx.force
        and raw_path.exists()
        and task.analysis_function not in LOCAL_FUNCTIONS
        and task.execute
    )
    if dry_run:
        detail = (
            f"delta: would reuse {raw_path.name}" if delta_hit else "would execute"
        )
        return TaskResult(task.name, STATUS_PLANNED, detail)

    calls_before = getattr(ctx.backend, "call_count", 0)
    try:
        if delta_hit:
            detail = f"delta: {_hydrate_task(ctx, task, raw_path)}"
            result = TaskResult(task.name, STATUS_SKIPPED, detail)
        else:
            files, detail = BUILTIN_FUNCTIONS[task.analysis_function](
                ctx, task, raw_path
            )
            result = TaskResult(task.name, STATUS_SUCCEEDED, detail, files=files)
    except (SafereqError, ValueError, KeyError, OSError) as exc:
        partial = Path(str(raw_path) + ".partial")
        partial.parent.mkdir(parents=True, exist_ok=True)
        partial.write_text(
            json.dumps({"task": task.name, "error": str(exc)}, indent=2) + "\n",
            encoding="utf-8",
        )
        result = TaskResult(task.name, STATUS_FAILED, str(exc), files=[partial])

    result.backend_calls = getattr(ctx.backend, "call_count", 0) - calls_before
    if ctx.verbose or task.verbose:
        print(f"[{task.name}] {result.status}: {result.detail}")
    return result


def run_all(
    config_path: str | Path,
    backend: Backend | None = None,
    force: bool = False,
    version_tag: str | None = None,
    only_task: str | None = None,
    dry_run: bool = False,
    verbose: bool = False,
) -> RunReport:
    """Run every task in config order, then emit the assembled report set.

    The report set lands under <output_path>/reports of the last selected
    task and covers whatever artifacts the run produced (rehydrated
    artifacts from delta-skipped tasks included); missing parts appear
    as not run in the summary.
    """
    cfg = load_config(config_path)
    if only_task is not None and all(t.name != only_task for t in cfg.tasks):
        raise InvalidConfigError([(only_task, "task", "not defined in the config")])
    selected = [t for t in cfg.tasks if only_task in (None, t.name)]

    ctx = PipelineContext(
        config=cfg,
        backend=backend if backend is not None else build_backend(cfg.llm, cfg.config_dir),
        params=params_from_llm_config(cfg.llm),
        version_tag=version_tag or date.today().isoformat(),
        force=force,
        verbose=verbose,
    )
    results = [run_task(ctx, task, dry_run=dry_run) for task in selected]

    report_set = None
    has_artifacts = (
        ctx.classified is not None
        or ctx.coverage is not None
        or ctx.duplicates is not None
        or ctx.contradictions is not None
    )
    if not dry_run and selected and has_artifacts:
        inputs = ReportInputs(
            classified=ctx.classified,
            catalog=ctx.catalog,
            coverage=ctx.coverage,
            duplicates=ctx.duplicates,
            contradictions=ctx.contradictions,
            scores=ctx.scores or None,
            thresholds=ctx.config.thresholds or None,
        )
        reports_dir = _out_dir(cfg, selected[-1]) / "reports"
        report_set = emit_report_set(inputs, reports_dir, ctx.version_tag)
    return RunReport(results=results, report_set=report_set)
