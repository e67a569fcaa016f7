"""Backend-agnostic LLM access: prompt assembly, dispatch, result parsing.

Two backends share one calling convention: an HTTP backend speaking the
chat-completions wire shape, and an offline mock that replays canned
responses from a fixture directory. Prompt assembly is deterministic so
the mock can key fixtures off a sha256 of the exact prompt text.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from threading import Lock
from typing import Any, Callable

import requests

from .errors import (
    AuthMissingError,
    ChunkTooLargeError,
    MissingResultsRootError,
    NoJsonFoundError,
    NotFixturedError,
    RateLimitedError,
    SafereqError,
    SchemaViolationError,
    TransportError,
)

DEFAULT_SYSTEM_CONTEXT = (
    "You are a requirements analysis engine. Follow the instructions exactly "
    "and answer with a single JSON document under the root key \"results\"."
)

# ---------------------------------------------------------------------------
# Prompt envelope
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PromptResource:
    """One tagged context block included in a prompt."""

    tag: str
    body: Any  # str is used verbatim; dict/list are rendered as JSON


@dataclass(frozen=True)
class PromptEnvelope:
    """Everything that goes into one prompt, before rendering."""

    instructions: str
    resources: tuple[PromptResource, ...] = ()
    dataset_name: str = ""
    rows: tuple[tuple[str, str], ...] = ()  # (req_id, text)


@dataclass
class LlmRequestParams:
    model_id: str = "default"
    temperature: float = 0.0
    max_retries: int = 2  # total attempts = max_retries + 1
    backoff_start: float = 1.0  # seconds; doubles per retry
    timeout: float = 60.0
    system_context: str = DEFAULT_SYSTEM_CONTEXT


@dataclass
class LlmResult:
    raw_text: str
    records: list[dict] = field(default_factory=list)
    usage: dict = field(default_factory=dict)
    status: str = "ok"  # ok | empty | parse_error
    prompt_sha256: str = ""


def _tagify(name: str) -> str:
    return re.sub(r"[^0-9A-Za-z_]+", "_", name).strip("_") or "DATASET"


def _render_body(body: Any) -> str:
    if isinstance(body, str):
        return body.strip()
    return json.dumps(body, indent=2, ensure_ascii=False)


def assemble_prompt(envelope: PromptEnvelope) -> str:
    """Render an envelope to the exact prompt text.

    Layout: instructions, then each resource wrapped in its tag inside a
    RESOURCES block, then dataset rows as one JSON object per line
    ({"ReqID": ..., "Requirement": ...}) inside a tag named after the
    dataset. Pure function: equal envelopes render byte-identically.
    """
    parts = [envelope.instructions.strip()]
    if envelope.resources:
        blocks = []
        for res in envelope.resources:
            tag = _tagify(res.tag)
            blocks.append(f"<{tag}>\n{_render_body(res.body)}\n</{tag}>")
        parts.append("<RESOURCES>\n" + "\n".join(blocks) + "\n</RESOURCES>")
    if envelope.rows:
        tag = _tagify(envelope.dataset_name)
        lines = [
            json.dumps({"ReqID": req_id, "Requirement": text}, ensure_ascii=False)
            for req_id, text in envelope.rows
        ]
        parts.append(f"<{tag}>\n" + "\n".join(lines) + f"\n</{tag}>")
    return "\n\n".join(parts) + "\n"


def prompt_sha256(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Tolerant result parsing
# ---------------------------------------------------------------------------

_FENCE_RE = re.compile(r"```[a-zA-Z0-9]*\s*(.*?)```", re.DOTALL)
_RESULTS_BRACE_RE = re.compile(r"(\"results\"\s*:\s*)\{(?=\s*\{)")
_MISSING_COMMA_RE = re.compile(
    r"(\"(?:[^\"\\\n]|\\.)*\")(\s*\n\s*)(?=\"(?:[^\"\\\n]|\\.)*\"\s*:)"
)
_TRAILING_COMMA_RE = re.compile(r",(\s*[}\]])")


def _strip_fences(text: str) -> str:
    m = _FENCE_RE.search(text)
    return m.group(1) if m else text


def _repair(text: str) -> str:
    text = _RESULTS_BRACE_RE.sub(r"\1[", text)
    text = _MISSING_COMMA_RE.sub(r"\1,\2", text)
    return _TRAILING_COMMA_RE.sub(r"\1", text)


def _decode_first_json(text: str) -> Any | None:
    decoder = json.JSONDecoder()
    for i, ch in enumerate(text):
        if ch in "{[":
            try:
                value, _ = decoder.raw_decode(text, i)
                return value
            except json.JSONDecodeError:
                continue
    return None


def extract_results_root(raw: str) -> Any:
    """Locate the JSON payload in a raw response and return its results root.

    Tolerates code fences, surrounding prose, a brace where the record
    list's bracket belongs, missing commas between a string value and the
    next key, and trailing commas.

    Raises:
        NoJsonFoundError: no JSON value anywhere in the text.
        MissingResultsRootError: JSON found but no "results" key.
    """
    text = _strip_fences(raw)
    candidates = [_decode_first_json(text), _decode_first_json(_repair(text))]
    for value in candidates:
        if isinstance(value, dict) and "results" in value:
            return value["results"]
    if all(value is None for value in candidates):
        raise NoJsonFoundError("response contains no parsable JSON value")
    raise MissingResultsRootError("response JSON has no 'results' root key")


@dataclass
class RecordSchema:
    """Field requirements applied to each parsed record."""

    required: tuple[str, ...] = ()
    int_fields: tuple[str, ...] = ()


@dataclass
class ParsedRecords:
    records: list[dict]
    rejected: list[tuple[dict, str]] = field(default_factory=list)


def parse_results_json(raw: str, schema: RecordSchema | None = None) -> ParsedRecords:
    """Extract the record list under "results" with per-record validation.

    Accepts the results container as a list of records or as a map whose
    values are records (the map key is injected as ReqID when absent).
    Invalid records are collected in .rejected, never raised.
    """
    root = extract_results_root(raw)
    if isinstance(root, list):
        candidates: list[Any] = root
    elif isinstance(root, dict):
        if all(isinstance(v, dict) for v in root.values()):
            candidates = [
                {**value, **({} if "ReqID" in value else {"ReqID": key})}
                for key, value in root.items()
            ]
        else:
            raise SchemaViolationError(
                "results map values must be records (JSON objects)"
            )
    else:
        raise SchemaViolationError("results must be a list or map of records")

    parsed = ParsedRecords(records=[])
    for item in candidates:
        if not isinstance(item, dict):
            parsed.rejected.append(({"value": item}, "record is not a JSON object"))
            continue
        if schema is None:
            parsed.records.append(item)
            continue
        problem = _check_schema(item, schema)
        if problem:
            parsed.rejected.append((item, problem))
        else:
            parsed.records.append(item)
    return parsed


def _check_schema(record: dict, schema: RecordSchema) -> str | None:
    for name in schema.required:
        if name not in record or record[name] in (None, ""):
            return f"missing required field {name!r}"
    for name in schema.int_fields:
        if name in record:
            try:
                int(float(str(record[name])))
            except (TypeError, ValueError):
                return f"field {name!r} is not numeric"
    return None


def render_results(records: list[dict]) -> str:
    """Serialize records to the canonical results document (round-trips)."""
    return json.dumps({"results": records}, indent=2, ensure_ascii=False)


# ---------------------------------------------------------------------------
# Backends
# ---------------------------------------------------------------------------

_LENGTH_MARKERS = ("context_length", "maximum context", "too long", "token limit")


class MockBackend:
    """Replays canned responses from a fixture directory.

    Resolution order: fixtures/<sha256-of-prompt>.json, then rules.tsv
    (`keyword<TAB>filename`, first keyword contained in the prompt wins,
    lines starting with # are comments), else NotFixturedError.
    """

    def __init__(self, fixture_dir: str | Path):
        self.fixture_dir = Path(fixture_dir)
        self.call_count = 0
        self._lock = Lock()
        self._rules: list[tuple[str, str]] | None = None

    def _load_rules(self) -> list[tuple[str, str]]:
        if self._rules is None:
            self._rules = []
            rules_path = self.fixture_dir / "rules.tsv"
            if rules_path.exists():
                for line in rules_path.read_text(encoding="utf-8").splitlines():
                    if not line.strip() or line.lstrip().startswith("#"):
                        continue
                    keyword, sep, filename = line.partition("\t")
                    if sep:
                        self._rules.append((keyword, filename.strip()))
        return self._rules

    def complete(self, prompt: str, params: LlmRequestParams) -> tuple[str, dict]:
        with self._lock:
            self.call_count += 1
        sha = prompt_sha256(prompt)
        path = self.fixture_dir / f"{sha}.json"
        if not path.exists():
            for keyword, filename in self._load_rules():
                if keyword in prompt:
                    path = self.fixture_dir / filename
                    break
            else:
                raise NotFixturedError(sha)
        raw = path.read_text(encoding="utf-8")
        usage = {
            "prompt_tokens": len(prompt) // 4,
            "completion_tokens": len(raw) // 4,
            "total_tokens": (len(prompt) + len(raw)) // 4,
        }
        return raw, usage


class HttpBackend:
    """Talks to an OpenAI-compatible chat-completions endpoint."""

    def __init__(
        self,
        endpoint_url: str,
        api_key_file: str | Path | None = None,
        api_key_env: str = "OPENAI_API_KEY",
    ):
        self.endpoint_url = endpoint_url
        self.api_key_file = Path(api_key_file) if api_key_file else None
        self.api_key_env = api_key_env
        self.call_count = 0

    def _api_key(self) -> str:
        if self.api_key_file is not None and self.api_key_file.exists():
            key = self.api_key_file.read_text(encoding="utf-8").strip()
            if key:
                return key
        import os

        key = os.environ.get(self.api_key_env, "").strip()
        if key:
            return key
        raise AuthMissingError(
            f"no API key in file {self.api_key_file} or ${self.api_key_env}"
        )

    def complete(self, prompt: str, params: LlmRequestParams) -> tuple[str, dict]:
        self.call_count += 1
        payload = {
            "model": params.model_id,
            "temperature": params.temperature,
            "messages": [
                {"role": "system", "content": params.system_context},
                {"role": "user", "content": prompt},
            ],
        }
        headers = {
            "Authorization": f"Bearer {self._api_key()}",
            "Content-Type": "application/json",
        }
        try:
            response = requests.post(
                self.endpoint_url, json=payload, headers=headers, timeout=params.timeout
            )
        except requests.RequestException as exc:
            raise TransportError(f"request failed: {exc}") from exc

        if response.status_code == 429:
            raise RateLimitedError("backend answered 429 Too Many Requests")
        if response.status_code >= 500:
            raise TransportError(f"backend answered {response.status_code}")
        if response.status_code == 413 or (
            response.status_code == 400
            and any(marker in response.text.lower() for marker in _LENGTH_MARKERS)
        ):
            raise ChunkTooLargeError(f"backend rejected request for length: {response.text[:200]}")
        if response.status_code in (401, 403):
            raise AuthMissingError(f"backend rejected credentials ({response.status_code})")
        if response.status_code != 200:
            raise SafereqError(f"backend answered {response.status_code}: {response.text[:200]}")

        try:
            body = response.json()
            raw = body["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise SchemaViolationError(f"unexpected completion body: {exc}") from exc
        return raw, body.get("usage", {}) or {}


Backend = MockBackend | HttpBackend

_RETRYABLE = (TransportError, RateLimitedError)


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def send(
    prompt: str,
    params: LlmRequestParams,
    backend: Backend,
    sleep: Callable[[float], None] = time.sleep,
) -> LlmResult:
    """Send one prompt, retrying transport failures and rate limits.

    Retries max_retries times with exponential backoff starting at
    backoff_start seconds. Other errors (missing fixture, auth, oversized
    chunk) surface immediately. The returned result carries best-effort
    parsed records; parse failures yield status "parse_error" rather than
    an exception so the caller can decide.
    """
    attempts = params.max_retries + 1
    last: Exception | None = None
    raw, usage = "", {}
    for attempt in range(attempts):
        try:
            raw, usage = backend.complete(prompt, params)
            last = None
            break
        except _RETRYABLE as exc:
            last = exc
            if attempt + 1 < attempts:
                sleep(params.backoff_start * (2**attempt))
    if last is not None:
        if isinstance(last, RateLimitedError):
            raise RateLimitedError(f"{last} (after {attempts} attempt(s))") from last
        base = getattr(last, "base_message", str(last))
        raise TransportError(base, attempts=attempts) from last

    result = LlmResult(raw_text=raw, usage=usage, prompt_sha256=prompt_sha256(prompt))
    try:
        result.records = parse_results_json(raw).records
        result.status = "ok" if result.records else "empty"
    except (NoJsonFoundError, MissingResultsRootError, SchemaViolationError) as exc:
        result.status = "parse_error"
        result.records = []
        result.usage.setdefault("parse_error", str(exc))
    return result


def send_many(
    prompts: list[str],
    params: LlmRequestParams,
    backend: Backend,
    max_concurrency: int = 1,
    sleep: Callable[[float], None] = time.sleep,
) -> list[LlmResult]:
    """Send several prompts, preserving input order in the result list.

    max_concurrency bounds in-flight requests; the default of 1 keeps
    execution strictly sequential for reproducibility.
    """
    if max_concurrency <= 1 or len(prompts) <= 1:
        return [send(p, params, backend, sleep=sleep) for p in prompts]
    with ThreadPoolExecutor(max_workers=max_concurrency) as pool:
        futures = [pool.submit(send, p, params, backend, sleep) for p in prompts]
        return [f.result() for f in futures]
