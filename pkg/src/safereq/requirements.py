"""CSV-backed requirement datasets and prompt-sized chunking."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    DuplicateReqIdError,
    EmptyDatasetError,
    EmptyRequirementTextError,
    InvalidChunkSizeError,
    MissingColumnError,
)


@dataclass
class Requirement:
    """One stakeholder requirement row."""

    req_id: str
    text: str
    extra: dict[str, str] = field(default_factory=dict)


@dataclass
class RequirementChunk:
    index: int
    rows: tuple[Requirement, ...]


def load_requirements(
    path: str | Path, id_column: str, data_columns: list[str]
) -> list[Requirement]:
    """Load one Requirement per data row from an RFC-4180 CSV file.

    A single data column becomes the text verbatim; several are joined as
    "column: value" lines, which is also how prompts will render them.
    Row order is preserved. A UTF-8 BOM and quoted embedded newlines are
    tolerated.

    Raises:
        MissingColumnError: id or data column absent from the header.
        DuplicateReqIdError: the same id on two rows (both rows named).
        EmptyRequirementTextError: rows whose data columns are all blank.
        EmptyDatasetError: a header but no data rows.
    """
    with open(path, encoding="utf-8-sig", newline="") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        missing = [c for c in [id_column, *data_columns] if c not in header]
        if missing:
            raise MissingColumnError(
                f"columns missing from {path}: " + ", ".join(missing)
            )

        rows: list[Requirement] = []
        first_row_of: dict[str, int] = {}
        blank_rows: list[int] = []
        for row in reader:
            line = reader.line_num
            req_id = (row.get(id_column) or "").strip()
            if req_id in first_row_of:
                raise DuplicateReqIdError(req_id, first_row_of[req_id], line)
            first_row_of[req_id] = line

            values = [(col, (row.get(col) or "").strip()) for col in data_columns]
            if not any(v for _, v in values):
                blank_rows.append(line)
                continue
            if len(values) == 1:
                text = values[0][1]
            else:
                text = "\n".join(f"{col}: {v}" for col, v in values)
            extra = {col: (row.get(col) or "").strip() for col in header if col != id_column}
            rows.append(Requirement(req_id=req_id, text=text, extra=extra))

    if blank_rows:
        raise EmptyRequirementTextError(blank_rows)
    if not rows:
        raise EmptyDatasetError(f"no data rows in {path}")
    return rows


def chunk(
    requirements: list[Requirement], chunk_size: int, max_items: int = -1
) -> list[RequirementChunk]:
    """Split requirements into order-preserving chunks of chunk_size.

    max_items truncates the input first; -1 means no limit. The final
    chunk may be short. Concatenating all chunks reproduces the
    (truncated) input exactly.
    """
    if not isinstance(chunk_size, int) or isinstance(chunk_size, bool) or chunk_size < 1:
        raise InvalidChunkSizeError(f"chunk_size must be a positive integer, got {chunk_size!r}")
    if not isinstance(max_items, int) or isinstance(max_items, bool) or max_items < -1:
        raise InvalidChunkSizeError(f"max_items must be -1 or >= 0, got {max_items!r}")
    selected = requirements if max_items == -1 else requirements[:max_items]
    return [
        RequirementChunk(index=i, rows=tuple(selected[start : start + chunk_size]))
        for i, start in enumerate(range(0, len(selected), chunk_size))
    ]
