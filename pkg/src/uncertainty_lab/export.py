"""Export functions for CSV, JSON and plot data."""

import csv
import io
import json
from collections.abc import Iterable, Mapping, Sequence
from enum import Enum
from typing import Any

import numpy as np

from .errors import InvalidArgumentError
from .finite import FiniteCase, build_case
from .lattice import LatticeSeq

SCHEMA_VERSION = 1


def _format_cell(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, Enum):
        return value.value
    return value


def export_csv(
    rows: Iterable[Mapping[str, Any]],
    columns: Sequence[str],
    output: io.StringIO | None = None,
) -> str:
    """Export rows to CSV with LF line endings and full float precision."""
    if output is None:
        output = io.StringIO()

    writer = csv.writer(output, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_cell(row.get(c)) for c in columns])

    return output.getvalue()


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, Enum):
        return value.value
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def export_json(kind: str, payload: Mapping[str, Any]) -> str:
    """Export a payload as {"schema": 1, "kind": kind, ...}.

    No timestamp is written, so runs with a fixed seed give identical bytes.
    """
    export_data = {"schema": SCHEMA_VERSION, "kind": kind, **payload}
    return json.dumps(export_data, indent=2, default=_json_default)


def export_plot_data(pairs: Iterable[tuple[float, float]], header: str | None = None) -> str:
    """Export (x, y) pairs as two whitespace-separated columns."""
    lines = [f"# {header}"] if header else []
    lines.extend(f"{format(float(x), '.17g')} {format(float(y), '.17g')}" for x, y in pairs)
    return "\n".join(lines) + "\n"


# -----------------------------------------------------------------------------
# Sequences and cases
# -----------------------------------------------------------------------------


def sequence_to_json(u: LatticeSeq) -> str:
    """LatticeSeq as {schema, d, N, h, re[], im[]}."""
    return json.dumps({"schema": SCHEMA_VERSION, **u.to_dict()}, indent=2)


def _load(text: str) -> dict[str, Any]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidArgumentError(f"Invalid JSON: {e}") from e
    if not isinstance(data, dict):
        raise InvalidArgumentError("Expected a JSON object")
    if data.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise InvalidArgumentError(f"Unsupported schema version {data.get('schema')}")
    return data


def sequence_from_json(text: str) -> LatticeSeq:
    """Inverse of `sequence_to_json`."""
    return LatticeSeq.from_dict(_load(text))


def case_to_json(case: FiniteCase) -> str:
    """FiniteCase descriptor {schema, variant, N, h, alpha, q_convention}."""
    return json.dumps({"schema": SCHEMA_VERSION, **case.to_dict()}, indent=2)


def case_from_json(text: str) -> FiniteCase:
    """Rebuild a FiniteCase (with its matrices) from a descriptor."""
    data = _load(text)
    try:
        return build_case(
            data["variant"],
            int(data["N"]),
            float(data.get("h", 1.0)),
            float(data.get("alpha", 1.0)),
            data.get("q_convention", "uncertainty"),
        )
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, InvalidArgumentError):
            raise
        raise InvalidArgumentError(f"Malformed case descriptor: {e}") from e
