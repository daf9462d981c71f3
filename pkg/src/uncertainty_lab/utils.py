"""Utility functions for uncertainty_lab."""

import logging
import math
import os
import re
from pathlib import Path

logger = logging.getLogger("uncertainty_lab")

# -----------------------------------------------------------------------------
# Worker Pool Constants
# -----------------------------------------------------------------------------

# Environment variable capping the sweep worker pool
THREADS_ENV_VAR = "UNCERTAINTY_LAB_THREADS"

DEFAULT_MAX_WORKERS = 4

# -----------------------------------------------------------------------------
# Parsing Constants
# -----------------------------------------------------------------------------

# Range: start:stop:count (e.g., "0:2:9")
_RANGE_PATTERN = re.compile(r"^\s*([^:]+):([^:]+):(\d+)\s*$")


def validate_output_path(
    path: str,
    allowed_extensions: list[str] | None = None,
    must_be_writable: bool = True,
) -> tuple[bool, str]:
    """Validate that an output path is safe and writable.

    Security checks:
    - Resolves to absolute path to detect traversal attempts
    - Checks parent directory exists and is writable
    - Optionally validates file extension
    - Prevents writing to sensitive system directories

    Args:
        path: Output file path to validate.
        allowed_extensions: List of allowed extensions (e.g., ['.csv', '.json']).
                          If None, any extension is allowed.
        must_be_writable: If True, verify parent directory is writable.

    Returns:
        Tuple of (is_valid, error_message). If valid, error_message is empty.
    """
    if not path:
        return False, "Output path cannot be empty"

    try:
        resolved = Path(path).resolve()

        resolved_str = str(resolved).lower()
        sensitive_prefixes = [
            "/etc/",
            "/usr/",
            "/bin/",
            "/sbin/",
            "/sys/",
            "/proc/",
            "/boot/",
            "c:\\windows\\",
            "c:\\program files\\",
        ]
        for prefix in sensitive_prefixes:
            if resolved_str.startswith(prefix):
                return False, f"Cannot write to system directory: {resolved.parent}"

        if allowed_extensions:
            ext = resolved.suffix.lower()
            if ext not in [e.lower() for e in allowed_extensions]:
                return False, (
                    f"Invalid file extension '{ext}'. "
                    f"Allowed: {', '.join(allowed_extensions)}"
                )

        parent = resolved.parent
        if not parent.exists():
            return False, f"Parent directory does not exist: {parent}"

        if must_be_writable and not os.access(parent, os.W_OK):
            return False, f"Parent directory is not writable: {parent}"

        return True, ""

    except (OSError, ValueError) as e:
        return False, f"Invalid path: {e}"


def validate_positive(name: str, value: float) -> tuple[bool, str]:
    """Validate that a parameter is a finite positive number."""
    if not math.isfinite(value) or value <= 0:
        return False, f"{name} must be a positive number, got {value}"
    return True, ""


def _split(value: str) -> list[str]:
    return [part.strip() for part in value.split(",") if part.strip()]


def parse_float_list(value: str) -> tuple[list[float] | None, str | None]:
    """Parse "0,0.25,1" into floats.

    Returns:
        Tuple of (values, error_message):
        - (list, None) on success
        - (None, error_message) on failure
    """
    parts = _split(value or "")
    if not parts:
        return None, "List cannot be empty"
    try:
        values = [float(p) for p in parts]
    except ValueError:
        return None, f"Invalid number list: {value}"
    if not all(math.isfinite(v) for v in values):
        return None, f"Numbers must be finite: {value}"
    return values, None


def parse_int_list(value: str) -> tuple[list[int] | None, str | None]:
    """Parse "8,16,32" into positive integers."""
    parts = _split(value or "")
    if not parts:
        return None, "List cannot be empty"
    try:
        values = [int(p) for p in parts]
    except ValueError:
        return None, f"Invalid integer list: {value}"
    if any(v <= 0 for v in values):
        return None, f"Integers must be positive: {value}"
    return values, None


def parse_complex_list(value: str) -> tuple[list[complex] | None, str | None]:
    """Parse "0,1+2j,-1j" into complex numbers (Python literal syntax)."""
    parts = _split(value or "")
    if not parts:
        return None, "List cannot be empty"
    try:
        values = [complex(p.replace(" ", "")) for p in parts]
    except ValueError:
        return None, f"Invalid complex list: {value}"
    if not all(math.isfinite(v.real) and math.isfinite(v.imag) for v in values):
        return None, f"Numbers must be finite: {value}"
    return values, None


def parse_range(value: str) -> tuple[list[float] | None, str | None]:
    """Parse "start:stop:count" into evenly spaced values, or a plain list."""
    match = _RANGE_PATTERN.match(value or "")
    if not match:
        return parse_float_list(value)
    try:
        start, stop = float(match.group(1)), float(match.group(2))
    except ValueError:
        return None, f"Invalid range: {value}"
    count = int(match.group(3))
    if count < 1 or not (math.isfinite(start) and math.isfinite(stop)):
        return None, f"Invalid range: {value}"
    if count == 1:
        return [start], None
    step = (stop - start) / (count - 1)
    return [start + i * step for i in range(count)], None


def get_max_workers() -> int:
    """Worker pool size from UNCERTAINTY_LAB_THREADS, else DEFAULT_MAX_WORKERS."""
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None or raw == "":
        return DEFAULT_MAX_WORKERS
    try:
        workers = int(raw)
    except ValueError:
        workers = 0
    if workers < 1:
        logger.warning(
            "Ignoring %s=%r; using %d workers", THREADS_ENV_VAR, raw, DEFAULT_MAX_WORKERS
        )
        return DEFAULT_MAX_WORKERS
    return workers
