"""Experiment records, provenance manifests and deterministic CSV output."""

from __future__ import annotations

import csv
import hashlib
import itertools
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from . import __version__

__all__ = [
    "ExperimentRecord",
    "timed",
    "format_value",
    "manifest_text",
    "manifest_hash",
    "write_csv",
]

_ids = itertools.count(1)


@dataclass
class ExperimentRecord:
    """One measured configuration. ``seconds`` is informational and never written to CSV."""

    kind: str
    parameters: dict
    outputs: dict
    seconds: float = 0.0
    version: str = __version__
    record_id: int = field(default_factory=lambda: next(_ids))


class _Clock:
    seconds = 0.0


@contextmanager
def timed():
    clock = _Clock()
    start = time.perf_counter()
    try:
        yield clock
    finally:
        clock.seconds = time.perf_counter() - start


def format_value(v) -> str:
    """Text for CSV cells: floats with 17 significant digits, None as empty."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (tuple, list)):
        return ":".join(format_value(x) for x in v)
    return str(v)


def manifest_text(params: dict) -> str:
    """Sorted ``key=value`` lines; the canonical form that gets hashed."""
    def fmt(v):
        if isinstance(v, (list, tuple)):
            return ":".join(fmt(x) for x in v)
        return repr(float(v)) if isinstance(v, (float, np.floating)) else format_value(v)

    lines = [f"{k}={fmt(params[k])}" for k in sorted(params)]
    lines.append(f"version={__version__}")
    return "\n".join(lines) + "\n"


def manifest_hash(params: dict) -> str:
    return hashlib.sha256(manifest_text(params).encode()).hexdigest()


def write_csv(
    path: Union[str, Path],
    header: Sequence[str],
    rows: Iterable[Sequence],
    comment: Optional[str] = None,
) -> None:
    with open(path, "w", newline="") as fh:
        if comment is not None:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
