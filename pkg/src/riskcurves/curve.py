"""Curve records, CSV serialisation and run manifests.

Output files are plain CSV with a ``#``-prefixed metadata header so every
table stays diffable and loadable by any plotting tool.  Numbers are
formatted with ``%.12g`` and lines end with ``\\n`` regardless of platform,
which is what makes byte-identical reruns possible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["Curve", "RunManifest", "write_csv", "format_number"]


def format_number(x: float) -> str:
    return f"{x:.12g}"


def write_csv(
    path: str | Path,
    columns: list[tuple[str, np.ndarray]],
    metadata: dict[str, str] | None = None,
) -> None:
    """Write named columns as CSV with a commented metadata header."""
    names = [name for name, _ in columns]
    arrays = [np.asarray(values, dtype=float) for _, values in columns]
    n = arrays[0].size
    if any(arr.size != n for arr in arrays):
        raise ValueError("all columns must have the same length")
    lines = []
    for key, value in (metadata or {}).items():
        lines.append(f"# {key}: {value}")
    lines.append(",".join(names))
    for i in range(n):
        lines.append(",".join(format_number(arr[i]) for arr in arrays))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


@dataclass
class Curve:
    """An ordered (x, y) table plus the metadata needed to reproduce it."""

    x: np.ndarray
    y: np.ndarray
    x_label: str
    y_label: str
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.size != self.y.size:
            raise ValueError("x and y must have the same length")
        if np.any(np.diff(self.x) <= 0):
            raise ValueError("curve abscissae must be strictly increasing")
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))):
            raise ValueError("curve points must be finite")

    def to_csv(self, path: str | Path) -> None:
        write_csv(path, [(self.x_label, self.x), (self.y_label, self.y)], self.metadata)


@dataclass
class RunManifest:
    """Everything needed to re-run a command bit-identically.

    ``duration_s`` is the only field expected to differ between reruns.
    """

    command_line: str
    parameters: dict
    seed: int | None
    duration_s: float
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        payload = {
            "command_line": self.command_line,
            "parameters": self.parameters,
            "seed": self.seed,
            "duration_s": self.duration_s,
            "warnings": self.warnings,
        }
        return json.dumps(payload, sort_keys=True, indent=2)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8", newline="\n")
