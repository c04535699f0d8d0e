"""Deterministic CSV tables: ``#`` metadata lines, a header, 17-significant-digit rows."""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

from .. import __version__


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class CsvTable:
    header: tuple
    rows: tuple
    metadata: tuple = ()
    checks: tuple = field(default=(), compare=False)

    def __post_init__(self):
        width = len(self.header)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"row {i} has {len(row)} fields, header has {width}")

    def column(self, name: str) -> list:
        j = self.header.index(name)
        return [row[j] for row in self.rows]

    def select(self, names) -> "CsvTable":
        idx = [self.header.index(n) for n in names]
        rows = tuple(tuple(row[j] for j in idx) for row in self.rows)
        return CsvTable(tuple(names), rows, self.metadata, self.checks)

    @property
    def all_checks_pass(self) -> bool:
        return all(c.passed for c in self.checks)


def format_value(x) -> str:
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def render(table: CsvTable) -> str:
    lines = [f"# tool: nonideal_tpm {__version__}"]
    lines += [f"# {k}: {v}" for k, v in table.metadata]
    lines.append(",".join(table.header))
    lines += [",".join(format_value(x) for x in row) for row in table.rows]
    return "\n".join(lines) + "\n"


def write_csv(table: CsvTable, path) -> Path:
    """Write atomically: render to a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(render(table))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def read_csv(path) -> CsvTable:
    meta = []
    header = None
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(": ")
            meta.append((key, value))
        elif header is None:
            header = tuple(line.split(","))
        elif line:
            rows.append(tuple(float(x) for x in line.split(",")))
    return CsvTable(header or (), tuple(rows), tuple(m for m in meta if m[0] != "tool"))
