"""Run records, their CSV schema, and the bundled reference tables.

The CSV schema is the harness-wide contract: header exactly
``run,vehicles_passed,wait_time_s``, one row per run ordered by seed,
decimal points regardless of locale. ``wait_time_s`` is the cumulative
wait summed over every spawned vehicle.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

CSV_HEADER = ("run", "vehicles_passed", "wait_time_s")


@dataclass(frozen=True)
class RunRecord:
    controller: str
    seed: int | None
    vehicles_passed: int
    total_wait: float
    mean_wait: float
    spawned: int

    def to_json(self) -> str:
        """Deterministic JSON payload; wall-clock timing is deliberately
        excluded so identical runs serialise byte-identically."""
        return json.dumps(asdict(self), indent=2)


class CsvFormatError(ValueError):
    """Raised for malformed run CSVs, with the offending line number."""


def write_runs_csv(path: Path | str, records: Sequence[RunRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for i, record in enumerate(records, start=1):
            writer.writerow([i, record.vehicles_passed, f"{record.total_wait:.2f}"])


def read_runs_csv(path: Path | str, controller: str = "unknown") -> list[RunRecord]:
    """Parse a runs CSV; unknown columns are ignored with a warning."""
    records: list[RunRecord] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        missing = [col for col in CSV_HEADER if col not in header]
        if missing:
            raise CsvFormatError(f"{path}: line 1: missing columns {missing}")
        extra = [col for col in header if col not in CSV_HEADER]
        if extra:
            warnings.warn(f"{path}: ignoring unknown columns {extra}", stacklevel=2)
        idx = {col: header.index(col) for col in CSV_HEADER}
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                vehicles = int(float(row[idx["vehicles_passed"]]))
                wait = float(row[idx["wait_time_s"]])
            except (ValueError, IndexError) as exc:
                raise CsvFormatError(f"{path}: line {line_no}: {exc}") from None
            records.append(
                RunRecord(
                    controller=controller,
                    seed=None,
                    vehicles_passed=vehicles,
                    total_wait=wait,
                    mean_wait=0.0,
                    spawned=0,
                )
            )
    return records


def fixture_path(name: str) -> Path:
    """Path of a bundled reference CSV (``fixed_runs.csv`` or ``marl_runs.csv``)."""
    return Path(str(resources.files("signalsim").joinpath("data", name)))


def load_fixture_runs(kind: str) -> list[RunRecord]:
    """The bundled 20-run reference tables for one controller kind."""
    if kind not in ("fixed", "marl"):
        raise ValueError(f"kind must be 'fixed' or 'marl', got {kind!r}")
    return read_runs_csv(fixture_path(f"{kind}_runs.csv"), controller=kind)


def trace_line(payload: dict) -> str:
    """One JSONL trace line (schema fixed by the harness)."""
    return json.dumps(payload, separators=(",", ":"))


def iter_trace(path: Path | str) -> Iterable[dict]:
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)
