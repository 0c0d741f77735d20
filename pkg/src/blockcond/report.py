"""Audit report assembly, JSON schema validation and CSV summaries.

Every pass/fail row cites the module-level invariant it instantiates, and
every randomized step records the rng seed it ran from, so a report is
reproducible byte-for-byte from its own config echo (timestamps aside).
"""

from __future__ import annotations

import csv
import json
import time
from typing import Any

import jsonschema

from . import __version__

SCHEMA_VERSION = 1

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "command", "config", "checks", "library_version"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"type": "string"},
        "config": {"type": "object"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "invariant", "passed"],
                "properties": {
                    "name": {"type": "string"},
                    "invariant": {"type": "string"},
                    "passed": {"type": "boolean"},
                    "value": {},
                },
            },
        },
        "results": {"type": "object"},
        "wall_clock_seconds": {"type": "number"},
        "timestamp": {"type": "string"},
        "library_version": {"type": "string"},
    },
}


class Report:
    def __init__(self, command: str, config: dict[str, Any]):
        self.command = command
        self.config = config
        self.checks: list[dict[str, Any]] = []
        self.results: dict[str, Any] = {}
        self._start = time.monotonic()

    def check(self, name: str, invariant: str, passed: bool, value: Any = None) -> bool:
        row: dict[str, Any] = {"name": name, "invariant": invariant, "passed": bool(passed)}
        if value is not None:
            row["value"] = value
        self.checks.append(row)
        return bool(passed)

    @property
    def all_passed(self) -> bool:
        return all(row["passed"] for row in self.checks)

    def to_json(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config": self.config,
            "checks": self.checks,
            "results": self.results,
            "wall_clock_seconds": round(time.monotonic() - self._start, 6),
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "library_version": __version__,
        }

    def dumps(self) -> str:
        obj = self.to_json()
        validate_report(obj)
        return json.dumps(obj, sort_keys=True, indent=2, default=_coerce)

    def write(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps() + "\n")

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["check", "invariant", "passed", "value"])
            for row in self.checks:
                writer.writerow([row["name"], row["invariant"], row["passed"],
                                 row.get("value", "")])


def _coerce(obj: Any):
    from fractions import Fraction

    import numpy as np

    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, frozenset):
        return sorted(obj)
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def validate_report(obj: dict) -> None:
    jsonschema.validate(json.loads(json.dumps(obj, default=_coerce)), REPORT_SCHEMA)
