"""Machine-readable run reports: stable JSON schema, exact values inside,
floats only in formatting helpers."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

SCHEMA_VERSION = 1


@dataclass
class Verdict:
    name: str
    ok: bool
    flags: tuple[str, ...] = ()
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "ok": self.ok, "flags": list(self.flags), "detail": self.detail}


def build_report(
    command: str,
    config: dict,
    results: dict,
    verdicts: list[Verdict],
    timing_seconds: float,
) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "results": results,
        "verdicts": [v.to_dict() for v in verdicts],
        "all_pass": all(v.ok for v in verdicts),
        "timing": {"seconds": timing_seconds},
    }


def _json_default(obj):
    if isinstance(obj, Fraction):
        return {"num": obj.numerator, "den": obj.denominator}
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if hasattr(obj, "to_jsonable"):
        return obj.to_jsonable()
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def report_to_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, default=_json_default)


def strip_timing(report: dict) -> dict:
    """The byte-reproducibility view: everything except the timing field."""
    return {k: v for k, v in report.items() if k != "timing"}
