"""Shared JSON report format for experiments.

A report looks like ``{"spec": {...}, "value": [re, im], "n_grid": [...],
"series": [...], "checks": [...], "passed": bool, "timestamp": "..."}``.
Everything except ``timestamp`` is a deterministic function of the spec.
"""

from __future__ import annotations

import datetime as _dt
import json
from dataclasses import dataclass, field
from typing import Any


def _clean(x):
    """Convert numpy scalars and complex numbers into JSON-friendly values."""
    if isinstance(x, complex):
        return [x.real, x.imag]
    if hasattr(x, "item") and not isinstance(x, (list, dict)):
        return _clean(x.item())
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, float) and x != x:
        return None
    return x


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Report:
    spec: dict
    value: complex = 0j
    n_grid: list = field(default_factory=list)
    series: list = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(Check(name, bool(passed), detail))

    def to_dict(self, timestamp: bool = True) -> dict:
        out = {
            "spec": _clean(self.spec),
            "value": _clean(complex(self.value)),
            "n_grid": _clean(self.n_grid),
            "series": _clean(self.series),
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks],
            "passed": self.passed,
        }
        out.update(_clean(self.extra))
        if timestamp:
            out["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
        return out

    def to_json(self, timestamp: bool = True) -> str:
        return json.dumps(self.to_dict(timestamp), sort_keys=True, indent=2) + "\n"


def strip_timestamp(doc: dict) -> dict:
    return {k: v for k, v in doc.items() if k != "timestamp"}


def decreasing(values, inversions: int = 0, slack: float = 1.2, atol: float = 0.0) -> bool:
    """Whether ``values`` decrease, tolerating up to ``inversions`` increases
    by at most a factor ``slack`` (plus an absolute ``atol``)."""
    used = 0
    for a, b in zip(values, values[1:]):
        if b <= a + atol:
            continue
        if b <= slack * a + atol and used < inversions:
            used += 1
            continue
        return False
    return True
