"""Structured results for numeric verifications.

Every verification in the package produces a :class:`CheckReport`.  A report
is either ``hard`` (an exact identity or algebraic consistency that must hold
for every tested index; a failure means a bug) or ``threshold`` (a "for large
n" statement, for which the least index from which it holds is reported), or
``diagnostic`` (a trend or a sampled quantity, reported only).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from mpmath import mp, mpf

HARD = "hard"
THRESHOLD = "threshold"
DIAGNOSTIC = "diagnostic"


class IdentityError(ArithmeticError):
    """An exact identity or algebraic consistency check failed."""


class CoverageError(ValueError):
    """A quantity was requested outside the range covered by the tables."""


def jsonnum(x: Any) -> Any:
    """Render a number for JSON.

    Values inside the native float range become JSON numbers; anything larger
    (or tiny but nonzero) becomes a decimal string with a ``log10`` annotation.
    """
    if x is None or isinstance(x, (bool, int, str)):
        return x
    if isinstance(x, float):
        return x
    x = mpf(x)
    if not mp.isfinite(x):
        return str(x)
    if x == 0 or mpf("1e-300") < abs(x) < mpf("1e300"):
        return float(x)
    lg = mp.log10(abs(x))
    return {
        "decimal": mp.nstr(x, 25),
        "log10": float(lg) if abs(lg) < 1e300 else mp.nstr(lg, 20),
    }


def logjson(x: Any) -> dict:
    """Decimal string (40 significant digits) plus log10 for a log-quantity."""
    x = mpf(x)
    out = {"decimal": mp.nstr(x, 40, strip_zeros=False)}
    out["log10"] = float(mp.log10(abs(x))) if x != 0 else None
    return out


@dataclass
class Row:
    key: Any
    passed: bool
    margin: Any = None
    detail: dict = field(default_factory=dict)


@dataclass
class CheckReport:
    name: str
    kind: str
    rows: list[Row] = field(default_factory=list)
    precision: int = 0
    n_range: tuple[int, int] | None = None
    summary: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    indexed: bool = True  # rows keyed by n; sampled checks set this to False

    def add(self, key, passed, margin=None, **detail) -> Row:
        row = Row(key, bool(passed), margin, detail)
        self.rows.append(row)
        return row

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def failures(self) -> list[Row]:
        return [r for r in self.rows if not r.passed]

    @property
    def threshold(self):
        """Least key from which every later tested row passes (None if the last fails)."""
        if not self.rows or not self.indexed:
            return None
        best = None
        for row in reversed(self.rows):
            if not row.passed:
                break
            best = row.key
        return best

    @property
    def ok(self) -> bool:
        """Whether the check counts as satisfied for the overall verdict."""
        if self.kind == HARD:
            return self.passed
        if self.kind == THRESHOLD:
            return self.threshold is not None if self.indexed else self.passed
        return True

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "n_range": list(self.n_range) if self.n_range else None,
            "precision": self.precision,
            "passed": self.passed,
            "threshold": self.threshold if self.kind == THRESHOLD else None,
            "indexed": self.indexed,
            "ok": self.ok,
            "rows": [
                {
                    "n": r.key,
                    "pass": r.passed,
                    "margin": jsonnum(r.margin),
                    **({"detail": {k: jsonnum(v) for k, v in r.detail.items()}} if r.detail else {}),
                }
                for r in self.rows
            ],
            "summary": {k: jsonnum(v) for k, v in self.summary.items()},
            "notes": list(self.notes),
        }

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        extra = ""
        if self.kind == THRESHOLD and self.indexed:
            extra = f" threshold={self.threshold}"
        elif self.failures:
            extra = f" failures={len(self.failures)}"
        return f"[{status}] {self.name} ({self.kind}, {len(self.rows)} rows){extra}"


def threshold_from(flags: dict[int, bool]):
    """Least n such that flags[m] holds for all tested m >= n."""
    best = None
    for n in sorted(flags, reverse=True):
        if not flags[n]:
            break
        best = n
    return best
