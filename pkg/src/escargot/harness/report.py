"""Report serialization: report.json, report.txt and timing.json.

report.json is deterministic: checks are ordered by name, keys are sorted and
wall-clock data lives only in timing.json.  The schema is
``report.schema.json`` next to this module.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from mpmath import mp, mpf

from .. import __version__
from ..checks import HARD, THRESHOLD
from .pipeline import VerificationReport

SCHEMA_VERSION = 1


def schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("report.schema.json").read_text())


def report_dict(rep: VerificationReport) -> dict:
    checks = rep.sorted_checks()
    return {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "command": rep.command,
        "config": rep.config,
        "verdict": {
            "hard_ok": rep.hard_ok,
            "exit_code": rep.exit_code,
            "hard_failures": [c.name for c in checks if c.kind == HARD and not c.passed],
        },
        "thresholds": rep.thresholds,
        "disc_window": rep.disc_window,
        "notes": list(rep.notes),
        "checks": [c.to_json() for c in checks],
        "extras": rep.extras,
    }


def _default(o):
    # mpf and friends that slipped through jsonnum
    return mp.nstr(o, 40)


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, default=_default) + "\n"


def report_text(rep: VerificationReport) -> str:
    lines = [f"{rep.command}: exit code {rep.exit_code}", "config: " + ", ".join(
        f"{k}={v}" for k, v in rep.config.items())]
    for c in rep.sorted_checks():
        lines.append(c.line())
    if rep.disc_window:
        lines.append(f"disc-map window: {rep.disc_window.get('feasible')} "
                     f"(scanned {rep.disc_window.get('scanned')})")
    th = {k: v for k, v in rep.thresholds.items()}
    if th:
        lines.append("thresholds:")
        lines.extend(f"  {k}: {v}" for k, v in th.items())
    for note in rep.notes:
        lines.append("note: " + note)
    n_hard = sum(1 for c in rep.checks if c.kind == HARD)
    n_thr = sum(1 for c in rep.checks if c.kind == THRESHOLD)
    lines.append(f"hard checks: {n_hard} ({'all pass' if rep.hard_ok else 'FAILURES'}); threshold checks: {n_thr}")
    return "\n".join(lines) + "\n"


def write_reports(rep: VerificationReport, out_dir, stem: str = "report") -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "json": out / f"{stem}.json",
        "text": out / f"{stem}.txt",
        "timing": out / "timing.json",
    }
    paths["json"].write_text(dumps(report_dict(rep)))
    paths["text"].write_text(report_text(rep))
    paths["timing"].write_text(dumps({"command": rep.command, "seconds": rep.timing}))
    return paths


def log_quantities(obj, path: str = "") -> dict:
    """Every logarithmic quantity in a report dict, keyed by its JSON path.

    A value counts when its key names a log (``log_*``, ``log_a``...) and it
    is a number, a decimal string or a ``{"decimal", "log10"}`` object.
    """
    found = {}
    if isinstance(obj, dict):
        for k, v in obj.items():
            p = f"{path}/{k}"
            if isinstance(k, str) and k.startswith("log") and k != "log10":
                val = _as_mpf(v)
                if val is not None:
                    found[p] = val
                    continue
            found.update(log_quantities(v, p))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            found.update(log_quantities(v, f"{path}[{i}]"))
    return found


def _as_mpf(v):
    if isinstance(v, bool) or v is None:
        return None
    if isinstance(v, (int, float)):
        return mpf(v)
    if isinstance(v, str):
        try:
            return mpf(v)
        except (ValueError, TypeError):
            return None
    if isinstance(v, dict) and "decimal" in v:
        return mpf(v["decimal"])
    return None
