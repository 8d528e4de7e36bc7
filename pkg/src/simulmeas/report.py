"""Text and structured (JSON) rendering of check results.

Exit codes: 0 when nothing failed, 1 when any check failed, 2 for scenario
load errors (raised before any report exists).
"""

from __future__ import annotations

import json
import math
from typing import Iterable, Sequence

from .scenario import CheckResult

EXIT_OK, EXIT_FAIL, EXIT_LOAD = 0, 1, 2


def format_real(x: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    return format(x, ".17g")


def to_json(obj) -> str:
    """Compact deterministic JSON; reals use 17 significant digits and
    non-finite reals become the strings "inf", "-inf", "nan".
    """
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if math.isfinite(obj):
            return format_real(obj)
        return json.dumps("nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf"))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(to_json(v) for v in obj) + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return to_json(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def exit_code(results: Iterable[CheckResult]) -> int:
    return EXIT_FAIL if any(r.verdict == "fail" for r in results) else EXIT_OK


def summary(results: Sequence[CheckResult]) -> dict:
    return {
        "total": len(results),
        "passed": sum(r.verdict == "pass" for r in results),
        "failed": sum(r.verdict == "fail" for r in results),
        "skipped": sum(r.verdict == "skipped" for r in results),
        "failed_ids": [r.check_id for r in results if r.verdict == "fail"],
    }


def result_dict(r: CheckResult) -> dict:
    return {
        "check_id": r.check_id,
        "kind": r.kind,
        "verdict": r.verdict,
        "residuals": dict(r.residuals),
        "tolerance": float(r.tolerance),
        "details": r.details,
        "data": r.data,
    }


def emit_report(results: Sequence[CheckResult], fmt: str = "text",
                header: dict | None = None) -> tuple[str, int]:
    """Render ``results``; returns the document and the process exit code."""
    code = exit_code(results)
    summ = summary(results)
    if fmt == "structured":
        doc = dict(header or {})
        doc["results"] = [result_dict(r) for r in results]
        doc["summary"] = summ
        doc["exit_code"] = code
        return to_json(doc) + "\n", code
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    lines = []
    if header:
        lines.append("# " + " ".join(f"{k}={v}" for k, v in header.items()))
    for r in results:
        line = f"{r.verdict.upper():<8}{r.check_id}  [{r.kind}]  max_residual={r.max_residual:.3e}"
        if r.details:
            line += f"  {r.details}"
        lines.append(line)
    if summ["failed_ids"]:
        lines.append("FAILED: " + ", ".join(summ["failed_ids"]))
    lines.append(f"summary: {summ['total']} checks, {summ['passed']} passed, "
                 f"{summ['failed']} failed, {summ['skipped']} skipped")
    return "\n".join(lines) + "\n", code
