"""Ingestion of external formal-tool reports.

Report schema (JSON):

    {
      "tool": "<name>",
      "results": [
        {
          "property": "<prop id>",        required
          "status": "<tool status>",      required, see STATUS_MAP
          "depth": <int>,                 optional
          "runtime_ms": <int>,            optional
          "artifact": "<path>"            optional; required for cex
        }
      ]
    }

Unknown statuses map to error with the original status retained in the
result note.
"""

from __future__ import annotations

from verikg.ir.types import FormalResult, ResultStatus, make_id
from verikg.ir.validate import ValidationReport

STATUS_MAP = {
    "proven": ResultStatus.PROVEN,
    "pass": ResultStatus.PROVEN,
    "cex": ResultStatus.CEX,
    "fail": ResultStatus.CEX,
    "falsified": ResultStatus.CEX,
    "counterexample": ResultStatus.CEX,
    "vacuous": ResultStatus.VACUOUS,
    "undetermined": ResultStatus.BOUNDED,
    "unknown": ResultStatus.BOUNDED,
    "inconclusive": ResultStatus.BOUNDED,
    "bounded": ResultStatus.BOUNDED,
    "error": ResultStatus.ERROR,
}


class ExternalReportError(Exception):
    def __init__(self, report: ValidationReport):
        super().__init__(str(report))
        self.report = report


def import_external_results(report: dict, id_start: int = 1) -> list[FormalResult]:
    """Parse a tool report into FormalResult records flagged external."""
    rep = ValidationReport()
    if not isinstance(report, dict):
        rep.add("$", "report must be an object")
        raise ExternalReportError(rep)
    results = report.get("results")
    if not isinstance(results, list):
        rep.add("$.results", "missing or not a list")
        raise ExternalReportError(rep)
    out: list[FormalResult] = []
    for i, entry in enumerate(results):
        path = f"$.results[{i}]"
        if not isinstance(entry, dict):
            rep.add(path, "entry must be an object")
            continue
        prop = entry.get("property")
        status_raw = entry.get("status")
        if not isinstance(prop, str) or not prop:
            rep.add(path + ".property", "required string")
            continue
        if not isinstance(status_raw, str):
            rep.add(path + ".status", "required string")
            continue
        depth = entry.get("depth")
        if depth is not None and (not isinstance(depth, int) or depth < 0):
            rep.add(path + ".depth", "must be a nonnegative integer")
            continue
        runtime = entry.get("runtime_ms", 0)
        if not isinstance(runtime, int) or runtime < 0:
            rep.add(path + ".runtime_ms", "must be a nonnegative integer")
            continue
        artifact = entry.get("artifact")
        status = STATUS_MAP.get(status_raw.lower())
        note = None
        if status is None:
            note = f"unmapped external status: {status_raw}"
            status = ResultStatus.ERROR
        if status is ResultStatus.CEX and not artifact:
            rep.add(path + ".artifact", "required for a cex status")
            continue
        out.append(FormalResult(
            result_id=make_id("RES", id_start + len(out)),
            prop_id=prop,
            status=status,
            proof_depth=depth,
            runtime_ms=runtime,
            artifact_path=artifact,
            external=True,
            note=note,
        ))
    if rep.violations:
        raise ExternalReportError(rep)
    return out
