"""Counterexample correction: waveform triage, root-cause classification,
property patching with isolated re-check, three attempts then manual flag."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from verikg.agents.backend import Backend, RecordingBackend, Transcript
from verikg.agents.common import render_signal_table, requirement_text, send_step
from verikg.agents.envelope import PromptEnvelope, ResponseShape
from verikg.engine.check import CheckConfig, check
from verikg.ir import types as T
from verikg.kg import Graph, SignalIndex, build_signal_index
from verikg.rtl.elaborate import NetModel
from verikg.sva import ast as S
from verikg.sva.bind import bind
from verikg.sva.emit import emit_properties, render_statement
from verikg.sva.parser import parse_properties_with_recovery
from verikg.vcd import failure_window, parse_vcd

MAX_ATTEMPTS = 3

_ROOT_CAUSE_RE = re.compile(
    r"root_cause:\s*(rtl_bug|over_specification|missing_assumption|under_specification)")

_CAUSE_MAP = {
    "rtl_bug": T.RootCause.RTL_BUG,
    "over_specification": T.RootCause.OVER_SPECIFICATION,
    "missing_assumption": T.RootCause.MISSING_ASSUMPTION,
    "under_specification": T.RootCause.UNDER_SPECIFICATION,
}


@dataclass
class CexLoopReport:
    corrected: list[str] = field(default_factory=list)
    not_corrected: list[str] = field(default_factory=list)
    manual_review: list[str] = field(default_factory=list)
    cases: list[T.CexCase] = field(default_factory=list)
    transcript: Transcript = field(default_factory=Transcript)
    # prop ids whose property text changed (drives downstream invalidation)
    patched: list[str] = field(default_factory=list)


def _render_window(summary) -> str:
    lines = [f"failure time: {summary.center_time}"]
    for t, name, old, new in summary.window:
        lines.append(f"#{t}: {name}: {old} -> {new}")
    if summary.missing:
        lines.append("missing signals: " + ", ".join(summary.missing))
    return "\n".join(lines)


def run_cex_loop(results: list[T.FormalResult], kg: Graph, net: NetModel,
                 rtl_source: str, backend: Backend,
                 pf: S.PropertyFile, records: list[T.PropertyRecord],
                 artifacts: dict[str, bytes], cfg: CheckConfig,
                 dm, pre_cycles: int = 3, cex_id_start: int = 1) -> CexLoopReport:
    """Process every failing result in prop_id order.

    RTL bugs are documented and the property left failing; property-side
    causes are patched and re-checked in isolation before reintegration.
    """
    rec = RecordingBackend(backend)
    report = CexLoopReport(transcript=rec.transcript)
    idx = build_signal_index(kg)
    records_by_id = {r.prop_id: r for r in records}
    signal_table = render_signal_table(idx)
    next_cex = cex_id_start

    failing = sorted((r for r in results if r.status is T.ResultStatus.CEX),
                     key=lambda r: r.prop_id)
    for result in failing:
        pid = result.prop_id
        record = records_by_id.get(pid)
        decl = pf.get(pid)
        line = pf.line_map.get(pid, (0, 0))[1]
        cex_id = T.make_id("CEX", next_cex)
        next_cex += 1

        blob = artifacts.get(result.artifact_path or "")
        if blob is None:
            report.cases.append(T.CexCase(
                cex_id, pid, result.artifact_path or "", 0, line,
                note="missing_artifact"))
            report.not_corrected.append(pid)
            continue

        # vcd_parser role: deterministic waveform triage
        db = parse_vcd(blob)
        failure_time = (result.proof_depth or db.end_time()) * db.timescale[0]
        prop_signals = sorted(db.signal_names())
        window = failure_window(db, failure_time, prop_signals, pre_cycles)
        window_text = _render_window(window)

        case = T.CexCase(cex_id, pid, result.artifact_path or "",
                         failure_time, line)
        report.cases.append(case)

        req_text = "\n".join(requirement_text(kg, rid)
                             for rid in (record.req_ids if record else []))
        prop_text = render_statement(decl) if decl else (record.sva_text if record else "")

        analysis = send_step(rec, PromptEnvelope.build(
            "spec_assertion_analyzer", f"cex/{pid}/classify",
            ResponseShape.ANALYSIS,
            requirement=req_text, prior_code=prop_text,
            diagnostics=window_text))
        m = _ROOT_CAUSE_RE.search(str(analysis.payload))
        cause = _CAUSE_MAP[m.group(1)] if m else T.RootCause.UNDER_SPECIFICATION
        case.root_cause = cause

        if cause is T.RootCause.RTL_BUG:
            doc = send_step(rec, PromptEnvelope.build(
                "rtl_analyzer", f"cex/{pid}/rtl", ResponseShape.ANALYSIS,
                requirement=req_text, prior_code=rtl_source,
                diagnostics=window_text))
            case.note = str(doc.payload)[:500]
            report.not_corrected.append(pid)
            continue  # genuine bugs are documented, the property stays failing

        if decl is None:
            report.not_corrected.append(pid)
            continue

        used = sum(1 for n in (record.attempt_history if record else [])
                   if n.loop_kind is T.LoopKind.CEX)
        if used >= MAX_ATTEMPTS:
            report.not_corrected.append(pid)
            report.manual_review.append(pid)
            continue

        fixed = False
        for attempt_no in range(used + 1, MAX_ATTEMPTS + 1):
            patch = send_step(rec, PromptEnvelope.build(
                "cex_fixer", f"cex/{pid}/fix/{attempt_no}",
                ResponseShape.CODE_PATCH,
                requirement=req_text, signal_table=signal_table,
                prior_code=render_statement(decl), diagnostics=window_text))
            ok, candidate = _isolated_recheck(str(patch.payload), pid, decl,
                                              pf, dm, idx, net, cfg)
            note = T.AttemptNote(
                loop_kind=T.LoopKind.CEX,
                attempt_no=attempt_no,
                diagnosis=f"root_cause={cause.value}",
                patch_summary=str(patch.payload)[:200],
                outcome=T.AttemptOutcome.FIXED if ok else T.AttemptOutcome.RETRY,
            )
            case.attempts.append(note)
            if record is not None:
                record.attempt_history.append(note)
            if ok:
                decl.body = candidate.body
                decl.kind = candidate.kind
                decl.raw_source = candidate.raw_source
                if record is not None:
                    record.sva_text = render_statement(decl)
                report.corrected.append(pid)
                report.patched.append(pid)
                fixed = True
                break
        if not fixed:
            report.not_corrected.append(pid)
            report.manual_review.append(pid)
    return report


def _isolated_recheck(patch_text: str, pid: str, decl: S.PropertyDecl,
                      pf: S.PropertyFile, dm, idx: SignalIndex,
                      net: NetModel, cfg: CheckConfig):
    """Parse, bind, and engine-check the patched property alone."""
    block, _diags = parse_properties_with_recovery(patch_text)
    candidate = next((p for p in block.properties if p.body is not None), None)
    if candidate is None:
        return False, None
    wrapper = S.PropertyFile(macros=list(pf.macros),
                             properties=[S.PropertyDecl(pid, candidate.kind,
                                                        candidate.body, decl.line,
                                                        candidate.raw_source)],
                             default_clock=pf.default_clock)
    text = emit_properties(wrapper)
    parsed, diags = parse_properties_with_recovery(text)
    parsed.default_clock = parsed.default_clock or pf.default_clock
    if diags.has_errors():
        return False, None
    bound, errs = bind(parsed, dm, idx)
    if errs.items or not bound:
        return False, None
    bp = bound[0]
    if bp.kind == "cover":
        return False, None
    result, _trace = check(net, bp, cfg)
    if result.status in (T.ResultStatus.PROVEN, T.ResultStatus.VACUOUS):
        return True, candidate
    return False, None
