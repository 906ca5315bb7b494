"""Property generation: lead strategy, requirement decomposition, authoring,
review rounds with a patch cycle, then deterministic file assembly."""

from __future__ import annotations

from dataclasses import dataclass, field

from verikg.agents.backend import Backend, RecordingBackend, Transcript
from verikg.agents.common import (
    parse_property_block,
    render_signal_table,
    requirement_text,
    send_step,
    sibling_property_text,
    spec_fragment_text,
)
from verikg.agents.envelope import PromptEnvelope, ResponseShape
from verikg.ir import types as T
from verikg.kg import Graph, RetrievalBounds, SignalIndex, TaskKind, neighborhood
from verikg.rtl.ast import DesignModel, Id
from verikg.sva import ast as S
from verikg.sva.emit import emit_properties, render_statement

MAX_REVIEW_ROUNDS = 3


@dataclass
class GenerationResult:
    property_file: S.PropertyFile
    records: list[T.PropertyRecord] = field(default_factory=list)
    links: list[T.TraceLink] = field(default_factory=list)
    transcript: Transcript = field(default_factory=Transcript)
    emitted_text: str = ""


_KIND_FROM_DECL = {"assertion": T.PropKind.ASSERTION,
                   "assumption": T.PropKind.ASSUMPTION,
                   "cover": T.PropKind.COVER}


def run_generation(reqs: list[T.Requirement], kg: Graph, dm: DesignModel,
                   rulebook: str, backend: Backend, idx: SignalIndex,
                   clock_name: str, bounds: RetrievalBounds | None = None,
                   id_start: int = 1) -> GenerationResult:
    """Generate properties for every requirement (req_id order).

    Review rejections cycle through sva_patcher up to three rounds; a
    deadlock emits the last block with status=disabled and an attempt note.
    """
    rec = RecordingBackend(backend)
    pf = S.PropertyFile(default_clock=S.ClockSpec("posedge", Id(clock_name)))
    out = GenerationResult(pf, transcript=rec.transcript)
    signal_table = render_signal_table(idx)
    next_id = id_start

    for req in sorted(reqs, key=lambda r: r.req_id):
        ctx = neighborhood(kg, req.req_id, TaskKind.GENERATION, bounds)
        req_text = requirement_text(kg, req.req_id) or f"[{req.req_id}] {req.text}"
        fragment = spec_fragment_text(kg, ctx)
        siblings = sibling_property_text(kg, ctx, exclude=set())

        send_step(rec, PromptEnvelope.build(
            "sva_lead", f"gen/{req.req_id}/lead", ResponseShape.ANALYSIS,
            requirement=req_text, spec_fragment=fragment, rulebook=rulebook))
        send_step(rec, PromptEnvelope.build(
            "spec_analyst", f"gen/{req.req_id}/analyze", ResponseShape.ANALYSIS,
            requirement=req_text, spec_fragment=fragment))
        author = send_step(rec, PromptEnvelope.build(
            "sva_author", f"gen/{req.req_id}/author", ResponseShape.PROPERTY_BLOCK,
            requirement=req_text, spec_fragment=fragment,
            signal_table=signal_table, rulebook=rulebook, prior_code=siblings))
        block_text = author.payload

        approved = False
        reject_reasons: list[str] = []
        for round_no in range(1, MAX_REVIEW_ROUNDS + 1):
            verdict = send_step(rec, PromptEnvelope.build(
                "sva_reviewer", f"gen/{req.req_id}/review/{round_no}",
                ResponseShape.VERDICT,
                requirement=req_text, rulebook=rulebook, prior_code=block_text))
            if verdict.payload["approve"]:
                approved = True
                break
            reject_reasons = verdict.payload["reasons"]
            if round_no == MAX_REVIEW_ROUNDS:
                break
            patched = send_step(rec, PromptEnvelope.build(
                "sva_patcher", f"gen/{req.req_id}/patch/{round_no}",
                ResponseShape.PROPERTY_BLOCK,
                requirement=req_text, rulebook=rulebook, prior_code=block_text,
                diagnostics="; ".join(reject_reasons)))
            block_text = patched.payload

        block = parse_property_block(block_text)
        for decl in block.decls:
            prop_id = T.make_id("PROP", next_id)
            next_id += 1
            pf.properties.append(S.PropertyDecl(
                prop_id, decl.kind, decl.body, decl.line, decl.raw_source))
            record = T.PropertyRecord(
                prop_id=prop_id,
                req_ids=[req.req_id],
                kind=_KIND_FROM_DECL[decl.kind],
                sva_text=decl.raw_source,
                line_span=(1, 1),
                status=T.PropStatus.ACTIVE if approved else T.PropStatus.DISABLED,
            )
            if not approved:
                record.attempt_history.append(T.AttemptNote(
                    loop_kind=T.LoopKind.SYNTAX,
                    attempt_no=1,
                    diagnosis="reviewer deadlock after "
                              f"{MAX_REVIEW_ROUNDS} rounds: "
                              + "; ".join(reject_reasons),
                    patch_summary="property disabled",
                    outcome=T.AttemptOutcome.DISABLED,
                ))
            out.records.append(record)
            out.links.append(T.TraceLink(prop_id, req.req_id, T.LinkKind.VALIDATES))

    # code_extractor role: deterministic assembly through the emitter
    active_ids = {r.prop_id for r in out.records if r.status is T.PropStatus.ACTIVE}
    pf.properties = [p for p in pf.properties if p.prop_id in active_ids]
    out.emitted_text = emit_properties(pf)
    _sync_records(pf, out.records)
    return out


def _sync_records(pf: S.PropertyFile, records: list[T.PropertyRecord]) -> None:
    """Align record text and line spans with the assembled file."""
    by_id = {p.prop_id: p for p in pf.properties}
    for record in records:
        decl = by_id.get(record.prop_id)
        if decl is None:
            continue
        record.line_span = pf.line_map.get(record.prop_id, (1, 1))
        record.sva_text = render_statement(decl)
