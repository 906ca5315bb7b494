"""Coverage-directed augmentation: gap prioritization, enabling-condition
analysis with blocking-assumption lookup in the graph, requirement linking
via trace paths, and targeted cover/assert emission."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from verikg.agents.backend import Backend, RecordingBackend, Transcript
from verikg.agents.common import parse_property_block, render_signal_table, send_step
from verikg.agents.envelope import PromptEnvelope, ResponseShape
from verikg.ir import types as T
from verikg.kg import (
    Graph,
    RetrievalBounds,
    TaskKind,
    build_signal_index,
    neighborhood,
    trace_path,
)
from verikg.rtl import ast as rtl
from verikg.rtl.ast import DesignModel
from verikg.sva import ast as S

_CLASS_RE = re.compile(r"classification:\s*(defensive|gap)")
_BLOCKED_RE = re.compile(r"blocked_by:\s*(\S+)")

# Arms that exist to catch the unspecified cases come after functional paths.
_DEFAULT_ARM_DETAILS = {"if_else", "case_default"}


@dataclass
class CoverageLoopResult:
    new_decls: list[S.PropertyDecl] = field(default_factory=list)
    new_records: list[T.PropertyRecord] = field(default_factory=list)
    new_links: list[T.TraceLink] = field(default_factory=list)
    dead_code: list[tuple[str, T.DeadCodeClass]] = field(default_factory=list)
    unlinked: list[str] = field(default_factory=list)
    blockers: dict[str, str] = field(default_factory=dict)
    transcript: Transcript = field(default_factory=Transcript)


def order_gaps(dm: DesignModel, gap_ids: list[str]) -> list[str]:
    """cov_lead_agent policy: functional-path statements first, then
    default/else arms; ids ascending within each group."""
    by_id = {s.id: s for s in dm.statements}

    def key(sid: str):
        stmt = by_id.get(sid)
        is_default = stmt is not None and stmt.detail in _DEFAULT_ARM_DETAILS
        num = int(sid[1:]) if sid[1:].isdigit() else 1 << 30
        return (1 if is_default else 0, num, sid)

    return sorted(gap_ids, key=key)


def source_guard_text(dm: DesignModel, stmt_id: str) -> str:
    """The enabling condition of a statement in module-local source terms:
    the conjunction of its enclosing branch conditions."""
    for m in dm.modules:
        for a in m.assigns:
            if a.stmt_id == stmt_id:
                return "1'd1"
        for b in m.always_blocks:
            found = _guard_in(b.body, stmt_id, [])
            if found is not None:
                if not found:
                    return "1'd1"
                return " && ".join(f"({rtl.render_expr(c)})" for c in found)
    return "1'd1"


def _guard_in(body, stmt_id: str, conds: list) -> list | None:
    for stmt in body:
        if isinstance(stmt, rtl.SeqAssign):
            if stmt.stmt_id == stmt_id:
                return list(conds)
        elif isinstance(stmt, rtl.IfStmt):
            if stmt.then_id == stmt_id:
                return conds + [stmt.cond]
            hit = _guard_in(stmt.then_body, stmt_id, conds + [stmt.cond])
            if hit is not None:
                return hit
            if stmt.else_body is not None:
                neg = rtl.Unary("!", stmt.cond)
                if stmt.else_id == stmt_id:
                    return conds + [neg]
                hit = _guard_in(stmt.else_body, stmt_id, conds + [neg])
                if hit is not None:
                    return hit
        elif isinstance(stmt, rtl.CaseStmt):
            prior = None
            for arm in stmt.arms:
                if arm.labels is None:
                    cond = rtl.Unary("!", prior) if prior is not None else rtl.Lit(1, 1)
                else:
                    eqs = None
                    for lab in arm.labels:
                        eq = rtl.Binary("==", stmt.subject, lab)
                        eqs = eq if eqs is None else rtl.Binary("||", eqs, eq)
                    cond = eqs if prior is None else \
                        rtl.Binary("&&", rtl.Unary("!", prior), eqs)
                    prior = eqs if prior is None else rtl.Binary("||", prior, eqs)
                if arm.arm_id == stmt_id:
                    return conds + [cond]
                hit = _guard_in(arm.body, stmt_id, conds + [cond])
                if hit is not None:
                    return hit
    return None


def blocking_assumption_candidates(kg: Graph, stmt_id: str,
                                   bounds: RetrievalBounds | None = None) -> list[str]:
    """Assumption-kind property nodes inside the gap's neighborhood."""
    if stmt_id not in kg.nodes:
        return []
    ctx = neighborhood(kg, stmt_id, TaskKind.COVERAGE, bounds)
    out = []
    for node_id, _reason in ctx.members:
        node = kg.nodes[node_id]
        if node.type == "property" and node.attrs.get("kind") == "assumption":
            out.append(node_id)
    return sorted(out)


def already_targeted(kg: Graph, stmt_id: str) -> bool:
    """True when a non-assumption property already covers the statement;
    repeat loop iterations must not stack duplicate covers on one gap."""
    if stmt_id not in kg.nodes:
        return False
    for nbr, etype in kg.neighbors(stmt_id):
        if etype != "covers":
            continue
        node = kg.nodes[nbr]
        if node.type == "property" and node.attrs.get("kind") != "assumption":
            return True
    return False


def run_coverage_loop(cov: T.CoverageMetrics, kg: Graph, dm: DesignModel,
                      backend: Backend, rulebook: str = "",
                      bounds: RetrievalBounds | None = None,
                      id_start: int = 1) -> CoverageLoopResult:
    """Walk the prioritized gaps; defensive verdicts reclassify dead code
    and emit nothing, gap verdicts get targeted cover directives (and any
    assertions the improver adds). New properties still flow through the
    syntax loop and engine downstream."""
    rec = RecordingBackend(backend)
    result = CoverageLoopResult(transcript=rec.transcript)
    idx = build_signal_index(kg)
    signal_table = render_signal_table(idx)
    classifications = dict(cov.dead_code)
    next_id = id_start

    requirements = sorted(n.id for n in kg.nodes.values() if n.type == "requirement")

    stmts_by_id = {s.id: s for s in dm.statements}
    for sid in order_gaps(dm, list(cov.unreachable_statements)):
        if already_targeted(kg, sid):
            continue
        guard_text = source_guard_text(dm, sid)
        candidates = blocking_assumption_candidates(kg, sid, bounds)
        stmt = stmts_by_id.get(sid)
        detail = stmt.detail if stmt and stmt.detail else stmt.kind if stmt else "unknown"

        analysis = send_step(rec, PromptEnvelope.build(
            "cov_analyzer", f"cov/{sid}/analyze", ResponseShape.ANALYSIS,
            requirement="",
            spec_fragment="",
            signal_table=signal_table,
            prior_code=f"statement {sid} kind: {detail}\n"
                       f"enabling condition: {guard_text}",
            diagnostics="candidate blocking assumptions: "
                        + (", ".join(candidates) if candidates else "(none)")))
        text = str(analysis.payload)
        cls_match = _CLASS_RE.search(text)
        blocked = _BLOCKED_RE.search(text)
        if blocked:
            result.blockers[sid] = blocked.group(1)
        if cls_match and cls_match.group(1) == "defensive":
            classifications[sid] = T.DeadCodeClass.DEFENSIVE
            continue
        classifications[sid] = T.DeadCodeClass.GAP

        # cov_processor role: link the gap to requirements via trace paths
        linked = [rid for rid in requirements
                  if sid in kg.nodes and trace_path(kg, sid, rid) is not None]
        if not linked:
            result.unlinked.append(sid)

        block_resp = send_step(rec, PromptEnvelope.build(
            "cov_improver", f"cov/{sid}/improve", ResponseShape.PROPERTY_BLOCK,
            signal_table=signal_table, rulebook=rulebook,
            prior_code=f"// unreachable statement {sid}\n"
                       f"// enabling condition: {guard_text}"))
        block = parse_property_block(str(block_resp.payload))
        for decl in block.decls:
            if decl.body is None and not decl.raw_source.strip():
                continue
            prop_id = T.make_id("PROP", next_id)
            next_id += 1
            result.new_decls.append(S.PropertyDecl(
                prop_id, decl.kind, decl.body, decl.line, decl.raw_source))
            record = T.PropertyRecord(
                prop_id=prop_id,
                req_ids=linked,
                kind={"assertion": T.PropKind.ASSERTION,
                      "assumption": T.PropKind.ASSUMPTION,
                      "cover": T.PropKind.COVER}[decl.kind],
                sva_text=decl.raw_source,
                line_span=(1, 1),
            )
            result.new_records.append(record)
            result.new_links.append(T.TraceLink(prop_id, sid, T.LinkKind.COVERS))
            for rid in linked:
                result.new_links.append(
                    T.TraceLink(prop_id, rid, T.LinkKind.VALIDATES))

    result.dead_code = sorted(classifications.items())
    return result
