"""Statement reachability under the active assumptions.

A statement is covered iff its execution guard is true in some reachable
(state, input) valuation that no assumption rejects. Unreachable statements
default to the "gap" classification; calling dead code defensive is an
agent decision, not an engine one.
"""

from __future__ import annotations

from verikg.ir.types import CoverageMetrics, DeadCodeClass, ResultStatus
from verikg.rtl.elaborate import NetModel
from verikg.sva import ast as S
from verikg.engine.check import CheckConfig, _bound_assumption_monitors, _explore
from verikg.engine.monitor import _Compiler, _truthy


def coverage(net: NetModel, props: list[S.BoundProperty],
             cfg: CheckConfig | None = None, run_ref: str = "") -> CoverageMetrics:
    """Reachability metrics plus the vacuity count over `props`.

    Budget exhaustion flags the metrics partial instead of failing: covered
    statements stay covered, the remainder may be falsely unreachable.
    """
    cfg = cfg or CheckConfig()
    cfg.validate()
    monitors = _bound_assumption_monitors(net, cfg)

    comp = _Compiler(net)
    guard_fns: dict[str, object] = {}
    for sid in sorted(net.statement_guards):
        fn, _w = comp.compile(net.statement_guards[sid])
        guard_fns[sid] = fn
    uncovered = set(guard_fns)
    covered: set[str] = set()
    empty_hist: tuple = ()

    def hook(values: dict) -> None:
        hit = [sid for sid in uncovered if _truthy(guard_fns[sid](values, empty_hist))]
        for sid in hit:
            uncovered.discard(sid)
            covered.add(sid)

    ex = _explore(net, None, monitors, cfg, "", 0, "violation", guard_hook=hook)
    partial = ex.status is ResultStatus.BOUNDED

    vacuity = 0
    from verikg.engine.check import check, check_cover
    for bp in sorted(props, key=lambda p: p.prop_id):
        if bp.kind == "assumption":
            continue
        result, _trace = (check_cover if bp.kind == "cover" else check)(net, bp, cfg)
        if result.status is ResultStatus.VACUOUS:
            vacuity += 1

    covered_list = sorted(covered, key=_sid_key)
    unreachable_list = sorted(uncovered, key=_sid_key)
    total = len(covered_list) + len(unreachable_list)
    pct = 100.0 * len(covered_list) / total if total else 100.0
    return CoverageMetrics(
        run_ref=run_ref,
        reachable_pct=round(pct, 4),
        covered_statements=covered_list,
        unreachable_statements=unreachable_list,
        dead_code=[(sid, DeadCodeClass.GAP) for sid in unreachable_list],
        vacuity_count=vacuity,
        proof_core_ratio=None,
        partial=partial,
    )


def _sid_key(sid: str) -> tuple:
    return (0, int(sid[1:])) if sid[1:].isdigit() else (1, sid)
