"""Cross-iteration run comparison."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from verikg.ir import types as T


@dataclass
class KindDiff:
    added: set[str] = field(default_factory=set)
    removed: set[str] = field(default_factory=set)
    changed: set[str] = field(default_factory=set)

    @property
    def empty(self) -> bool:
        return not (self.added or self.removed or self.changed)


@dataclass
class RunDiff:
    kinds: dict[str, KindDiff] = field(default_factory=dict)
    # (prop_id, old status, new status) for properties whose result flipped
    status_transitions: list[tuple[str, str, str]] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return all(k.empty for k in self.kinds.values()) and not self.status_transitions

    def render(self) -> str:
        lines = []
        for kind, kd in sorted(self.kinds.items()):
            if kd.empty:
                continue
            lines.append(f"{kind}: +{sorted(kd.added)} -{sorted(kd.removed)} "
                         f"~{sorted(kd.changed)}")
        for prop_id, old, new in self.status_transitions:
            lines.append(f"{prop_id}: {old} -> {new}")
        return "\n".join(lines) or "(no differences)"


_ID_FIELDS = {
    "spec_chunks": "chunk_id",
    "requirements": "req_id",
    "properties": "prop_id",
    "formal_results": "result_id",
    "cex_cases": "cex_id",
}


def _id_map(items, id_field: str) -> dict[str, dict]:
    return {getattr(x, id_field): x.to_doc() for x in items or []}


def diff_runs(a: T.RunBundle, b: T.RunBundle) -> RunDiff:
    """Per-kind added/removed/changed id sets and per-property result-status
    transitions from a to b. Disjoint runs produce full add/remove sets."""
    out = RunDiff()
    for kind, id_field in _ID_FIELDS.items():
        am = _id_map(getattr(a, kind), id_field)
        bm = _id_map(getattr(b, kind), id_field)
        kd = KindDiff()
        kd.added = set(bm) - set(am)
        kd.removed = set(am) - set(bm)
        kd.changed = {i for i in set(am) & set(bm) if am[i] != bm[i]}
        out.kinds[kind] = kd

    # tracelinks and testplan have no single id; diff by full-document identity
    for kind in ("tracelinks", "testplan"):
        a_docs = {_doc_key(x) for x in (getattr(a, kind) or [])}
        b_docs = {_doc_key(x) for x in (getattr(b, kind) or [])}
        kd = KindDiff()
        kd.added = {str(d) for d in b_docs - a_docs}
        kd.removed = {str(d) for d in a_docs - b_docs}
        out.kinds[kind] = kd

    a_status = _status_by_prop(a)
    b_status = _status_by_prop(b)
    for prop_id in sorted(set(a_status) & set(b_status)):
        if a_status[prop_id] != b_status[prop_id]:
            out.status_transitions.append((prop_id, a_status[prop_id], b_status[prop_id]))
    return out


def _doc_key(x) -> str:
    return json.dumps(x.to_doc(), sort_keys=True)


def _status_by_prop(bundle: T.RunBundle) -> dict[str, str]:
    out: dict[str, str] = {}
    for r in bundle.formal_results or []:
        out[r.prop_id] = r.status.value
    return out
