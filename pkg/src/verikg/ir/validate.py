"""Schema and invariant validation for IR documents and whole bundles."""

from __future__ import annotations

from dataclasses import dataclass, field

from verikg.ir import types as T
from verikg.rtl.ast import DesignModel


@dataclass
class Violation:
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    def add(self, path: str, message: str) -> None:
        self.violations.append(Violation(path, message))

    @property
    def ok(self) -> bool:
        return not self.violations

    def extend(self, other: "ValidationReport", prefix: str = "") -> None:
        for v in other.violations:
            self.violations.append(Violation(prefix + v.path, v.message))

    def __str__(self) -> str:
        return "\n".join(str(v) for v in self.violations) or "ok"


def coverage_node_id(index: int) -> str:
    """Positional graph id for a CoverageMetrics record (they carry none)."""
    return T.make_id("COV", index + 1)


@dataclass
class BundleIndex:
    """Id universe used for cross-reference checks."""

    chunks: set[str] = field(default_factory=set)
    reqs: set[str] = field(default_factory=set)
    props: set[str] = field(default_factory=set)
    results: set[str] = field(default_factory=set)
    cexs: set[str] = field(default_factory=set)
    coverage: set[str] = field(default_factory=set)
    statements: set[str] = field(default_factory=set)
    modules: set[str] = field(default_factory=set)
    proven_props: set[str] = field(default_factory=set)
    cex_props: set[str] = field(default_factory=set)

    @classmethod
    def from_bundle(cls, b: T.RunBundle) -> "BundleIndex":
        ix = cls()
        for c in b.spec_chunks or []:
            ix.chunks.add(c.chunk_id)
        for r in b.requirements or []:
            ix.reqs.add(r.req_id)
        for p in b.properties or []:
            ix.props.add(p.prop_id)
        for r in b.formal_results or []:
            ix.results.add(r.result_id)
            if r.status is T.ResultStatus.PROVEN:
                ix.proven_props.add(r.prop_id)
        for c in b.cex_cases or []:
            ix.cexs.add(c.cex_id)
            ix.cex_props.add(c.prop_id)
        for i, _ in enumerate(b.coverage_metrics or []):
            ix.coverage.add(coverage_node_id(i))
        if b.design_model is not None:
            for s in b.design_model.statements:
                ix.statements.add(s.id)
            for m in b.design_model.modules:
                ix.modules.add(m.name)
        return ix


_LINK_SCHEMA = {
    T.LinkKind.DERIVES_FROM: ("requirement", "spec_chunk"),
    T.LinkKind.VALIDATES: ("property", "requirement"),
    T.LinkKind.PROVES: ("formal_result", "property"),
    T.LinkKind.FAILS: ("formal_result", "property"),
    T.LinkKind.COVERS: ("property", "coverage_or_statement"),
}


def _kind_of(ident: str, ix: BundleIndex) -> str | None:
    if ident in ix.chunks:
        return "spec_chunk"
    if ident in ix.reqs:
        return "requirement"
    if ident in ix.props:
        return "property"
    if ident in ix.results:
        return "formal_result"
    if ident in ix.cexs:
        return "cex_case"
    if ident in ix.coverage:
        return "coverage_metrics"
    if ident in ix.statements:
        return "rtl_statement"
    if ident in ix.modules:
        return "rtl_module"
    return None


def check_link_endpoints(link: T.TraceLink, ix: BundleIndex) -> str | None:
    """None when the link satisfies the endpoint-kind schema, else a reason."""
    want_src, want_dst = _LINK_SCHEMA[link.link_kind]
    src_kind = _kind_of(link.src_id, ix)
    dst_kind = _kind_of(link.dst_id, ix)
    if src_kind is None:
        return f"src {link.src_id!r} does not resolve"
    if dst_kind is None:
        return f"dst {link.dst_id!r} does not resolve"
    if src_kind != want_src:
        return f"endpoint kind mismatch: src of {link.link_kind.value} must be {want_src}, got {src_kind}"
    if want_dst == "coverage_or_statement":
        if dst_kind not in ("coverage_metrics", "rtl_statement"):
            return ("endpoint kind mismatch: dst of covers must be "
                    f"coverage_metrics or rtl_statement, got {dst_kind}")
        return None
    if dst_kind != want_dst:
        return f"endpoint kind mismatch: dst of {link.link_kind.value} must be {want_dst}, got {dst_kind}"
    return None


# -- per-kind validators -----------------------------------------------------

def _validate_spec_chunks(items: list[T.SpecChunk], rep: ValidationReport) -> None:
    seen: set[str] = set()
    last_index = -1
    for i, c in enumerate(items):
        path = f"spec_chunks[{i}]"
        if not c.chunk_id:
            rep.add(path + ".chunk_id", "empty identifier")
        if c.chunk_id in seen:
            rep.add(path + ".chunk_id", f"duplicate chunk_id {c.chunk_id!r}")
        seen.add(c.chunk_id)
        if not c.heading_path:
            rep.add(path + ".heading_path", "heading_path non-empty")
        if c.order_index < 0:
            rep.add(path + ".order_index", "order_index must be nonnegative")
        if c.order_index <= last_index:
            rep.add(path + ".order_index",
                    "order_index strictly increasing in document order")
        last_index = c.order_index


def _validate_requirements(items: list[T.Requirement], rep: ValidationReport,
                           ix: BundleIndex | None) -> None:
    seen: set[str] = set()
    for i, r in enumerate(items):
        path = f"requirements[{i}]"
        if r.req_id in seen:
            rep.add(path + ".req_id", f"duplicate req_id {r.req_id!r}")
        seen.add(r.req_id)
        if not r.source_chunks:
            rep.add(path + ".source_chunks", "source_chunks non-empty")
        if ix is not None:
            for c in r.source_chunks:
                if c not in ix.chunks:
                    rep.add(path + ".source_chunks",
                            f"referenced chunk {c!r} does not exist in this run")


def _validate_testplan(items: list[T.TestPlanEntry], rep: ValidationReport,
                       ix: BundleIndex | None) -> None:
    for i, t in enumerate(items):
        if ix is not None and t.req_id not in ix.reqs:
            rep.add(f"testplan[{i}].req_id",
                    f"req_id {t.req_id!r} refers to no Requirement")


def _validate_attempts(attempts: list[T.AttemptNote], path: str,
                       rep: ValidationReport) -> None:
    per_kind: dict[T.LoopKind, list[int]] = {}
    for a in attempts:
        per_kind.setdefault(a.loop_kind, []).append(a.attempt_no)
        if not (1 <= a.attempt_no <= 3):
            rep.add(path, f"attempt_no {a.attempt_no} outside 1..3")
    for kind, nos in per_kind.items():
        if len(nos) > 3:
            rep.add(path, f"more than 3 attempts for loop kind {kind.value}")
        if any(b <= a for a, b in zip(nos, nos[1:])):
            rep.add(path, f"attempt_no not strictly increasing for {kind.value}")


def _validate_properties(items: list[T.PropertyRecord], rep: ValidationReport) -> None:
    seen: set[str] = set()
    for i, p in enumerate(items):
        path = f"properties[{i}]"
        if p.prop_id in seen:
            rep.add(path + ".prop_id", f"duplicate prop_id {p.prop_id!r}")
        seen.add(p.prop_id)
        start, end = p.line_span
        if start < 1 or end < start:
            rep.add(path + ".line_span", f"invalid span {p.line_span}")
        if p.status is T.PropStatus.DISABLED and not p.sva_text:
            rep.add(path + ".sva_text", "disabled property must retain its last sva_text")
        _validate_attempts(p.attempt_history, path + ".attempt_history", rep)


def _validate_tracelinks(items: list[T.TraceLink], rep: ValidationReport,
                         ix: BundleIndex | None) -> None:
    if ix is None:
        return
    for i, link in enumerate(items):
        reason = check_link_endpoints(link, ix)
        if reason is not None:
            rep.add(f"tracelinks[{i}]", reason)


def _validate_formal_results(items: list[T.FormalResult], rep: ValidationReport,
                             ix: BundleIndex | None) -> None:
    seen: set[str] = set()
    for i, r in enumerate(items):
        path = f"formal_results[{i}]"
        if r.result_id in seen:
            rep.add(path + ".result_id", f"duplicate result_id {r.result_id!r}")
        seen.add(r.result_id)
        if r.status is T.ResultStatus.CEX and not r.artifact_path:
            rep.add(path + ".artifact_path", "status=cex implies artifact_path set")
        if r.proof_depth is not None and r.proof_depth < 0:
            rep.add(path + ".proof_depth", "proof_depth must be nonnegative")
        if ix is not None and r.status is T.ResultStatus.PROVEN \
                and r.prop_id in ix.cex_props:
            rep.add(path, f"proven result for {r.prop_id!r} coexists with a CexCase")


def _validate_cex_cases(items: list[T.CexCase], rep: ValidationReport) -> None:
    seen: set[str] = set()
    for i, c in enumerate(items):
        path = f"cex_cases[{i}]"
        if c.cex_id in seen:
            rep.add(path + ".cex_id", f"duplicate cex_id {c.cex_id!r}")
        seen.add(c.cex_id)
        if len(c.attempts) > 3:
            rep.add(path + ".attempts", "attempts length exceeds 3")
        _validate_attempts(c.attempts, path + ".attempts", rep)


def _validate_coverage(items: list[T.CoverageMetrics], rep: ValidationReport) -> None:
    for i, m in enumerate(items):
        path = f"coverage_metrics[{i}]"
        covered = set(m.covered_statements)
        unreachable = set(m.unreachable_statements)
        overlap = covered & unreachable
        if overlap:
            rep.add(path, f"covered and unreachable overlap: {sorted(overlap)}")
        total = len(covered) + len(unreachable)
        if total:
            expect = 100.0 * len(covered) / total
            if abs(m.reachable_pct - expect) > 0.05:
                rep.add(path + ".reachable_pct",
                        f"{m.reachable_pct} differs from {expect:.4f} by more than 0.05")
        if m.vacuity_count < 0:
            rep.add(path + ".vacuity_count", "must be nonnegative")


def _validate_run_context(ctx: T.RunContext, rep: ValidationReport) -> None:
    if not ctx.run_id:
        rep.add("run_context.run_id", "empty run_id")
        return
    parts = ctx.run_id.split("-")
    if len(parts) != 2 or len(parts[1]) != 8 or len(parts[0]) != 16 \
            or not parts[0].endswith("Z"):
        rep.add("run_context.run_id",
                f"run_id {ctx.run_id!r} not of form YYYYMMDDTHHMMSSZ-<8 hex>")
    else:
        try:
            int(parts[1], 16)
        except ValueError:
            rep.add("run_context.run_id", "hash suffix is not hex")


def _validate_design_model(dm: DesignModel, rep: ValidationReport) -> None:
    module_names = {m.name for m in dm.modules}
    for m in dm.modules:
        names: set[str] = set()
        for s in m.signals:
            if s.name in names:
                rep.add(f"design_model.{m.name}", f"duplicate signal {s.name!r}")
            names.add(s.name)
        port_names: set[str] = set()
        for p in m.ports:
            if p.name in port_names:
                rep.add(f"design_model.{m.name}", f"duplicate port {p.name!r}")
            port_names.add(p.name)
        for inst in m.instances:
            if inst.module not in module_names:
                rep.add(f"design_model.{m.name}.{inst.name}",
                        f"instance of unknown module {inst.module!r}")
    sids: set[str] = set()
    for s in dm.statements:
        if s.id in sids:
            rep.add("design_model.statements", f"duplicate statement id {s.id!r}")
        sids.add(s.id)
    reg_names = {f"{m.name}.{s.name}" for m in dm.modules for s in m.signals}
    for f in dm.fsms:
        if f.state_reg not in reg_names:
            rep.add("design_model.fsms", f"state register {f.state_reg!r} not declared")


_CSV_COLUMNS = {"nodes": 4, "edges": 5}


def _validate_csv_rows(kind: str, rows, rep: ValidationReport) -> None:
    want = _CSV_COLUMNS[kind]
    for i, row in enumerate(rows):
        if not isinstance(row, (list, tuple)) or len(row) != want:
            rep.add(f"{kind}[{i}]", f"expected {want} columns")
            continue
        if any(not isinstance(x, str) for x in row):
            rep.add(f"{kind}[{i}]", "all columns must be strings")


# -- public entry points -------------------------------------------------------

_PARSERS = {
    "spec_chunks": lambda doc: [T.SpecChunk.from_doc(d) for d in doc],
    "requirements": lambda doc: [T.Requirement.from_doc(d) for d in doc],
    "testplan": lambda doc: [T.TestPlanEntry.from_doc(d) for d in doc],
    "design_model": DesignModel.from_doc,
    "properties": lambda doc: [T.PropertyRecord.from_doc(d) for d in doc],
    "tracelinks": lambda doc: [T.TraceLink.from_doc(d) for d in doc],
    "formal_results": lambda doc: [T.FormalResult.from_doc(d) for d in doc],
    "cex_cases": lambda doc: [T.CexCase.from_doc(d) for d in doc],
    "coverage_metrics": lambda doc: [T.CoverageMetrics.from_doc(d) for d in doc],
    "run_context": T.RunContext.from_doc,
}


def validate_artifact(doc, kind: str, bundle: T.RunBundle | None = None) -> ValidationReport:
    """Validate one parsed document against its kind's schema and invariants.

    Cross-reference invariants (chunk existence, link endpoints, ...) are
    checked only when the surrounding bundle is supplied. Malformed documents
    produce a parse-level violation, never an exception.
    """
    rep = ValidationReport()
    if kind not in T.ARTIFACT_KINDS:
        rep.add("$", f"unknown artifact kind {kind!r}")
        return rep
    if kind in ("nodes", "edges"):
        if not isinstance(doc, (list, tuple)):
            rep.add("$", "expected a list of rows")
            return rep
        _validate_csv_rows(kind, doc, rep)
        return rep
    try:
        parsed = _PARSERS[kind](doc) if not _already_typed(doc, kind) else doc
    except Exception as exc:  # malformed document, report instead of crash
        rep.add("$", f"parse: {exc}")
        return rep
    ix = BundleIndex.from_bundle(bundle) if bundle is not None else None
    if kind == "spec_chunks":
        _validate_spec_chunks(parsed, rep)
    elif kind == "requirements":
        _validate_requirements(parsed, rep, ix)
    elif kind == "testplan":
        _validate_testplan(parsed, rep, ix)
    elif kind == "design_model":
        _validate_design_model(parsed, rep)
    elif kind == "properties":
        _validate_properties(parsed, rep)
    elif kind == "tracelinks":
        _validate_tracelinks(parsed, rep, ix)
    elif kind == "formal_results":
        _validate_formal_results(parsed, rep, ix)
    elif kind == "cex_cases":
        _validate_cex_cases(parsed, rep)
    elif kind == "coverage_metrics":
        _validate_coverage(parsed, rep)
    elif kind == "run_context":
        _validate_run_context(parsed, rep)
    return rep


def _already_typed(doc, kind: str) -> bool:
    if kind == "design_model":
        return isinstance(doc, DesignModel)
    if kind == "run_context":
        return isinstance(doc, T.RunContext)
    return isinstance(doc, list) and bool(doc) and not isinstance(doc[0], dict)


def validate_bundle(bundle: T.RunBundle) -> ValidationReport:
    """Validate every present collection plus all cross-references."""
    rep = ValidationReport()
    ix = BundleIndex.from_bundle(bundle)
    _validate_run_context(bundle.context, rep)
    for kind in bundle.present_kinds():
        value = getattr(bundle, kind)
        if kind == "spec_chunks":
            _validate_spec_chunks(value, rep)
        elif kind == "requirements":
            _validate_requirements(value, rep, ix)
        elif kind == "testplan":
            _validate_testplan(value, rep, ix)
        elif kind == "design_model":
            _validate_design_model(value, rep)
        elif kind == "properties":
            _validate_properties(value, rep)
        elif kind == "tracelinks":
            _validate_tracelinks(value, rep, ix)
        elif kind == "formal_results":
            _validate_formal_results(value, rep, ix)
        elif kind == "cex_cases":
            _validate_cex_cases(value, rep)
        elif kind == "coverage_metrics":
            _validate_coverage(value, rep)
    return rep
