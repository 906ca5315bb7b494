"""Hierarchy flattening into a bit-level transition system.

Every register becomes a state bit with its reset value; combinational
wires are inlined; each coverage statement gets a guard expression that is
true exactly in the cycles where the statement executes. Names are
dot-joined hierarchical paths rooted at the top module's name.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from verikg.diagnostics import DiagCode, Diagnostics
from verikg.rtl import ast
from verikg.rtl.parser import ParseError, eval_const

TRUE = ast.Lit(1, 1)


def mask(value: int, width: int) -> int:
    return value & ((1 << width) - 1)


# ---------------------------------------------------------------------------
# Width inference (strict: sized widths must agree; unsized literals adapt)
# ---------------------------------------------------------------------------

class WidthError(Exception):
    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


def width_of(e: ast.Expr, widths: dict[str, int]) -> int | None:
    """Computed width; None for an unsized literal that adapts to context."""
    if isinstance(e, ast.Lit):
        return e.width
    if isinstance(e, ast.Id):
        if e.name not in widths:
            raise WidthError(f"undeclared name {e.name!r}")
        return widths[e.name]
    if isinstance(e, ast.Select):
        if e.name not in widths:
            raise WidthError(f"undeclared name {e.name!r}")
        try:
            hi = eval_const(e.msb, {})
            lo = eval_const(e.lsb, {})
        except ParseError:
            raise WidthError(f"non-constant select bounds on {e.name!r}")
        base = widths[e.name]
        if not (0 <= lo <= hi < base):
            raise WidthError(
                f"select [{hi}:{lo}] out of range for {e.name!r} (width {base})")
        return hi - lo + 1
    if isinstance(e, ast.SliceX):
        return e.msb - e.lsb + 1
    if isinstance(e, ast.Unary):
        if e.op == "!":
            width_of(e.operand, widths)
            return 1
        w = width_of(e.operand, widths)
        if w is None:
            raise WidthError(f"operator {e.op!r} needs a sized operand")
        return w
    if isinstance(e, ast.Binary):
        lw = width_of(e.left, widths)
        rw = width_of(e.right, widths)
        if e.op in ast.LOGICAL_OPS:
            return 1
        if e.op in ast.COMPARISON_OPS:
            if lw is not None and rw is not None and lw != rw:
                raise WidthError(
                    f"width mismatch in {e.op!r} comparison: {lw} vs {rw}")
            return 1
        # bitwise / arithmetic
        if lw is not None and rw is not None and lw != rw:
            raise WidthError(f"width mismatch in {e.op!r}: {lw} vs {rw}")
        w = lw if lw is not None else rw
        if w is None:
            raise WidthError(f"operator {e.op!r} over two unsized literals")
        return w
    if isinstance(e, ast.Ternary):
        width_of(e.cond, widths)
        tw = width_of(e.then, widths)
        ow = width_of(e.other, widths)
        if tw is not None and ow is not None and tw != ow:
            raise WidthError(f"width mismatch in ?: arms: {tw} vs {ow}")
        w = tw if tw is not None else ow
        if w is None:
            raise WidthError("?: over two unsized literals")
        return w
    if isinstance(e, ast.Concat):
        total = 0
        for p in e.parts:
            pw = width_of(p, widths)
            if pw is None:
                raise WidthError("unsized literal inside concatenation")
            total += pw
        return total
    raise WidthError(f"unexpected expression node {e!r}")


def eval_expr(e: ast.Expr, values: dict[str, int], widths: dict[str, int]) -> int:
    """Two-valued evaluation; results masked to the expression width."""
    if isinstance(e, ast.Lit):
        return e.value
    if isinstance(e, ast.Id):
        return values[e.name]
    if isinstance(e, ast.Select):
        hi = eval_const(e.msb, {})
        lo = eval_const(e.lsb, {})
        return (values[e.name] >> lo) & ((1 << (hi - lo + 1)) - 1)
    if isinstance(e, ast.SliceX):
        v = eval_expr(e.base, values, widths)
        return (v >> e.lsb) & ((1 << (e.msb - e.lsb + 1)) - 1)
    if isinstance(e, ast.Unary):
        v = eval_expr(e.operand, values, widths)
        if e.op == "!":
            return 0 if v else 1
        w = width_of(e.operand, widths) or 32
        if e.op == "~":
            return mask(~v, w)
        if e.op == "-":
            return mask(-v, w)
    if isinstance(e, ast.Binary):
        a = eval_expr(e.left, values, widths)
        b = eval_expr(e.right, values, widths)
        if e.op == "&&":
            return int(bool(a) and bool(b))
        if e.op == "||":
            return int(bool(a) or bool(b))
        if e.op in ast.COMPARISON_OPS:
            return {
                "==": int(a == b), "!=": int(a != b), "<": int(a < b),
                "<=": int(a <= b), ">": int(a > b), ">=": int(a >= b),
            }[e.op]
        w = width_of(e, widths) or 32
        return mask({
            "&": a & b, "|": a | b, "^": a ^ b, "+": a + b, "-": a - b,
        }[e.op], w)
    if isinstance(e, ast.Ternary):
        c = eval_expr(e.cond, values, widths)
        return eval_expr(e.then if c else e.other, values, widths)
    if isinstance(e, ast.Concat):
        out = 0
        for p in e.parts:
            pw = width_of(p, widths)
            out = (out << pw) | mask(eval_expr(p, values, widths), pw)
        return out
    raise TypeError(f"cannot evaluate {e!r}")


# ---------------------------------------------------------------------------
# NetModel
# ---------------------------------------------------------------------------

@dataclass
class NetModel:
    top: str
    clock: str | None
    state_bits: list[tuple[str, int]]
    inputs: list[tuple[str, int]]
    next_state: dict[str, ast.Expr]
    init: dict[str, int]
    comb: dict[str, ast.Expr]
    statement_guards: dict[str, ast.Expr]
    widths: dict[str, int] = field(default_factory=dict)

    def init_state(self) -> tuple[int, ...]:
        return tuple(self.init[name] for name, _ in self.state_bits)

    def values(self, state: tuple[int, ...], inputs: tuple[int, ...]) -> dict[str, int]:
        v = {name: state[i] for i, (name, _) in enumerate(self.state_bits)}
        for i, (name, _) in enumerate(self.inputs):
            v[name] = inputs[i]
        return v

    def eval(self, e: ast.Expr, values: dict[str, int]) -> int:
        # Property expressions may reference combinational nets by name.
        needed = ast.expr_ids(e) - values.keys()
        if needed:
            values = dict(values)
            for name in needed:
                if name not in self.comb:
                    raise KeyError(f"undefined name {name!r} in expression")
                values[name] = mask(
                    eval_expr(self.comb[name], values, self.widths),
                    self.widths[name])
        return eval_expr(e, values, self.widths)

    def step(self, state: tuple[int, ...], inputs: tuple[int, ...]) -> tuple[int, ...]:
        v = self.values(state, inputs)
        out = []
        for name, w in self.state_bits:
            out.append(mask(eval_expr(self.next_state[name], v, self.widths), w))
        return tuple(out)

    def inline(self, e: ast.Expr) -> ast.Expr:
        """Substitute combinational definitions so the expression mentions
        only state bits and inputs."""
        return _subst_names(e, self.comb, self.widths)


def _subst_names(e: ast.Expr, defs: dict[str, ast.Expr],
                 widths: dict[str, int]) -> ast.Expr:
    if isinstance(e, ast.Id):
        if e.name in defs:
            return _subst_names(defs[e.name], defs, widths)
        return e
    if isinstance(e, ast.Select):
        if e.name in defs:
            hi = eval_const(e.msb, {})
            lo = eval_const(e.lsb, {})
            inner = _subst_names(defs[e.name], defs, widths)
            return ast.SliceX(inner, hi, lo)
        return e
    if isinstance(e, ast.Unary):
        return ast.Unary(e.op, _subst_names(e.operand, defs, widths))
    if isinstance(e, ast.Binary):
        return ast.Binary(e.op, _subst_names(e.left, defs, widths),
                          _subst_names(e.right, defs, widths))
    if isinstance(e, ast.Ternary):
        return ast.Ternary(_subst_names(e.cond, defs, widths),
                           _subst_names(e.then, defs, widths),
                           _subst_names(e.other, defs, widths))
    if isinstance(e, ast.Concat):
        return ast.Concat(tuple(_subst_names(p, defs, widths) for p in e.parts))
    if isinstance(e, ast.SliceX):
        return ast.SliceX(_subst_names(e.base, defs, widths), e.msb, e.lsb)
    return e


# ---------------------------------------------------------------------------
# Elaboration
# ---------------------------------------------------------------------------

class _ElabError(Exception):
    def __init__(self, line: int, message: str, code: DiagCode = DiagCode.UNRESOLVED):
        super().__init__(message)
        self.line = line
        self.message = message
        self.code = code


class _Elaborator:
    def __init__(self, model: ast.DesignModel, diags: Diagnostics):
        self.model = model
        self.diags = diags
        self.widths: dict[str, int] = {}
        self.wire_defs: dict[str, ast.Expr] = {}
        self.wire_lines: dict[str, int] = {}
        self.regs: list[tuple[str, int]] = []
        self.inputs: list[tuple[str, int]] = []
        self.input_names: set[str] = set()
        self.reg_names: set[str] = set()
        self.always_units: list[tuple[str, ast.ModuleDecl, ast.AlwaysBlock, dict[str, int]]] = []
        self.clock: str | None = None
        self.guards: dict[str, ast.Expr] = {}
        self.next_state: dict[str, ast.Expr] = {}
        self.init: dict[str, int] = {}
        self.stmt_guard_src: dict[str, ast.Expr] = {}

    # -- helpers ------------------------------------------------------------

    def _param_env(self, m: ast.ModuleDecl, overrides: dict[str, int]) -> dict[str, int]:
        env: dict[str, int] = {}
        for p in m.parameters:
            if p.name in overrides:
                if p.local:
                    raise _ElabError(p.line, f"cannot override localparam {p.name!r}")
                env[p.name] = overrides[p.name]
            else:
                try:
                    env[p.name] = eval_const(p.expr, env) if p.expr is not None else p.value
                except ParseError:
                    env[p.name] = p.value
        return env

    def _sig_width(self, s, env: dict[str, int]) -> int:
        if s.msb is None:
            return 1
        try:
            hi = eval_const(s.msb, env)
            lo = eval_const(s.lsb, env)
        except ParseError:
            raise _ElabError(s.line, f"non-constant range on {s.name!r}")
        return max(hi - lo + 1, 1)

    def _prefix_expr(self, e: ast.Expr, prefix: str, env: dict[str, int],
                     line: int) -> ast.Expr:
        if isinstance(e, ast.Lit):
            return e
        if isinstance(e, ast.Id):
            if e.name in env:
                return ast.Lit(env[e.name], None)
            if "." in e.name:
                raise _ElabError(line, f"hierarchical reference {e.name!r} in RTL",
                                 DiagCode.UNSUPPORTED)
            full = f"{prefix}.{e.name}"
            if full not in self.widths:
                raise _ElabError(line, f"undeclared identifier {e.name!r}")
            return ast.Id(full)
        if isinstance(e, ast.Select):
            hi = ast.Lit(eval_const(e.msb, env), None)
            lo = ast.Lit(eval_const(e.lsb, env), None)
            full = f"{prefix}.{e.name}"
            if full not in self.widths:
                raise _ElabError(line, f"undeclared identifier {e.name!r}")
            return ast.Select(full, hi, lo)
        if isinstance(e, ast.Unary):
            return ast.Unary(e.op, self._prefix_expr(e.operand, prefix, env, line))
        if isinstance(e, ast.Binary):
            return ast.Binary(e.op, self._prefix_expr(e.left, prefix, env, line),
                              self._prefix_expr(e.right, prefix, env, line))
        if isinstance(e, ast.Ternary):
            return ast.Ternary(self._prefix_expr(e.cond, prefix, env, line),
                               self._prefix_expr(e.then, prefix, env, line),
                               self._prefix_expr(e.other, prefix, env, line))
        if isinstance(e, ast.Concat):
            return ast.Concat(tuple(self._prefix_expr(p, prefix, env, line)
                                    for p in e.parts))
        raise _ElabError(line, f"unsupported expression node {e!r}",
                         DiagCode.UNSUPPORTED)

    # -- hierarchy walk -----------------------------------------------------

    def walk(self, module_name: str, prefix: str, overrides: dict[str, int],
             conn: dict[str, ast.Expr] | None, parent_prefix: str | None,
             parent_env: dict[str, int] | None, inst_line: int) -> None:
        m = self.model.module(module_name)
        if m is None:
            raise _ElabError(inst_line, f"unresolved instance of module {module_name!r}")
        env = self._param_env(m, overrides)

        assigned_in_always: set[str] = set()
        for b in m.always_blocks:
            for s in _seq_targets(b.body):
                assigned_in_always.add(s)

        for s in m.signals:
            full = f"{prefix}.{s.name}"
            w = self._sig_width(s, env)
            self.widths[full] = w
            if s.kind == "reg" and s.name in assigned_in_always:
                self.regs.append((full, w))
                self.reg_names.add(full)

        port_dirs = {p.name: p.direction for p in m.ports}
        is_top = conn is None
        for p in m.ports:
            full = f"{prefix}.{p.name}"
            if is_top:
                if p.direction == "input":
                    self.inputs.append((full, self.widths[full]))
                    self.input_names.add(full)
            else:
                wired = conn.get(p.name)
                if p.direction == "input":
                    if wired is None:
                        raise _ElabError(inst_line,
                                         f"unconnected input port {p.name!r} on {prefix}")
                    outer = self._prefix_expr(wired, parent_prefix, parent_env, inst_line)
                    self._add_wire(full, outer, inst_line)
                else:
                    if wired is None:
                        continue  # dangling output is legal
                    if not isinstance(wired, ast.Id):
                        raise _ElabError(inst_line,
                                         f"output port {p.name!r} must connect to a plain signal",
                                         DiagCode.UNSUPPORTED)
                    outer_full = f"{parent_prefix}.{wired.name}"
                    if outer_full not in self.widths:
                        raise _ElabError(inst_line,
                                         f"undeclared identifier {wired.name!r}")
                    self._add_wire(outer_full, ast.Id(full), inst_line)
        for extra in (conn or {}):
            if extra not in port_dirs:
                raise _ElabError(inst_line,
                                 f"no port {extra!r} on module {module_name!r}")

        for a in m.assigns:
            if a.sel is not None:
                raise _ElabError(a.line, "part-select on continuous assign target",
                                 DiagCode.UNSUPPORTED)
            full = f"{prefix}.{a.target}"
            if full not in self.widths:
                raise _ElabError(a.line, f"undeclared identifier {a.target!r}")
            if full in self.reg_names:
                raise _ElabError(a.line,
                                 f"continuous assign to register {a.target!r}")
            rhs = self._prefix_expr(a.rhs, prefix, env, a.line)
            self._add_wire(full, rhs, a.line)
            self.guards[a.stmt_id] = TRUE  # continuous assigns run every cycle

        for b in m.always_blocks:
            self.always_units.append((prefix, m, b, env))

        for inst in m.instances:
            self.walk(inst.module, f"{prefix}.{inst.name}", dict(inst.params),
                      inst.ports, prefix, env, inst.line)

    def _add_wire(self, full: str, rhs: ast.Expr, line: int) -> None:
        if full in self.wire_defs:
            raise _ElabError(line, f"multiple drivers for {full!r}",
                             DiagCode.DUPLICATE)
        if full in self.reg_names:
            raise _ElabError(line, f"wire connection drives register {full!r}")
        self.wire_defs[full] = rhs
        self.wire_lines[full] = line

    # -- always-block symbolic execution -------------------------------------

    def exec_always(self, prefix: str, m: ast.ModuleDecl, block: ast.AlwaysBlock,
                    env: dict[str, int]) -> None:
        clk_full = self._resolve_clock(prefix, block)
        if self.clock is None:
            self.clock = clk_full
        elif self.clock != clk_full:
            raise _ElabError(block.line,
                             f"multiple clocks: {self.clock!r} and {clk_full!r}",
                             DiagCode.MULTICLOCK)

        blocking_env: dict[str, ast.Expr] = {}
        pending: dict[str, ast.Expr] = {}
        seen_blocking: set[str] = set()
        seen_nonblocking: set[str] = set()

        def subst(e: ast.Expr) -> ast.Expr:
            return _subst_names(e, blocking_env, self.widths)

        def current(name: str) -> ast.Expr:
            return blocking_env.get(name, ast.Id(name))

        def run(stmts: list[ast.AlwaysStmt], guard: ast.Expr | None) -> None:
            nonlocal blocking_env, pending
            for stmt in stmts:
                if isinstance(stmt, ast.SeqAssign):
                    full = f"{prefix}.{stmt.target}"
                    if full not in self.reg_names:
                        if full not in self.widths:
                            raise _ElabError(stmt.line,
                                             f"undeclared identifier {stmt.target!r}")
                        raise _ElabError(stmt.line,
                                         f"always-block assignment to non-register {stmt.target!r}")
                    rhs = subst(self._prefix_expr(stmt.rhs, prefix, env, stmt.line))
                    if stmt.sel is not None:
                        hi = eval_const(stmt.sel[0], env)
                        lo = eval_const(stmt.sel[1], env)
                        rhs = _splice(current(full) if stmt.blocking else
                                      pending.get(full, ast.Id(full)),
                                      rhs, hi, lo, self.widths[full])
                    g = guard if guard is not None else TRUE
                    self.guards[stmt.stmt_id] = _or(self.guards.get(stmt.stmt_id), g)
                    if stmt.blocking:
                        if full in seen_nonblocking:
                            raise _ElabError(stmt.line,
                                             f"mixed blocking/non-blocking assignment to {stmt.target!r}",
                                             DiagCode.DUPLICATE)
                        seen_blocking.add(full)
                        blocking_env[full] = rhs
                    else:
                        if full in seen_blocking:
                            raise _ElabError(stmt.line,
                                             f"mixed blocking/non-blocking assignment to {stmt.target!r}",
                                             DiagCode.DUPLICATE)
                        seen_nonblocking.add(full)
                        pending[full] = rhs
                elif isinstance(stmt, ast.IfStmt):
                    cond = subst(self._prefix_expr(stmt.cond, prefix, env, stmt.line))
                    then_guard = _and(guard, cond)
                    self.guards[stmt.then_id] = _or(self.guards.get(stmt.then_id), then_guard)
                    saved_env, saved_pending = dict(blocking_env), dict(pending)
                    run(stmt.then_body, then_guard)
                    t_env, t_pending = blocking_env, pending
                    blocking_env, pending = dict(saved_env), dict(saved_pending)
                    if stmt.else_body is not None:
                        else_guard = _and(guard, ast.Unary("!", cond))
                        self.guards[stmt.else_id] = _or(self.guards.get(stmt.else_id), else_guard)
                        run(stmt.else_body, else_guard)
                    e_env, e_pending = blocking_env, pending
                    blocking_env = _merge(cond, t_env, e_env)
                    pending = _merge(cond, t_pending, e_pending)
                elif isinstance(stmt, ast.CaseStmt):
                    subj = subst(self._prefix_expr(stmt.subject, prefix, env, stmt.line))
                    run_arms(stmt.arms, subj, guard, None)
                else:
                    raise _ElabError(getattr(stmt, "line", block.line),
                                     f"unsupported statement {stmt!r}",
                                     DiagCode.UNSUPPORTED)

        def run_arms(arms: list[ast.CaseArm], subj: ast.Expr,
                     guard: ast.Expr | None, prior: ast.Expr | None) -> None:
            """Chained if/else over the remaining case arms (priority order)."""
            nonlocal blocking_env, pending
            if not arms:
                return
            arm = arms[0]
            if arm.labels is None:
                eq_cond = TRUE
            else:
                eq_cond = None
                for lab in arm.labels:
                    lab_p = self._prefix_expr(lab, prefix, env, arm.line)
                    eq = ast.Binary("==", subj, lab_p)
                    eq_cond = eq if eq_cond is None else ast.Binary("||", eq_cond, eq)
            # Recorded guard reflects priority: no earlier arm matched.
            pri = eq_cond if prior is None else \
                ast.Binary("&&", ast.Unary("!", prior), eq_cond)
            arm_guard = _and(guard, pri)
            self.guards[arm.arm_id] = _or(self.guards.get(arm.arm_id), arm_guard)
            saved_env, saved_pending = dict(blocking_env), dict(pending)
            run(arm.body, arm_guard)
            t_env, t_pending = blocking_env, pending
            blocking_env, pending = dict(saved_env), dict(saved_pending)
            next_prior = eq_cond if prior is None else ast.Binary("||", prior, eq_cond)
            run_arms(arms[1:], subj, guard, next_prior)
            e_env, e_pending = blocking_env, pending
            blocking_env = _merge(eq_cond, t_env, e_env)
            pending = _merge(eq_cond, t_pending, e_pending)

        run(block.body, None)

        for full, e in pending.items():
            if full in self.next_state:
                raise _ElabError(block.line,
                                 f"register {full!r} assigned in multiple always blocks",
                                 DiagCode.DUPLICATE)
            self.next_state[full] = e
        for full, e in blocking_env.items():
            if full in seen_nonblocking:
                continue
            if full in self.next_state:
                raise _ElabError(block.line,
                                 f"register {full!r} assigned in multiple always blocks",
                                 DiagCode.DUPLICATE)
            self.next_state[full] = e

        self._extract_init(prefix, block, env)

    def _resolve_clock(self, prefix: str, block: ast.AlwaysBlock) -> str:
        full = f"{prefix}.{block.clock}"
        seen = set()
        while full in self.wire_defs and isinstance(self.wire_defs[full], ast.Id):
            if full in seen:
                raise _ElabError(block.line, f"clock alias cycle at {full!r}",
                                 DiagCode.CYCLE)
            seen.add(full)
            full = self.wire_defs[full].name
        if full not in self.input_names:
            raise _ElabError(block.line,
                             f"clock {block.clock!r} does not resolve to a top-level input")
        return full

    def _extract_init(self, prefix: str, block: ast.AlwaysBlock,
                      env: dict[str, int]) -> None:
        # Reset idiom: single top-level `if` whose then-branch assigns only
        # constants. Those constants become init values; the branch itself
        # stays in the transition function, so semantics are unaffected.
        body = block.body
        if len(body) != 1 or not isinstance(body[0], ast.IfStmt):
            return
        top_if = body[0]
        for stmt in top_if.then_body:
            if not isinstance(stmt, ast.SeqAssign) or stmt.sel is not None:
                return
        for stmt in top_if.then_body:
            try:
                value = eval_const(self._prefix_expr(stmt.rhs, prefix, env, stmt.line), {})
            except (ParseError, _ElabError):
                return
            full = f"{prefix}.{stmt.target}"
            if full in self.reg_names:
                self.init[full] = mask(value, self.widths[full])

    # -- wire closure ---------------------------------------------------------

    def close_wires(self) -> None:
        order: list[str] = []
        perm: set[str] = set()
        temp: list[str] = []

        def visit(w: str) -> None:
            if w in perm:
                return
            if w in temp:
                cycle = temp[temp.index(w):] + [w]
                raise _ElabError(self.wire_lines.get(w, 0),
                                 "combinational cycle: " + " -> ".join(cycle),
                                 DiagCode.CYCLE)
            temp.append(w)
            for name in sorted(ast.expr_ids(self.wire_defs[w])):
                if name in self.wire_defs:
                    visit(name)
                elif name not in self.reg_names and name not in self.input_names:
                    raise _ElabError(self.wire_lines.get(w, 0),
                                     f"undriven net {name!r} referenced by {w!r}")
            temp.pop()
            perm.add(w)
            order.append(w)

        for w in sorted(self.wire_defs):
            visit(w)
        inlined: dict[str, ast.Expr] = {}
        for w in order:
            inlined[w] = _subst_names(self.wire_defs[w], inlined, self.widths)
        self.wire_defs = inlined


def _seq_targets(body: list[ast.AlwaysStmt]):
    for stmt in body:
        if isinstance(stmt, ast.SeqAssign):
            yield stmt.target
        elif isinstance(stmt, ast.IfStmt):
            yield from _seq_targets(stmt.then_body)
            yield from _seq_targets(stmt.else_body or [])
        elif isinstance(stmt, ast.CaseStmt):
            for arm in stmt.arms:
                yield from _seq_targets(arm.body)


def _and(a: ast.Expr | None, b: ast.Expr) -> ast.Expr:
    return b if a is None else ast.Binary("&&", a, b)


def _or(a: ast.Expr | None, b: ast.Expr) -> ast.Expr:
    return b if a is None else ast.Binary("||", a, b)


def _merge(cond: ast.Expr, then_map: dict[str, ast.Expr],
           else_map: dict[str, ast.Expr]) -> dict[str, ast.Expr]:
    out: dict[str, ast.Expr] = {}
    for key in sorted(then_map.keys() | else_map.keys()):
        t = then_map.get(key, ast.Id(key))
        e = else_map.get(key, ast.Id(key))
        out[key] = t if t == e else ast.Ternary(cond, t, e)
    return out


def _splice(base: ast.Expr, rhs: ast.Expr, hi: int, lo: int, width: int) -> ast.Expr:
    """Read-modify-write for a part-select assignment target."""
    parts: list[ast.Expr] = []
    if hi + 1 < width:
        parts.append(ast.SliceX(base, width - 1, hi + 1))
    parts.append(rhs)
    if lo > 0:
        parts.append(ast.SliceX(base, lo - 1, 0))
    if len(parts) == 1:
        return parts[0]
    return ast.Concat(tuple(parts))


def elaborate(model: ast.DesignModel, top: str,
              overrides: dict[str, int] | None = None):
    """Flatten the hierarchy under `top`.

    Returns NetModel on success, Diagnostics on any error.
    """
    diags = Diagnostics()
    if model.module(top) is None:
        diags.error(0, 0, f"top module {top!r} not found", DiagCode.UNRESOLVED)
        return diags
    el = _Elaborator(model, diags)
    try:
        el.walk(top, top, dict(overrides or {}), None, None, None, 0)
        for prefix, m, block, env in el.always_units:
            el.exec_always(prefix, m, block, env)
        el.close_wires()
    except _ElabError as ee:
        diags.error(ee.line, 0, ee.message, ee.code)
        return diags

    # Registers never assigned a next value hold their current value.
    for full, _w in el.regs:
        el.next_state.setdefault(full, ast.Id(full))
        el.init.setdefault(full, 0)

    # Inline wires into next-state functions and guards; drop the clock from
    # enumerable inputs.
    next_state = {r: _subst_names(e, el.wire_defs, el.widths)
                  for r, e in el.next_state.items()}
    guards = {sid: _subst_names(g, el.wire_defs, el.widths)
              for sid, g in el.guards.items()}
    # Statements in modules never instantiated under `top` cannot execute.
    for s in model.statements:
        guards.setdefault(s.id, ast.Lit(0, 1))
    inputs = [(n, w) for n, w in el.inputs if n != el.clock]

    net = NetModel(
        top=top,
        clock=el.clock,
        state_bits=list(el.regs),
        inputs=inputs,
        next_state=next_state,
        init={r: el.init[r] for r, _ in el.regs},
        comb=el.wire_defs,
        statement_guards=guards,
        widths=dict(el.widths),
    )

    # Width discipline: every expression must carry a consistent width.
    try:
        for r, w in net.state_bits:
            ew = width_of(net.next_state[r], net.widths)
            if ew is not None and ew != w:
                raise WidthError(
                    f"next-state width mismatch for {r!r}: {ew} vs {w}")
        for name, e in net.comb.items():
            ew = width_of(e, net.widths)
            if ew is not None and ew != net.widths[name]:
                raise WidthError(
                    f"width mismatch for {name!r}: {ew} vs {net.widths[name]}")
        for sid, g in net.statement_guards.items():
            width_of(g, net.widths)
    except WidthError as werr:
        diags.error(0, 0, werr.message, DiagCode.WIDTH)
        return diags
    return net
