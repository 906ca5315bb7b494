"""Explicit-state property checking over the (state x monitor) product.

Breadth-first from the reset state with inputs enumerated name-sorted,
values ascending, so the first counterexample found is the shortest and,
among equals, the lexicographically least input sequence. "Proven" means
the reachable product closed within budget; otherwise the verdict is
"bounded" with the deepest completed cycle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from verikg.ir.types import FormalResult, ResultStatus
from verikg.rtl.elaborate import NetModel
from verikg.sva import ast as S
from verikg.engine.monitor import Monitor


class EngineError(Exception):
    pass


@dataclass
class CheckConfig:
    max_states: int = 1 << 20
    max_depth: int = 64
    input_assumptions: list[S.BoundProperty] = field(default_factory=list)

    def validate(self) -> None:
        if self.max_states <= 0 or self.max_depth <= 0:
            raise EngineError("budgets must be positive")


@dataclass
class CexTrace:
    prop_id: str
    cycles: list[tuple[dict[str, int], dict[str, int]]]  # (inputs, state) per cycle
    failure_cycle: int
    violated_at_line: int

    def replay_states(self, net: NetModel) -> list[tuple[int, ...]]:
        """Re-simulate the recorded inputs; used by the replay invariant."""
        state = net.init_state()
        out = [state]
        order = [n for n, _ in net.inputs]
        for inputs, _recorded in self.cycles[:-1]:
            state = net.step(state, tuple(inputs[n] for n in order))
            out.append(state)
        return out


class _InputSpace:
    def __init__(self, net: NetModel):
        self.sorted_names = sorted(n for n, _ in net.inputs)
        widths = dict(net.inputs)
        self.vectors = [
            tuple(vec)
            for vec in itertools.product(
                *[range(1 << widths[n]) for n in self.sorted_names])
        ]
        order = [n for n, _ in net.inputs]
        self.net_order_index = [self.sorted_names.index(n) for n in order]

    def values(self, net: NetModel, state: tuple, vec: tuple) -> dict[str, int]:
        v = {name: state[i] for i, (name, _) in enumerate(net.state_bits)}
        for name, x in zip(self.sorted_names, vec):
            v[name] = x
        return v

    def net_inputs(self, vec: tuple) -> tuple:
        return tuple(vec[i] for i in self.net_order_index)

    def as_dict(self, vec: tuple) -> dict[str, int]:
        return dict(zip(self.sorted_names, vec))


@dataclass
class _Exploration:
    status: ResultStatus
    proof_depth: int | None
    explored: int
    ante_matched: bool
    trace: CexTrace | None
    witness: CexTrace | None


def _explore(net: NetModel, target: Monitor | None, assumptions: list[Monitor],
             cfg: CheckConfig, prop_id: str, line: int,
             stop_on: str, guard_hook=None) -> _Exploration:
    """Shared BFS. stop_on: 'violation' (assert/assume) or 'completion'
    (cover). guard_hook(values) is called for every admitted valuation."""
    space = _InputSpace(net)
    init_design = net.init_state()
    init_monitors = tuple(m.initial() for m in ([target] if target else []) + assumptions)
    init_node = (init_design, init_monitors)

    visited = {init_node}
    parents: dict = {init_node: None}
    frontier = [init_node]
    depth = 0
    ante_matched = False
    deepest = 0

    def reconstruct(node, vec, cycle) -> CexTrace:
        chain = []
        cur = node
        while parents[cur] is not None:
            parent, pvec = parents[cur]
            chain.append((parent, pvec))
            cur = parent
        chain.reverse()
        cycles = [(space.as_dict(pv), _state_dict(net, pn[0])) for pn, pv in chain]
        cycles.append((space.as_dict(vec), _state_dict(net, node[0])))
        return CexTrace(prop_id, cycles, cycle, line)

    while frontier:
        if depth >= cfg.max_depth:
            return _Exploration(ResultStatus.BOUNDED, depth - 1, len(visited),
                                ante_matched, None, None)
        next_frontier = []
        for node in frontier:
            design_state, monitor_states = node
            n_target = 1 if target else 0
            for vec in space.vectors:
                values = space.values(net, design_state, vec)
                # assumptions prune the branch before the target sees it
                new_assume = []
                pruned = False
                for mi, mon in enumerate(assumptions):
                    mstate = monitor_states[n_target + mi]
                    ns, ev = mon.step(mstate, values)
                    if ev.violated:
                        pruned = True
                        break
                    new_assume.append(ns)
                if pruned:
                    continue
                if guard_hook is not None:
                    guard_hook(values)
                new_target = ()
                if target is not None:
                    tstate, ev = target.step(monitor_states[0], values)
                    if ev.ante_matched:
                        ante_matched = True
                    if stop_on == "violation" and ev.violated:
                        return _Exploration(
                            ResultStatus.CEX, depth, len(visited), ante_matched,
                            reconstruct(node, vec, depth), None)
                    if stop_on == "completion" and ev.completed:
                        return _Exploration(
                            ResultStatus.PROVEN, depth, len(visited), True,
                            None, reconstruct(node, vec, depth))
                    new_target = (tstate,)
                succ = (net.step(design_state, space.net_inputs(vec)),
                        new_target + tuple(new_assume))
                if succ not in visited:
                    visited.add(succ)
                    parents[succ] = (node, vec)
                    next_frontier.append(succ)
        deepest = depth
        depth += 1
        frontier = next_frontier
        # a closed product is a full proof even if the last layer nudged the
        # visited count past the budget
        if frontier and len(visited) > cfg.max_states:
            return _Exploration(ResultStatus.BOUNDED, deepest, len(visited),
                                ante_matched, None, None)
    return _Exploration(ResultStatus.PROVEN, deepest, len(visited),
                        ante_matched, None, None)


def _state_dict(net: NetModel, state: tuple) -> dict[str, int]:
    return {name: state[i] for i, (name, _) in enumerate(net.state_bits)}


def _bound_assumption_monitors(net: NetModel, cfg: CheckConfig) -> list[Monitor]:
    for a in cfg.input_assumptions:
        if a.kind != "assumption":
            raise EngineError(f"{a.prop_id}: input_assumptions must be kind=assumption")
    return [Monitor(a, net) for a in cfg.input_assumptions]


def check(net: NetModel, bp: S.BoundProperty, cfg: CheckConfig | None = None
          ) -> tuple[FormalResult, CexTrace | None]:
    """Check one assertion (or assumption treated as an obligation).

    Verdicts: cex with the minimal, lexicographically least trace; proven
    when the reachable product closed; vacuous when proven and the top-level
    implication's antecedent never matched; bounded when a budget ran out
    first. runtime_ms is the deterministic explored-state count.
    """
    cfg = cfg or CheckConfig()
    cfg.validate()
    if bp.kind == "cover":
        raise EngineError(f"{bp.prop_id}: use check_cover for cover properties")
    monitors = _bound_assumption_monitors(net, cfg)
    target = Monitor(bp, net)
    ex = _explore(net, target, monitors, cfg, bp.prop_id, bp.line, "violation")
    status = ex.status
    if status is ResultStatus.PROVEN and bp.impl is not S.ImplKind.NONE \
            and not ex.ante_matched:
        status = ResultStatus.VACUOUS
    result = FormalResult(
        result_id="",
        prop_id=bp.prop_id,
        status=status,
        proof_depth=ex.proof_depth if ex.trace is None else ex.trace.failure_cycle,
        runtime_ms=ex.explored,
    )
    return result, ex.trace


def check_cover(net: NetModel, bp: S.BoundProperty, cfg: CheckConfig | None = None
                ) -> tuple[FormalResult, CexTrace | None]:
    """Reachability of a cover sequence.

    proven with a witness trace when some reachable path satisfies it;
    vacuous when the fully explored reachable product contains no witness
    (an unsatisfiable cover); bounded when budgets ran out first.
    """
    cfg = cfg or CheckConfig()
    cfg.validate()
    if bp.kind != "cover":
        raise EngineError(f"{bp.prop_id}: check_cover requires a cover property")
    monitors = _bound_assumption_monitors(net, cfg)
    target = Monitor(bp, net)
    ex = _explore(net, target, monitors, cfg, bp.prop_id, bp.line, "completion")
    if ex.witness is not None:
        status = ResultStatus.PROVEN
        depth = ex.witness.failure_cycle
    elif ex.status is ResultStatus.PROVEN:
        status = ResultStatus.VACUOUS  # no reachable path satisfies the sequence
        depth = ex.proof_depth
    else:
        status = ResultStatus.BOUNDED
        depth = ex.proof_depth
    result = FormalResult(
        result_id="",
        prop_id=bp.prop_id,
        status=status,
        proof_depth=depth,
        runtime_ms=ex.explored,
    )
    return result, ex.witness


def check_many(net: NetModel, props: list[S.BoundProperty],
               cfg: CheckConfig | None = None
               ) -> list[tuple[FormalResult, CexTrace | None]]:
    """Check a batch; results merged in prop_id order regardless of any
    execution interleaving, so output is schedule-independent."""
    out = []
    for bp in sorted(props, key=lambda p: p.prop_id):
        if bp.kind == "cover":
            out.append(check_cover(net, bp, cfg))
        elif bp.kind == "assumption":
            continue
        else:
            out.append(check(net, bp, cfg))
    return out
