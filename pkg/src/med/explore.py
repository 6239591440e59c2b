"""Breadth-first state-space construction and the analysis facets built on
it: invariant checking, deadlock detection with minimal counterexample
traces, and coverage statistics.

States are deduplicated by canonical equality and numbered in BFS
discovery order, with events taken in declaration order and bindings in
canonical order, so two runs (with any worker count) produce identical
graphs.  A state is deadlocked iff no event has any enabled binding there.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .evaluate import EvalError, eval_pred
from .events import AbstractSystem, enabled_bindings, fire, initial_state
from .values import Scope, State, Value

Binding = tuple[tuple[str, Value], ...]


class ExplorationError(Exception):
    """Evaluation failure inside a guard, action or the invariant; carries
    the offending state."""

    def __init__(self, message: str, state: State):
        super().__init__(message)
        self.state = state


@dataclass
class StateGraph:
    system: AbstractSystem
    scope: Scope
    fresh: bool
    states: list[State] = field(default_factory=list)
    init_ids: list[int] = field(default_factory=list)
    transitions: list[tuple[int, str, Binding, int]] = field(default_factory=list)
    parents: list[Optional[tuple[int, str, Binding]]] = field(default_factory=list)
    depth: list[int] = field(default_factory=list)
    deadlocked: list[bool] = field(default_factory=list)
    violated: list[bool] = field(default_factory=list)
    truncated: bool = False

    def successors(self, sid: int):
        # Grouped lazily; exploration itself appends in discovery order.
        if not hasattr(self, "_succ"):
            succ: list[list[tuple[str, Binding, int]]] = [[] for _ in self.states]
            for s, ev, b, d in self.transitions:
                succ[s].append((ev, b, d))
            self._succ = succ
        return self._succ[sid]

    def enabled_events(self, sid: int) -> frozenset[str]:
        return frozenset(ev for ev, _, _ in self.successors(sid))


@dataclass(frozen=True)
class Trace:
    """Path from an initial state; states has one more entry than steps.

    kind is 'deadlock', 'violation', 'lasso' or 'prefix'; loopback indexes
    the state a lasso returns to.
    """
    states: tuple[State, ...]
    steps: tuple[tuple[str, Binding], ...]
    kind: str
    loopback: Optional[int] = None


@dataclass
class CoverageReport:
    live_states: int
    deadlocked_states: int
    invariant_violations: int
    transitions: int
    covered: dict[str, int]
    uncovered: list[str]


def _expand_state(system, state, fresh):
    """Pure successor computation: [(event name, binding, post-state)],
    in declaration x canonical binding order."""
    out = []
    for ev in system.events:
        for env in enabled_bindings(ev, state, fresh=fresh):
            binding = tuple(env.items())
            out.append((ev.name, binding, fire(ev, env, state)))
    return out


def explore(
    system: AbstractSystem,
    scope: Scope,
    *,
    max_states: int = 500_000,
    max_depth: Optional[int] = None,
    fresh: bool = True,
    workers: int = 1,
) -> StateGraph:
    """Build the reachable graph from the initialisation.

    Stops early (marking the graph truncated) when `max_states` stored
    states or `max_depth` steps are reached.  The invariant is evaluated
    on every stored state; violating states are flagged but still
    expanded.  Worker count never changes the result.
    """
    graph = StateGraph(system, scope, fresh)
    init = initial_state(system, scope)

    index: dict[State, int] = {}

    def add_state(st: State, depth: int, parent):
        sid = len(graph.states)
        graph.states.append(st)
        graph.depth.append(depth)
        graph.parents.append(parent)
        graph.deadlocked.append(False)
        try:
            graph.violated.append(not eval_pred(system.invariant, {}, st))
        except EvalError as e:
            raise ExplorationError(f"invariant evaluation failed: {e}", st) from e
        index[st] = sid
        return sid

    add_state(init, 0, None)
    graph.init_ids = [0]

    frontier = [0]
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while frontier and not graph.truncated:
            layer_depth = graph.depth[frontier[0]]
            if max_depth is not None and layer_depth >= max_depth:
                graph.truncated = True
                break

            def job(sid):
                st = graph.states[sid]
                try:
                    return _expand_state(system, st, fresh)
                except EvalError as e:
                    raise ExplorationError(
                        f"evaluation failed while expanding state {sid}: {e}", st
                    ) from e

            if pool is not None:
                results = list(pool.map(job, frontier))
            else:
                results = [job(sid) for sid in frontier]

            next_frontier: list[int] = []
            for sid, succs in zip(frontier, results):
                graph.deadlocked[sid] = not succs
                for ev_name, binding, post in succs:
                    did = index.get(post)
                    if did is None:
                        if len(graph.states) >= max_states:
                            graph.truncated = True
                            continue
                        did = add_state(
                            post, graph.depth[sid] + 1, (sid, ev_name, binding)
                        )
                        next_frontier.append(did)
                    graph.transitions.append((sid, ev_name, binding, did))
            frontier = next_frontier
    finally:
        if pool is not None:
            pool.shutdown()
    return graph


def build_trace(graph: StateGraph, sid: int, kind: str) -> Trace:
    """Minimal path to `sid` via BFS parent pointers."""
    rev_states = [graph.states[sid]]
    rev_steps: list[tuple[str, Binding]] = []
    cur = sid
    while graph.parents[cur] is not None:
        src, ev, binding = graph.parents[cur]
        rev_steps.append((ev, binding))
        rev_states.append(graph.states[src])
        cur = src
    return Trace(
        states=tuple(reversed(rev_states)),
        steps=tuple(reversed(rev_steps)),
        kind=kind,
    )


def find_invariant_violation(graph: StateGraph) -> Optional[Trace]:
    """Minimum-length trace to a violating state, or None.

    Discovery order is BFS order, so the smallest flagged id is in the
    earliest possible layer; ties break on discovery order.
    """
    for sid, bad in enumerate(graph.violated):
        if bad:
            return build_trace(graph, sid, "violation")
    return None


def find_deadlocks(graph: StateGraph, max_counterexamples: int = 5) -> list[Trace]:
    """One minimal trace per deadlocked state, capped."""
    out = []
    for sid, dead in enumerate(graph.deadlocked):
        if dead:
            out.append(build_trace(graph, sid, "deadlock"))
            if len(out) >= max_counterexamples:
                break
    return out


def coverage(graph: StateGraph) -> CoverageReport:
    counts = {ev.name: 0 for ev in graph.system.events}
    for _, ev_name, _, _ in graph.transitions:
        counts[ev_name] += 1
    deadlocked = sum(graph.deadlocked)
    return CoverageReport(
        live_states=len(graph.states) - deadlocked,
        deadlocked_states=deadlocked,
        invariant_violations=sum(graph.violated),
        transitions=len(graph.transitions),
        covered={n: c for n, c in counts.items() if c > 0},
        uncovered=[n for n, c in counts.items() if c == 0],
    )
