"""Depth-first outermost rewrite engine.

The configuration tree is never materialised.  A stack holds the path from
the root configuration to the configuration being explored; each frame keeps
the subterm at its configuration position and the offset relative to its
parent, so frames stay small and absolute positions are never stored.

After a rewrite the engine pops back to the frame that observed the
rewritten position (found through a precomputed depth table, see
:func:`constant_time_prune_support`) and re-grows that frame on the new
subterm.  Frames below it are updated lazily: a frame that changed pushes its
subterm into its parent when it is popped.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Tuple

from .automaton import DependencyKind, Goal, SetAutomaton
from .errors import InternalInconsistencyError, StepLimitError
from .terms import (
    Position,
    ROOT,
    Term,
    apply_substitution,
    format_term,
    iter_positions,
    match_root,
    position_key,
    replace_at,
    subterm_at,
)
from .trs import Rule, is_duplicating
from .rewriter import DEFAULT_MAX_STEPS, find_redex

__all__ = [
    "EngineCounters",
    "StackEngine",
    "constant_time_prune_support",
    "is_duplicating",
    "rewrite_outermost",
]

_AMBIGUOUS = -1


def constant_time_prune_support(a: SetAutomaton) -> Dict[Tuple[int, str], Tuple[Optional[int], ...]]:
    """How many stack frames separate each output from its initialisation frame.

    For every ``(state, symbol)`` the result lists, in the order of
    ``transition.outputs``, the number of symbols inspected from the head
    observation of the announced redex up to and including the observation
    that completes it.  ``None`` marks an entry that differs between paths
    through the automaton; the engine then searches the stack instead.

    The table is a fixpoint over per-goal inspection counters.
    """
    patterns = a.patterns
    if a.goal_flow is None:
        raise ValueError("automaton was built without goal flow information")
    moves = [m for m, _ in a.goal_flow]
    finals = [f for _, f in a.goal_flow]
    # counters[s][goal]: inspections since the goal's head was observed.
    # Each entry moves up the lattice unknown < one value < ambiguous at most twice.
    counters: List[Dict[Goal, int]] = [dict() for _ in a.states]
    depths: Dict[Tuple[int, str, int, Position], int] = {}
    todo = []

    def feed(s, g, val):
        nxt = _inc(val)
        for name in finals[s].get(g, ()):
            key = (s, name, g.pattern, g.position)
            depths[key] = _join(depths.get(key), nxt)
        for target, lg in moves[s].get(g, ()):
            if lg.is_fresh(patterns):
                continue  # still unobserved
            tc = counters[target]
            cur = tc.get(lg)
            new = _join(cur, nxt)
            if new != cur:
                tc[lg] = new
                todo.append((target, lg))

    for s, st in enumerate(a.states):
        for g in st.goals:
            if g.is_fresh(patterns):
                feed(s, g, 0)
    while todo:
        s, g = todo.pop()
        feed(s, g, counters[s][g])
    table = {}
    for s, row in enumerate(a.delta):
        for name, tr in row.items():
            if not tr.outputs:
                continue
            out = []
            for rule, q in tr.outputs:
                d = depths.get((s, name, patterns.index(rule.lhs), q))
                out.append(None if d is None or d == _AMBIGUOUS else d)
            table[(s, name)] = tuple(out)
    return table


def _join(cur, val):
    if cur is None or cur == val:
        return val
    return _AMBIGUOUS


def _inc(c):
    return _AMBIGUOUS if c == _AMBIGUOUS else c + 1


@dataclass
class EngineCounters:
    rewrite_steps: int = 0
    symbol_inspections: int = 0
    consistency_checks: int = 0

    def as_dict(self) -> dict:
        return {
            "rewrite_steps": self.rewrite_steps,
            "symbol_inspections": self.symbol_inspections,
            "consistency_checks": self.consistency_checks,
        }


class _Frame:
    __slots__ = ("state", "subterm", "offset", "branches", "cursor", "changed")

    def __init__(self, state, subterm, offset):
        self.state = state
        self.subterm = subterm
        self.offset = offset
        self.branches = None  # None: not yet grown (a bud)
        self.cursor = 0
        self.changed = False


class _Parked(NamedTuple):
    frame: int
    rule: Rule
    rel: Position  # redex position relative to the discovering frame
    depth: Optional[int]
    nonlinear: bool
    consistent: bool  # verdict at parking time (non-linear entries)
    steps: int  # rewrite steps done when parked


class StackEngine:
    """Reusable engine for one automaton built with the outermost relation."""

    def __init__(self, a: SetAutomaton, *, max_steps: int = DEFAULT_MAX_STEPS, debug: bool = False):
        if a.relation != DependencyKind.OUTERMOST:
            raise ValueError("the stack engine needs an automaton built with the outermost relation")
        self.a = a
        self.pool = a.trs.pool
        self.max_steps = max_steps
        self.debug = debug
        self.depths = constant_time_prune_support(a)
        self._duplicating = {r.id: is_duplicating(r) for r in a.trs.rules}
        self._dup_vars = {r.id: _duplicated_vars(r) for r in a.trs.rules}
        # per (state, symbol): outputs sorted outermost first, with their depths
        self._outputs = {}
        for s, row in enumerate(a.delta):
            for name, tr in row.items():
                if not tr.outputs:
                    continue
                ds = self.depths[(s, name)]
                n_lin = len(tr.out_linear)
                items = [(r, q, d, k >= n_lin) for k, ((r, q), d) in enumerate(zip(tr.outputs, ds))]
                items.sort(key=lambda it: (position_key(it[1]), it[0].id))
                self._outputs[(s, name)] = items

    def rewrite(self, t0: Term, *, trace: Optional[list] = None) -> Tuple[Term, EngineCounters]:
        a = self.a
        labels = a.labels
        delta = a.delta
        counters = EngineCounters()
        self._counters = counters
        self._trace = trace
        stack: List[_Frame] = [_Frame(a.initial, t0, ROOT)]
        self._stack = stack
        parked: List[_Parked] = []
        self._parked = parked
        result = t0
        while stack:
            top = stack[-1]
            if top.branches is None:
                s = top.state
                L = labels[s]
                u = top.subterm if not L else subterm_at(top.subterm, L)
                counters.symbol_inspections += 1
                name = u.symbol.name
                tr = delta[s][name]
                top.branches = tr.branches
                top.cursor = 0
                if trace is not None:
                    trace.append({"kind": "grow", "state": s, "position": self._config_position(len(stack) - 1),
                                  "symbol": name})
                if tr.outputs:
                    self._on_outputs(len(stack) - 1, self._outputs[(s, name)])
                continue
            if top.cursor < len(top.branches):
                target, off = top.branches[top.cursor]
                top.cursor += 1
                stack.append(_Frame(target, top.subterm if not off else subterm_at(top.subterm, off), off))
                continue
            i = len(stack) - 1
            if parked and parked[-1].frame == i and self._fire_parked(i):
                continue
            stack.pop()
            if stack:
                if top.changed:
                    parent = stack[-1]
                    parent.subterm = replace_at(self.pool, parent.subterm, top.offset, top.subterm)
                    parent.changed = True
            else:
                result = top.subterm
        if self.debug and find_redex(a.trs, result) is not None:
            raise InternalInconsistencyError("engine returned a term that still has a redex")
        return result, counters

    # -- outputs and the strategy stack ---------------------------------------

    def _on_outputs(self, i: int, items) -> bool:
        """Handle the outputs of frame ``i``; True if a rewrite happened."""
        frame = self._stack[i]
        for rule, q, depth, nonlinear in items:
            dup = self._duplicating[rule.id]
            if nonlinear:
                self._counters.consistency_checks += 1
                sub = frame.subterm if not q else subterm_at(frame.subterm, q)
                ok = match_root(rule.lhs, sub) is not None
                if not ok or dup:
                    self._park(i, rule, q, depth, True, ok)
                    continue
            elif dup:
                self._park(i, rule, q, depth, False, True)
                continue
            if self._apply(i, rule, q, depth):
                return True
            raise InternalInconsistencyError(f"announced redex {rule.name} does not match")
        return False

    def _park(self, i, rule, q, depth, nonlinear, consistent):
        self._parked.append(_Parked(i, rule, q, depth, nonlinear, consistent, self._counters.rewrite_steps))
        if self._trace is not None:
            self._trace.append({"kind": "park", "rule": rule.id,
                                "position": self._config_position(i) + q})

    def _fire_parked(self, i: int) -> bool:
        parked = self._parked
        mine = []
        while parked and parked[-1].frame == i:
            mine.append(parked.pop())
        mine.sort(key=lambda e: (position_key(e.rel), e.rule.id))
        for e in mine:
            if e.nonlinear:
                # no rewrite since parking means nothing below changed
                if e.steps == self._counters.rewrite_steps:
                    if not e.consistent:
                        continue
                else:
                    self._counters.consistency_checks += 1
            if self._apply(i, e.rule, e.rel, e.depth, check_duplication=not e.nonlinear):
                return True
            if not e.nonlinear:
                raise InternalInconsistencyError(f"parked redex {e.rule.name} no longer matches")
        return False

    def _init_frame(self, i: int, rel: Position, depth: Optional[int]) -> int:
        """Index of the frame that observed the redex at ``rel`` below frame ``i``."""
        if depth is not None and not self.debug:
            return i - depth + 1
        stack = self._stack
        labels = self.a.labels
        j = i
        while j >= 0:
            f = stack[j]
            if labels[f.state] == rel:
                break
            rel = f.offset + rel
            j -= 1
        else:
            raise InternalInconsistencyError("no frame observes the rewritten position")
        if depth is not None and j != i - depth + 1:
            raise InternalInconsistencyError(f"depth table says frame {i - depth + 1}, stack says {j}")
        return j

    def _apply(self, i: int, rule: Rule, rel: Position, depth: Optional[int], *,
               check_duplication: bool = False) -> bool:
        stack = self._stack
        j = self._init_frame(i, rel, depth)
        for k in range(i, j, -1):
            f = stack[k]
            if f.changed:
                parent = stack[k - 1]
                parent.subterm = replace_at(self.pool, parent.subterm, f.offset, f.subterm)
                parent.changed = True
        init = stack[j]
        L = self.a.labels[init.state]
        sub = init.subterm if not L else subterm_at(init.subterm, L)
        sigma = match_root(rule.lhs, sub)
        if sigma is None:
            return False
        counters = self._counters
        if counters.rewrite_steps >= self.max_steps:
            raise StepLimitError(self.max_steps, sub)
        if check_duplication and self.debug:
            for v in self._dup_vars[rule.id]:
                if find_redex(self.a.trs, sigma[v]) is not None:
                    raise InternalInconsistencyError(
                        f"duplicating {rule.name} fired with a reducible argument {format_term(sigma[v])}"
                    )
        new = apply_substitution(self.pool, rule.rhs, sigma)
        init.subterm = new if not L else replace_at(self.pool, init.subterm, L, new)
        init.changed = True
        init.branches = None
        init.cursor = 0
        del stack[j + 1:]
        parked = self._parked
        while parked and parked[-1].frame >= j:
            parked.pop()
        counters.rewrite_steps += 1
        if self._trace is not None:
            self._trace.append({"kind": "reduce", "rule": rule.id,
                                "position": self._config_position(j) + L})
        return True

    def _config_position(self, i: int) -> Position:
        pos: Tuple[int, ...] = ()
        for f in self._stack[1: i + 1]:
            pos += f.offset
        return pos


def _duplicated_vars(rule: Rule):
    lhs = Counter(u for _, u in iter_positions(rule.lhs) if u.is_var)
    rhs = Counter(u for _, u in iter_positions(rule.rhs) if u.is_var)
    return [v for v, n in rhs.items() if n > lhs[v]]


def rewrite_outermost(a: SetAutomaton, t0: Term, *, max_steps: int = DEFAULT_MAX_STEPS,
                      debug: bool = False, trace: Optional[list] = None) -> Tuple[Term, EngineCounters]:
    return StackEngine(a, max_steps=max_steps, debug=debug).rewrite(t0, trace=trace)
