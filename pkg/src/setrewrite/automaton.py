"""Set automaton construction.

A state is a set of *match goals*.  A goal ``(k, q, mo)`` reads: to announce a
match of pattern ``k`` at relative position ``q`` it remains to observe every
subpattern ``pat`` at position ``p`` for ``(p, pat)`` in the obligation
``mo``.  Obligations are stored as tuples sorted by position, which makes
goals (and therefore states) canonical and hashable.

Transitions are computed by taking the f-derivative of a state, splitting it
into independent classes under a dependency relation, and lifting every class
by the greatest common prefix of its announcement positions.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from .errors import ConstructionError
from .terms import (
    Position,
    ROOT,
    Symbol,
    Term,
    format_position,
    format_term,
    greatest_common_prefix,
    position_key,
)
from .trs import Rule, Trs, is_linear

Obligation = Tuple[Tuple[Position, Term], ...]


class Goal(NamedTuple):
    pattern: int  # index into SetAutomaton.patterns
    position: Position  # announcement position
    obligation: Obligation

    @property
    def is_root(self) -> bool:
        return not self.position

    def is_fresh(self, patterns: Sequence[Term]) -> bool:
        return len(self.obligation) == 1 and self.obligation[0] == (self.position, patterns[self.pattern])


class DependencyKind(str, enum.Enum):
    STANDARD = "standard"
    OUTERMOST = "outermost"


def _goal_key(g: Goal):
    return (g.pattern, position_key(g.position), tuple((position_key(p), t.id) for p, t in g.obligation))


def _sorted_obligation(pairs: Iterable[Tuple[Position, Term]]) -> Obligation:
    return tuple(sorted(pairs, key=lambda pr: position_key(pr[0])))


def canonical_goals(goals: Iterable[Goal]) -> Tuple[Goal, ...]:
    return tuple(sorted(set(goals), key=_goal_key))


@dataclass(frozen=True)
class State:
    goals: Tuple[Goal, ...]
    label: Position


@dataclass(frozen=True)
class Transition:
    """Hypertransition for one (state, symbol): branches plus split outputs."""

    branches: Tuple[Tuple[int, Position], ...] = ()
    out_linear: Tuple[Tuple[Rule, Position], ...] = ()
    out_nonlinear: Tuple[Tuple[Rule, Position], ...] = ()

    @property
    def outputs(self) -> Tuple[Tuple[Rule, Position], ...]:
        return self.out_linear + self.out_nonlinear


EMPTY_TRANSITION = Transition()


# -- the three construction steps --------------------------------------------


def reduce(mo: Obligation, f: Symbol, p: Position) -> Obligation:
    """Reduce an obligation by observing ``f`` at ``p``.  ``()`` means done."""
    kept = [(q, l) for q, l in mo if q != p]
    for q, l in mo:
        if q == p:
            for i in range(1, f.arity + 1):
                child = l.args[i - 1]
                if not child.is_var:
                    kept.append((p + (i,), child))
    return _sorted_obligation(kept)


class Derivative(NamedTuple):
    reduced: List[Tuple[Goal, Goal]]  # (source goal, reduced goal)
    unchanged: List[Goal]
    fresh: List[Goal]
    completed: List[Goal]  # source goals whose obligation reduced to empty
    discarded: List[Goal]

    def goals(self) -> List[Goal]:
        return [g for _, g in self.reduced] + self.unchanged + self.fresh


def derivative(goals: Iterable[Goal], label: Position, f: Symbol, patterns: Sequence[Term]) -> Derivative:
    d = Derivative([], [], [], [], [])
    for g in goals:
        here = next((l for q, l in g.obligation if q == label), None)
        if here is None:
            d.unchanged.append(g)
        elif here.symbol != f:
            d.discarded.append(g)
        else:
            mo = reduce(g.obligation, f, label)
            if mo:
                d.reduced.append((g, Goal(g.pattern, g.position, mo)))
            else:
                d.completed.append(g)
    for i in range(1, f.arity + 1):
        q = label + (i,)
        for k, l in enumerate(patterns):
            d.fresh.append(Goal(k, q, ((q, l),)))
    return d


def partition(goals: Sequence[Goal], relation: DependencyKind = DependencyKind.STANDARD) -> List[List[Goal]]:
    """Classes of the transitive closure of the direct dependency relation."""
    parent = list(range(len(goals)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    seen: Dict[Position, int] = {}
    if relation == DependencyKind.STANDARD:
        for i, g in enumerate(goals):
            for q, _ in g.obligation:
                j = seen.setdefault(q, i)
                if j != i:
                    union(i, j)
    else:
        # comparable announcement positions: one of them is a prefix of the other
        for i, g in enumerate(goals):
            j = seen.setdefault(g.position, i)
            if j != i:
                union(i, j)
        for i, g in enumerate(goals):
            p = g.position
            for n in range(len(p)):
                j = seen.get(p[:n])
                if j is not None:
                    union(i, j)
    classes: Dict[int, List[Goal]] = {}
    for i, g in enumerate(goals):
        classes.setdefault(find(i), []).append(g)
    return list(classes.values())


def lift(goal_class: Sequence[Goal]) -> Tuple[Tuple[Goal, ...], Position]:
    """Strip the common prefix of the announcement positions from a class."""
    offset = greatest_common_prefix(g.position for g in goal_class)
    n = len(offset)
    if n == 0:
        return canonical_goals(goal_class), offset
    lifted = [
        Goal(g.pattern, g.position[n:], tuple((q[n:], l) for q, l in g.obligation)) for g in goal_class
    ]
    return canonical_goals(lifted), offset


def choose_label(goals: Iterable[Goal]) -> Position:
    """Largest obligation position (length, then indices) among root goals."""
    best = None
    for g in goals:
        if g.is_root:
            cand = g.obligation[-1][0]
            if best is None or position_key(cand) > position_key(best):
                best = cand
    if best is None:
        raise ConstructionError("state without a root goal")
    return best


# -- the automaton -----------------------------------------------------------


class SetAutomaton:
    """States, labels, total hypertransitions and split output functions.

    ``delta[s][name]`` is the :class:`Transition` for state ``s`` and the
    symbol called ``name``; it exists for every state and every symbol.
    """

    def __init__(self, trs: Trs, relation: DependencyKind, patterns: List[Term],
                 states: List[State], delta: List[Dict[str, Transition]]):
        self.trs = trs
        self.relation = DependencyKind(relation)
        self.patterns = patterns
        self.states = states
        self.delta = delta
        self.initial = 0
        self.symbols = list(trs.symbols.values())
        self.labels = [s.label for s in states]
        self.goal_flow: Optional[List[Tuple[dict, dict]]] = None

    def __len__(self):
        return len(self.states)

    def label(self, s: int) -> Position:
        return self.labels[s]

    def transition(self, s: int, f) -> Transition:
        name = f.name if isinstance(f, (Symbol, Term)) else f
        return self.delta[s][name]

    def step(self, s: int, f: Symbol) -> Derivative:
        st = self.states[s]
        return derivative(st.goals, st.label, f, self.patterns)

    @property
    def transition_cells(self) -> int:
        return sum(len(row) for row in self.delta)

    @property
    def branch_count(self) -> int:
        return sum(len(tr.branches) for row in self.delta for tr in row.values())

    def stats(self) -> dict:
        return {
            "states": len(self.states),
            "symbols": len(self.symbols),
            "rules": len(self.trs.rules),
            "transition_cells": self.transition_cells,
            "branch_count": self.branch_count,
        }

    def goal_text(self, g: Goal) -> str:
        lhs = ", ".join(f"{format_term(l)}@{format_position(q)}" for q, l in g.obligation)
        return f"{lhs} ↪ {format_term(self.patterns[g.pattern])}@{format_position(g.position)}"


def construct(
    trs: Trs,
    relation: DependencyKind = DependencyKind.STANDARD,
    *,
    max_states: int = 1_000_000,
) -> SetAutomaton:
    relation = DependencyKind(relation)
    patterns = trs.patterns()
    by_pattern: Dict[Term, List[Rule]] = {}
    for r in trs.rules:
        by_pattern.setdefault(r.lhs, []).append(r)

    linear = [is_linear(l) for l in patterns]
    symbols = list(trs.symbols.values())

    initial = canonical_goals(Goal(k, ROOT, ((ROOT, l),)) for k, l in enumerate(patterns))
    index: Dict[FrozenSet[Goal], int] = {frozenset(initial): 0}
    states = [State(initial, choose_label(initial))]
    delta: List[Dict[str, Transition]] = []
    flow: List[Tuple[dict, dict]] = []
    todo = deque([0])
    while todo:
        s = todo.popleft()
        st = states[s]
        flow.append(({}, {}))
        row: Dict[str, Transition] = {}
        for f in symbols:
            d = derivative(st.goals, st.label, f, patterns)
            branches = []
            moves, finals = flow[s]
            for src in d.completed:
                finals.setdefault(src, []).append(f.name)
            origin = {g: g for g in d.unchanged}
            origin.update((g, src) for src, g in d.reduced)
            for cls in partition(d.goals(), relation):
                offset = greatest_common_prefix(g.position for g in cls)
                n = len(offset)
                if n:
                    lifted = [Goal(g.pattern, g.position[n:], tuple((q[n:], l) for q, l in g.obligation))
                              for g in cls]
                else:
                    lifted = cls
                key = frozenset(lifted)
                if origin:
                    for g, lg in zip(cls, lifted):
                        src = origin.get(g)
                        if src is not None:
                            moves.setdefault(src, []).append((key, lg))
                target = index.get(key)
                if target is None:
                    if len(states) >= max_states:
                        raise ConstructionError(
                            f"automaton construction exceeded the cap of {max_states} states"
                        )
                    target = len(states)
                    index[key] = target
                    goals = canonical_goals(key)
                    states.append(State(goals, choose_label(goals)))
                    todo.append(target)
                branches.append((target, offset))
            branches.sort(key=lambda b: (position_key(b[1]), b[0]))
            out_l, out_nl = [], []
            for g in sorted(d.completed, key=_goal_key):
                for r in by_pattern[patterns[g.pattern]]:
                    (out_l if linear[g.pattern] else out_nl).append((r, g.position))
            if branches or out_l or out_nl:
                row[f.name] = Transition(tuple(branches), tuple(out_l), tuple(out_nl))
            else:
                row[f.name] = EMPTY_TRANSITION
        delta.append(row)
    a = SetAutomaton(trs, relation, patterns, states, delta)
    # goal flow per state: where each goal moves, and which cells complete it
    a.goal_flow = [
        ({src: [(index[goals], lg) for goals, lg in dests] for src, dests in moves.items()}, finals)
        for moves, finals in flow
    ]
    return a


# -- DOT export ---------------------------------------------------------------


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(a: SetAutomaton) -> str:
    lines = [
        "digraph set_automaton {",
        "  rankdir=LR;",
        '  node [shape=box, fontname="monospace"];',
    ]
    for s, st in enumerate(a.states):
        body = "\\l".join(_dot_escape(a.goal_text(g)) for g in st.goals)
        head = f"s{s}   L={format_position(st.label)}"
        lines.append(f'  s{s} [label="{_dot_escape(head)}\\l{body}\\l"];')
    for s, row in enumerate(a.delta):
        for f in a.symbols:
            tr = row[f.name]
            if tr is EMPTY_TRANSITION:
                continue
            hub = f"h{s}_{a.symbols.index(f)}"
            label = f.name
            if tr.outputs:
                outs = ", ".join(f"{r.name}@{format_position(q)}" for r, q in tr.out_linear)
                nl = ", ".join(f"{r.name}@{format_position(q)}" for r, q in tr.out_nonlinear)
                if nl:
                    outs = (outs + " " if outs else "") + f"NL[{nl}]"
                label += f" / {outs}"
            lines.append(f'  {hub} [shape=point];')
            lines.append(f'  s{s} -> {hub} [label="{_dot_escape(label)}", arrowhead=none];')
            for target, offset in tr.branches:
                lines.append(f'  {hub} -> s{target} [label="{_dot_escape(format_position(offset))}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
