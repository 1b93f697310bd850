"""Running a set automaton over a term.

Configurations are ``(state, position)`` pairs; a configuration observes the
symbol at ``position + label(state)``.  Configuration trees are persistent
values: :class:`Bud` is an unexplored configuration, :class:`Node` an
explored one.  Node children are kept sorted by (state, position) so that
structurally equal trees compare equal.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import FrozenSet, List, NamedTuple, Optional, Tuple, Union

from .automaton import SetAutomaton
from .errors import InternalInconsistencyError, NoSuchBudError, PositionError
from .terms import Position, ROOT, Term, format_position, is_prefix, position_key, subterm_at
from .trs import Rule


class Redex(NamedTuple):
    rule: Rule
    position: Position

    def __str__(self):
        return f"{self.rule.name}@{format_position(self.position)}"


def redex_key(r: Redex):
    return (position_key(r.position), r.rule.id)


Configuration = Tuple[int, Position]


@dataclass(frozen=True)
class Bud:
    state: int
    position: Position

    @property
    def config(self) -> Configuration:
        return (self.state, self.position)


@dataclass(frozen=True)
class Node:
    state: int
    position: Position
    children: Tuple["ConfigurationTree", ...] = ()

    @property
    def config(self) -> Configuration:
        return (self.state, self.position)


ConfigurationTree = Union[Bud, Node]


def _child_key(ct: ConfigurationTree):
    return (ct.state, position_key(ct.position))


def make_node(state: int, position: Position, children) -> Node:
    return Node(state, position, tuple(sorted(children, key=_child_key)))


def observe(a: SetAutomaton, s: int, p: Position, t: Term) -> Term:
    """The subterm whose head configuration ``(s, p)`` inspects."""
    try:
        return subterm_at(t, p + a.labels[s])
    except PositionError:
        raise InternalInconsistencyError(
            f"configuration (s{s}, {format_position(p)}) observes outside the term"
        ) from None


def matches(a: SetAutomaton, s: int, p: Position, t: Term) -> Tuple[FrozenSet[Redex], FrozenSet[Redex]]:
    """Linear and non-linear matches discovered by configuration ``(s, p)``."""
    tr = a.delta[s][observe(a, s, p, t).symbol.name]
    lin = frozenset(Redex(r, p + q) for r, q in tr.out_linear)
    nonlin = frozenset(Redex(r, p + q) for r, q in tr.out_nonlinear)
    return lin, nonlin


class EvalResult(NamedTuple):
    redexes: FrozenSet[Redex]
    inspections: int
    trace: Optional[List[dict]]


def evaluate(a: SetAutomaton, t: Term, *, trace: bool = False) -> EvalResult:
    """All redexes of ``t`` (linear and non-linear pre-matches) in one pass."""
    found = set()
    log = [] if trace else None
    inspections = 0
    todo = deque([(a.initial, ROOT)])
    while todo:
        s, p = todo.popleft()
        u = observe(a, s, p, t)
        inspections += 1
        tr = a.delta[s][u.symbol.name]
        outs = [Redex(r, p + q) for r, q in tr.outputs]
        found.update(outs)
        new = [(s2, p + off) for s2, off in tr.branches]
        todo.extend(new)
        if log is not None:
            log.append({
                "state": s,
                "position": p,
                "observed_position": p + a.labels[s],
                "observed_symbol": u.symbol.name,
                "new_buds": new,
                "outputs": sorted(outs, key=redex_key),
            })
    return EvalResult(frozenset(found), inspections, log)


def _transform(ct: ConfigurationTree, leaf) -> ConfigurationTree:
    """Rebuild ``ct`` bottom-up; ``leaf(c)`` returns a replacement or None to descend.

    Unchanged subtrees are returned as the same objects.
    """
    top = leaf(ct)
    if top is not None:
        return top
    stack = [(ct, [])]
    while True:
        c, done = stack[-1]
        k = len(done)
        if k < len(c.children):
            child = c.children[k]
            r = leaf(child)
            if r is None:
                stack.append((child, []))
            else:
                done.append(r)
            continue
        stack.pop()
        if all(x is y for x, y in zip(done, c.children)):
            res = c
        else:
            res = make_node(c.state, c.position, done)
        if not stack:
            return res
        stack[-1][1].append(res)


def completed(a: SetAutomaton, t: Term, s: Optional[int] = None, p: Position = ROOT) -> Node:
    if s is None:
        s = a.initial
    root = (s, p)
    stack = [(root, None, [])]
    while True:
        (s, p), kids, done = stack[-1]
        if kids is None:
            tr = a.delta[s][observe(a, s, p, t).symbol.name]
            kids = [(s2, p + off) for s2, off in tr.branches]
            stack[-1] = ((s, p), kids, done)
        if len(done) < len(kids):
            stack.append((kids[len(done)], None, []))
            continue
        stack.pop()
        node = make_node(s, p, done)
        if not stack:
            return node
        stack[-1][2].append(node)


def grow(a: SetAutomaton, ct: ConfigurationTree, s: int, p: Position, t: Term) -> ConfigurationTree:
    """Replace the bud ``(s, p)`` by a node whose children are fresh buds."""
    tr = a.delta[s][observe(a, s, p, t).symbol.name]
    grown = make_node(s, p, [Bud(s2, p + off) for s2, off in tr.branches])

    def leaf(c):
        if isinstance(c, Bud):
            return grown if (c.state == s and c.position == p) else c
        if not is_prefix(c.position, p):
            return c
        return None

    result = _transform(ct, leaf)
    if result is ct:
        raise NoSuchBudError(f"no bud (s{s}, {format_position(p)}) in configuration tree")
    return result


def prune(a: SetAutomaton, ct: ConfigurationTree, q: Position) -> ConfigurationTree:
    """Collapse every node observing ``q`` back into a bud."""
    labels = a.labels

    def leaf(c):
        if isinstance(c, Bud):
            return c
        if c.position + labels[c.state] == q:
            return Bud(c.state, c.position)
        if not is_prefix(c.position, q):
            return c
        return None

    return _transform(ct, leaf)


def subtree_at(a: SetAutomaton, ct: ConfigurationTree, p: Position) -> Optional[ConfigurationTree]:
    """The subtree whose root configuration observes ``p``, if any."""
    stack = [ct]
    while stack:
        c = stack.pop()
        if c.position + a.labels[c.state] == p:
            return c
        if isinstance(c, Node):
            stack.extend(k for k in c.children if is_prefix(k.position, p))
    return None


def _walk(ct: ConfigurationTree):
    stack = [ct]
    while stack:
        c = stack.pop()
        yield c
        if isinstance(c, Node):
            stack.extend(c.children)


def buds(ct: ConfigurationTree) -> List[Configuration]:
    return [c.config for c in _walk(ct) if isinstance(c, Bud)]


def nodes(ct: ConfigurationTree) -> List[Configuration]:
    return [c.config for c in _walk(ct) if isinstance(c, Node)]


def confs(ct: ConfigurationTree) -> List[Configuration]:
    return [c.config for c in _walk(ct)]


def is_fragment(ct1: ConfigurationTree, ct2: ConfigurationTree) -> bool:
    """``ct1`` can be grown into ``ct2``."""
    stack = [(ct1, ct2)]
    while stack:
        x, y = stack.pop()
        if x.config != y.config:
            return False
        if isinstance(x, Bud):
            continue
        if isinstance(y, Bud) or len(x.children) != len(y.children):
            return False
        other = {c.config: c for c in y.children}
        for c in x.children:
            d = other.get(c.config)
            if d is None:
                return False
            stack.append((c, d))
    return True
