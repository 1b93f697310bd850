"""Reference rewriting over configuration trees, plus a brute-force oracle.

:class:`RewriteSession` holds the term, the configuration tree and the four
redex pools (linear redexes, and ambiguous / disabled / enabled non-linear
pre-matches).  A strategy picks the next action; the session performs it.
With a linear TRS the ambiguous pools stay empty and the loop is the plain
matching/rewriting interleaving.
"""

from __future__ import annotations

import logging
from typing import Callable, Dict, List, NamedTuple, Optional, Set

from .automaton import SetAutomaton
from .errors import InternalInconsistencyError, StepLimitError, UnsupportedRuleError
from .matcher import (
    Bud,
    ConfigurationTree,
    Redex,
    buds,
    completed,
    grow,
    is_fragment,
    matches,
    nodes,
    prune,
    redex_key,
    subtree_at,
)
from .terms import (
    Position,
    ROOT,
    Term,
    apply_substitution,
    format_position,
    is_prefix,
    iter_positions,
    match_root,
    replace_at,
    subterm_at,
)
from .trs import Rule, Trs, is_consistent, pre_matches, repeated_classes, variable_partition

log = logging.getLogger(__name__)

DEFAULT_MAX_STEPS = 10**9


class Action(NamedTuple):
    kind: str  # "grow" | "check" | "reduce"
    item: object


Strategy = Callable[["RewriteSession"], Action]


def _leftmost_bud(bs):
    return min(bs, key=lambda c: (c[1], c[0]))


def reduce_on_discovery(session: "RewriteSession") -> Action:
    """Reduce whenever a redex is known (outermost first); otherwise explore."""
    reds = session.reds_L | session.en
    if reds:
        return Action("reduce", min(reds, key=redex_key))
    if session.am:
        return Action("check", min(session.am, key=redex_key))
    return Action("grow", _leftmost_bud(session.buds()))


def explore_all_then_reduce(session: "RewriteSession") -> Action:
    """Grow every bud before any consistency check or reduction."""
    bs = session.buds()
    if bs:
        return Action("grow", _leftmost_bud(bs))
    if session.am:
        return Action("check", min(session.am, key=redex_key))
    return Action("reduce", min(session.reds_L | session.en, key=redex_key))


reduce_on_discovery.name = "reduce-on-discovery"
explore_all_then_reduce.name = "explore-all-then-reduce"

STRATEGIES: Dict[str, Strategy] = {
    "reduce-on-discovery": reduce_on_discovery,
    "leftmost-bud-first": reduce_on_discovery,
    "explore-all-then-reduce": explore_all_then_reduce,
}


def builtin_strategies() -> Dict[str, Strategy]:
    return dict(STRATEGIES)


class RewriteSession:
    def __init__(self, a: SetAutomaton, t0: Term, *, max_steps: int = DEFAULT_MAX_STEPS,
                 debug: bool = False, trace: bool = False):
        self.a = a
        self.pool = a.trs.pool
        self.t0 = t0
        self.t = t0
        self.ct: ConfigurationTree = Bud(a.initial, ROOT)
        self._buds = {(a.initial, ROOT)}
        self.reds_L: Set[Redex] = set()
        self.am: Set[Redex] = set()
        self.dis: Set[Redex] = set()
        self.en: Set[Redex] = set()
        self.rewrite_steps = 0
        self.symbol_inspections = 0
        self.consistency_checks = 0
        self.max_steps = max_steps
        self.debug = debug
        self.applied: List[Redex] = []
        self.trace: Optional[List[dict]] = [] if trace else None
        self._partition = {r.id: variable_partition(r.lhs) for r in a.trs.rules}

    # -- pools --------------------------------------------------------------

    def buds(self):
        return list(self._buds)

    def pending(self) -> bool:
        return bool(self.reds_L or self.en or self.am or self._buds)

    @property
    def counters(self) -> dict:
        return {
            "rewrite_steps": self.rewrite_steps,
            "symbol_inspections": self.symbol_inspections,
            "consistency_checks": self.consistency_checks,
        }

    def _matches_below(self, p: Position):
        sub = subtree_at(self.a, self.ct, p)
        if sub is None:
            raise InternalInconsistencyError(f"no configuration observes {format_position(p)}")
        lin, nonlin = set(), set()
        for s, q in nodes(sub):
            l, n = matches(self.a, s, q, self.t)
            lin |= l
            nonlin |= n
        return lin, nonlin

    # -- actions ------------------------------------------------------------

    def grow(self, s: int, p: Position):
        self.ct = grow(self.a, self.ct, s, p, self.t)
        self._buds.discard((s, p))
        tr = self.a.delta[s][subterm_at(self.t, p + self.a.labels[s]).symbol.name]
        self._buds.update((s2, p + off) for s2, off in tr.branches)
        self.symbol_inspections += 1
        lin, nonlin = matches(self.a, s, p, self.t)
        self.reds_L |= lin
        self.am |= nonlin
        if self.trace is not None:
            self.trace.append({"kind": "grow", "state": s, "position": p})

    def check(self, redex: Redex):
        self.am.discard(redex)
        self.consistency_checks += 1
        ok = is_consistent(subterm_at(self.t, redex.position), self._partition[redex.rule.id])
        (self.en if ok else self.dis).add(redex)
        if self.trace is not None:
            self.trace.append({"kind": "check", "position": redex.position, "rule": redex.rule.id,
                               "consistent": ok})
        return ok

    def update(self, p: Position, nonlin_below=None):
        """Re-file non-linear pre-matches whose consistency may change at ``p``."""
        if nonlin_below is None:
            _, nonlin_below = self._matches_below(p)
        self.en -= nonlin_below
        self.dis -= nonlin_below
        rem = set()
        for r in self.en | self.dis:
            for P in repeated_classes(self._partition[r.rule.id]):
                if any(is_prefix(r.position + q, p) for q in P):
                    rem.add(r)
                    break
        self.en -= rem
        self.dis -= rem
        self.am = (self.am - nonlin_below) | rem
        return rem

    def reduce(self, redex: Redex):
        if self.rewrite_steps >= self.max_steps:
            raise StepLimitError(self.max_steps, self.t)
        p = redex.position
        # removals are computed against the pre-rewrite term and tree
        lin_below, nonlin_below = self._matches_below(p)
        self.reds_L -= lin_below
        self.update(p, nonlin_below)
        sub = subtree_at(self.a, self.ct, p)
        before = self.ct
        self.ct = prune(self.a, self.ct, p)
        if self.ct is not before and sub is not None and not isinstance(sub, Bud):
            self._buds.difference_update(buds(sub))
            self._buds.add(sub.config)
        u = subterm_at(self.t, p)
        sigma = match_root(redex.rule.lhs, u)
        if sigma is None:
            raise InternalInconsistencyError(f"{redex} is not a redex of the current term")
        self.t = replace_at(self.pool, self.t, p, apply_substitution(self.pool, redex.rule.rhs, sigma))
        self.rewrite_steps += 1
        self.applied.append(redex)
        if self.trace is not None:
            self.trace.append({"kind": "reduce", "position": p, "rule": redex.rule.id})

    def perform(self, action: Action):
        if action.kind == "grow":
            self.grow(*action.item)
        elif action.kind == "check":
            self.check(action.item)
        elif action.kind == "reduce":
            if action.item not in self.reds_L and action.item not in self.en:
                raise InternalInconsistencyError(f"strategy selected unknown redex {action.item}")
            self.reduce(action.item)
        else:
            raise ValueError(f"unknown action {action.kind!r}")

    def run(self, strategy: Strategy = reduce_on_discovery) -> Term:
        while self.pending():
            self.perform(strategy(self))
            if self.debug:
                self.check_invariants()
        return self.t

    # -- debugging ----------------------------------------------------------

    def check_invariants(self):
        """The loop invariant (quadratic; debug only)."""
        t = self.t0
        for r in self.applied:
            sigma = match_root(r.rule.lhs, subterm_at(t, r.position))
            if sigma is None:
                raise InternalInconsistencyError(f"applied step {r} was not a redex")
            t = replace_at(self.pool, t, r.position, apply_substitution(self.pool, r.rule.rhs, sigma))
        if t is not self.t:
            raise InternalInconsistencyError("applied steps do not reproduce the current term")
        if set(buds(self.ct)) != self._buds:
            raise InternalInconsistencyError("bud cache out of sync with the tree")
        if not is_fragment(self.ct, completed(self.a, self.t)):
            raise InternalInconsistencyError("configuration tree is not a fragment of the completed tree")
        lin, nonlin = set(), set()
        for s, q in nodes(self.ct):
            l, n = matches(self.a, s, q, self.t)
            lin |= l
            nonlin |= n
        if lin != self.reds_L:
            raise InternalInconsistencyError("linear redex pool out of sync with the tree")
        if nonlin != (self.am | self.dis | self.en):
            raise InternalInconsistencyError("non-linear pools out of sync with the tree")
        pools = [self.reds_L, self.am, self.dis, self.en]
        if sum(map(len, pools)) != len(set().union(*pools)):
            raise InternalInconsistencyError("redex pools overlap")
        for r in self.en:
            if not is_consistent(subterm_at(self.t, r.position), self._partition[r.rule.id]):
                raise InternalInconsistencyError(f"enabled {r} is inconsistent")
        for r in self.dis:
            if is_consistent(subterm_at(self.t, r.position), self._partition[r.rule.id]):
                raise InternalInconsistencyError(f"disabled {r} is consistent")


def normalize(a: SetAutomaton, t0: Term, strategy: Strategy = reduce_on_discovery, *,
              max_steps: int = DEFAULT_MAX_STEPS, debug: bool = False) -> Term:
    """Normal form of ``t0`` for a left-linear TRS."""
    bad = [r for r in a.trs.rules if not r.linear]
    if bad:
        raise UnsupportedRuleError(
            f"rule {bad[0].name} ({bad[0]}) is non-linear; use normalize_nonlinear"
        )
    return RewriteSession(a, t0, max_steps=max_steps, debug=debug).run(strategy)


def normalize_nonlinear(a: SetAutomaton, t0: Term, strategy: Strategy = reduce_on_discovery, *,
                        max_steps: int = DEFAULT_MAX_STEPS, debug: bool = False) -> Term:
    return RewriteSession(a, t0, max_steps=max_steps, debug=debug).run(strategy)


# -- brute force ----------------------------------------------------------------


def brute_force_redexes(trs: Trs, t: Term, *, prematch: bool = False) -> Set[Redex]:
    """Every redex of ``t`` by root matching at every position.

    With ``prematch`` the non-linear rules are reported when ``t`` merely
    pre-matches them, which is what a set automaton outputs.
    """
    found = set()
    for p, u in iter_positions(t):
        for r in trs.rules:
            if match_root(r.lhs, u) is not None or (prematch and pre_matches(u, r.lhs)):
                found.add(Redex(r, p))
    return found


def _rules_by_head(trs: Trs):
    table: Dict[str, List[Rule]] = {}
    for r in trs.rules:
        table.setdefault(r.lhs.symbol.name, []).append(r)
    return table


def find_redex(trs: Trs, t: Term, order: str = "leftmost-outermost", normal: Optional[set] = None,
               _table=None):
    """First redex of ``t`` in the given order, or None.

    ``normal`` collects ids of subterms already known to be redex-free.
    """
    table = _table or _rules_by_head(trs)
    normal = normal if normal is not None else set()
    innermost = order == "leftmost-innermost"
    if order not in ("leftmost-outermost", "leftmost-innermost"):
        raise ValueError(f"unknown order {order!r}")

    def at(u):
        for r in table.get(u.symbol.name, ()):
            sigma = match_root(r.lhs, u)
            if sigma is not None:
                return r, sigma
        return None

    stack = [(t, ROOT, False)]
    while stack:
        u, p, done = stack.pop()
        if done:
            if innermost:
                hit = at(u)
                if hit:
                    return Redex(hit[0], p), hit[1]
            normal.add(u.id)
            continue
        if u.id in normal:
            continue
        if not innermost:
            hit = at(u)
            if hit:
                return Redex(hit[0], p), hit[1]
        stack.append((u, p, True))
        for i in range(len(u.args), 0, -1):
            stack.append((u.args[i - 1], p + (i,), False))
    return None


class OracleResult(NamedTuple):
    term: Term
    steps: int


def oracle_normalize(trs: Trs, t0: Term, order: str = "leftmost-outermost", *,
                     max_steps: int = DEFAULT_MAX_STEPS) -> Term:
    return oracle_run(trs, t0, order, max_steps=max_steps).term


def oracle_run(trs: Trs, t0: Term, order: str = "leftmost-outermost", *,
               max_steps: int = DEFAULT_MAX_STEPS) -> OracleResult:
    """Repeatedly contract the first redex in ``order`` until none is left."""
    table = _rules_by_head(trs)
    normal: set = set()
    t = t0
    steps = 0
    while True:
        hit = find_redex(trs, t, order, normal, table)
        if hit is None:
            return OracleResult(t, steps)
        if steps >= max_steps:
            raise StepLimitError(max_steps, t)
        redex, sigma = hit
        t = replace_at(trs.pool, t, redex.position, apply_substitution(trs.pool, redex.rule.rhs, sigma))
        steps += 1


def is_normal_form(trs: Trs, t: Term) -> bool:
    return find_redex(trs, t) is None
