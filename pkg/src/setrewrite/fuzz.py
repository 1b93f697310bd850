"""Randomised cross-checking of the engines against brute force.

Each case is a small random TRS and a random ground term.  The checks:

* ``evaluate`` finds exactly the brute-force pre-match redexes and inspects
  every position once;
* the prune/grow/fragment laws hold on random configuration trees;
* every engine returns a normal form, and when the term provably has a single
  normal form (exhaustive search of its reducts) all engines return it.

Cases are seeded individually (``"<seed>:<index>"``), so a failing index can
be replayed on its own.
"""

from __future__ import annotations

import random
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from .automaton import DependencyKind, SetAutomaton, construct
from .engine import StackEngine
from .errors import ConstructionError, InternalInconsistencyError, RewriteError, StepLimitError
from .matcher import (
    Bud,
    ConfigurationTree,
    Node,
    buds,
    completed,
    evaluate,
    grow,
    is_fragment,
    nodes,
    prune,
    subtree_at,
)
from .rewriter import (
    RewriteSession,
    brute_force_redexes,
    _rules_by_head,
    find_redex,
    oracle_run,
    reduce_on_discovery,
)
from .terms import Symbol, Term, TermPool, apply_substitution, format_term, iter_positions, match_root, replace_at, subterm_at, term_size
from .trs import Trs, make_trs

VAR_NAMES = ("x", "y", "z")
MAX_STATES = 2_000


# -- generators -----------------------------------------------------------------


def random_signature(rng: random.Random, max_arity: int = 3) -> List[Symbol]:
    n_const = rng.randint(1, 3)
    n_fun = rng.randint(1, 3)
    syms = [Symbol(f"c{i}", 0) for i in range(n_const)]
    syms += [Symbol(f"f{i}", rng.randint(1, max_arity)) for i in range(n_fun)]
    return syms


def random_pattern(rng, pool, symbols, depth, variables, *, nonlinear=False):
    """A non-variable pattern of depth at most ``depth``."""
    funs = [s for s in symbols if s.arity > 0]
    used: List[Term] = []

    def var():
        if nonlinear and used and rng.random() < 0.5:
            return rng.choice(used)
        v = pool.var(rng.choice(variables))
        used.append(v)
        return v

    def go(d, top):
        if not top and (d <= 1 or rng.random() < 0.35):
            if rng.random() < 0.7:
                return var()
            consts = [s for s in symbols if s.arity == 0]
            return pool.make(rng.choice(consts))
        if d <= 1 or rng.random() < 0.2:
            return pool.make(rng.choice([s for s in symbols if s.arity == 0]))
        f = rng.choice(funs)
        return pool.make(f, [go(d - 1, False) for _ in range(f.arity)])

    return go(depth, True)


def random_rhs(rng, pool, symbols, lhs: Term, *, duplicating=False) -> Term:
    vs = sorted({u for _, u in iter_positions(lhs) if u.is_var}, key=lambda v: v.symbol.name)
    consts = [s for s in symbols if s.arity == 0]
    proper = [u for p, u in iter_positions(lhs) if p]
    roll = rng.random()
    if duplicating and vs:
        f = rng.choice([s for s in symbols if s.arity > 0])
        v = rng.choice(vs)
        return pool.make(f, [v] * f.arity)
    if roll < 0.35 and vs:
        return rng.choice(vs)
    if roll < 0.6:
        return pool.make(rng.choice(consts))
    if roll < 0.8 and proper:
        return rng.choice(proper)
    # a small term over the lhs variables
    leaves = vs + [pool.make(c) for c in consts]
    fs = [s for s in symbols if s.arity > 0]
    f = rng.choice(fs)
    return pool.make(f, [rng.choice(leaves) for _ in range(f.arity)])


def random_trs(rng: random.Random, *, max_rules: int = 6, max_depth: int = 4,
               max_arity: int = 3) -> Trs:
    pool = TermPool()
    symbols = random_signature(rng, max_arity)
    rules = []
    for _ in range(rng.randint(1, max_rules)):
        depth = rng.choices(range(1, max_depth + 1), weights=[3, 4, 2, 1][:max_depth])[0]
        lhs = random_pattern(rng, pool, symbols, depth, VAR_NAMES,
                             nonlinear=rng.random() < 0.2)
        rhs = random_rhs(rng, pool, symbols, lhs, duplicating=rng.random() < 0.1)
        rules.append((lhs, rhs))
    return make_trs(symbols, rules, VAR_NAMES, pool)


def random_term(rng: random.Random, trs: Trs, max_size: int = 40) -> Term:
    budget = rng.randint(1, max_size)
    symbols = trs.alphabet
    consts = [s for s in symbols if s.arity == 0]
    funs = [s for s in symbols if s.arity > 0]
    pool = trs.pool

    def go(room):
        # room: nodes this subterm may use
        options = [f for f in funs if f.arity + 1 <= room]
        if not options or rng.random() < 0.25:
            return pool.make(rng.choice(consts)), 1
        f = rng.choice(options)
        room -= 1
        used = 1
        args = []
        for i in range(f.arity):
            left = f.arity - i - 1
            a, n = go(room - left)
            args.append(a)
            room -= n
            used += n
        return pool.make(f, args), used

    return go(budget)[0]


# -- unique normal forms ----------------------------------------------------------


def one_step_reducts(trs: Trs, t: Term, memo: Optional[dict] = None) -> List[Term]:
    """Every term reachable from ``t`` in one step (memoised per shared subterm)."""
    memo = {} if memo is None else memo
    table = memo.get(None)
    if table is None:
        table = memo[None] = _rules_by_head(trs)
    pool = trs.pool

    def go(u):
        hit = memo.get(u)
        if hit is not None:
            return hit
        out = []
        for r in table.get(u.symbol.name, ()):
            sigma = match_root(r.lhs, u)
            if sigma is not None:
                out.append(apply_substitution(pool, r.rhs, sigma))
        for i, a in enumerate(u.args):
            for a2 in go(a):
                args = list(u.args)
                args[i] = a2
                out.append(pool.make(u.symbol, args))
        out = list(dict.fromkeys(out))
        memo[u] = out
        return out

    return go(t)


def unique_normal_form(trs: Trs, t: Term, *, cap: int = 300, max_size: int = 120) -> Optional[Term]:
    """The normal form of ``t`` if its reduct graph is finite, acyclic and has one sink.

    Returns None when that cannot be established within ``cap`` terms.
    """
    succ: Dict[Term, List[Term]] = {}
    memo: dict = {}
    todo = deque([t])
    while todo:
        u = todo.popleft()
        if u in succ:
            continue
        if len(succ) >= cap or term_size(u) > max_size:
            return None
        succ[u] = one_step_reducts(trs, u, memo)
        if u in succ[u]:
            return None
        todo.extend(v for v in succ[u] if v not in succ)
    # cycle check
    color: Dict[Term, int] = {}
    for root in succ:
        if root in color:
            continue
        stack = [(root, iter(succ[root]))]
        color[root] = 1
        while stack:
            u, it = stack[-1]
            v = next(it, None)
            if v is None:
                color[u] = 2
                stack.pop()
                continue
            c = color.get(v, 0)
            if c == 1:
                return None
            if c == 0:
                color[v] = 1
                stack.append((v, iter(succ[v])))
    sinks = [u for u, vs in succ.items() if not vs]
    return sinks[0] if len(sinks) == 1 else None


# -- cases and checks ---------------------------------------------------------------


@dataclass
class Case:
    trs: Trs
    term: Term
    label: str = ""

    def describe(self) -> str:
        return f"{self.trs.to_text()}term: {format_term(self.term)}\n"


@dataclass
class Violation:
    check: str
    detail: str
    case: Case

    def __str__(self):
        return f"[{self.check}] {self.detail}\n{self.case.describe()}"


def _automata(trs: Trs, max_states: int):
    return {rel: construct(trs, rel, max_states=max_states) for rel in DependencyKind}


def check_matching(a: SetAutomaton, case: Case) -> Optional[str]:
    res = evaluate(a, case.term)
    want = brute_force_redexes(case.trs, case.term, prematch=True)
    if set(res.redexes) != want:
        got = sorted(map(str, res.redexes))
        exp = sorted(map(str, want))
        return f"{a.relation.value}: evaluate found {got}, brute force {exp}"
    if res.inspections != term_size(case.term):
        return f"{a.relation.value}: {res.inspections} inspections for a term of size {term_size(case.term)}"
    return None


def random_fragment(rng: random.Random, a: SetAutomaton, t: Term, steps: int,
                    start: Optional[ConfigurationTree] = None) -> ConfigurationTree:
    ct = start if start is not None else Bud(a.initial, ())
    for _ in range(steps):
        bs = buds(ct)
        if not bs:
            break
        s, p = rng.choice(sorted(bs, key=lambda c: (c[1], c[0])))
        ct = grow(a, ct, s, p, t)
    return ct


def check_laws(rng: random.Random, a: SetAutomaton, case: Case) -> Optional[str]:
    t = case.term
    full = completed(a, t)
    size = term_size(t)
    small = random_fragment(rng, a, t, rng.randint(0, size))
    big = random_fragment(rng, a, t, rng.randint(0, size), small)
    rel = a.relation.value
    if not (is_fragment(small, full) and is_fragment(big, full)):
        return f"{rel}: grow left the completed tree"
    if not is_fragment(small, big):
        return f"{rel}: growing more does not extend the tree"
    positions = [p for p, _ in iter_positions(t)]
    for p in rng.sample(positions, min(4, len(positions))):
        ps, pb = prune(a, small, p), prune(a, big, p)
        if not is_fragment(ps, small) or not is_fragment(pb, big):
            return f"{rel}: prune at {p} is not a fragment of its input"
        if not is_fragment(ps, pb):
            return f"{rel}: prune at {p} is not monotone"
        sub = subtree_at(a, big, p)
        if sub is not None:
            gone = set(nodes(sub)) if isinstance(sub, Node) else set()
            if set(nodes(pb)) != set(nodes(big)) - gone:
                return f"{rel}: prune at {p} removed the wrong nodes"
    for r in sorted(brute_force_redexes(case.trs, t), key=lambda r: (len(r.position), r.position, r.rule.id)):
        sigma = match_root(r.rule.lhs, subterm_at(t, r.position))
        t2 = replace_at(case.trs.pool, t, r.position, apply_substitution(case.trs.pool, r.rule.rhs, sigma))
        if prune(a, full, r.position) != prune(a, completed(a, t2), r.position):
            return f"{rel}: pruned completed trees differ across the step {r}"
        break
    return None


def _run_engines(autos, case: Case, step_budget: int):
    """Yield (engine name, result or exception)."""
    trs, t = case.trs, case.term
    std = autos[DependencyKind.STANDARD]
    out = []
    for name, fn in (
        ("reference", lambda: RewriteSession(std, t, max_steps=step_budget).run(reduce_on_discovery)),
        ("stack", lambda: StackEngine(autos[DependencyKind.OUTERMOST], max_steps=step_budget,
                                      debug=True).rewrite(t)[0]),
        ("oracle", lambda: oracle_run(trs, t, max_steps=step_budget).term),
        ("oracle-innermost", lambda: oracle_run(trs, t, "leftmost-innermost", max_steps=step_budget).term),
    ):
        try:
            out.append((name, fn()))
        except StepLimitError as e:
            out.append((name, e))
    return out


def check_normal_forms(autos, case: Case, expected: Optional[Term] = None, *,
                       step_budget: int = 60) -> Optional[str]:
    """``expected`` is the unique normal form when one is known."""
    budget = 10_000 if expected is not None else step_budget
    for name, got in _run_engines(autos, case, budget):
        if isinstance(got, StepLimitError):
            if expected is not None:
                return f"{name} hit the step limit on a term with a unique normal form"
            continue
        if find_redex(case.trs, got) is not None:
            return f"{name} returned {format_term(got)}, which still has a redex"
        if expected is not None and got is not expected:
            return f"{name} returned {format_term(got)}, expected {format_term(expected)}"
    return None


def check_case(case: Case, rng: random.Random, *, laws: bool = True,
               max_states: int = MAX_STATES, expected: Optional[Term] = None,
               autos=None) -> Optional[Violation]:
    if autos is None:
        try:
            autos = _automata(case.trs, max_states)
        except ConstructionError:
            return None
        if expected is None:
            expected = unique_normal_form(case.trs, case.term)
    try:
        for a in autos.values():
            msg = check_matching(a, case)
            if msg:
                return Violation("matching", msg, case)
            if laws:
                msg = check_laws(rng, a, case)
                if msg:
                    return Violation("laws", msg, case)
        msg = check_normal_forms(autos, case, expected)
        if msg:
            return Violation("normal-form", msg, case)
    except InternalInconsistencyError as e:
        return Violation("internal", str(e), case)
    except RewriteError as e:
        return Violation("error", f"{type(e).__name__}: {e}", case)
    return None


# -- shrinking ----------------------------------------------------------------------------


def _smaller_terms(trs: Trs, t: Term):
    consts = [trs.pool.make(s) for s in trs.alphabet if s.arity == 0]
    seen = set()
    for p, u in iter_positions(t):
        if not p:
            for a in u.args:
                yield a
            continue
        for v in list(u.args) + consts:
            if v is not u and term_size(v) < term_size(u):
                cand = replace_at(trs.pool, t, p, v)
                if cand not in seen:
                    seen.add(cand)
                    yield cand


def shrink(case: Case, fails: Callable[[Case], bool], *, budget: int = 300) -> Case:
    """Greedy minimisation: drop rules, then shrink the term, while still failing."""
    tries = 0
    improved = True
    while improved and tries < budget:
        improved = False
        rules = case.trs.rules
        for k in range(len(rules)):
            if len(rules) == 1:
                break
            keep = [(r.lhs, r.rhs) for i, r in enumerate(rules) if i != k]
            smaller = Case(make_trs(case.trs.alphabet, keep, sorted(case.trs.variables), case.trs.pool),
                           case.term, case.label)
            tries += 1
            if fails(smaller):
                case, improved = smaller, True
                break
        if improved:
            continue
        for t2 in _smaller_terms(case.trs, case.term):
            tries += 1
            if tries >= budget:
                break
            cand = Case(case.trs, t2, case.label)
            if fails(cand):
                case, improved = cand, True
                break
    return case


# -- driver -------------------------------------------------------------------------------------


@dataclass
class SelftestReport:
    iterations: int
    seed: int
    skipped: int = 0
    unique: int = 0
    violations: List[Violation] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.violations


def make_case(seed, i: int, *, max_term_size: int = 40) -> Tuple[Case, random.Random]:
    rng = random.Random(f"{seed}:{i}")
    trs = random_trs(rng)
    return Case(trs, random_term(rng, trs, max_term_size), label=f"{seed}:{i}"), rng


def selftest(iterations: int = 1000, seed: int = 0, *, laws: bool = True, stop_on_first: bool = True,
             minimise: bool = True, progress: Optional[Callable[[int], None]] = None) -> SelftestReport:
    report = SelftestReport(iterations, seed)
    start = time.perf_counter()
    for i in range(iterations):
        case, rng = make_case(seed, i)
        try:
            autos = _automata(case.trs, MAX_STATES)
        except ConstructionError:
            report.skipped += 1
            continue
        expected = unique_normal_form(case.trs, case.term)
        if expected is not None:
            report.unique += 1
        v = check_case(case, rng, laws=laws, expected=expected, autos=autos)
        if v is not None:
            if minimise:
                check = v.check

                def fails(c, check=check, label=case.label):
                    w = check_case(c, random.Random(label), laws=laws)
                    return w is not None and w.check == check

                small = shrink(case, fails)
                w = check_case(small, random.Random(case.label), laws=laws)
                if w is not None:
                    v = w
            report.violations.append(v)
            if stop_on_first:
                break
        if progress is not None:
            progress(i)
    report.seconds = time.perf_counter() - start
    return report
