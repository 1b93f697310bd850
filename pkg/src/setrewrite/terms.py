"""Maximally shared terms, positions and substitutions.

Terms live in a :class:`TermPool`.  A pool hands out exactly one
:class:`Term` object per structurally distinct term, so structural equality
is object identity and costs O(1).  Positions are plain tuples of 1-based
child indices; ``()`` is the root.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .errors import ArityError, ParseError, PositionError, SubstitutionError

Position = Tuple[int, ...]
ROOT: Position = ()


@dataclass(frozen=True)
class Symbol:
    name: str
    arity: int

    def __str__(self):
        return f"{self.name}:{self.arity}"


class Term:
    """A node of a shared term graph.  Never instantiate directly; use a pool."""

    __slots__ = ("id", "symbol", "args", "is_var", "ground", "size")

    def __init__(self, id: int, symbol: Symbol, args: Tuple["Term", ...], is_var: bool):
        self.id = id
        self.symbol = symbol
        self.args = args
        self.is_var = is_var
        self.ground = not is_var and all(a.ground for a in args)
        self.size = 1 + sum(a.size for a in args)

    @property
    def name(self) -> str:
        return self.symbol.name

    def __hash__(self):
        return self.id

    def __repr__(self):
        return format_term(self)

    def __str__(self):
        return format_term(self)


class TermPool:
    """Append-only hash-consing table."""

    def __init__(self):
        self._table: Dict[tuple, Term] = {}
        self._terms: List[Term] = []

    def __len__(self):
        return len(self._terms)

    def __getitem__(self, id: int) -> Term:
        return self._terms[id]

    def __contains__(self, term: Term) -> bool:
        return term.id < len(self._terms) and self._terms[term.id] is term

    def make(self, symbol: Symbol, args: Sequence[Term] = ()) -> Term:
        args = tuple(args)
        if len(args) != symbol.arity:
            raise ArityError(
                f"symbol {symbol.name} has arity {symbol.arity}, got {len(args)} arguments"
            )
        key = (symbol, args)
        term = self._table.get(key)
        if term is None:
            for a in args:
                if a not in self:
                    raise ArityError(f"argument {a!r} belongs to a different pool")
            term = Term(len(self._terms), symbol, args, False)
            self._terms.append(term)
            self._table[key] = term
        return term

    def var(self, name: str) -> Term:
        key = (name, None)
        term = self._table.get(key)
        if term is None:
            term = Term(len(self._terms), Symbol(name, 0), (), True)
            self._terms.append(term)
            self._table[key] = term
        return term


def create(pool: TermPool, head: Symbol, children: Sequence[Term] = ()) -> Term:
    return pool.make(head, children)


# -- positions ---------------------------------------------------------------


def position_key(p: Position):
    """Total order on positions: shorter first, then lexicographic."""
    return (len(p), p)


def is_prefix(p: Position, q: Position) -> bool:
    """``p <= q`` in the prefix order."""
    return len(p) <= len(q) and q[: len(p)] == p


def greatest_common_prefix(positions: Iterable[Position]) -> Position:
    it = iter(positions)
    try:
        prefix = next(it)
    except StopIteration:
        raise ValueError("greatest_common_prefix of an empty set") from None
    for p in it:
        n = 0
        limit = min(len(prefix), len(p))
        while n < limit and prefix[n] == p[n]:
            n += 1
        prefix = prefix[:n]
    return prefix


def format_position(p: Position) -> str:
    return ".".join(map(str, p)) if p else "ε"


def parse_position(text: str) -> Position:
    text = text.strip()
    if text in ("", "ε", "e", "eps"):
        return ROOT
    try:
        p = tuple(int(part) for part in text.split("."))
    except ValueError:
        raise ParseError(f"malformed position {text!r}") from None
    if any(i < 1 for i in p):
        raise ParseError(f"positions are 1-based: {text!r}")
    return p


# -- subterms ----------------------------------------------------------------


def subterm_at(t: Term, p: Position) -> Term:
    for depth, i in enumerate(p):
        if not 1 <= i <= len(t.args):
            raise PositionError(f"position {format_position(p)} not in domain (fails at index {depth})")
        t = t.args[i - 1]
    return t


def replace_spine(pool: TermPool, t: Term, p: Position, u: Term) -> List[Term]:
    """Replace ``t|_p`` by ``u`` and return the rebuilt spine.

    ``spine[k]`` is the new subterm at ``p[:k]``; ``spine[0]`` is the new root.
    """
    path = [t]
    for depth, i in enumerate(p):
        if not 1 <= i <= len(t.args):
            raise PositionError(f"position {format_position(p)} not in domain (fails at index {depth})")
        t = t.args[i - 1]
        path.append(t)
    spine = [u] * (len(p) + 1)
    for k in range(len(p) - 1, -1, -1):
        parent = path[k]
        args = list(parent.args)
        args[p[k] - 1] = spine[k + 1]
        spine[k] = pool.make(parent.symbol, args)
    return spine


def replace_at(pool: TermPool, t: Term, p: Position, u: Term) -> Term:
    return replace_spine(pool, t, p, u)[0]


def iter_positions(t: Term) -> Iterator[Tuple[Position, Term]]:
    """Pre-order (leftmost-outermost) walk yielding ``(position, subterm)``."""
    stack = [(ROOT, t)]
    while stack:
        p, u = stack.pop()
        yield p, u
        for i in range(len(u.args), 0, -1):
            stack.append((p + (i,), u.args[i - 1]))


def domain(t: Term) -> List[Position]:
    return [p for p, _ in iter_positions(t)]


def variable_positions(t: Term) -> List[Position]:
    """The edge positions of ``t``: where it has variables."""
    return [p for p, u in iter_positions(t) if u.is_var]


def term_size(t: Term) -> int:
    return t.size


def variables(t: Term) -> set:
    return {u for _, u in iter_positions(t) if u.is_var}


# -- substitutions -----------------------------------------------------------


def apply_substitution(pool: TermPool, t: Term, sigma: Mapping[Term, Term]) -> Term:
    """Instantiate ``t``.  ``sigma`` maps variable terms to terms."""
    if t.ground:
        return t
    memo: Dict[int, Term] = {}

    def go(u: Term) -> Term:
        if u.ground:
            return u
        if u.is_var:
            try:
                return sigma[u]
            except KeyError:
                raise SubstitutionError(f"variable {u.name} is unbound") from None
        r = memo.get(u.id)
        if r is None:
            r = pool.make(u.symbol, [go(a) for a in u.args])
            memo[u.id] = r
        return r

    return go(t)


def match_root(pattern: Term, t: Term) -> Optional[Dict[Term, Term]]:
    """Return the unique ``sigma`` with ``pattern^sigma == t``, or None."""
    sigma: Dict[Term, Term] = {}
    stack = [(pattern, t)]
    while stack:
        l, u = stack.pop()
        if l.is_var:
            bound = sigma.get(l)
            if bound is None:
                sigma[l] = u
            elif bound is not u:
                return None
        elif l.ground:
            if l is not u:
                return None
        else:
            if l.symbol != u.symbol:
                return None
            stack.extend(zip(l.args, u.args))
    return sigma


# -- text syntax -------------------------------------------------------------

_IDENT = re.compile(r"[A-Za-z0-9_+*\-]+")


def _tokens(text: str, line: Optional[int]):
    pos = 0
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        m = _IDENT.match(text, pos)
        if m:
            yield "id", m.group(0), pos + 1
            pos = m.end()
        elif ch in "(),":
            yield ch, ch, pos + 1
            pos += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", line, pos + 1)


def parse_term(
    text: str,
    pool: TermPool,
    symbols: Mapping[str, Symbol],
    variables: Iterable[str] = (),
    *,
    line: Optional[int] = None,
) -> Term:
    """Parse ``name`` / ``name(t1,...,tn)`` against a ranked alphabet.

    Names listed in ``variables`` denote variables.  Iterative, so very deep
    terms (long Peano numerals) parse fine.
    """
    variables = set(variables)
    toks = list(_tokens(text, line))
    if not toks:
        raise ParseError("empty term", line, 1)
    # each frame: [name, col, args]
    stack: List[list] = []
    result: Optional[Term] = None
    i = 0

    def finish(name, col, args):
        if name in variables:
            if args is not None:
                raise ParseError(f"variable {name} applied to arguments", line, col)
            return pool.var(name)
        sym = symbols.get(name)
        if sym is None:
            raise ParseError(f"unknown symbol {name!r}", line, col)
        args = args or []
        if len(args) != sym.arity:
            raise ParseError(
                f"symbol {name} expects {sym.arity} arguments, got {len(args)}", line, col
            )
        return pool.make(sym, args)

    def deliver(term, col):
        nonlocal result
        if stack:
            stack[-1][2].append(term)
        elif result is None:
            result = term
        else:
            raise ParseError("trailing input after term", line, col)

    expect_term = True
    while i < len(toks):
        kind, val, col = toks[i]
        if expect_term:
            if kind != "id":
                raise ParseError(f"expected identifier, found {val!r}", line, col)
            if i + 1 < len(toks) and toks[i + 1][0] == "(":
                stack.append([val, col, []])
                i += 2
                continue
            deliver(finish(val, col, None), col)
            expect_term = False
            i += 1
            continue
        if kind == "," and stack:
            expect_term = True
        elif kind == ")" and stack:
            name, ncol, args = stack.pop()
            deliver(finish(name, ncol, args), ncol)
        else:
            raise ParseError(f"unexpected {val!r}", line, col)
        i += 1
    if stack or expect_term or result is None:
        raise ParseError("unexpected end of term", line, len(text) + 1)
    return result


def format_term(t: Term) -> str:
    out: List[str] = []
    stack: List[object] = [t]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        out.append(item.symbol.name)
        if item.args:
            out.append("(")
            stack.append(")")
            for k in range(len(item.args) - 1, -1, -1):
                stack.append(item.args[k])
                if k:
                    stack.append(",")
    return "".join(out)
