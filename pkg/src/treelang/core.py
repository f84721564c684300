"""Signatures, sorted variables, terms, contexts, and term enumeration.

Terms are immutable trees over a many-sorted signature and a finite sorted
variable set.  Every value in this module is frozen after construction and
safe to share.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence


class ValidationError(ValueError):
    """An input violated a structural invariant."""


class ParseError(ValidationError):
    pass


class SortError(ValidationError):
    pass


NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Operation:
    name: str
    arity: tuple[str, ...]
    result: str


@dataclass(frozen=True)
class Signature:
    """A finite sort set plus operation symbols with arity words and result sorts.

    Operation names are unique: the same name at two ranks is rejected so that
    term parsing stays deterministic.
    """

    sorts: tuple[str, ...]
    ops: tuple[Operation, ...]

    def __post_init__(self):
        if not self.sorts:
            raise ValidationError("signature needs at least one sort")
        if len(set(self.sorts)) != len(self.sorts):
            raise ValidationError("duplicate sort names")
        seen = set()
        for op in self.ops:
            if op.name in seen:
                raise ValidationError(f"operation {op.name!r} declared at two ranks")
            seen.add(op.name)
            for s in (*op.arity, op.result):
                if s not in self.sorts:
                    raise ValidationError(f"operation {op.name!r} uses unknown sort {s!r}")

    @property
    def op_by_name(self) -> dict[str, Operation]:
        return {op.name: op for op in self.ops}

    def operation(self, name: str) -> Operation:
        for op in self.ops:
            if op.name == name:
                return op
        raise ValidationError(f"unknown operation symbol {name!r}")

    def op_index(self, name: str) -> int:
        for i, op in enumerate(self.ops):
            if op.name == name:
                return i
        raise ValidationError(f"unknown operation symbol {name!r}")


def signature(sorts: Sequence[str], ops: Iterable[tuple[str, Sequence[str], str]]) -> Signature:
    """Convenience builder: ``signature(["s"], [("c", [], "s"), ("g", ["s"], "s")])``."""
    return Signature(tuple(sorts), tuple(Operation(n, tuple(a), r) for n, a, r in ops))


@dataclass(frozen=True)
class SortedVars:
    """Per-sort finite ordered variable sets; names are globally unique."""

    by_sort: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self):
        names = [x for _, xs in self.by_sort for x in xs]
        if len(set(names)) != len(names):
            raise ValidationError("variable names must be globally unique across sorts")

    def names(self, sort: str) -> tuple[str, ...]:
        for s, xs in self.by_sort:
            if s == sort:
                return xs
        return ()

    def sort_of(self, name: str) -> str | None:
        for s, xs in self.by_sort:
            if name in xs:
                return s
        return None

    def all_names(self) -> tuple[str, ...]:
        return tuple(x for _, xs in self.by_sort for x in xs)

    def var_index(self, name: str) -> int:
        for i, x in enumerate(self.all_names()):
            if x == name:
                return i
        raise ValidationError(f"unknown variable {name!r}")


def sorted_vars(signature: Signature, by_sort: Mapping[str, Sequence[str]]) -> SortedVars:
    """Build a variable set over the signature's sorts, disjoint from its op names."""
    opnames = {op.name for op in signature.ops}
    for sort, names in by_sort.items():
        if sort not in signature.sorts:
            raise ValidationError(f"variables declared at unknown sort {sort!r}")
        for x in names:
            if x in opnames:
                raise ValidationError(f"variable {x!r} collides with an operation name")
            if not NAME_RE.fullmatch(x):
                raise ValidationError(f"bad variable name {x!r}")
    pairs = tuple((s, tuple(by_sort.get(s, ()))) for s in signature.sorts)
    return SortedVars(pairs)


class Term:
    """Base class for sorted terms: either a Var leaf or an operation Node."""

    __slots__ = ()
    sort: str
    size: int


@dataclass(frozen=True)
class Var(Term):
    name: str
    sort: str

    @property
    def size(self) -> int:
        return 1

    def __repr__(self):
        return f"Var({self.name})"


@dataclass(frozen=True)
class Node(Term):
    symbol: str
    children: tuple[Term, ...]
    sort: str
    size: int

    def __repr__(self):
        return f"Node({print_term(self)})"


def node(op: Operation, children: Sequence[Term]) -> Node:
    """Build a well-sorted operation node, checking child count and sorts."""
    children = tuple(children)
    if len(children) != len(op.arity):
        raise SortError(
            f"{op.name!r} expects {len(op.arity)} arguments, got {len(children)}"
        )
    for i, (child, want) in enumerate(zip(children, op.arity)):
        if child.sort != want:
            raise SortError(
                f"argument {i} of {op.name!r} must have sort {want!r}, got {child.sort!r}"
            )
    return Node(op.name, children, op.result, 1 + sum(c.size for c in children))


def _check_disjoint(sig: Signature, vars: SortedVars) -> None:
    opnames = {op.name for op in sig.ops}
    clash = opnames.intersection(vars.all_names())
    if clash:
        raise ValidationError(f"variable names collide with operation names: {sorted(clash)}")


# ---------------------------------------------------------------------------
# parsing and printing


def _tokenize(text: str) -> list[str]:
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "(),@":
            tokens.append(ch)
            i += 1
            continue
        m = NAME_RE.match(text, i)
        if not m:
            raise ParseError(f"unexpected character {ch!r} at offset {i}")
        tokens.append(m.group())
        i = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[str], sig: Signature, vars: SortedVars):
        self.tokens = tokens
        self.pos = 0
        self.sig = sig
        self.vars = vars
        self.opmap = sig.op_by_name

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input")
        self.pos += 1
        return tok

    def parse_term(self) -> Term:
        tok = self.take()
        if not NAME_RE.fullmatch(tok):
            raise ParseError(f"expected a name, got {tok!r}")
        if tok in self.opmap:
            op = self.opmap[tok]
            args: list[Term] = []
            if self.peek() == "(":
                self.take()
                if self.peek() != ")":
                    args.append(self.parse_term())
                    while self.peek() == ",":
                        self.take()
                        args.append(self.parse_term())
                if self.take() != ")":
                    raise ParseError("expected ')'")
            return node(op, args)
        sort = self.vars.sort_of(tok)
        if sort is None:
            raise ParseError(f"unknown symbol {tok!r}")
        if self.peek() == "(":
            raise ParseError(f"variable {tok!r} cannot take arguments")
        return Var(tok, sort)


def parse_term(text: str, sig: Signature, vars: SortedVars) -> Term:
    """Parse prefix syntax ``name`` / ``name(t1,...,tn)`` into a well-sorted term."""
    _check_disjoint(sig, vars)
    p = _Parser(_tokenize(text), sig, vars)
    term = p.parse_term()
    if p.peek() is not None:
        raise ParseError(f"trailing input at token {p.peek()!r}")
    return term


def print_term(term: Term) -> str:
    if isinstance(term, Var):
        return term.name
    assert isinstance(term, Node)
    if not term.children:
        return term.symbol
    return f"{term.symbol}({','.join(print_term(c) for c in term.children)})"


def typecheck(term: Term, sig: Signature, vars: SortedVars) -> str:
    """Re-validate an untrusted term bottom-up; returns its unique sort."""
    _check_disjoint(sig, vars)

    def walk(t: Term) -> str:
        if isinstance(t, Var):
            sort = vars.sort_of(t.name)
            if sort is None:
                raise SortError(f"unknown variable {t.name!r}")
            if sort != t.sort:
                raise SortError(f"variable {t.name!r} tagged with wrong sort {t.sort!r}")
            return sort
        assert isinstance(t, Node)
        op = sig.operation(t.symbol)
        if len(t.children) != len(op.arity):
            raise SortError(f"{t.symbol!r} arity mismatch")
        for child, want in zip(t.children, op.arity):
            got = walk(child)
            if got != want:
                raise SortError(
                    f"child of {t.symbol!r} has sort {got!r}, expected {want!r}"
                )
        if t.sort != op.result:
            raise SortError(f"node {t.symbol!r} tagged with wrong sort {t.sort!r}")
        return op.result

    return walk(term)


# ---------------------------------------------------------------------------
# occurrences, variables, subterms


def count_occurrences(term: Term, name: str, vars: SortedVars) -> int:
    """Number of occurrences of the variable in the term (preorder leaves)."""
    if vars.sort_of(name) is None:
        raise ValidationError(f"unknown variable {name!r}")
    return _count(term, name)


def _count(term: Term, name: str) -> int:
    if isinstance(term, Var):
        return 1 if term.name == name else 0
    return sum(_count(c, name) for c in term.children)


def occurrence_counts(term: Term) -> dict[str, int]:
    """Per-variable occurrence counts, keyed by variable name."""
    counts: dict[str, int] = {}

    def walk(t: Term):
        if isinstance(t, Var):
            counts[t.name] = counts.get(t.name, 0) + 1
        else:
            for c in t.children:
                walk(c)

    walk(term)
    return counts


def variables_of(term: Term) -> dict[str, set[str]]:
    """The sorted variable set of the term: sort -> set of names."""
    out: dict[str, set[str]] = {}

    def walk(t: Term):
        if isinstance(t, Var):
            out.setdefault(t.sort, set()).add(t.name)
        else:
            for c in t.children:
                walk(c)

    walk(term)
    return out


def subterms_of(term: Term) -> dict[str, set[Term]]:
    """All subterms, grouped by sort (the set is downward closed under children)."""
    out: dict[str, set[Term]] = {}

    def walk(t: Term):
        out.setdefault(t.sort, set()).add(t)
        if isinstance(t, Node):
            for c in t.children:
                walk(c)

    walk(term)
    return out


def substitute_occurrences(
    term: Term, replacements: Mapping[str, Sequence[Term]]
) -> Term:
    """Occurrence-indexed substitution.

    For each variable x the sequence supplies one replacement per occurrence of
    x, in preorder; occurrence alpha of x becomes ``replacements[x][alpha]``.
    Variables without an entry keep their occurrences.  Each replacement must
    have the variable's sort, and the sequence length must equal the
    occurrence count.
    """
    counts = occurrence_counts(term)
    sorts_of_vars = {}

    def var_sorts(t: Term):
        if isinstance(t, Var):
            sorts_of_vars[t.name] = t.sort
        else:
            for c in t.children:
                var_sorts(c)

    var_sorts(term)
    for name, seq in replacements.items():
        want = counts.get(name, 0)
        if len(seq) != want:
            raise ValidationError(
                f"variable {name!r} occurs {want} times but got {len(seq)} replacements"
            )
        if want:
            sort = sorts_of_vars[name]
            for q in seq:
                if q.sort != sort:
                    raise SortError(
                        f"replacement for {name!r} has sort {q.sort!r}, expected {sort!r}"
                    )

    cursor = {name: 0 for name in replacements}

    def walk(t: Term) -> Term:
        if isinstance(t, Var):
            if t.name in replacements:
                i = cursor[t.name]
                cursor[t.name] = i + 1
                return replacements[t.name][i]
            return t
        children = tuple(walk(c) for c in t.children)
        return Node(t.symbol, children, t.sort, 1 + sum(c.size for c in children))

    return walk(term)


def substitute_uniform(term: Term, mapping: Mapping[str, Term]) -> Term:
    """Replace every occurrence of each mapped variable by the same term."""
    if not mapping:
        return term
    if isinstance(term, Var):
        return mapping.get(term.name, term)
    children = tuple(substitute_uniform(c, mapping) for c in term.children)
    return Node(term.symbol, children, term.sort, 1 + sum(c.size for c in children))


# ---------------------------------------------------------------------------
# contexts


HOLE = "@"


@dataclass(frozen=True)
class Hole(Term):
    sort: str

    @property
    def size(self) -> int:
        return 1

    def __repr__(self):
        return f"Hole({self.sort})"


@dataclass(frozen=True)
class Context:
    """A term with exactly one hole of a declared sort.

    Plugging a term of the hole sort yields a well-sorted term of the root
    sort; composition of contexts plugs one context into another's hole.
    """

    body: Term  # contains exactly one Hole leaf
    hole_sort: str
    root_sort: str

    def __post_init__(self):
        n = _hole_count(self.body)
        if n != 1:
            raise ValidationError(f"context must have exactly one hole, found {n}")


def _hole_count(t: Term) -> int:
    if isinstance(t, Hole):
        return 1
    if isinstance(t, Var):
        return 0
    return sum(_hole_count(c) for c in t.children)


def context(body: Term) -> Context:
    holes = _collect_holes(body)
    if len(holes) != 1:
        raise ValidationError(f"context must have exactly one hole, found {len(holes)}")
    return Context(body, holes[0].sort, body.sort)


def _collect_holes(t: Term) -> list[Hole]:
    if isinstance(t, Hole):
        return [t]
    if isinstance(t, Var):
        return []
    return [h for c in t.children for h in _collect_holes(c)]


def hole_context(sort: str) -> Context:
    """The identity translation: a context that is just the hole."""
    return Context(Hole(sort), sort, sort)


def apply_context(ctx: Context, q: Term) -> Term:
    if q.sort != ctx.hole_sort:
        raise SortError(
            f"context hole has sort {ctx.hole_sort!r}, got term of sort {q.sort!r}"
        )
    return _plug(ctx.body, q)


def _plug(t: Term, q: Term) -> Term:
    if isinstance(t, Hole):
        return q
    if isinstance(t, Var):
        return t
    children = tuple(_plug(c, q) for c in t.children)
    return Node(t.symbol, children, t.sort, 1 + sum(c.size for c in children))


def compose_contexts(outer: Context, inner: Context) -> Context:
    """The context ``outer(inner(.))``; inner's root must fit outer's hole."""
    if inner.root_sort != outer.hole_sort:
        raise SortError(
            f"cannot compose: inner root sort {inner.root_sort!r} vs outer hole sort "
            f"{outer.hole_sort!r}"
        )
    return Context(_plug(outer.body, inner.body), inner.hole_sort, outer.root_sort)


def parse_context(text: str, sig: Signature, vars: SortedVars) -> Context:
    """Parse a context; the hole is written ``@`` and an optional sort cannot be
    inferred from syntax, so the hole takes the sort demanded by its position.

    A bare ``@`` needs the signature to have a single sort; elsewhere the hole
    sort is fixed by the argument position it fills.
    """
    _check_disjoint(sig, vars)
    tokens = _tokenize(text)

    def parse_at(expected: str | None) -> Term:
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError("unexpected end of input")
        tok = tokens[pos]
        pos += 1
        if tok == HOLE:
            if expected is None:
                if len(sig.sorts) != 1:
                    raise ParseError("bare hole is ambiguous over a multi-sorted signature")
                expected = sig.sorts[0]
            return Hole(expected)
        if not NAME_RE.fullmatch(tok):
            raise ParseError(f"expected a name, got {tok!r}")
        if tok in sig.op_by_name:
            op = sig.op_by_name[tok]
            args: list[Term] = []
            if pos < len(tokens) and tokens[pos] == "(":
                pos += 1
                i = 0
                if pos < len(tokens) and tokens[pos] != ")":
                    while True:
                        if i >= len(op.arity):
                            raise ParseError(f"too many arguments for {tok!r}")
                        args.append(parse_at(op.arity[i]))
                        i += 1
                        if pos < len(tokens) and tokens[pos] == ",":
                            pos += 1
                            continue
                        break
                if pos >= len(tokens) or tokens[pos] != ")":
                    raise ParseError("expected ')'")
                pos += 1
            return node(op, args)
        sort = vars.sort_of(tok)
        if sort is None:
            raise ParseError(f"unknown symbol {tok!r}")
        return Var(tok, sort)

    pos = 0
    body = parse_at(None)
    if pos != len(tokens):
        raise ParseError("trailing input")
    return context(body)


def print_context(ctx: Context) -> str:
    def walk(t: Term) -> str:
        if isinstance(t, Hole):
            return HOLE
        if isinstance(t, Var):
            return t.name
        if not t.children:
            return t.symbol
        return f"{t.symbol}({','.join(walk(c) for c in t.children)})"

    return walk(ctx.body)


# ---------------------------------------------------------------------------
# canonical ordering and enumeration


def term_sort_key(sig: Signature, vars: SortedVars):
    """Key for the canonical order: size, then root symbol by declaration
    order (operations before variables), then children lexicographically."""
    op_rank = {op.name: i for i, op in enumerate(sig.ops)}
    var_rank = {x: i for i, x in enumerate(vars.all_names())}

    def key(t: Term):
        if isinstance(t, Var):
            return (1, (1, var_rank[t.name]), ())
        return (
            t.size,
            (0, op_rank[t.symbol]),
            tuple(key(c) for c in t.children),
        )

    return key


def enumerate_all_terms(
    sig: Signature, vars: SortedVars, max_nodes: int
) -> dict[str, list[Term]]:
    """All well-sorted terms with at most ``max_nodes`` nodes, per sort, in
    canonical order."""
    _check_disjoint(sig, vars)
    if max_nodes < 1:
        return {s: [] for s in sig.sorts}
    # by_size[n][sort] lists the terms with exactly n nodes
    by_size: list[dict[str, list[Term]]] = [dict()]
    leaves: dict[str, list[Term]] = {s: [] for s in sig.sorts}
    for op in sig.ops:
        if not op.arity:
            leaves[op.result].append(Node(op.name, (), op.result, 1))
    for s in sig.sorts:
        for x in vars.names(s):
            leaves[s].append(Var(x, s))
    by_size.append(leaves)
    for n in range(2, max_nodes + 1):
        layer: dict[str, list[Term]] = {s: [] for s in sig.sorts}
        for op in sig.ops:
            k = len(op.arity)
            if k == 0 or n - 1 < k:
                continue
            for split in _compositions(n - 1, k):
                pools = [by_size[split[i]].get(op.arity[i], []) for i in range(k)]
                if any(not p for p in pools):
                    continue
                for children in itertools.product(*pools):
                    layer[op.result].append(
                        Node(op.name, children, op.result, n)
                    )
        by_size.append(layer)
    key = term_sort_key(sig, vars)
    out: dict[str, list[Term]] = {}
    for s in sig.sorts:
        terms = [t for layer in by_size[1:] for t in layer.get(s, [])]
        terms.sort(key=key)
        out[s] = terms
    return out


def _compositions(total: int, parts: int):
    """All ways to write ``total`` as an ordered sum of ``parts`` positive ints."""
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first, *rest)


def enumerate_terms(
    sig: Signature, vars: SortedVars, sort: str, max_nodes: int
) -> list[Term]:
    if sort not in sig.sorts:
        raise ValidationError(f"unknown sort {sort!r}")
    return enumerate_all_terms(sig, vars, max_nodes)[sort]
