"""Recognizable tree languages as deterministic complete bottom-up evaluators.

A ``Recognizer`` is a finite algebra, a variable assignment, and per-sort
accepting subsets; it accepts a term when the term evaluates into the
accepting set at its sort.  Nondeterministic automata (``NTA``) are internal
machinery only and are eliminated by ``determinize``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from .algebra import (
    FiniteAlgebra,
    check_assignment,
    closure_elements,
    evaluate,
    finite_algebra,
    product_algebra,
    restrict_algebra,
    translation_table,
)
from .congruence import syntactic_congruence
from .core import (
    Context,
    Node,
    Signature,
    SortedVars,
    SortError,
    Term,
    ValidationError,
    Var,
    subterms_of,
    term_sort_key,
)


@dataclass(frozen=True)
class Recognizer:
    vars: SortedVars
    algebra: FiniteAlgebra
    assignment: tuple[tuple[str, int], ...]
    accepting: tuple[tuple[str, tuple[int, ...]], ...]  # per sort, sorted elements

    def __post_init__(self):
        check_assignment(self.algebra, self.vars, dict(self.assignment))
        sizes = dict(self.algebra.carriers)
        acc = dict(self.accepting)
        if set(acc) != set(self.algebra.signature.sorts):
            raise ValidationError("accepting sets must cover every sort")
        for s, elems in acc.items():
            if any(not (0 <= e < sizes[s]) for e in elems):
                raise ValidationError(f"accepting element out of range at sort {s!r}")
            if tuple(sorted(set(elems))) != elems:
                raise ValidationError(f"accepting set at {s!r} must be sorted and duplicate-free")

    @property
    def signature(self) -> Signature:
        return self.algebra.signature

    def accepting_at(self, sort: str) -> frozenset[int]:
        return frozenset(dict(self.accepting)[sort])


def recognizer(
    vars: SortedVars,
    algebra: FiniteAlgebra,
    assignment: Mapping[str, int],
    accepting: Mapping[str, Sequence[int]],
) -> Recognizer:
    sig = algebra.signature
    return Recognizer(
        vars,
        algebra,
        tuple((x, assignment[x]) for s in sig.sorts for x in vars.names(s)),
        tuple((s, tuple(sorted(set(accepting.get(s, ()))))) for s in sig.sorts),
    )


def accepts(rec: Recognizer, term: Term) -> bool:
    value = evaluate(rec.algebra, dict(rec.assignment), term)
    return value in rec.accepting_at(term.sort)


def membership_fn(rec: Recognizer):
    """A compiled membership test, faster than repeated ``accepts`` calls."""
    sizes = dict(rec.algebra.carriers)
    tables = dict(rec.algebra.tables)
    opmap = rec.signature.op_by_name
    asg = dict(rec.assignment)
    acc = {s: rec.accepting_at(s) for s in rec.signature.sorts}

    def value(t: Term) -> int:
        if isinstance(t, Var):
            return asg[t.name]
        op = opmap[t.symbol]
        index = 0
        for child, s in zip(t.children, op.arity):
            index = index * sizes[s] + value(child)
        return tables[t.symbol][index]

    def member(t: Term) -> bool:
        return value(t) in acc[t.sort]

    return member


def empty_recognizer(sig: Signature, vars: SortedVars) -> Recognizer:
    alg = finite_algebra(
        sig,
        {s: 1 for s in sig.sorts},
        {op.name: [0] * _space(sig, op, {s: 1 for s in sig.sorts}) for op in sig.ops},
    )
    return recognizer(vars, alg, {x: 0 for x in vars.all_names()}, {})


def universal_recognizer(sig: Signature, vars: SortedVars) -> Recognizer:
    alg = finite_algebra(
        sig,
        {s: 1 for s in sig.sorts},
        {op.name: [0] * _space(sig, op, {s: 1 for s in sig.sorts}) for op in sig.ops},
    )
    return recognizer(vars, alg, {x: 0 for x in vars.all_names()}, {s: [0] for s in sig.sorts})


def _space(sig: Signature, op, sizes) -> int:
    n = 1
    for s in op.arity:
        n *= sizes[s]
    return n


def restrict_to_sort(rec: Recognizer, sort: str) -> Recognizer:
    """Keep the language at one sort and empty it elsewhere."""
    acc = {sort: dict(rec.accepting)[sort]}
    return recognizer(rec.vars, rec.algebra, dict(rec.assignment), acc)


def complement_accepting(rec: Recognizer) -> Recognizer:
    acc = {
        s: [e for e in range(n) if e not in rec.accepting_at(s)]
        for s, n in rec.algebra.carriers
    }
    return recognizer(rec.vars, rec.algebra, dict(rec.assignment), acc)


# ---------------------------------------------------------------------------
# Boolean combinations


def _check_compatible(r1: Recognizer, r2: Recognizer) -> None:
    if r1.signature != r2.signature:
        raise ValidationError("recognizers have different signatures")
    if r1.vars != r2.vars:
        raise ValidationError("recognizers have different variable sets")


def combine(kind: str, r1: Recognizer, r2: Recognizer) -> Recognizer:
    """Product construction for union, intersection, and difference."""
    _check_compatible(r1, r2)
    if kind not in ("union", "intersection", "difference"):
        raise ValidationError(f"unknown combination kind {kind!r}")
    prod, projs = product_algebra([r1.algebra, r2.algebra])
    a1 = dict(r1.assignment)
    a2 = dict(r2.assignment)
    n2 = dict(r2.algebra.carriers)
    assignment = {x: a1[x] * n2[r1.vars.sort_of(x)] + a2[x] for x in r1.vars.all_names()}
    accepting = {}
    for s in r1.signature.sorts:
        m1 = r1.accepting_at(s)
        m2 = r2.accepting_at(s)
        elems = []
        for e in range(prod.size(s)):
            in1 = projs[0][s][e] in m1
            in2 = projs[1][s][e] in m2
            keep = (
                (in1 or in2)
                if kind == "union"
                else (in1 and in2) if kind == "intersection" else (in1 and not in2)
            )
            if keep:
                elems.append(e)
        accepting[s] = elems
    return recognizer(r1.vars, prod, assignment, accepting)


# ---------------------------------------------------------------------------
# emptiness, equivalence, minimization


def _seed(rec: Recognizer) -> dict[str, list[int]]:
    """Constants' values plus the assignment image, in declaration order."""
    seed: dict[str, list[int]] = {s: [] for s in rec.signature.sorts}
    for op in rec.signature.ops:
        if not op.arity:
            v = rec.algebra.apply(op.name, [])
            if v not in seed[op.result]:
                seed[op.result].append(v)
    asg = dict(rec.assignment)
    for sort, names in rec.vars.by_sort:
        for x in names:
            if asg[x] not in seed[sort]:
                seed[sort].append(asg[x])
    return seed


def is_empty(rec: Recognizer) -> bool:
    """Language emptiness by reachability: every term evaluates into the
    generated subalgebra of the seed, and every reachable value is some term's
    value."""
    reached = closure_elements(rec.algebra, _seed(rec))
    for s in rec.signature.sorts:
        if rec.accepting_at(s).intersection(reached[s]):
            return False
    return True


def equivalent(r1: Recognizer, r2: Recognizer) -> bool:
    _check_compatible(r1, r2)
    return is_empty(combine("difference", r1, r2)) and is_empty(
        combine("difference", r2, r1)
    )


def minimize(rec: Recognizer) -> Recognizer:
    """Restrict to the reachable subalgebra, then quotient by the syntactic
    congruence of the accepting set there.

    The result's per-sort state counts are the per-sort indices of the
    syntactic congruence of the language on reachable values.
    """
    reached = closure_elements(rec.algebra, _seed(rec))
    small, index = restrict_algebra(rec.algebra, reached)
    acc = {
        s: frozenset(index[s][e] for e in rec.accepting_at(s) if e in index[s])
        for s in rec.signature.sorts
    }
    omega = syntactic_congruence(small, acc)
    from .algebra import quotient_algebra

    quotient, projection = quotient_algebra(small, omega)
    asg = dict(rec.assignment)
    assignment = {
        x: projection[sort][index[sort][asg[x]]]
        for sort, names in rec.vars.by_sort
        for x in names
    }
    accepting = {
        s: sorted({projection[s][e] for e in acc[s]}) for s in rec.signature.sorts
    }
    return recognizer(rec.vars, quotient, assignment, accepting)


# ---------------------------------------------------------------------------
# nondeterministic automata


@dataclass(frozen=True)
class NTA:
    """Bottom-up nondeterministic automaton with epsilon rules; internal only.

    States are per-sort integers ``0..states[sort]-1``.  ``leaf`` maps variable
    names to state sets, ``rules`` maps ``(opname, state tuple)`` to state
    sets, and ``epsilon`` lists per-sort edges ``state -> state set``.
    """

    signature: Signature
    vars: SortedVars
    states: tuple[tuple[str, int], ...]
    leaf: tuple[tuple[str, frozenset[int]], ...]
    rules: tuple[tuple[tuple[str, tuple[int, ...]], frozenset[int]], ...]
    epsilon: tuple[tuple[str, tuple[tuple[int, int], ...]], ...]
    accepting: tuple[tuple[str, frozenset[int]], ...]

    def eps_closure_maps(self) -> dict[str, list[frozenset[int]]]:
        """Per sort: state -> reflexive-transitive epsilon closure."""
        out = {}
        eps = dict(self.epsilon)
        for sort, n in self.states:
            adj: list[set[int]] = [set() for _ in range(n)]
            for a, b in eps.get(sort, ()):
                adj[a].add(b)
            closures = []
            for q in range(n):
                seen = {q}
                stack = [q]
                while stack:
                    cur = stack.pop()
                    for nxt in adj[cur]:
                        if nxt not in seen:
                            seen.add(nxt)
                            stack.append(nxt)
                closures.append(frozenset(seen))
            out[sort] = closures
        return out


def nta(
    sig: Signature,
    vars: SortedVars,
    states: Mapping[str, int],
    leaf: Mapping[str, frozenset[int] | set[int]],
    rules: Mapping[tuple[str, tuple[int, ...]], frozenset[int] | set[int]],
    epsilon: Mapping[str, Sequence[tuple[int, int]]],
    accepting: Mapping[str, frozenset[int] | set[int]],
) -> NTA:
    return NTA(
        sig,
        vars,
        tuple((s, states.get(s, 0)) for s in sig.sorts),
        tuple((x, frozenset(leaf.get(x, frozenset()))) for x in vars.all_names()),
        tuple(sorted(((k, frozenset(v)) for k, v in rules.items()), key=lambda kv: (kv[0][0], kv[0][1]))),
        tuple((s, tuple(sorted(set(epsilon.get(s, ()))))) for s in sig.sorts),
        tuple((s, frozenset(accepting.get(s, frozenset()))) for s in sig.sorts),
    )


DETERMINIZE_CAP = 1 << 20


def determinize(machine: NTA, cap: int = DETERMINIZE_CAP) -> Recognizer:
    """Subset construction per sort, pruned to reachable subsets during
    construction; the result is deterministic and complete on the reachable
    subset carriers."""
    sig = machine.signature
    closures = machine.eps_closure_maps()
    leaf = dict(machine.leaf)
    rules = dict(machine.rules)
    eps = {sort: closures[sort] for sort in sig.sorts}

    def close(sort: str, states: frozenset[int]) -> frozenset[int]:
        out: set[int] = set()
        for q in states:
            out.update(eps[sort][q])
        return frozenset(out)

    subsets: dict[str, list[frozenset[int]]] = {s: [] for s in sig.sorts}
    index: dict[str, dict[frozenset[int], int]] = {s: {} for s in sig.sorts}

    def intern(sort: str, subset: frozenset[int]) -> int:
        got = index[sort].get(subset)
        if got is not None:
            return got
        i = len(subsets[sort])
        subsets[sort].append(subset)
        index[sort][subset] = i
        if sum(len(v) for v in subsets.values()) > cap:
            raise ValidationError("determinization state-space guard exceeded")
        return i

    # leaves first: constants in declaration order, then variables
    assignment: dict[str, int] = {}
    tables: dict[str, dict[tuple[int, ...], int]] = {op.name: {} for op in sig.ops}
    for op in sig.ops:
        if not op.arity:
            subset = close(op.result, frozenset(rules.get((op.name, ()), frozenset())))
            tables[op.name][()] = intern(op.result, subset)
    for sort, names in machine.vars.by_sort:
        for x in names:
            assignment[x] = intern(sort, close(sort, leaf.get(x, frozenset())))

    changed = True
    while changed:
        changed = False
        for op in sig.ops:
            if not op.arity:
                continue
            pools = [range(len(subsets[s])) for s in op.arity]
            for args in itertools.product(*pools):
                if args in tables[op.name]:
                    continue
                member_pools = [subsets[s][i] for s, i in zip(op.arity, args)]
                gathered: set[int] = set()
                for members in itertools.product(*member_pools):
                    hit = rules.get((op.name, members))
                    if hit:
                        gathered.update(hit)
                subset = close(op.result, frozenset(gathered))
                tables[op.name][args] = intern(op.result, subset)
                changed = True

    carriers = {s: len(subsets[s]) for s in sig.sorts}
    dense = {}
    for op in sig.ops:
        entries = []
        for args in itertools.product(*[range(carriers[s]) for s in op.arity]):
            entries.append(tables[op.name][args])
        dense[op.name] = tuple(entries)
    alg = finite_algebra(sig, carriers, dense)
    nta_accepting = dict(machine.accepting)
    accepting = {
        s: [
            i
            for i, subset in enumerate(subsets[s])
            if subset.intersection(nta_accepting.get(s, frozenset()))
        ]
        for s in sig.sorts
    }
    return recognizer(machine.vars, alg, assignment, accepting)


def evaluator_nta(rec: Recognizer) -> NTA:
    """View a deterministic evaluator as an NTA (one state per carrier element)."""
    sig = rec.signature
    rules: dict[tuple[str, tuple[int, ...]], frozenset[int]] = {}
    for op in sig.ops:
        pools = [range(rec.algebra.size(s)) for s in op.arity]
        for args in itertools.product(*pools):
            rules[(op.name, tuple(args))] = frozenset({rec.algebra.apply(op.name, args)})
    asg = dict(rec.assignment)
    return nta(
        sig,
        rec.vars,
        {s: n for s, n in rec.algebra.carriers},
        {x: frozenset({asg[x]}) for x in rec.vars.all_names()},
        rules,
        {},
        {s: rec.accepting_at(s) for s in sig.sorts},
    )


# ---------------------------------------------------------------------------
# basic languages


def recognize_basic(sig: Signature, vars: SortedVars, pattern: Term) -> Recognizer:
    """A recognizer for the singleton of a basic pattern: a variable, a
    constant, or a flat term ``op(x_0,...,x_{n-1})`` over variables (repeats
    allowed).

    The three constructions mirror the standard proofs: a two-element sink
    algebra with a characteristic assignment for a variable; a two-element
    algebra where only the constant produces 1; and, for a flat term, carriers
    ``k_t + 1`` (``k_s + 2`` at the root sort) with a single table entry
    detecting the coded argument tuple.
    """
    if isinstance(pattern, Var):
        sizes = {s: 2 for s in sig.sorts}
        tables = {op.name: [0] * _space(sig, op, sizes) for op in sig.ops}
        alg = finite_algebra(sig, sizes, tables)
        assignment = {x: 0 for x in vars.all_names()}
        assignment[pattern.name] = 1
        return recognizer(vars, alg, assignment, {pattern.sort: [1]})
    if not isinstance(pattern, Node):
        raise ValidationError("pattern must be a variable, constant, or flat term")
    if not pattern.children:
        sizes = {s: 2 for s in sig.sorts}
        tables = {}
        for op in sig.ops:
            if op.name == pattern.symbol:
                tables[op.name] = [1]
            else:
                tables[op.name] = [0] * _space(sig, op, sizes)
        alg = finite_algebra(sig, sizes, tables)
        return recognizer(
            vars, alg, {x: 0 for x in vars.all_names()}, {pattern.sort: [1]}
        )
    for child in pattern.children:
        if not isinstance(child, Var):
            raise ValidationError("flat pattern arguments must be variables")
    op = sig.operation(pattern.symbol)
    root = op.result
    # code the distinct argument variables per sort, in first-occurrence order
    codes: dict[str, dict[str, int]] = {s: {} for s in sig.sorts}
    for child in pattern.children:
        table = codes[child.sort]
        if child.name not in table:
            table[child.name] = len(table)
    k = {s: len(codes[s]) for s in sig.sorts}
    sizes = {s: k[s] + (2 if s == root else 1) for s in sig.sorts}
    junk = {s: k[s] for s in sig.sorts}
    hit = k[root] + 1
    wanted = tuple(codes[c.sort][c.name] for c in pattern.children)
    tables = {}
    for o in sig.ops:
        if o.name == op.name:
            entries = []
            for args in itertools.product(*[range(sizes[s]) for s in o.arity]):
                entries.append(hit if args == wanted else junk[root])
            tables[o.name] = entries
        else:
            tables[o.name] = [junk[o.result]] * _space(sig, o, sizes)
    alg = finite_algebra(sig, sizes, tables)
    assignment = {}
    for sort, names in vars.by_sort:
        for x in names:
            assignment[x] = codes[sort].get(x, junk[sort])
    return recognizer(vars, alg, assignment, {root: [hit]})


def recognize_singleton(sig: Signature, vars: SortedVars, term: Term) -> Recognizer:
    """A recognizer for the singleton of an arbitrary term, via the subterm
    automaton: one state per distinct subterm plus a junk sink per sort."""
    by_sort = subterms_of(term)
    key = term_sort_key(sig, vars)
    ordered = {s: sorted(by_sort.get(s, ()), key=key) for s in sig.sorts}
    index = {s: {t: i for i, t in enumerate(ordered[s])} for s in sig.sorts}
    junk = {s: len(ordered[s]) for s in sig.sorts}
    sizes = {s: junk[s] + 1 for s in sig.sorts}
    tables = {}
    for op in sig.ops:
        entries = []
        for args in itertools.product(*[range(sizes[s]) for s in op.arity]):
            target = junk[op.result]
            if all(a < junk[s] for a, s in zip(args, op.arity)):
                children = tuple(ordered[s][a] for a, s in zip(args, op.arity))
                candidate = Node(
                    op.name, children, op.result, 1 + sum(c.size for c in children)
                )
                target = index[op.result].get(candidate, junk[op.result])
            entries.append(target)
        tables[op.name] = entries
    alg = finite_algebra(sig, sizes, tables)
    assignment = {}
    for sort, names in vars.by_sort:
        for x in names:
            assignment[x] = index[sort].get(Var(x, sort), junk[sort])
    return recognizer(vars, alg, assignment, {term.sort: [index[term.sort][term]]})


def recognize_finite(sig: Signature, vars: SortedVars, terms: Sequence[Term]) -> Recognizer:
    """A recognizer for a finite term set, by unioning singletons."""
    out = empty_recognizer(sig, vars)
    for t in terms:
        out = combine("union", out, recognize_singleton(sig, vars, t))
        out = minimize(out)
    return out


# ---------------------------------------------------------------------------
# inverse translations


def inverse_translation(rec: Recognizer, ctx: Context) -> Recognizer:
    """Preimage of the language under a one-hole context: same algebra, with
    the accepting set at the hole sort replaced by the table preimage of the
    root-sort accepting set, and every other sort emptied."""
    if ctx.root_sort not in rec.signature.sorts or ctx.hole_sort not in rec.signature.sorts:
        raise SortError("context sorts do not belong to the recognizer's signature")
    table = translation_table(rec.algebra, dict(rec.assignment), ctx)
    target = rec.accepting_at(ctx.root_sort)
    preimage = [q for q, v in enumerate(table) if v in target]
    return recognizer(
        rec.vars, rec.algebra, dict(rec.assignment), {ctx.hole_sort: preimage}
    )
