"""Shared fixtures: the two reference signatures, the parity recognizer, the
worked hyperderivor/derivor examples, and seeded random instance generators.
"""

from __future__ import annotations

import random

import pytest

from treelang.algebra import evaluate_many, finite_algebra
from treelang.core import (
    Context,
    Hole,
    Node,
    Signature,
    SortedVars,
    Term,
    Var,
    context,
    enumerate_all_terms,
    node,
    parse_term,
    signature,
    sorted_vars,
)
from treelang.derivor import Derivor, HallTerm, derivor, hall_term
from treelang.recognizer import Recognizer, recognizer
from treelang.treehom import Hyperderivor, hyperderivor, placeholder


# ---------------------------------------------------------------------------
# fixed fixtures


@pytest.fixture(scope="session")
def f1():
    return signature(
        ["s"], [("c", [], "s"), ("g", ["s"], "s"), ("sigma", ["s", "s"], "s")]
    )


@pytest.fixture(scope="session")
def x1(f1):
    return sorted_vars(f1, {"s": ["x", "z"]})


@pytest.fixture(scope="session")
def f2():
    return signature(
        ["e", "b"],
        [("zero", [], "e"), ("succ", ["e"], "e"), ("iszero", ["e"], "b")],
    )


@pytest.fixture(scope="session")
def x2(f2):
    return sorted_vars(f2, {"e": ["x"]})


@pytest.fixture(scope="session")
def rpar_algebra(f1):
    return finite_algebra(
        f1, {"s": 2}, {"c": [0], "g": [1, 0], "sigma": [0, 1, 1, 0]}
    )


@pytest.fixture(scope="session")
def r_par(f1, x1, rpar_algebra):
    return recognizer(x1, rpar_algebra, {"x": 0, "z": 1}, {"s": [0]})


@pytest.fixture(scope="session")
def h1(f1, x1, f2, x2):
    v0 = placeholder(0, "s")
    return hyperderivor(
        f2,
        x2,
        f1,
        x1,
        {"e": "s", "b": "s"},
        {
            "zero": parse_term("c", f1, x1),
            "succ": Node("g", (v0,), "s", 2),
            "iszero": Node("sigma", (v0, parse_term("c", f1, x1)), "s", 3),
        },
        {"x": parse_term("z", f1, x1)},
    )


@pytest.fixture(scope="session")
def d1(f1, f2, x1):
    v0 = placeholder(0, "s")
    return derivor(
        f2,
        f1,
        {"e": "s", "b": "s"},
        {
            "zero": hall_term(parse_term("c", f1, x1), [], "s"),
            "succ": hall_term(Node("g", (v0,), "s", 2), ["s"], "s"),
            "iszero": hall_term(
                Node("sigma", (v0, parse_term("c", f1, x1)), "s", 3), ["s"], "s"
            ),
        },
    )


@pytest.fixture(scope="session")
def d2(f1, x1):
    v0 = placeholder(0, "s")
    return derivor(
        f1,
        f1,
        {"s": "s"},
        {
            "c": hall_term(parse_term("c", f1, x1), [], "s"),
            "g": hall_term(Node("g", (Node("g", (v0,), "s", 2),), "s", 3), ["s"], "s"),
            "sigma": hall_term(
                Node("sigma", (placeholder(0, "s"), placeholder(1, "s")), "s", 3),
                ["s", "s"],
                "s",
            ),
        },
    )


# ---------------------------------------------------------------------------
# language comparison helpers


def accepted_sets(rec: Recognizer, universe) -> dict[str, frozenset]:
    """Per-sort accepted subset of an enumerated universe, batched."""
    out = {}
    for sort, terms in universe.items():
        values = evaluate_many(rec.algebra, dict(rec.assignment), terms)
        acc = rec.accepting_at(sort)
        out[sort] = frozenset(t for t in terms if values[id(t)] in acc)
    return out


def same_language(r1: Recognizer, r2: Recognizer, max_nodes: int) -> bool:
    universe = enumerate_all_terms(r1.signature, r1.vars, max_nodes)
    return accepted_sets(r1, universe) == accepted_sets(r2, universe)


# ---------------------------------------------------------------------------
# random generators (all seeded by the caller)


VAR_POOL = [f"x{i}" for i in range(8)]


def random_signature(rng: random.Random, max_ops: int = 4, max_binary: int = 2):
    """A small signature in the style of the fixtures: 1-2 sorts, a constant,
    and a few unary/binary operations."""
    n_sorts = rng.choice([1, 1, 2])
    sorts = [f"s{i}" for i in range(n_sorts)]
    ops = [("k0", [], rng.choice(sorts))]
    n_ops = rng.randint(2, max_ops)
    binary_budget = max_binary
    for i in range(1, n_ops):
        pool = [0, 1, 1, 2, 2] if binary_budget > 0 else [0, 1, 1]
        arity_len = rng.choice(pool)
        if arity_len == 2:
            binary_budget -= 1
        arity = [rng.choice(sorts) for _ in range(arity_len)]
        ops.append((f"f{i}" if arity else f"k{i}", arity, rng.choice(sorts)))
    sig = signature(sorts, ops)
    by_sort = {}
    idx = 0
    for s in sorts:
        k = rng.choice([0, 1, 1, 2])
        by_sort[s] = VAR_POOL[idx : idx + k]
        idx += k
    return sig, sorted_vars(sig, by_sort)


def random_rich_signature(rng: random.Random):
    """A signature where every sort has a constant and every sort is reachable
    from every other through some operation argument (pattern-generation
    substrate for hyperderivor tests)."""
    n_sorts = rng.choice([1, 1, 2])
    sorts = [f"t{i}" for i in range(n_sorts)]
    ops = [(f"e{i}", [], s) for i, s in enumerate(sorts)]
    if n_sorts == 1:
        ops.append(("u0", [sorts[0]], sorts[0]))
        ops.append(("b0", [sorts[0], sorts[0]], sorts[0]))
    else:
        ops.append(("u0", [sorts[0]], sorts[0]))
        ops.append(("u1", [sorts[0]], sorts[1]))
        ops.append(("u2", [sorts[1]], sorts[0]))
        ops.append(("u3", [sorts[1]], sorts[1]))
        ops.append(("b0", [sorts[0], sorts[1]], rng.choice(sorts)))
    sig = signature(sorts, ops)
    by_sort = {}
    idx = 4
    for s in sorts:
        k = rng.choice([0, 1, 1])
        by_sort[s] = VAR_POOL[idx : idx + k]
        idx += k
    return sig, sorted_vars(sig, by_sort)


def random_algebra(rng: random.Random, sig: Signature, max_carrier: int = 3):
    carriers = {s: rng.randint(1, max_carrier) for s in sig.sorts}
    tables = {}
    for op in sig.ops:
        space = 1
        for s in op.arity:
            space *= carriers[s]
        n = carriers[op.result]
        tables[op.name] = [rng.randrange(n) for _ in range(space)]
    return finite_algebra(sig, carriers, tables)


def random_recognizer(
    rng: random.Random,
    sig: Signature,
    vars: SortedVars,
    max_carrier: int = 3,
    only_sort: str | None = None,
):
    alg = random_algebra(rng, sig, max_carrier)
    carriers = dict(alg.carriers)
    assignment = {
        x: rng.randrange(carriers[s]) for s, names in vars.by_sort for x in names
    }
    accepting = {}
    for s in sig.sorts:
        if only_sort is not None and s != only_sort:
            accepting[s] = []
        else:
            accepting[s] = [e for e in range(carriers[s]) if rng.random() < 0.5]
    return recognizer(vars, alg, assignment, accepting)


def random_term(
    rng: random.Random, sig: Signature, vars: SortedVars, sort: str, max_nodes: int
) -> Term | None:
    universe = enumerate_all_terms(sig, vars, max_nodes)[sort]
    if not universe:
        return None
    return rng.choice(universe)


def random_context(
    rng: random.Random, sig: Signature, vars: SortedVars, max_nodes: int = 5
) -> Context | None:
    """A random one-hole context, carved from a random term by replacing one
    leaf with the hole."""
    sort = rng.choice(sig.sorts)
    body = random_term(rng, sig, vars, sort, max_nodes)
    if body is None:
        return None
    leaves = _leaf_count(body)
    target = rng.randrange(leaves)

    counter = [0]

    def carve(t: Term) -> Term:
        if isinstance(t, Var) or (isinstance(t, Node) and not t.children):
            i = counter[0]
            counter[0] += 1
            return Hole(t.sort) if i == target else t
        children = tuple(carve(c) for c in t.children)
        return Node(t.symbol, children, t.sort, 1 + sum(c.size for c in children))

    return context(carve(body))


def _leaf_count(t: Term) -> int:
    if isinstance(t, Var) or not t.children:
        return 1
    return sum(_leaf_count(c) for c in t.children)


# ---------------------------------------------------------------------------
# hyperderivor / derivor generators


class PatternImpossible(Exception):
    pass


def _ground_term(rng, sig, vars, sort, budget=3, prefer_node=False):
    universe = enumerate_all_terms(sig, vars, budget)[sort]
    if prefer_node:
        nodes = [t for t in universe if isinstance(t, Node)]
        universe = nodes or universe
    if not universe:
        raise PatternImpossible(sort)
    return rng.choice(universe)


def _build_with_leaves(rng, sig, vars, sort, required, depth):
    """A random term of the sort containing exactly the required leaves (a list
    of Var objects), each once, plus arbitrary ground filler."""
    if not required:
        return _ground_term(rng, sig, vars, sort)
    if len(required) == 1 and required[0].sort == sort and (
        depth <= 0 or rng.random() < 0.4
    ):
        return required[0]
    if depth <= 0:
        raise PatternImpossible(sort)
    candidates = [op for op in sig.ops if op.result == sort and op.arity]
    rng.shuffle(candidates)
    for op in candidates:
        for _ in range(4):
            buckets = [[] for _ in op.arity]
            for leaf in required:
                slots = [i for i, w in enumerate(op.arity)]
                buckets[rng.choice(slots)].append(leaf)
            try:
                children = [
                    _build_with_leaves(rng, sig, vars, w, bucket, depth - 1)
                    for w, bucket in zip(op.arity, buckets)
                ]
                return node(op, children)
            except PatternImpossible:
                continue
    raise PatternImpossible(sort)


def random_hyperderivor(
    rng: random.Random,
    source: Signature,
    source_vars: SortedVars,
    target: Signature,
    target_vars: SortedVars,
    nonerasing: bool = False,
    linear: bool = True,
) -> Hyperderivor:
    """Random patterns and variable images; with ``nonerasing`` every pattern
    keeps each placeholder exactly once and contains an operation node, which
    makes the induced map size-nondecreasing."""
    sort_map = {s: rng.choice(target.sorts) for s in source.sorts}
    patterns = {}
    for op in source.ops:
        placeholders = [placeholder(i, sort_map[w]) for i, w in enumerate(op.arity)]
        if nonerasing:
            required = placeholders
        else:
            required = [v for v in placeholders if rng.random() < 0.8]
            if not linear:
                required = required + [
                    v for v in placeholders if rng.random() < 0.3
                ]
        if nonerasing and not required:
            body = _ground_term(
                rng, target, target_vars, sort_map[op.result], prefer_node=True
            )
        else:
            body = _build_with_leaves(
                rng, target, target_vars, sort_map[op.result], list(required), 3
            )
        if nonerasing and not isinstance(body, Node):
            wrap_ops = [
                o
                for o in target.ops
                if o.result == sort_map[op.result]
                and len(o.arity) == 1
                and o.arity[0] == body.sort
            ]
            if not wrap_ops:
                raise PatternImpossible(sort_map[op.result])
            body = node(rng.choice(wrap_ops), [body])
        patterns[op.name] = body
    var_images = {}
    for s, names in source_vars.by_sort:
        for x in names:
            var_images[x] = _ground_term(rng, target, target_vars, sort_map[s])
    return hyperderivor(
        source, source_vars, target, target_vars, sort_map, patterns, var_images
    )


def random_hall_term(
    rng: random.Random, sig: Signature, arity, sort: str, max_extra: int = 3
) -> HallTerm:
    """A random Hall term of the given rank (placeholders may repeat or be
    dropped)."""
    arity = tuple(arity)
    placeholders = [placeholder(i, w) for i, w in enumerate(arity)]
    empty = sorted_vars(sig, {})

    def build(s: str, depth: int) -> Term:
        choices = [v for v in placeholders if v.sort == s]
        constants = [op for op in sig.ops if not op.arity and op.result == s]
        branches = [op for op in sig.ops if op.arity and op.result == s]
        if depth <= 0 or not branches:
            leaf_pool = choices + [node(op, []) for op in constants]
            if not leaf_pool:
                if branches:
                    op = rng.choice(branches)
                    return node(op, [build(w, 0) for w in op.arity])
                raise PatternImpossible(s)
            return rng.choice(leaf_pool)
        if rng.random() < 0.4 and (choices or constants):
            leaf_pool = choices + [node(op, []) for op in constants]
            return rng.choice(leaf_pool)
        op = rng.choice(branches)
        return node(op, [build(w, depth - 1) for w in op.arity])

    return hall_term(build(sort, max_extra), arity, sort)


def random_derivor(rng: random.Random, source: Signature, target: Signature) -> Derivor:
    sort_map = {s: rng.choice(target.sorts) for s in source.sorts}
    patterns = {}
    for op in source.ops:
        arity = tuple(sort_map[w] for w in op.arity)
        patterns[op.name] = random_hall_term(
            rng, target, arity, sort_map[op.result]
        )
    return derivor(source, target, sort_map, patterns)


def retrying(builder, rng: random.Random, attempts: int = 40):
    """Retry a random builder that can raise PatternImpossible."""
    for _ in range(attempts):
        try:
            return builder()
        except PatternImpossible:
            continue
    raise RuntimeError("could not generate a random instance")
