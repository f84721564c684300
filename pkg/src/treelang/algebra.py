"""Finite algebras over a signature: evaluation, products, quotients,
generated subalgebras, subset algebras, and translation tables.

Carriers are ``{0..n_s-1}`` per sort; operation tables are dense tuples
indexed in mixed-radix argument order with the last argument fastest.  That
order is normative for serialized files.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from .core import (
    Context,
    Hole,
    Signature,
    Term,
    ValidationError,
    Var,
)


@dataclass(frozen=True)
class FiniteAlgebra:
    """Per-sort finite carriers with total operation tables.

    Empty carriers are permitted; an operation whose argument space is empty
    has an empty table and can never be applied by evaluation.
    """

    signature: Signature
    carriers: tuple[tuple[str, int], ...]  # (sort, size) in signature sort order
    tables: tuple[tuple[str, tuple[int, ...]], ...]  # (opname, dense table)

    def __post_init__(self):
        sizes = dict(self.carriers)
        if [s for s, _ in self.carriers] != list(self.signature.sorts):
            raise ValidationError("carriers must list every sort in signature order")
        if any(n < 0 for n in sizes.values()):
            raise ValidationError("carrier sizes must be nonnegative")
        tables = dict(self.tables)
        if [n for n, _ in self.tables] != [op.name for op in self.signature.ops]:
            raise ValidationError("tables must list every operation in signature order")
        for op in self.signature.ops:
            space = 1
            for s in op.arity:
                space *= sizes[s]
            table = tables[op.name]
            if len(table) != space:
                raise ValidationError(
                    f"table for {op.name!r} has {len(table)} entries, expected {space}"
                )
            bound = sizes[op.result]
            if any(not (0 <= v < bound) for v in table):
                raise ValidationError(f"table for {op.name!r} has out-of-range entries")

    def size(self, sort: str) -> int:
        return dict(self.carriers)[sort]

    def table(self, opname: str) -> tuple[int, ...]:
        return dict(self.tables)[opname]

    def apply(self, opname: str, args: Sequence[int]) -> int:
        op = self.signature.operation(opname)
        sizes = dict(self.carriers)
        index = 0
        for a, s in zip(args, op.arity):
            index = index * sizes[s] + a
        return dict(self.tables)[opname][index]


def finite_algebra(
    sig: Signature, carriers: Mapping[str, int], tables: Mapping[str, Sequence[int]]
) -> FiniteAlgebra:
    return FiniteAlgebra(
        sig,
        tuple((s, carriers[s]) for s in sig.sorts),
        tuple((op.name, tuple(tables[op.name])) for op in sig.ops),
    )


def table_from_function(sig: Signature, carriers: Mapping[str, int], opname: str, fn):
    """Materialize a dense table (last argument fastest) from a python function."""
    op = sig.operation(opname)
    spaces = [range(carriers[s]) for s in op.arity]
    return tuple(fn(*args) for args in itertools.product(*spaces))


Assignment = dict  # variable name -> carrier element


def check_assignment(alg: FiniteAlgebra, vars, assignment: Mapping[str, int]) -> None:
    sizes = dict(alg.carriers)
    for sort, names in vars.by_sort:
        for x in names:
            if x not in assignment:
                raise ValidationError(f"assignment missing variable {x!r}")
            if not (0 <= assignment[x] < sizes[sort]):
                raise ValidationError(f"assignment for {x!r} out of carrier range")


def evaluate(alg: FiniteAlgebra, assignment: Mapping[str, int], term: Term) -> int:
    """The homomorphic extension of the assignment: variables through the
    assignment, nodes through operation tables."""
    sizes = dict(alg.carriers)
    tables = dict(alg.tables)
    opmap = alg.signature.op_by_name

    def walk(t: Term) -> int:
        if isinstance(t, Var):
            try:
                return assignment[t.name]
            except KeyError:
                raise ValidationError(f"no assignment for variable {t.name!r}") from None
        if isinstance(t, Hole):
            raise ValidationError("cannot evaluate a context hole")
        op = opmap.get(t.symbol)
        if op is None:
            raise ValidationError(f"unknown operation {t.symbol!r}")
        index = 0
        for child, s in zip(t.children, op.arity):
            index = index * sizes[s] + walk(child)
        return tables[t.symbol][index]

    return walk(term)


def evaluate_many(
    alg: FiniteAlgebra, assignment: Mapping[str, int], terms
) -> dict[int, int]:
    """Evaluate a batch of terms, sharing work across common subterm objects.

    Returns a mapping from ``id(term)`` to value; terms produced by the
    enumerator share children, which makes this much faster than one
    evaluation per term.
    """
    sizes = dict(alg.carriers)
    tables = dict(alg.tables)
    opmap = alg.signature.op_by_name
    memo: dict[int, int] = {}

    def walk(t: Term) -> int:
        got = memo.get(id(t))
        if got is not None:
            return got
        if isinstance(t, Var):
            v = assignment[t.name]
        else:
            op = opmap[t.symbol]
            index = 0
            for child, s in zip(t.children, op.arity):
                index = index * sizes[s] + walk(child)
            v = tables[t.symbol][index]
        memo[id(t)] = v
        return v

    for t in terms:
        walk(t)
    return memo


# ---------------------------------------------------------------------------
# products


def product_algebra(algebras: Sequence[FiniteAlgebra]):
    """Componentwise product; returns the algebra and per-component projections.

    Elements are mixed-radix encodings of component tuples, last component
    fastest.  Each projection maps sort -> tuple giving the component value of
    every product element.
    """
    if not algebras:
        raise ValidationError("product of an empty family is not supported")
    sig = algebras[0].signature
    for a in algebras[1:]:
        if a.signature != sig:
            raise ValidationError("product components must share a signature")
    sizes = [dict(a.carriers) for a in algebras]
    carriers = {}
    for s in sig.sorts:
        n = 1
        for sz in sizes:
            n *= sz[s]
        carriers[s] = n

    def decode(sort: str, e: int) -> tuple[int, ...]:
        comps = []
        for sz in reversed(sizes):
            n = sz[sort]
            comps.append(e % n if n else 0)
            e //= n if n else 1
        return tuple(reversed(comps))

    def encode(sort: str, comps: Sequence[int]) -> int:
        e = 0
        for comp, sz in zip(comps, sizes):
            e = e * sz[sort] + comp
        return e

    tables = {}
    for op in sig.ops:
        entries = []
        spaces = [range(carriers[s]) for s in op.arity]
        for args in itertools.product(*spaces):
            decoded = [decode(s, a) for s, a in zip(op.arity, args)]
            comps = [
                algebras[i].apply(op.name, [d[i] for d in decoded])
                for i in range(len(algebras))
            ]
            entries.append(encode(op.result, comps))
        tables[op.name] = tuple(entries)
    product = finite_algebra(sig, carriers, tables)
    projections = []
    for i in range(len(algebras)):
        proj = {
            s: tuple(decode(s, e)[i] for e in range(carriers[s])) for s in sig.sorts
        }
        projections.append(proj)
    return product, projections


def pair_encode(sizes_b: Mapping[str, int], sort: str, a: int, b: int) -> int:
    return a * sizes_b[sort] + b


# ---------------------------------------------------------------------------
# generated subalgebras


def closure_elements(
    alg: FiniteAlgebra, seed: Mapping[str, Sequence[int]]
) -> dict[str, list[int]]:
    """Least subset containing the seed and closed under all tables, with
    elements listed in first-reached order (seed order first, then discovery
    in operation declaration order)."""
    reached: dict[str, list[int]] = {s: [] for s in alg.signature.sorts}
    member: dict[str, set[int]] = {s: set() for s in alg.signature.sorts}

    def add(sort: str, e: int) -> bool:
        if e in member[sort]:
            return False
        member[sort].add(e)
        reached[sort].append(e)
        return True

    for s in alg.signature.sorts:
        for e in seed.get(s, ()):  # seed order is caller-controlled
            add(s, e)
    changed = True
    while changed:
        changed = False
        for op in alg.signature.ops:
            pools = [list(reached[s]) for s in op.arity]
            for args in itertools.product(*pools):
                v = alg.apply(op.name, args)
                if add(op.result, v):
                    changed = True
    return reached


def generated_subalgebra(alg: FiniteAlgebra, seed: Mapping[str, Sequence[int]]):
    """The subalgebra generating operator: sort -> frozenset of elements."""
    sizes = dict(alg.carriers)
    for s, elems in seed.items():
        for e in elems:
            if not (0 <= e < sizes[s]):
                raise ValidationError(f"seed element {e} out of range at sort {s!r}")
    reached = closure_elements(alg, seed)
    return {s: frozenset(es) for s, es in reached.items()}


def restrict_algebra(alg: FiniteAlgebra, elements: Mapping[str, Sequence[int]]):
    """Restrict to a subuniverse; elements are renumbered in the given order.

    Returns the restricted algebra and the per-sort old->new index maps.
    The element lists must be closed under the tables.
    """
    index: dict[str, dict[int, int]] = {
        s: {e: i for i, e in enumerate(elements.get(s, ()))} for s in alg.signature.sorts
    }
    carriers = {s: len(elements.get(s, ())) for s in alg.signature.sorts}
    tables = {}
    for op in alg.signature.ops:
        entries = []
        pools = [elements.get(s, ()) for s in op.arity]
        for args in itertools.product(*pools):
            v = alg.apply(op.name, args)
            if v not in index[op.result]:
                raise ValidationError("element set is not closed under the tables")
            entries.append(index[op.result][v])
        tables[op.name] = tuple(entries)
    return finite_algebra(alg.signature, carriers, tables), index


# ---------------------------------------------------------------------------
# quotients


def quotient_algebra(alg: FiniteAlgebra, partition):
    """Quotient by a congruence; carriers become class ids.

    Returns the quotient algebra and the projection (sort -> tuple of class
    ids, one per original element).  Raises if the partition is not a
    congruence.
    """
    from .congruence import is_congruence

    ok, witness = is_congruence(alg, partition)
    if not ok:
        raise ValidationError(f"partition is not a congruence: witness {witness}")
    classes = dict(partition.classes)
    counts = dict(partition.counts)
    carriers = {s: counts[s] for s in alg.signature.sorts}
    # representative = least element of each class; sound because the tables
    # respect the congruence
    reps = {}
    for s in alg.signature.sorts:
        rep = [None] * counts[s]
        for e, c in enumerate(classes[s]):
            if rep[c] is None:
                rep[c] = e
        reps[s] = rep
    tables = {}
    for op in alg.signature.ops:
        entries = []
        for key in itertools.product(*[range(carriers[s]) for s in op.arity]):
            args = [reps[s][k] for s, k in zip(op.arity, key)]
            entries.append(classes[op.result][alg.apply(op.name, args)])
        tables[op.name] = tuple(entries)
    projection = {s: tuple(classes[s]) for s in alg.signature.sorts}
    return finite_algebra(alg.signature, carriers, tables), projection


# ---------------------------------------------------------------------------
# subset algebras


SUBSET_GUARD = 12


def subset_algebra(alg: FiniteAlgebra) -> FiniteAlgebra:
    """The powerset algebra: carriers are all subsets (encoded as bitmasks) and
    operations act elementwise on member tuples.

    Exists for oracle cross-checks; guarded to carriers of at most
    ``SUBSET_GUARD`` elements per sort.
    """
    sizes = dict(alg.carriers)
    for s, n in sizes.items():
        if n > SUBSET_GUARD:
            raise ValidationError(
                f"subset algebra guard exceeded at sort {s!r} ({n} > {SUBSET_GUARD})"
            )
    carriers = {s: 1 << n for s, n in sizes.items()}
    tables = {}
    for op in alg.signature.ops:
        entries = []
        spaces = [range(carriers[s]) for s in op.arity]
        for masks in itertools.product(*spaces):
            members = [
                [i for i in range(sizes[s]) if mask >> i & 1]
                for s, mask in zip(op.arity, masks)
            ]
            out = 0
            for args in itertools.product(*members):
                out |= 1 << alg.apply(op.name, args)
            entries.append(out)
        tables[op.name] = tuple(entries)
    return finite_algebra(alg.signature, carriers, tables)


def singleton_embedding(alg: FiniteAlgebra) -> dict[str, tuple[int, ...]]:
    """The injective homomorphism from the algebra into its subset algebra."""
    return {s: tuple(1 << e for e in range(n)) for s, n in alg.carriers}


# ---------------------------------------------------------------------------
# translations


def translation_table(
    alg: FiniteAlgebra, assignment: Mapping[str, int], ctx: Context
) -> tuple[int, ...]:
    """The unary function induced by a one-hole context: hole-sort carrier ->
    root-sort carrier."""
    sizes = dict(alg.carriers)
    tables = dict(alg.tables)
    opmap = alg.signature.op_by_name

    def walk(t: Term, hole_value: int) -> int:
        if isinstance(t, Hole):
            return hole_value
        if isinstance(t, Var):
            return assignment[t.name]
        op = opmap[t.symbol]
        index = 0
        for child, s in zip(t.children, op.arity):
            index = index * sizes[s] + walk(child, hole_value)
        return tables[t.symbol][index]

    return tuple(walk(ctx.body, q) for q in range(sizes[ctx.hole_sort]))
