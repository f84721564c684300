"""Hall-algebra term operations and derivors between many-sorted signatures.

A Hall term is a term over the standard placeholders ``v0, v1, ...`` carrying
its rank (arity word, result sort); xi-substitution replaces placeholders
uniformly.  A derivor assigns to every source operation a target Hall term of
the mapped rank; derivors compose by substitution and act on target algebras
by term-operation evaluation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from .algebra import FiniteAlgebra, evaluate, finite_algebra
from .core import (
    Node,
    Signature,
    SortedVars,
    Term,
    ValidationError,
    Var,
    occurrence_counts,
    substitute_uniform,
)
from .treehom import Hyperderivor, hyperderivor, placeholder, placeholder_index


@dataclass(frozen=True)
class HallTerm:
    """A term over placeholders ``v0..v(|arity|-1)`` tagged with its rank."""

    term: Term
    arity: tuple[str, ...]
    sort: str

    def __post_init__(self):
        if self.term.sort != self.sort:
            raise ValidationError(
                f"hall term has sort {self.term.sort!r}, rank says {self.sort!r}"
            )
        _check_placeholders(self.term, self.arity)


def _check_placeholders(t: Term, arity: Sequence[str]) -> None:
    if isinstance(t, Var):
        idx = placeholder_index(t.name)
        if idx is None:
            raise ValidationError(f"hall terms may only use placeholders, got {t.name!r}")
        if idx >= len(arity):
            raise ValidationError(f"placeholder v{idx} outside rank of length {len(arity)}")
        if t.sort != arity[idx]:
            raise ValidationError(
                f"placeholder v{idx} has sort {t.sort!r}, rank says {arity[idx]!r}"
            )
        return
    for c in t.children:
        _check_placeholders(c, arity)


def hall_term(term: Term, arity: Sequence[str], sort: str) -> HallTerm:
    return HallTerm(term, tuple(arity), sort)


def projection(arity: Sequence[str], i: int) -> HallTerm:
    """The i-th projection at the given arity word."""
    arity = tuple(arity)
    if not (0 <= i < len(arity)):
        raise ValidationError(f"projection index {i} out of range for |w|={len(arity)}")
    return HallTerm(placeholder(i, arity[i]), arity, arity[i])


def xi_substitute(
    p: HallTerm, qs: Sequence[HallTerm], result_arity: Sequence[str] | None = None
) -> HallTerm:
    """Uniform substitution: every occurrence of ``vi`` in p becomes ``qs[i]``.

    The replacements must share one arity word u and have sorts matching p's
    arity; the result has rank (u, p.sort).  When p is a constant pattern
    (empty arity) the result arity cannot be inferred and must be passed
    explicitly; it defaults to the empty word.
    """
    if len(qs) != len(p.arity):
        raise ValidationError(
            f"xi needs {len(p.arity)} replacement terms, got {len(qs)}"
        )
    if qs:
        u = qs[0].arity
        for q in qs:
            if q.arity != u:
                raise ValidationError("xi replacements must share an arity word")
        if result_arity is not None and tuple(result_arity) != u:
            raise ValidationError("result arity disagrees with the replacements")
    else:
        u = tuple(result_arity) if result_arity is not None else ()
    for i, q in enumerate(qs):
        if q.sort != p.arity[i]:
            raise ValidationError(
                f"replacement {i} has sort {q.sort!r}, expected {p.arity[i]!r}"
            )
    mapping = {f"v{i}": q.term for i, q in enumerate(qs)}
    return HallTerm(substitute_uniform(p.term, mapping), u, p.sort)


def identity_hall_term(sig: Signature, opname: str) -> HallTerm:
    op = sig.operation(opname)
    children = tuple(placeholder(i, w) for i, w in enumerate(op.arity))
    term: Term = Node(op.name, children, op.result, 1 + len(children))
    return HallTerm(term, op.arity, op.result)


@dataclass(frozen=True)
class Derivor:
    """A signature morphism: sort map plus a target Hall term per operation."""

    source: Signature
    target: Signature
    sort_map: tuple[tuple[str, str], ...]
    patterns: tuple[tuple[str, HallTerm], ...]

    def __post_init__(self):
        smap = dict(self.sort_map)
        if set(smap) != set(self.source.sorts):
            raise ValidationError("sort map must cover every source sort")
        for t in smap.values():
            if t not in self.target.sorts:
                raise ValidationError(f"sort map hits unknown target sort {t!r}")
        patterns = dict(self.patterns)
        if set(patterns) != {op.name for op in self.source.ops}:
            raise ValidationError("patterns must cover every source operation")
        for op in self.source.ops:
            ht = patterns[op.name]
            want_arity = tuple(smap[w] for w in op.arity)
            if ht.arity != want_arity or ht.sort != smap[op.result]:
                raise ValidationError(
                    f"pattern for {op.name!r} has rank ({ht.arity}, {ht.sort!r}), "
                    f"expected ({want_arity}, {smap[op.result]!r})"
                )
            _check_target_ops(ht.term, self.target)

    def sort_image(self, sort: str) -> str:
        return dict(self.sort_map)[sort]

    def pattern(self, opname: str) -> HallTerm:
        return dict(self.patterns)[opname]

    @property
    def is_linear(self) -> bool:
        for _, ht in self.patterns:
            for name, n in occurrence_counts(ht.term).items():
                if n > 1:
                    return False
        return True


def _check_target_ops(t: Term, sig: Signature) -> None:
    if isinstance(t, Var):
        return
    op = sig.operation(t.symbol)
    if len(t.children) != len(op.arity):
        raise ValidationError(f"arity mismatch at {t.symbol!r} in derivor pattern")
    for c in t.children:
        _check_target_ops(c, sig)


def derivor(
    source: Signature,
    target: Signature,
    sort_map: Mapping[str, str],
    patterns: Mapping[str, HallTerm],
) -> Derivor:
    return Derivor(
        source,
        target,
        tuple((s, sort_map[s]) for s in source.sorts),
        tuple((op.name, patterns[op.name]) for op in source.ops),
    )


def identity_derivor(sig: Signature) -> Derivor:
    return derivor(
        sig,
        sig,
        {s: s for s in sig.sorts},
        {op.name: identity_hall_term(sig, op.name) for op in sig.ops},
    )


def apply_derivor_term(d: Derivor, p: HallTerm) -> HallTerm:
    """The homomorphic extension of the derivor to Hall terms: placeholders
    stay in place (re-sorted along the sort map) and each node becomes its
    pattern xi-substituted with the children's images.  Commutes with
    xi_substitute."""
    target_arity = tuple(d.sort_image(w) for w in p.arity)

    def walk(t: Term) -> HallTerm:
        if isinstance(t, Var):
            idx = placeholder_index(t.name)
            if idx is None:
                raise ValidationError(f"stray variable {t.name!r} in hall term")
            return HallTerm(
                placeholder(idx, target_arity[idx]), target_arity, target_arity[idx]
            )
        images = [walk(c) for c in t.children]
        return xi_substitute(d.pattern(t.symbol), images, target_arity)

    body = walk(p.term)
    return HallTerm(body.term, target_arity, d.sort_image(p.sort))


def compose_derivors(e: Derivor, d: Derivor) -> Derivor:
    """The derivor applying d first, then e; patterns compose by applying e to
    d's patterns."""
    if d.target != e.source:
        raise ValidationError("derivors do not compose: middle signatures differ")
    smap = {s: e.sort_image(d.sort_image(s)) for s in d.source.sorts}
    patterns = {
        op.name: apply_derivor_term(e, d.pattern(op.name)) for op in d.source.ops
    }
    return derivor(d.source, e.target, smap, patterns)


def derived_algebra_derivor(d: Derivor, b: FiniteAlgebra) -> FiniteAlgebra:
    """Pull a target algebra back along the derivor: every source operation
    acts as the term operation of its pattern."""
    if b.signature != d.target:
        raise ValidationError("algebra is not over the derivor's target signature")
    sizes = dict(b.carriers)
    carriers = {s: sizes[d.sort_image(s)] for s in d.source.sorts}
    tables = {}
    for op in d.source.ops:
        ht = d.pattern(op.name)
        entries = []
        for args in itertools.product(*[range(carriers[s]) for s in op.arity]):
            env = {f"v{i}": a for i, a in enumerate(args)}
            entries.append(evaluate(b, env, ht.term))
        tables[op.name] = tuple(entries)
    return finite_algebra(d.source, carriers, tables)


def derivor_to_hyperderivor(
    d: Derivor,
    x_vars: SortedVars,
    y_vars: SortedVars,
    var_images: Mapping[str, Term],
) -> Hyperderivor:
    """Read the derivor's patterns as target terms over variables-plus-
    placeholders and attach variable images; linearity carries over, and
    inverse/direct images then reduce to the tree-homomorphism operators."""
    return hyperderivor(
        d.source,
        x_vars,
        d.target,
        y_vars,
        {s: d.sort_image(s) for s in d.source.sorts},
        {op.name: d.pattern(op.name).term for op in d.source.ops},
        dict(var_images),
    )
