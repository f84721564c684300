"""Language operators producing recognizers: substitution, z-iteration, and
z-quotient.

Each operator assembles a nondeterministic automaton out of the (minimized)
input evaluators and determinizes it.  Substituted occurrences are
independent: two occurrences of one variable may receive different members of
its replacement language.
"""

from __future__ import annotations

import itertools
from typing import Mapping

from .algebra import closure_elements, product_algebra
from .core import ValidationError, Var
from .recognizer import (
    Recognizer,
    determinize,
    minimize,
    nta,
    recognize_basic,
)


def _check_family_compat(k: Recognizer, family: Mapping[str, Recognizer]) -> None:
    for x, l in family.items():
        if k.vars.sort_of(x) is None:
            raise ValidationError(f"unknown variable {x!r} in substitution family")
        if l.signature != k.signature or l.vars != k.vars:
            raise ValidationError(
                f"family recognizer for {x!r} must share signature and variables"
            )


def substitute_language(
    k: Recognizer, family: Mapping[str, Recognizer]
) -> Recognizer:
    """Replace, independently per occurrence, each variable x of members of k's
    language by members of ``family[x]``; unspecified variables default to the
    singleton of the variable itself, leaving their occurrences unchanged.

    States are the disjoint union of k's evaluator and the family evaluators;
    epsilon rules route each family-accepting state to k's assignment value of
    the corresponding variable, and k's own variable leaves are dropped.
    """
    _check_family_compat(k, family)
    sig = k.signature
    vars = k.vars
    full = {}
    for x in vars.all_names():
        if x in family:
            full[x] = minimize(family[x])
        else:
            full[x] = minimize(recognize_basic(sig, vars, Var(x, vars.sort_of(x))))
    km = minimize(k)

    counts = {s: km.algebra.size(s) for s in sig.sorts}
    offsets = {}
    for x in vars.all_names():
        offsets[x] = dict(counts)
        for s in sig.sorts:
            counts[s] += full[x].algebra.size(s)

    rules: dict[tuple[str, tuple[int, ...]], set[int]] = {}
    leaf: dict[str, set[int]] = {y: set() for y in vars.all_names()}
    epsilon: dict[str, list[tuple[int, int]]] = {s: [] for s in sig.sorts}

    def add_tables(alg, shift: Mapping[str, int]):
        for op in sig.ops:
            pools = [range(alg.size(s)) for s in op.arity]
            for args in itertools.product(*pools):
                key = (
                    op.name,
                    tuple(shift[s] + a for s, a in zip(op.arity, args)),
                )
                rules.setdefault(key, set()).add(
                    shift[op.result] + alg.apply(op.name, args)
                )

    add_tables(km.algebra, {s: 0 for s in sig.sorts})
    k_assignment = dict(km.assignment)
    for x in vars.all_names():
        lx = full[x]
        shift = offsets[x]
        add_tables(lx.algebra, shift)
        asg = dict(lx.assignment)
        for y in vars.all_names():
            leaf[y].add(shift[vars.sort_of(y)] + asg[y])
        t = vars.sort_of(x)
        for q in lx.accepting_at(t):
            epsilon[t].append((shift[t] + q, k_assignment[x]))

    accepting = {s: km.accepting_at(s) for s in sig.sorts}
    machine = nta(
        sig,
        vars,
        counts,
        {y: frozenset(states) for y, states in leaf.items()},
        {key: frozenset(v) for key, v in rules.items()},
        epsilon,
        accepting,
    )
    return determinize(machine)


def iterate_language(l: Recognizer, z: str) -> Recognizer:
    """The z-iteration: the least language containing z and closed under
    substituting known members for the z-occurrences of members of l.

    One fresh top state marks recognized iteration members; it feeds back into
    l's run as the value of z.
    """
    sort = l.vars.sort_of(z)
    if sort is None:
        raise ValidationError(f"unknown variable {z!r}")
    sig = l.signature
    vars = l.vars
    lm = minimize(l)
    counts = {s: lm.algebra.size(s) for s in sig.sorts}
    top = counts[sort]
    counts[sort] += 1

    rules: dict[tuple[str, tuple[int, ...]], set[int]] = {}
    for op in sig.ops:
        pools = [range(lm.algebra.size(s)) for s in op.arity]
        for args in itertools.product(*pools):
            rules.setdefault((op.name, tuple(args)), set()).add(
                lm.algebra.apply(op.name, args)
            )
    asg = dict(lm.assignment)
    leaf = {y: {asg[y]} for y in vars.all_names()}
    leaf[z].add(top)
    epsilon: dict[str, list[tuple[int, int]]] = {s: [] for s in sig.sorts}
    for q in lm.accepting_at(sort):
        epsilon[sort].append((q, top))
    epsilon[sort].append((top, asg[z]))

    machine = nta(
        sig,
        vars,
        counts,
        {y: frozenset(v) for y, v in leaf.items()},
        {key: frozenset(v) for key, v in rules.items()},
        epsilon,
        {sort: frozenset({top})},
    )
    return determinize(machine)


def quotient_seed_values(l: Recognizer, k: Recognizer, z: str) -> frozenset[int]:
    """The set of l-evaluator values of k's members at z's sort, computed by
    reachability in the product of the two evaluators."""
    if l.signature != k.signature or l.vars != k.vars:
        raise ValidationError("quotient operands must share signature and variables")
    sort = l.vars.sort_of(z)
    if sort is None:
        raise ValidationError(f"unknown variable {z!r}")
    prod, projs = product_algebra([k.algebra, l.algebra])
    ka = dict(k.assignment)
    la = dict(l.assignment)
    n_l = dict(l.algebra.carriers)
    seed: dict[str, list[int]] = {s: [] for s in l.signature.sorts}
    for op in l.signature.ops:
        if not op.arity:
            v = prod.apply(op.name, [])
            if v not in seed[op.result]:
                seed[op.result].append(v)
    for s, names in l.vars.by_sort:
        for x in names:
            v = ka[x] * n_l[s] + la[x]
            if v not in seed[s]:
                seed[s].append(v)
    reached = closure_elements(prod, seed)
    acc = k.accepting_at(sort)
    return frozenset(
        projs[1][sort][e] for e in reached[sort] if projs[0][sort][e] in acc
    )


def quotient_language(l: Recognizer, k: Recognizer, z: str) -> Recognizer:
    """The z-quotient of l by k: terms some substitution of k-members for all
    z-occurrences of which lands in l's language.

    The construction reroutes the z leaf to the value set of k's members under
    l's evaluator; a term without z-occurrences is kept exactly when it is in
    l already.
    """
    sig = l.signature
    vars = l.vars
    lm = minimize(l)
    values = quotient_seed_values(lm, k, z)

    rules: dict[tuple[str, tuple[int, ...]], set[int]] = {}
    for op in sig.ops:
        pools = [range(lm.algebra.size(s)) for s in op.arity]
        for args in itertools.product(*pools):
            rules.setdefault((op.name, tuple(args)), set()).add(
                lm.algebra.apply(op.name, args)
            )
    asg = dict(lm.assignment)
    leaf: dict[str, set[int]] = {}
    for y in vars.all_names():
        if y == z:
            leaf[y] = set(values)
        else:
            leaf[y] = {asg[y]}
    machine = nta(
        sig,
        vars,
        {s: lm.algebra.size(s) for s in sig.sorts},
        {y: frozenset(v) for y, v in leaf.items()},
        {key: frozenset(v) for key, v in rules.items()},
        {},
        {s: lm.accepting_at(s) for s in sig.sorts},
    )
    return determinize(machine)
