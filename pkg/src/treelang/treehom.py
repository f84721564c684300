"""Hyperderivors and the tree homomorphisms they determine: application,
derived algebras, inverse images, and direct images of linear maps.

A hyperderivor maps a source signature-with-variables to a target one: a sort
map, one target-term pattern per operation symbol over the reserved
placeholders ``v0, v1, ...``, and a target term per source variable.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Mapping

from .algebra import FiniteAlgebra, evaluate, finite_algebra
from .core import (
    Node,
    Signature,
    SortedVars,
    SortError,
    Term,
    ValidationError,
    Var,
    occurrence_counts,
    substitute_uniform,
)
from .recognizer import (
    Recognizer,
    determinize,
    minimize,
    nta,
    recognizer,
)

PLACEHOLDER_RE = re.compile(r"v(\d+)")


def placeholder(i: int, sort: str) -> Var:
    return Var(f"v{i}", sort)


def placeholder_index(name: str) -> int | None:
    m = PLACEHOLDER_RE.fullmatch(name)
    return int(m.group(1)) if m else None


@dataclass(frozen=True)
class Hyperderivor:
    source: Signature
    source_vars: SortedVars
    target: Signature
    target_vars: SortedVars
    sort_map: tuple[tuple[str, str], ...]  # source sort -> target sort
    patterns: tuple[tuple[str, Term], ...]  # source opname -> target term
    var_images: tuple[tuple[str, Term], ...]  # source variable -> target term

    def __post_init__(self):
        smap = dict(self.sort_map)
        if set(smap) != set(self.source.sorts):
            raise ValidationError("sort map must cover every source sort")
        for t in smap.values():
            if t not in self.target.sorts:
                raise ValidationError(f"sort map hits unknown target sort {t!r}")
        for y in self.target_vars.all_names():
            if placeholder_index(y) is not None:
                raise ValidationError(
                    f"target variable {y!r} collides with reserved placeholders"
                )
        patterns = dict(self.patterns)
        if set(patterns) != {op.name for op in self.source.ops}:
            raise ValidationError("patterns must cover every source operation")
        for op in self.source.ops:
            body = patterns[op.name]
            self._check_pattern_term(op, body)
            if body.sort != smap[op.result]:
                raise ValidationError(
                    f"pattern for {op.name!r} has sort {body.sort!r}, "
                    f"expected {smap[op.result]!r}"
                )
        images = dict(self.var_images)
        if set(images) != set(self.source_vars.all_names()):
            raise ValidationError("variable images must cover every source variable")
        for sort, names in self.source_vars.by_sort:
            for x in names:
                img = images[x]
                self._check_ground_term(img, f"image of {x!r}")
                if img.sort != smap[sort]:
                    raise ValidationError(
                        f"image of {x!r} has sort {img.sort!r}, expected {smap[sort]!r}"
                    )

    def _check_pattern_term(self, op, t: Term) -> None:
        smap = dict(self.sort_map)
        if isinstance(t, Var):
            idx = placeholder_index(t.name)
            if idx is not None:
                if idx >= len(op.arity):
                    raise ValidationError(
                        f"pattern for {op.name!r} uses placeholder v{idx} beyond its arity"
                    )
                want = smap[op.arity[idx]]
                if t.sort != want:
                    raise ValidationError(
                        f"placeholder v{idx} in pattern for {op.name!r} must have "
                        f"sort {want!r}"
                    )
            elif self.target_vars.sort_of(t.name) != t.sort:
                raise ValidationError(f"unknown target variable {t.name!r} in pattern")
            return
        if not isinstance(t, Node):
            raise ValidationError("patterns must be plain terms")
        top = self.target.operation(t.symbol)
        if len(t.children) != len(top.arity):
            raise ValidationError(f"pattern arity mismatch at {t.symbol!r}")
        for child, want in zip(t.children, top.arity):
            if child.sort != want:
                raise ValidationError(f"ill-sorted pattern child under {t.symbol!r}")
            self._check_pattern_term(op, child)

    def _check_ground_term(self, t: Term, what: str) -> None:
        if isinstance(t, Var):
            if placeholder_index(t.name) is not None:
                raise ValidationError(f"{what} may not contain placeholders")
            if self.target_vars.sort_of(t.name) != t.sort:
                raise ValidationError(f"unknown target variable {t.name!r} in {what}")
            return
        for c in t.children:
            self._check_ground_term(c, what)

    def sort_image(self, sort: str) -> str:
        return dict(self.sort_map)[sort]

    def pattern(self, opname: str) -> Term:
        return dict(self.patterns)[opname]

    def var_image(self, name: str) -> Term:
        return dict(self.var_images)[name]

    @property
    def is_linear(self) -> bool:
        """No placeholder occurs more than once in any pattern."""
        for op in self.source.ops:
            counts = occurrence_counts(dict(self.patterns)[op.name])
            for name, n in counts.items():
                if placeholder_index(name) is not None and n > 1:
                    return False
        return True


def hyperderivor(
    source: Signature,
    source_vars: SortedVars,
    target: Signature,
    target_vars: SortedVars,
    sort_map: Mapping[str, str],
    patterns: Mapping[str, Term],
    var_images: Mapping[str, Term],
) -> Hyperderivor:
    return Hyperderivor(
        source,
        source_vars,
        target,
        target_vars,
        tuple((s, sort_map[s]) for s in source.sorts),
        tuple((op.name, patterns[op.name]) for op in source.ops),
        tuple((x, var_images[x]) for x in source_vars.all_names()),
    )


def pattern_environment(
    target: Signature,
    target_vars: SortedVars,
    sort_map: Mapping[str, str],
    op,
) -> SortedVars:
    """The variable set a pattern for this operation is parsed against: the
    target variables extended with the operation's placeholders."""
    by_sort: dict[str, list[str]] = {s: list(names) for s, names in target_vars.by_sort}
    for i, w in enumerate(op.arity):
        by_sort.setdefault(sort_map[w], []).append(f"v{i}")
    from .core import sorted_vars

    return sorted_vars(target, by_sort)


def pattern_vars(h: Hyperderivor, opname: str) -> SortedVars:
    return pattern_environment(
        h.target, h.target_vars, dict(h.sort_map), h.source.operation(opname)
    )


def apply_treehom(h: Hyperderivor, term: Term) -> Term:
    """The tree homomorphism: variables through their images, nodes by
    substituting the children's images for the placeholders of the pattern."""
    if isinstance(term, Var):
        if h.source_vars.sort_of(term.name) != term.sort:
            raise SortError(f"unknown source variable {term.name!r}")
        return h.var_image(term.name)
    if not isinstance(term, Node):
        raise SortError("cannot apply a tree homomorphism to a context hole")
    images = [apply_treehom(h, c) for c in term.children]
    mapping = {f"v{i}": img for i, img in enumerate(images)}
    return substitute_uniform(h.pattern(term.symbol), mapping)


def derived_algebra(
    h: Hyperderivor, b: FiniteAlgebra, b_assignment: Mapping[str, int]
):
    """Pull a target algebra back along the hyperderivor: carriers are reused
    at mapped sorts, each source operation acts by evaluating its pattern, and
    source variables evaluate their images.

    Returns the source-signature algebra plus the induced source assignment.
    """
    if b.signature != h.target:
        raise ValidationError("algebra is not over the hyperderivor's target signature")
    sizes = dict(b.carriers)
    carriers = {s: sizes[h.sort_image(s)] for s in h.source.sorts}
    tables = {}
    for op in h.source.ops:
        body = h.pattern(op.name)
        entries = []
        for args in itertools.product(*[range(carriers[s]) for s in op.arity]):
            env = dict(b_assignment)
            for i, a in enumerate(args):
                env[f"v{i}"] = a
            entries.append(evaluate(b, env, body))
        tables[op.name] = tuple(entries)
    alg = finite_algebra(h.source, carriers, tables)
    assignment = {
        x: evaluate(b, dict(b_assignment), h.var_image(x))
        for x in h.source_vars.all_names()
    }
    return alg, assignment


def inverse_image(h: Hyperderivor, l: Recognizer, sort: str) -> Recognizer:
    """The source-sort language of terms whose image lies in l's language at
    the mapped sort."""
    if l.signature != h.target or l.vars != h.target_vars:
        raise ValidationError("recognizer is not over the hyperderivor's target")
    if sort not in h.source.sorts:
        raise ValidationError(f"unknown source sort {sort!r}")
    alg, assignment = derived_algebra(h, l.algebra, dict(l.assignment))
    target_sort = h.sort_image(sort)
    accepting = {sort: sorted(l.accepting_at(target_sort))}
    return recognizer(h.source_vars, alg, assignment, accepting)


def direct_image(h: Hyperderivor, l: Recognizer, sort: str) -> Recognizer:
    """The image language of a linear tree homomorphism, by inlining the
    minimized evaluator of l as a regular tree grammar over the target.

    Nonterminals are the evaluator's states; each table entry emits its
    pattern with placeholders rewired to argument nonterminals, and each
    source variable emits its ground image.  The grammar compiles to an NTA
    (one state per production subterm position) and is determinized.
    """
    if not h.is_linear:
        raise ValidationError("direct images require a linear hyperderivor")
    if l.signature != h.source or l.vars != h.source_vars:
        raise ValidationError("recognizer is not over the hyperderivor's source")
    if sort not in h.source.sorts:
        raise ValidationError(f"unknown source sort {sort!r}")
    lm = minimize(l)
    sig = h.target
    vars = h.target_vars

    counts: dict[str, int] = {t: 0 for t in sig.sorts}
    nonterminal: dict[tuple[str, int], int] = {}
    for s in h.source.sorts:
        t = h.sort_image(s)
        for q in range(lm.algebra.size(s)):
            nonterminal[(s, q)] = counts[t]
            counts[t] += 1

    rules: dict[tuple[str, tuple[int, ...]], set[int]] = {}
    leaf: dict[str, set[int]] = {y: set() for y in vars.all_names()}
    epsilon: dict[str, list[tuple[int, int]]] = {t: [] for t in sig.sorts}

    def fresh(t: str) -> int:
        i = counts[t]
        counts[t] += 1
        return i

    def compile_rhs(body: Term, env: Mapping[str, int]) -> int:
        """Install states computing the production body; returns its state.

        ``env`` maps placeholder names to nonterminal states; target variables
        get leaf rules and operation nodes get transition rules.
        """
        if isinstance(body, Var):
            if body.name in env:
                return env[body.name]
            state = fresh(body.sort)
            leaf[body.name].add(state)
            return state
        child_states = tuple(compile_rhs(c, env) for c in body.children)
        state = fresh(body.sort)
        rules.setdefault((body.symbol, child_states), set()).add(state)
        return state

    for op in h.source.ops:
        body = h.pattern(op.name)
        pools = [range(lm.algebra.size(s)) for s in op.arity]
        for args in itertools.product(*pools):
            result = lm.algebra.apply(op.name, args)
            env = {
                f"v{i}": nonterminal[(w, a)]
                for i, (w, a) in enumerate(zip(op.arity, args))
            }
            root = compile_rhs(body, env)
            head = nonterminal[(op.result, result)]
            target_sort = h.sort_image(op.result)
            if root != head:
                epsilon[target_sort].append((root, head))
    lm_assignment = dict(lm.assignment)
    for s, names in h.source_vars.by_sort:
        for x in names:
            root = compile_rhs(h.var_image(x), {})
            head = nonterminal[(s, lm_assignment[x])]
            if root != head:
                epsilon[h.sort_image(s)].append((root, head))

    target_sort = h.sort_image(sort)
    accepting = {
        target_sort: frozenset(
            nonterminal[(sort, q)] for q in lm.accepting_at(sort)
        )
    }
    machine = nta(
        sig,
        vars,
        counts,
        {y: frozenset(v) for y, v in leaf.items()},
        {key: frozenset(v) for key, v in rules.items()},
        epsilon,
        accepting,
    )
    return determinize(machine)


def hom_to_hyperderivor(
    sig: Signature,
    x_vars: SortedVars,
    y_vars: SortedVars,
    mapping: Mapping[str, Term],
) -> Hyperderivor:
    """The hyperderivor of a plain free-algebra homomorphism: identity sort
    map, patterns ``op(v0,...,vn-1)``, and the given variable images."""
    patterns = {}
    for op in sig.ops:
        children = tuple(placeholder(i, w) for i, w in enumerate(op.arity))
        patterns[op.name] = Node(
            op.name, children, op.result, 1 + len(children)
        )
    return hyperderivor(
        sig,
        x_vars,
        sig,
        y_vars,
        {s: s for s in sig.sorts},
        patterns,
        dict(mapping),
    )


def pattern_op_symbols(h: Hyperderivor, opname: str) -> int:
    """Number of target operation nodes in a pattern (used by harnesses that
    need size-nondecreasing hyperderivors)."""
    body = dict(h.patterns)[opname]
    count = 0
    stack = [body]
    while stack:
        t = stack.pop()
        if isinstance(t, Node):
            count += 1
            stack.extend(t.children)
    return count
