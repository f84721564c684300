import random

import pytest

from treelang.core import (
    ParseError,
    SortError,
    ValidationError,
    Var,
    apply_context,
    compose_contexts,
    count_occurrences,
    enumerate_all_terms,
    enumerate_terms,
    hole_context,
    parse_context,
    parse_term,
    print_context,
    print_term,
    signature,
    sorted_vars,
    substitute_occurrences,
    subterms_of,
    typecheck,
    variables_of,
)


def p1(f1, x1, text):
    return parse_term(text, f1, x1)


class TestParse:
    def test_node(self, f1, x1):
        t = parse_term("g(c)", f1, x1)
        assert print_term(t) == "g(c)"
        assert t.sort == "s"

    def test_variable(self, f1, x1):
        t = parse_term("x", f1, x1)
        assert isinstance(t, Var) and t.sort == "s"

    def test_arity_mismatch(self, f1, x1):
        with pytest.raises((ParseError, SortError)):
            parse_term("sigma(c)", f1, x1)

    def test_unknown_symbol(self, f1, x1):
        with pytest.raises(ParseError):
            parse_term("nope(c)", f1, x1)

    def test_whitespace_insignificant(self, f1, x1):
        a = parse_term("sigma( x , g( c ) )", f1, x1)
        assert a == parse_term("sigma(x,g(c))", f1, x1)

    def test_trailing_garbage(self, f1, x1):
        with pytest.raises(ParseError):
            parse_term("c c", f1, x1)


class TestTypecheck:
    def test_f1(self, f1, x1):
        assert typecheck(parse_term("sigma(x,g(c))", f1, x1), f1, x1) == "s"

    def test_f2(self, f2, x2):
        assert typecheck(parse_term("iszero(zero)", f2, x2), f2, x2) == "b"

    def test_sort_error(self, f2, x2):
        with pytest.raises(SortError):
            parse_term("succ(iszero(zero))", f2, x2)


class TestOccurrences:
    def test_two(self, f1, x1):
        assert count_occurrences(parse_term("sigma(z,g(z))", f1, x1), "z", x1) == 2

    def test_zero(self, f1, x1):
        assert count_occurrences(parse_term("c", f1, x1), "x", x1) == 0

    def test_repeated(self, f1, x1):
        assert count_occurrences(parse_term("sigma(x,sigma(z,x))", f1, x1), "x", x1) == 2

    def test_unknown_variable(self, f1, x1):
        with pytest.raises(ValidationError):
            count_occurrences(parse_term("c", f1, x1), "nope", x1)

    def test_additive_over_children(self, f1, x1):
        rng = random.Random(7)
        universe = enumerate_terms(f1, x1, "s", 6)
        for t in rng.sample(universe, 60):
            if not hasattr(t, "children") or not t.children:
                continue
            for v in ("x", "z"):
                assert count_occurrences(t, v, x1) == sum(
                    count_occurrences(c, v, x1) for c in t.children
                )


class TestVariablesAndSubterms:
    def test_var_set(self, f1, x1):
        assert variables_of(parse_term("sigma(x,g(c))", f1, x1)) == {"s": {"x"}}
        assert variables_of(parse_term("c", f1, x1)) == {}

    def test_var_set_f2(self, f2, x2):
        assert variables_of(parse_term("iszero(succ(x))", f2, x2)) == {"e": {"x"}}

    def test_subterms(self, f1, x1):
        subt = subterms_of(parse_term("g(c)", f1, x1))
        assert {print_term(t) for t in subt["s"]} == {"g(c)", "c"}

    def test_subterms_f2(self, f2, x2):
        subt = subterms_of(parse_term("iszero(zero)", f2, x2))
        assert {print_term(t) for t in subt["b"]} == {"iszero(zero)"}
        assert {print_term(t) for t in subt["e"]} == {"zero"}

    def test_subterm_of_variable(self, f1, x1):
        assert subterms_of(parse_term("x", f1, x1)) == {"s": {Var("x", "s")}}


class TestSubstitution:
    def test_occurrence_indexed(self, f1, x1):
        p = parse_term("sigma(z,g(z))", f1, x1)
        out = substitute_occurrences(
            p, {"z": [parse_term("c", f1, x1), parse_term("g(c)", f1, x1)]}
        )
        assert print_term(out) == "sigma(c,g(g(c)))"

    def test_no_variables(self, f1, x1):
        p = parse_term("c", f1, x1)
        assert substitute_occurrences(p, {}) == p

    def test_leaf(self, f1, x1):
        p = parse_term("x", f1, x1)
        q = parse_term("g(c)", f1, x1)
        assert substitute_occurrences(p, {"x": [q]}) == q

    def test_identity_family(self, f1, x1):
        rng = random.Random(3)
        for t in rng.sample(enumerate_terms(f1, x1, "s", 6), 50):
            repl = {
                v: [Var(v, "s")] * count_occurrences(t, v, x1) for v in ("x", "z")
            }
            assert substitute_occurrences(t, repl) == t

    def test_count_mismatch(self, f1, x1):
        with pytest.raises(ValidationError):
            substitute_occurrences(
                parse_term("sigma(z,z)", f1, x1), {"z": [parse_term("c", f1, x1)]}
            )

    def test_sort_mismatch(self, f2, x2):
        p = parse_term("iszero(x)", f2, x2)
        bad = parse_term("iszero(zero)", f2, x2)  # sort b, x needs e
        with pytest.raises(SortError):
            substitute_occurrences(p, {"x": [bad]})


class TestContexts:
    def test_apply(self, f1, x1):
        ctx = parse_context("g(@)", f1, x1)
        assert print_term(apply_context(ctx, parse_term("c", f1, x1))) == "g(c)"

    def test_compose(self, f1, x1):
        outer = parse_context("g(@)", f1, x1)
        inner = parse_context("sigma(@,z)", f1, x1)
        both = compose_contexts(outer, inner)
        assert print_term(apply_context(both, parse_term("c", f1, x1))) == "g(sigma(c,z))"

    def test_identity(self, f1, x1):
        ident = hole_context("s")
        q = parse_term("sigma(x,c)", f1, x1)
        assert apply_context(ident, q) == q

    def test_compose_associates(self, f1, x1):
        a = parse_context("g(@)", f1, x1)
        b = parse_context("sigma(@,z)", f1, x1)
        c = parse_context("sigma(x,@)", f1, x1)
        left = compose_contexts(compose_contexts(a, b), c)
        right = compose_contexts(a, compose_contexts(b, c))
        assert left == right

    def test_hole_identity_neutral(self, f1, x1):
        t = parse_context("sigma(@,z)", f1, x1)
        ident = hole_context("s")
        assert compose_contexts(t, ident) == t
        assert compose_contexts(ident, t) == t

    def test_two_holes_rejected(self, f1, x1):
        with pytest.raises(ValidationError):
            parse_context("sigma(@,@)", f1, x1)

    def test_sort_mismatch(self, f2, x2):
        ctx = parse_context("iszero(@)", f2, x2)
        with pytest.raises(SortError):
            apply_context(ctx, parse_term("iszero(zero)", f2, x2))

    def test_print_roundtrip(self, f1, x1):
        text = "sigma(g(@),z)"
        assert print_context(parse_context(text, f1, x1)) == text


class TestEnumeration:
    def test_f1_one_node(self, f1, x1):
        assert [print_term(t) for t in enumerate_terms(f1, x1, "s", 1)] == ["c", "x", "z"]

    def test_f2_two_nodes(self, f2, x2):
        assert [print_term(t) for t in enumerate_terms(f2, x2, "b", 2)] == [
            "iszero(zero)",
            "iszero(x)",
        ]

    def test_f2_no_boolean_constants(self, f2, x2):
        assert enumerate_terms(f2, x2, "b", 1) == []

    def test_monotone_and_typed(self, f1, x1):
        smaller = set(enumerate_terms(f1, x1, "s", 4))
        bigger = set(enumerate_terms(f1, x1, "s", 5))
        assert smaller <= bigger
        for t in bigger:
            assert typecheck(t, f1, x1) == "s"

    def test_exact_sizes(self, f1, x1):
        for t in enumerate_terms(f1, x1, "s", 6):
            assert t.size <= 6

    @pytest.mark.parametrize("max_nodes", [7])
    def test_parse_print_roundtrip(self, f1, x1, f2, x2, max_nodes):
        for sig, vars in ((f1, x1), (f2, x2)):
            universe = enumerate_all_terms(sig, vars, max_nodes)
            for sort, terms in universe.items():
                for t in terms:
                    assert parse_term(print_term(t), sig, vars) == t


class TestSignatureValidation:
    def test_duplicate_op_name(self):
        with pytest.raises(ValidationError):
            signature(["s"], [("f", [], "s"), ("f", ["s"], "s")])

    def test_unknown_sort(self):
        with pytest.raises(ValidationError):
            signature(["s"], [("f", ["t"], "s")])

    def test_empty_sorts(self):
        with pytest.raises(ValidationError):
            signature([], [])

    def test_variable_collides_with_op(self, f1):
        with pytest.raises(ValidationError):
            sorted_vars(f1, {"s": ["g"]})

    def test_variable_globally_unique(self, f2):
        with pytest.raises(ValidationError):
            sorted_vars(f2, {"e": ["x"], "b": ["x"]})
