import random

import pytest

from treelang.core import (
    ValidationError,
    Var,
    enumerate_all_terms,
    enumerate_terms,
    parse_context,
    parse_term,
    print_term,
)
from treelang.recognizer import (
    accepts,
    combine,
    determinize,
    empty_recognizer,
    equivalent,
    evaluator_nta,
    inverse_translation,
    is_empty,
    minimize,
    nta,
    recognize_basic,
    recognize_finite,
    recognize_singleton,
    recognizer,
    restrict_to_sort,
    universal_recognizer,
)
from treelang.algebra import finite_algebra
from treelang.oracle import enumerate_language

from conftest import accepted_sets, random_recognizer, same_language


class TestAccepts:
    def test_parity(self, f1, x1, r_par):
        assert accepts(r_par, parse_term("g(g(c))", f1, x1))
        assert not accepts(r_par, parse_term("g(c)", f1, x1))
        assert accepts(r_par, parse_term("sigma(z,z)", f1, x1))


class TestCombine:
    def test_union_with_empty(self, f1, x1, r_par):
        assert equivalent(combine("union", r_par, empty_recognizer(f1, x1)), r_par)

    def test_intersection_self(self, r_par):
        assert equivalent(combine("intersection", r_par, r_par), r_par)

    def test_difference_self_empty(self, r_par):
        assert is_empty(combine("difference", r_par, r_par))

    def test_exhaustive_boolean_semantics(self, f1, x1, r_par):
        rng = random.Random(2)
        other = random_recognizer(rng, f1, x1)
        universe = enumerate_all_terms(f1, x1, 6)
        a = accepted_sets(r_par, universe)
        b = accepted_sets(other, universe)
        for kind, fn in (
            ("union", lambda p, q: p | q),
            ("intersection", lambda p, q: p & q),
            ("difference", lambda p, q: p - q),
        ):
            got = accepted_sets(combine(kind, r_par, other), universe)
            assert got == {s: fn(a[s], b[s]) for s in universe}

    def test_de_morgan(self, f1, x1, r_par):
        rng = random.Random(3)
        a = random_recognizer(rng, f1, x1)
        b = random_recognizer(rng, f1, x1)
        u = universal_recognizer(f1, x1)
        left = combine("difference", u, combine("union", a, b))
        right = combine(
            "intersection", combine("difference", u, a), combine("difference", u, b)
        )
        assert equivalent(left, right)

    def test_complement_involution(self, f1, x1, r_par):
        u = universal_recognizer(f1, x1)
        twice = combine("difference", u, combine("difference", u, r_par))
        assert equivalent(twice, r_par)

    def test_signature_mismatch(self, f1, x1, f2, x2, r_par):
        other = universal_recognizer(f2, x2)
        with pytest.raises(ValidationError):
            combine("union", r_par, other)


class TestEmptiness:
    def test_empty_m(self, f1, x1):
        assert is_empty(empty_recognizer(f1, x1))

    def test_parity_nonempty(self, r_par):
        assert not is_empty(r_par)

    def test_unreachable_accepting(self, f2):
        # no variables at all; b-value 0 is never produced (iszero always gives 1)
        from treelang.core import sorted_vars

        no_vars = sorted_vars(f2, {})
        alg = finite_algebra(
            f2, {"e": 1, "b": 2}, {"zero": [0], "succ": [0], "iszero": [1]}
        )
        rec = recognizer(no_vars, alg, {}, {"b": [0]})
        assert is_empty(rec)
        rec2 = recognizer(no_vars, alg, {}, {"b": [1]})
        assert not is_empty(rec2)

    def test_agrees_with_enumeration(self, f1, x1, f2, x2):
        rng = random.Random(9)
        for sig, vars in ((f1, x1), (f2, x2)):
            for _ in range(25):
                rec = random_recognizer(rng, sig, vars)
                enumerated = enumerate_language(rec, 7)
                has_term = any(enumerated[s] for s in sig.sorts)
                assert is_empty(rec) == (not has_term)


class TestEquivalence:
    def test_reflexive(self, r_par):
        assert equivalent(r_par, r_par)

    def test_minimize_preserves(self, r_par):
        assert equivalent(r_par, minimize(r_par))

    def test_complement_differs(self, f1, x1, r_par):
        flipped = recognizer(
            x1, r_par.algebra, dict(r_par.assignment), {"s": [1]}
        )
        assert not equivalent(r_par, flipped)


class TestMinimize:
    def test_diagonal_product(self, f1, x1, r_par):
        prod = combine("intersection", r_par, r_par)
        assert prod.algebra.size("s") == 4
        m = minimize(prod)
        assert m.algebra.size("s") == 2
        assert equivalent(m, r_par)

    def test_already_minimal(self, r_par):
        m = minimize(r_par)
        assert minimize(m).algebra.carriers == m.algebra.carriers

    def test_empty_language_single_state(self, f1, x1):
        m = minimize(empty_recognizer(f1, x1))
        assert m.algebra.size("s") == 1

    def test_language_preserved_exhaustively(self, f1, x1):
        rng = random.Random(13)
        for _ in range(20):
            rec = random_recognizer(rng, f1, x1)
            assert same_language(rec, minimize(rec), 6)

    def test_idempotent_state_counts(self, f1, x1, f2, x2):
        rng = random.Random(15)
        for sig, vars in ((f1, x1), (f2, x2)):
            for _ in range(10):
                m = minimize(random_recognizer(rng, sig, vars))
                assert minimize(m).algebra.carriers == m.algebra.carriers


class TestDeterminize:
    def test_single_leaf_language(self, f1, x1):
        machine = nta(f1, x1, {"s": 2}, {"z": {0, 1}}, {}, {}, {"s": {0, 1}})
        rec = determinize(machine)
        got = {t for t in enumerate_terms(f1, x1, "s", 3) if accepts(rec, t)}
        assert got == {Var("z", "s")}

    def test_evaluator_roundtrip(self, r_par):
        assert equivalent(determinize(evaluator_nta(r_par)), r_par)

    def test_empty_machine(self, f1, x1):
        machine = nta(f1, x1, {"s": 0}, {}, {}, {}, {})
        rec = determinize(machine)
        assert is_empty(rec)

    def test_epsilon_closure(self, f1, x1):
        # leaf z -> 0, epsilon 0 -> 1, accepting {1}
        machine = nta(f1, x1, {"s": 2}, {"z": {0}}, {}, {"s": [(0, 1)]}, {"s": {1}})
        rec = determinize(machine)
        assert accepts(rec, parse_term("z", f1, x1))
        assert not accepts(rec, parse_term("x", f1, x1))

    def test_guard(self, f1, x1):
        machine = nta(f1, x1, {"s": 2}, {"z": {0, 1}}, {}, {}, {"s": {0, 1}})
        with pytest.raises(ValidationError):
            determinize(machine, cap=1)


class TestRecognizeBasic:
    @pytest.mark.parametrize(
        "pattern,expected",
        [
            ("x", {"x"}),
            ("c", {"c"}),
            ("sigma(x,z)", {"sigma(x,z)"}),
            ("sigma(x,x)", {"sigma(x,x)"}),
            ("g(z)", {"g(z)"}),
        ],
    )
    def test_singletons(self, f1, x1, pattern, expected):
        rec = recognize_basic(f1, x1, parse_term(pattern, f1, x1))
        got = {
            print_term(t) for t in enumerate_terms(f1, x1, "s", 3) if accepts(rec, t)
        }
        assert got == expected

    def test_non_flat_rejected(self, f1, x1):
        with pytest.raises(ValidationError):
            recognize_basic(f1, x1, parse_term("sigma(g(x),z)", f1, x1))

    def test_state_counts_match_construction(self, f1, x1):
        # flat case carriers: root sort gets k_s + 2
        rec = recognize_basic(f1, x1, parse_term("sigma(x,z)", f1, x1))
        assert rec.algebra.size("s") == 4  # two coded variables + junk + hit


class TestRecognizeSingleton:
    def test_exact(self, f1, x1):
        term = parse_term("g(sigma(c,x))", f1, x1)
        rec = recognize_singleton(f1, x1, term)
        got = {t for t in enumerate_terms(f1, x1, "s", 6) if accepts(rec, t)}
        assert got == {term}

    def test_finite_set(self, f1, x1):
        terms = [parse_term("c", f1, x1), parse_term("g(z)", f1, x1)]
        rec = recognize_finite(f1, x1, terms)
        got = {t for t in enumerate_terms(f1, x1, "s", 4) if accepts(rec, t)}
        assert got == set(terms)

    def test_multi_sorted(self, f2, x2):
        term = parse_term("iszero(succ(x))", f2, x2)
        rec = recognize_singleton(f2, x2, term)
        universe = enumerate_all_terms(f2, x2, 5)
        got = {
            t
            for sort in f2.sorts
            for t in universe[sort]
            if accepts(rec, t)
        }
        assert got == {term}


class TestInverseTranslation:
    def test_flip(self, f1, x1, r_par):
        inv = inverse_translation(r_par, parse_context("g(@)", f1, x1))
        universe = enumerate_terms(f1, x1, "s", 6)
        for t in universe:
            wrapped = parse_term(f"g({print_term(t)})", f1, x1)
            assert accepts(inv, t) == accepts(r_par, wrapped)

    def test_identity_context_restricts(self, f1, x1, r_par):
        from treelang.core import hole_context

        inv = inverse_translation(r_par, hole_context("s"))
        assert equivalent(inv, restrict_to_sort(r_par, "s"))

    def test_xor_context(self, f1, x1, r_par):
        inv = inverse_translation(r_par, parse_context("sigma(@,z)", f1, x1))
        assert accepts(inv, parse_term("g(c)", f1, x1))
        assert not accepts(inv, parse_term("c", f1, x1))

    def test_other_sorts_emptied(self, f2, x2):
        rng = random.Random(21)
        rec = random_recognizer(rng, f2, x2)
        ctx = parse_context("iszero(@)", f2, x2)
        inv = inverse_translation(rec, ctx)
        assert inv.accepting_at("b") == frozenset()


class TestSortedDecomposition:
    def test_union_of_restrictions(self, f2, x2):
        # a recognizer equals the union over sorts of its single-sort restrictions
        rng = random.Random(19)
        for _ in range(10):
            rec = random_recognizer(rng, f2, x2)
            parts = [restrict_to_sort(rec, s) for s in f2.sorts]
            merged = parts[0]
            for p in parts[1:]:
                merged = combine("union", merged, p)
            assert equivalent(merged, rec)
