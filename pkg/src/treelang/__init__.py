"""Many-sorted recognizable tree languages.

Free term algebras over many-sorted signatures, finite algebras with
syntactic-congruence machinery, and the full kit of recognizability-preserving
language operators (Boolean combinations, substitution, iteration, quotients,
inverse translations, tree-homomorphism images, derivor-derived images), each
backed by a brute-force semantic oracle for testing.
"""

from .core import (
    Context,
    Node,
    Operation,
    ParseError,
    Signature,
    SortedVars,
    SortError,
    Term,
    ValidationError,
    Var,
    apply_context,
    compose_contexts,
    context,
    count_occurrences,
    enumerate_all_terms,
    enumerate_terms,
    hole_context,
    node,
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
from .algebra import (
    FiniteAlgebra,
    evaluate,
    finite_algebra,
    generated_subalgebra,
    product_algebra,
    quotient_algebra,
    subset_algebra,
    translation_table,
)
from .congruence import (
    SortedPartition,
    cogenerated_congruence,
    is_congruence,
    meet_partitions,
    partition,
    saturate,
    syntactic_congruence,
)
from .recognizer import (
    NTA,
    Recognizer,
    accepts,
    combine,
    determinize,
    empty_recognizer,
    equivalent,
    inverse_translation,
    is_empty,
    minimize,
    recognize_basic,
    recognize_finite,
    recognize_singleton,
    recognizer,
    restrict_to_sort,
    universal_recognizer,
)
from .closure import (
    iterate_language,
    quotient_language,
    quotient_seed_values,
    substitute_language,
)
from .treehom import (
    Hyperderivor,
    apply_treehom,
    derived_algebra,
    direct_image,
    hom_to_hyperderivor,
    hyperderivor,
    inverse_image,
)
from .derivor import (
    Derivor,
    HallTerm,
    apply_derivor_term,
    compose_derivors,
    derived_algebra_derivor,
    derivor,
    derivor_to_hyperderivor,
    hall_term,
    identity_derivor,
    projection,
    xi_substitute,
)

__all__ = [name for name in dir() if not name.startswith("_")]
