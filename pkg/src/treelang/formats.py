"""Structured-text (YAML) file formats for signatures, algebras, recognizers,
hyperderivors, derivors, and partitions.

Key names and the mixed-radix table order (last argument fastest) are
normative: serialization is deterministic so golden files compare bit-exact.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Mapping

import yaml

from .algebra import FiniteAlgebra, finite_algebra
from .congruence import SortedPartition, partition
from .core import (
    Signature,
    SortedVars,
    ValidationError,
    parse_term,
    print_term,
    signature,
    sorted_vars,
)
from .derivor import Derivor, derivor, hall_term
from .recognizer import Recognizer, recognizer
from .treehom import Hyperderivor, hyperderivor, pattern_environment


def load_document(path: str | Path) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        doc = yaml.safe_load(handle)
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: expected a mapping at top level")
    return doc


def dump_document(data: Mapping[str, Any], path: str | Path | None = None) -> str:
    text = yaml.safe_dump(dict(data), sort_keys=False, default_flow_style=None)
    if path is not None:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
    return text


# ---------------------------------------------------------------------------
# signatures


def signature_from_doc(doc: Mapping[str, Any]) -> tuple[Signature, SortedVars]:
    try:
        sorts = doc["sorts"]
        ops = doc["ops"]
    except KeyError as missing:
        raise ValidationError(f"signature document missing key {missing}") from None
    sig = signature(
        [str(s) for s in sorts],
        [(str(o["name"]), [str(a) for a in o.get("arity", [])], str(o["result"])) for o in ops],
    )
    vars_doc = doc.get("vars", {}) or {}
    vars = sorted_vars(sig, {str(s): [str(x) for x in xs] for s, xs in vars_doc.items()})
    return sig, vars


def signature_to_doc(sig: Signature, vars: SortedVars) -> dict:
    return {
        "sorts": list(sig.sorts),
        "ops": [
            {"name": op.name, "arity": list(op.arity), "result": op.result}
            for op in sig.ops
        ],
        "vars": {s: list(names) for s, names in vars.by_sort if names},
    }


def load_signature(path: str | Path) -> tuple[Signature, SortedVars]:
    return signature_from_doc(load_document(path))


# ---------------------------------------------------------------------------
# algebras and recognizers


def algebra_from_doc(
    doc: Mapping[str, Any], sig: Signature
) -> tuple[FiniteAlgebra, dict[str, int]]:
    try:
        carriers = doc["carriers"]
        tables = doc["tables"]
    except KeyError as missing:
        raise ValidationError(f"algebra document missing key {missing}") from None
    alg = finite_algebra(
        sig,
        {str(s): int(n) for s, n in carriers.items()},
        {str(o): [int(v) for v in t] for o, t in tables.items()},
    )
    assignment = {str(x): int(v) for x, v in (doc.get("assignment", {}) or {}).items()}
    return alg, assignment


def algebra_to_doc(alg: FiniteAlgebra, assignment: Mapping[str, int]) -> dict:
    return {
        "carriers": {s: n for s, n in alg.carriers},
        "tables": {name: list(table) for name, table in alg.tables},
        "assignment": dict(assignment),
    }


def recognizer_from_doc(doc: Mapping[str, Any]) -> Recognizer:
    sig, vars = signature_from_doc(doc)
    alg, assignment = algebra_from_doc(doc, sig)
    accepting = {
        str(s): [int(e) for e in elems]
        for s, elems in (doc.get("accepting", {}) or {}).items()
    }
    return recognizer(vars, alg, assignment, accepting)


def recognizer_to_doc(rec: Recognizer) -> dict:
    doc = signature_to_doc(rec.signature, rec.vars)
    doc.update(algebra_to_doc(rec.algebra, dict(rec.assignment)))
    doc["accepting"] = {
        s: list(elems) for s, elems in rec.accepting if elems
    }
    return doc


def load_recognizer(path: str | Path) -> Recognizer:
    return recognizer_from_doc(load_document(path))


def save_recognizer(rec: Recognizer, path: str | Path) -> None:
    dump_document(recognizer_to_doc(rec), path)


# ---------------------------------------------------------------------------
# hyperderivors and derivors


def hyperderivor_from_doc(
    doc: Mapping[str, Any],
    source: Signature,
    source_vars: SortedVars,
    target: Signature,
    target_vars: SortedVars,
) -> Hyperderivor:
    try:
        sort_map = {str(a): str(b) for a, b in doc["sort_map"].items()}
        raw_patterns = doc["patterns"]
        raw_images = doc["var_images"]
    except KeyError as missing:
        raise ValidationError(f"hyperderivor document missing key {missing}") from None
    patterns = {}
    for op in source.ops:
        if op.name not in raw_patterns:
            raise ValidationError(f"hyperderivor document lacks a pattern for {op.name!r}")
        env = pattern_environment(target, target_vars, sort_map, op)
        patterns[op.name] = parse_term(str(raw_patterns[op.name]), target, env)
    var_images = {}
    for x in source_vars.all_names():
        if x not in raw_images:
            raise ValidationError(f"hyperderivor document lacks an image for {x!r}")
        var_images[x] = parse_term(str(raw_images[x]), target, target_vars)
    return hyperderivor(
        source, source_vars, target, target_vars, sort_map, patterns, var_images
    )


def hyperderivor_to_doc(h: Hyperderivor) -> dict:
    return {
        "sort_map": {s: t for s, t in h.sort_map},
        "patterns": {name: print_term(body) for name, body in h.patterns},
        "var_images": {x: print_term(body) for x, body in h.var_images},
    }


def derivor_from_doc(
    doc: Mapping[str, Any], source: Signature, target: Signature
) -> Derivor:
    try:
        sort_map = {str(a): str(b) for a, b in doc["sort_map"].items()}
        raw_patterns = doc["patterns"]
    except KeyError as missing:
        raise ValidationError(f"derivor document missing key {missing}") from None
    patterns = {}
    for op in source.ops:
        if op.name not in raw_patterns:
            raise ValidationError(f"derivor document lacks a pattern for {op.name!r}")
        arity = tuple(sort_map[w] for w in op.arity)
        env = sorted_vars(
            target,
            _placeholder_vars(target, arity),
        )
        body = parse_term(str(raw_patterns[op.name]), target, env)
        patterns[op.name] = hall_term(body, arity, sort_map[op.result])
    return derivor(source, target, sort_map, patterns)


def _placeholder_vars(target: Signature, arity: tuple[str, ...]) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for i, w in enumerate(arity):
        out.setdefault(w, []).append(f"v{i}")
    return out


def derivor_to_doc(d: Derivor) -> dict:
    return {
        "sort_map": {s: t for s, t in d.sort_map},
        "patterns": {name: print_term(ht.term) for name, ht in d.patterns},
    }


# ---------------------------------------------------------------------------
# partitions


def partition_to_doc(p: SortedPartition) -> dict:
    return {s: list(ids) for s, ids in p.classes}


def partition_from_doc(doc: Mapping[str, Any], sorts) -> SortedPartition:
    return partition(sorts, {str(s): [int(c) for c in ids] for s, ids in doc.items()})
