"""Command-line front end.

Loads recognizers, signatures, hyperderivors, and derivors from structured
text files, runs the language operators, decides membership, emptiness, and
equivalence, enumerates languages, and emits minimized recognizers.  Every
transform prints the serialized result document on stdout (bit-exact for
golden checks) and also writes it with ``-o``.

Exit codes: 0 on success, 1 on validation failure, 2 when an oracle mode
cannot decide within its bound.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from contextlib import redirect_stdout
from pathlib import Path

import yaml

from . import closure, formats, oracle, treehom
from .core import ValidationError, parse_context, parse_term, print_term
from .derivor import apply_derivor_term, compose_derivors, derived_algebra_derivor, hall_term
from .recognizer import (
    accepts,
    combine,
    equivalent,
    inverse_translation,
    is_empty,
    minimize,
)
from .congruence import syntactic_congruence
from .algebra import closure_elements, restrict_algebra


class UndecidableAtBound(Exception):
    pass


def _emit(args, payload_json, payload_text: str) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload_json, sort_keys=False))
    else:
        print(payload_text)


def _emit_doc(args, doc: dict) -> None:
    text = formats.dump_document(doc)
    if getattr(args, "json", False):
        print(json.dumps(doc, sort_keys=False))
    else:
        sys.stdout.write(text)
    out = getattr(args, "output", None)
    if out:
        formats.dump_document(doc, out)


def _load_rec(path: str):
    return formats.load_recognizer(path)


def cmd_member(args) -> int:
    rec = _load_rec(args.recognizer)
    term = parse_term(args.term, rec.signature, rec.vars)
    if args.oracle:
        if term.size > args.max_nodes:
            print(
                f"undecidable at bound: term has {term.size} nodes > {args.max_nodes}",
                file=sys.stderr,
            )
            return 2
        langs = oracle.enumerate_language(rec, args.max_nodes)
        result = term in set(langs[term.sort])
    else:
        result = accepts(rec, term)
    _emit(args, {"member": result}, "true" if result else "false")
    return 0


def cmd_enumerate(args) -> int:
    rec = _load_rec(args.recognizer)
    langs = oracle.enumerate_language(rec, args.max_nodes)
    payload = {s: [print_term(t) for t in ts] for s, ts in langs.items()}
    lines = [f"{s}: {print_term(t)}" for s in rec.signature.sorts for t in langs[s]]
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_minimize(args) -> int:
    rec = _load_rec(args.recognizer)
    _emit_doc(args, formats.recognizer_to_doc(minimize(rec)))
    return 0


def cmd_combine(args) -> int:
    r1 = _load_rec(args.left)
    r2 = _load_rec(args.right)
    _emit_doc(args, formats.recognizer_to_doc(combine(args.kind, r1, r2)))
    return 0


def cmd_substitute(args) -> int:
    rec = _load_rec(args.recognizer)
    family = {}
    for item in args.with_ or []:
        if "=" not in item:
            raise ValidationError(f"--with expects var=FILE, got {item!r}")
        name, path = item.split("=", 1)
        family[name] = _load_rec(path)
    _emit_doc(args, formats.recognizer_to_doc(closure.substitute_language(rec, family)))
    return 0


def cmd_iterate(args) -> int:
    rec = _load_rec(args.recognizer)
    _emit_doc(args, formats.recognizer_to_doc(closure.iterate_language(rec, args.var)))
    return 0


def cmd_quotient(args) -> int:
    l = _load_rec(args.recognizer)
    k = _load_rec(args.by)
    _emit_doc(args, formats.recognizer_to_doc(closure.quotient_language(l, k, args.var)))
    return 0


def cmd_invtrans(args) -> int:
    rec = _load_rec(args.recognizer)
    ctx = parse_context(args.context, rec.signature, rec.vars)
    _emit_doc(args, formats.recognizer_to_doc(inverse_translation(rec, ctx)))
    return 0


def cmd_equal(args) -> int:
    r1 = _load_rec(args.left)
    r2 = _load_rec(args.right)
    result = equivalent(r1, r2)
    _emit(args, {"equal": result}, "true" if result else "false")
    return 0


def cmd_empty(args) -> int:
    rec = _load_rec(args.recognizer)
    result = is_empty(rec)
    _emit(args, {"empty": result}, "true" if result else "false")
    return 0


def cmd_syncong(args) -> int:
    rec = _load_rec(args.recognizer)
    reached = closure_elements(rec.algebra, _reachable_seed(rec))
    small, index = restrict_algebra(rec.algebra, reached)
    acc = {
        s: frozenset(index[s][e] for e in rec.accepting_at(s) if e in index[s])
        for s in rec.signature.sorts
    }
    omega = syntactic_congruence(small, acc)
    payload = {s: n for s, n in omega.counts}
    lines = [f"{s}: {n}" for s, n in omega.counts]
    _emit(args, payload, "\n".join(lines))
    return 0


def _reachable_seed(rec):
    from .recognizer import _seed

    return _seed(rec)


def _require(args, *names) -> None:
    for name in names:
        if getattr(args, name, None) in (None, ""):
            raise ValidationError(f"--{name.replace('_', '-')} is required for this mode")


def cmd_treehom(args) -> int:
    if args.mode in ("apply", "inverse"):
        _require(args, "source")
        source_sig, source_vars = formats.load_signature(args.source)
    if args.mode == "apply":
        _require(args, "target", "term")
        target_sig, target_vars = formats.load_signature(args.target)
        h = formats.hyperderivor_from_doc(
            formats.load_document(args.hyp), source_sig, source_vars, target_sig, target_vars
        )
        term = parse_term(args.term, source_sig, source_vars)
        image = treehom.apply_treehom(h, term)
        _emit(args, {"term": print_term(image)}, print_term(image))
        return 0
    if args.mode == "inverse":
        _require(args, "recognizer", "sort")
        rec = _load_rec(args.recognizer)  # over the target
        h = formats.hyperderivor_from_doc(
            formats.load_document(args.hyp), source_sig, source_vars, rec.signature, rec.vars
        )
        out = treehom.inverse_image(h, rec, args.sort)
        _emit_doc(args, formats.recognizer_to_doc(out))
        return 0
    if args.mode == "image":
        _require(args, "target", "recognizer", "sort")
        target_sig, target_vars = formats.load_signature(args.target)
        rec = _load_rec(args.recognizer)  # over the source
        h = formats.hyperderivor_from_doc(
            formats.load_document(args.hyp), rec.signature, rec.vars, target_sig, target_vars
        )
        out = treehom.direct_image(h, rec, args.sort)
        _emit_doc(args, formats.recognizer_to_doc(out))
        return 0
    raise ValidationError(f"unknown treehom mode {args.mode!r}")


def cmd_derivor(args) -> int:
    if args.mode == "apply":
        _require(args, "drv", "source", "target", "term")
        source_sig, _ = formats.load_signature(args.source)
        target_sig, _ = formats.load_signature(args.target)
        d = formats.derivor_from_doc(formats.load_document(args.drv), source_sig, target_sig)
        arity = tuple(a for a in args.arity.split(",") if a)
        env = formats.sorted_vars(
            source_sig, formats._placeholder_vars(source_sig, arity)
        )
        body = parse_term(args.term, source_sig, env)
        ht = hall_term(body, arity, body.sort)
        out = apply_derivor_term(d, ht)
        payload = {
            "term": print_term(out.term),
            "arity": list(out.arity),
            "sort": out.sort,
        }
        _emit(
            args,
            payload,
            f"{print_term(out.term)} : ({','.join(out.arity)}) -> {out.sort}",
        )
        return 0
    if args.mode == "compose":
        _require(args, "inner", "outer", "source", "middle", "target")
        source_sig, _ = formats.load_signature(args.source)
        middle_sig, _ = formats.load_signature(args.middle)
        target_sig, _ = formats.load_signature(args.target)
        inner = formats.derivor_from_doc(formats.load_document(args.inner), source_sig, middle_sig)
        outer = formats.derivor_from_doc(formats.load_document(args.outer), middle_sig, target_sig)
        composed = compose_derivors(outer, inner)
        _emit_doc(args, formats.derivor_to_doc(composed))
        return 0
    if args.mode == "derive":
        _require(args, "drv", "source", "target", "algebra")
        source_sig, _ = formats.load_signature(args.source)
        target_sig, _ = formats.load_signature(args.target)
        d = formats.derivor_from_doc(formats.load_document(args.drv), source_sig, target_sig)
        doc = formats.load_document(args.algebra)
        alg, assignment = formats.algebra_from_doc(doc, target_sig)
        derived = derived_algebra_derivor(d, alg)
        _emit_doc(args, formats.algebra_to_doc(derived, {}))
        return 0
    raise ValidationError(f"unknown derivor mode {args.mode!r}")


def cmd_golden(args) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        raise ValidationError(f"{directory} is not a directory")
    cases = sorted(directory.glob("*.case"))
    if not cases:
        raise ValidationError(f"no .case files in {directory}")
    failures = 0
    for case_path in cases:
        case = yaml.safe_load(case_path.read_text(encoding="utf-8"))
        argv = [_resolve_token(directory, str(a)) for a in case["argv"]]
        expect_path = directory / case["expect"]
        if not expect_path.is_file():
            raise ValidationError(f"missing expected-output file {expect_path}")
        expected = expect_path.read_text(encoding="utf-8")
        buffer = io.StringIO()
        with redirect_stdout(buffer):
            code = main(argv)
        got = buffer.getvalue()
        if code != 0 or got != expected:
            failures += 1
            print(f"FAIL {case_path.name}")
            if code != 0:
                print(f"  exit code {code}")
            for line in _diff_lines(expected, got):
                print(f"  {line}")
        else:
            print(f"PASS {case_path.name}")
    return 1 if failures else 0


def _resolve_token(directory: Path, token: str) -> str:
    """Rewrite argv tokens naming files in the case directory to full paths."""
    if (directory / token).is_file():
        return str(directory / token)
    if "=" in token:
        head, tail = token.split("=", 1)
        if (directory / tail).is_file():
            return f"{head}={directory / tail}"
    return token


def _diff_lines(expected: str, got: str):
    import difflib

    return difflib.unified_diff(
        expected.splitlines(), got.splitlines(), "expected", "got", lineterm="", n=1
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treelang",
        description="Operators and decision procedures for many-sorted recognizable tree languages.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(fn=fn)
        p.add_argument("--json", action="store_true", help="machine-readable output")
        return p

    p = add("member", cmd_member, help="decide term membership")
    p.add_argument("recognizer")
    p.add_argument("term")
    p.add_argument("--oracle", action="store_true", help="decide by bounded enumeration")
    p.add_argument("--max-nodes", type=int, default=7)

    p = add("enumerate", cmd_enumerate, help="list accepted terms up to a size bound")
    p.add_argument("recognizer")
    p.add_argument("--max-nodes", type=int, required=True)

    p = add("minimize", cmd_minimize, help="emit the minimized recognizer")
    p.add_argument("recognizer")
    p.add_argument("-o", "--output")

    p = add("combine", cmd_combine, help="boolean combination of two recognizers")
    p.add_argument("kind", choices=["union", "intersection", "difference"])
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("-o", "--output")

    p = add("substitute", cmd_substitute, help="substitution operator")
    p.add_argument("recognizer")
    p.add_argument("--with", dest="with_", action="append", metavar="VAR=FILE")
    p.add_argument("-o", "--output")

    p = add("iterate", cmd_iterate, help="z-iteration operator")
    p.add_argument("recognizer")
    p.add_argument("--var", required=True)
    p.add_argument("-o", "--output")

    p = add("quotient", cmd_quotient, help="z-quotient operator")
    p.add_argument("recognizer")
    p.add_argument("--by", required=True)
    p.add_argument("--var", required=True)
    p.add_argument("-o", "--output")

    p = add("invtrans", cmd_invtrans, help="inverse translation along a one-hole context")
    p.add_argument("recognizer")
    p.add_argument("--context", required=True)
    p.add_argument("-o", "--output")

    p = add("equal", cmd_equal, help="decide language equality")
    p.add_argument("left")
    p.add_argument("right")

    p = add("empty", cmd_empty, help="decide language emptiness")
    p.add_argument("recognizer")

    p = add("syncong", cmd_syncong, help="per-sort syntactic-congruence indices")
    p.add_argument("recognizer")

    p = add("treehom", cmd_treehom, help="tree-homomorphism operators")
    p.add_argument("mode", choices=["apply", "inverse", "image"])
    p.add_argument("--hyp", required=True, help="hyperderivor file")
    p.add_argument("--source", help="source signature file")
    p.add_argument("--target", help="target signature file")
    p.add_argument("--sort", help="distinguished source sort")
    p.add_argument("--term", dest="term", help="term to apply (apply mode)")
    p.add_argument("--rec", dest="recognizer", help="recognizer file (inverse/image modes)")
    p.add_argument("-o", "--output")

    p = add("derivor", cmd_derivor, help="derivor operators")
    p.add_argument("mode", choices=["apply", "compose", "derive"])
    p.add_argument("--drv", help="derivor file")
    p.add_argument("--inner", help="first derivor (compose mode)")
    p.add_argument("--outer", help="second derivor (compose mode)")
    p.add_argument("--source", help="source signature file")
    p.add_argument("--middle", help="middle signature file (compose mode)")
    p.add_argument("--target", help="target signature file")
    p.add_argument("--arity", default="", help="comma-separated rank arity word (apply mode)")
    p.add_argument("--term", dest="term", help="hall term to apply (apply mode)")
    p.add_argument("--algebra", help="algebra file over the target (derive mode)")
    p.add_argument("-o", "--output")

    p = add("golden", cmd_golden, help="re-run recorded cases and diff bit-exact outputs")
    p.add_argument("directory")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ValidationError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
