"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
3 size budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path
from typing import Sequence

from .corpus import THEORIES, load_theory
from .definability import NotInvariant, orbit_descriptors, synthesize_invariant_borel
from .groupoid import BudgetExceeded, GroupoidSlice, home_fibers
from .interp import Interpretation, InterpretationError, apply_to_model
from .morley import morleyize
from .semantics import FiniteModel, LanguageMismatch, NotAModel, enumerate_models, eval_formula, satisfies_theory
from .syntax import (
    Atom,
    Eq,
    disj,
    FormulaError,
    FragmentError,
    Language,
    Theory,
    fragment_close,
    parse_formula,
    parse_theory,
    print_formula,
    print_theory,
    relations_used,
    subformulas,
)
from .syntax.text import KEYWORDS
from .verify import SUITES, RunConfig, render_text, run_verify_suite

BIG_CAP = 5
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _read_theory(ref: str) -> tuple[Language, Theory]:
    """A theory file path, or the short name of a bundled theory."""
    path = Path(ref)
    if path.exists():
        return parse_theory(path.read_text())
    if ref in THEORIES:
        return load_theory(ref)
    raise UsageError(f"no such theory file: {ref}")


def _read_json(ref: str):
    try:
        return json.loads(Path(ref).read_text())
    except FileNotFoundError:
        raise UsageError(f"no such file: {ref}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"{ref}: invalid JSON: {e}") from None


def _check_cap(args):
    if args.cap < 0:
        raise UsageError("--cap must be non-negative")
    if args.cap >= BIG_CAP and not args.i_know_this_is_big:
        raise UsageError(f"cap {args.cap} grows like n! times the model count; pass --i-know-this-is-big to proceed")


def _free_names(text: str, language: Language) -> list[str]:
    """Free variable names of a formula, in order of first use."""
    candidates = []
    for name in re.findall(r"[A-Za-z_][A-Za-z0-9_']*", text):
        if name not in KEYWORDS and name not in language and name not in candidates:
            candidates.append(name)
    phi = parse_formula(text, language, candidates)
    used = set()
    for sub in subformulas(phi):
        if isinstance(sub, Atom):
            used.update(a for a in sub.args if a < phi.n)
        elif isinstance(sub, Eq):
            used.update(a for a in (sub.i, sub.j) if a < phi.n)
    return [n for i, n in enumerate(candidates) if i in used]


def _emit(data, args):
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# -- subcommands ---------------------------------------------------------------

def cmd_check_theory(args) -> int:
    language, theory = _read_theory(args.theory)
    _emit(
        {
            "ok": True,
            "relations": [{"name": r.name, "arity": r.arity} for r in language.relations],
            "axioms": len(theory.axioms),
            "sentences": len(theory.sentences),
            "coherent": theory.coherent,
            "decidable": language.witness is not None,
            "normalized": print_theory(language, theory),
        },
        args,
    )
    return EXIT_OK


def cmd_models(args) -> int:
    _check_cap(args)
    language, theory = _read_theory(args.theory)
    models = enumerate_models(language, theory, args.cap)
    _emit({"cap": args.cap, "count": len(models), "models": [M.to_json() for M in models]}, args)
    return EXIT_OK


def cmd_eval(args) -> int:
    language, theory = _read_theory(args.theory)
    M = FiniteModel.from_json(_read_json(args.model), language)
    names = args.vars.split(",") if args.vars else _free_names(args.formula, language)
    phi = parse_formula(args.formula, language, names)
    report = satisfies_theory(M, theory)
    tuples = [list(t) for t in eval_formula(phi, M).sorted()]
    _emit({"variables": names, "context": phi.n, "model_satisfies_theory": report.ok, "tuples": tuples}, args)
    return EXIT_OK


def cmd_morleyize(args) -> int:
    language, theory = _read_theory(args.theory)
    seed = list(theory.formulas())
    for text in args.formula or []:
        names = _free_names(text, language)
        seed.append(parse_formula(text, language, names))
    fragment = fragment_close(seed, language)
    result = morleyize(language, theory, fragment, strict=not args.lenient)
    _emit(
        {
            "fragment_size": len(fragment),
            "theory": print_theory(result.target_language, result.target_theory),
            "index": result.sidecar(),
        },
        args,
    )
    return EXIT_OK


def cmd_interp_apply(args) -> int:
    F = Interpretation.from_json(_read_json(args.interp))
    M = FiniteModel.from_json(_read_json(args.model), F.target_language)
    N = apply_to_model(F, M)
    _emit({"model": N.to_json(), "satisfies_source_theory": satisfies_theory(N, F.source_theory).ok}, args)
    return EXIT_OK


def cmd_define_synth(args) -> int:
    _check_cap(args)
    language, theory = _read_theory(args.theory)
    S = GroupoidSlice(language, theory, args.cap, budget=args.budget)
    fs = home_fibers(1, S)
    relations = [r.name for r in language.relations if language.witness is None or r.name not in _witness_relations(language)]
    orbits = orbit_descriptors(fs, relations)
    if args.points:
        wanted = {fs.point(int(m), int(c)) for m, c in _read_json(args.points)}
        chosen = [i for i, (orb, _) in enumerate(orbits) if wanted & set(orb)]
        covered = {p for i in chosen for p in orbits[i][0]}
        if covered != wanted:
            extra = sorted(covered - wanted)[0]
            m, c = fs.points[extra]
            raise NotInvariant(f"set is not invariant: it meets the orbit of point ({m}, {c}) without containing it", -1, extra)
        phi = disj([synthesize_invariant_borel(orbits[i][1], fs, args.cap, language) for i in chosen], 1)
        _emit({"formula": print_formula(phi), "context": 1, "points": [list(fs.points[p]) for i in chosen for p in orbits[i][0]]}, args)
        return EXIT_OK
    out = []
    for orb, B in orbits:
        phi = synthesize_invariant_borel(B, fs, args.cap, language)
        out.append({"points": [list(fs.points[p]) for p in orb], "formula": print_formula(phi)})
    _emit({"cap": args.cap, "orbits": out}, args)
    return EXIT_OK


def _witness_relations(language: Language) -> set[str]:
    return set(relations_used(language.witness))


def cmd_groupoid_dump(args) -> int:
    _check_cap(args)
    language, theory = _read_theory(args.theory)
    S = GroupoidSlice(language, theory, args.cap, budget=args.budget)
    sorts = [("X1", home_fibers(1, S))] if args.with_action else []
    data = S.to_json(sorts)
    data["orbits"] = S.orbits()
    _emit(data, args)
    return EXIT_OK


def cmd_verify(args) -> int:
    _check_cap(args)
    cfg = RunConfig(cap=args.cap, budget=args.budget, seed=args.seed, output=args.format)
    report = run_verify_suite(cfg, args.suite)
    if args.format == "json":
        _emit(report, args)
    else:
        text = render_text(report)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    return EXIT_OK if report["failed"] == 0 else EXIT_FAIL


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ilwb", description="Infinitary logic workbench: models, sorts, groupoids, interpretations.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, cap=False, out=True):
        if cap:
            sp.add_argument("--cap", type=int, default=3, help="largest model size (default 3)")
            sp.add_argument("--budget", type=int, default=10**6, help="maximum morphism count (default 10^6)")
            sp.add_argument("--i-know-this-is-big", action="store_true", help="allow caps of 5 or more")
        if out:
            sp.add_argument("--out", help="write output to this file instead of stdout")

    sp = sub.add_parser("check-theory", help="parse a theory file and report its shape")
    sp.add_argument("theory")
    common(sp)
    sp.set_defaults(run=cmd_check_theory)

    sp = sub.add_parser("models", help="enumerate all models up to the cap")
    sp.add_argument("--theory", required=True)
    common(sp, cap=True)
    sp.set_defaults(run=cmd_models)

    sp = sub.add_parser("eval", help="evaluate a formula in a model")
    sp.add_argument("--theory", required=True)
    sp.add_argument("--model", required=True)
    sp.add_argument("--formula", required=True)
    sp.add_argument("--vars", help="comma-separated free variables (default: in order of first use)")
    common(sp)
    sp.set_defaults(run=cmd_eval)

    sp = sub.add_parser("morleyize", help="replace fragment formulas by new relation symbols")
    sp.add_argument("--theory", required=True)
    sp.add_argument("--formula", action="append", help="extra seed formula for the fragment (repeatable)")
    sp.add_argument("--lenient", action="store_true", help="warn instead of failing on a non-closed fragment")
    common(sp)
    sp.set_defaults(run=cmd_morleyize)

    sp = sub.add_parser("interp-apply", help="transport a target model along an interpretation")
    sp.add_argument("--interp", required=True)
    sp.add_argument("--model", required=True)
    common(sp)
    sp.set_defaults(run=cmd_interp_apply)

    sp = sub.add_parser("define-synth", help="synthesize formulas for invariant sets of points")
    sp.add_argument("--theory", required=True)
    sp.add_argument("--points", help="JSON list of [model, element] pairs; default prints every orbit")
    common(sp, cap=True)
    sp.set_defaults(run=cmd_define_synth)

    sp = sub.add_parser("groupoid-dump", help="dump the groupoid of models up to the cap")
    sp.add_argument("--theory", required=True)
    sp.add_argument("--with-action", action="store_true", help="include the action on one-tuples")
    common(sp, cap=True)
    sp.set_defaults(run=cmd_groupoid_dump)

    sp = sub.add_parser("verify", help="run verification suites")
    sp.add_argument("--suite", choices=SUITES + ("all",), default="all")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--format", choices=("json", "text"), default="json")
    common(sp, cap=True)
    sp.set_defaults(run=cmd_verify)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.run(args)
    except BudgetExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, FormulaError, FragmentError, LanguageMismatch) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (NotInvariant, NotAModel, InterpretationError) as e:
        print(f"verification failed: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
