"""Command-line surface.

Exit codes: 0 for valid/true/clean, 1 for invalid/false/violations, 2 for
usage, parse, fragment, or model-format errors.  Stdout carries exactly one
JSON value per query; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from .oracle import EnumSpec, brute_force_decide, random_formula, random_model
from .relmodel import (
    BiModel,
    ModelFormatError,
    dump_model,
    load_model,
    model_to_obj,
    validate,
)
from .semantics import (
    InvalidModelError,
    UnknownProgramAtomError,
    pdl_satisfies,
    satisfies,
)
from .solver import LOGICS, CertificationError, decide
from .syntax import (
    FragmentError,
    FragmentTag,
    ParseError,
    parse_formula,
    parse_pdl,
    render,
)
from .translate import TranslationError, iota, kappa, omega, tau

_USER_ERRORS = (ParseError, FragmentError, TranslationError, ModelFormatError,
                InvalidModelError, UnknownProgramAtomError, ValueError, OSError)

# Logics whose input language includes the reserved infallibility atom.
_P_BOT_OK = {"wk_star", "ws4"}


def _parse_for_logic(logic: str, text: str):
    if logic in ("k_star", "pdl"):
        return parse_pdl(text)
    return parse_formula(text, allow_p_bot=logic in _P_BOT_OK)


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def _iter_batch(path: str):
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                yield line


def _cmd_decide(args) -> int:
    if args.formula.startswith("@"):
        worst = 0
        for line in _iter_batch(args.formula[1:]):
            verdict = decide(args.logic, _parse_for_logic(args.logic, line))
            obj = verdict.to_obj()
            obj["formula"] = line
            _emit(obj)
            worst = max(worst, 0 if verdict.valid else 1)
        return worst
    verdict = decide(args.logic, _parse_for_logic(args.logic, args.formula))
    _emit(verdict.to_obj())
    return 0 if verdict.valid else 1


def _cmd_translate(args) -> int:
    if args.map == "tau":
        out = tau(parse_formula(args.formula, allow_p_bot=True))
    elif args.map == "omega":
        out = omega(parse_formula(args.formula))
    elif args.map == "kappa":
        out = kappa(parse_formula(args.formula, allow_p_bot=True))
    else:
        out = iota(parse_pdl(args.formula))
    print(render(out))
    return 0


def _load_model_file(path: str):
    with open(path, encoding="utf-8") as handle:
        return load_model(handle.read())


def _cmd_eval(args) -> int:
    model = _load_model_file(args.model)
    if isinstance(model, BiModel):
        f = parse_formula(args.formula, allow_p_bot=True)
        value = satisfies(model, args.world, f)
    else:
        f = parse_pdl(args.formula)
        value = pdl_satisfies(model, args.world, f)
    print("true" if value else "false")
    return 0 if value else 1


def _cmd_check_model(args) -> int:
    model = _load_model_file(args.model)
    if not isinstance(model, BiModel):
        raise ModelFormatError("check-model applies to birelational models")
    violations = validate(model, args.kind)
    _emit({"violations": [
        {"condition": v.condition, "worlds": list(v.worlds),
         **({"atom": v.atom} if v.atom is not None else {})}
        for v in violations]})
    return 0 if not violations else 1


def _cmd_oracle(args) -> int:
    f = _parse_for_logic(args.logic, args.formula)
    from .syntax import variables
    spec = EnumSpec(args.max_worlds, tuple(variables(f)))
    verdict = brute_force_decide(args.logic, f, spec)
    if verdict.valid_up_to_bound:
        _emit({"verdict": "valid_up_to_bound", "max_worlds": args.max_worlds})
        return 0
    _emit({"verdict": "invalid", "world": verdict.world,
           "model": model_to_obj(verdict.model)})
    return 1


def _cmd_gen_model(args) -> int:
    atoms = tuple(a for a in args.atoms.split(",") if a)
    model = random_model(args.seed, EnumSpec(args.max_worlds, atoms, args.kind))
    print(dump_model(model))
    return 0


def _cmd_gen_formula(args) -> int:
    atoms = tuple(a for a in args.atoms.split(",") if a)
    f = random_formula(args.seed, args.depth, atoms, FragmentTag(args.fragment))
    print(render(f))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ckstar",
        description="decision procedures for constructive master-modality logics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decide", help="decide validity in a logic")
    p.add_argument("--logic", required=True, choices=LOGICS)
    p.add_argument("formula", help="formula text, or @file with one formula per line")
    p.set_defaults(func=_cmd_decide)

    p = sub.add_parser("translate", help="apply a formula translation")
    p.add_argument("--map", required=True, choices=("omega", "tau", "iota", "kappa"))
    p.add_argument("formula")
    p.set_defaults(func=_cmd_translate)

    p = sub.add_parser("eval", help="evaluate a formula at a world of a model")
    p.add_argument("--model", required=True)
    p.add_argument("--world", required=True, type=int)
    p.add_argument("formula")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("check-model", help="report model-condition violations")
    p.add_argument("--kind", required=True, choices=("ck", "wk", "cs4", "ws4"))
    p.add_argument("model")
    p.set_defaults(func=_cmd_check_model)

    p = sub.add_parser("oracle", help="bounded brute-force validity")
    p.add_argument("--logic", required=True, choices=LOGICS)
    p.add_argument("--max-worlds", type=int, default=3)
    p.add_argument("formula")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("gen-model", help="seeded random model")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--kind", default="ck", choices=("ck", "wk", "cs4", "ws4"))
    p.add_argument("--max-worlds", type=int, default=4)
    p.add_argument("--atoms", default="p,q")
    p.set_defaults(func=_cmd_gen_model)

    p = sub.add_parser("gen-formula", help="seeded random formula")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--atoms", default="p,q")
    p.add_argument("--fragment", default="lstar",
                   choices=tuple(t.value for t in FragmentTag))
    p.set_defaults(func=_cmd_gen_formula)

    return parser


def main(argv: "list[str] | None" = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return 2 if err.code not in (0, None) else 0
    try:
        return args.func(args)
    except _USER_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except CertificationError as err:
        print(f"internal error: {err}", file=sys.stderr)
        raise


def console_main() -> None:
    sys.exit(main())
