"""Command-line front end: deterministic JSON reports on stdout, human
summaries on stderr.

Exit codes: 0 success or verified, 1 verified-negative (an obstruction
or a failed comparison is still a successful run), 2 parse error,
3 validation error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .acceptance import run_all
from .cohom import (
    CohomologyData,
    HypothesisViolation,
    MorphismError,
    check_relator_independence,
    cohomology_data_from_presentation,
    morphism_check,
    obstruction_screen,
    reconstruct_g3,
)
from .milnor import (
    OracleInstability,
    PresetError,
    galois_symbol_compare,
    milnor_mod_q,
    parse_preset,
    preset_presentation,
)
from .presentations import ParseError, PresentationError, parse_presentation, parse_word
from .trunc import (
    MixedExponentError,
    group_invariants,
    relator_subspace,
    truncated_quotient,
)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_PARSE = 2
EXIT_VALIDATION = 3


def _emit(args, payload: dict, summary: str) -> None:
    payload = {"tool": "gq3", "version": __version__, **payload}
    payload["seed"] = getattr(args, "seed", 0) or 0
    text = json.dumps(payload, indent=2, sort_keys=True)
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    print(summary, file=sys.stderr)


def _load_presentation(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse_presentation(fh.read())


def _subspace_dict(w) -> dict:
    return {"ambient_dim": w.ambient_dim, "basis": [list(r) for r in w.basis]}


def _minimality_dict(report) -> dict:
    return {
        "minimal": report.minimal,
        "eliminated": [[g, r] for g, r in report.eliminated],
        "kept_generators": list(report.kept),
        "dropped_trivial_relators": list(report.dropped_trivial),
        "warnings": list(report.warnings),
    }


def _relator_images(p) -> list[dict]:
    from .trunc import free_truncation

    free = free_truncation(p.n, p.q)
    out = []
    for word, source in zip(p.relators, p.relator_sources):
        y = free.evaluate_word(word)
        entry = {"relator": source, "degree1_mod_q": [e % p.q for e in y.e]}
        if free.is_central(y):
            entry["central_vector"] = list(free.central_vector(y))
        out.append(entry)
    return out


def cmd_truncate(args) -> int:
    p = _load_presentation(args.file)
    group, report = truncated_quotient(p)
    inv = group_invariants(group)
    payload = {
        "command": "truncate",
        "q": p.q,
        "generators": list(p.generators),
        "relator_images": _relator_images(p),
        "group": {
            "n": group.n,
            "order": inv.order,
            "abelianization": sorted(inv.abelianization),
            "center_order": inv.center_order,
            "exponent": inv.exponent,
            "relator_subspace": _subspace_dict(group.w),
        },
        "minimality": _minimality_dict(report),
    }
    _emit(args, payload, f"level-3 quotient of order {inv.order} on {group.n} generators")
    return EXIT_OK


def cmd_cohomology(args) -> int:
    p = _load_presentation(args.file)
    cd, report = cohomology_data_from_presentation(p)
    payload = {
        "command": "cohomology",
        "cohomology": cd.to_json_dict(),
        "minimality": _minimality_dict(report),
    }
    _emit(args, payload, f"H^1 rank {cd.n}, H^2 model rank {cd.h2_rank}")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    if args.cd_json:
        with open(args.cd_json, encoding="utf-8") as fh:
            raw = json.load(fh)
        cd = CohomologyData.from_json_dict(raw.get("cohomology", raw))
        group = reconstruct_g3(cd)
        inv = group_invariants(group)
        payload = {
            "command": "reconstruct",
            "q": cd.q,
            "source": "cohomology-tables",
            "group": {
                "n": group.n,
                "order": inv.order,
                "abelianization": sorted(inv.abelianization),
                "center_order": inv.center_order,
                "exponent": inv.exponent,
                "relator_subspace": _subspace_dict(group.w),
            },
        }
        _emit(args, payload, f"reconstructed group of order {inv.order}")
        return EXIT_OK

    if not args.file:
        raise PresentationError("reconstruct needs a presentation file or --cd-json")
    p = _load_presentation(args.file)
    w, report = relator_subspace(p)
    cd, _ = cohomology_data_from_presentation(p)
    group = reconstruct_g3(cd)
    equal = group.w == w
    inv = group_invariants(group)
    payload = {
        "command": "reconstruct",
        "q": p.q,
        "source": "presentation",
        "round_trip_equal": equal,
        "group": {
            "n": group.n,
            "order": inv.order,
            "abelianization": sorted(inv.abelianization),
            "relator_subspace": _subspace_dict(group.w),
        },
        "minimality": _minimality_dict(report),
    }
    _emit(args, payload, "round-trip: " + ("equal" if equal else "MISMATCH"))
    return EXIT_OK if equal else EXIT_NEGATIVE


def cmd_equiv(args) -> int:
    p = _load_presentation(args.file)
    report = check_relator_independence(p, certificate_class=args.class_bound)
    payload = {"command": "equiv", "q": p.q, "n": p.n,
               "class_bound": args.class_bound, **report.to_json_dict()}
    _emit(args, payload, f"relator independence: {report.verdict}")
    return EXIT_OK if report.verdict == "consistent" else EXIT_NEGATIVE


def cmd_morphism(args) -> int:
    p1 = _load_presentation(args.source)
    p2 = _load_presentation(args.target)
    images = []
    assignments = {}
    for part in args.map.split(";"):
        part = part.strip()
        if not part:
            continue
        name, _, text = part.partition("=")
        assignments[name.strip()] = text.strip()
    for gen in p1.generators:
        if gen not in assignments:
            raise PresentationError(f"no image assigned to generator {gen!r}")
        images.append(parse_word(assignments[gen], p2))
    report = morphism_check(p1, p2, images)
    payload = {
        "command": "morphism",
        "q": p1.q,
        "source_generators": list(p1.generators),
        "target_generators": list(p2.generators),
        **report.to_json_dict(),
    }
    summary = (
        f"level-3 isomorphism: {report.pi3_isomorphism}; "
        f"cohomology conditions agree: {report.agreement}"
    )
    _emit(args, payload, summary)
    return EXIT_OK if report.agreement else EXIT_NEGATIVE


def cmd_screen(args) -> int:
    p = _load_presentation(args.file)
    report = obstruction_screen(
        p,
        cd_bound=args.cd,
        torsion_free=args.torsion_free,
        certificate_class=args.class_bound,
    )
    payload = {
        "command": "screen",
        "q": p.q,
        "n": p.n,
        "class_bound": args.class_bound,
        **report.to_json_dict(),
    }
    _emit(args, payload, f"screen verdict: {report.verdict}")
    return EXIT_OK if report.verdict == "no_obstruction_found" else EXIT_NEGATIVE


def cmd_kmilnor(args) -> int:
    preset = parse_preset(args.field)
    algebra = milnor_mod_q(preset, args.q, args.rmax)
    degrees = {}
    for r in range(1, args.rmax + 1):
        degrees[str(r)] = {
            "rank": algebra.degree_rank(r),
            "divisors": list(algebra.degree_divisors(r)),
            "relations": [] if r == 1 else [list(row) for row in algebra.components[r].basis],
        }
    payload = {
        "command": "kmilnor",
        "field": preset.describe(),
        "q": args.q,
        "rmax": args.rmax,
        "basis": list(algebra.basis_names),
        "degrees": degrees,
    }
    ranks = [algebra.degree_rank(r) for r in range(1, args.rmax + 1)]
    _emit(args, payload, f"K-ring ranks by degree: {ranks}")
    return EXIT_OK


def cmd_galois_check(args) -> int:
    preset = parse_preset(args.field)
    if args.file:
        p = _load_presentation(args.file)
    else:
        p, default_corr = preset_presentation(preset, args.q)
    if args.map:
        correspondence = {}
        for part in args.map.split(","):
            name, _, target = part.strip().partition(":")
            correspondence[name.strip()] = target.strip()
    else:
        _, correspondence = preset_presentation(preset, args.q)
    report = galois_symbol_compare(preset, p, correspondence, r_max=args.rmax)
    payload = {
        "command": "galois-check",
        "field": preset.describe(),
        "q": args.q,
        "rmax": args.rmax,
        "correspondence": correspondence,
        **report.to_json_dict(),
    }
    _emit(args, payload, f"graded comparison: {report.verdict}")
    return EXIT_OK if report.verdict == "isomorphic" else EXIT_NEGATIVE


def cmd_selftest(args) -> int:
    results = run_all(args.seed or 0)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.name}: {r.detail} ({r.seconds:.2f}s)", file=sys.stderr)
    payload = {
        "command": "selftest",
        "results": [
            {"name": r.name, "passed": r.passed, "detail": r.detail,
             "seconds": round(r.seconds, 3)}
            for r in results
        ],
        "all_passed": all(r.passed for r in results),
    }
    _emit(args, payload, f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return EXIT_OK if payload["all_passed"] else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gq3",
        description="third q-central quotients, their cohomology models, "
        "and mod-q Milnor K-ring presets",
    )
    parser.add_argument("--version", action="version", version=f"gq3 {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--output", help="write the JSON report to this path")
        sp.add_argument("--seed", type=int, default=None, help="seed recorded in the report")

    sp = sub.add_parser("truncate", help="compute the level-3 quotient of a presentation")
    sp.add_argument("file")
    common(sp)
    sp.set_defaults(func=cmd_truncate)

    sp = sub.add_parser("cohomology", help="extract H^1/H^2 tables from a presentation")
    sp.add_argument("file")
    common(sp)
    sp.set_defaults(func=cmd_cohomology)

    sp = sub.add_parser("reconstruct", help="rebuild the quotient from cohomology tables")
    sp.add_argument("file", nargs="?", help="presentation file (round-trip mode)")
    sp.add_argument("--cd-json", help="JSON file of cohomology tables")
    common(sp)
    sp.set_defaults(func=cmd_reconstruct)

    sp = sub.add_parser("equiv", help="relator independence report")
    sp.add_argument("file")
    sp.add_argument("--class-bound", type=int, default=5)
    common(sp)
    sp.set_defaults(func=cmd_equiv)

    sp = sub.add_parser("morphism", help="check the isomorphism-condition equivalence")
    sp.add_argument("source")
    sp.add_argument("target")
    sp.add_argument("--map", required=True,
                    help='generator images, e.g. "x1 = y1 y2^2; x2 = y2"')
    common(sp)
    sp.set_defaults(func=cmd_morphism)

    sp = sub.add_parser("screen", help="obstruction screening (prime modulus)")
    sp.add_argument("file")
    sp.add_argument("--cd", type=int, default=None, help="user-supplied cohomological dimension")
    sp.add_argument("--torsion-free", action="store_true")
    sp.add_argument("--class-bound", type=int, default=5)
    common(sp)
    sp.set_defaults(func=cmd_screen)

    sp = sub.add_parser("kmilnor", help="mod-q Milnor K-ring of a field preset")
    sp.add_argument("--field", required=True, help="finite:ell | tame_local:ell | two_adic")
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--rmax", type=int, default=4)
    common(sp)
    sp.set_defaults(func=cmd_kmilnor)

    sp = sub.add_parser("galois-check", help="compare a K-ring preset with a presentation")
    sp.add_argument("--field", required=True)
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("file", nargs="?", help="presentation file (default: the matched one)")
    sp.add_argument("--map", help='degree-1 correspondence, e.g. "u:x1, t:x2"')
    sp.add_argument("--rmax", type=int, default=4)
    common(sp)
    sp.set_defaults(func=cmd_galois_check)

    sp = sub.add_parser("selftest", help="run the acceptance corpus")
    common(sp)
    sp.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if int(os.environ.get("GQ3_BUDGET", "0") or 0) < 0:
        print("GQ3_BUDGET must be nonnegative", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (
        PresentationError,
        MixedExponentError,
        HypothesisViolation,
        MorphismError,
        PresetError,
        OracleInstability,
        ValueError,
    ) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
