"""polyra command line: bounds, simulate, sweep, worstcase, verify."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import lp, sweep, verify
from .adversary import (
    BudgetExceeded,
    example1_variants,
    exhaustive_adversary,
    flex_benchmark_family,
    staircase_family,
    three_type_inputs,
)
from .core import (
    InstanceError,
    ProblemInstance,
    SequenceError,
    ball_queyranne_L,
    big_G,
    load_instance,
    load_json,
    load_sequence,
)
from .engine import run_simulation
from .polytope import (
    NestSizes,
    Polytope,
    PolytopeError,
    build_B1,
    build_B2,
    build_Bf,
    build_Bi,
    near_optimal_nests,
    nested_polytope,
    trivial_polytope,
)
from .simplex import LpError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

INPUT_ERRORS = (
    OSError,
    json.JSONDecodeError,
    InstanceError,
    SequenceError,
    PolytopeError,
    LpError,
    sweep.SweepError,
    BudgetExceeded,
    KeyError,
    TypeError,
    ValueError,
)


class UsageError(ValueError):
    pass


def _num(x: float) -> float | None:
    return float(x) if x is not None and math.isfinite(x) else None


def _emit(payload, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=False) + "\n"
    if out:
        sweep.write_atomic(out, text)
    else:
        sys.stdout.write(text)


def parse_polytope(spec: str, inst: ProblemInstance) -> Polytope:
    """Polytope mini-language: bf, bi, b1, b2, nested:<n1,..,nK>, nbar, trivial, file:<path>."""
    name, _, arg = spec.partition(":")
    name = name.strip().lower()
    if name == "bf":
        return build_Bf(inst)
    if name == "bi":
        return build_Bi(inst)
    if name == "b1":
        return build_B1(inst, lp.solve_upper3(inst))
    if name == "b2":
        if inst.K != 3 or inst.M != 2:
            raise PolytopeError("b2 needs K=3, M=2")
        return nested_polytope(inst, build_B2(inst, lp.solve_upper3(inst)), label="B2")
    if name == "nested":
        try:
            n = tuple(float(v) for v in arg.split(","))
        except ValueError as exc:
            raise UsageError(f"bad nest list {arg!r}") from exc
        nests = NestSizes(n)
        nests.check(inst)
        return nested_polytope(inst, nests)
    if name == "nbar":
        return nested_polytope(inst, near_optimal_nests(inst), label="nbar")
    if name == "trivial":
        return trivial_polytope(inst)
    if name == "file":
        return Polytope.from_dict(load_json(arg))
    raise UsageError(f"unknown polytope spec {spec!r}")


def compute_bounds(inst: ProblemInstance) -> dict:
    flex = inst.M >= 1
    out: dict = {"L": ball_queyranne_L(inst), "G": big_G(inst)}
    lps: dict = {}
    if flex:
        out["gamma_lp"] = lp.gamma_lp_closed_form(inst)
        su = lp.solve_lp(lp.simple_upper_program(inst))
        out["gamma_lp_solved"] = su.objective
        out["gamma_up"] = lp.gamma_up(inst)
        out["gamma_bar"] = sweep.gamma_bar_closed_form(inst)
        lps["simple_upper"] = lp.solution_json(su)
    else:
        out.update(gamma_lp=None, gamma_lp_solved=None, gamma_up=None, gamma_bar=None)
    if inst.K == 3 and flex:
        u3 = lp.solve_upper3(inst)
        out["gamma_star"] = u3.gamma_star
        lps["upper3"] = lp.solution_json(u3.lp)
    else:
        out["gamma_star"] = None
    star = lp.solve_gamma_nest_star_lp(inst)
    out["gamma_nest_star"] = star.value("gamma")
    lps["nest_star"] = lp.solution_json(star)
    out["gamma_nest_nbar"] = lp.solve_nest_cr(inst, near_optimal_nests(inst)) if flex else None
    out = {k: _num(v) for k, v in out.items()}
    out["lp"] = lps
    return out


def cmd_bounds(args) -> int:
    _emit(compute_bounds(load_instance(args.instance)), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    inst = load_instance(args.instance)
    p = parse_polytope(args.polytope, inst)
    seq = load_sequence(args.sequence)
    seq.check(inst)
    report = run_simulation(inst, p, seq).to_dict()
    report["polytope"] = p.to_dict()
    _emit(report, args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = sweep.spec_from_dict(load_json(args.spec))
    out = Path(args.out)
    if not out.parent.is_dir():
        raise OSError(f"output directory {out.parent} does not exist")
    sweep.write_atomic(out, sweep.to_csv(spec))
    return EXIT_OK


FAMILIES = ("staircase", "three-type", "example1", "flex-benchmark", "exhaustive")


def cmd_worstcase(args) -> int:
    inst = load_instance(args.instance)
    fam = args.family
    if fam == "staircase":
        payload = staircase_family(inst).to_dict()
    elif fam == "three-type":
        payload = three_type_inputs(inst).to_dict()
    elif fam == "example1":
        payload = [f.to_dict() for f in example1_variants(inst)]
    elif fam == "flex-benchmark":
        payload = flex_benchmark_family(inst).to_dict()
    else:
        if not args.polytope:
            raise UsageError("exhaustive search needs --polytope")
        p = parse_polytope(args.polytope, inst)
        res = exhaustive_adversary(inst, p, q=args.granularity, T=args.periods, B=args.events)
        payload = {
            "label": "exhaustive",
            "min_cr": res.min_cr,
            "sequences": res.sequences,
            "witness": res.witness.to_dict(),
        }
    _emit(payload, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    t_results = verify.run_suite(args.level, tamper=args.tamper, seed=args.seed, echo=print)
    failed = [r.key for r in t_results if not r.passed]
    total = sum(r.seconds for r in t_results)
    print(f"{len(t_results) - len(failed)}/{len(t_results)} checks passed in {total:.1f}s")
    if failed:
        print("failed: " + ", ".join(failed))
    return EXIT_FAIL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polyra", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="competitive-ratio bounds for an instance")
    b.add_argument("--instance", required=True)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bounds)

    s = sub.add_parser("simulate", help="run POLYRA on an arrival sequence")
    s.add_argument("--instance", required=True)
    s.add_argument("--polytope", required=True, help="bf|bi|b1|b2|nested:n1,..,nK|nbar|trivial|file:path")
    s.add_argument("--sequence", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="write a sweep as CSV")
    w.add_argument("spec", nargs="?", help="sweep spec JSON")
    w.add_argument("--spec", dest="spec_flag")
    w.add_argument("--out", required=True)
    w.set_defaults(func=cmd_sweep)

    c = sub.add_parser("worstcase", help="emit an adversarial sequence family as JSON")
    c.add_argument("--instance", required=True)
    c.add_argument("--family", choices=FAMILIES, default="staircase")
    c.add_argument("--polytope")
    c.add_argument("--granularity", type=int, default=4)
    c.add_argument("--periods", type=int, default=2)
    c.add_argument("--events", type=int, default=None, help="total event budget (default 2K)")
    c.add_argument("--out")
    c.set_defaults(func=cmd_worstcase)

    v = sub.add_parser("verify", help="run the acceptance suite")
    v.add_argument("--level", choices=("fast", "full"), default="fast")
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--tamper", action="store_true", help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "sweep":
        args.spec = args.spec_flag or args.spec
        if not args.spec:
            print("polyra sweep: a spec file is required", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, *INPUT_ERRORS) as exc:
        print(f"polyra {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
