"""Command-line surface: nilshift space|cube|poly|fib|orbit|abramov|pipeline|verify|sweep.

Every command emits a JSON report (CSV for sweep tables) and exits 0 iff
all verdicts pass. Groups are given as inline JSON, "cf:p,k,l" or
"hpk:p,k,c1,..,ck"; vectors inside --obs are dash-separated.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from random import Random

from nilshift import kernels
from nilshift.abramov import (
    Character,
    FunctionOnOrbit,
    PhasePolyObservable,
    abramov_rank,
    full_observable_family,
    is_phase_polynomial,
)
from nilshift.cubes import (
    CompletionError,
    CornerMap,
    CubeMap,
    alternating_sum,
    complete_corner,
    cube_count,
    enumerate_cubes,
    is_hk_cube,
)
from nilshift.dynamics import is_minimal, make_family, orbit_closure, truncation_sweep
from nilshift.fibrations import (
    FilteredHom,
    NotFibrationError,
    UnsupportedTargetError,
    covering_onto,
    is_filtered_surjection,
    lift_morphism,
    verify_fibration_cubewise,
)
from nilshift.groups import ParameterError, parse_group_arg
from nilshift.pipeline import PipelineConfig, run_pipeline
from nilshift.polymaps import (
    PolyMap,
    is_morphism_cubes,
    is_morphism_derivatives,
    morphism_count,
    random_morphism,
    taylor_expand,
)
from nilshift.reports import Verdict, build_report, report_to_json
from nilshift.verify import SuiteConfig, run_suite


def _load_json_arg(text: str) -> dict:
    if text.startswith("@"):
        return json.loads(Path(text[1:]).read_text())
    return json.loads(text)


def _parse_vector(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split("-")) if text else ()


def _parse_obs(text: str, group) -> PhasePolyObservable:
    parts = dict(item.split("=", 1) for item in text.split(","))
    z = _parse_vector(parts["z"])
    chi = Character(group, _parse_vector(parts["chi"]))
    return PhasePolyObservable(z, chi)


def _emit(report: dict, out: str | None) -> int:
    text = report_to_json(report)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)
    return 0 if report.get("all_pass", True) else 1


SUBPARSERS: dict[str, argparse.ArgumentParser] = {}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=10**7)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--config", type=str, default=None, help="JSON file with defaults for the flags")


def cmd_space(args) -> int:
    t0 = time.perf_counter()
    G = parse_group_arg(args.group)
    results = {
        "group": G.to_dict(),
        "order": G.order,
        "level_orders": [G.level_order(i) for i in range(G.degree + 2)],
        "kernel_backend": kernels.BACKEND,
    }
    report = build_report("space", {"group": args.group}, results, [Verdict("construct", True)], time.perf_counter() - t0)
    return _emit(report, args.out)


def cmd_cube(args) -> int:
    t0 = time.perf_counter()
    G = parse_group_arg(args.group)
    verdicts = []
    results: dict = {}
    if args.action == "check":
        q = CubeMap.from_dict(_load_json_arg(args.cube), G)
        member = is_hk_cube(q, G)
        results["is_cube"] = member
        results["alternating_sum"] = list(alternating_sum(q))
        verdicts.append(Verdict("membership", member))
    elif args.action == "enumerate":
        total = cube_count(args.dim, G)
        results["count"] = total
        limit = args.limit if args.limit is not None else total
        results["cubes"] = [q.to_dict() for q in enumerate_cubes(args.dim, G, budget=args.budget, stop=limit)]
        verdicts.append(Verdict("enumerate", True, detail={"emitted": len(results["cubes"])}))
    elif args.action == "complete":
        corner_data = _load_json_arg(args.corner)
        corner = CornerMap(G, int(corner_data["n"]), tuple(tuple(int(x) for x in v) for v in corner_data["values"]))
        try:
            q = complete_corner(corner, G)
            results["cube"] = q.to_dict()
            results["unique"] = G.level_order(min(corner.n, G.degree + 1)) == 1
            verdicts.append(Verdict("complete", True))
        except CompletionError as exc:
            verdicts.append(Verdict("complete", False, detail={"offending_subset": exc.subset, "level": exc.level}))
    report = build_report("cube", {"group": args.group, "action": args.action}, results, verdicts, time.perf_counter() - t0)
    return _emit(report, args.out)


def cmd_poly(args) -> int:
    t0 = time.perf_counter()
    G = parse_group_arg(args.group)
    verdicts = []
    results: dict = {}
    if args.action == "check":
        f = PolyMap.from_dict(_load_json_arg(args.poly))
        d = is_morphism_derivatives(f, args.budget, args.samples, args.seed)
        c = is_morphism_cubes(f, args.max_dim, args.budget, args.samples, args.seed)
        flags = () if d.exhaustive and c.exhaustive else ("probabilistic",)
        results["derivative_test"] = d.ok
        results["cube_test"] = c.ok
        verdicts.append(Verdict("morphism", d.ok and c.ok, flags))
    elif args.action == "random":
        f = random_morphism(args.rank, G, args.seed)
        results["poly"] = f.to_dict()
        verdicts.append(Verdict("random", True))
    elif args.action == "taylor":
        f = PolyMap.from_dict(_load_json_arg(args.poly))
        form = taylor_expand(f)
        results["coefficients"] = [{"alpha": list(a), "value": list(v)} for a, v in form.coeffs]
        verdicts.append(Verdict("taylor", True))
    elif args.action == "count":
        results["count"] = morphism_count(args.rank, G)
        if args.exhaustive:
            from nilshift.polymaps import morphism_tables_bruteforce

            brute = len(morphism_tables_bruteforce(args.rank, G, budget=args.budget))
            results["bruteforce_count"] = brute
            verdicts.append(Verdict("count", brute == results["count"]))
        else:
            verdicts.append(Verdict("count", True))
    report = build_report("poly", {"group": args.group, "action": args.action, "seed": args.seed}, results, verdicts, time.perf_counter() - t0)
    return _emit(report, args.out)


def cmd_fib(args) -> int:
    t0 = time.perf_counter()
    verdicts = []
    results: dict = {}
    if args.action == "verify":
        phi = FilteredHom.from_dict(_load_json_arg(args.hom))
        try:
            is_filtered_surjection(phi)
            results["certified"] = True
            verdicts.append(Verdict("filtered-surjection", True))
        except NotFibrationError as exc:
            results["certified"] = False
            verdicts.append(Verdict("filtered-surjection", False, detail={"level": exc.level}))
        if args.cubewise:
            cw = verify_fibration_cubewise(phi, args.n_max, args.budget, args.samples, args.seed)
            flags = () if cw.exhaustive else ("probabilistic",)
            verdicts.append(Verdict("cubewise", cw.ok, flags, {"checked": cw.checked}))
    elif args.action == "cover":
        X = parse_group_arg(args.group)
        try:
            phi = covering_onto(X, args.p, args.k)
            results["hom"] = phi.to_dict()
            verdicts.append(Verdict("cover", True))
        except UnsupportedTargetError as exc:
            verdicts.append(Verdict("cover", False, detail={"reason": str(exc)}))
    elif args.action == "lift":
        f = PolyMap.from_dict(_load_json_arg(args.poly))
        if args.hom:
            phi = FilteredHom.from_dict(_load_json_arg(args.hom))
        else:
            phi = covering_onto(f.group, args.p, args.k)
            f = f.with_group(phi.target)
        cert = is_filtered_surjection(phi)
        g = lift_morphism(cert, f)
        results["lift"] = g.to_dict()
        ok = phi.apply_poly(g).table == f.table and bool(is_morphism_derivatives(g, args.budget, args.samples, args.seed))
        verdicts.append(Verdict("lift", ok))
    report = build_report("fib", {"action": args.action}, results, verdicts, time.perf_counter() - t0)
    return _emit(report, args.out)


def _poly_from_args(args, G) -> PolyMap:
    if args.poly:
        return PolyMap.from_dict(_load_json_arg(args.poly))
    return random_morphism(args.rank, G, args.seed)


def cmd_orbit(args) -> int:
    t0 = time.perf_counter()
    G = parse_group_arg(args.group)
    f = _poly_from_args(args, G)
    orbit = orbit_closure(f)
    results = {"orbit": orbit.to_dict(include_points=args.points)}
    verdicts = [Verdict("closure", True, detail={"size": orbit.size})]
    if args.action == "minimal":
        verdicts.append(Verdict("minimal", is_minimal(orbit)))
    report = build_report("orbit", {"group": args.group, "action": args.action, "seed": args.seed}, results, verdicts, time.perf_counter() - t0)
    return _emit(report, args.out)


def cmd_abramov(args) -> int:
    t0 = time.perf_counter()
    G = parse_group_arg(args.group)
    f = _poly_from_args(args, G)
    orbit = orbit_closure(f)
    observables = [_parse_obs(o, G) for o in args.obs] if args.obs else full_observable_family(orbit)
    rank = abramov_rank(orbit, observables)
    derivative_checks = []
    for obs in observables[: args.max_obs_checks]:
        F = FunctionOnOrbit.from_observable(orbit, obs)
        verdict = is_phase_polynomial(F, G.degree)
        derivative_checks.append({"z": list(obs.z), "chi": list(obs.chi.exps), "annihilates": verdict.ok})
    results = {
        "orbit_size": orbit.size,
        "rank": rank,
        "is_abramov": rank == orbit.size,
        "derivative_checks": derivative_checks,
    }
    ok = results["is_abramov"] and all(c["annihilates"] for c in derivative_checks)
    report = build_report(
        "abramov", {"group": args.group, "seed": args.seed}, results, [Verdict("abramov", ok)], time.perf_counter() - t0
    )
    return _emit(report, args.out)


def cmd_pipeline(args) -> int:
    G = parse_group_arg(args.group)
    base = _poly_from_args(args, G)
    config = PipelineConfig(p=G.p, k=args.k, base=base, budget=args.budget, samples=args.samples, seed=args.seed)
    report = run_pipeline(config)
    return _emit(report, args.out)


def cmd_verify(args) -> int:
    try:
        group = parse_group_arg(args.group) if args.group else None
        cfg = SuiteConfig(p=args.p, k=args.k, budget=args.budget, samples=args.samples, seed=args.seed, group=group)
        report = run_suite(cfg)
    except (ParameterError, ValueError) as exc:
        report = build_report(
            "verify",
            {"p": args.p, "k": args.k},
            {},
            [Verdict("construction", False, detail={"error": str(exc)})],
            0.0,
        )
    for v in report["verdicts"]:
        flag = " [" + ",".join(v["flags"]) + "]" if v["flags"] else ""
        print(f"{'PASS' if v['ok'] else 'FAIL'} {v['name']}{flag}", file=sys.stderr)
    return _emit(report, args.out)


def cmd_sweep(args) -> int:
    t0 = time.perf_counter()
    G = parse_group_arg(args.group)
    family = make_family(args.family, G, args.n_max, args.seed)
    if args.obs:
        obs = _parse_obs(args.obs, G)
    else:
        from nilshift.abramov import generating_characters

        chi = generating_characters(G)[0]
        obs = PhasePolyObservable((), chi)
    chi = obs.chi

    def observable_index(f: PolyMap) -> int:
        z = obs.z if len(obs.z) == f.n else (obs.z + (0,) * f.n)[: f.n]
        return chi.index_of(f.value(z))

    report_obj = truncation_sweep(family, args.n_max, observable_index, chi.M, G, family_name=args.family)
    csv_text = "\n".join(report_obj.csv_lines()) + "\n"
    if args.csv:
        Path(args.csv).write_text(csv_text)
    else:
        print(csv_text, end="")
    results = {
        "family": args.family,
        "rows": [
            {"n": r.n, "orbit_size": r.orbit_size, "folner_averages": [a.to_jsonable() for a in r.folner_averages]}
            for r in report_obj.rows
        ],
    }
    report = build_report(
        "sweep",
        {"group": args.group, "family": args.family, "n_max": args.n_max, "seed": args.seed},
        results,
        [Verdict("sweep", True)],
        time.perf_counter() - t0,
    )
    return _emit(report, args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nilshift", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    SUBPARSERS.clear()
    make = sub.add_parser

    def add_parser(name: str, **kw) -> argparse.ArgumentParser:
        SUBPARSERS[name] = make(name, **kw)
        return SUBPARSERS[name]

    p_space = add_parser("space", help="describe a filtered group")
    p_space.add_argument("--group", required=True)
    _add_common(p_space)
    p_space.set_defaults(func=cmd_space)

    p_cube = add_parser("cube", help="cube membership, enumeration, completion")
    p_cube.add_argument("action", choices=["check", "enumerate", "complete"])
    p_cube.add_argument("--group", required=True)
    p_cube.add_argument("--dim", type=int, default=2)
    p_cube.add_argument("--cube", type=str, default=None, help="cube JSON or @file")
    p_cube.add_argument("--corner", type=str, default=None, help="corner JSON or @file")
    p_cube.add_argument("--limit", type=int, default=None)
    _add_common(p_cube)
    p_cube.set_defaults(func=cmd_cube)

    p_poly = add_parser("poly", help="morphism tests, sampling, Taylor form, counting")
    p_poly.add_argument("action", choices=["check", "random", "taylor", "count"])
    p_poly.add_argument("--group", required=True)
    p_poly.add_argument("--rank", type=int, default=1)
    p_poly.add_argument("--poly", type=str, default=None, help="polymap JSON or @file")
    p_poly.add_argument("--max-dim", type=int, default=None)
    p_poly.add_argument("--exhaustive", action="store_true")
    _add_common(p_poly)
    p_poly.set_defaults(func=cmd_poly)

    p_fib = add_parser("fib", help="fibration certificates, coverings, lifting")
    p_fib.add_argument("action", choices=["verify", "cover", "lift"])
    p_fib.add_argument("--hom", type=str, default=None, help="filtered hom JSON or @file")
    p_fib.add_argument("--group", type=str, default=None, help="covering target group")
    p_fib.add_argument("--poly", type=str, default=None)
    p_fib.add_argument("--p", type=int, default=2)
    p_fib.add_argument("--k", type=int, default=2)
    p_fib.add_argument("--cubewise", action="store_true")
    p_fib.add_argument("--n-max", type=int, default=2)
    _add_common(p_fib)
    p_fib.set_defaults(func=cmd_fib)

    p_orbit = add_parser("orbit", help="orbit closures and minimality")
    p_orbit.add_argument("action", choices=["run", "minimal"])
    p_orbit.add_argument("--group", required=True)
    p_orbit.add_argument("--rank", type=int, default=1)
    p_orbit.add_argument("--poly", type=str, default=None)
    p_orbit.add_argument("--points", action="store_true", help="include point tables in the report")
    _add_common(p_orbit)
    p_orbit.set_defaults(func=cmd_orbit)

    p_abr = add_parser("abramov", help="phase-polynomial rank certificate on an orbit")
    p_abr.add_argument("--group", required=True)
    p_abr.add_argument("--rank", type=int, default=1)
    p_abr.add_argument("--poly", type=str, default=None)
    p_abr.add_argument("--obs", action="append", default=None, help="z=<a-b-..>,chi=<e1-e2-..>")
    p_abr.add_argument("--max-obs-checks", type=int, default=16)
    _add_common(p_abr)
    p_abr.set_defaults(func=cmd_abramov)

    p_pipe = add_parser("pipeline", help="end-to-end extension pipeline on a fixture")
    p_pipe.add_argument("--group", required=True, help="target group of the input morphism")
    p_pipe.add_argument("--rank", type=int, default=1)
    p_pipe.add_argument("--poly", type=str, default=None)
    p_pipe.add_argument("--k", type=int, default=2, help="degree of the covering truncation")
    _add_common(p_pipe)
    p_pipe.set_defaults(func=cmd_pipeline)

    p_verify = add_parser("verify", help="run the desk-scale verification suite")
    p_verify.add_argument("--p", type=int, default=2)
    p_verify.add_argument("--k", type=int, default=2)
    p_verify.add_argument("--group", type=str, default=None, help="override the fixture group")
    _add_common(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_sweep = add_parser("sweep", help="truncation sweep over a morphism family")
    p_sweep.add_argument("--group", required=True)
    p_sweep.add_argument("--family", default="coordinate", help="constant|coordinate|coordinate-sum|random")
    p_sweep.add_argument("--n-max", type=int, default=6)
    p_sweep.add_argument("--obs", type=str, default=None)
    p_sweep.add_argument("--csv", type=str, default=None, help="write the CSV table here")
    _add_common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        # config supplies defaults; explicit flags on the command line win
        overrides = {k.replace("-", "_"): v for k, v in json.loads(Path(args.config).read_text()).items()}
        SUBPARSERS[args.command].set_defaults(**overrides)
        args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, ValueError, KeyError) as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
