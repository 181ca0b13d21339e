"""The desk-scale verification suite behind `nilshift verify`.

Each item checks one exhaustive invariant at the configured (p, k); scans
that would blow the budget degrade to seeded sampling and flag the verdict
as probabilistic. The pytest acceptance suite pins the frozen reference
values at (p, k) = (2, 2); this module is the parametrized runtime twin.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from random import Random

from nilshift.abramov import (
    FunctionOnOrbit,
    abramov_rank,
    derivative_cube_linkage,
    full_observable_family,
    generating_characters,
    is_phase_polynomial,
)
from nilshift.cubes import (
    all_vertex_maps,
    alternating_sum,
    cube_count,
    enumerate_cubes,
    face_generated_cube_set,
    is_hk_cube,
)
from nilshift.dynamics import invariant_measures, make_family, orbit_closure, truncation_sweep
from nilshift.fibrations import covering_onto, is_filtered_surjection, lift_morphism, lift_morphism_box
from nilshift.groups import FilteredAbelianGroup, make_cf_group, make_hpk_truncation, fp_point
from nilshift.pipeline import PipelineConfig, run_pipeline
from nilshift.polymaps import (
    PolyMap,
    enumerate_morphisms,
    is_morphism_cubes,
    is_morphism_derivatives,
    morphism_count,
    morphism_tables_bruteforce,
    random_morphism,
)
from nilshift.reports import Verdict, build_report

MAP_SCAN_BUDGET = 10**5


@dataclass(frozen=True)
class SuiteConfig:
    p: int = 2
    k: int = 2
    budget: int = 10**7
    samples: int = 2000
    seed: int = 0
    group: FilteredAbelianGroup | None = None

    def fixture_group(self) -> FilteredAbelianGroup:
        return self.group if self.group is not None else make_cf_group(self.p, self.k, 1)


def _sample_morphisms(G: FilteredAbelianGroup, n: int, cfg: SuiteConfig, cap: int = 64) -> list[PolyMap]:
    if morphism_count(n, G) <= cap:
        return list(enumerate_morphisms(n, G))
    rng = Random(cfg.seed)
    return [random_morphism(n, G, rng) for _ in range(cap)]


def check_group_formula(cfg: SuiteConfig) -> Verdict:
    p, k = cfg.p, cfg.k
    ok = True
    detail = {}
    for ell in range(1, k + 1):
        G = make_cf_group(p, k, ell)
        m = (k - ell) // (p - 1) + 1
        if G.order != p**m:
            ok = False
            detail[f"order-ell-{ell}"] = G.order
        exps = G.factors[0].filt_exp
        if list(exps) != sorted(exps) or G.level_order(k + 1) != 1:
            ok = False
            detail[f"filtration-ell-{ell}"] = list(exps)
        for i in range(k + 1):
            if not all(
                G.subgroup_member(g, i) for g in G.level_elements(i + 1)
            ):  # monotonicity via generators
                ok = False
                detail[f"monotonic-ell-{ell}"] = i
    return Verdict("group-formula", ok, detail=detail)


def check_cube_oracle(cfg: SuiteConfig) -> Verdict:
    G = cfg.fixture_group()
    flags: list[str] = []
    detail = {}
    ok = True
    for n in (1, 2, 3):
        count = cube_count(n, G)
        enumerated = sum(1 for _ in enumerate_cubes(n, G, budget=cfg.budget)) if count <= cfg.budget else None
        if enumerated is not None and enumerated != count:
            ok = False
            detail[f"count-n{n}"] = (enumerated, count)
        total_maps = G.order ** (1 << n)
        if total_maps <= MAP_SCAN_BUDGET and count <= MAP_SCAN_BUDGET:
            closure = face_generated_cube_set(n, G)
            agree = all((q.values in closure) == is_hk_cube(q, G) for q in all_vertex_maps(n, G))
            members = sum(1 for q in all_vertex_maps(n, G) if is_hk_cube(q, G))
            if not agree or members != count:
                ok = False
                detail[f"oracle-n{n}"] = members
        else:
            flags.append(f"n{n}-sampled")
            rng = Random(cfg.seed)
            for _ in range(min(cfg.samples, 200)):
                idx = rng.randrange(count)
                q = next(enumerate_cubes(n, G, start=idx, stop=idx + 1))
                if not is_hk_cube(q, G):
                    ok = False
                    detail[f"sampled-n{n}"] = idx
        detail[f"cubes-n{n}"] = count
    return Verdict("cube-oracle-equivalence", ok, tuple(flags), detail)


def check_alternating_sum(cfg: SuiteConfig) -> Verdict:
    G = cfg.fixture_group()
    n = G.degree + 1
    count = cube_count(n, G)
    flags: list[str] = []
    ok = True
    if count <= cfg.budget and count <= MAP_SCAN_BUDGET:
        for q in enumerate_cubes(n, G):
            if alternating_sum(q) != G.zero:
                ok = False
                break
        checked = count
    else:
        flags.append("sampled")
        rng = Random(cfg.seed)
        checked = min(cfg.samples, 2000)
        for _ in range(checked):
            idx = rng.randrange(count)
            q = next(enumerate_cubes(n, G, start=idx, stop=idx + 1))
            if alternating_sum(q) != G.zero:
                ok = False
                break
    return Verdict("alternating-sum-law", ok, tuple(flags), {"checked": checked})


def check_morphism_equivalence(cfg: SuiteConfig) -> Verdict:
    G = cfg.fixture_group()
    n = 2
    total = G.order ** (G.p**n)
    flags: list[str] = []
    detail = {}
    ok = True
    if total <= MAP_SCAN_BUDGET:
        brute = morphism_tables_bruteforce(n, G)
        expected = morphism_count(n, G)
        detail["morphisms"] = len(brute)
        if len(brute) != expected:
            ok = False
        enumerated = {f.table for f in enumerate_morphisms(n, G)}
        if enumerated != {f.table for f in brute}:
            ok = False
            detail["parametrization"] = "mismatch"
        rng = Random(cfg.seed)
        for f in brute if len(brute) <= 256 else [brute[rng.randrange(len(brute))] for _ in range(128)]:
            if not is_morphism_cubes(f, None, cfg.budget, cfg.samples, cfg.seed).ok:
                ok = False
                detail["cube-test"] = "rejects a derivative-test morphism"
                break
    else:
        flags.append("sampled")
        rng = Random(cfg.seed)
        for _ in range(min(cfg.samples, 50)):
            f = random_morphism(n, G, rng)
            d = is_morphism_derivatives(f, cfg.budget, cfg.samples, cfg.seed)
            c = is_morphism_cubes(f, None, cfg.budget, cfg.samples, cfg.seed)
            if not d.exhaustive or not c.exhaustive:
                flags.append("probabilistic")
            if d.ok != c.ok or not d.ok:
                ok = False
                break
    return Verdict("morphism-test-equivalence", ok, tuple(flags), detail)


def check_lifting(cfg: SuiteConfig) -> Verdict:
    p, k = cfg.p, cfg.k
    X = make_cf_group(p, 1, 1)  # Z/p with the degree-1 filtration
    phi = covering_onto(X, p, k)
    cert = is_filtered_surjection(phi)
    rng = Random(cfg.seed)
    ok = True
    detail = {}
    for trial in range(100):
        n = 1 + trial % 3
        f = random_morphism(n, phi.target, rng)
        g = lift_morphism(cert, f)
        if phi.apply_poly(g).table != f.table:
            ok = False
            detail["projection"] = trial
            break
        if not is_morphism_derivatives(g, cfg.budget, cfg.samples, cfg.seed).ok:
            ok = False
            detail["morphism"] = trial
            break
        if n <= 2 and lift_morphism_box(cert, f).table != g.table:
            ok = False
            detail["box-oracle"] = trial
            break
    return Verdict("lifting-soundness", ok, (), detail)


def check_phase_annihilation(cfg: SuiteConfig) -> Verdict:
    G = cfg.fixture_group()
    k = G.degree
    rng = Random(cfg.seed)
    ok = True
    detail = {}
    flags: list[str] = []
    for n in (1, 2):
        for f in _sample_morphisms(G, n, cfg, cap=16):
            orbit = orbit_closure(f)
            for obs in full_observable_family(orbit):
                F = FunctionOnOrbit.from_observable(orbit, obs)
                verdict = is_phase_polynomial(F, k)
                if not verdict.ok:
                    ok = False
                    detail["annihilation"] = obs.z
                    break
            # proof linkage on sampled derivative tuples
            chis = generating_characters(G)
            npts = G.p**n
            for _ in range(20):
                z = fp_point(rng.randrange(npts), G.p, n)
                zs = tuple(fp_point(rng.randrange(npts), G.p, n) for _ in range(k + 1))
                lhs, rhs = derivative_cube_linkage(f, orbit, z, chis[rng.randrange(len(chis))], zs)
                if lhs != rhs:
                    ok = False
                    detail["linkage"] = (z, zs)
                    break
    return Verdict("phase-polynomial-annihilation", ok, tuple(flags), detail)


def check_abramov_rank(cfg: SuiteConfig) -> Verdict:
    widths = [1] * cfg.k
    G = make_hpk_truncation(cfg.p, cfg.k, widths)
    ok = True
    detail = {}
    flags: list[str] = []
    total = morphism_count(2, G)
    if total > 4096:
        flags.append("sampled")
    seen: set = set()
    for f in _sample_morphisms(G, 2, cfg, cap=4096 if total <= 4096 else 48):
        orbit = orbit_closure(f)
        key = frozenset(pt.table for pt in orbit.points)
        if key in seen:
            continue
        seen.add(key)
        rank = abramov_rank(orbit, full_observable_family(orbit))
        if rank != orbit.size:
            ok = False
            detail["rank"] = (rank, orbit.size)
            break
    detail["orbits-checked"] = len(seen)
    return Verdict("abramov-rank-certificate", ok, tuple(flags), detail)


def check_rp_identity(cfg: SuiteConfig) -> Verdict:
    from nilshift.dynamics import rp_identity_check

    G = cfg.fixture_group()
    k = G.degree
    rng = Random(cfg.seed)
    ok = True
    flags: list[str] = []
    checked = 0
    for n in (1, 2):
        npts = G.p**n
        tuple_count = npts ** (k + 2)
        morphisms = _sample_morphisms(G, n, cfg, cap=16)
        if tuple_count * len(morphisms) <= cfg.budget:
            for f in morphisms:
                for gi in range(npts ** (k + 1)):
                    gs = tuple(fp_point(gi // npts**j % npts, G.p, n) for j in range(k + 1))
                    for xi in range(npts):
                        checked += 1
                        if not rp_identity_check(f, gs, fp_point(xi, G.p, n)).ok:
                            return Verdict("rp-identity", False, (), {"witness": (gs, xi)})
        else:
            flags.append("sampled")
            for _ in range(min(cfg.samples, 10**4)):
                f = morphisms[rng.randrange(len(morphisms))]
                gs = tuple(fp_point(rng.randrange(npts), G.p, n) for _ in range(k + 1))
                x = fp_point(rng.randrange(npts), G.p, n)
                checked += 1
                if not rp_identity_check(f, gs, x).ok:
                    return Verdict("rp-identity", False, tuple(flags), {"witness": (gs, x)})
    return Verdict("rp-identity", ok, tuple(flags), {"checked": checked})


def check_pipeline(cfg: SuiteConfig) -> Verdict:
    X = make_cf_group(cfg.p, 1, 1)
    base = PolyMap(X, 1, tuple((z,) for z in range(cfg.p)))
    report = run_pipeline(PipelineConfig(p=cfg.p, k=cfg.k, base=base, seed=cfg.seed))
    return Verdict("pipeline-main", report["all_pass"], (), {"stages": [v["name"] for v in report["verdicts"]]})


def check_unique_ergodicity_shadow(cfg: SuiteConfig) -> Verdict:
    from nilshift.dynamics import FiniteSystem

    G = cfg.fixture_group()
    ok = True
    detail = {}
    for f in _sample_morphisms(G, 2, cfg, cap=8):
        orbit = orbit_closure(f)
        system = FiniteSystem.from_orbit(orbit)
        measures = invariant_measures(system)
        if len(measures) != 1 or measures[0].weights != tuple([measures[0].weights[0]] * orbit.size):
            ok = False
            detail["measures"] = len(measures)
    chi = generating_characters(G)[0]
    n_max = 8 if cfg.p == 2 else 4
    for name, expected in (("constant", 1), ("coordinate", cfg.p)):
        family = make_family(name, G, n_max, cfg.seed)
        report = truncation_sweep(
            family,
            n_max,
            lambda f: chi.index_of(f.value((0,) * f.n)),
            chi.M,
            G,
            family_name=name,
        )
        sizes = [row.orbit_size for row in report.rows]
        if sizes != [expected] * n_max:
            ok = False
            detail[f"sweep-{name}"] = sizes
    return Verdict("unique-ergodicity-shadow", ok, (), detail)


SUITE = (
    check_group_formula,
    check_cube_oracle,
    check_alternating_sum,
    check_morphism_equivalence,
    check_lifting,
    check_phase_annihilation,
    check_abramov_rank,
    check_rp_identity,
    check_pipeline,
    check_unique_ergodicity_shadow,
)


def run_suite(cfg: SuiteConfig) -> dict:
    t0 = time.perf_counter()
    verdicts = []
    for item in SUITE:
        verdicts.append(item(cfg))
    return build_report(
        "verify",
        {
            "p": cfg.p,
            "k": cfg.k,
            "budget": cfg.budget,
            "samples": cfg.samples,
            "seed": cfg.seed,
            "group": cfg.fixture_group().to_dict(),
        },
        {},
        verdicts,
        time.perf_counter() - t0,
    )
