"""The end-to-end extension pipeline on a finite transitive fixture.

Stages: evaluation embedding of the input system, orbit closure, covering
construction, morphism lift, lifted orbit, pushforward comparison, factor
verification, Abramov rank certificate. Any stage failure aborts the run
with the stage name and a witness.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from nilshift.abramov import abramov_rank, full_observable_family
from nilshift.dynamics import (
    EmpiricalMeasure,
    FactorMapData,
    FiniteSystem,
    evaluation_embedding,
    compose_pushforward,
    is_minimal,
    orbit_closure,
    verify_factor,
)
from nilshift.fibrations import covering_onto, is_filtered_surjection, lift_morphism
from nilshift.groups import ParameterError, fp_point
from nilshift.polymaps import PolyMap, is_morphism_cubes, is_morphism_derivatives
from nilshift.reports import Verdict, build_report


class StageFailure(RuntimeError):
    def __init__(self, stage: str, witness):
        self.stage = stage
        self.witness = witness
        super().__init__(f"pipeline stage {stage!r} failed: {witness}")


@dataclass(frozen=True)
class PipelineConfig:
    p: int
    k: int
    base: PolyMap
    budget: int = 10**7
    samples: int = 2000
    seed: int = 0


def run_pipeline(config: PipelineConfig) -> dict:
    t0 = time.perf_counter()
    verdicts: list[Verdict] = []
    results: dict = {}

    def stage(name: str, ok: bool, witness=None, **detail):
        verdicts.append(Verdict(name, ok, detail=dict(detail)))
        if not ok:
            raise StageFailure(name, witness)

    base = config.base
    try:
        dverdict = is_morphism_derivatives(base, config.budget, config.samples, config.seed)
        cverdict = is_morphism_cubes(base, None, config.budget, config.samples, config.seed)
        stage(
            "input-morphism",
            dverdict.ok and cverdict.ok,
            witness=dverdict.witness or cverdict.witness,
            exhaustive=dverdict.exhaustive and cverdict.exhaustive,
        )

        system = FiniteSystem.from_orbit(orbit_closure(base))
        results["system_size"] = system.size

        emb = evaluation_embedding(system, 0)
        # homeomorphism shadow: distinct points must give distinct labeled maps
        npts = base.p**system.n
        labeled_tables = {
            tuple(system.labels[system.act(fp_point(i, base.p, system.n), x)] for i in range(npts))
            for x in range(system.size)
        }
        injective = len(labeled_tables) == system.size
        stage(
            "evaluation-embedding",
            emb.labeled is not None and emb.equivariance_ok and injective,
            witness="labels missing" if emb.labeled is None else "not injective",
        )
        f = emb.labeled

        target_k = f.group.regrade(config.k)
        f = f.with_group(target_k)
        base_orbit = orbit_closure(f)
        stage("orbit-closure", base_orbit.size == system.size, witness=base_orbit.size, size=base_orbit.size)

        phi = covering_onto(target_k, config.p, config.k)
        cert = is_filtered_surjection(phi)
        stage("covering", True, source=phi.source.to_dict())

        g = lift_morphism(cert, f)
        g_ok_d = is_morphism_derivatives(g, config.budget, config.samples, config.seed)
        g_ok_c = is_morphism_cubes(g, None, config.budget, config.samples, config.seed)
        proj_ok = phi.apply_poly(g).table == f.table
        stage("lift", bool(g_ok_d) and bool(g_ok_c) and proj_ok, witness=g_ok_d.witness or g_ok_c.witness)

        lifted = orbit_closure(g)
        results["lifted_size"] = lifted.size
        stage("lifted-orbit-minimal", is_minimal(lifted), size=lifted.size)

        pushed = compose_pushforward(phi, lifted)
        stage(
            "pushforward",
            set(pushed.points) == set(base_orbit.points),
            witness=pushed.size,
            image_size=pushed.size,
        )

        lifted_sys = FiniteSystem.from_orbit(lifted)
        base_sys = FiniteSystem.from_orbit(base_orbit)
        point_map = tuple(base_orbit.point_index(phi.apply_poly(pt)) for pt in lifted.points)
        theta = FactorMapData(lifted_sys, base_sys, point_map)
        freport = verify_factor(theta, EmpiricalMeasure.uniform(lifted.size))
        stage(
            "factor",
            freport.all_ok(),
            witness=freport.equivariance_witness or freport.missing_point,
            pushforward=[str(w) for w in freport.pushforward.weights],
        )

        rank = abramov_rank(lifted, full_observable_family(lifted))
        results["abramov_rank"] = rank
        stage("abramov-rank", rank == lifted.size, witness=rank, rank=rank, orbit_size=lifted.size)
    except StageFailure:
        pass
    except (ParameterError, ValueError) as exc:
        verdicts.append(Verdict("error", False, detail={"message": str(exc)}))

    return build_report(
        "pipeline",
        {
            "p": config.p,
            "k": config.k,
            "seed": config.seed,
            "budget": config.budget,
            "base": config.base.to_dict(),
        },
        results,
        verdicts,
        time.perf_counter() - t0,
    )
