"""Phase-polynomial observables on orbits and exact Abramov certification.

Observables h_{z,chi}(f) = chi(f(z)) take values in the p^M-th roots of
unity and are stored as root indices; multiplicative derivatives are index
subtractions, so the annihilation law and the rank certificate are checked
in exact integer arithmetic end to end.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from random import Random

from nilshift.cubes import CubeMap, alternating_sum
from nilshift.cyclotomic import CycValue, root_matrix_rank
from nilshift.dynamics import Orbit
from nilshift.groups import (
    FilteredAbelianGroup,
    FpPoint,
    GroupMismatchError,
    ParameterError,
    Residues,
    fp_point,
    fp_points,
    fp_unit,
)
from nilshift.polymaps import MorphismVerdict, PolyMap


def root_order_exp(G: FilteredAbelianGroup) -> int:
    """M with p^M = the exponent of the group (0 for the trivial group)."""
    return max((f.m for f in G.factors), default=0)


@dataclass(frozen=True)
class Character:
    """chi(g) = e(sum_j exps_j g_j / p^{m_j}), stored as an index mod p^M."""

    group: FilteredAbelianGroup
    exps: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.exps) != self.group.num_factors:
            raise GroupMismatchError("need one exponent per factor")

    @property
    def M(self) -> int:
        return root_order_exp(self.group)

    @property
    def order(self) -> int:
        return self.group.p**self.M

    def index_of(self, g: Residues) -> int:
        N = self.order
        t = 0
        for e, x, f in zip(self.exps, g, self.group.factors):
            t += e * x * (N // f.modulus)
        return t % N

    def is_trivial(self) -> bool:
        return all(e % f.modulus == 0 for e, f in zip(self.exps, self.group.factors))


def generating_characters(G: FilteredAbelianGroup) -> list[Character]:
    """One character of full order per cyclic factor; a generating set of
    the dual group sufficient to separate points."""
    out = []
    for j in range(G.num_factors):
        out.append(Character(G, tuple(1 if jj == j else 0 for jj in range(G.num_factors))))
    return out


@dataclass(frozen=True)
class PhasePolyObservable:
    """h_{z,chi}: f -> chi(f(z)) on a hom-space of rank-n maps."""

    z: FpPoint
    chi: Character

    def index_of(self, f: PolyMap) -> int:
        return self.chi.index_of(f.value(self.z))


@dataclass(frozen=True)
class FunctionOnOrbit:
    """A unit-modulus function on orbit points: root index per point."""

    orbit: Orbit
    order_exp: int
    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.indices) != self.orbit.size:
            raise ParameterError("need one value per orbit point")

    @property
    def N(self) -> int:
        return self.orbit.base.p**self.order_exp

    @staticmethod
    def from_observable(orbit: Orbit, obs: PhasePolyObservable) -> FunctionOnOrbit:
        return FunctionOnOrbit(
            orbit, obs.chi.M, tuple(obs.index_of(pt) for pt in orbit.points)
        )


def evaluate(obs: PhasePolyObservable, f: PolyMap) -> tuple[int, int]:
    """chi(f(z)) as (root index, root order)."""
    return obs.index_of(f), obs.chi.order


def mult_derivative(F: FunctionOnOrbit, z: FpPoint) -> FunctionOnOrbit:
    """Delta_z F (y) = F(z.y) conj F(y): index subtraction along the orbit."""
    orbit = F.orbit
    N = F.N
    vals = tuple(
        (F.indices[orbit.shift_index(i, z)] - F.indices[i]) % N for i in range(orbit.size)
    )
    return FunctionOnOrbit(orbit, F.order_exp, vals)


def is_phase_polynomial(
    F: FunctionOnOrbit,
    k: int,
    mode: str = "exhaustive",
    samples: int = 2000,
    seed: int = 0,
) -> MorphismVerdict:
    """All (k+1)-fold multiplicative derivatives identically 1?

    Exhaustive mode runs over generator tuples only: an arbitrary-direction
    derivative is an integer combination of shifted generator-tuple
    derivatives of the same order, so generator tuples suffice. That
    reduction has its own test; sampled mode draws full tuples and flags
    the verdict as probabilistic.
    """
    orbit = F.orbit
    n = orbit.base.n
    p = orbit.base.p
    if mode == "exhaustive":
        gens = [fp_unit(j, n) for j in range(n)]
        checked = 0
        stack: list[tuple[FunctionOnOrbit, tuple[FpPoint, ...]]] = [(F, ())]
        while stack:
            cur, path = stack.pop()
            for g in gens:
                nxt = mult_derivative(cur, g)
                if len(path) + 1 == k + 1:
                    checked += 1
                    if any(nxt.indices):
                        return MorphismVerdict(False, True, checked, witness=path + (g,))
                else:
                    stack.append((nxt, path + (g,)))
        return MorphismVerdict(True, True, checked)
    if mode != "sampled":
        raise ParameterError(f"unknown mode {mode!r}")
    rng = Random(seed)
    npts = p**n
    for trial in range(samples):
        cur = F
        zs = tuple(fp_point(rng.randrange(npts), p, n) for _ in range(k + 1))
        for z in zs:
            cur = mult_derivative(cur, z)
        if any(cur.indices):
            return MorphismVerdict(False, False, trial + 1, witness=zs)
    return MorphismVerdict(True, False, samples)


def all_characters(G: FilteredAbelianGroup) -> list[Character]:
    out = []
    for idx in range(G.order):
        out.append(Character(G, G.element_at(idx)))
    return out


def full_observable_family(orbit: Orbit) -> list[PhasePolyObservable]:
    """The certifying family: every z in F_p^n crossed with the whole dual
    group. Per-factor generators alone can have rank < orbit size (their
    rows may all be proportional), so the full dual is what the rank
    certificate quantifies over."""
    base = orbit.base
    chis = all_characters(base.group)
    return [
        PhasePolyObservable(z, chi) for z in fp_points(base.p, base.n) for chi in chis
    ]


def abramov_rank(orbit: Orbit, observables: list[PhasePolyObservable]) -> int:
    """Exact rank over the cyclotomic field of [obs_j(f_i)] on orbit points.

    Rank equal to the orbit size certifies the finite Abramov property:
    the phase polynomials alone already span every function on the orbit.
    """
    if not observables:
        return 0
    p = orbit.base.p
    M = max(obs.chi.M for obs in observables)
    rows = []
    for obs in observables:
        scale = p ** (M - obs.chi.M)
        rows.append([obs.index_of(pt) * scale for pt in orbit.points])
    return root_matrix_rank(rows, p, M)


def derivative_cube_linkage(
    f: PolyMap, orbit: Orbit, z: FpPoint, chi: Character, zs: tuple[FpPoint, ...]
) -> tuple[int, int]:
    """Both sides of the proof identity: the iterated multiplicative
    derivative of h_{z,chi} at f versus chi of the alternating sum of the
    composed cube q(v) = f(z + v.zs). Returns (derivative index, chi index)."""
    F = FunctionOnOrbit.from_observable(orbit, PhasePolyObservable(z, chi))
    for direction in zs:
        F = mult_derivative(F, direction)
    lhs = F.indices[orbit.point_index(f)]
    p = f.p
    vals = []
    for v in range(1 << len(zs)):
        pt = z
        for i, g in enumerate(zs):
            if v >> i & 1:
                pt = tuple((a + b) % p for a, b in zip(pt, g))
        vals.append(f.value(pt))
    q = CubeMap(f.group, len(zs), tuple(vals))
    rhs = chi.index_of(alternating_sum(q))
    return lhs, rhs


def gowers_box_value(
    values: tuple[int, ...],
    p: int,
    n: int,
    order_exp: int,
    d: int,
    budget: int = 10**7,
    samples: int = 20000,
    seed: int = 0,
) -> tuple[CycValue, MorphismVerdict]:
    """The U^d box average of a unit-modulus function given by root indices
    on F_p^n, as an exact rational combination of roots of unity.

    Equals 1 exactly when the function is a phase polynomial of degree < d.
    Past the budget the average is a seeded sample, flagged in the verdict.
    """
    if d < 1:
        raise ParameterError("box order d must be >= 1")
    npts = p**n
    if len(values) != npts:
        raise ParameterError("need one root index per point of F_p^n")
    N = p**order_exp
    total = npts ** (d + 1)

    def term(x: int, hs: tuple[int, ...]) -> int:
        acc = 0
        for v in range(1 << d):
            pt = fp_point(x, p, n)
            for i in range(d):
                if v >> i & 1:
                    pt = tuple((a + b) % p for a, b in zip(pt, fp_point(hs[i], p, n)))
            idx = values[sum(c * p**j for j, c in enumerate(pt))]
            acc += -idx if v.bit_count() & 1 else idx
        return acc % N

    counts: dict[int, int] = {}
    if total <= budget:
        for tup in product(range(npts), repeat=d + 1):
            t = term(tup[0], tup[1:])
            counts[t] = counts.get(t, 0) + 1
        return (
            CycValue.from_index_counts(p, order_exp, counts, total),
            MorphismVerdict(True, True, total),
        )
    rng = Random(seed)
    for _ in range(samples):
        x = rng.randrange(npts)
        hs = tuple(rng.randrange(npts) for _ in range(d))
        t = term(x, hs)
        counts[t] = counts.get(t, 0) + 1
    return (
        CycValue.from_index_counts(p, order_exp, counts, samples),
        MorphismVerdict(True, False, samples),
    )


def pullback_to_domain(F: FunctionOnOrbit) -> tuple[int, ...]:
    """F read on F_p^n through z -> F(shift(base, z))."""
    orbit = F.orbit
    base = orbit.base
    base_idx = orbit.point_index(base)
    return tuple(
        F.indices[orbit.shift_index(base_idx, z)] for z in fp_points(base.p, base.n)
    )
