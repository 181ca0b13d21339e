"""The shift action on polynomial maps: orbits, finite systems, factors,
invariant measures and truncation sweeps.

Everything here is a finite shadow: orbit closures are plain BFS closures,
minimality is transitivity, unique ergodicity is "exactly one orbit",
and sweeps report raw per-truncation data without asserting any limit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable

from nilshift.cyclotomic import CycValue
from nilshift.groups import (
    FilteredAbelianGroup,
    FpPoint,
    GroupMismatchError,
    ParameterError,
    Residues,
    fp_add,
    fp_index,
    fp_point,
    fp_points,
    fp_unit,
)
from nilshift.polymaps import PolyMap


class InconsistentFamilyError(ValueError):
    """A truncation family fails the gamma-restriction compatibility check."""


def shift(f: PolyMap, z: FpPoint) -> PolyMap:
    """The shifted map x -> f(x + z); morphisms stay morphisms."""
    if len(z) != f.n:
        raise GroupMismatchError(f"shift point has rank {len(z)}, map has rank {f.n}")
    p, n = f.p, f.n
    table = tuple(f.table[fp_index(fp_add(fp_point(i, p, n), z, p), p)] for i in range(p**n))
    return PolyMap(f.group, n, table)


@dataclass(frozen=True)
class Orbit:
    """A finite shift-orbit with its generator transition permutations."""

    base: PolyMap
    points: tuple[PolyMap, ...]
    transitions: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        size = len(self.points)
        if self.base not in self.points:
            raise ParameterError("orbit must contain its base point")
        for perm in self.transitions:
            if sorted(perm) != list(range(size)):
                raise ParameterError("transitions must be permutations of the point set")

    @property
    def size(self) -> int:
        return len(self.points)

    @cached_property
    def _index(self) -> dict[PolyMap, int]:
        return {pt: i for i, pt in enumerate(self.points)}

    def point_index(self, f: PolyMap) -> int:
        return self._index[f]

    def shift_index(self, i: int, z: FpPoint) -> int:
        """Index of z . points[i], composing generator transitions digitwise."""
        for j, c in enumerate(z):
            perm = self.transitions[j]
            for _ in range(c):
                i = perm[i]
        return i

    def to_dict(self, include_points: bool = True) -> dict:
        d = {
            "base": self.base.to_dict(),
            "size": self.size,
            "transitions": [list(p) for p in self.transitions],
        }
        if include_points:
            d["points"] = [pt.to_dict()["table"] for pt in self.points]
        return d


def orbit_closure(f: PolyMap) -> Orbit:
    """BFS closure of f under the generator shifts; size divides p^n."""
    gens = [fp_unit(j, f.n) for j in range(f.n)]
    points = [f]
    index = {f: 0}
    queue = [f]
    while queue:
        cur = queue.pop(0)
        for g in gens:
            nxt = shift(cur, g)
            if nxt not in index:
                index[nxt] = len(points)
                points.append(nxt)
                queue.append(nxt)
    transitions = tuple(tuple(index[shift(pt, g)] for pt in points) for g in gens)
    orbit = Orbit(f, tuple(points), transitions)
    if f.p**f.n % orbit.size:
        raise AssertionError("orbit size must divide the acting group order")
    return orbit


def is_minimal(F: Orbit) -> bool:
    """Finite minimality: every point reaches every point through transitions."""
    size = F.size
    for start in range(size):
        seen = {start}
        stack = [start]
        while stack:
            cur = stack.pop()
            for perm in F.transitions:
                nxt = perm[cur]
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        if len(seen) != size:
            return False
    return True


@dataclass(frozen=True)
class FiniteSystem:
    """A finite F_p^n action: generator permutations plus optional labels."""

    p: int
    n: int
    size: int
    perms: tuple[tuple[int, ...], ...]
    labels: tuple[Residues, ...] | None = None
    label_group: FilteredAbelianGroup | None = None

    def __post_init__(self) -> None:
        if len(self.perms) != self.n:
            raise ParameterError(f"need {self.n} generator permutations")
        for perm in self.perms:
            if sorted(perm) != list(range(self.size)):
                raise ParameterError("action maps must be permutations (the finite distality shadow)")
        for a in range(self.n):
            pa = self.perms[a]
            if self._pow(pa, self.p) != tuple(range(self.size)):
                raise ParameterError(f"generator {a} does not have order dividing p={self.p}")
            for b in range(a + 1, self.n):
                pb = self.perms[b]
                if tuple(pa[pb[i]] for i in range(self.size)) != tuple(pb[pa[i]] for i in range(self.size)):
                    raise ParameterError(f"generators {a} and {b} do not commute")
        if self.labels is not None:
            if len(self.labels) != self.size:
                raise ParameterError("need one label per point")
            if self.label_group is None:
                raise ParameterError("labels need a label group")
            for v in self.labels:
                self.label_group.validate_element(v)

    @staticmethod
    def _pow(perm: tuple[int, ...], e: int) -> tuple[int, ...]:
        out = tuple(range(len(perm)))
        for _ in range(e):
            out = tuple(perm[i] for i in out)
        return out

    def act(self, z: FpPoint, x: int) -> int:
        for j, c in enumerate(z):
            for _ in range(c):
                x = self.perms[j][x]
        return x

    def component_of(self, x: int) -> set[int]:
        seen = {x}
        stack = [x]
        while stack:
            cur = stack.pop()
            for perm in self.perms:
                nxt = perm[cur]
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return seen

    def orbits(self) -> list[list[int]]:
        remaining = set(range(self.size))
        out = []
        while remaining:
            comp = self.component_of(min(remaining))
            out.append(sorted(comp))
            remaining -= comp
        return out

    def is_transitive_from(self, x0: int) -> bool:
        return len(self.component_of(x0)) == self.size

    @staticmethod
    def from_orbit(orbit: Orbit) -> FiniteSystem:
        """The orbit as a labeled system, labels = evaluation at zero."""
        base = orbit.base
        return FiniteSystem(
            p=base.p,
            n=base.n,
            size=orbit.size,
            perms=orbit.transitions,
            labels=tuple(pt.table[0] for pt in orbit.points),
            label_group=base.group,
        )


@dataclass(frozen=True)
class EvaluationEmbedding:
    """The map z -> z.x0 of a transitive system, as a table of point ids,
    plus its labeled reading as a polynomial map when labels exist."""

    point_table: tuple[int, ...]
    labeled: PolyMap | None
    equivariance_ok: bool


def evaluation_embedding(S: FiniteSystem, x0: int) -> EvaluationEmbedding:
    if not S.is_transitive_from(x0):
        raise ParameterError(f"system is not transitive from point {x0}")
    npts = S.p**S.n
    table = tuple(S.act(fp_point(i, S.p, S.n), x0) for i in range(npts))
    # phi*(z'.x)(z) = z'.(phi*(x)(z)) on all generator pairs
    ok = True
    for j in range(S.n):
        g = fp_unit(j, S.n)
        shifted_x0 = S.perms[j][x0]
        for i in range(npts):
            z = fp_point(i, S.p, S.n)
            lhs = S.act(fp_add(z, g, S.p), x0)
            if S.act(z, shifted_x0) != lhs:
                ok = False
    labeled = None
    if S.labels is not None and S.label_group is not None:
        labeled = PolyMap(S.label_group, S.n, tuple(S.labels[i] for i in table))
    return EvaluationEmbedding(table, labeled, ok)


def compose_pushforward(phi, F: Orbit) -> Orbit:
    """Image orbit {phi o g}; the finite shadow of "image of the closure is
    the closure of the image" is checked as set equality."""
    image = orbit_closure(phi.apply_poly(F.base))
    pushed = {phi.apply_poly(g) for g in F.points}
    if pushed != set(image.points):
        raise AssertionError("pushforward of the orbit differs from the orbit of the pushforward")
    return image


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Rational weights over a finite point set, total mass one."""

    weights: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if any(w < 0 for w in self.weights):
            raise ParameterError("weights must be nonnegative")
        if sum(self.weights) != 1:
            raise ParameterError("weights must sum to 1")

    @staticmethod
    def uniform(size: int) -> EmpiricalMeasure:
        return EmpiricalMeasure((Fraction(1, size),) * size)

    @staticmethod
    def uniform_on(support: list[int], size: int) -> EmpiricalMeasure:
        w = [Fraction(0)] * size
        for i in support:
            w[i] = Fraction(1, len(support))
        return EmpiricalMeasure(tuple(w))


@dataclass(frozen=True)
class FactorMapData:
    source: FiniteSystem
    target: FiniteSystem
    point_map: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.point_map) != self.source.size:
            raise ParameterError("point map must be total on the source")
        for y in self.point_map:
            if not 0 <= y < self.target.size:
                raise ParameterError("point map leaves the target")


@dataclass(frozen=True)
class FactorReport:
    equivariant: bool
    equivariance_witness: tuple | None
    surjective: bool
    missing_point: int | None
    pushforward_uniform: bool | None
    pushforward: EmpiricalMeasure

    def all_ok(self) -> bool:
        return self.equivariant and self.surjective and self.pushforward_uniform is not False


def verify_factor(theta: FactorMapData, nu: EmpiricalMeasure) -> FactorReport:
    """Equivariance, surjectivity, and (for transitive targets) pushforward
    of nu = uniform; failures carry witnesses."""
    S, T, m = theta.source, theta.target, theta.point_map
    if len(nu.weights) != S.size:
        raise ParameterError("measure must weight the source points")
    eq_witness = None
    for j in range(S.n):
        for y in range(S.size):
            if m[S.perms[j][y]] != T.perms[j][m[y]]:
                eq_witness = (j, y)
                break
        if eq_witness:
            break
    hit = set(m)
    missing = next((x for x in range(T.size) if x not in hit), None)
    weights = [Fraction(0)] * T.size
    for y, w in enumerate(nu.weights):
        weights[m[y]] += w
    pushforward = EmpiricalMeasure(tuple(weights))
    uniform: bool | None = None
    if len(T.orbits()) == 1:
        uniform = pushforward == EmpiricalMeasure.uniform(T.size)
    return FactorReport(
        equivariant=eq_witness is None,
        equivariance_witness=eq_witness,
        surjective=missing is None,
        missing_point=missing,
        pushforward_uniform=uniform,
        pushforward=pushforward,
    )


@dataclass(frozen=True)
class RpIdentityResult:
    ok: bool
    lhs: Residues
    rhs: Residues

    def __bool__(self) -> bool:
        return self.ok


def rp_identity_check(f: PolyMap, gs: tuple[FpPoint, ...], x: FpPoint) -> RpIdentityResult:
    """The regionally-proximal identity: f at the top corner equals the
    signed sum of f over the other corners of the (k+1)-cube spanned by gs."""
    G = f.group
    k = G.degree
    if len(gs) != k + 1:
        raise ParameterError(f"need k+1 = {k + 1} directions, got {len(gs)}")
    top = x
    for g in gs:
        top = fp_add(top, g, f.p)
    lhs = f.value(top)
    acc = G.zero
    for v in range((1 << (k + 1)) - 1):
        pt = x
        for i, g in enumerate(gs):
            if v >> i & 1:
                pt = fp_add(pt, g, f.p)
        term = f.value(pt)
        acc = G.sub(acc, term) if v.bit_count() & 1 else G.add(acc, term)
    rhs = acc if k % 2 == 0 else G.neg(acc)
    return RpIdentityResult(lhs == rhs, lhs, rhs)


def invariant_measures(S: FiniteSystem) -> list[EmpiricalMeasure]:
    """The ergodic invariant measures: uniform on each orbit. Exactly one
    iff the system is transitive (the finite unique-ergodicity collapse)."""
    return [EmpiricalMeasure.uniform_on(comp, S.size) for comp in S.orbits()]


# -- truncation sweeps ------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    n: int
    orbit_size: int
    folner_averages: tuple[CycValue, ...]

    @property
    def average(self) -> CycValue:
        return self.folner_averages[-1]


@dataclass(frozen=True)
class SweepReport:
    family: str
    rows: tuple[SweepRow, ...]

    def csv_lines(self) -> list[str]:
        lines = ["n,orbit_size,observable_re,observable_im"]
        for row in self.rows:
            z = row.average.to_complex()
            lines.append(f"{row.n},{row.orbit_size},{z.real!r},{z.imag!r}")
        return lines


FamilyRule = Callable[[int], PolyMap]


def truncation_sweep(
    family: FamilyRule,
    n_max: int,
    observable_index: Callable[[PolyMap], int],
    root_order_exp: int,
    group: FilteredAbelianGroup,
    family_name: str = "custom",
) -> SweepReport:
    """Per-truncation orbit sizes and Birkhoff averages of an observable over
    the Folner chain F_p^1 < ... < F_p^n. Raw empirical data only; the rule
    must be gamma-consistent (f_{n+1} restricted to F_p^n equals f_n)."""
    p = group.p
    rows = []
    prev: PolyMap | None = None
    for n in range(1, n_max + 1):
        f = family(n)
        if f.n != n or f.group.moduli != group.moduli:
            raise InconsistentFamilyError(f"rule returned a map of rank {f.n} at truncation {n}")
        if prev is not None:
            for z in fp_points(p, n - 1):
                if f.value(z + (0,)) != prev.value(z):
                    raise InconsistentFamilyError(f"f_{n} does not restrict to f_{n - 1} at {z}")
        orbit = orbit_closure(f)
        averages = []
        for m in range(1, n + 1):
            counts: dict[int, int] = {}
            total = p**m
            for i in range(total):
                z = fp_point(i, p, m) + (0,) * (n - m)
                t = observable_index(shift(f, z))
                counts[t] = counts.get(t, 0) + 1
            averages.append(CycValue.from_index_counts(p, root_order_exp, counts, total))
        rows.append(SweepRow(n, orbit.size, tuple(averages)))
        prev = f
    return SweepReport(family_name, tuple(rows))


def make_family(name: str, group: FilteredAbelianGroup, n_max: int, seed: int = 0) -> FamilyRule:
    """Built-in gamma-consistent families: constant, coordinate,
    coordinate-sum, random."""
    from nilshift.polymaps import random_morphism

    p = group.p
    if name == "constant":
        return lambda n: PolyMap(group, n, (group.zero,) * p**n)
    if name == "coordinate":
        unit = tuple(1 if j == 0 else 0 for j in range(group.num_factors))
        if not unit:
            raise ParameterError("coordinate family needs a nontrivial group")
        return lambda n: PolyMap(
            group, n, tuple(group.scalar_mul(z[0], unit) for z in fp_points(p, n))
        )
    if name == "coordinate-sum":
        if not group.factors:
            raise ParameterError("coordinate-sum family needs a nontrivial group")
        unit = tuple(1 if j == 0 else 0 for j in range(group.num_factors))
        return lambda n: PolyMap(
            group, n, tuple(group.scalar_mul(sum(z), unit) for z in fp_points(p, n))
        )
    if name == "random":
        top = random_morphism(n_max, group, seed)
        return lambda n: PolyMap(
            group, n, tuple(top.value(z + (0,) * (n_max - n)) for z in fp_points(p, n))
        )
    raise ParameterError(f"unknown family {name!r}")
