"""Host-Kra cube calculus on filtered abelian groups.

A cube map {0,1}^n -> G is stored on all 2^n vertices; vertex v is encoded
as an n-bit integer with bit j = coordinate j. Membership uses the Moebius
normal form q(v) = sum of g_S over S subset of supp(v), with g_S required
to lie in the level-|S| subgroup (levels past the degree clamp to trivial).
The classical face-indicator generator picture is kept as a brute-force
oracle (face_generated_cube_set) for tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

from nilshift import kernels
from nilshift.groups import (
    FilteredAbelianGroup,
    FpPoint,
    GroupMismatchError,
    Residues,
    fp_add,
)

DEFAULT_ENUMERATION_BUDGET = 2**24


class EnumerationBudgetError(RuntimeError):
    """An exhaustive enumeration would exceed its configured budget."""


class CompletionError(ValueError):
    """A corner admits no Host-Kra completion; carries the offending subset."""

    def __init__(self, subset: int, level: int):
        self.subset = subset
        self.level = level
        super().__init__(f"corner coefficient g_S for S={subset:b} violates level {level}")


@dataclass(frozen=True)
class CubeMap:
    group: FilteredAbelianGroup
    n: int
    values: tuple[Residues, ...]

    def __post_init__(self) -> None:
        if len(self.values) != 1 << self.n:
            raise GroupMismatchError(f"cube of dimension {self.n} needs {1 << self.n} values")
        for v in self.values:
            self.group.validate_element(v)

    @cached_property
    def flat(self) -> tuple[int, ...]:
        return tuple(x for res in self.values for x in res)

    def to_dict(self) -> dict:
        return {"n": self.n, "values": [list(v) for v in self.values]}

    @staticmethod
    def from_dict(d: dict, group: FilteredAbelianGroup) -> CubeMap:
        return CubeMap(group, int(d["n"]), tuple(tuple(int(x) for x in v) for v in d["values"]))


@dataclass(frozen=True)
class CornerMap:
    """A cube map with the top vertex 1^n missing."""

    group: FilteredAbelianGroup
    n: int
    values: tuple[Residues, ...]

    def __post_init__(self) -> None:
        if len(self.values) != (1 << self.n) - 1:
            raise GroupMismatchError(f"corner of dimension {self.n} needs {(1 << self.n) - 1} values")
        for v in self.values:
            self.group.validate_element(v)

    @staticmethod
    def of_cube(q: CubeMap) -> CornerMap:
        return CornerMap(q.group, q.n, q.values[:-1])


@dataclass(frozen=True)
class DiscreteCubeSpec:
    """A combinatorial cube z + v_1 z_1 + ... + v_n z_n in F_p^n."""

    p: int
    base: FpPoint
    edges: tuple[FpPoint, ...]

    def __post_init__(self) -> None:
        if any(len(e) != len(self.base) for e in self.edges):
            raise GroupMismatchError("base and edges must live in the same F_p^n")

    @property
    def dim(self) -> int:
        return len(self.edges)

    def vertex(self, v: int) -> FpPoint:
        pt = self.base
        for i, e in enumerate(self.edges):
            if v >> i & 1:
                pt = fp_add(pt, e, self.p)
        return pt

    def vertices(self) -> Iterator[FpPoint]:
        for v in range(1 << self.dim):
            yield self.vertex(v)


def _level_div_flat(G: FilteredAbelianGroup, max_level: int) -> list[int]:
    return [d for i in range(max_level + 1) for d in G.level_divisors(i)]


def moebius_coefficients(q: CubeMap) -> dict[int, Residues]:
    """g_S = sum over T subset of S of (-1)^{|S minus T|} q(1_T), keyed by bitmask."""
    G = q.group
    nf = G.num_factors
    flat = kernels.moebius_transform(list(q.flat), q.n, nf, G.moduli)
    return {S: tuple(flat[S * nf : (S + 1) * nf]) for S in range(1 << q.n)}


def reconstruct_from_moebius(group: FilteredAbelianGroup, n: int, coeffs: dict[int, Residues]) -> CubeMap:
    nf = group.num_factors
    flat = [0] * ((1 << n) * nf)
    for S, g in coeffs.items():
        flat[S * nf : (S + 1) * nf] = list(g)
    vals = kernels.zeta_transform(flat, n, nf, group.moduli)
    return CubeMap(group, n, tuple(tuple(vals[v * nf : (v + 1) * nf]) for v in range(1 << n)))


def is_hk_cube(q: CubeMap, G: FilteredAbelianGroup) -> bool:
    if q.group.moduli != G.moduli:
        raise GroupMismatchError("cube values do not match the group's factor moduli")
    nf = G.num_factors
    max_level = G.degree + 1
    viol = kernels.hk_violation(list(q.flat), q.n, nf, G.moduli, _level_div_flat(G, max_level), max_level)
    return viol < 0


def alternating_sum(q: CubeMap) -> Residues:
    """Sum over vertices of (-1)^{|v|} q(v); zero on every (k+1)-cube."""
    G = q.group
    total = G.zero
    for v, val in enumerate(q.values):
        total = G.sub(total, val) if v.bit_count() & 1 else G.add(total, val)
    return total


def cube_count(n: int, G: FilteredAbelianGroup) -> int:
    """|C^n(G)| = product over subsets S of |G_(|S|)| (clamped past the degree)."""
    total = 1
    for S in range(1 << n):
        total *= G.level_order(min(S.bit_count(), G.degree + 1))
    return total


def enumerate_cubes(
    n: int,
    G: FilteredAbelianGroup,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    start: int = 0,
    stop: int | None = None,
) -> Iterator[CubeMap]:
    """Stream the cube set by iterating Moebius coefficients levelwise.

    The stream is restartable: index i yields the cube whose coefficient
    choices are the mixed-radix digits of i over the per-subset level orders.
    """
    total = cube_count(n, G)
    stop = total if stop is None else min(stop, total)
    if stop - start > budget:
        raise EnumerationBudgetError(f"{stop - start} cubes exceed the budget of {budget}")
    sizes = [G.level_order(min(S.bit_count(), G.degree + 1)) for S in range(1 << n)]
    for idx in range(start, stop):
        rem = idx
        coeffs = {}
        for S, size in enumerate(sizes):
            rem, r = divmod(rem, size)
            coeffs[S] = G.level_element_at(min(S.bit_count(), G.degree + 1), r)
        yield reconstruct_from_moebius(G, n, coeffs)


def complete_corner(c: CornerMap, G: FilteredAbelianGroup) -> CubeMap:
    """Complete a corner to a cube, taking the top Moebius coefficient to 0.

    Raises CompletionError (with the offending subset) when some lower
    coefficient of the corner already violates its level. The completion is
    unique iff the level-n subgroup is trivial.
    """
    if c.group.moduli != G.moduli:
        raise GroupMismatchError("corner values do not match the group's factor moduli")
    top = (1 << c.n) - 1
    # the top value only feeds g_top, so a zero pad computes all proper g_S
    padded = CubeMap(c.group, c.n, c.values + (G.zero,))
    coeffs = moebius_coefficients(padded)
    for S in range(top):
        lvl = min(S.bit_count(), G.degree + 1)
        if not G.subgroup_member(coeffs[S], lvl):
            raise CompletionError(S, lvl)
    value = G.zero
    for S in range(top):
        value = G.add(value, coeffs[S])
    return CubeMap(G, c.n, c.values + (value,))


def corner_completions(c: CornerMap, G: FilteredAbelianGroup) -> list[Residues]:
    """All values closing the corner: the canonical one shifted by G_(n)."""
    q = complete_corner(c, G)
    lvl = min(c.n, G.degree + 1)
    return [G.add(q.values[-1], h) for h in G.level_elements(lvl)]


# -- brute-force oracles (test path, never production) ---------------------


def all_vertex_maps(n: int, G: FilteredAbelianGroup, budget: int = DEFAULT_ENUMERATION_BUDGET) -> Iterator[CubeMap]:
    total = G.order ** (1 << n)
    if total > budget:
        raise EnumerationBudgetError(f"{total} maps exceed the budget of {budget}")
    for idx in range(total):
        rem = idx
        vals = []
        for _ in range(1 << n):
            rem, r = divmod(rem, G.order)
            vals.append(G.element_at(r))
        yield CubeMap(G, n, tuple(vals))


def face_generated_cube_set(n: int, G: FilteredAbelianGroup) -> set[tuple[Residues, ...]]:
    """Subgroup of G^{2^n} generated by all face indicators g*1_F.

    Faces fix any subset of coordinates to arbitrary 0/1 values; g runs over
    generators of the level-codim(F) subgroup. Independent of the Moebius
    normal form, so it serves as the membership oracle.
    """
    generators: list[tuple[Residues, ...]] = []
    zero_map = (G.zero,) * (1 << n)
    for fixed in range(1 << n):  # bitmask of fixed coordinates
        codim = fixed.bit_count()
        lvl = min(codim, G.degree + 1)
        for eps in range(1 << n):
            if eps & ~fixed:
                continue
            members = [
                v for v in range(1 << n) if all(not (fixed >> j & 1) or (v >> j & 1) == (eps >> j & 1) for j in range(n))
            ]
            for j, factor in enumerate(G.factors):
                d = factor.level_divisor(lvl)
                if d == factor.modulus:
                    continue
                g = tuple(d if jj == j else 0 for jj in range(G.num_factors))
                gen = list(zero_map)
                for v in members:
                    gen[v] = g
                generators.append(tuple(gen))
    closure = {zero_map}
    frontier = [zero_map]
    while frontier:
        cur = frontier.pop()
        for gen in generators:
            nxt = tuple(G.add(a, b) for a, b in zip(cur, gen))
            if nxt not in closure:
                closure.add(nxt)
                frontier.append(nxt)
    return closure


def cube_values_key(q: CubeMap) -> tuple[Residues, ...]:
    return q.values
