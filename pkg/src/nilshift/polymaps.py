"""Polynomial maps F_p^n -> G and the morphism tests that define them.

A PolyMap is a full table of p^n values (cheap pointwise evaluation, exact
hashing for orbit sets); TaylorForm is the compressed binomial-coefficient
dual used by the lifting machinery. Tables are indexed with coordinate j
contributing digit p^j, matching the cube vertex encoding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from random import Random
from typing import Iterator

from nilshift import kernels
from nilshift.cubes import CubeMap, DiscreteCubeSpec, _level_div_flat
from nilshift.groups import (
    FilteredAbelianGroup,
    FpPoint,
    GroupMismatchError,
    ParameterError,
    Residues,
    fp_index,
    fp_point,
    fp_points,
    is_p_homogeneous_pattern,
)

DEFAULT_TUPLE_BUDGET = 10**7
DEFAULT_SAMPLES = 2000


class TaylorConsistencyError(ValueError):
    """Finite-difference data does not reconstruct the map (not a morphism)."""


class NotPHomogeneousError(ValueError):
    """Restricting a Taylor form produced a table failing the morphism test."""


@dataclass(frozen=True)
class MorphismVerdict:
    """Boolean verdict plus honesty flags: how it was checked and how much."""

    ok: bool
    exhaustive: bool
    checked: int
    witness: object = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class PolyMap:
    group: FilteredAbelianGroup
    n: int
    table: tuple[Residues, ...]

    def __post_init__(self) -> None:
        if len(self.table) != self.group.p**self.n:
            raise GroupMismatchError(f"table needs {self.group.p ** self.n} entries for rank {self.n}")
        for v in self.table:
            self.group.validate_element(v)

    @property
    def p(self) -> int:
        return self.group.p

    def value(self, z: FpPoint) -> Residues:
        return self.table[fp_index(z, self.p)]

    @cached_property
    def flat(self) -> tuple[int, ...]:
        return tuple(x for res in self.table for x in res)

    def with_group(self, group: FilteredAbelianGroup) -> PolyMap:
        """Reinterpret the same table in a regraded copy of the group."""
        if group.moduli != self.group.moduli or group.p != self.p:
            raise GroupMismatchError("can only swap in a group with identical factors")
        return PolyMap(group, self.n, self.table)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "group": self.group.to_dict(),
            "table": [list(v) for v in self.table],
        }

    @staticmethod
    def from_dict(d: dict) -> PolyMap:
        group = FilteredAbelianGroup.from_dict(d["group"])
        return PolyMap(group, int(d["n"]), tuple(tuple(int(x) for x in v) for v in d["table"]))


@dataclass(frozen=True)
class TaylorForm:
    """Binomial coefficients a_alpha of a Z^n polynomial map, |alpha| <= degree."""

    group: FilteredAbelianGroup
    n: int
    coeffs: tuple[tuple[tuple[int, ...], Residues], ...]

    @cached_property
    def coeff_map(self) -> dict[tuple[int, ...], Residues]:
        return dict(self.coeffs)

    def coefficient(self, alpha: tuple[int, ...]) -> Residues:
        return self.coeff_map.get(alpha, self.group.zero)


def compose_with_spec(f: PolyMap, spec: DiscreteCubeSpec) -> CubeMap:
    """The cube f(z + v.edges), the object the closedness test inspects."""
    return CubeMap(f.group, spec.dim, tuple(f.value(pt) for pt in spec.vertices()))


def is_morphism_derivatives(
    f: PolyMap,
    budget: int = DEFAULT_TUPLE_BUDGET,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> MorphismVerdict:
    """Check that every i-fold difference lands in the level-i subgroup,
    for 1 <= i <= k+1; sampled (and flagged) past the tuple budget."""
    G = f.group
    p, n = f.p, f.n
    max_order = G.degree + 1
    npts = p**n
    nf = G.num_factors
    max_level = G.degree + 1
    level_div = _level_div_flat(G, max_level)

    total = sum((npts - 1) ** i for i in range(1, max_order + 1)) * npts
    if total <= budget:
        bad = kernels.derivative_violation(list(f.flat), p, n, nf, G.moduli, level_div, max_level, max_order)
        if bad < 0:
            return MorphismVerdict(True, True, total)
        return MorphismVerdict(False, True, total, witness=_derivative_witness(f, max_order))

    rng = Random(seed)
    for trial in range(samples):
        order = rng.randrange(1, max_order + 1)
        gs = [fp_point(rng.randrange(1, npts), p, n) for _ in range(order)]
        x = fp_point(rng.randrange(npts), p, n)
        val = _iterated_difference(f, gs, x)
        if not G.subgroup_member(val, min(order, max_level)):
            return MorphismVerdict(False, False, trial + 1, witness=(tuple(gs), x))
    return MorphismVerdict(True, False, samples)


def _iterated_difference(f: PolyMap, gs: list[FpPoint], x: FpPoint) -> Residues:
    G = f.group
    total = G.zero
    for v in range(1 << len(gs)):
        pt = x
        for i, g in enumerate(gs):
            if v >> i & 1:
                pt = tuple((a + b) % f.p for a, b in zip(pt, g))
        term = f.value(pt)
        sign = (len(gs) - v.bit_count()) & 1
        total = G.sub(total, term) if sign else G.add(total, term)
    return total


def _derivative_witness(f: PolyMap, max_order: int) -> tuple:
    G = f.group
    npts = f.p**f.n
    max_level = G.degree + 1

    def descend(gs: list[FpPoint], order: int):
        for gi in range(1, npts):
            g = fp_point(gi, f.p, f.n)
            cur = gs + [g]
            for xi in range(npts):
                x = fp_point(xi, f.p, f.n)
                if not G.subgroup_member(_iterated_difference(f, cur, x), min(order, max_level)):
                    return (tuple(cur), x)
            if order < max_order:
                found = descend(cur, order + 1)
                if found:
                    return found
        return None

    found = descend([], 1)
    if found is None:
        raise AssertionError("kernel reported a violation but none was found")
    return found


def is_morphism_cubes(
    f: PolyMap,
    max_dim: int | None = None,
    budget: int = DEFAULT_TUPLE_BUDGET,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> MorphismVerdict:
    """Check f on every discrete cube z + v.edges of dimension <= max_dim
    (default k+1): the composed vertex map must be a Host-Kra cube."""
    G = f.group
    p, n = f.p, f.n
    if max_dim is None:
        max_dim = G.degree + 1
    npts = p**n
    nf = G.num_factors
    max_level = G.degree + 1
    level_div = _level_div_flat(G, max_level)

    def spec_ok(spec: DiscreteCubeSpec) -> bool:
        q = compose_with_spec(f, spec)
        return kernels.hk_violation(list(q.flat), q.n, nf, G.moduli, level_div, max_level) < 0

    total = sum(npts ** (m + 1) for m in range(1, max_dim + 1))
    if total <= budget:
        checked = 0
        for m in range(1, max_dim + 1):
            for tup in product(range(npts), repeat=m + 1):
                base = fp_point(tup[0], p, n)
                edges = tuple(fp_point(t, p, n) for t in tup[1:])
                spec = DiscreteCubeSpec(p, base, edges)
                checked += 1
                if not spec_ok(spec):
                    return MorphismVerdict(False, True, checked, witness=spec)
        return MorphismVerdict(True, True, checked)

    rng = Random(seed)
    for trial in range(samples):
        m = rng.randrange(1, max_dim + 1)
        base = fp_point(rng.randrange(npts), p, n)
        edges = tuple(fp_point(rng.randrange(npts), p, n) for _ in range(m))
        spec = DiscreteCubeSpec(p, base, edges)
        if not spec_ok(spec):
            return MorphismVerdict(False, False, trial + 1, witness=spec)
    return MorphismVerdict(True, False, samples)


# -- Taylor form and the fundamental-domain correspondence -----------------


def _difference_tensor(f: PolyMap, box: int) -> dict[tuple[int, ...], Residues]:
    """Iterated forward differences at 0 of the p-periodic extension,
    over the box [0, box]^n."""
    G = f.group
    side = box + 1
    grid = {}
    for alpha in product(range(side), repeat=f.n):
        grid[alpha] = f.value(tuple(a % f.p for a in alpha))
    # in-place per-axis difference tableau
    for axis in range(f.n):
        for step in range(1, side):
            for alpha in sorted(grid, key=lambda a: -a[axis]):
                if alpha[axis] >= step:
                    below = alpha[:axis] + (alpha[axis] - 1,) + alpha[axis + 1 :]
                    grid[alpha] = G.sub(grid[alpha], grid[below])
    return grid


def taylor_expand(f: PolyMap) -> TaylorForm:
    """Finite-difference coefficients of the p-periodic extension of f.

    Every coefficient on the box [0,k]^n must land in its filtration level
    (clamped trivial past the degree) and the stored ones must reconstruct
    f on the fundamental domain; otherwise f was not a morphism and a
    TaylorConsistencyError is raised.
    """
    G = f.group
    k = G.degree
    tensor = _difference_tensor(f, k)
    coeffs = []
    for alpha, a in sorted(tensor.items(), key=lambda kv: (sum(kv[0]), kv[0])):
        lvl = min(sum(alpha), k + 1)
        if not G.subgroup_member(a, lvl):
            raise TaylorConsistencyError(f"coefficient a_{alpha} leaves the level-{lvl} subgroup: {a}")
        if sum(alpha) <= k:
            coeffs.append((alpha, a))
    form = TaylorForm(G, f.n, tuple(coeffs))
    if restrict_to_fundamental_domain(form, f.p, validate=False).table != f.table:
        raise TaylorConsistencyError("reconstruction on the fundamental domain disagrees with the table")
    return form


def restrict_to_fundamental_domain(form: TaylorForm, p: int, validate: bool = True) -> PolyMap:
    """Evaluate the binomial expansion on [0, p-1]^n and read it as a map
    on F_p^n. For the H-pattern targets this is always a morphism; when
    validation is on, a failing table raises NotPHomogeneousError."""
    G = form.group
    n = form.n
    table = []
    for z in fp_points(p, n):
        acc = G.zero
        for alpha, a in form.coeffs:
            w = 1
            for zi, ai in zip(z, alpha):
                w *= math.comb(zi, ai)
                if w == 0:
                    break
            if w:
                acc = G.add(acc, G.scalar_mul(w, a))
        table.append(acc)
    f = PolyMap(G, n, tuple(table))
    if validate:
        verdict = is_morphism_derivatives(f)
        if not verdict.ok:
            raise NotPHomogeneousError(f"restricted table fails the morphism test at {verdict.witness}")
    return f


def free_multi_indices(n: int, p: int, k: int) -> list[tuple[int, ...]]:
    """The coefficient support of the fundamental-domain parametrization:
    alpha with every entry <= p-1 and |alpha| <= k, in graded order."""
    out = [alpha for alpha in product(range(min(p - 1, k) + 1), repeat=n) if sum(alpha) <= k]
    out.sort(key=lambda a: (sum(a), a))
    return out


def random_morphism(n: int, G: FilteredAbelianGroup, seed: int | Random) -> PolyMap:
    """Uniform free Taylor coefficients, reconstructed and restricted.

    Deterministic per seed. Correct by construction for quotient-pattern
    groups (the fundamental-domain correspondence), so the per-draw morphism
    re-test is skipped; callers wanting proof run the tests themselves.
    """
    if not is_p_homogeneous_pattern(G):
        raise ParameterError("random_morphism needs a building-block quotient-pattern group")
    rng = Random(seed) if isinstance(seed, int) else seed
    coeffs = []
    for alpha in free_multi_indices(n, G.p, G.degree):
        lvl = sum(alpha)
        a = G.level_element_at(lvl, rng.randrange(G.level_order(lvl)))
        coeffs.append((alpha, a))
    form = TaylorForm(G, n, tuple(coeffs))
    return restrict_to_fundamental_domain(form, G.p, validate=False)


def enumerate_morphisms(n: int, G: FilteredAbelianGroup, budget: int = DEFAULT_TUPLE_BUDGET) -> Iterator[PolyMap]:
    """All morphisms F_p^n -> G via the free-coefficient bijection
    (H-pattern groups only)."""
    if not is_p_homogeneous_pattern(G):
        raise ParameterError("enumerate_morphisms needs a building-block quotient-pattern group")
    free = free_multi_indices(n, G.p, G.degree)
    total = morphism_count(n, G)
    if total > budget:
        raise ParameterError(f"{total} morphisms exceed the budget of {budget}")
    sizes = [G.level_order(sum(alpha)) for alpha in free]
    for idx in range(total):
        rem = idx
        coeffs = []
        for alpha, size in zip(free, sizes):
            rem, r = divmod(rem, size)
            coeffs.append((alpha, G.level_element_at(sum(alpha), r)))
        yield restrict_to_fundamental_domain(TaylorForm(G, n, tuple(coeffs)), G.p, validate=False)


def morphism_count(n: int, G: FilteredAbelianGroup) -> int:
    if not is_p_homogeneous_pattern(G):
        raise ParameterError("morphism_count needs a building-block quotient-pattern group")
    total = 1
    for alpha in free_multi_indices(n, G.p, G.degree):
        total *= G.level_order(sum(alpha))
    return total


def morphism_tables_bruteforce(n: int, G: FilteredAbelianGroup, budget: int = DEFAULT_TUPLE_BUDGET) -> list[PolyMap]:
    """Oracle: scan all |G|^(p^n) tables with the derivative test."""
    p = G.p
    npts = p**n
    total = G.order**npts
    if total > budget:
        raise ParameterError(f"{total} tables exceed the budget of {budget}")
    nf = G.num_factors
    max_level = G.degree + 1
    level_div = _level_div_flat(G, max_level)
    indices = kernels.morphism_table_indices_brute(p, n, nf, G.moduli, level_div, max_level, G.degree + 1)
    out = []
    for idx in indices:
        rem = idx
        vals = []
        for _ in range(npts):
            row = []
            for f in G.factors:
                rem, r = divmod(rem, f.modulus)
                row.append(r)
            vals.append(tuple(row))
        out.append(PolyMap(G, n, tuple(vals)))
    return out


def embed_gamma(f: PolyMap, N: int) -> PolyMap:
    """Extend to F_p^N by ignoring the new coordinates (precompose with the
    projection); morphisms stay morphisms."""
    if N < f.n:
        raise ParameterError(f"target rank {N} smaller than source rank {f.n}")
    if N == f.n:
        return f
    table = tuple(f.value(z[: f.n]) for z in fp_points(f.p, N))
    return PolyMap(f.group, N, table)
