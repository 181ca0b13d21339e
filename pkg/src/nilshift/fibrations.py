"""Filtered homomorphisms, fibration certificates, coverings and lifting.

A FilteredHom is stored by its images of the source factor generators.
Fibration-ness is certified by levelwise surjectivity (Hermite reduction
over the modulus lattices); the corner-completion formulation is kept as
an enumeration-based cross-check. Lifting is coefficient-wise over the
Taylor form, with the paper-style box-inductive construction retained as
an oracle for small ranks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from random import Random

from nilshift import linalg
from nilshift.cubes import CornerMap, CubeMap, corner_completions, cube_count, enumerate_cubes
from nilshift.groups import (
    FilteredAbelianGroup,
    GroupMismatchError,
    ParameterError,
    Residues,
    fp_points,
    make_cf_group,
    quotient_pattern_ell,
)
from nilshift.polymaps import (
    MorphismVerdict,
    PolyMap,
    TaylorForm,
    restrict_to_fundamental_domain,
    taylor_expand,
)


class NotFibrationError(ValueError):
    """Levelwise surjectivity fails; carries the first bad level."""

    def __init__(self, level: int):
        self.level = level
        super().__init__(f"image of the level-{level} subgroup is a proper subgroup of the target level")


class UnsupportedTargetError(ValueError):
    """covering_onto refuses targets outside the constructive class."""


class CertificateError(RuntimeError):
    """A certified surjection failed to produce a preimage (internal bug)."""


@dataclass(frozen=True)
class FilteredHom:
    source: FilteredAbelianGroup
    target: FilteredAbelianGroup
    action: tuple[Residues, ...]

    def __post_init__(self) -> None:
        if self.source.p != self.target.p:
            raise ParameterError("source and target must share the prime")
        if len(self.action) != self.source.num_factors:
            raise ParameterError("need one generator image per source factor")
        for img in self.action:
            self.target.validate_element(img)
        for j, f in enumerate(self.source.factors):
            if self.target.scalar_mul(f.modulus, self.action[j]) != self.target.zero:
                raise ParameterError(f"not well-defined: p^m * image of generator {j} is nonzero")
        top = max(self.source.degree, self.target.degree) + 1
        for i in range(top + 1):
            for j, f in enumerate(self.source.factors):
                img = self.target.scalar_mul(f.level_divisor(i), self.action[j])
                if not self.target.subgroup_member(img, min(i, self.target.degree + 1)):
                    raise ParameterError(f"image of level-{i} generator {j} leaves the target level")

    def apply(self, g: Residues) -> Residues:
        out = self.target.zero
        for c, img in zip(g, self.action):
            if c:
                out = self.target.add(out, self.target.scalar_mul(c, img))
        return out

    def apply_poly(self, f: PolyMap) -> PolyMap:
        if f.group.moduli != self.source.moduli:
            raise GroupMismatchError("polymap does not live in the hom's source")
        return PolyMap(self.target, f.n, tuple(self.apply(v) for v in f.table))

    def apply_cube(self, q: CubeMap) -> CubeMap:
        return CubeMap(self.target, q.n, tuple(self.apply(v) for v in q.values))

    def compose(self, inner: FilteredHom) -> FilteredHom:
        """self o inner (inner's target must be self's source)."""
        if inner.target.moduli != self.source.moduli:
            raise GroupMismatchError("homs do not compose")
        return FilteredHom(inner.source, self.target, tuple(self.apply(img) for img in inner.action))

    def to_dict(self) -> dict:
        return {
            "source": self.source.to_dict(),
            "target": self.target.to_dict(),
            "matrix": [list(img) for img in self.action],
        }

    @staticmethod
    def from_dict(d: dict) -> FilteredHom:
        return FilteredHom(
            FilteredAbelianGroup.from_dict(d["source"]),
            FilteredAbelianGroup.from_dict(d["target"]),
            tuple(tuple(int(x) for x in img) for img in d["matrix"]),
        )

    @staticmethod
    def identity(G: FilteredAbelianGroup) -> FilteredHom:
        units = tuple(
            tuple(1 if jj == j else 0 for jj in range(G.num_factors)) for j in range(G.num_factors)
        )
        return FilteredHom(G, G, units)


def _level_generators(G: FilteredAbelianGroup, i: int) -> list[Residues]:
    gens = []
    for j, f in enumerate(G.factors):
        d = f.level_divisor(i)
        if d != f.modulus:
            gens.append(tuple(d if jj == j else 0 for jj in range(G.num_factors)))
    return gens


@dataclass(frozen=True)
class FibrationCertificate:
    """Levelwise surjectivity witnesses: per level, each target level
    generator as the image of a source level element."""

    hom: FilteredHom
    witnesses: tuple[tuple[tuple[Residues, Residues], ...], ...]

    @cached_property
    def _preimage_tables(self) -> list[dict[Residues, Residues]]:
        return [dict() for _ in range(max(self.hom.source.degree, self.hom.target.degree) + 2)]

    def canonical_preimage(self, a: Residues, level: int) -> Residues:
        """Least source element of the level-i subgroup mapping to a
        (mixed-radix element order); deterministic."""
        src = self.hom.source
        level = min(level, src.degree + 1)
        table = self._preimage_tables[level]
        if not table:
            if src.level_order(level) > 10**6:
                raise ParameterError("source level subgroup too large for preimage tabulation")
            for s in src.level_elements(level):
                table.setdefault(self.hom.apply(s), s)
        try:
            return table[a]
        except KeyError:
            raise CertificateError(f"certified level {level} has no preimage of {a}") from None


def is_filtered_surjection(phi: FilteredHom) -> FibrationCertificate:
    """Certificate that phi(source level i) = target level i for every level,
    or NotFibrationError naming the first level that breaks."""
    src, tgt = phi.source, phi.target
    moduli = list(tgt.moduli)
    top = max(src.degree, tgt.degree) + 1
    witness_levels = []
    for i in range(top + 1):
        image_gens = [list(phi.apply(g)) for g in _level_generators(src, min(i, src.degree + 1))]
        target_gens = [list(g) for g in _level_generators(tgt, min(i, tgt.degree + 1))]
        if not linalg.subgroups_equal(image_gens, target_gens, moduli):
            raise NotFibrationError(i)
        pairs = []
        src_gens = _level_generators(src, min(i, src.degree + 1))
        for tg in target_gens:
            coeffs = linalg.solve_congruence(image_gens, tg, moduli)
            if coeffs is None:
                raise NotFibrationError(i)
            s = src.zero
            for cj, sg in zip(coeffs, src_gens):
                s = src.add(s, src.scalar_mul(cj, sg))
            pairs.append((tuple(tg), s))
        witness_levels.append(tuple(pairs))
    return FibrationCertificate(phi, tuple(witness_levels))


def verify_fibration_cubewise(
    phi: FilteredHom,
    n_max: int,
    budget: int = 10**6,
    samples: int = 200,
    seed: int = 0,
) -> MorphismVerdict:
    """Relative corner completion by enumeration: every target cube over the
    image of a completable source corner lifts to a source completion."""
    src, tgt = phi.source, phi.target
    rng = Random(seed)
    checked = 0
    exhaustive = True
    for m in range(1, n_max + 1):
        total = cube_count(m, src)
        if total <= budget:
            cube_iter = enumerate_cubes(m, src, budget=budget)
        else:
            exhaustive = False
            starts = sorted(rng.sample(range(total), min(samples, total)))
            cube_iter = (next(enumerate_cubes(m, src, start=s, stop=s + 1)) for s in starts)
        seen: set = set()
        for q in cube_iter:
            corner_vals = q.values[:-1]
            if corner_vals in seen:
                continue
            seen.add(corner_vals)
            corner = CornerMap(src, m, corner_vals)
            source_tops = corner_completions(corner, src)
            image_tops = {phi.apply(t) for t in source_tops}
            target_corner = CornerMap(tgt, m, tuple(phi.apply(v) for v in corner_vals))
            for t in corner_completions(target_corner, tgt):
                checked += 1
                if t not in image_tops:
                    return MorphismVerdict(False, exhaustive, checked, witness=(m, corner_vals, t))
    return MorphismVerdict(True, exhaustive, checked)


def covering_onto(X: FilteredAbelianGroup, p: int, k: int) -> FilteredHom:
    """A filtered surjection onto X from a minimal H-truncation: one
    building-block factor per X factor, matched by filtration shape.

    Supported targets are factorwise quotients of the building blocks;
    anything else raises UnsupportedTargetError (no attempt at the general
    nonconstructive covering).
    """
    if X.p != p:
        raise UnsupportedTargetError(f"target has p={X.p}, requested p={p}")
    try:
        X_k = X.regrade(k)
    except ParameterError as exc:
        raise UnsupportedTargetError(f"target is not a degree-{k} group: {exc}") from exc
    src_factors = []
    action = []
    for j, f in enumerate(X_k.factors):
        ell = quotient_pattern_ell(f, p, k)
        if ell is None:
            raise UnsupportedTargetError(f"factor {j} matches no building-block quotient pattern")
        src_factors.append(make_cf_group(p, k, ell).factors[0])
        action.append(tuple(1 if jj == j else 0 for jj in range(X_k.num_factors)))
    source = FilteredAbelianGroup(p, k, tuple(src_factors))
    phi = FilteredHom(source, X_k, tuple(action))
    is_filtered_surjection(phi)  # guaranteed by construction; fail loudly if not
    return phi


def lift_morphism(cert: FibrationCertificate, f: PolyMap) -> PolyMap:
    """g with phi o g = f: lift each Taylor coefficient to the canonical
    preimage at its level, reconstruct over the box, restrict to the
    fundamental domain."""
    phi = cert.hom
    if f.group.moduli != phi.target.moduli:
        raise GroupMismatchError("polymap does not live in the hom's target")
    form = taylor_expand(f)
    lifted = tuple(
        (alpha, cert.canonical_preimage(a, sum(alpha))) for alpha, a in form.coeffs
    )
    g = restrict_to_fundamental_domain(TaylorForm(phi.source, f.n, lifted), f.p, validate=False)
    if phi.apply_poly(g).table != f.table:
        raise CertificateError("lift does not project back onto the input")
    return g


def lift_morphism_box(cert: FibrationCertificate, f: PolyMap) -> PolyMap:
    """Box-inductive oracle for lift_morphism: walk the fundamental domain in
    graded order, pinning each new point's top box difference to the canonical
    preimage of the target's difference. Agrees with the Taylor lift; cost
    grows quickly with rank, intended for rank <= 2 cross-checks."""
    phi = cert.hom
    src = phi.source
    p, n = f.p, f.n
    values: dict[tuple[int, ...], Residues] = {}
    for x in sorted(fp_points(p, n), key=lambda z: (sum(z), z)):
        target_diff = f.group.zero
        for beta in product(*(range(xi + 1) for xi in x)):
            w = 1
            for xi, bi in zip(x, beta):
                w *= math.comb(xi, bi)
            term = f.group.scalar_mul(w, f.value(beta))
            if (sum(x) - sum(beta)) & 1:
                target_diff = f.group.sub(target_diff, term)
            else:
                target_diff = f.group.add(target_diff, term)
        lifted = cert.canonical_preimage(target_diff, sum(x))
        acc = lifted
        for beta in product(*(range(xi + 1) for xi in x)):
            if beta == x:
                continue
            w = 1
            for xi, bi in zip(x, beta):
                w *= math.comb(xi, bi)
            term = src.scalar_mul(w, values[beta])
            if (sum(x) - sum(beta)) & 1:
                acc = src.add(acc, term)
            else:
                acc = src.sub(acc, term)
        # acc = lifted - sum_{beta<x} (-1)^{|x-beta|} binom(x,beta) g(beta)
        values[x] = acc
    table = tuple(values[z] for z in fp_points(p, n))
    return PolyMap(src, n, table)
