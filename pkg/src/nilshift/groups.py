"""Exact arithmetic for finite filtered abelian p-groups.

Elements are plain tuples of residues (one per cyclic factor, canonical
representatives in [0, p^m)); all structure lives on the group object.
Filtration subgroups are stored intensionally as exponent vectors, so
membership is O(#factors) and everything stays exact and hashable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from random import Random
from typing import Iterator

Residues = tuple[int, ...]
FpPoint = tuple[int, ...]


class ParameterError(ValueError):
    """A constructor argument violates its precondition."""


class GroupMismatchError(ValueError):
    """Operands belong to different groups or have the wrong shape."""


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class CyclicFactor:
    """One cyclic factor Z/p^m with filtration exponents e_0..e_{k+1}.

    The level-i subgroup is p^{e_i} * (Z/p^m); e_{k+1} >= m so the top
    level is trivial.
    """

    p: int
    m: int
    filt_exp: tuple[int, ...]

    def __post_init__(self) -> None:
        if not is_prime(self.p):
            raise ParameterError(f"p={self.p} is not prime")
        if self.m < 1:
            raise ParameterError(f"exponent m={self.m} must be >= 1")
        e = self.filt_exp
        if len(e) < 2:
            raise ParameterError("filt_exp must cover levels 0..k+1")
        if e[0] != 0:
            raise ParameterError("level-0 subgroup must be the whole group (e_0 = 0)")
        if any(e[i] > e[i + 1] for i in range(len(e) - 1)):
            raise ParameterError(f"filtration exponents must be nondecreasing, got {e}")
        if e[-1] < self.m:
            raise ParameterError(f"level k+1 must be trivial: e_(k+1)={e[-1]} < m={self.m}")

    @property
    def modulus(self) -> int:
        return self.p**self.m

    def level_divisor(self, i: int) -> int:
        """Divisibility test divisor for level i, clamped above the degree."""
        e = self.filt_exp[i] if i < len(self.filt_exp) else self.filt_exp[-1]
        return self.p ** min(e, self.m)


@dataclass(frozen=True)
class FilteredAbelianGroup:
    """A finite product of cyclic p-groups with a degree-k filtration."""

    p: int
    degree: int
    factors: tuple[CyclicFactor, ...]

    def __post_init__(self) -> None:
        if not is_prime(self.p):
            raise ParameterError(f"p={self.p} is not prime")
        if self.degree < 0:
            raise ParameterError("degree must be >= 0")
        for f in self.factors:
            if f.p != self.p:
                raise ParameterError("all factors must share the same prime")
            if len(f.filt_exp) != self.degree + 2:
                raise ParameterError(
                    f"factor stores {len(f.filt_exp)} levels, expected degree+2={self.degree + 2}"
                )

    # -- element plumbing ------------------------------------------------

    @property
    def num_factors(self) -> int:
        return len(self.factors)

    @property
    def moduli(self) -> tuple[int, ...]:
        return tuple(f.modulus for f in self.factors)

    @property
    def order(self) -> int:
        n = 1
        for f in self.factors:
            n *= f.modulus
        return n

    @property
    def zero(self) -> Residues:
        return (0,) * len(self.factors)

    def is_trivial(self) -> bool:
        return self.order == 1

    def validate_element(self, g: Residues) -> None:
        if len(g) != len(self.factors):
            raise GroupMismatchError(f"element has {len(g)} residues, group has {len(self.factors)} factors")
        for x, f in zip(g, self.factors):
            if not 0 <= x < f.modulus:
                raise GroupMismatchError(f"residue {x} out of range for Z/{f.modulus}")

    def add(self, a: Residues, b: Residues) -> Residues:
        return tuple((x + y) % f.modulus for x, y, f in zip(a, b, self.factors))

    def sub(self, a: Residues, b: Residues) -> Residues:
        return tuple((x - y) % f.modulus for x, y, f in zip(a, b, self.factors))

    def neg(self, a: Residues) -> Residues:
        return tuple((-x) % f.modulus for x, f in zip(a, self.factors))

    def scalar_mul(self, c: int, a: Residues) -> Residues:
        return tuple((c * x) % f.modulus for x, f in zip(a, self.factors))

    def element_index(self, g: Residues) -> int:
        """Mixed-radix index in [0, |G|); also the canonical element order."""
        idx = 0
        for x, f in zip(reversed(g), reversed(self.factors)):
            idx = idx * f.modulus + x
        return idx

    def element_at(self, idx: int) -> Residues:
        out = []
        for f in self.factors:
            idx, r = divmod(idx, f.modulus)
            out.append(r)
        return tuple(out)

    def elements(self) -> Iterator[Residues]:
        for i in range(self.order):
            yield self.element_at(i)

    # -- filtration ------------------------------------------------------

    def level_divisors(self, i: int) -> tuple[int, ...]:
        """Per-factor divisors for level i; i past degree+1 clamps to trivial."""
        return tuple(f.level_divisor(i) for f in self.factors)

    def subgroup_member(self, g: Residues, i: int) -> bool:
        if not 0 <= i <= self.degree + 1:
            raise ParameterError(f"level {i} out of range [0, {self.degree + 1}]")
        return all(x % d == 0 for x, d in zip(g, self.level_divisors(i)))

    def filtration_level(self, g: Residues) -> int:
        """Largest i <= degree+1 with g in the level-i subgroup."""
        level = 0
        for i in range(1, self.degree + 2):
            if all(x % d == 0 for x, d in zip(g, self.level_divisors(i))):
                level = i
            else:
                break
        return level

    def level_order(self, i: int) -> int:
        n = 1
        for f in self.factors:
            n *= f.modulus // f.level_divisor(i)
        return n

    def level_element_at(self, i: int, idx: int) -> Residues:
        out = []
        for f in self.factors:
            d = f.level_divisor(i)
            idx, r = divmod(idx, f.modulus // d)
            out.append(r * d)
        return tuple(out)

    def level_elements(self, i: int) -> Iterator[Residues]:
        for idx in range(self.level_order(i)):
            yield self.level_element_at(i, idx)

    # -- sampling, regrading, serialization --------------------------------

    def uniform_sample(self, rng: Random | int) -> Residues:
        """One uniform element; pass a Random for a deterministic stream."""
        if isinstance(rng, int):
            rng = Random(rng)
        return tuple(rng.randrange(f.modulus) for f in self.factors)

    def regrade(self, new_degree: int) -> FilteredAbelianGroup:
        """Same group with the filtration read at a different degree.

        Raising the degree pads with trivial levels; lowering requires the
        dropped levels to be trivial already.
        """
        if new_degree == self.degree:
            return self
        factors = []
        for f in self.factors:
            if new_degree > self.degree:
                exps = f.filt_exp[:-1] + (f.filt_exp[-1],) * (new_degree - self.degree + 1)
            else:
                if any(e < f.m for e in f.filt_exp[new_degree + 1 :]):
                    raise ParameterError(f"cannot lower degree to {new_degree}: dropped levels are not trivial")
                exps = f.filt_exp[: new_degree + 2]
            factors.append(CyclicFactor(f.p, f.m, exps))
        return FilteredAbelianGroup(self.p, new_degree, tuple(factors))

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "k": self.degree,
            "factors": [{"m": f.m, "filt_exp": list(f.filt_exp)} for f in self.factors],
        }

    @staticmethod
    def from_dict(d: dict) -> FilteredAbelianGroup:
        try:
            p, k = int(d["p"]), int(d["k"])
            factors = tuple(
                CyclicFactor(p, int(f["m"]), tuple(int(e) for e in f["filt_exp"])) for f in d["factors"]
            )
        except (KeyError, TypeError) as exc:
            raise ParameterError(f"malformed group descriptor: {exc}") from exc
        return FilteredAbelianGroup(p, k, factors)


def make_cf_group(p: int, k: int, ell: int) -> FilteredAbelianGroup:
    """The single-factor building block: Z/p^m with m = floor((k-ell)/(p-1))+1.

    Levels are the whole group through ell, then p^{floor((i-ell-1)/(p-1))+1}
    times the group, trivial past the degree.
    """
    if not is_prime(p):
        raise ParameterError(f"p={p} is not prime")
    if not 1 <= ell <= k:
        raise ParameterError(f"ell={ell} outside [1, k={k}]")
    m = (k - ell) // (p - 1) + 1
    exps = tuple(0 if i <= ell else min(m, (i - ell - 1) // (p - 1) + 1) for i in range(k + 2))
    return FilteredAbelianGroup(p, k, (CyclicFactor(p, m, exps),))


def make_hpk_truncation(p: int, k: int, widths: list[int] | tuple[int, ...]) -> FilteredAbelianGroup:
    """Finite truncation of the universal space: widths[ell-1] copies of the
    ell-th building block, for ell = 1..k, with the levelwise product filtration."""
    if len(widths) != k:
        raise ParameterError(f"need k={k} widths c_1..c_k, got {len(widths)}")
    if any(c < 0 for c in widths):
        raise ParameterError("widths must be >= 0")
    factors: list[CyclicFactor] = []
    for ell, c in enumerate(widths, start=1):
        factors.extend(make_cf_group(p, k, ell).factors * c)
    return FilteredAbelianGroup(p, k, tuple(factors))


def quotient_pattern_ell(factor: CyclicFactor, p: int, k: int) -> int | None:
    """The smallest ell whose degree-k building block has this factor as a
    quotient (levels p^min(e_i, m')), or None outside the supported class."""
    if len(factor.filt_exp) != k + 2 or factor.p != p:
        return None
    for ell in range(1, k + 1):
        pattern = make_cf_group(p, k, ell).factors[0]
        if factor.m > pattern.m:
            continue
        if all(factor.level_divisor(i) == p ** min(pattern.filt_exp[i], factor.m) for i in range(k + 2)):
            return ell
    return None


def is_p_homogeneous_pattern(G: FilteredAbelianGroup) -> bool:
    """Every factor is a quotient of a building block: the constructive class
    on which the fundamental-domain correspondence is used."""
    return all(quotient_pattern_ell(f, G.p, G.degree) is not None for f in G.factors)


def parse_group_arg(text: str) -> FilteredAbelianGroup:
    """Parse a CLI group spec: inline JSON, "cf:p,k,l" or "hpk:p,k,c1,..,ck"."""
    text = text.strip()
    if text.startswith("{"):
        return FilteredAbelianGroup.from_dict(json.loads(text))
    if text.startswith("cf:"):
        parts = [int(x) for x in text[3:].split(",")]
        if len(parts) != 3:
            raise ParameterError(f"cf spec needs p,k,l: {text!r}")
        return make_cf_group(*parts)
    if text.startswith("hpk:"):
        parts = [int(x) for x in text[4:].split(",")]
        if len(parts) < 2:
            raise ParameterError(f"hpk spec needs p,k,c1..ck: {text!r}")
        p, k, widths = parts[0], parts[1], parts[2:]
        return make_hpk_truncation(p, k, widths)
    raise ParameterError(f"unrecognized group spec {text!r}")


# -- F_p^n point helpers -------------------------------------------------
# Point index convention: coordinate j contributes digit p^j, so tables are
# ordered 00, 10, 01, 11, ... when points are written coordinate-first.


def fp_index(z: FpPoint, p: int) -> int:
    idx = 0
    for c in reversed(z):
        idx = idx * p + c
    return idx


def fp_point(idx: int, p: int, n: int) -> FpPoint:
    out = []
    for _ in range(n):
        idx, r = divmod(idx, p)
        out.append(r)
    return tuple(out)


def fp_points(p: int, n: int) -> Iterator[FpPoint]:
    for idx in range(p**n):
        yield fp_point(idx, p, n)


def fp_add(a: FpPoint, b: FpPoint, p: int) -> FpPoint:
    return tuple((x + y) % p for x, y in zip(a, b))


def fp_unit(j: int, n: int) -> FpPoint:
    return tuple(1 if i == j else 0 for i in range(n))
