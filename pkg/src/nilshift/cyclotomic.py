"""Exact arithmetic with prime-power roots of unity.

Values are indices t meaning zeta^t with zeta = e(1/N), N = p^M. Sums of
roots are stored as integer/rational coordinate vectors in the power basis
of Q(zeta) reduced mod the cyclotomic polynomial of p^M. Ranks over Q(zeta)
are computed by expanding each root into its integer multiplication matrix
and taking a rational rank, so no floating point is ever involved.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache


@lru_cache(maxsize=None)
def _basis_table(p: int, M: int) -> tuple[tuple[int, ...], ...]:
    """Coordinates of zeta^t, t = 0..N-1, in the degree-d power basis.

    d = p^M - p^(M-1); the reduction rule is
    x^d = -(1 + x^{p^{M-1}} + ... + x^{(p-2) p^{M-1}}).
    """
    if M == 0:
        return ((1,),)
    N = p**M
    d = N - N // p
    step = N // p
    rows: list[tuple[int, ...]] = []
    cur = [0] * d
    cur[0] = 1
    rows.append(tuple(cur))
    for _ in range(1, N):
        top = cur[d - 1]
        nxt = [0] + cur[: d - 1]
        if top:
            for j in range(p - 1):
                nxt[j * step] -= top
        cur = nxt
        rows.append(tuple(cur))
    return tuple(rows)


def basis_degree(p: int, M: int) -> int:
    return 1 if M == 0 else p**M - p ** (M - 1)


@dataclass(frozen=True)
class CycValue:
    """An exact element of Q(zeta_{p^M}) in reduced power-basis coordinates."""

    p: int
    M: int
    coords: tuple[Fraction, ...]

    @staticmethod
    def zero(p: int, M: int) -> CycValue:
        return CycValue(p, M, (Fraction(0),) * basis_degree(p, M))

    @staticmethod
    def one(p: int, M: int) -> CycValue:
        d = basis_degree(p, M)
        return CycValue(p, M, (Fraction(1),) + (Fraction(0),) * (d - 1))

    @staticmethod
    def root(p: int, M: int, t: int) -> CycValue:
        N = 1 if M == 0 else p**M
        row = _basis_table(p, M)[t % N]
        return CycValue(p, M, tuple(Fraction(c) for c in row))

    @staticmethod
    def from_index_counts(p: int, M: int, counts: dict[int, int], denom: int = 1) -> CycValue:
        """(sum over t of counts[t] * zeta^t) / denom."""
        d = basis_degree(p, M)
        table = _basis_table(p, M)
        N = 1 if M == 0 else p**M
        acc = [0] * d
        for t, c in counts.items():
            row = table[t % N]
            for j in range(d):
                acc[j] += c * row[j]
        return CycValue(p, M, tuple(Fraction(a, denom) for a in acc))

    def __add__(self, other: CycValue) -> CycValue:
        return CycValue(self.p, self.M, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def scaled(self, c: Fraction) -> CycValue:
        return CycValue(self.p, self.M, tuple(a * c for a in self.coords))

    def is_one(self) -> bool:
        return self == CycValue.one(self.p, self.M)

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coords)

    def to_complex(self) -> complex:
        N = 1 if self.M == 0 else self.p**self.M
        return sum(
            float(a) * cmath.exp(2j * cmath.pi * j / N) for j, a in enumerate(self.coords) if a
        ) + 0j

    def to_jsonable(self) -> dict:
        return {
            "order": 1 if self.M == 0 else self.p**self.M,
            "coords": [[a.numerator, a.denominator] for a in self.coords],
        }


def rational_rank(rows: list[list[Fraction]]) -> int:
    """Rank over Q by exact Gaussian elimination."""
    M = [list(r) for r in rows]
    if not M:
        return 0
    ncols = len(M[0])
    rank = 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = 1 / M[rank][c]
        M[rank] = [a * inv for a in M[rank]]
        for i in range(len(M)):
            if i != rank and M[i][c] != 0:
                factor = M[i][c]
                M[i] = [a - factor * b for a, b in zip(M[i], M[rank])]
        rank += 1
        if rank == len(M):
            break
    return rank


def root_matrix_rank(entries: list[list[int]], p: int, M: int) -> int:
    """Rank over Q(zeta_{p^M}) of a matrix whose (i,j) entry is zeta^entries[i][j].

    Each root expands to its d x d integer multiplication matrix; the rank of
    the expanded rational matrix is d times the rank over the field.
    """
    d = basis_degree(p, M)
    table = _basis_table(p, M)
    N = 1 if M == 0 else p**M
    big: list[list[Fraction]] = []
    for row in entries:
        for s in range(d):
            big_row: list[Fraction] = []
            for t in row:
                big_row.extend(Fraction(c) for c in table[(t + s) % N])
            big.append(big_row)
    r = rational_rank(big)
    if r % d:
        raise AssertionError(f"expanded rank {r} not divisible by the field degree {d}")
    return r // d
