"""Exact integer row reduction for subgroup tests in finite abelian p-groups.

Subgroups of Z/m_1 x ... x Z/m_t correspond to integer lattices between the
modulus lattice and Z^t; Hermite normal form gives a canonical generator set,
so subgroup equality is HNF equality and membership is triangular solving.
"""

from __future__ import annotations


def row_hnf(rows: list[list[int]]) -> list[list[int]]:
    """Canonical row Hermite normal form; zero rows dropped."""
    H, _ = row_hnf_transform(rows)
    return H


def row_hnf_transform(rows: list[list[int]]) -> tuple[list[list[int]], list[list[int]]]:
    """Returns (H, U) with U unimodular, U * rows = H padded with zero rows.

    H keeps only the nonzero rows; U keeps the matching transform rows.
    """
    M = [list(r) for r in rows]
    nrows = len(M)
    ncols = len(M[0]) if M else 0
    U = [[1 if i == j else 0 for j in range(nrows)] for i in range(nrows)]
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if M[i][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        U[r], U[piv] = U[piv], U[r]
        for i in range(r + 1, nrows):
            while M[i][c]:
                q = M[r][c] // M[i][c]
                M[r] = [a - q * b for a, b in zip(M[r], M[i])]
                U[r] = [a - q * b for a, b in zip(U[r], U[i])]
                M[r], M[i] = M[i], M[r]
                U[r], U[i] = U[i], U[r]
        if M[r][c] < 0:
            M[r] = [-a for a in M[r]]
            U[r] = [-a for a in U[r]]
        for i in range(r):
            q = M[i][c] // M[r][c]
            if q:
                M[i] = [a - q * b for a, b in zip(M[i], M[r])]
                U[i] = [a - q * b for a, b in zip(U[i], U[r])]
        r += 1
        if r == nrows:
            break
    return M[:r], U[:r]


def _lattice_rows(gens: list[list[int]], moduli: list[int]) -> list[list[int]]:
    t = len(moduli)
    rows = [list(g) for g in gens]
    rows += [[moduli[j] if i == j else 0 for j in range(t)] for i in range(t)]
    return rows


def subgroups_equal(gens_a: list[list[int]], gens_b: list[list[int]], moduli: list[int]) -> bool:
    """Do two generator sets span the same subgroup of prod Z/m_j?"""
    return row_hnf(_lattice_rows(gens_a, moduli)) == row_hnf(_lattice_rows(gens_b, moduli))


def solve_congruence(gens: list[list[int]], target: list[int], moduli: list[int]) -> list[int] | None:
    """Integer coefficients x with sum x_j gens_j = target (mod moduli), or None."""
    rows = _lattice_rows(gens, moduli)
    H, U = row_hnf_transform(rows)
    t = list(target)
    y = [0] * len(H)
    for r, row in enumerate(H):
        c = next(j for j, a in enumerate(row) if a)
        if t[c] % row[c]:
            return None
        y[r] = t[c] // row[c]
        t = [a - y[r] * b for a, b in zip(t, row)]
    if any(t):
        return None
    x = [0] * len(rows)
    for r, yr in enumerate(y):
        if yr:
            x = [a + yr * b for a, b in zip(x, U[r])]
    return x[: len(gens)]
