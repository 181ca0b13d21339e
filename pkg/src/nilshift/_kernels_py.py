"""Pure-Python fallback for the hot enumeration kernels.

Same contracts as nilshift._kernels_cy; nilshift.kernels picks one at import.
Data comes in flat: a map {0,1}^n -> G is a list of 2^n * nf residues in
vertex-major order, a map F_p^n -> G a list of p^n * nf residues in
point-major order. level_div is a flat (max_level+1) * nf divisor table.
"""

from __future__ import annotations


def moebius_transform(values, n, nf, moduli):
    """Subset Moebius coefficients g_S of a vertex table, slot S = bitmask."""
    coeff = list(values)
    for b in range(n):
        bit = 1 << b
        for v in range(1 << n):
            if v & bit:
                base = v * nf
                prev = (v ^ bit) * nf
                for j in range(nf):
                    coeff[base + j] = (coeff[base + j] - coeff[prev + j]) % moduli[j]
    return coeff


def zeta_transform(coeff, n, nf, moduli):
    """Inverse of moebius_transform: q(v) = sum of g_S over S subset of v."""
    vals = list(coeff)
    for b in range(n):
        bit = 1 << b
        for v in range(1 << n):
            if v & bit:
                base = v * nf
                prev = (v ^ bit) * nf
                for j in range(nf):
                    vals[base + j] = (vals[base + j] + vals[prev + j]) % moduli[j]
    return vals


def hk_violation(values, n, nf, moduli, level_div, max_level):
    """First subset whose Moebius coefficient leaves its level, or -1."""
    coeff = moebius_transform(values, n, nf, moduli)
    for v in range(1 << n):
        row = min(v.bit_count(), max_level) * nf
        base = v * nf
        for j in range(nf):
            if coeff[base + j] % level_div[row + j]:
                return v
    return -1


def hk_cube_indices_brute(n, nf, moduli, level_div, max_level):
    """Mixed-radix indices of every Host-Kra cube among all |G|^(2^n) maps."""
    slots = (1 << n) * nf
    vals = [0] * slots
    mods = [moduli[s % nf] for s in range(slots)]
    out = []
    idx = 0
    while True:
        if hk_violation(vals, n, nf, moduli, level_div, max_level) < 0:
            out.append(idx)
        idx += 1
        s = 0
        while s < slots:
            vals[s] += 1
            if vals[s] < mods[s]:
                break
            vals[s] = 0
            s += 1
        if s == slots:
            return out


def _fp_add_index(x, g, p, n):
    out = 0
    mult = 1
    for _ in range(n):
        out += ((x % p + g % p) % p) * mult
        x //= p
        g //= p
        mult *= p
    return out


def _shift_perms(p, n):
    npts = p**n
    return [[_fp_add_index(x, g, p, n) for x in range(npts)] for g in range(1, npts)]


def derivative_violation(table, p, n, nf, moduli, level_div, max_level, max_order):
    """First order whose iterated difference leaves its level, or -1.

    Zero directions differentiate to the zero map and pass every level, so
    only nonzero directions are enumerated.
    """
    npts = p**n
    perms = _shift_perms(p, n)

    def descend(cur, order):
        row = min(order, max_level) * nf
        for perm in perms:
            nxt = [0] * (npts * nf)
            ok = True
            for x in range(npts):
                xb = x * nf
                pb = perm[x] * nf
                for j in range(nf):
                    d = (cur[pb + j] - cur[xb + j]) % moduli[j]
                    nxt[xb + j] = d
                    if d % level_div[row + j]:
                        ok = False
            if not ok:
                return order
            if order < max_order:
                r = descend(nxt, order + 1)
                if r >= 0:
                    return r
        return -1

    return descend(list(table), 1)


def morphism_table_indices_brute(p, n, nf, moduli, level_div, max_level, max_order):
    """Mixed-radix indices of every table passing the derivative test."""
    npts = p**n
    slots = npts * nf
    vals = [0] * slots
    mods = [moduli[s % nf] for s in range(slots)]
    out = []
    idx = 0
    while True:
        if derivative_violation(vals, p, n, nf, moduli, level_div, max_level, max_order) < 0:
            out.append(idx)
        idx += 1
        s = 0
        while s < slots:
            vals[s] += 1
            if vals[s] < mods[s]:
                break
            vals[s] = 0
            s += 1
        if s == slots:
            return out
