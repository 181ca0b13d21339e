# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled enumeration kernels; contracts match nilshift._kernels_py."""

from libc.stdlib cimport free, malloc


cdef long long* _alloc(Py_ssize_t count) except NULL:
    cdef long long* buf = <long long*> malloc(count * sizeof(long long))
    if buf == NULL:
        raise MemoryError()
    return buf


cdef long long* _from_seq(seq) except NULL:
    cdef Py_ssize_t i, count = len(seq)
    cdef long long* buf = _alloc(count)
    for i in range(count):
        buf[i] = seq[i]
    return buf


cdef inline long long _mod(long long a, long long m) nogil:
    a = a % m
    if a < 0:
        a += m
    return a


cdef inline int _popcount(long long v) nogil:
    cdef int c = 0
    while v:
        c += <int> (v & 1)
        v >>= 1
    return c


cdef void _moebius_inplace(long long* buf, int n, int nf, long long* mods) nogil:
    cdef int b, j
    cdef long long v, bit, nverts = 1 << n
    cdef Py_ssize_t base, prev
    for b in range(n):
        bit = 1 << b
        for v in range(nverts):
            if v & bit:
                base = v * nf
                prev = (v ^ bit) * nf
                for j in range(nf):
                    buf[base + j] = _mod(buf[base + j] - buf[prev + j], mods[j])


cdef void _zeta_inplace(long long* buf, int n, int nf, long long* mods) nogil:
    cdef int b, j
    cdef long long v, bit, nverts = 1 << n
    cdef Py_ssize_t base, prev
    for b in range(n):
        bit = 1 << b
        for v in range(nverts):
            if v & bit:
                base = v * nf
                prev = (v ^ bit) * nf
                for j in range(nf):
                    buf[base + j] = _mod(buf[base + j] + buf[prev + j], mods[j])


cdef long long _hk_violation_buf(long long* vals, int n, int nf, long long* mods,
                                 long long* level_div, int max_level,
                                 long long* scratch) nogil:
    cdef long long v, nverts = 1 << n
    cdef int j, lvl
    cdef Py_ssize_t i
    for i in range(nverts * nf):
        scratch[i] = vals[i]
    _moebius_inplace(scratch, n, nf, mods)
    for v in range(nverts):
        lvl = _popcount(v)
        if lvl > max_level:
            lvl = max_level
        for j in range(nf):
            if scratch[v * nf + j] % level_div[lvl * nf + j] != 0:
                return v
    return -1


def moebius_transform(values, int n, int nf, moduli):
    cdef long long* buf = _from_seq(values)
    cdef long long* mods = _from_seq(moduli)
    try:
        _moebius_inplace(buf, n, nf, mods)
        return [buf[i] for i in range((1 << n) * nf)]
    finally:
        free(buf)
        free(mods)


def zeta_transform(coeff, int n, int nf, moduli):
    cdef long long* buf = _from_seq(coeff)
    cdef long long* mods = _from_seq(moduli)
    try:
        _zeta_inplace(buf, n, nf, mods)
        return [buf[i] for i in range((1 << n) * nf)]
    finally:
        free(buf)
        free(mods)


def hk_violation(values, int n, int nf, moduli, level_div, int max_level):
    cdef long long* vals = _from_seq(values)
    cdef long long* mods = _from_seq(moduli)
    cdef long long* ldiv = _from_seq(level_div)
    cdef long long* scratch = _alloc((1 << n) * nf)
    try:
        return _hk_violation_buf(vals, n, nf, mods, ldiv, max_level, scratch)
    finally:
        free(vals)
        free(mods)
        free(ldiv)
        free(scratch)


def hk_cube_indices_brute(int n, int nf, moduli, level_div, int max_level):
    cdef Py_ssize_t slots = (1 << n) * nf
    cdef long long* mods = _from_seq(moduli)
    cdef long long* ldiv = _from_seq(level_div)
    cdef long long* vals = _alloc(slots)
    cdef long long* smods = _alloc(slots)
    cdef long long* scratch = _alloc(slots)
    cdef Py_ssize_t s
    cdef long long idx = 0
    out = []
    for s in range(slots):
        vals[s] = 0
        smods[s] = mods[s % nf]
    try:
        while True:
            if _hk_violation_buf(vals, n, nf, mods, ldiv, max_level, scratch) < 0:
                out.append(idx)
            idx += 1
            s = 0
            while s < slots:
                vals[s] += 1
                if vals[s] < smods[s]:
                    break
                vals[s] = 0
                s += 1
            if s == slots:
                return out
    finally:
        free(mods)
        free(ldiv)
        free(vals)
        free(smods)
        free(scratch)


cdef long long* _shift_perm_table(int p, int n) except NULL:
    # perm[(g-1)*npts + x] = index of x + g, digitwise mod p
    cdef long long npts = 1
    cdef int i
    for i in range(n):
        npts *= p
    cdef long long* table = _alloc((npts - 1) * npts)
    cdef long long g, x, xx, gg, out, mult
    for g in range(1, npts):
        for x in range(npts):
            out = 0
            mult = 1
            xx = x
            gg = g
            for i in range(n):
                out += ((xx % p + gg % p) % p) * mult
                xx //= p
                gg //= p
                mult *= p
            table[(g - 1) * npts + x] = out
    return table


cdef int _deriv_descend(long long* cur, int order, long long npts, int p, int n, int nf,
                        long long* mods, long long* level_div, int max_level,
                        int max_order, long long* perms, long long* stack) nogil:
    cdef long long* nxt = stack + (order - 1) * npts * nf
    cdef long long g, x
    cdef int j, ok, lvl, r
    cdef Py_ssize_t xb, pb
    lvl = order
    if lvl > max_level:
        lvl = max_level
    for g in range(npts - 1):
        ok = 1
        for x in range(npts):
            xb = x * nf
            pb = perms[g * npts + x] * nf
            for j in range(nf):
                nxt[xb + j] = _mod(cur[pb + j] - cur[xb + j], mods[j])
                if nxt[xb + j] % level_div[lvl * nf + j] != 0:
                    ok = 0
        if not ok:
            return order
        if order < max_order:
            r = _deriv_descend(nxt, order + 1, npts, p, n, nf, mods, level_div,
                               max_level, max_order, perms, stack)
            if r >= 0:
                return r
    return -1


def derivative_violation(table, int p, int n, int nf, moduli, level_div,
                         int max_level, int max_order):
    cdef long long npts = 1
    cdef int i
    for i in range(n):
        npts *= p
    cdef long long* cur = _from_seq(table)
    cdef long long* mods = _from_seq(moduli)
    cdef long long* ldiv = _from_seq(level_div)
    cdef long long* perms = _shift_perm_table(p, n)
    cdef long long* stack = _alloc(max_order * npts * nf) if max_order > 0 else _alloc(1)
    try:
        if max_order < 1 or npts < 2:
            return -1
        return _deriv_descend(cur, 1, npts, p, n, nf, mods, ldiv, max_level,
                              max_order, perms, stack)
    finally:
        free(cur)
        free(mods)
        free(ldiv)
        free(perms)
        free(stack)


def morphism_table_indices_brute(int p, int n, int nf, moduli, level_div,
                                 int max_level, int max_order):
    cdef long long npts = 1
    cdef int i
    for i in range(n):
        npts *= p
    cdef Py_ssize_t slots = npts * nf
    cdef long long* mods = _from_seq(moduli)
    cdef long long* ldiv = _from_seq(level_div)
    cdef long long* vals = _alloc(slots)
    cdef long long* smods = _alloc(slots)
    cdef long long* perms = _shift_perm_table(p, n)
    cdef long long* stack = _alloc(max_order * slots) if max_order > 0 else _alloc(1)
    cdef Py_ssize_t s
    cdef long long idx = 0
    cdef int bad
    out = []
    for s in range(slots):
        vals[s] = 0
        smods[s] = mods[s % nf]
    try:
        while True:
            if max_order < 1 or npts < 2:
                bad = -1
            else:
                bad = _deriv_descend(vals, 1, npts, p, n, nf, mods, ldiv,
                                     max_level, max_order, perms, stack)
            if bad < 0:
                out.append(idx)
            idx += 1
            s = 0
            while s < slots:
                vals[s] += 1
                if vals[s] < smods[s]:
                    break
                vals[s] = 0
                s += 1
            if s == slots:
                return out
    finally:
        free(mods)
        free(ldiv)
        free(vals)
        free(smods)
        free(perms)
        free(stack)
