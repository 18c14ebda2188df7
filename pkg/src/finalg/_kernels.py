"""Compiled inner loops for relation compatibility checks and closures.

All kernels work on flat operation tables (int32, row-major, first argument
most significant) and pair lists given as two parallel int64 arrays.  Image
pairs are marked in a bitmap of size*size bits packed into int64 words.

Semi-naive convention: a tuple of pair indices is enumerated only if at
least one index is >= start, so appending newly discovered pairs at the end
of the arrays and passing the previous length as start visits exactly the
tuples that touch the frontier.

The arity-4 "sym" kernels enumerate multisets (sorted index tuples) and are
valid only for operations invariant under all argument permutations; the
caller is responsible for checking symmetry.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def img1(tab, s, pa, pb, start, out):
    n = len(pa)
    for i in range(max(start, 0), n):
        x = tab[pa[i]]
        y = tab[pb[i]]
        p = x * s + y
        out[p >> 6] |= np.int64(1) << np.int64(p & 63)


@njit(cache=True)
def img2(tab, s, pa, pb, start, out):
    n = len(pa)
    for i in range(n):
        jlo = start if i < start else 0
        for j in range(jlo, n):
            x = tab[pa[i] * s + pa[j]]
            y = tab[pb[i] * s + pb[j]]
            p = x * s + y
            out[p >> 6] |= np.int64(1) << np.int64(p & 63)


@njit(cache=True)
def img3(tab, s, pa, pb, start, out):
    n = len(pa)
    for i in range(n):
        for j in range(n):
            klo = start if (i < start and j < start) else 0
            for k in range(klo, n):
                x = tab[(pa[i] * s + pa[j]) * s + pa[k]]
                y = tab[(pb[i] * s + pb[j]) * s + pb[k]]
                p = x * s + y
                out[p >> 6] |= np.int64(1) << np.int64(p & 63)


@njit(cache=True)
def img4(tab, s, pa, pb, start, out):
    n = len(pa)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                llo = start if (i < start and j < start and k < start) else 0
                for l in range(llo, n):
                    x = tab[((pa[i] * s + pa[j]) * s + pa[k]) * s + pa[l]]
                    y = tab[((pb[i] * s + pb[j]) * s + pb[k]) * s + pb[l]]
                    p = x * s + y
                    out[p >> 6] |= np.int64(1) << np.int64(p & 63)


@njit(cache=True)
def img4_sym(tab, s, pa, pb, start, out):
    n = len(pa)
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                llo = k if k >= start else start
                for l in range(llo, n):
                    x = tab[((pa[i] * s + pa[j]) * s + pa[k]) * s + pa[l]]
                    y = tab[((pb[i] * s + pb[j]) * s + pb[k]) * s + pb[l]]
                    p = x * s + y
                    out[p >> 6] |= np.int64(1) << np.int64(p & 63)


@njit(cache=True)
def rowkeys4_sym(pxm, pym, start, full, s1, s0, hk1, hk2, hused, out1, out2, nkeys):
    """Distinct last-argument row maps of a symmetric 4-ary packed operation.

    Enumerates sorted triples (i <= j <= k, k >= start) of pair indices and
    evaluates the partial DNF of the fixed arguments on both coordinates,
    giving the row map a -> (a & F1) | (~a & F0) encoded as F1 << 32 | F0
    per coordinate.  New (k1, k2) keys are recorded through an open-address
    hash table (hk1/hk2/hused, power-of-two size) and appended to out1/out2
    starting at nkeys.  Returns the new key count, or -1 if out overflows.

    s1/s0 are the 3-bit fixed-argument patterns of the minterms whose last
    bit is 1/0; pattern bit 2 selects the first fixed argument."""
    n = len(pxm)
    cap = len(out1)
    count = nkeys
    hmask = np.int64(len(hk1) - 1)
    c1 = np.uint64(0x9E3779B97F4A7C15)
    c2 = np.uint64(0xC2B2AE3D27D4EB4F)
    sh = np.uint64(32)
    for k in range(start, n):
        xk = pxm[k]
        yk = pym[k]
        for j in range(k + 1):
            xj = pxm[j]
            yj = pym[j]
            # partial DNF over (j, k); the first fixed argument is folded in
            # the inner loop as F = (xi & a) | (~xi & b)
            a1x = np.uint64(0)
            b1x = np.uint64(0)
            a1y = np.uint64(0)
            b1y = np.uint64(0)
            for t in s1:
                wx = xj if t & 2 else full ^ xj
                wy = yj if t & 2 else full ^ yj
                wx &= xk if t & 1 else full ^ xk
                wy &= yk if t & 1 else full ^ yk
                if t & 4:
                    a1x |= wx
                    a1y |= wy
                else:
                    b1x |= wx
                    b1y |= wy
            a0x = np.uint64(0)
            b0x = np.uint64(0)
            a0y = np.uint64(0)
            b0y = np.uint64(0)
            for t in s0:
                wx = xj if t & 2 else full ^ xj
                wy = yj if t & 2 else full ^ yj
                wx &= xk if t & 1 else full ^ xk
                wy &= yk if t & 1 else full ^ yk
                if t & 4:
                    a0x |= wx
                    a0y |= wy
                else:
                    b0x |= wx
                    b0y |= wy
            for i in range(j + 1):
                xi = pxm[i]
                yi = pym[i]
                nxi = full ^ xi
                nyi = full ^ yi
                k1 = (((xi & a1x) | (nxi & b1x)) << sh) | (xi & a0x) | (nxi & b0x)
                k2 = (((yi & a1y) | (nyi & b1y)) << sh) | (yi & a0y) | (nyi & b0y)
                h = np.int64((k1 * c1) ^ (k2 * c2)) & hmask
                while True:
                    if hused[h] == 0:
                        if count >= cap:
                            return -1
                        hused[h] = 1
                        hk1[h] = k1
                        hk2[h] = k2
                        out1[count] = k1
                        out2[count] = k2
                        count += 1
                        break
                    if hk1[h] == k1 and hk2[h] == k2:
                        break
                    h = (h + 1) & hmask
    return count


@njit(cache=True)
def viol1(tab, s, pa, pb, rbits):
    for i in range(len(pa)):
        x = tab[pa[i]]
        y = tab[pb[i]]
        p = x * s + y
        if not (rbits[p >> 6] >> np.int64(p & 63)) & 1:
            return i
    return -1


@njit(cache=True)
def viol2(tab, s, pa, pb, rbits):
    n = len(pa)
    for i in range(n):
        for j in range(n):
            x = tab[pa[i] * s + pa[j]]
            y = tab[pb[i] * s + pb[j]]
            p = x * s + y
            if not (rbits[p >> 6] >> np.int64(p & 63)) & 1:
                return i * n + j
    return -1


@njit(cache=True)
def viol3(tab, s, pa, pb, rbits):
    n = len(pa)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                x = tab[(pa[i] * s + pa[j]) * s + pa[k]]
                y = tab[(pb[i] * s + pb[j]) * s + pb[k]]
                p = x * s + y
                if not (rbits[p >> 6] >> np.int64(p & 63)) & 1:
                    return (i * n + j) * n + k
    return -1


@njit(cache=True)
def viol4(tab, s, pa, pb, rbits):
    n = len(pa)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    x = tab[((pa[i] * s + pa[j]) * s + pa[k]) * s + pa[l]]
                    y = tab[((pb[i] * s + pb[j]) * s + pb[k]) * s + pb[l]]
                    p = x * s + y
                    if not (rbits[p >> 6] >> np.int64(p & 63)) & 1:
                        return ((i * n + j) * n + k) * n + l
    return -1


@njit(cache=True)
def viol4_sym(tab, s, pa, pb, rbits):
    n = len(pa)
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                for l in range(k, n):
                    x = tab[((pa[i] * s + pa[j]) * s + pa[k]) * s + pa[l]]
                    y = tab[((pb[i] * s + pb[j]) * s + pb[k]) * s + pb[l]]
                    p = x * s + y
                    if not (rbits[p >> 6] >> np.int64(p & 63)) & 1:
                        return ((i * n + j) * n + k) * n + l
    return -1
