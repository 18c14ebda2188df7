"""Free algebras of finitely generated varieties, clone-level term searches,
and variety-level identity checks.

F(k) for the variety generated by A is realized as the subalgebra of
A^(A^k) generated by the k projections; an identity of the supported shapes
holds throughout the variety iff it holds in F(k) under the generic witness
assignment (chain generators x0..xn, each relation symbol generated by the
chain pairs of the positions where it occurs).

For a two-element base, value vectors of length 2^k <= 64 are packed into
single machine words and operations are evaluated bitwise from the
disjunctive normal form of their tables, which keeps F((C2,b), 5) with its
686 elements comfortably in range.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._kernels import rowkeys4_sym
from .core import Algebra, Term, table_index, term_to_str
from .dsl import (
    CheckResult,
    IdentityStatement,
    check_inclusion,
    expr_variables,
)
from .errors import InputError, ResourceError
from .relations import (
    BinRel,
    admissible_closure,
    all_congruences,
    compose,
    congruence_closure,
    congruence_lattice,
    meet,
    min_alternation,
    tolerance_closure,
)

MAX_FREE_ELEMENTS = 20000
MAX_FREE_TUPLES = 1 << 31
MAX_VIEW_TABLE = 1 << 26
MAX_CLONE_ARITY = 5
MAX_TUPLES_GUARD = 1 << 26
_CHUNK = 1 << 22


@dataclass
class FreeAlgebra:
    base: Algebra
    k: int
    size: int
    masks: Optional[np.ndarray]  # uint64 value vectors, packed path only
    vectors: Optional[list]  # tuple value vectors, generic path only
    generators: list[int]
    parents: list  # per element: var index (int) or (op_name, arg index tuple)
    view: Optional[Algebra]  # pointwise operations as tables, if within cap

    def witness(self, i: int) -> Term:
        p = self.parents[i]
        if isinstance(p, int):
            return p
        op, args = p
        return (op, tuple(self.witness(a) for a in args))

    def value(self, i: int, point: int) -> int:
        if self.masks is not None:
            return int((int(self.masks[i]) >> point) & 1)
        return self.vectors[i][point]

    def value_at(self, i: int, assignment) -> int:
        return self.value(i, table_index(self.base.size, assignment))

    def value_vector(self, i: int) -> tuple:
        npoints = self.base.size**self.k
        return tuple(self.value(i, p) for p in range(npoints))


def _minterms(op) -> list[int]:
    return [t for t in range(len(op.table)) if int(op.table[t]) == 1]


def _eval_dnf_packed(minterms, r, argmasks, full_mask):
    res = np.zeros_like(argmasks[0])
    for t in minterms:
        term = np.full_like(argmasks[0], full_mask)
        for j in range(r):
            a = argmasks[j]
            if (t >> (r - 1 - j)) & 1:
                term &= a
            else:
                term &= ~a
        res |= term
    return res & np.uint64(full_mask)


def _segments(m_old: int, m_new: int, r: int):
    """Axis ranges covering exactly the tuples touching indices >= m_old."""
    for pos in range(r):
        seg = [(0, m_old)] * pos + [(m_old, m_new)] + [(0, m_new)] * (r - pos - 1)
        if all(hi > lo for lo, hi in seg):
            yield seg


def _iter_tuples(seg, chunk=_CHUNK):
    sizes = [hi - lo for lo, hi in seg]
    total = 1
    for s in sizes:
        total *= s
    strides = []
    acc = 1
    for s in reversed(sizes):
        strides.append(acc)
        acc *= s
    strides.reverse()
    for lo_flat in range(0, total, chunk):
        flat = np.arange(lo_flat, min(lo_flat + chunk, total), dtype=np.int64)
        idx = [seg[j][0] + (flat // strides[j]) % sizes[j] for j in range(len(seg))]
        yield flat, idx


_FREE_CACHE: dict = {}


def free_algebra(a: Algebra, k: int, with_view: bool = True) -> FreeAlgebra:
    """The k-generated free algebra of the variety generated by a,
    constructed as the projection-generated subalgebra of a^(a^k).
    Results are memoized per algebra instance; the operation-table view is
    built whenever it fits the cap, regardless of with_view."""
    if k < 1:
        raise InputError(f"free algebra needs k >= 1, got {k}")
    key = (id(a), k)
    cached = _FREE_CACHE.get(key)
    if cached is not None:
        return cached[1]
    npoints = a.size**k
    if npoints > MAX_TUPLES_GUARD:
        raise ResourceError(f"value vectors of length {npoints} exceed cap")
    if a.size == 2 and npoints <= 64:
        fa = _free_packed(a, k, True)
    else:
        fa = _free_generic(a, k)
    _FREE_CACHE[key] = (a, fa)  # hold a so id() stays valid
    return fa


def _free_packed(a: Algebra, k: int, with_view: bool) -> FreeAlgebra:
    L = 2**k
    full = (1 << L) - 1
    gen_masks = []
    for j in range(k):
        m = 0
        for pt in range(L):
            if (pt >> (k - 1 - j)) & 1:
                m |= 1 << pt
        gen_masks.append(m)
    masks: list[int] = []
    index: dict[int, int] = {}
    parents: list = []
    generators = []
    for j, gm in enumerate(gen_masks):
        if gm not in index:
            index[gm] = len(masks)
            masks.append(gm)
            parents.append(j)
        generators.append(index[gm])

    ops = [(op.name, op.arity, _minterms(op)) for op in a.operations if op.arity >= 1]
    m_old = 0
    while True:
        m_new = len(masks)
        if m_new == m_old:
            break
        arr = np.array(masks, dtype=np.uint64)
        found: list[tuple[int, tuple[int, ...]]] = []  # (mask, arg tuple)
        for name, r, minterms in ops:
            if m_new**r - m_old**r > MAX_FREE_TUPLES:
                raise ResourceError(
                    f"free algebra generation pass for {name!r} exceeds tuple cap"
                )
            seen_this_op: set[int] = set()
            for seg in _segments(m_old, m_new, r):
                for _, idx in _iter_tuples(seg):
                    vals = _eval_dnf_packed(minterms, r, [arr[i] for i in idx], full)
                    uniq, first = np.unique(vals, return_index=True)
                    for v, fi in zip(uniq, first):
                        v = int(v)
                        if v in index or v in seen_this_op:
                            continue
                        seen_this_op.add(v)
                        found.append(
                            (v, (name, tuple(int(idx[j][fi]) for j in range(r))))
                        )
        m_old = m_new
        for v, parent in found:
            if v not in index:
                index[v] = len(masks)
                masks.append(v)
                parents.append(parent)
        if len(masks) > MAX_FREE_ELEMENTS:
            raise ResourceError(
                f"free algebra exceeds element cap {MAX_FREE_ELEMENTS}"
            )

    arr = np.array(masks, dtype=np.uint64)
    view = None
    if with_view and all(
        len(masks) ** op.arity <= MAX_VIEW_TABLE for op in a.operations
    ):
        view = _packed_view(a, arr, full, f"F({a.name},{k})")
    return FreeAlgebra(
        base=a,
        k=k,
        size=len(masks),
        masks=arr,
        vectors=None,
        generators=generators,
        parents=parents,
        view=view,
    )


def _packed_view(a: Algebra, arr: np.ndarray, full: int, name: str) -> Algebra:
    from .core import make_algebra, make_operation

    order = np.argsort(arr, kind="stable")
    sorted_masks = arr[order]
    m = len(arr)
    ops = []
    for op in a.operations:
        if op.arity == 0:
            raise InputError("nullary operations unsupported in free algebras")
        r = op.arity
        minterms = _minterms(op)
        table = np.empty(m**r, dtype=np.int64)
        for flat, idx in _iter_tuples([(0, m)] * r):
            vals = _eval_dnf_packed(minterms, r, [arr[i] for i in idx], full)
            pos = np.searchsorted(sorted_masks, vals)
            table[flat] = order[pos]
        ops.append(make_operation(op.name, r, table))
    return make_algebra(m, ops, name=name)


def _free_generic(a: Algebra, k: int) -> FreeAlgebra:
    npoints = a.size**k
    if npoints > 1 << 16:
        raise ResourceError("generic free-algebra path caps value vectors at 2^16")
    points = list(itertools.product(range(a.size), repeat=k))
    vectors: list[tuple] = []
    index: dict[tuple, int] = {}
    parents: list = []
    generators = []
    for j in range(k):
        vec = tuple(pt[j] for pt in points)
        if vec not in index:
            index[vec] = len(vectors)
            vectors.append(vec)
            parents.append(j)
        generators.append(index[vec])
    tabs = [
        (op.name, op.arity, op.table) for op in a.operations if op.arity >= 1
    ]
    m_old = 0
    while True:
        m_new = len(vectors)
        if m_new == m_old:
            break
        found = []
        for name, r, tab in tabs:
            if m_new**r > 1 << 22:
                raise ResourceError(
                    f"generic free algebra pass for {name!r} exceeds tuple cap"
                )
            seen: set[tuple] = set()
            for args in itertools.product(range(m_new), repeat=r):
                if all(x < m_old for x in args):
                    continue
                vec = tuple(
                    int(tab[table_index(a.size, [vectors[x][p] for x in args])])
                    for p in range(npoints)
                )
                if vec in index or vec in seen:
                    continue
                seen.add(vec)
                found.append((vec, (name, args)))
        m_old = m_new
        for vec, parent in found:
            if vec not in index:
                index[vec] = len(vectors)
                vectors.append(vec)
                parents.append(parent)
        if len(vectors) > MAX_FREE_ELEMENTS:
            raise ResourceError("free algebra exceeds element cap")
    view = None
    m = len(vectors)
    if all(m**op.arity <= 1 << 22 for op in a.operations):
        from .core import make_algebra, make_operation

        ops = []
        for name, r, tab in tabs:
            table = [
                index[
                    tuple(
                        int(tab[table_index(a.size, [vectors[x][p] for x in args])])
                        for p in range(npoints)
                    )
                ]
                for args in itertools.product(range(m), repeat=r)
            ]
            ops.append(make_operation(name, r, table))
        view = make_algebra(m, ops, name=f"F({a.name},{k})")
    return FreeAlgebra(
        base=a,
        k=k,
        size=m,
        masks=None,
        vectors=vectors,
        generators=generators,
        parents=parents,
        view=view,
    )


# ---------------------------------------------------------------------------
# Term searches over the clone


def _kind_equations(kind: str, arity: Optional[int]):
    """Returns (term_arity, checker(F, i) -> bool)."""
    if kind == "majority":
        def chk(fa, i, s):
            for x in range(s):
                for y in range(s):
                    if (
                        fa.value_at(i, (x, x, y)) != x
                        or fa.value_at(i, (x, y, x)) != x
                        or fa.value_at(i, (y, x, x)) != x
                    ):
                        return False
            return True

        return 3, chk
    if kind == "nu":
        if arity is None or arity < 3:
            raise InputError("nu search needs arity >= 3")
        r = arity

        def chk(fa, i, s):
            for x in range(s):
                for y in range(s):
                    for pos in range(r):
                        args = [x] * r
                        args[pos] = y
                        if fa.value_at(i, args) != x:
                            return False
            return True

        return r, chk
    if kind == "edge":
        if arity is None or arity < 2:
            raise InputError("edge search needs the edge parameter k >= 2")
        k = arity
        r = k + 1

        def chk(fa, i, s):
            for x in range(s):
                for y in range(s):
                    a1 = [x] * r
                    a1[0] = y
                    a1[1] = y
                    a2 = [x] * r
                    a2[0] = y
                    a2[2] = y
                    if fa.value_at(i, a1) != x or fa.value_at(i, a2) != x:
                        return False
                    for pos in range(3, r):
                        args = [x] * r
                        args[pos] = y
                        if fa.value_at(i, args) != x:
                            return False
            return True

        return r, chk
    if kind == "maltsev":
        def chk(fa, i, s):
            for x in range(s):
                for y in range(s):
                    if fa.value_at(i, (x, y, y)) != x or fa.value_at(i, (x, x, y)) != y:
                        return False
            return True

        return 3, chk
    if kind == "baker_b":
        def chk(fa, i, s):
            for x in range(s):
                for y in range(s):
                    if (
                        fa.value_at(i, (x, x, y)) != x
                        or fa.value_at(i, (x, y, x)) != x
                        or fa.value_at(i, (x, y, y)) != fa.value_at(i, (y, x, x))
                    ):
                        return False
            return True

        return 3, chk
    raise InputError(f"unknown term kind {kind!r}")


def find_term(a: Algebra, kind: str, arity: Optional[int] = None) -> Optional[Term]:
    """First clone element (in free-algebra generation order) satisfying the
    kind's equations at every point of a; None when the clone level is
    exhausted.  Identities transfer to the whole variety."""
    r, chk = _kind_equations(kind, arity)
    if r > MAX_CLONE_ARITY:
        raise ResourceError(f"clone search arity {r} exceeds cap {MAX_CLONE_ARITY}")
    fa = free_algebra(a, r, with_view=False)
    for i in range(fa.size):
        if chk(fa, i, a.size):
            return fa.witness(i)
    return None


@dataclass
class AbsorptionReport:
    holds: bool
    arity: int
    clone_size: int
    counterexample: Optional[Term]  # clone element with no absorbing coordinate


def absorption_check(a: Algebra, bottom: int, arity: int) -> AbsorptionReport:
    """True iff every element of the arity-k clone has a coordinate i such
    that the value is bottom whenever argument i is bottom; certifies that
    no k-ary near-unanimity term exists."""
    if arity > MAX_CLONE_ARITY:
        raise ResourceError(f"clone arity {arity} exceeds cap {MAX_CLONE_ARITY}")
    fa = free_algebra(a, arity, with_view=False)
    s = a.size
    points = list(itertools.product(range(s), repeat=arity))
    for i in range(fa.size):
        ok = False
        for pos in range(arity):
            if all(
                fa.value_at(i, pt) == bottom
                for pt in points
                if pt[pos] == bottom
            ):
                ok = True
                break
        if not ok:
            return AbsorptionReport(False, arity, fa.size, fa.witness(i))
    return AbsorptionReport(True, arity, fa.size, None)


# ---------------------------------------------------------------------------
# Variety-level identity checks via the generic witness on F(n+1)


def _chain_factors(expr) -> Optional[list]:
    if expr[0] == "comp":
        return list(expr[1])
    if expr[0] == "alt":
        e1, e2, kk = expr[1], expr[2], expr[3]
        return [e1 if i % 2 == 0 else e2 for i in range(kk)]
    return None


def _atom_symbols(expr) -> set[str]:
    """Variable names of a chain factor: a var or a meet of vars."""
    if expr[0] == "var":
        return {expr[1]}
    if expr[0] == "meet" and all(c[0] == "var" for c in expr[1]):
        return {c[1] for c in expr[1]}
    raise InputError(
        "unsupported chain factor shape (expected a variable or a meet of variables)"
    )


def _generic_config(stmt: IdentityStatement, n: int):
    """Generic-witness configuration from the LHS, which must be a meet of
    relation symbols and one or more composition chains whose factors are
    symbols or meets of symbols.  Generators: one shared source, one shared
    target, and fresh midpoints per chain.  Outer symbols get the pair
    (source, target); a symbol in factor i of a chain links that chain's
    i-1st and i-th stop.  Returns (generator count, source, target,
    symbol -> generator index pairs)."""
    lhs = stmt.lhs
    if lhs[0] != "meet":
        raise InputError("unsupported LHS shape (expected meet(..., chain))")
    outer_vars: list[str] = []
    chains: list[list] = []
    for member in lhs[1]:
        if member[0] == "var":
            outer_vars.append(member[1])
            continue
        factors = _chain_factors(member)
        if factors is None:
            raise InputError(
                "unsupported LHS shape (members must be symbols or chains)"
            )
        chains.append(factors)
    if not chains:
        raise InputError("unsupported LHS shape (no composition chain found)")
    if max(len(c) for c in chains) != n:
        raise InputError(
            f"longest LHS chain has {max(len(c) for c in chains)} factors "
            f"but the check is for n={n}"
        )
    src = 0
    k = 2 + sum(len(c) - 1 for c in chains)
    dst = k - 1
    pairs: dict[str, set] = {}
    for name in outer_vars:
        pairs.setdefault(name, set()).add((src, dst))
    next_mid = 1
    for chain in chains:
        stops = [src] + list(range(next_mid, next_mid + len(chain) - 1)) + [dst]
        next_mid += len(chain) - 1
        for i, factor in enumerate(chain):
            for name in _atom_symbols(factor):
                pairs.setdefault(name, set()).add((stops[i], stops[i + 1]))
    return k, src, dst, pairs


_CLOSURES = {
    "cong": congruence_closure,
    "tol": tolerance_closure,
    "adm": admissible_closure,
}

_CLOSURE_CACHE: dict = {}


def _closure_cached(fa: FreeAlgebra, role: str, seed: tuple) -> BinRel:
    key = (id(fa), role, seed)
    cached = _CLOSURE_CACHE.get(key)
    if cached is not None:
        return cached[1]
    packed_ok = fa.masks is not None and fa.base.size ** fa.k <= 32
    if role == "cong":
        if packed_ok:
            rel = _congruence_closure_packed(fa, list(seed))
        else:
            rel = congruence_closure(fa.view, BinRel.from_pairs(fa.size, list(seed)))
    elif packed_ok:
        pairs = list(seed)
        if role == "tol":
            pairs += [(y, x) for x, y in seed]
        rel = _admissible_closure_packed(fa, pairs)
    else:
        rel = _CLOSURES[role](fa.view, BinRel.from_pairs(fa.size, list(seed)))
    _CLOSURE_CACHE[key] = (fa, rel)
    return rel


_KEY_HASH_BITS = 20


def _admissible_closure_packed(fa: FreeAlgebra, seed_pairs) -> BinRel:
    """Reflexive admissible closure on a packed free algebra.

    For each operation, fixing all arguments but the last yields a row map
    a -> (a & F1) | (~a & F0) acting on value masks, applied coordinatewise
    to pairs.  Tuples are enumerated only over the fixed part; row maps are
    deduplicated (exact 4-mask keys behind a hash prefilter), and each
    distinct map is applied to every pair at once.  This turns the
    npairs^arity closure pass into npairs^(arity-1) plus maps x npairs."""
    m = fa.size
    L = fa.base.size**fa.k
    full = np.uint64((1 << L) - 1)
    arr = fa.masks
    order = np.argsort(arr, kind="stable")
    sorted_masks = arr[order]

    seen = np.zeros((m, m), dtype=bool)
    seen[np.arange(m), np.arange(m)] = True
    for x, y in seed_pairs:
        seen[x, y] = True
    xs_idx, ys_idx = np.nonzero(seen)
    pxm = arr[xs_idx].copy()
    pym = arr[ys_idx].copy()

    def _popcount_invariant(mt: set, r: int) -> bool:
        by_weight: dict = {}
        for t in range(1 << r):
            v = t in mt
            w = bin(t).count("1")
            if by_weight.setdefault(w, v) != v:
                return False
        return True

    ops = []
    sym4 = []
    for op in fa.base.operations:
        if op.arity == 0:
            continue
        mt = _minterms(op)
        r = op.arity
        sub1 = [t >> 1 for t in mt if t & 1]
        sub0 = [t >> 1 for t in mt if not t & 1]
        if r == 4 and _popcount_invariant(set(mt), 4):
            # fully symmetric 4-ary op: sorted fixed triples suffice, and the
            # compiled multiset enumeration is ~npairs cheaper per pass
            sym4.append(
                (
                    np.array(sorted(sub1), dtype=np.int64),
                    np.array(sorted(sub0), dtype=np.int64),
                )
            )
        else:
            ops.append((op.name, r, sub1, sub0))

    size = (1 << 21) if sym4 else 1
    hk1 = np.zeros(size, dtype=np.uint64)
    hk2 = np.zeros(size, dtype=np.uint64)
    hused = np.zeros(size, dtype=np.uint8)
    kout1 = np.empty(size >> 1, dtype=np.uint64)
    kout2 = np.empty(size >> 1, dtype=np.uint64)
    kcount = 0

    # exact row-map keys (k1 = F1x<<32|F0x, k2 = F1y<<32|F0y) behind a
    # hash-slot prefilter; slot mismatches fall through to an exact dict
    nslots = 1 << _KEY_HASH_BITS
    filled = np.zeros(nslots, dtype=bool)
    slot_k1 = np.zeros(nslots, dtype=np.uint64)
    slot_k2 = np.zeros(nslots, dtype=np.uint64)
    key_dict: dict = {}
    keys1: list = []
    keys2: list = []

    def _key_masks(sub, masks_fixed):
        if not masks_fixed:
            return np.full(1, full if sub else 0, dtype=np.uint64)
        res = np.zeros_like(masks_fixed[0])
        for t in sub:
            w = np.full_like(masks_fixed[0], full)
            for j, a in enumerate(masks_fixed):
                if (t >> (len(masks_fixed) - 1 - j)) & 1:
                    w &= a
                else:
                    w &= ~a
            res |= w
        return res & full

    def _discover(np_lo, np_hi):
        found1: list = []
        found2: list = []
        for name, r, sub1, sub0 in ops:
            nfix = r - 1
            if np_hi**nfix > MAX_FREE_TUPLES:
                raise ResourceError(
                    f"closure pass for {name!r} exceeds tuple cap"
                )
            segs = (
                [[]] if nfix == 0 else list(_segments(np_lo, np_hi, nfix))
            )
            for seg in segs:
                it = [(None, [])] if not seg else _iter_tuples(seg)
                for _, idx in it:
                    xm = [pxm[i] for i in idx]
                    ym = [pym[i] for i in idx]
                    f1x = _key_masks(sub1, xm)
                    f0x = _key_masks(sub0, xm)
                    f1y = _key_masks(sub1, ym)
                    f0y = _key_masks(sub0, ym)
                    k1 = (f1x << np.uint64(32)) | f0x
                    k2 = (f1y << np.uint64(32)) | f0y
                    h = (
                        (k1 * np.uint64(0x9E3779B97F4A7C15))
                        ^ (k2 * np.uint64(0xC2B2AE3D27D4EB4F))
                    ) >> np.uint64(64 - _KEY_HASH_BITS)
                    cand = ~filled[h] | (slot_k1[h] != k1) | (slot_k2[h] != k2)
                    if not cand.any():
                        continue
                    for a, b, hh in zip(k1[cand], k2[cand], h[cand]):
                        a = int(a)
                        b = int(b)
                        if (a, b) in key_dict:
                            continue
                        key_dict[(a, b)] = None
                        found1.append(a)
                        found2.append(b)
                        hh = int(hh)
                        if not filled[hh]:
                            filled[hh] = True
                            slot_k1[hh] = a
                            slot_k2[hh] = b
        return found1, found2

    def _apply(k1s, k2s, p_lo, p_hi):
        # images of pairs [p_lo, p_hi) under the given row maps
        if not len(k1s) or p_hi == p_lo:
            return set()
        out: set = set()
        npair = p_hi - p_lo
        kchunk = max(1, _CHUNK // npair)
        all1 = np.asarray(k1s, dtype=np.uint64)
        all2 = np.asarray(k2s, dtype=np.uint64)
        ax = pxm[None, p_lo:p_hi]
        ay = pym[None, p_lo:p_hi]
        for lo in range(0, len(all1), kchunk):
            k1 = all1[lo : lo + kchunk, None]
            k2 = all2[lo : lo + kchunk, None]
            rx = ((ax & (k1 >> np.uint64(32))) | (~ax & (k1 & full))) & full
            ry = ((ay & (k2 >> np.uint64(32))) | (~ay & (k2 & full))) & full
            ix = order[np.searchsorted(sorted_masks, rx.ravel())]
            iy = order[np.searchsorted(sorted_masks, ry.ravel())]
            fresh = ~seen[ix, iy]
            out.update(zip(ix[fresh].tolist(), iy[fresh].tolist()))
        return out

    np_old = 0
    nkeys_old = 0
    kcount_old = 0
    while True:
        np_cur = len(pxm)
        f1, f2 = _discover(np_old, np_cur)
        kprev = kcount
        for s1a, s0a in sym4:
            kcount = rowkeys4_sym(
                pxm, pym, np_old, full, s1a, s0a,
                hk1, hk2, hused, kout1, kout2, kcount,
            )
            if kcount < 0:
                raise ResourceError("row-map store overflow in closure pass")
        new1 = np.concatenate(
            [np.asarray(f1, dtype=np.uint64), kout1[kprev:kcount]]
        )
        new2 = np.concatenate(
            [np.asarray(f2, dtype=np.uint64), kout2[kprev:kcount]]
        )
        old1 = np.concatenate(
            [np.asarray(keys1[:nkeys_old], dtype=np.uint64), kout1[:kcount_old]]
        )
        old2 = np.concatenate(
            [np.asarray(keys2[:nkeys_old], dtype=np.uint64), kout2[:kcount_old]]
        )
        keys1.extend(f1)
        keys2.extend(f2)
        new_pairs = _apply(new1, new2, 0, np_cur)
        new_pairs |= _apply(old1, old2, np_old, np_cur)
        np_old = np_cur
        nkeys_old = len(keys1)
        kcount_old = kcount
        if not new_pairs:
            break
        add = sorted(new_pairs)
        for x, y in add:
            seen[x, y] = True
        ax = np.array([x for x, _ in add], dtype=np.int64)
        ay = np.array([y for _, y in add], dtype=np.int64)
        pxm = np.concatenate([pxm, arr[ax]])
        pym = np.concatenate([pym, arr[ay]])

    rows = [0] * m
    xi, yi = np.nonzero(seen)
    for x, y in zip(xi.tolist(), yi.tolist()):
        rows[x] |= 1 << y
    return BinRel(m, tuple(rows))


@dataclass
class VarietyCheck:
    holds: bool
    witness: Optional[tuple]
    free_size: int
    env_sizes: dict

    def __bool__(self):
        return self.holds


def variety_relation_check(
    a: Algebra, stmt: IdentityStatement, n: int
) -> VarietyCheck:
    """Decides whether the identity holds throughout the variety generated
    by a, by the generic-witness check on the free algebra whose generators
    realize the LHS configuration (F(n+1) for a single chain)."""
    k, src, dst, sym_pairs = _generic_config(stmt, n)
    variables = expr_variables(stmt.lhs) | expr_variables(stmt.rhs)
    for v in sorted(variables):
        if v not in stmt.roles:
            raise InputError(f"variable {v!r} has no declared role")
        if v not in sym_pairs:
            raise InputError(
                f"variable {v!r} does not occur in the LHS; generic witness undefined"
            )
    fa = free_algebra(a, k)
    if fa.view is None:
        raise ResourceError("free algebra too large for relation evaluation")
    g = fa.generators
    env = {}
    for name, idx_pairs in sym_pairs.items():
        seed = tuple(sorted((g[i], g[j]) for i, j in idx_pairs))
        env[name] = _closure_cached(fa, stmt.roles[name], seed)
    # env relations are role-correct by construction; skip re-validation
    res = check_inclusion(fa.view, env, stmt, enforce=False)
    return VarietyCheck(
        holds=res.holds,
        witness=res.witness,
        free_size=fa.size,
        env_sizes={k: v.npairs() for k, v in env.items()},
    )


def variety_congruence_check(
    a: Algebra, stmt: IdentityStatement, n: int
) -> VarietyCheck:
    for v, role in stmt.roles.items():
        if role != "cong":
            raise InputError(
                f"congruence check requires all roles cong, got {v}:{role}"
            )
    return variety_relation_check(a, stmt, n)


def spectrum(a: Algebra, n: int, max_k: int = 64) -> Optional[int]:
    """Least k with alpha(beta o_n gamma) <= alpha beta o_k alpha gamma
    throughout the variety generated by a; None beyond max_k."""
    if n < 1:
        raise InputError(f"spectrum needs n >= 1, got {n}")
    fa = free_algebra(a, n + 1)
    g = fa.generators
    alpha_seed = [(g[0], g[n])]
    beta_seed = [(g[i - 1], g[i]) for i in range(1, n + 1) if i % 2 == 1]
    gamma_seed = [(g[i - 1], g[i]) for i in range(1, n + 1) if i % 2 == 0]
    if fa.view is not None:
        cg = lambda seed: congruence_closure(
            fa.view, BinRel.from_pairs(fa.size, seed)
        )
    else:
        cg = lambda seed: _congruence_closure_packed(fa, seed)
    alpha = cg(alpha_seed)
    beta = cg(beta_seed)
    gamma = cg(gamma_seed)
    ab = meet(alpha, beta)
    ag = meet(alpha, gamma)
    res = min_alternation(ab, ag, g[0], g[n], max_k)
    return res.start_first


def modularity_level(a: Algebra, max_m: int = 16) -> Optional[int]:
    """Least m for which the Day identity
    alpha(beta o alpha gamma o beta) <= alpha beta o_m alpha gamma holds
    throughout the variety generated by a, via the 4-generator witness."""
    fa = free_algebra(a, 4)
    if fa.view is None:
        raise ResourceError("free algebra too large for modularity check")
    g = fa.generators
    cg = lambda seed: congruence_closure(fa.view, BinRel.from_pairs(fa.size, seed))
    alpha = cg([(g[0], g[3]), (g[1], g[2])])
    beta = cg([(g[0], g[1]), (g[2], g[3])])
    gamma = cg([(g[1], g[2])])
    ab = meet(alpha, beta)
    ag = meet(alpha, gamma)
    return min_alternation(ab, ag, g[0], g[3], max_m).start_first


def _congruence_closure_packed(fa: FreeAlgebra, seed_pairs) -> BinRel:
    """Congruence generation on a packed free algebra without a materialized
    operation table.  For each (op, position) the operation with that
    argument fixed to value c is bitwise (c & F1) | (~c & F0) where F1/F0
    are the sub-DNFs over the (merge-independent) context grid, so they are
    evaluated once and each merge costs a handful of vector ops."""
    m = fa.size
    arr = fa.masks
    full = (1 << (2**fa.k)) - 1
    fullw = np.uint64(full)
    order = np.argsort(arr, kind="stable")
    sorted_masks = arr[order]
    parent = list(range(m))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    slots = []  # (F1, F0) per (op, position), contexts in row-major grid order
    for op in fa.base.operations:
        if op.arity == 0:
            continue
        r = op.arity
        if m ** (r - 1) > 1 << 24:
            raise ResourceError(
                f"congruence propagation context grid for {op.name!r} exceeds cap"
            )
        minterms = _minterms(op)
        for pos in range(r):
            f_parts = []
            for want in (1, 0):
                # context minterm = t with the bit at pos removed
                sub = []
                for t in minterms:
                    if ((t >> (r - 1 - pos)) & 1) != want:
                        continue
                    hi = t >> (r - pos) if pos < r else 0
                    lo = t & ((1 << (r - 1 - pos)) - 1)
                    sub.append((hi << (r - 1 - pos)) | lo)
                if r == 1:
                    f_parts.append(
                        np.array([full if sub else 0], dtype=np.uint64)
                    )
                    continue
                parts = []
                for _, idx in _iter_tuples([(0, m)] * (r - 1)):
                    parts.append(
                        _eval_dnf_packed(sub, r - 1, [arr[i] for i in idx], full)
                    )
                f_parts.append(np.concatenate(parts))
            slots.append((f_parts[0], f_parts[1], f_parts[0] ^ f_parts[1]))

    queue = list(seed_pairs)
    while queue:
        a0, b0 = queue.pop()
        ra, rb = find(a0), find(b0)
        if ra == rb:
            continue
        parent[max(ra, rb)] = min(ra, rb)
        rep = np.fromiter((find(x) for x in range(m)), dtype=np.int64, count=m)
        ma = np.uint64(int(arr[a0]))
        mb = np.uint64(int(arr[b0]))
        for f1, f0, fx in slots:
            # values differ exactly on contexts where (ma ^ mb) meets f1 ^ f0
            d = ((ma ^ mb) & fx) != 0
            if not d.any():
                continue
            f1d = f1[d]
            f0d = f0[d]
            va = ((ma & f1d) | (~ma & f0d)) & fullw
            vb = ((mb & f1d) | (~mb & f0d)) & fullw
            pa = rep[order[np.searchsorted(sorted_masks, va)]]
            pb = rep[order[np.searchsorted(sorted_masks, vb)]]
            dd = pa != pb
            if dd.any():
                enc = np.unique(pa[dd] * m + pb[dd])
                queue.extend((int(e) // m, int(e) % m) for e in enc)
    blocks: dict[int, int] = {}
    for x in range(m):
        rx = find(x)
        blocks[rx] = blocks.get(rx, 0) | (1 << x)
    return BinRel(m, tuple(blocks[find(x)] for x in range(m)))


# ---------------------------------------------------------------------------
# Boolean-reduct classification and arithmeticity


def classify_boolean_reduct(spec) -> dict:
    """Builds the two-element reduct for the given lattice terms and reports
    which of the trichotomy witnesses exist (majority / Maltsev / the
    meet-of-join term scheme), plus the bounded modularity level."""
    from .lattice import chain, reduct

    alg = reduct(chain(1), spec)
    report = {
        "operations": [op.name for op in alg.operations],
        "majority": find_term(alg, "majority"),
        "maltsev": find_term(alg, "maltsev"),
        "baker_b": find_term(alg, "baker_b"),
        "nu4": find_term(alg, "nu", 4),
    }
    level = modularity_level(alg)
    report["modularity_level"] = level
    report["consistent"] = (level is None) or any(
        report[k] is not None for k in ("majority", "maltsev", "baker_b")
    )
    return report


ARIT_LHS = ("meet", (("comp", (("var", "al"), ("var", "de"))),
                     ("comp", (("var", "be"), ("var", "ga")))))
ARIT_RHS = ("comp", (("meet", (("var", "al"), ("var", "be"))),
                     ("meet", (("var", "al"), ("var", "ga"))),
                     ("meet", (("var", "de"), ("var", "be"))),
                     ("meet", (("var", "de"), ("var", "ga")))))


def _arit_holds(alg: Algebra, quad) -> bool:
    from .dsl import eval_expr

    al, de, be, ga = quad
    env = {"al": al, "de": de, "be": be, "ga": ga}
    return eval_expr(alg, env, ARIT_LHS) == eval_expr(alg, env, ARIT_RHS)


def arithmeticity_probe(a: Algebra) -> dict:
    """Term side: majority and Maltsev searches.  Instance side: the
    four-congruence product identity swept over all congruence quadruples.
    Reports whether the two sides agree."""
    majority = find_term(a, "majority")
    maltsev = find_term(a, "maltsev")
    if a.size <= 6:
        congs = all_congruences(a)
    else:
        congs = congruence_lattice(a)
    violation = None
    for quad in itertools.product(congs, repeat=4):
        if not _arit_holds(a, quad):
            violation = tuple(c.npairs() for c in quad)
            break
    arithmetical_terms = majority is not None and maltsev is not None
    return {
        "majority": majority,
        "maltsev": maltsev,
        "congruence_count": len(congs),
        "violating_quadruple_sizes": violation,
        "identity_holds_everywhere": violation is None,
        "agreement": arithmetical_terms == (violation is None),
    }
