"""Binary-relation calculus over finite universes.

Relations are stored as one bitmask per row (python ints), so composition
is boolean matrix product over machine words.  Closure operators come in
two implementations: a pure-python naive fixpoint (the correctness oracle)
and a semi-naive fast path using the compiled kernels; tests assert their
equality.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import _kernels
from .core import Algebra, table_index
from .errors import InputError, ResourceError

MAX_REL_UNIVERSE = 4096
# Cap on the number of argument tuples a single compatibility/closure pass
# may enumerate through the compiled kernels.
MAX_TUPLES = 1 << 34
# Cap for the pure-python naive closure (oracle use only).
MAX_TUPLES_NAIVE = 1 << 22


class BinRel:
    __slots__ = ("size", "rows")

    def __init__(self, size: int, rows: tuple[int, ...]):
        self.size = size
        self.rows = rows

    @staticmethod
    def from_pairs(size: int, pairs: Iterable[tuple[int, int]]) -> "BinRel":
        if size < 0 or size > MAX_REL_UNIVERSE:
            raise ResourceError(
                f"relation universe {size} exceeds cap {MAX_REL_UNIVERSE}"
            )
        rows = [0] * size
        for a, b in pairs:
            if not (0 <= a < size and 0 <= b < size):
                raise InputError(f"pair ({a},{b}) out of range for size {size}")
            rows[a] |= 1 << b
        return BinRel(size, tuple(rows))

    @staticmethod
    def diag(size: int) -> "BinRel":
        return BinRel(size, tuple(1 << x for x in range(size)))

    @staticmethod
    def empty(size: int) -> "BinRel":
        return BinRel(size, (0,) * size)

    @staticmethod
    def full(size: int) -> "BinRel":
        return BinRel(size, ((1 << size) - 1,) * size)

    def pairs(self) -> list[tuple[int, int]]:
        out = []
        for x in range(self.size):
            m = self.rows[x]
            while m:
                y = (m & -m).bit_length() - 1
                out.append((x, y))
                m &= m - 1
        return out

    def npairs(self) -> int:
        return sum(m.bit_count() for m in self.rows)

    def has(self, a: int, b: int) -> bool:
        return bool((self.rows[a] >> b) & 1)

    def __contains__(self, pair) -> bool:
        return self.has(*pair)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BinRel)
            and self.size == other.size
            and self.rows == other.rows
        )

    def __hash__(self):
        return hash((self.size, self.rows))

    def __le__(self, other: "BinRel") -> bool:
        _check_sizes(self, other)
        return all(r & ~s == 0 for r, s in zip(self.rows, other.rows))

    def __repr__(self):
        return f"BinRel(size={self.size}, npairs={self.npairs()})"


def _check_sizes(*rels: BinRel):
    sizes = {r.size for r in rels}
    if len(sizes) > 1:
        raise InputError(f"relation size mismatch: {sorted(sizes)}")


def compose(r: BinRel, s: BinRel) -> BinRel:
    _check_sizes(r, s)
    rows = []
    for x in range(r.size):
        m = r.rows[x]
        acc = 0
        while m:
            y = (m & -m).bit_length() - 1
            acc |= s.rows[y]
            m &= m - 1
        rows.append(acc)
    return BinRel(r.size, tuple(rows))


def compose_all(rels: list[BinRel]) -> BinRel:
    if not rels:
        raise InputError("empty composition")
    out = rels[0]
    for r in rels[1:]:
        out = compose(out, r)
    return out


def compose_alt(r: BinRel, s: BinRel, k: int) -> BinRel:
    """k alternating factors starting with r; k = 0 is the diagonal
    (the minimal congruence)."""
    _check_sizes(r, s)
    if k < 0:
        raise InputError(f"negative alternation length {k}")
    if k == 0:
        return BinRel.diag(r.size)
    out = r
    for i in range(1, k):
        out = compose(out, s if i % 2 else r)
    return out


def meet(*rels: BinRel) -> BinRel:
    if not rels:
        raise InputError("empty meet")
    _check_sizes(*rels)
    rows = []
    for x in range(rels[0].size):
        acc = rels[0].rows[x]
        for r in rels[1:]:
            acc &= r.rows[x]
        rows.append(acc)
    return BinRel(rels[0].size, tuple(rows))


def union_raw(r: BinRel, s: BinRel) -> BinRel:
    _check_sizes(r, s)
    return BinRel(r.size, tuple(a | b for a, b in zip(r.rows, s.rows)))


def converse(r: BinRel) -> BinRel:
    rows = [0] * r.size
    for x in range(r.size):
        m = r.rows[x]
        while m:
            y = (m & -m).bit_length() - 1
            rows[y] |= 1 << x
            m &= m - 1
    return BinRel(r.size, tuple(rows))


def transitive_closure(r: BinRel) -> BinRel:
    rows = list(r.rows)
    for k in range(r.size):
        rk = rows[k]
        bit = 1 << k
        for x in range(r.size):
            if rows[x] & bit:
                rows[x] |= rk
    return BinRel(r.size, tuple(rows))


def is_reflexive(r: BinRel) -> bool:
    return all((r.rows[x] >> x) & 1 for x in range(r.size))


def is_symmetric(r: BinRel) -> bool:
    return r == converse(r)


def is_transitive(r: BinRel) -> bool:
    return compose(r, r) <= r


# ---------------------------------------------------------------------------
# Compatibility checks and closures


def _bits_from_rel(r: BinRel) -> np.ndarray:
    big = 0
    for x in range(r.size):
        big |= r.rows[x] << (x * r.size)
    nwords = max(1, (r.size * r.size + 63) // 64)
    return np.frombuffer(big.to_bytes(nwords * 8, "little"), dtype=np.int64).copy()


def _pairs_from_bits(bits: np.ndarray, size: int) -> list[tuple[int, int]]:
    by = bits.view(np.uint8)
    flat = np.unpackbits(by, bitorder="little")
    pos = np.nonzero(flat)[0]
    pos = pos[pos < size * size]
    return [(int(p) // size, int(p) % size) for p in pos]


_SYM_CACHE: dict = {}


def _op_symmetric(op) -> bool:
    key = (id(op), op.name, op.arity)
    hit = _SYM_CACHE.get(key)
    if hit is not None:
        return hit
    m = op.arity
    s = round(len(op.table) ** (1 / m)) if m else 1
    while s**m < len(op.table):
        s += 1
    tab = op.table.reshape((s,) * m)
    ok = True
    for i in range(m - 1):
        axes = list(range(m))
        axes[i], axes[i + 1] = axes[i + 1], axes[i]
        if not np.array_equal(tab, tab.transpose(axes)):
            ok = False
            break
    _SYM_CACHE[key] = ok
    return ok


def _ntuples(npairs: int, arity: int, symmetric: bool) -> int:
    if symmetric and arity == 4:
        n = npairs
        return n * (n + 1) * (n + 2) * (n + 3) // 24
    return npairs**arity


def _run_img(alg: Algebra, pa, pb, start, out):
    s = alg.size
    for op in alg.operations:
        if op.arity == 0:
            continue
        tab = op.table.astype(np.int64) if op.table.dtype != np.int64 else op.table
        if op.arity == 1:
            _kernels.img1(tab, s, pa, pb, start, out)
        elif op.arity == 2:
            _kernels.img2(tab, s, pa, pb, start, out)
        elif op.arity == 3:
            _kernels.img3(tab, s, pa, pb, start, out)
        elif op.arity == 4:
            if _op_symmetric(op):
                if _ntuples(len(pa), 4, True) > MAX_TUPLES:
                    raise ResourceError(
                        f"closure pass for {op.name!r} would enumerate too many tuples"
                    )
                _kernels.img4_sym(tab, s, pa, pb, start, out)
            else:
                if _ntuples(len(pa), 4, False) > MAX_TUPLES:
                    raise ResourceError(
                        f"closure pass for {op.name!r} would enumerate too many tuples"
                    )
                _kernels.img4(tab, s, pa, pb, start, out)
        else:
            raise ResourceError(
                f"operation {op.name!r}: arity {op.arity} unsupported in fast closure"
            )


def admissible_closure(alg: Algebra, seed: BinRel) -> BinRel:
    """Smallest reflexive relation containing seed and closed under all
    operations applied coordinatewise (semi-naive fast path)."""
    return admissible_reach(alg, seed, None)[0]


def admissible_reach(alg: Algebra, seed: BinRel, pred):
    """Admissible-closure fixpoint with an early exit: pred (a predicate on
    the relation built so far) is evaluated on the seed and after every
    pass, and once it holds the current partial relation is returned with
    flag True.  Membership in the partial relation implies membership in
    the closure, so a True flag is a sound certificate.  With pred None (or
    never satisfied) the full closure is returned with flag False."""
    if seed.size != alg.size:
        raise InputError("seed relation size does not match algebra size")
    cur = union_raw(seed, BinRel.diag(alg.size))
    pair_list = cur.pairs()
    pa = np.array([p for p, _ in pair_list], dtype=np.int64)
    pb = np.array([q for _, q in pair_list], dtype=np.int64)
    have = _bits_from_rel(cur)

    def snapshot() -> BinRel:
        rows = [0] * alg.size
        for i in range(len(pa)):
            rows[int(pa[i])] |= 1 << int(pb[i])
        return BinRel(alg.size, tuple(rows))

    if pred is not None and pred(snapshot()):
        return snapshot(), True
    start = 0
    while True:
        out = np.zeros_like(have)
        _run_img(alg, pa, pb, start, out)
        new = out & ~have
        if not new.any():
            break
        new_pairs = _pairs_from_bits(new, alg.size)
        have |= new
        start = len(pa)
        pa = np.concatenate([pa, np.array([p for p, _ in new_pairs], dtype=np.int64)])
        pb = np.concatenate([pb, np.array([q for _, q in new_pairs], dtype=np.int64)])
        if pred is not None and pred(snapshot()):
            return snapshot(), True
    return snapshot(), False


def admissible_closure_naive(alg: Algebra, seed: BinRel) -> BinRel:
    """All-tuples fixpoint; the oracle for admissible_closure."""
    if seed.size != alg.size:
        raise InputError("seed relation size does not match algebra size")
    cur = set(seed.pairs()) | {(x, x) for x in range(alg.size)}
    while True:
        added = set()
        plist = sorted(cur)
        for op in alg.operations:
            if op.arity == 0:
                continue
            if len(plist) ** op.arity > MAX_TUPLES_NAIVE:
                raise ResourceError(
                    f"naive closure for {op.name!r} would enumerate too many tuples"
                )
            tab = op.table
            s = alg.size
            for tup in itertools.product(plist, repeat=op.arity):
                x = int(tab[table_index(s, [p for p, _ in tup])])
                y = int(tab[table_index(s, [q for _, q in tup])])
                if (x, y) not in cur:
                    added.add((x, y))
        if not added:
            break
        cur |= added
    return BinRel.from_pairs(alg.size, cur)


def tolerance_closure(alg: Algebra, seed: BinRel) -> BinRel:
    """Least reflexive symmetric admissible superset.  The admissible
    closure of a symmetric reflexive set is symmetric (images of reversed
    pair tuples are reversed image pairs), so one symmetrization before the
    fixpoint suffices."""
    return admissible_closure(alg, union_raw(seed, converse(seed)))


def congruence_closure(alg: Algebra, seed: BinRel) -> BinRel:
    """Least congruence containing seed: union-find partition, each merge
    re-propagated through every operation one coordinate at a time.  A
    single varying coordinate suffices because the result is transitive."""
    if seed.size != alg.size:
        raise InputError("seed relation size does not match algebra size")
    s = alg.size
    parent = list(range(s))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tabs = []
    for op in alg.operations:
        if op.arity >= 1:
            tabs.append((op.arity, op.table.reshape((s,) * op.arity)))

    queue: list[tuple[int, int]] = seed.pairs()
    while queue:
        a, b = queue.pop()
        ra, rb = find(a), find(b)
        if ra == rb:
            continue
        parent[max(ra, rb)] = min(ra, rb)
        rep = np.fromiter((find(x) for x in range(s)), dtype=np.int64, count=s)
        for arity, tab in tabs:
            for pos in range(arity):
                sl_a = rep[np.take(tab, a, axis=pos)]
                sl_b = rep[np.take(tab, b, axis=pos)]
                d = sl_a != sl_b
                if d.any():
                    pairs = np.unique(
                        np.stack([sl_a[d].ravel(), sl_b[d].ravel()]), axis=1
                    )
                    queue.extend(
                        (int(u), int(v)) for u, v in zip(pairs[0], pairs[1])
                    )
    rows = [0] * s
    classes: dict[int, int] = {}
    for x in range(s):
        classes.setdefault(find(x), 0)
        classes[find(x)] |= 1 << x
    for x in range(s):
        rows[x] = classes[find(x)]
    return BinRel(s, tuple(rows))


@dataclass
class Witness:
    """A compatibility violation: applying op to the listed R-pairs
    coordinatewise produces image, which is outside R."""

    op: str
    xs: tuple[int, ...]
    ys: tuple[int, ...]
    image: tuple[int, int]

    def describe(self) -> str:
        return (
            f"{self.op}{self.xs} = {self.image[0]}, "
            f"{self.op}{self.ys} = {self.image[1]}: image pair not in relation"
        )


def compatibility_violation(alg: Algebra, r: BinRel) -> Optional[Witness]:
    """First (in pair-lex order) tuple of r-pairs whose coordinatewise image
    is outside r, or None when r is compatible with every operation."""
    if r.size != alg.size:
        raise InputError("relation size does not match algebra size")
    plist = sorted(r.pairs())
    if not plist:
        return None
    pa = np.array([p for p, _ in plist], dtype=np.int64)
    pb = np.array([q for _, q in plist], dtype=np.int64)
    rbits = _bits_from_rel(r)
    s = alg.size
    n = len(plist)
    for op in alg.operations:
        if op.arity == 0:
            continue
        tab = op.table.astype(np.int64)
        if op.arity == 1:
            res = _kernels.viol1(tab, s, pa, pb, rbits)
            dims = 1
        elif op.arity == 2:
            res = _kernels.viol2(tab, s, pa, pb, rbits)
            dims = 2
        elif op.arity == 3:
            res = _kernels.viol3(tab, s, pa, pb, rbits)
            dims = 3
        elif op.arity == 4:
            sym = _op_symmetric(op)
            if _ntuples(n, 4, sym) > MAX_TUPLES:
                raise ResourceError(
                    f"compatibility check for {op.name!r} would enumerate too many tuples"
                )
            res = (
                _kernels.viol4_sym(tab, s, pa, pb, rbits)
                if sym
                else _kernels.viol4(tab, s, pa, pb, rbits)
            )
            dims = 4
        else:
            res = _viol_naive(alg, op, plist, r)
            if res is None:
                continue
            return res
        if res >= 0:
            idxs = []
            for _ in range(dims):
                idxs.append(res % n)
                res //= n
            idxs.reverse()
            xs = tuple(int(pa[i]) for i in idxs)
            ys = tuple(int(pb[i]) for i in idxs)
            img = (
                int(tab[table_index(s, xs)]),
                int(tab[table_index(s, ys)]),
            )
            return Witness(op.name, xs, ys, img)
    return None


def _viol_naive(alg, op, plist, r) -> Optional[Witness]:
    if len(plist) ** op.arity > MAX_TUPLES_NAIVE:
        raise ResourceError(
            f"compatibility check for {op.name!r} would enumerate too many tuples"
        )
    s = alg.size
    for tup in itertools.product(plist, repeat=op.arity):
        xs = tuple(p for p, _ in tup)
        ys = tuple(q for _, q in tup)
        x = int(op.table[table_index(s, xs)])
        y = int(op.table[table_index(s, ys)])
        if not r.has(x, y):
            return Witness(op.name, xs, ys, (x, y))
    return None


def is_admissible(alg: Algebra, r: BinRel):
    """Reflexive and compatible.  Returns (verdict, witness_or_reason)."""
    if not is_reflexive(r):
        x = next(x for x in range(r.size) if not r.has(x, x))
        return False, f"not reflexive: missing ({x},{x})"
    w = compatibility_violation(alg, r)
    if w is not None:
        return False, w
    return True, None


def is_tolerance(alg: Algebra, r: BinRel):
    if not is_symmetric(r):
        bad = sorted(set(r.pairs()) - set(converse(r).pairs()))[0]
        return False, f"not symmetric: {bad} without its converse"
    return is_admissible(alg, r)


def is_congruence(alg: Algebra, r: BinRel):
    if not is_reflexive(r):
        x = next(x for x in range(r.size) if not r.has(x, x))
        return False, f"not reflexive: missing ({x},{x})"
    if not is_symmetric(r):
        bad = sorted(set(r.pairs()) - set(converse(r).pairs()))[0]
        return False, f"not symmetric: {bad} without its converse"
    if not is_transitive(r):
        return False, "not transitive"
    # Equivalence relation: compatibility reduces to single-coordinate
    # checks against one representative pair per class member.
    s = alg.size
    cls = np.zeros(s, dtype=np.int64)
    seen = [False] * s
    for x in range(s):
        if not seen[x]:
            m = r.rows[x]
            while m:
                y = (m & -m).bit_length() - 1
                cls[y] = x
                seen[y] = True
                m &= m - 1
    span = [(int(cls[x]), x) for x in range(s) if cls[x] != x]
    for op in alg.operations:
        if op.arity == 0:
            continue
        tab = op.table.reshape((s,) * op.arity)
        for a, b in span:
            for pos in range(op.arity):
                sl_a = cls[np.take(tab, a, axis=pos)]
                sl_b = cls[np.take(tab, b, axis=pos)]
                d = np.nonzero((sl_a != sl_b).ravel())
                if len(d[0]):
                    flat = int(d[0][0])
                    rest = []
                    for q in range((op.arity - 1) - 1, -1, -1):
                        rest.append(flat // s**q % s)
                    xs = list(rest)
                    xs.insert(pos, a)
                    ys = list(rest)
                    ys.insert(pos, b)
                    img = (
                        int(op.table[table_index(s, xs)]),
                        int(op.table[table_index(s, ys)]),
                    )
                    return False, Witness(op.name, tuple(xs), tuple(ys), img)
    return True, None


# ---------------------------------------------------------------------------
# Alternation search


@dataclass
class AlternationResult:
    """Least alternation lengths from src to dst, for both start orders."""

    start_first: Optional[int]  # chain starts with the first relation
    start_second: Optional[int]  # chain starts with the second relation

    @property
    def best(self) -> Optional[int]:
        vals = [v for v in (self.start_first, self.start_second) if v is not None]
        return min(vals) if vals else None


def min_alternation(
    p: BinRel, q: BinRel, src: int, dst: int, max_k: int = 64
) -> AlternationResult:
    """Least k <= max_k with (src,dst) in the k-factor alternating
    composition, for both start orders.  Assumes p and q reflexive, which
    makes reachability monotone in k."""
    _check_sizes(p, q)

    def bfs(first: BinRel, second: BinRel) -> Optional[int]:
        if src == dst:
            return 0
        cur = 1 << src
        for k in range(1, max_k + 1):
            rel = first if k % 2 == 1 else second
            nxt = 0
            m = cur
            while m:
                x = (m & -m).bit_length() - 1
                nxt |= rel.rows[x]
                m &= m - 1
            cur = nxt
            if (cur >> dst) & 1:
                return k
        return None

    return AlternationResult(bfs(p, q), bfs(q, p))


# ---------------------------------------------------------------------------
# Congruence enumeration


MAX_ALL_CONG_SIZE = 6


def _partitions(n: int):
    """All set partitions of {0..n-1} as restricted growth strings."""

    def rec(i: int, rgs: list[int], mx: int):
        if i == n:
            yield tuple(rgs)
            return
        for v in range(mx + 2):
            rgs.append(v)
            yield from rec(i + 1, rgs, max(mx, v))
            rgs.pop()

    yield from rec(1, [0], 0) if n else iter([()])


def _rel_from_rgs(rgs: tuple[int, ...]) -> BinRel:
    n = len(rgs)
    blocks: dict[int, int] = {}
    for x, v in enumerate(rgs):
        blocks[v] = blocks.get(v, 0) | (1 << x)
    return BinRel(n, tuple(blocks[rgs[x]] for x in range(n)))


def all_congruences(alg: Algebra) -> list[BinRel]:
    """Every congruence, by brute-force partition enumeration; the oracle
    for congruence_closure."""
    if alg.size > MAX_ALL_CONG_SIZE:
        raise ResourceError(
            f"all_congruences caps size at {MAX_ALL_CONG_SIZE}, got {alg.size}"
        )
    out = []
    for rgs in _partitions(alg.size):
        r = _rel_from_rgs(rgs)
        ok, _ = is_congruence(alg, r)
        if ok:
            out.append(r)
    out.sort(key=lambda r: (r.npairs(), r.rows))
    return out


def congruence_lattice(alg: Algebra) -> list[BinRel]:
    """All congruences via principal congruences closed under join; works
    for universes too large for partition enumeration."""
    principals = {BinRel.diag(alg.size)}
    for a in range(alg.size):
        for b in range(a + 1, alg.size):
            principals.add(
                congruence_closure(alg, BinRel.from_pairs(alg.size, [(a, b)]))
            )
    found = set(principals)
    frontier = set(principals)
    while frontier:
        new = set()
        for f in frontier:
            for g in principals:
                j = union_raw(f, g)
                if j == f or j == g:
                    continue
                jc = congruence_closure(alg, j)
                if jc not in found:
                    new.add(jc)
        found |= new
        frontier = new
    out = sorted(found, key=lambda r: (r.npairs(), r.rows))
    return out


# ---------------------------------------------------------------------------
# Tolerance representability


def representability_obstruction(inst, theta: BinRel) -> dict:
    """Sufficient condition that no reflexive admissible R has
    theta = R o converse(R): theta relates (c0,c1) and (c_{n-1},c_n) but
    not (e_{n-1}, f1).  Returns a verdict report."""
    if inst.signature != "b":
        raise InputError("representability obstruction applies to signature b only")
    c = inst.c
    n = inst.n
    e_n1 = inst.e[n - 1]
    f_1 = inst.f[1]
    have_01 = theta.has(c[0], c[1])
    have_n1n = theta.has(c[n - 1], c[n])
    have_ef = theta.has(e_n1, f_1)
    if have_01 and have_n1n and not have_ef:
        verdict = "non-representable-by-witness"
    else:
        verdict = "inconclusive"
    return {
        "verdict": verdict,
        "pairs": {
            "(c0,c1)": have_01,
            "(c_{n-1},c_n)": have_n1n,
            "(e_{n-1},f_1)": have_ef,
        },
    }


def representability_search(
    alg: Algebra, theta: BinRel, max_seed_size: int = 2
) -> Optional[BinRel]:
    """Bounded search for a reflexive admissible R with R o conv(R) = theta.
    Exponential; off by default, provided for small experiments only."""
    pairs = sorted(theta.pairs())
    for k in range(0, max_seed_size + 1):
        for subset in itertools.combinations(pairs, k):
            r = admissible_closure(alg, BinRel.from_pairs(alg.size, subset))
            if compose(r, converse(r)) == theta:
                return r
    return None


# ---------------------------------------------------------------------------
# Relation JSON


def rel_to_dict(r: BinRel) -> dict:
    return {"size": r.size, "pairs": [[a, b] for a, b in sorted(r.pairs())]}


def rel_from_dict(d: dict) -> BinRel:
    try:
        size = d["size"]
        pairs = [(int(a), int(b)) for a, b in d["pairs"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed relation JSON: {exc}") from None
    return BinRel.from_pairs(size, pairs)
