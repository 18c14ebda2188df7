"""Chains, lattice-term reducts, and the three-factor product construction
with its canonical congruences and tolerances.

The instance for parameter n lives inside L = C_{n+1} x C_{n+1} x C_2.
Elements are triples (i1, i2, i3) with i3 = 1 rendered as an up arrow and
0 as a down arrow.  The universe B is the downset of the chain elements
c_0 = (n,0,up), c_n = (0,n,up), c_i = (n-i,i,down) for 0 < i < n; the minus
variant removes (n,0,down) and (0,n,down).  Construction never trusts
itself: closedness and congruence-hood are re-verified and any failure is a
hard fault.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .core import Algebra, Term, make_algebra, make_operation
from .errors import InputError
from .relations import BinRel, is_congruence, meet as rel_meet

# Lattice terms are core Terms restricted to the operation names
# "meet"/"join"; rendered as polynomials, meet is juxtaposition and join
# is +.

TERM_B: Term = ("meet", (0, ("join", (1, 2))))  # x0 (x1 + x2)

# All six pairwise joins of four variables, met together; equals the
# second-smallest argument in any distributive lattice.
TERM_U: Term = (
    "meet",
    (
        ("join", (0, 1)),
        ("meet",
         (("join", (0, 2)),
          ("meet",
           (("join", (0, 3)),
            ("meet",
             (("join", (1, 2)),
              ("meet", (("join", (1, 3)), ("join", (2, 3)))))))))),
    ),
)

TERM_MEDIAN: Term = (
    "join",
    (("meet", (0, 1)), ("join", (("meet", (0, 2)), ("meet", (1, 2))))),
)

TERM_MEET: Term = ("meet", (0, 1))
TERM_JOIN: Term = ("join", (0, 1))


def lattice_poly_str(term: Term, names: Optional[list[str]] = None) -> str:
    """Render a meet/join term as a lattice polynomial, e.g. x(y+z)."""

    def var(i: int) -> str:
        if names and i < len(names):
            return names[i]
        return "xyzw"[i] if i < 4 else f"x{i}"

    def go(t: Term, parent: str) -> str:
        if isinstance(t, int):
            return var(t)
        op, (l, r) = t
        if op == "meet":
            s = go(l, "meet") + go(r, "meet")
            return s
        s = go(l, "join") + "+" + go(r, "join")
        return f"({s})" if parent == "meet" else s

    return go(term, "join")


def eval_lattice_term_np(term: Term, args: list[np.ndarray]) -> np.ndarray:
    if isinstance(term, int):
        return args[term]
    op, children = term
    acc = eval_lattice_term_np(children[0], args)
    fn = np.minimum if op == "meet" else np.maximum
    for c in children[1:]:
        acc = fn(acc, eval_lattice_term_np(c, args))
    return acc


def term_arity(term: Term) -> int:
    if isinstance(term, int):
        return term + 1
    return max(term_arity(c) for c in term[1])


@dataclass(frozen=True)
class ReductSpec:
    """Named lattice terms; arity may exceed the largest used variable."""

    p: tuple  # of (name, arity, Term)

    def __post_init__(self):
        names = [name for name, _, _ in self.p]
        if len(set(names)) != len(names):
            raise InputError("duplicate operation name in reduct spec")
        for name, arity, term in self.p:
            if term_arity(term) > arity:
                raise InputError(
                    f"term for {name!r} uses variables beyond declared arity {arity}"
                )


def chain(h: int) -> Algebra:
    """The h+1 element chain 0 < 1 < ... < h with meet and join."""
    if h < 1:
        raise InputError(f"chain parameter must be >= 1, got {h}")
    s = h + 1
    grid_a, grid_b = np.meshgrid(np.arange(s), np.arange(s), indexing="ij")
    return make_algebra(
        s,
        [
            make_operation("meet", 2, np.minimum(grid_a, grid_b).ravel()),
            make_operation("join", 2, np.maximum(grid_a, grid_b).ravel()),
        ],
        name=f"C{s}",
    )


def reduct(lattice: Algebra, spec: ReductSpec) -> Algebra:
    """Same universe; operations are the tables induced by the spec terms."""
    meet_op = lattice.operation("meet")
    join_op = lattice.operation("join")
    s = lattice.size
    mt = meet_op.table.reshape((s, s))
    jt = join_op.table.reshape((s, s))

    def ev(term: Term, args: list[np.ndarray]) -> np.ndarray:
        if isinstance(term, int):
            return args[term]
        op, children = term
        tab = mt if op == "meet" else jt
        acc = ev(children[0], args)
        for c in children[1:]:
            acc = tab[acc, ev(c, args)]
        return acc

    ops = []
    for name, arity, term in spec.p:
        args = []
        for j in range(arity):
            shape = [1] * arity
            shape[j] = s
            args.append(np.arange(s, dtype=np.int64).reshape(shape))
        table = np.broadcast_to(ev(term, args), (s,) * arity)
        ops.append(make_operation(name, arity, np.ascontiguousarray(table).ravel()))
    return make_algebra(s, ops, name=f"{lattice.name}_P")


SPEC_B = ReductSpec((("b", 3, TERM_B),))
SPEC_U = ReductSpec((("u", 4, TERM_U),))


@lru_cache(maxsize=None)
def c2_generator(signature: str) -> Algebra:
    """The two-element generator (C2, b) or (C2, u).  Cached so repeated
    callers share one instance (and downstream per-instance memoization)."""
    if signature == "b":
        alg = reduct(chain(1), SPEC_B)
    elif signature == "u":
        alg = reduct(chain(1), SPEC_U)
    else:
        raise InputError(f"signature must be 'b' or 'u', got {signature!r}")
    return make_algebra(2, alg.operations, name=f"c2{signature}")


@dataclass(frozen=True)
class BakerInstance:
    n: int
    signature: str  # "b" | "u"
    minus: bool
    algebra: Algebra
    c: tuple[int, ...]  # c_0 .. c_n as element indices
    e: tuple[int, ...]  # e_i = (n-i, 0, up)
    f: tuple[int, ...]  # f_i = (0, i, up)
    up: frozenset  # B with third coordinate up
    alpha: BinRel
    beta: BinRel
    gamma: BinRel
    index_map: dict  # element index -> (i1, i2, i3)

    @property
    def down(self) -> frozenset:
        return frozenset(range(self.algebra.size)) - self.up

    def triple_str(self, element: int) -> str:
        i1, i2, i3 = self.index_map[element]
        return f"({i1},{i2},{'^' if i3 else 'v'})"


class ConstructionFault(RuntimeError):
    """A re-verified invariant of the construction failed."""


def _beta_gamma_clause(n: int, t1, t2, flavor: str) -> bool:
    (i1, i2, _), (j1, j2, _) = t1, t2
    if abs(i1 - j1) > 1 or abs(i2 - j2) > 1:
        return False
    if flavor == "beta":
        if i1 != j1 and max(i1, j1) % 2 != n % 2:
            return False
        if i2 != j2 and max(i2, j2) % 2 != 1:
            return False
    else:
        if i1 != j1 and max(i1, j1) % 2 == n % 2:
            return False
        if i2 != j2 and max(i2, j2) % 2 != 0:
            return False
    return True


def baker_instance(n: int, signature: str = "u", minus: bool = False) -> BakerInstance:
    if n < 2:
        raise InputError(f"instance parameter must be >= 2, got {n}")
    if signature not in ("b", "u"):
        raise InputError(f"signature must be 'b' or 'u', got {signature!r}")

    c_triples = [(n, 0, 1)] + [(n - i, i, 0) for i in range(1, n)] + [(0, n, 1)]
    universe = []
    for i1 in range(n + 1):
        for i2 in range(n + 1):
            for i3 in (0, 1):
                t = (i1, i2, i3)
                if any(
                    t[0] <= ct[0] and t[1] <= ct[1] and t[2] <= ct[2]
                    for ct in c_triples
                ):
                    universe.append(t)
    if minus:
        universe = [t for t in universe if t not in ((n, 0, 0), (0, n, 0))]
    universe.sort()
    m = len(universe)
    idx_of = {t: i for i, t in enumerate(universe)}
    index_map = {i: t for i, t in enumerate(universe)}

    term = TERM_B if signature == "b" else TERM_U
    arity = 3 if signature == "b" else 4
    coords = [np.array([t[k] for t in universe], dtype=np.int64) for k in range(3)]
    arg_coord = []
    for j in range(arity):
        shape = [1] * arity
        shape[j] = m
        arg_coord.append([coords[k].reshape(shape) for k in range(3)])
    res = [
        eval_lattice_term_np(term, [arg_coord[j][k] for j in range(arity)])
        for k in range(3)
    ]
    res = [np.broadcast_to(r, (m,) * arity) for r in res]
    enc = (res[0] * (n + 1) + res[1]) * 2 + res[2]
    lut = np.full(2 * (n + 1) * (n + 1), -1, dtype=np.int64)
    for t, i in idx_of.items():
        lut[(t[0] * (n + 1) + t[1]) * 2 + t[2]] = i
    table = lut[enc.ravel()]
    if (table < 0).any():
        bad = int(np.nonzero(table < 0)[0][0])
        raise ConstructionFault(
            f"universe not closed under {signature!r} at flat tuple {bad}"
        )
    alg = make_algebra(
        m,
        [make_operation(signature, arity, table)],
        name=f"baker{n}{signature}{'-minus' if minus else ''}",
    )

    alpha = BinRel.from_pairs(
        m,
        [
            (i, j)
            for i in range(m)
            for j in range(m)
            if universe[i][2] == universe[j][2]
        ],
    )
    beta = BinRel.from_pairs(
        m,
        [
            (i, j)
            for i in range(m)
            for j in range(m)
            if _beta_gamma_clause(n, universe[i], universe[j], "beta")
        ],
    )
    gamma = BinRel.from_pairs(
        m,
        [
            (i, j)
            for i in range(m)
            for j in range(m)
            if _beta_gamma_clause(n, universe[i], universe[j], "gamma")
        ],
    )
    for name, rel in (("alpha", alpha), ("beta", beta), ("gamma", gamma)):
        ok, why = is_congruence(alg, rel)
        if not ok:
            raise ConstructionFault(f"{name} is not a congruence: {why}")

    # Cross-check: beta equals the meet of the two congruences pulled back
    # from the coordinate chains (blocks {n,n-1},{n-2,n-3},... on the first
    # coordinate and {0,1},{2,3},... on the second).
    beta1 = BinRel.from_pairs(
        m,
        [
            (i, j)
            for i in range(m)
            for j in range(m)
            if (n - universe[i][0]) // 2 == (n - universe[j][0]) // 2
        ],
    )
    beta2 = BinRel.from_pairs(
        m,
        [
            (i, j)
            for i in range(m)
            for j in range(m)
            if universe[i][1] // 2 == universe[j][1] // 2
        ],
    )
    if rel_meet(beta1, beta2) != beta:
        raise ConstructionFault("beta disagrees with the projection pullback form")

    def need(t):
        if t not in idx_of:
            raise ConstructionFault(f"distinguished element {t} missing from universe")
        return idx_of[t]

    c = tuple(need(t) for t in c_triples)
    e = tuple(need((n - i, 0, 1)) for i in range(n + 1))
    f = tuple(need((0, i, 1)) for i in range(n + 1))
    up = frozenset(i for i, t in enumerate(universe) if t[2] == 1)
    if not (e[0] == c[0] and f[n] == c[n] and e[n] == f[0]):
        raise ConstructionFault("corner identities among e/f/c fail")
    if len(up) != 2 * n + 1:
        raise ConstructionFault(f"|up set| = {len(up)}, expected {2 * n + 1}")

    return BakerInstance(
        n=n,
        signature=signature,
        minus=minus,
        algebra=alg,
        c=c,
        e=e,
        f=f,
        up=up,
        alpha=alpha,
        beta=beta,
        gamma=gamma,
        index_map=index_map,
    )


def lambda_tolerance(inst: BakerInstance) -> BinRel:
    """Pairs within E, within F, or touching the down part.  Only a
    tolerance for signature b; refused for u, where it is not admissible."""
    if inst.signature != "b":
        raise InputError("lambda relation is not admissible for signature u")
    return lambda_relation(inst)


def lambda_relation(inst: BakerInstance) -> BinRel:
    """The raw pair set of lambda_tolerance without the signature guard;
    used to exhibit the compatibility failure on signature u."""
    m = inst.algebra.size
    e_set, f_set = set(inst.e), set(inst.f)
    down = inst.down
    pairs = []
    for x in range(m):
        for y in range(m):
            if (
                (x in e_set and y in e_set)
                or (x in f_set and y in f_set)
                or x in down
                or y in down
            ):
                pairs.append((x, y))
    return BinRel.from_pairs(m, pairs)


def psi_tolerance(inst: BakerInstance) -> BinRel:
    """Pairs whose first two coordinates differ at most by 1; the
    restriction of a product tolerance of L, hence a tolerance for both
    signatures."""
    m = inst.algebra.size
    tm = inst.index_map
    pairs = [
        (x, y)
        for x in range(m)
        for y in range(m)
        if abs(tm[x][0] - tm[y][0]) <= 1 and abs(tm[x][1] - tm[y][1]) <= 1
    ]
    return BinRel.from_pairs(m, pairs)


def baker_companion_dict(inst: BakerInstance) -> dict:
    from .relations import rel_to_dict

    return {
        "c": list(inst.c),
        "e": list(inst.e),
        "f": list(inst.f),
        "up": sorted(inst.up),
        "alpha": sorted([a, b] for a, b in inst.alpha.pairs()),
        "beta": sorted([a, b] for a, b in inst.beta.pairs()),
        "gamma": sorted([a, b] for a, b in inst.gamma.pairs()),
        "index_map": {str(i): list(t) for i, t in sorted(inst.index_map.items())},
    }
