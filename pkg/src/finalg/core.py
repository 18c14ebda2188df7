"""Finite algebras as operation tables, term evaluation, products, subalgebras.

Elements are dense integers 0..size-1.  Operation tables are flat, row-major,
with the first argument most significant, so the table index of f(a1,...,am)
is ((a1*size + a2)*size + ...)*size + am.  That layout is also the normative
JSON interchange format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import InputError, ResourceError

MAX_ARITY = 6
MAX_TABLE_LEN = 1 << 26

# A term is either a variable index (int) or (op_name, tuple_of_subterms).
Term = Union[int, tuple]


@dataclass(frozen=True)
class Operation:
    name: str
    arity: int
    table: np.ndarray  # int32, length size**arity, immutable by convention

    def __post_init__(self):
        tab = np.asarray(self.table, dtype=np.int32)
        tab.setflags(write=False)
        object.__setattr__(self, "table", tab)


@dataclass(frozen=True)
class Algebra:
    name: str
    size: int
    operations: tuple[Operation, ...]
    _op_index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "operations", tuple(self.operations))
        object.__setattr__(
            self, "_op_index", {op.name: op for op in self.operations}
        )

    def operation(self, name: str) -> Operation:
        try:
            return self._op_index[name]
        except KeyError:
            raise InputError(f"unknown operation {name!r}") from None

    def signature(self) -> tuple[tuple[str, int], ...]:
        return tuple((op.name, op.arity) for op in self.operations)


def make_algebra(size: int, operations: Iterable[Operation], name: str = "") -> Algebra:
    if size < 1:
        raise InputError(f"size must be >= 1, got {size}")
    ops = tuple(operations)
    seen = set()
    for op in ops:
        if op.name in seen:
            raise InputError(f"duplicate operation name {op.name!r}")
        seen.add(op.name)
        if op.arity < 0:
            raise InputError(f"operation {op.name!r}: negative arity")
        if op.arity > MAX_ARITY:
            raise ResourceError(
                f"operation {op.name!r}: arity {op.arity} exceeds cap {MAX_ARITY}"
            )
        expected = size**op.arity
        if expected > MAX_TABLE_LEN:
            raise ResourceError(
                f"operation {op.name!r}: table length {expected} exceeds cap {MAX_TABLE_LEN}"
            )
        if len(op.table) != expected:
            raise InputError(
                f"operation {op.name!r}: table length {len(op.table)}, expected {expected}"
            )
        if len(op.table) and (
            int(op.table.min()) < 0 or int(op.table.max()) >= size
        ):
            raise InputError(f"operation {op.name!r}: table entry out of range")
    return Algebra(name=name, size=size, operations=ops)


def make_operation(name: str, arity: int, table: Sequence[int]) -> Operation:
    return Operation(name=name, arity=arity, table=np.asarray(table, dtype=np.int32))


def table_index(size: int, args: Sequence[int]) -> int:
    idx = 0
    for a in args:
        idx = idx * size + a
    return idx


def apply(alg: Algebra, op_name: str, args: Sequence[int]) -> int:
    op = alg.operation(op_name)
    if len(args) != op.arity:
        raise InputError(
            f"operation {op_name!r} expects {op.arity} args, got {len(args)}"
        )
    for a in args:
        if not (0 <= a < alg.size):
            raise InputError(f"argument {a} out of range for size {alg.size}")
    return int(op.table[table_index(alg.size, args)])


def eval_term(alg: Algebra, term: Term, assignment: Sequence[int]) -> int:
    if isinstance(term, int):
        if not (0 <= term < len(assignment)):
            raise InputError(f"variable x{term} not covered by assignment")
        return assignment[term]
    op_name, children = term
    args = [eval_term(alg, c, assignment) for c in children]
    return apply(alg, op_name, args)


def term_variables(term: Term) -> set[int]:
    if isinstance(term, int):
        return {term}
    out: set[int] = set()
    for c in term[1]:
        out |= term_variables(c)
    return out


def term_to_str(term: Term) -> str:
    if isinstance(term, int):
        return f"x{term}"
    op_name, children = term
    return f"{op_name}({', '.join(term_to_str(c) for c in children)})"


def direct_product(algs: Sequence[Algebra]) -> Algebra:
    """Coordinatewise product; element encoding is mixed-radix with the
    first factor most significant."""
    if not algs:
        raise InputError("empty factor list")
    sig = algs[0].signature()
    for a in algs[1:]:
        if a.signature() != sig:
            raise InputError("signature mismatch between product factors")
    sizes = [a.size for a in algs]
    size = 1
    for s in sizes:
        size *= s
    ops = []
    for op_name, arity in sig:
        if size**arity > MAX_TABLE_LEN:
            raise ResourceError(
                f"product table for {op_name!r} would exceed cap {MAX_TABLE_LEN}"
            )
        # Decode each product element into factor coordinates, apply the
        # factor tables pointwise, re-encode.
        grids = np.meshgrid(
            *[np.arange(size, dtype=np.int64)] * arity, indexing="ij"
        ) if arity > 0 else []
        table = np.zeros(size**arity, dtype=np.int64)
        rem = [g.ravel() for g in grids]  # current residues, first factor peeled last
        # coords[j][i] = i-th coordinate of argument j
        coords = []
        for r in rem:
            c = []
            x = r
            for s in reversed(sizes):
                c.append(x % s)
                x = x // s
            c.reverse()
            coords.append(c)
        for i, a in enumerate(algs):
            if arity == 0:
                val = int(a.operation(op_name).table[0])
                table = table * a.size + val
                continue
            tab_i = a.operation(op_name).table.reshape((a.size,) * arity)
            args_i = tuple(coords[j][i] for j in range(arity))
            table = table * a.size + tab_i[args_i]
        ops.append(make_operation(op_name, arity, table))
    name = " x ".join(a.name or "?" for a in algs)
    return make_algebra(size, ops, name=name)


def product_encode(sizes: Sequence[int], coords: Sequence[int]) -> int:
    x = 0
    for s, c in zip(sizes, coords):
        if not (0 <= c < s):
            raise InputError(f"coordinate {c} out of range for factor size {s}")
        x = x * s + c
    return x


def product_decode(sizes: Sequence[int], element: int) -> tuple[int, ...]:
    coords = []
    for s in reversed(sizes):
        coords.append(element % s)
        element //= s
    coords.reverse()
    return tuple(coords)


def subuniverse_closure(alg: Algebra, seed: Iterable[int]):
    """Least subset of the universe containing seed and closed under every
    operation.  Returns (elements, subalgebra, index_map) where elements is
    sorted, subalgebra is the induced algebra re-indexed 0..m-1 and
    index_map maps original element -> new index.
    """
    current = sorted(set(seed))
    for e in current:
        if not (0 <= e < alg.size):
            raise InputError(f"seed element {e} out of range")
    cur = np.array(current, dtype=np.int64)
    while True:
        new_vals = []
        for op in alg.operations:
            if op.arity == 0:
                new_vals.append(op.table.astype(np.int64))
                continue
            tab = op.table.reshape((alg.size,) * op.arity)
            img = tab[np.ix_(*[cur] * op.arity)]
            new_vals.append(np.unique(img).astype(np.int64))
        allv = np.unique(np.concatenate([cur] + new_vals)) if new_vals else cur
        if len(allv) == len(cur):
            break
        cur = allv
    elements = [int(e) for e in cur]
    index_map = {e: i for i, e in enumerate(elements)}
    sub_ops = []
    lut = np.full(alg.size, -1, dtype=np.int64)
    lut[cur] = np.arange(len(cur))
    for op in alg.operations:
        if op.arity == 0:
            sub_ops.append(make_operation(op.name, 0, lut[op.table.astype(np.int64)]))
            continue
        tab = op.table.reshape((alg.size,) * op.arity)
        sub_tab = lut[tab[np.ix_(*[cur] * op.arity)].astype(np.int64)]
        sub_ops.append(make_operation(op.name, op.arity, sub_tab.ravel()))
    sub = make_algebra(len(elements), sub_ops, name=f"{alg.name}|sub")
    return elements, sub, index_map


def algebra_to_dict(alg: Algebra) -> dict:
    return {
        "name": alg.name,
        "size": alg.size,
        "operations": [
            {"name": op.name, "arity": op.arity, "table": [int(v) for v in op.table]}
            for op in alg.operations
        ],
    }


def algebra_from_dict(d: dict) -> Algebra:
    try:
        size = d["size"]
        ops = [
            make_operation(o["name"], o["arity"], o["table"])
            for o in d["operations"]
        ]
        name = d.get("name", "")
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed algebra JSON: {exc}") from None
    return make_algebra(size, ops, name=name)


def algebra_to_json(alg: Algebra) -> str:
    return json.dumps(algebra_to_dict(alg), indent=1)


def algebra_from_json(text: str) -> Algebra:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from None
    return algebra_from_dict(d)
