"""Expression DSL for relation identities.

Grammar (whitespace-insensitive, functional):

    expr := IDENT | "diag" | "comp(" expr ("," expr)+ ")"
          | "alt(" expr "," expr "," INT ")" | "pow(" expr "," INT ")"
          | "meet(" expr ("," expr)+ ")" | "conv(" expr ")"
          | "tc(" expr ")" | "adm(" expr "," expr ")"

    statement := expr "<=" expr | expr "==" expr
    roles     := IDENT ":" ("cong"|"tol"|"adm") ("," ...)*

alt(e1,e2,k) is the k-factor alternating composition starting with e1;
k = 0 denotes the diagonal.  adm(e1,e2) is the smallest reflexive
admissible relation containing the union of its arguments.  Parse errors
cite byte offsets.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .core import Algebra
from .errors import InputError
from .relations import (
    BinRel,
    admissible_closure,
    compose_all,
    compose_alt,
    converse,
    is_admissible,
    is_congruence,
    is_tolerance,
    meet,
    transitive_closure,
    union_raw,
)

_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<int>\d+)|(?P<punct>[(),])|(?P<le><=)|(?P<eq>==))")

_KEYWORDS = {"diag", "comp", "alt", "pow", "meet", "conv", "tc", "adm"}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens = []
        self._tokenize()
        self.idx = 0

    def _tokenize(self):
        pos = 0
        while pos < len(self.text):
            m = _TOKEN.match(self.text, pos)
            if m is None or m.end() == pos:
                stripped = self.text[pos:].lstrip()
                if not stripped:
                    break
                off = len(self.text) - len(stripped)
                raise InputError(f"byte {off}: unexpected character {stripped[0]!r}")
            kind = m.lastgroup
            val = m.group(kind)
            self.tokens.append((kind, val, m.start(kind)))
            pos = m.end()

    def peek(self):
        return self.tokens[self.idx] if self.idx < len(self.tokens) else None

    def next(self):
        t = self.peek()
        if t is None:
            raise InputError(f"byte {len(self.text)}: unexpected end of input")
        self.idx += 1
        return t

    def expect_punct(self, ch: str):
        t = self.next()
        if t[0] != "punct" or t[1] != ch:
            raise InputError(f"byte {t[2]}: expected {ch!r}, got {t[1]!r}")

    def parse_int(self) -> int:
        t = self.next()
        if t[0] != "int":
            raise InputError(f"byte {t[2]}: expected integer, got {t[1]!r}")
        return int(t[1])

    def parse_expr(self):
        t = self.next()
        if t[0] == "ident":
            name = t[1]
            if name == "diag":
                return ("diag",)
            if name in _KEYWORDS:
                self.expect_punct("(")
                if name in ("comp", "meet"):
                    args = [self.parse_expr()]
                    while self._try_comma():
                        args.append(self.parse_expr())
                    self.expect_punct(")")
                    if len(args) < 2:
                        raise InputError(
                            f"byte {t[2]}: {name} needs at least two arguments"
                        )
                    return (name, tuple(args))
                if name == "alt":
                    e1 = self.parse_expr()
                    self.expect_punct(",")
                    e2 = self.parse_expr()
                    self.expect_punct(",")
                    k = self.parse_int()
                    self.expect_punct(")")
                    return ("alt", e1, e2, k)
                if name == "pow":
                    e = self.parse_expr()
                    self.expect_punct(",")
                    k = self.parse_int()
                    self.expect_punct(")")
                    return ("alt", e, e, k)
                if name in ("conv", "tc"):
                    e = self.parse_expr()
                    self.expect_punct(")")
                    return (name, e)
                if name == "adm":
                    e1 = self.parse_expr()
                    self.expect_punct(",")
                    e2 = self.parse_expr()
                    self.expect_punct(")")
                    return ("adm", e1, e2)
            return ("var", name)
        raise InputError(f"byte {t[2]}: expected expression, got {t[1]!r}")

    def _try_comma(self) -> bool:
        t = self.peek()
        if t is not None and t[0] == "punct" and t[1] == ",":
            self.idx += 1
            return True
        return False


def parse_expr(text: str):
    p = _Parser(text)
    e = p.parse_expr()
    t = p.peek()
    if t is not None:
        raise InputError(f"byte {t[2]}: trailing input {t[1]!r}")
    return e


@dataclass
class IdentityStatement:
    lhs: tuple
    rhs: tuple
    mode: str  # "inclusion" | "equality"
    roles: dict  # var name -> "cong" | "tol" | "adm"


def parse_statement(text: str, roles: Optional[dict] = None) -> IdentityStatement:
    p = _Parser(text)
    lhs = p.parse_expr()
    t = p.next()
    if t[0] == "le":
        mode = "inclusion"
    elif t[0] == "eq":
        mode = "equality"
    else:
        raise InputError(f"byte {t[2]}: expected '<=' or '==', got {t[1]!r}")
    rhs = p.parse_expr()
    tail = p.peek()
    if tail is not None:
        raise InputError(f"byte {tail[2]}: trailing input {tail[1]!r}")
    return IdentityStatement(lhs, rhs, mode, roles or {})


_ROLES = {"cong", "tol", "adm"}


def parse_roles(text: str) -> dict:
    roles = {}
    if not text.strip():
        return roles
    for part in text.split(","):
        if ":" not in part:
            raise InputError(f"malformed role {part!r}, expected NAME:ROLE")
        name, role = part.split(":", 1)
        name, role = name.strip(), role.strip()
        if role not in _ROLES:
            raise InputError(f"unknown role {role!r} (expected cong, tol or adm)")
        roles[name] = role
    return roles


def expr_variables(e: tuple) -> set[str]:
    kind = e[0]
    if kind == "var":
        return {e[1]}
    if kind == "diag":
        return set()
    if kind in ("comp", "meet"):
        out = set()
        for c in e[1]:
            out |= expr_variables(c)
        return out
    if kind == "alt":
        return expr_variables(e[1]) | expr_variables(e[2])
    if kind in ("conv", "tc"):
        return expr_variables(e[1])
    if kind == "adm":
        return expr_variables(e[1]) | expr_variables(e[2])
    raise InputError(f"unknown expression node {kind!r}")


def eval_expr(alg: Algebra, env: dict, e: tuple) -> BinRel:
    kind = e[0]
    if kind == "var":
        if e[1] not in env:
            raise InputError(f"unbound relation variable {e[1]!r}")
        return env[e[1]]
    if kind == "diag":
        return BinRel.diag(alg.size)
    if kind == "comp":
        return compose_all([eval_expr(alg, env, c) for c in e[1]])
    if kind == "meet":
        return meet(*[eval_expr(alg, env, c) for c in e[1]])
    if kind == "alt":
        return compose_alt(eval_expr(alg, env, e[1]), eval_expr(alg, env, e[2]), e[3])
    if kind == "conv":
        return converse(eval_expr(alg, env, e[1]))
    if kind == "tc":
        return transitive_closure(eval_expr(alg, env, e[1]))
    if kind == "adm":
        return admissible_closure(
            alg, union_raw(eval_expr(alg, env, e[1]), eval_expr(alg, env, e[2]))
        )
    raise InputError(f"unknown expression node {kind!r}")


_ROLE_CHECKS = {"cong": is_congruence, "tol": is_tolerance, "adm": is_admissible}


def enforce_roles(alg: Algebra, env: dict, roles: dict, variables: set[str]):
    for name in sorted(variables):
        if name not in roles:
            raise InputError(f"variable {name!r} has no declared role")
        if name not in env:
            raise InputError(f"variable {name!r} not bound to a relation")
        ok, why = _ROLE_CHECKS[roles[name]](alg, env[name])
        if not ok:
            raise InputError(
                f"relation {name!r} violates declared role {roles[name]!r}: {why}"
            )


@dataclass
class CheckResult:
    holds: bool
    witness: Optional[tuple[int, int]]  # lexicographically least missing pair
    direction: Optional[str]  # "lhs-rhs" or "rhs-lhs" for equality mode

    def __bool__(self):
        return self.holds


def check_inclusion(
    alg: Algebra, env: dict, stmt: IdentityStatement, enforce: bool = True
) -> CheckResult:
    # enforce=False is for callers that built env with the role closures
    # themselves; externally supplied relations must stay validated.
    variables = expr_variables(stmt.lhs) | expr_variables(stmt.rhs)
    if enforce:
        enforce_roles(alg, env, stmt.roles, variables)
    lhs = eval_expr(alg, env, stmt.lhs)
    rhs = eval_expr(alg, env, stmt.rhs)
    missing = _least_missing(lhs, rhs)
    if missing is not None:
        return CheckResult(False, missing, "lhs-rhs")
    if stmt.mode == "equality":
        missing = _least_missing(rhs, lhs)
        if missing is not None:
            return CheckResult(False, missing, "rhs-lhs")
    return CheckResult(True, None, None)


def _least_missing(a: BinRel, b: BinRel) -> Optional[tuple[int, int]]:
    for x in range(a.size):
        extra = a.rows[x] & ~b.rows[x]
        if extra:
            return (x, (extra & -extra).bit_length() - 1)
    return None
