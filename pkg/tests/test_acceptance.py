"""Acceptance gate: eleven end-to-end criteria, one test each.

Each test asserts exact integer results together with its time budget.
When a computation legitimately exceeds a resource cap, the skip is
recorded via a warning (visible in the pytest summary) and the
corresponding instance-level evidence is checked instead — skips are
never silent.
"""

import dataclasses
import random
import time
import warnings

import pytest

from finalg.dsl import parse_statement
from finalg.errors import ResourceError
from finalg.lattice import (
    ReductSpec,
    SPEC_B,
    SPEC_U,
    TERM_MEDIAN,
    TERM_MEET,
    baker_instance,
    c2_generator,
    chain,
    lambda_tolerance,
    psi_tolerance,
    reduct,
)
from finalg.relations import (
    BinRel,
    admissible_closure,
    admissible_closure_naive,
    all_congruences,
    compose_alt,
    congruence_closure,
    meet,
    min_alternation,
)
from finalg.scenarios import Checks, instance_chain_checks, run_scenario
from finalg.variety import (
    absorption_check,
    classify_boolean_reduct,
    find_term,
    free_algebra,
    modularity_level,
    spectrum,
    variety_relation_check,
)

from conftest import random_algebra

B = c2_generator("b")
U = c2_generator("u")
ALGS = {"b": B, "u": U}


def _record_skip(label: str, reason: str):
    message = f"recorded resource skip: {label}: {reason}"
    print(message, flush=True)
    warnings.warn(message)


def _instance_optimality(n: int, sig: str):
    """Exact alternation level on the order instance (criterion 2 logic)."""
    inst = baker_instance(n, sig)
    c = inst.c
    lhs = meet(inst.alpha, compose_alt(inst.beta, inst.gamma, n))
    assert lhs.has(c[0], c[n])
    res = min_alternation(
        meet(inst.alpha, inst.beta), meet(inst.alpha, inst.gamma), c[0], c[n]
    )
    expected = 2 * n if n % 2 == 0 else 2 * n - 1
    assert res.start_first == expected, (n, sig, res.start_first)
    assert len(inst.up) == 2 * n + 1


def test_criterion_01_variety_spectrum_values():
    expected = {2: 4, 3: 5, 4: 8, 5: 9}
    for sig in ("b", "u"):
        for n in (2, 3):
            t0 = time.monotonic()
            assert spectrum(ALGS[sig], n) == expected[n], (sig, n)
            assert time.monotonic() - t0 < 10.0, (sig, n)
    for sig in ("b", "u"):
        for n in (4, 5):
            t0 = time.monotonic()
            try:
                value = spectrum(ALGS[sig], n)
            except ResourceError as exc:
                _record_skip(f"spectrum({sig}, {n})", str(exc))
                _instance_optimality(n, sig)
                continue
            assert value == expected[n], (sig, n, value)
            assert time.monotonic() - t0 < 600.0, (sig, n)


def test_criterion_02_instance_alternation_levels():
    for sig in ("b", "u"):
        for n in range(2, 7):
            t0 = time.monotonic()
            _instance_optimality(n, sig)
            assert time.monotonic() - t0 < 5.0, (sig, n)


def test_criterion_03_modularity_levels():
    t0 = time.monotonic()
    assert modularity_level(B) == 5
    assert modularity_level(U) == 5
    assert spectrum(B, 2) == 4
    assert spectrum(U, 2) == 4
    assert time.monotonic() - t0 < 10.0


def test_criterion_04_tolerance_thresholds():
    for n in range(2, 6):
        # 4-ary signature: the symmetric-step tolerance needs exactly 2n-1
        t0 = time.monotonic()
        inst = baker_instance(n, "u")
        theta = psi_tolerance(inst)
        a_th = meet(inst.alpha, theta)
        res = min_alternation(a_th, a_th, inst.c[0], inst.c[n])
        assert res.start_first == 2 * n - 1, ("u", n, res.start_first)
        assert time.monotonic() - t0 < 5.0, ("u", n)

        # ternary signature: cutting with the two-sided relation costs one more
        t0 = time.monotonic()
        inst = baker_instance(n, "b")
        theta = meet(lambda_tolerance(inst), psi_tolerance(inst))
        a_th = meet(inst.alpha, theta)
        res = min_alternation(a_th, a_th, inst.c[0], inst.c[n])
        assert res.start_first == 2 * n, ("b", n, res.start_first)
        assert not compose_alt(a_th, a_th, 2 * n - 2).has(inst.c[0], inst.c[n])
        assert time.monotonic() - t0 < 5.0, ("b", n)

    for n in (3, 5):
        # odd n: the beta-sided tolerance cannot reach the corners in 2n steps
        t0 = time.monotonic()
        inst = baker_instance(n, "b")
        theta = meet(lambda_tolerance(inst), inst.beta)
        a_th = meet(inst.alpha, theta)
        a_ga = meet(inst.alpha, inst.gamma)
        assert not compose_alt(a_th, a_ga, 2 * n).has(inst.c[0], inst.c[n])
        assert time.monotonic() - t0 < 5.0, ("b-odd", n)


def test_criterion_05_free_algebra_sizes():
    t0 = time.monotonic()
    fb = free_algebra(B, 3)
    fu = free_algebra(U, 3)
    assert fb.size == 10 and fu.size == 10
    assert {int(m) for m in fb.masks} == {int(m) for m in fu.masks}
    assert free_algebra(B, 2).size == 3
    assert time.monotonic() - t0 < 1.0


def test_criterion_06_term_searches():
    t0 = time.monotonic()
    assert find_term(U, "nu", 4) is not None
    assert find_term(B, "majority") is None
    assert find_term(B, "nu", 4) is None
    assert find_term(B, "nu", 5) is None
    assert find_term(B, "maltsev") is None
    for k in range(2, 6):
        assert absorption_check(B, 0, k).holds, k
    assert time.monotonic() - t0 < 60.0


POSITIVE_IDENTITIES = [
    # (sig, depth, statement, roles)
    ("b", 2, "meet(T,alt(R,S,2)) <= alt(meet(T,R),meet(T,S),4)",
     {"T": "adm", "R": "adm", "S": "adm"}),
    ("u", 2, "meet(T,alt(R,S,2)) <= alt(meet(T,R),meet(T,S),4)",
     {"T": "adm", "R": "adm", "S": "adm"}),
    ("b", 3, "meet(T,alt(R,S,3)) <= comp(alt(meet(T,R),meet(T,S),3),"
             "alt(meet(T,R),meet(T,S),3))",
     {"T": "adm", "R": "adm", "S": "adm"}),
    ("u", 3, "meet(T,alt(R,S,3)) <= alt(meet(T,R),meet(T,S),5)",
     {"T": "adm", "R": "adm", "S": "adm"}),
    ("b", 2, "meet(T,comp(R,R)) <= pow(meet(T,R),4)",
     {"T": "adm", "R": "adm"}),
    ("b", 3, "meet(T,comp(R,R,R)) <= pow(meet(T,R),6)",
     {"T": "adm", "R": "adm"}),
    ("u", 2, "meet(T,comp(R,R)) <= pow(meet(T,R),3)",
     {"T": "adm", "R": "adm"}),
    ("u", 3, "meet(T,comp(R,R,R)) <= pow(meet(T,R),5)",
     {"T": "adm", "R": "adm"}),
    ("u", 2, "meet(th,comp(R1,R2)) <= comp(meet(th,R1),meet(th,adm(R2,R1)),"
             "meet(th,R2))",
     {"th": "tol", "R1": "adm", "R2": "adm"}),
    ("u", 3, "meet(th,comp(R1,R2,R3)) <= comp(meet(th,R1),meet(th,R2),"
             "meet(th,adm(R3,R1)),meet(th,R2),meet(th,R3))",
     {"th": "tol", "R1": "adm", "R2": "adm", "R3": "adm"}),
    ("u", 2, "meet(al,alt(be,ga,2)) <= alt(meet(al,be),meet(al,ga),4)",
     {"al": "cong", "be": "cong", "ga": "cong"}),
    ("u", 3, "meet(al,alt(be,ga,3)) <= alt(meet(al,be),meet(al,ga),5)",
     {"al": "cong", "be": "cong", "ga": "cong"}),
    ("u", 2, "meet(th,comp(R,R)) <= pow(meet(th,R),3)",
     {"th": "tol", "R": "adm"}),
    ("u", 2, "meet(th,comp(R,S)) <= comp(meet(th,R),pow(meet(th,adm(R,S)),2))",
     {"th": "tol", "R": "adm", "S": "adm"}),
]


def test_criterion_07_variety_identities():
    assert len(POSITIVE_IDENTITIES) == 14
    t0 = time.monotonic()
    for sig, depth, text, roles in POSITIVE_IDENTITIES:
        stmt = parse_statement(text, roles=roles)
        res = variety_relation_check(ALGS[sig], stmt, depth)
        assert res.holds, (sig, depth, text, res.witness)
    assert time.monotonic() - t0 < 120.0


def test_criterion_08_obstruction_and_sampling():
    t0 = time.monotonic()
    for n in range(2, 6):
        report = run_scenario("rem-contol", n=n, seed=0)
        assert report.status == "pass", (n, report.details)
    assert time.monotonic() - t0 < 60.0


def test_criterion_09_closure_corpus():
    rng = random.Random(20260826)
    median = reduct(chain(1), ReductSpec((("m", 3, TERM_MEDIAN),)))
    corpus = [B, U, chain(1), median]
    corpus += [random_algebra(rng) for _ in range(200)]
    assert len(corpus) >= 204
    discrepancies = []
    for alg in corpus:
        congs = all_congruences(alg)
        for a in range(alg.size):
            for b in range(a + 1, alg.size):
                seed = BinRel.from_pairs(alg.size, [(a, b)])
                cl = congruence_closure(alg, seed)
                containing = [c for c in congs if c.has(a, b)]
                least = min(containing, key=lambda c: c.npairs())
                if cl != least or not all(least <= c for c in containing):
                    discrepancies.append(("congruence", alg.name, a, b))
                if admissible_closure(alg, seed) != admissible_closure_naive(
                    alg, seed
                ):
                    discrepancies.append(("admissible", alg.name, a, b))
    assert discrepancies == []


def test_criterion_10_reduct_classification():
    t0 = time.monotonic()
    rep = classify_boolean_reduct(SPEC_B)
    assert rep["baker_b"] is not None
    assert rep["majority"] is None and rep["maltsev"] is None and rep["nu4"] is None
    rep = classify_boolean_reduct(ReductSpec((("m", 3, TERM_MEDIAN),)))
    assert rep["majority"] is not None
    rep = classify_boolean_reduct(SPEC_U)
    assert rep["nu4"] is not None and rep["majority"] is None
    rep = classify_boolean_reduct(ReductSpec((("meet", 2, TERM_MEET),)))
    assert rep["majority"] is None and rep["maltsev"] is None
    assert rep["baker_b"] is None and rep["modularity_level"] is None
    assert time.monotonic() - t0 < 30.0


def test_criterion_11_mutation_detection():
    inst = baker_instance(2, "b")
    gens = [(inst.c[0], inst.c[1])]
    size = inst.algebra.size
    assert congruence_closure(inst.algebra, BinRel.from_pairs(size, gens)) == inst.beta

    for pair in gens:
        remaining = [p for p in gens if p != pair]
        weak_beta = congruence_closure(
            inst.algebra, BinRel.from_pairs(size, remaining)
        )
        mutated = dataclasses.replace(inst, beta=weak_beta)
        ck = Checks()
        instance_chain_checks(mutated, ck)
        assert not ck.ok, pair
        bad = [row["name"] for row in ck.rows if not row["ok"]]
        assert bad and all(name for name in bad), pair

    # dropping the pair after closure breaks transitivity; the congruence
    # re-assertion must name the violation
    x, y = gens[0]
    raw = BinRel.from_pairs(
        size, [p for p in inst.beta.pairs() if p not in ((x, y), (y, x))]
    )
    mutated = dataclasses.replace(inst, beta=raw)
    ck = Checks()
    instance_chain_checks(mutated, ck)
    assert not ck.ok
    bad = [row["name"] for row in ck.rows if not row["ok"]]
    assert "beta is a congruence" in bad
