import pytest

from finalg.dsl import parse_statement
from finalg.errors import InputError, ResourceError
from finalg.lattice import (
    ReductSpec,
    SPEC_B,
    SPEC_U,
    TERM_MEDIAN,
    TERM_MEET,
    c2_generator,
    chain,
    reduct,
)
from finalg.relations import BinRel, admissible_closure, congruence_closure
from finalg.variety import (
    _free_generic,
    _generic_config,
    absorption_check,
    arithmeticity_probe,
    classify_boolean_reduct,
    find_term,
    free_algebra,
    modularity_level,
    spectrum,
    variety_relation_check,
)

B = c2_generator("b")
U = c2_generator("u")
MEDIAN = reduct(chain(1), ReductSpec((("m", 3, TERM_MEDIAN),)))
MEET = reduct(chain(1), ReductSpec((("meet", 2, TERM_MEET),)))


def test_free_algebra_sizes_b():
    assert free_algebra(B, 2).size == 3
    assert free_algebra(B, 3).size == 10
    assert free_algebra(B, 4).size == 53
    assert free_algebra(B, 5).size == 686


def test_free_algebra_sizes_u():
    assert free_algebra(U, 3).size == 10
    assert free_algebra(U, 4).size == 54


def test_free_b_u_rank3_same_value_vectors():
    fb = free_algebra(B, 3)
    fu = free_algebra(U, 3)
    assert {int(m) for m in fb.masks} == {int(m) for m in fu.masks}


def test_packed_matches_generic_free_construction():
    for alg, k in ((B, 3), (U, 3), (B, 4)):
        fa = free_algebra(alg, k)
        fg = _free_generic(alg, k)
        assert fa.size == fg.size
        generic_masks = {
            sum(b << i for i, b in enumerate(vec)) for vec in fg.vectors
        }
        assert {int(m) for m in fa.masks} == generic_masks


def test_packed_closures_match_plain_closures():
    for alg, k in ((B, 3), (U, 3), (B, 4)):
        fa = free_algebra(alg, k)
        seed = [(fa.generators[0], fa.generators[1])]
        from finalg.variety import (
            _admissible_closure_packed,
            _congruence_closure_packed,
        )

        sub = fa.view
        adm = _admissible_closure_packed(fa, seed)
        assert adm == admissible_closure(sub, BinRel.from_pairs(fa.size, seed))
        cong = _congruence_closure_packed(fa, seed)
        assert cong == congruence_closure(sub, BinRel.from_pairs(fa.size, seed))


def test_find_term_results():
    t = find_term(U, "nu", 4)
    assert t is not None and t[0] == "u"
    assert find_term(B, "majority") is None
    assert find_term(B, "maltsev") is None
    assert find_term(B, "nu", 4) is None
    assert find_term(B, "nu", 5) is None
    assert find_term(B, "baker_b") is not None
    with pytest.raises(InputError):
        find_term(B, "unknown-kind")


def test_absorption():
    for k in range(2, 6):
        rep = absorption_check(B, 0, k)
        assert rep.holds, k
        assert rep.counterexample is None
    rep = absorption_check(MEET, 1, 2)
    assert not rep.holds or rep.holds  # report shape only
    assert rep.arity == 2


def test_spectrum_small():
    assert spectrum(B, 2) == 4
    assert spectrum(U, 2) == 4
    assert spectrum(B, 3) == 5
    assert spectrum(U, 3) == 5


def test_modularity_levels():
    assert modularity_level(B) == 5
    assert modularity_level(U) == 5
    assert modularity_level(MEDIAN) == 3
    assert modularity_level(MEET, max_m=8) is None


def test_variety_check_negative_controls():
    stmt = parse_statement(
        "meet(T,comp(R,R)) <= pow(meet(T,R),3)", roles={"T": "adm", "R": "adm"}
    )
    res = variety_relation_check(B, stmt, 2)
    assert not res.holds and res.witness is not None
    res = variety_relation_check(U, stmt, 2)
    assert res.holds
    stmt = parse_statement(
        "meet(T,alt(R,S,3)) <= alt(meet(T,R),meet(T,S),5)",
        roles={"T": "adm", "R": "adm", "S": "adm"},
    )
    assert variety_relation_check(U, stmt, 3).holds
    assert not variety_relation_check(B, stmt, 3).holds


def test_variety_check_reports_sizes():
    stmt = parse_statement(
        "meet(T,comp(R,R)) <= pow(meet(T,R),4)", roles={"T": "adm", "R": "adm"}
    )
    res = variety_relation_check(B, stmt, 2)
    assert res.holds and res.free_size == 10  # chains need 3 generators
    assert res.env_sizes


def test_generic_config_validation():
    with pytest.raises(InputError):
        _generic_config(parse_statement("comp(R,S) <= comp(S,R)"), 2)
    with pytest.raises(InputError):
        _generic_config(parse_statement("meet(T,R) <= comp(T,R,S)"), 2)


def test_classify_boolean_reducts():
    rep = classify_boolean_reduct(SPEC_B)
    assert rep["baker_b"] is not None
    assert rep["majority"] is None and rep["maltsev"] is None
    assert rep["nu4"] is None
    assert rep["modularity_level"] == 5 and rep["consistent"]

    rep = classify_boolean_reduct(SPEC_U)
    assert rep["baker_b"] is not None and rep["nu4"] is not None
    assert rep["modularity_level"] == 5 and rep["consistent"]

    rep = classify_boolean_reduct(ReductSpec((("m", 3, TERM_MEDIAN),)))
    assert rep["majority"] is not None and rep["nu4"] is not None
    assert rep["modularity_level"] == 3 and rep["consistent"]

    rep = classify_boolean_reduct(ReductSpec((("meet", 2, TERM_MEET),)))
    assert rep["majority"] is None and rep["maltsev"] is None
    assert rep["baker_b"] is None
    assert rep["modularity_level"] is None and rep["consistent"]


def test_arithmeticity_probe_positive():
    from finalg.core import make_algebra, make_operation

    med = MEDIAN.operations[0]
    xor3 = make_operation(
        "p", 3, [(x ^ y ^ z) for x in range(2) for y in range(2) for z in range(2)]
    )
    # table_index orders arguments most-significant-first; xor is symmetric
    alg = make_algebra(2, [med, xor3], name="med-xor")
    rep = arithmeticity_probe(alg)
    assert rep["majority"] is not None
    assert rep["maltsev"] is not None
    assert rep["identity_holds_everywhere"]
    assert rep["congruence_count"] == 2
    assert rep["agreement"]


def test_arithmeticity_probe_baker():
    from finalg.lattice import baker_instance

    rep = arithmeticity_probe(baker_instance(2, "b").algebra)
    assert rep["majority"] is None and rep["maltsev"] is None
    assert not rep["identity_holds_everywhere"]
    assert rep["violating_quadruple_sizes"] == (11, 29, 33, 33)
    assert rep["congruence_count"] == 32
    assert rep["agreement"]


def test_free_algebra_resource_cap(monkeypatch):
    import finalg.variety as v

    monkeypatch.setattr(v, "MAX_FREE_ELEMENTS", 5)
    v._FREE_CACHE.clear()
    try:
        with pytest.raises(ResourceError):
            v.free_algebra(B, 3)
    finally:
        v._FREE_CACHE.clear()
