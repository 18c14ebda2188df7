import itertools

import pytest

from finalg.core import apply
from finalg.errors import InputError
from finalg.lattice import (
    baker_companion_dict,
    baker_instance,
    c2_generator,
    chain,
    lambda_relation,
    lambda_tolerance,
    lattice_poly_str,
    psi_tolerance,
)
from finalg.relations import (
    BinRel,
    congruence_closure,
    is_congruence,
    is_reflexive,
    is_symmetric,
    is_tolerance,
    union_raw,
)


def test_chain_tables():
    lat = chain(2)
    assert lat.size == 3
    for x, y in itertools.product(range(3), repeat=2):
        assert apply(lat, "meet", (x, y)) == min(x, y)
        assert apply(lat, "join", (x, y)) == max(x, y)
    with pytest.raises(InputError):
        chain(0)


def test_c2_generator_tables():
    b = c2_generator("b")
    # b(a, c, d) = a and (c or d)
    for a, c, d in itertools.product(range(2), repeat=3):
        assert apply(b, "b", (a, c, d)) == (a & (c | d))
    u = c2_generator("u")
    # u is the 4-ary near-unanimity term: true iff at least 3 of 4 inputs are 1
    for xs in itertools.product(range(2), repeat=4):
        assert apply(u, "u", xs) == (1 if sum(xs) >= 3 else 0)
    with pytest.raises(InputError):
        c2_generator("z")


def test_lattice_poly_str():
    assert lattice_poly_str(("meet", (0, ("join", (1, 2))))) == "x(y+z)"


@pytest.mark.parametrize("sig", ["b", "u"])
@pytest.mark.parametrize("n", [2, 3])
def test_baker_instance_structure(n, sig):
    inst = baker_instance(n, sig)
    assert inst.n == n and inst.signature == sig and not inst.minus
    # corner and chain triples
    assert inst.index_map[inst.c[0]] == (n, 0, 1)
    assert inst.index_map[inst.c[n]] == (0, n, 1)
    for i in range(1, n):
        assert inst.index_map[inst.c[i]] == (n - i, i, 0)
    for i in range(n + 1):
        assert inst.index_map[inst.e[i]] == (n - i, 0, 1)
        assert inst.index_map[inst.f[i]] == (0, i, 1)
    assert inst.e[0] == inst.c[0] and inst.f[n] == inst.c[n]
    assert inst.e[n] == inst.f[0]
    # the up-level has exactly 2n+1 elements and alpha splits on the level
    assert len(inst.up) == 2 * n + 1
    up = set(inst.up)
    for x in range(inst.algebra.size):
        for y in range(inst.algebra.size):
            same_level = (x in up) == (y in up)
            assert inst.alpha.has(x, y) == same_level
    # the named relations carry their advertised structure
    ok, _ = is_congruence(inst.algebra, inst.alpha)
    assert ok
    ok, _ = is_congruence(inst.algebra, inst.beta)
    assert ok
    ok, _ = is_congruence(inst.algebra, inst.gamma)
    assert ok


def test_baker_instance_n2_size_and_minus():
    full = baker_instance(2, "b")
    assert full.algebra.size == 11
    minus = baker_instance(2, "b", minus=True)
    assert minus.algebra.size == 9
    full_triples = set(full.index_map.values())
    minus_triples = set(minus.index_map.values())
    assert full_triples - minus_triples == {(2, 0, 0), (0, 2, 0)}


@pytest.mark.parametrize("sig", ["b", "u"])
@pytest.mark.parametrize("n", [2, 3])
def test_beta_is_closure_of_chain_pairs(n, sig):
    inst = baker_instance(n, sig)
    gens = [(inst.c[i - 1], inst.c[i]) for i in range(1, n + 1) if i % 2 == 1]
    seed = BinRel.from_pairs(inst.algebra.size, gens)
    assert congruence_closure(inst.algebra, seed) == inst.beta
    gens_g = [(inst.c[i - 1], inst.c[i]) for i in range(1, n + 1) if i % 2 == 0]
    seed_g = BinRel.from_pairs(inst.algebra.size, gens_g)
    assert congruence_closure(inst.algebra, seed_g) <= inst.gamma


def test_lambda_and_psi():
    inst = baker_instance(2, "b")
    lam = lambda_relation(inst)
    assert is_reflexive(lam) and is_symmetric(lam)
    lam_t = lambda_tolerance(inst)
    ok, _ = is_tolerance(inst.algebra, lam_t)
    assert ok
    assert lam <= lam_t
    psi = psi_tolerance(inst)
    ok, _ = is_tolerance(inst.algebra, psi)
    assert ok
    # psi relates adjacent chain elements
    assert psi.has(inst.c[0], inst.c[1])
    with pytest.raises(InputError):
        lambda_tolerance(baker_instance(2, "u"))


def test_baker_instance_validation():
    with pytest.raises(InputError):
        baker_instance(1, "b")
    with pytest.raises(InputError):
        baker_instance(2, "q")


def test_companion_dict_keys():
    inst = baker_instance(2, "u")
    d = baker_companion_dict(inst)
    for key in ("alpha", "beta", "gamma", "c", "e", "f", "up", "index_map"):
        assert key in d
