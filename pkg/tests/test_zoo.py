import random
from fractions import Fraction

import pytest

from folnerlab.words import code_of, decode_word, star
from folnerlab.zoo import (CircleRationals, DescriptorError, DirectSumZ, EqualityEnumerator, Heisenberg, Lamplighter,
                           code_for, cyclic, equal, equality_pairs, eval_code, from_json, injective_view, least_code)

FAMILIES = [
    {"family": "Z"},
    {"family": "Zd", "d": 2},
    {"family": "Zd", "d": 3},
    {"family": "DirectSumZ"},
    {"family": "Lamplighter"},
    {"family": "Heisenberg"},
    {"family": "Finite", "table": [[(i + j) % 5 for j in range(5)] for i in range(5)]},
    {"family": "CircleRationals"},
]


def z_value(code):
    """Exponent sum: the independent oracle for Z (every generator maps to 1)."""
    return sum(e for _, e in decode_word(code))


def test_eval_examples():
    Z = from_json({"family": "Z"})
    assert eval_code(Z, code_of("g0^3")) == 3
    assert eval_code(Z, code_of("g0*g1")) == 2
    S = DirectSumZ()
    assert eval_code(S, code_of("g2*g2")) == DirectSumZ.vector({2: 2})
    for G in map(from_json, FAMILIES):
        assert eval_code(G, 1) == G.identity


def test_equal_examples():
    Z = from_json({"family": "Z"})
    assert equal(Z, code_of("g0*g0"), code_of("g1*g0"))
    assert not equal(Z, code_of("g0"), code_of("g0^2"))
    Z3 = cyclic(3)
    assert equal(Z3, code_of("g0^3"), 1)


@pytest.mark.parametrize("desc", FAMILIES, ids=lambda d: d["family"] + str(d.get("d", "")))
def test_eval_is_homomorphism(desc):
    G = from_json(desc)
    rng = random.Random(3)
    for _ in range(1000):
        a, b = rng.randrange(5000), rng.randrange(5000)
        assert eval_code(G, star(a, b)) == G.mul(eval_code(G, a), eval_code(G, b))


@pytest.mark.parametrize("desc", FAMILIES, ids=lambda d: d["family"] + str(d.get("d", "")))
def test_code_for_names_the_element(desc):
    G = from_json(desc)
    for c in range(300):
        el = eval_code(G, c)
        assert eval_code(G, code_for(G, el)) == el


def test_equal_matches_exponent_sum_exhaustively():
    Z = from_json({"family": "Z"})
    vals = [z_value(c) for c in range(1000)]
    for a in range(0, 1000, 7):
        for b in range(1000):
            assert equal(Z, a, b) == (vals[a] == vals[b])


def test_equality_pairs_budget_zero_and_soundness():
    Z = from_json({"family": "Z"})
    assert equality_pairs(Z, 0) == []
    pairs = equality_pairs(Z, 500)
    assert all(equal(Z, a, b) for a, b in pairs)
    assert pairs == sorted(pairs, key=lambda p: (p[0] + p[1], p[0]))


def test_equality_pairs_regression_step():
    # independent schedule: by code sum then first coordinate, filtered by exponent sum
    Z = from_json({"family": "Z"})
    target = (code_of("g0"), code_of("g1"))
    expected = []
    s = 0
    while target not in expected:
        expected += [(a, s - a) for a in range(s + 1) if z_value(a) == z_value(s - a)]
        s += 1
    step = expected.index(target) + 1
    assert step == 2  # frozen: (0, 0) comes first, then (g0, g1)
    assert equality_pairs(Z, step)[-1] == target


def test_enumerator_is_fair_and_sound():
    G = Lamplighter()
    rng = random.Random(11)
    enum = EqualityEnumerator(G)
    lefts = [rng.randrange(100) for _ in range(30)]
    rights = [rng.randrange(100) for _ in range(30)]
    seen = {}
    for tick, i, j in enum.confirm(lefts, rights):
        assert equal(G, lefts[i], rights[j])
        seen[i, j] = tick
    total = len(lefts) * len(rights)
    for i, a in enumerate(lefts):
        for j, b in enumerate(rights):
            if equal(G, a, b):
                assert seen[i, j] <= 3 * total
    ticks = list(seen.values())
    assert len(set(ticks)) == len(ticks)


def test_enumerator_clone_is_independent():
    G = from_json({"family": "Z"})
    e = EqualityEnumerator(G)
    a = list(e.confirm([0, 2], [2, 0]))
    f = e.clone()
    assert list(f.confirm([0, 2], [2, 0])) == a
    assert f.requests == 1 and e.requests == 1


def test_injective_view():
    Z = from_json({"family": "Z"})
    codes = injective_view(Z, 9)
    assert len({eval_code(Z, c) for c in codes}) == 9
    assert codes[0] == 0 and least_code(Z, 0) == 1


def test_descriptor_errors():
    with pytest.raises(DescriptorError):
        from_json({"family": "Nope"})
    with pytest.raises(DescriptorError):
        from_json('{"family": ')
    with pytest.raises(DescriptorError):
        from_json({"family": "Finite", "table": [[0, 1], [0, 0]]})
    with pytest.raises(DescriptorError):
        from_json([1, 2])


def test_finite_to_json_round_trip():
    G = cyclic(4)
    assert from_json(G.to_json()) == G


def test_circle_right_invariance_randomized():
    G = CircleRationals()
    rng = random.Random(5)
    for _ in range(500):
        x, y, g = (Fraction(rng.randrange(40), rng.randrange(1, 40)) % 1 for _ in range(3))
        assert G.distance(G.mul(x, g), G.mul(y, g)) == G.distance(x, y)
        assert G.distance(x, y) <= Fraction(1, 2)
        assert (G.distance(x, y) == 0) == (x == y)


def test_heisenberg_is_not_abelian():
    H = Heisenberg()
    a, b = eval_code(H, code_of("g0")), eval_code(H, code_of("g1"))
    assert H.mul(a, b) != H.mul(b, a)
    assert H.mul(H.mul(a, b), H.inv(H.mul(b, a))) == (0, 0, 1)
