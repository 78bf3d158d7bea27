import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from folnerlab.folner import (Exhausted, FolnerRefusal, FolnerWitness, computable_folner, defect, finite_sets,
                              folner_function, is_folner, overlap, search_folner, sigma_search)
from folnerlab.words import code_of, star
from folnerlab.zoo import Zd, code_for, cyclic, eval_code, from_json

from conftest import zcodes

Z = from_json({"family": "Z"})
G1, G1I = code_of("g0"), code_of("g0^-1")


def brute_defect(S, shift):
    """|S \\ (shift + S)| / |S| on integers."""
    moved = {s + shift for s in S}
    return Fraction(len([s for s in S if s not in moved]), len(S))


def brute_folner_min(n, shifts, radius):
    pts = range(-radius, radius + 1)
    for k in range(1, len(pts) + 1):
        for S in itertools.combinations(pts, k):
            if all(brute_defect(S, t) <= Fraction(1, n) for t in shifts):
                return k
    return None


def test_defect_examples():
    assert defect(Z, zcodes(-2, 2), G1) == Fraction(1, 5)
    assert defect(Z, zcodes(-2, 2), 1) == 0
    Z2 = Zd(2)
    box = [code_for(Z2, (a, b)) for a in range(3) for b in range(3)]
    assert defect(Z2, box, code_of("g0")) == Fraction(1, 3)


def test_defect_collapses_duplicates():
    # g0 and g1 both name 1 in Z
    assert defect(Z, [code_of("g0"), code_of("g1"), 1], G1) == Fraction(1, 2)


def test_empty_set_rejected():
    with pytest.raises(ValueError):
        defect(Z, [], G1)


@pytest.mark.parametrize("i", [1, 2, 5, 9])
def test_interval_is_folner_at_2i(i):
    w = is_folner(Z, zcodes(-i, i), [G1, G1I], 2 * i)
    assert isinstance(w, FolnerWitness)
    assert all(q == Fraction(1, 2 * i + 1) for q in w.defects.values())


def test_singleton_refused():
    r = is_folner(Z, [1], [G1], 2)
    assert isinstance(r, FolnerRefusal) and r.defect == 1 and not r


def test_right_translate_invariance_randomized():
    rng = random.Random(2)
    H = from_json({"family": "Heisenberg"})
    for G in (Z, Zd(2), H):
        for _ in range(40):
            Fc = [rng.randrange(300) for _ in range(rng.randrange(1, 8))]
            D = [rng.randrange(300) for _ in range(2)]
            g = rng.randrange(300)
            Fg = [star(f, g) for f in Fc]
            for x in D:
                assert defect(G, Fg, x) == defect(G, Fc, x)


@given(st.lists(st.integers(-6, 6), min_size=1, max_size=8, unique=True), st.integers(-4, 4))
def test_difference_and_intersection_forms_agree(pts, shift):
    Fc = zcodes(0, 0) if not pts else [code_for(Z, p) for p in pts]
    x = code_for(Z, shift)
    assert defect(Z, Fc, x) + overlap(Z, Fc, x) == 1
    assert defect(Z, Fc, x) == brute_defect(set(pts), shift)
    for n in range(1, 6):
        assert (defect(Z, Fc, x) <= Fraction(1, n)) == (overlap(Z, Fc, x) >= 1 - Fraction(1, n))


def test_finite_sets_order():
    first = list(itertools.islice(finite_sets(), 8))
    assert first == [(0,), (1,), (0, 1), (2,), (0, 2), (1, 2), (0, 1, 2), (3,)]


def test_search_examples():
    w = search_folner(Z, 2, [G1], 10_000)
    assert len(w.codes) == 2 and w.injective and w.defects[G1] <= Fraction(1, 2)
    w = search_folner(Z, 3, [G1, G1I], 100_000)
    assert len(w.codes) == 3
    # oracle: no 2-element subset of {-6..6} is 1/3-Folner for +-1
    assert all(max(brute_defect(S, 1), brute_defect(S, -1)) > Fraction(1, 3)
               for S in itertools.combinations(range(-6, 7), 2))


def test_search_deterministic_and_budgeted():
    assert search_folner(Z, 3, [G1], 50_000) == search_folner(Z, 3, [G1], 50_000)
    with pytest.raises(Exhausted):
        search_folner(Z, 3, [G1], 2)


def test_search_empty_D_returns_smallest_set():
    assert search_folner(Z, 5, [], 10).codes == (0,)


def test_finite_group_whole_group():
    G = cyclic(3)
    w = search_folner(G, 10, [code_of("g0")], 10_000)
    assert {eval_code(G, c) for c in w.codes} == {0, 1, 2}
    assert all(q == 0 for q in w.defects.values())
    assert len(computable_folner(G, 7, [code_of("g0")])) == 3


def test_folner_function_examples_against_brute_force():
    for n, radius in ((2, 4), (3, 6)):
        v = folner_function(Z, n, [G1, G1I], radius)
        assert v.value == brute_folner_min(n, (1, -1), radius) == n
        assert v.upper_estimate
    G = cyclic(5)
    v = folner_function(G, 9, [code_of("g0")], 1)
    assert v.value <= 5 and not v.upper_estimate


def test_folner_function_monotone():
    vals = [folner_function(Z, n, [G1, G1I], 2 * n).value for n in range(1, 5)]
    assert vals == sorted(vals)


def test_folner_function_none_when_ball_too_small():
    v = folner_function(Z, 5, [G1], 1)
    assert v.value is None and v.upper_estimate


@pytest.mark.parametrize("desc", [{"family": "Z"}, {"family": "Zd", "d": 2}, {"family": "DirectSumZ"},
                                  {"family": "Lamplighter"}, {"family": "Heisenberg"}, {"family": "CircleRationals"}])
def test_computable_folner_is_injective_and_folner(desc):
    G = from_json(desc)
    D = [code_of("g0"), code_of("g1")]
    Fc = computable_folner(G, 3, D)
    assert len({eval_code(G, c) for c in Fc}) == len(Fc)
    assert is_folner(G, Fc, D, 3)


def test_sigma_search():
    r = sigma_search(Z, 4, [G1], 200_000)
    assert set(r.subset) <= set(r.superset)
    assert defect(Z, r.subset, G1) <= Fraction(1, 4)
    r = sigma_search(Z, 4, [1], 1000)
    assert len(r.subset) == 1
    r = sigma_search(Z, 4, [G1], 200_000, decidable=False)
    assert r.subset is None and r.certificate is not None
