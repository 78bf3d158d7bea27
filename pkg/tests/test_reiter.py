import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from folnerlab.folner import defect, is_folner
from folnerlab.reiter import (BudgetExhausted, Certified, PartitionState, RefutedAtFullPartition, ReiterFunction,
                              all_triples, calkin_wilf, canonical_partition, compute_reiter, enumerate_reiter,
                              extract_folner, is_reiter, kappa_verify, m_ratio, pushforward, reiter_ratio, triple_at,
                              working_set)
from folnerlab.words import code_of, inv, star
from folnerlab.zoo import code_for, cyclic, eval_code, from_json

from conftest import zcodes

Z = from_json({"family": "Z"})
G1 = code_of("g0")
chi10 = ReiterFunction.characteristic(zcodes(0, 9))


def l1_ratio_oracle(G, f, x):
    """Pushforward l1 ratio computed directly on canonical elements."""
    h = {}
    for c, v in f.values.items():
        g = eval_code(G, c)
        h[g] = h.get(g, 0) + Fraction(v)
    g = eval_code(G, x)
    shifted = {G.mul(g, a): v for a, v in h.items()}
    return sum(abs(h.get(k, 0) - shifted.get(k, 0)) for k in set(h) | set(shifted)) / sum(h.values())


def test_pushforward_examples():
    f = ReiterFunction({code_of("g0"): Fraction(1, 2), code_of("g1"): Fraction(1, 2)})
    assert pushforward(Z, f) == {1: Fraction(1)}
    h = pushforward(Z, chi10)
    assert h == {k: 1 for k in range(10)}
    assert sum(h.values()) == chi10.norm


def test_reiter_function_validation():
    with pytest.raises(ValueError):
        ReiterFunction({})
    with pytest.raises(ValueError):
        ReiterFunction({3: Fraction(0)})
    f = ReiterFunction.from_json({"support": {"4": "1/3", "0": "2"}})
    assert f.to_json() == {"support": {"0": "2", "4": "1/3"}}


def test_m_ratio_interval_example():
    W = working_set(chi10.support, [G1])
    assert m_ratio(canonical_partition(Z, W), chi10, G1) == Fraction(2, 10)


def random_instance(rng):
    G = rng.choice([Z, from_json({"family": "Zd", "d": 2}), cyclic(rng.randrange(2, 7))])
    support = rng.sample(range(200), rng.randrange(1, 7))
    f = ReiterFunction({c: Fraction(rng.randrange(1, 5), rng.randrange(1, 4)) for c in support})
    return G, f, rng.randrange(200)


def test_canonical_partition_ratio_equals_pushforward_ratio():
    rng = random.Random(1)
    for _ in range(200):
        G, f, x = random_instance(rng)
        W = working_set(f.support, [x])
        assert m_ratio(canonical_partition(G, W), f, x) == l1_ratio_oracle(G, f, x) == reiter_ratio(G, f, x)


@given(st.integers(0, 10**6))
def test_merges_never_increase_the_ratio(seed):
    rng = random.Random(seed)
    G, f, x = random_instance(rng)
    W = working_set(f.support, [x])
    state = PartitionState(W)
    truth = [(a, b) for a in W for b in W if a < b and eval_code(G, a) == eval_code(G, b)]
    rng.shuffle(truth)
    last = m_ratio(state, f, x)
    for a, b in truth:
        state.merge(a, b)
        now = m_ratio(state, f, x)
        assert now <= last
        last = now
    assert last == l1_ratio_oracle(G, f, x)


def test_kappa_examples():
    v = kappa_verify(Z, 5, [G1], chi10, 1000)
    assert isinstance(v, Certified) and v.ratios[G1] == Fraction(1, 5)
    half = ReiterFunction({code_of("g0"): Fraction(1, 2), code_of("g1"): Fraction(1, 2)})
    v = kappa_verify(Z, 2, [G1], half, 1000)
    assert isinstance(v, RefutedAtFullPartition) and v.ratio == 2
    assert isinstance(kappa_verify(Z, 5, [G1], chi10, 0), BudgetExhausted)


def test_kappa_never_refutes_without_decidable_equality():
    half = ReiterFunction({code_of("g0"): Fraction(1, 2), code_of("g1"): Fraction(1, 2)})
    assert isinstance(kappa_verify(Z, 2, [G1], half, 5000, decidable=False), BudgetExhausted)


def test_kappa_certificates_are_sound():
    rng = random.Random(4)
    for _ in range(100):
        G, f, x = random_instance(rng)
        n = rng.randrange(1, 4)
        v = kappa_verify(G, n, [x], f, 10_000)
        if isinstance(v, Certified):
            assert l1_ratio_oracle(G, f, x) <= Fraction(1, n)


def test_bridge_small_z2_instances():
    Z2 = from_json({"family": "Zd", "d": 2})
    rng = random.Random(9)
    D = [code_of("g0"), code_of("g1")]
    for _ in range(40):
        pts = {(rng.randrange(-2, 3), rng.randrange(-2, 3)) for _ in range(rng.randrange(1, 10))}
        Fc = [code_for(Z2, p) for p in pts]
        for n in range(1, 4):
            fol = bool(is_folner(Z2, Fc, D, 2 * n))
            cert = isinstance(kappa_verify(Z2, n, D, ReiterFunction.characteristic(Fc), 10**6), Certified)
            assert fol == cert


def test_triple_enumeration_is_deterministic():
    assert triple_at(0) == triple_at(0)
    assert calkin_wilf(0) == 1 and [calkin_wilf(k) for k in range(1, 5)] == [Fraction(1, 2), 2, Fraction(1, 3), Fraction(3, 2)]
    import itertools
    first = list(itertools.islice(all_triples(), 50))
    assert all(n >= 1 and f.norm > 0 for n, D, f in first)


def test_enumerate_reiter_budget_zero_and_soundness():
    assert enumerate_reiter(Z, 0) == []
    out = enumerate_reiter(Z, 3000)
    assert out
    for n, D, f, _ in out:
        assert all(l1_ratio_oracle(Z, f, x) <= Fraction(1, n) for x in D)


def test_enumerate_reiter_regression():
    # a custom triple stream with the target third; frozen move count
    target = (5, (G1,), chi10)
    stream = [(3, (G1,), ReiterFunction.characteristic([1])), (2, (G1,), ReiterFunction.characteristic(zcodes(0, 1))),
              target]
    out = enumerate_reiter(Z, 200, triples=stream)
    emitted = [(n, D, f) for n, D, f, _ in out]
    assert target in emitted
    moves = dict(((n, D, f), m) for n, D, f, m in out)[target]
    # round-robin by hand: start 1, move 1 | start 2, move 2, move 1 | start 3, move 3.
    # The target certifies on its first move since g0^-1 * g0^k reduces in the free group.
    assert moves == 4


def test_compute_reiter_examples():
    f = compute_reiter(Z, 5, [G1], 10**6)
    support = {eval_code(Z, c) for c in f.support}
    assert len(support) >= 10
    assert isinstance(kappa_verify(Z, 5, [G1], f, 10**6), Certified)
    f1 = compute_reiter(Z, 7, [1], 100)
    assert is_reiter(Z, f1, [1], 7)


def test_extract_folner_examples():
    Fc = zcodes(-4, 4)
    assert set(extract_folner(Z, ReiterFunction.characteristic(Fc), [G1], 4)) == set(Fc)
    h = ReiterFunction({1: Fraction(1), code_of("g0"): Fraction(1), code_of("g0^2"): Fraction(1, 2)})
    got = extract_folner(Z, h, [G1], 1)
    # {0,1} sits exactly at 1/2; the strict bound picks {0,1,2} with defect 1/3
    assert {eval_code(Z, c) for c in got} == {0, 1, 2}
    assert defect(Z, got, G1) < Fraction(1, 2)
    assert is_folner(Z, got, [G1], 2)
