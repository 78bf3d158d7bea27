import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from folnerlab.meanlab import (Constructed, ExplicitSymmetric, WitnessRefusal, build_x0, discontinuity_witness,
                               dominator, folner_position, mean_at, modulus_table, parse_function, real_embed,
                               real_value, resandwich, run_extremes, violations)


def brute_x0(f, k_max):
    """Materialized construction with linear searches: the oracle for build_x0."""
    bits = [1, 0, 0, 0, 1, 1]
    index = {2: 5}
    for k in range(3, k_max + 1):
        fk = f(k)
        total = bits[0] + 2 * sum(bits[1:])
        num = 2 * fk + total
        ip = len(bits) - 1
        while not (Fraction(1, k) <= Fraction(num, 2 * fk + 2 * ip + 1) < Fraction(1, k - 1)):
            ip += 1
        t = ip + 1
        while not Fraction(num, 2 * fk + 2 * t + 1) < Fraction(1, k):
            t += 1
        bits += [0] * (ip - (len(bits) - 1)) + [1] * fk
        bits += [0] * (fk + t - (len(bits) - 1))
        index[k] = fk + t
    return bits, index


def bits_mean(bits, j):
    return Fraction(bits[0] + 2 * sum(bits[1:j + 1]), 2 * j + 1)


def test_mean_examples():
    point = ExplicitSymmetric((1,), (0,))
    assert mean_at(point, 5) == Fraction(1, 11)
    base, _ = build_x0(lambda k: 2 ** k, 2)
    assert base.materialize(5) == [1, 0, 0, 0, 1, 1]
    assert mean_at(base, 5) == Fraction(5, 11)
    ones = ExplicitSymmetric((1,), (1,))
    assert all(mean_at(ones, j) == 1 for j in range(30))


def test_build_x0_matches_brute_force_for_powers_of_two():
    f = lambda k: 2 ** k
    x, steps = build_x0(f, 10)
    bits, index = brute_x0(f, 10)
    assert [s.i for s in steps] == [index[k] for k in range(3, 11)]
    assert [s.i for s in steps] == [32, 106, 293, 735, 1754, 4052, 9167, 20425]
    assert x.materialize(len(bits) - 1) == bits
    assert resandwich(x, steps)


def test_build_x0_linear_f():
    f = lambda k: k
    x, steps = build_x0(f, 6)
    _, index = brute_x0(f, 6)
    for s in steps:
        assert s.i == index[s.k]
        assert s.i - 1 >= f(s.k)
        assert mean_at(x, s.i - 1) >= Fraction(1, s.k)


def test_convergence_sweep_powers_of_two():
    x, steps = build_x0(lambda k: 2 ** k, 10)
    for s in steps:
        lo, hi = run_extremes(x, s.prev, s.i)
        assert hi <= Fraction(1, s.k - 1)


def test_segment_means_equal_materialized_means():
    x, _ = build_x0(lambda k: 2 ** k, 9)
    bits = x.materialize(10_000)
    rng = random.Random(0)
    for j in list(range(200)) + [rng.randrange(10_001) for _ in range(300)]:
        assert mean_at(x, j) == bits_mean(bits, j)


def test_run_extremes_against_scan():
    x, _ = build_x0(lambda k: k * k, 6)
    bits = x.materialize(x.length)
    for lo, hi in ((0, 40), (17, 300), (5, x.length)):
        vals = [bits_mean(bits, j) for j in range(lo, hi + 1)]
        assert run_extremes(x, lo, hi) == (min(vals), max(vals))


def test_modulus_table_for_constructed_sequence():
    f = lambda k: 2 ** k
    x, steps = build_x0(f, 10)
    rows = modulus_table(x, f, 10, x.length, k_min=3)
    for row, s in zip(rows, steps):
        assert row.k == s.k
        assert row.last_violation == s.i - 1 == row.j_min
        assert row.first_violation is not None and row.first_violation > f(s.k)
        assert mean_at(x, row.last_violation) >= Fraction(1, s.k)
    assert [r.j_min for r in rows] == sorted(r.j_min for r in rows)


def test_modulus_zero_sequence_has_no_violations():
    zero = ExplicitSymmetric((0,), (0,))
    for row in modulus_table(zero, lambda k: k, 8, 500):
        assert row.first_violation is None and row.j_min == 0


def test_periodic_half_density():
    x = ExplicitSymmetric((1,), (0, 1))
    assert x.limit_mean() == Fraction(1, 2)
    for j in range(300):
        assert abs(mean_at(x, j) - Fraction(1, 2)) <= Fraction(1, 2 * j + 1)
    for row in modulus_table(x, lambda k: k, 20, 2000):
        assert row.first_violation is None


def test_modulus_undetermined_marker():
    x = ExplicitSymmetric((1,), (0,))
    rows = modulus_table(x, lambda k: 10 ** k, 3, 50)
    assert [r.undetermined for r in rows] == [False, True, True]


@given(st.lists(st.integers(0, 1), min_size=1, max_size=12), st.lists(st.integers(0, 1), min_size=1, max_size=4),
       st.integers(1, 6))
def test_violations_agree_with_scan(values, tail, k):
    x = ExplicitSymmetric(tuple(values), tuple(tail))
    bits = x.materialize(80)
    m = x.limit_mean()
    scan = [j for j in range(81) if abs(bits_mean(bits, j) - m) >= Fraction(1, k)]
    got = [j for a, b in violations(x, k, 0, 80) for j in range(a, b + 1)]
    assert got == scan


def test_dominator():
    g = [lambda j: j] * 5
    assert dominator(g, 3) == 3 * (1 + 2 + 3)
    assert dominator([lambda j: j * j], 4) >= 16
    gs = [lambda j, c=c: c * j + c for c in range(1, 6)]
    for k, gk in enumerate(gs, start=1):
        assert all(gk(n) <= dominator(gs, n) for n in range(k, 30))


def test_folner_order_and_embedding():
    assert [folner_position(i) for i in range(1, 8)] == [0, -1, 1, -2, 2, -3, 3]
    assert real_embed(ExplicitSymmetric((0,), (0,)), 40) == 0
    assert real_embed(ExplicitSymmetric((1,), (0,)), 40) == Fraction(1, 2)
    ones = ExplicitSymmetric((1,), (1,))
    assert real_embed(ones, 30) == 1 - Fraction(1, 2 ** 30)
    assert real_value(ones) == 1


def test_real_value_is_the_limit():
    x = ExplicitSymmetric((1, 0, 1), (0, 1, 1))
    r = real_value(x)
    for N in (10, 30, 60):
        assert 0 <= r - real_embed(x, N) <= Fraction(1, 2 ** N)


def test_discontinuity_witness_flips_the_mean():
    ones = ExplicitSymmetric((1, 1), (1,))
    r = real_value(ones)
    eps = Fraction(1, 2 ** 10)
    w = discontinuity_witness(ones, r - Fraction(1, 100), Fraction(2), eps)
    assert w.m == 1 and w.m_prime == 0
    assert abs(w.r - w.r_prime) < eps and abs(w.m - w.m_prime) > Fraction(1, 2)
    assert real_value(w.x_prime) == w.r_prime
    zero = ExplicitSymmetric((0, 1), (0,))
    r = real_value(zero)
    w = discontinuity_witness(zero, r - Fraction(1, 10), r + Fraction(1, 10), eps)
    assert w.m_prime == 1 and abs(w.r - w.r_prime) < eps


def test_discontinuity_refusals():
    half = ExplicitSymmetric((1,), (0, 1))
    r = real_value(half)
    with pytest.raises(WitnessRefusal):
        discontinuity_witness(half, r - 1, r + 1, Fraction(1, 8))
    with pytest.raises(WitnessRefusal):
        discontinuity_witness(ExplicitSymmetric((1,), (1,)), Fraction(0), Fraction(1, 2), Fraction(1, 8))


def test_parse_function():
    assert parse_function("2^k")(10) == 1024
    assert parse_function("k*k+1")(3) == 10
    assert parse_function("max(k, 3)")(1) == 3
    with pytest.raises(ValueError):
        parse_function("__import__('os')")


def test_explicit_json_round_trip():
    x = ExplicitSymmetric((1, 0, 1), (0, 1))
    assert ExplicitSymmetric.from_json(x.to_json()) == x
    with pytest.raises(ValueError):
        ExplicitSymmetric((2,), (0,))
    assert isinstance(build_x0(lambda k: k, 3)[0], Constructed)
