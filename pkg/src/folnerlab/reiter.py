"""Finitely supported Reiter functions and the partition-merge verifier.

The verifier ``kappa`` never evaluates the numbering.  It starts from the
partition of a finite working set into singletons and merges classes as an
equality enumerator confirms ``nu(a) = nu(b)``.  The merge ratio of a
partition is an upper bound for the true translation ratio of the pushed
forward function and equals it once the partition is the canonical one, so
a certificate obtained on a partial partition is sound.

The ratio is computed as a sum over the classes ``C`` of the working set
``W = F u x^-1 F``::

    sum_C | f(F n C) - f({i in F : x^-1 * i in C}) |  /  sum f

which is the l1 distance between the class weights and their translates.
"""

from __future__ import annotations

import itertools
from math import isqrt
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

from .folner import Exhausted, element_defect, finite_sets
from .words import inv, pair, star, unpair
from .zoo import EqualityEnumerator, Group, code_for, eval_code


@dataclass(frozen=True)
class ReiterFunction:
    values: dict  # code -> positive Fraction

    def __post_init__(self):
        if not self.values:
            raise ValueError("a Reiter function must be nonzero")
        for c, v in self.values.items():
            if not isinstance(c, int) or c < 0:
                raise ValueError(f"bad code {c!r}")
            if Fraction(v) <= 0:
                raise ValueError("values must be positive rationals")

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sorted(self.values))

    @property
    def norm(self) -> Fraction:
        return sum(self.values.values(), Fraction(0))

    def __hash__(self):
        return hash(tuple(sorted(self.values.items())))

    @classmethod
    def characteristic(cls, codes: Iterable[int]) -> "ReiterFunction":
        return cls({int(c): Fraction(1) for c in codes})

    def to_json(self) -> dict:
        return {"support": {str(c): str(v) for c, v in sorted(self.values.items())}}

    @classmethod
    def from_json(cls, obj: dict) -> "ReiterFunction":
        return cls({int(c): Fraction(v) for c, v in obj["support"].items()})


def pushforward(G: Group, f: ReiterFunction) -> dict:
    out: dict = {}
    for c, v in f.values.items():
        g = eval_code(G, c)
        out[g] = out.get(g, Fraction(0)) + v
    return out


def translate_ratio(G: Group, h: dict, x) -> Fraction:
    """``||h - _x h||_1 / ||h||_1`` for a finitely supported ``h`` on ``G``."""
    total = sum(h.values(), Fraction(0))
    moved = {G.mul(x, g): v for g, v in h.items()}
    diff = sum(abs(h.get(g, 0) - moved.get(g, 0)) for g in set(h) | set(moved))
    return Fraction(diff) / total


def reiter_ratio(G: Group, f: ReiterFunction, x: int) -> Fraction:
    return translate_ratio(G, pushforward(G, f), eval_code(G, x))


def is_reiter(G: Group, f: ReiterFunction, D: Iterable[int], n: int, strict: bool = True) -> bool:
    bound = Fraction(1, n)
    for x in D:
        r = reiter_ratio(G, f, x)
        if r > bound or (strict and r == bound):
            return False
    return True


class PartitionState:
    """Mergeable classes over a finite working set of codes."""

    def __init__(self, codes: Iterable[int]):
        self.parent = {c: c for c in codes}
        self.classes = len(self.parent)

    def find(self, c: int) -> int:
        root = c
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[c] != root:
            self.parent[c], c = root, self.parent[c]
        return root

    def merge(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        # the least code stays the representative
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.classes -= 1
        return True

    def representatives(self) -> list[int]:
        return sorted({self.find(c) for c in self.parent})

    def copy(self) -> "PartitionState":
        other = PartitionState(())
        other.parent = dict(self.parent)
        other.classes = self.classes
        return other


def working_set(F: Iterable[int], D: Iterable[int]) -> list[int]:
    F = list(F)
    W = set(F)
    for x in D:
        xi = inv(x)
        W.update(star(xi, f) for f in F)
    return sorted(W)


def m_ratio(state: PartitionState, f: ReiterFunction, x: int) -> Fraction:
    xi = inv(x)
    a: dict = {}
    b: dict = {}
    for i, v in f.values.items():
        ca = state.find(i)
        a[ca] = a.get(ca, 0) + v
        cb = state.find(star(xi, i))
        b[cb] = b.get(cb, 0) + v
    diff = sum(abs(a.get(c, 0) - b.get(c, 0)) for c in set(a) | set(b))
    return Fraction(diff) / f.norm


def canonical_partition(G: Group, W: Iterable[int]) -> PartitionState:
    state = PartitionState(W)
    first: dict = {}
    for c in sorted(state.parent):
        g = eval_code(G, c)
        if g in first:
            state.merge(first[g], c)
        else:
            first[g] = c
    return state


@dataclass
class Certified:
    n: int
    D: tuple
    f: ReiterFunction
    ticks: int
    ratios: dict = field(default_factory=dict)
    kind = "certified"


@dataclass
class RefutedAtFullPartition:
    x: int
    ratio: Fraction
    ticks: int
    kind = "refuted"


@dataclass
class BudgetExhausted:
    ticks: int
    state: PartitionState | None = None
    kind = "exhausted"


def kappa_process(G: Group, n: int, D: Iterable[int], f: ReiterFunction,
                  enumerator: EqualityEnumerator | None = None, decidable: bool = True) -> Iterator:
    """Resumable kappa(n, D, f): yields once per tick, a verdict or None.

    ``decidable`` allows the refutation branch, which needs the canonical
    partition of the working set (and therefore decidable equality).
    """
    D = tuple(sorted(set(D)))
    enumerator = enumerator or EqualityEnumerator(G)
    W = working_set(f.support, D)
    state = PartitionState(W)
    full_classes = len({eval_code(G, c) for c in W}) if decidable else None
    bound = Fraction(1, n)
    events = enumerator.pairs_within(W)
    pending = next(events, None)
    for tick in itertools.count(1):
        merged = False
        while pending is not None and pending[0] <= tick:
            merged |= state.merge(pending[1], pending[2])
            pending = next(events, None)
        if tick == 1 or merged:
            ratios = {x: m_ratio(state, f, x) for x in D}
            if all(r <= bound for r in ratios.values()):
                yield Certified(n, D, f, tick, ratios)
                return
            if decidable and state.classes == full_classes:
                x = min(x for x, r in ratios.items() if r > bound)
                yield RefutedAtFullPartition(x, ratios[x], tick)
                return
        yield None


def kappa_verify(G: Group, n: int, D: Iterable[int], f: ReiterFunction, budget: int,
                 enumerator: EqualityEnumerator | None = None, decidable: bool = True):
    proc = kappa_process(G, n, D, f, enumerator, decidable)
    for tick, verdict in zip(range(1, budget + 1), proc):
        if verdict is not None:
            return verdict
    return BudgetExhausted(max(budget, 0))


# ---------------------------------------------------------------------------
# enumeration of triples and dovetailing

def _set_from_code(code: int) -> tuple[int, ...]:
    return tuple(i for i in range(code.bit_length()) if code >> i & 1)


def calkin_wilf(k: int) -> Fraction:
    """k-th positive rational (k >= 0), via the Calkin-Wilf tree."""
    a, b = 1, 1
    for bit in bin(k + 1)[3:]:
        a, b = (a, a + b) if bit == "0" else (a + b, b)
    return Fraction(a, b)


def _split(code: int, parts: int) -> list[int]:
    out = []
    for _ in range(parts - 1):
        a, code = unpair(code)
        out.append(a)
    out.append(code)
    return out


def triple_at(k: int) -> tuple[int, tuple[int, ...], ReiterFunction]:
    """k-th triple (n, D, f) of the fixed enumeration of all triples."""
    n0, rest = unpair(k)
    dcode, fcode = unpair(rest)
    scode, vcode = unpair(fcode)
    support = _set_from_code(scode + 1)
    values = [calkin_wilf(v) for v in _split(vcode, len(support))]
    return n0 + 1, _set_from_code(dcode), ReiterFunction(dict(zip(support, values)))


def all_triples() -> Iterator[tuple]:
    for k in itertools.count(0):
        yield triple_at(k)


def _dovetail(starts: Iterator, make, budget: int):
    """Round-robin dovetail: step k starts process k, then moves every live one.

    ``budget`` counts single moves.  Yields ``(move_count, item, verdict)``.
    """
    live: list = []
    moves = 0
    exhausted = False
    while moves < budget:
        if not exhausted:
            item = next(starts, None)
            if item is None:
                exhausted = True
            else:
                live.insert(0, (item, make(item)))
        if not live:
            return
        still = []
        for item, proc in live:
            if moves >= budget:
                still.append((item, proc))
                continue
            moves += 1
            verdict = next(proc, None)
            if verdict is None:
                still.append((item, proc))
            else:
                yield moves, item, verdict
        live = still


def enumerate_reiter(G: Group, budget: int, triples: Iterable | None = None,
                     enumerator: EqualityEnumerator | None = None) -> list[tuple]:
    """Certified triples ``(n, D, f)`` in order of certification within ``budget`` moves.

    Only the equality enumerator is consulted, so nothing is ever refuted;
    non-invariant triples just keep running.
    """
    enumerator = enumerator or EqualityEnumerator(G)
    starts = iter(triples) if triples is not None else all_triples()
    out = []
    for moves, (n, D, f), verdict in _dovetail(
            starts, lambda t: kappa_process(G, t[0], t[1], t[2], enumerator, decidable=False), budget):
        if isinstance(verdict, Certified):
            out.append((n, tuple(D), f, moves))
    return out


def candidate_sets(G: Group, D: Iterable[int]) -> Iterator[tuple[int, ...]]:
    """All finite code sets, interleaved with the family's constructive Folner sets.

    The j-th constructive set follows the j*j-th generic one, so the quickly
    growing constructive sets do not swamp the dovetail.
    """
    targets = [eval_code(G, x) for x in D]
    generic = finite_sets()
    hints = G.folner_candidates(targets)
    for k in itertools.count(0):
        yield next(generic)
        if isqrt(k) ** 2 == k:
            hint = next(hints, None)
            if hint:
                yield tuple(sorted(code_for(G, el) for el in hint))


def compute_reiter(G: Group, n: int, D: Iterable[int], budget: int,
                   enumerator: EqualityEnumerator | None = None,
                   candidates: Iterable | None = None) -> ReiterFunction:
    """A characteristic function certified by kappa for ``(n, D)``.

    Runs kappa(n, D, chi_F1), kappa(n, D, chi_F2), ... dovetailed over an
    enumeration of finite sets; ``budget`` counts moves.
    """
    D = tuple(sorted(set(D)))
    enumerator = enumerator or EqualityEnumerator(G)
    sets = iter(candidates) if candidates is not None else candidate_sets(G, D)
    for moves, F, verdict in _dovetail(
            sets, lambda F: kappa_process(G, n, D, ReiterFunction.characteristic(F), enumerator, decidable=False),
            budget):
        if isinstance(verdict, Certified):
            return verdict.f
    raise Exhausted(f"no Reiter certificate within {budget} moves", budget)


def extract_folner(G: Group, f: ReiterFunction, D: Iterable[int], n: int) -> tuple[int, ...]:
    """A level set of the pushforward with defects below ``|D| / (2n)``.

    Thresholds are tried in descending order; the first level set meeting the
    strict bound wins, else the first meeting it with equality.
    """
    D = sorted(set(D))
    h = pushforward(G, f)
    bound = Fraction(len(D), 2 * n)
    targets = [eval_code(G, x) for x in D]
    least: dict = {}
    for c in sorted(f.values):
        least.setdefault(eval_code(G, c), c)
    levels = []
    for t in sorted(set(h.values()), reverse=True):
        S = {g for g, v in h.items() if v >= t}
        levels.append((S, [element_defect(G, S, g) for g in targets]))
    for strict in (True, False):
        for S, defects in levels:
            if all(q < bound if strict else q <= bound for q in defects):
                return tuple(sorted(least[g] for g in S))
    raise AssertionError("no level set qualifies; the input is not a Reiter function for (n, D)")
