"""Concrete numbered groups.

Each family fixes a homomorphism ``nu`` from the coded free group onto (or
densely into) a concrete group by choosing the image of every generator
``g_i``.  Elements are represented by hashable normal forms, so equality of
normal forms is equality in the group.

Generator images:

* ``Z``: every ``g_i`` maps to ``1``.
* ``Zd(d)``: ``g_i`` maps to the basis vector ``e_(i mod d)``.
* ``DirectSumZ``: ``g_i`` maps to ``e_i``.
* ``Lamplighter`` (Z/2 wr Z): ``g_0`` is the shift, every other ``g_i`` is
  the lamp at position 0.
* ``Heisenberg``: ``g_0, g_1`` are the standard generators, every other
  ``g_i`` the central generator.
* ``Finite(table)``: ``g_i`` cycles through the non-identity elements (or an
  explicit ``gens`` list).
* ``CircleRationals``: ``g_i`` maps to ``1/(i+1) mod 1``; note ``g_0`` is
  the identity.  The image is the dense subgroup Q/Z of the circle.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from typing import Any, Iterable, Iterator

from .words import IDENTITY, Word, decode_word, encode_word, reduce_word


class DescriptorError(ValueError):
    pass


class Group:
    """Base class; subclasses are frozen dataclasses (hashable)."""

    family = "?"
    metric = "discrete"

    @property
    def identity(self):
        raise NotImplementedError

    def gen(self, i: int):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def pow(self, a, e: int):
        if e < 0:
            a, e = self.inv(a), -e
        out = self.identity
        while e:
            if e & 1:
                out = self.mul(out, a)
            a = self.mul(a, a)
            e >>= 1
        return out

    def word_for(self, el) -> Word:
        """A reduced word whose image is ``el`` (used to pick codes)."""
        raise NotImplementedError

    def to_json(self) -> dict:
        return {"family": self.family}

    def ball(self, radius: int) -> list:
        raise NotImplementedError

    def folner_candidates(self, D: list) -> Iterator[list]:
        """Finite element sets that are eventually Folner for ``D``."""
        raise NotImplementedError

    def distance(self, a, b) -> Fraction:
        return Fraction(0) if a == b else Fraction(1)

    def format(self, el) -> str:
        return str(el)


@dataclass(frozen=True)
class IntegerGroup(Group):
    family = "Z"

    @property
    def identity(self):
        return 0

    def gen(self, i):
        return 1

    def mul(self, a, b):
        return a + b

    def inv(self, a):
        return -a

    def pow(self, a, e):
        return a * e

    def word_for(self, el):
        return ((0, el),) if el else ()

    def ball(self, radius):
        return list(range(-radius, radius + 1))

    def folner_candidates(self, D):
        for k in itertools.count(0):
            L = (1 << k) - 1
            yield list(range(-L, L + 1))


@dataclass(frozen=True)
class Zd(Group):
    d: int = 2
    family = "Zd"

    def __post_init__(self):
        if self.d < 1:
            raise DescriptorError("Zd needs d >= 1")

    @property
    def identity(self):
        return (0,) * self.d

    def gen(self, i):
        v = [0] * self.d
        v[i % self.d] = 1
        return tuple(v)

    def mul(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a):
        return tuple(-x for x in a)

    def pow(self, a, e):
        return tuple(x * e for x in a)

    def word_for(self, el):
        return tuple((i, v) for i, v in enumerate(el) if v)

    def to_json(self):
        return {"family": "Zd", "d": self.d}

    def ball(self, radius):
        r = range(-radius, radius + 1)
        return [tuple(v) for v in itertools.product(r, repeat=self.d)]

    def folner_candidates(self, D):
        for L in itertools.count(0):
            yield self.ball(L)


@dataclass(frozen=True)
class DirectSumZ(Group):
    """Finitely supported integer vectors, as sorted ``(index, value)`` tuples."""

    family = "DirectSumZ"

    @property
    def identity(self):
        return ()

    def gen(self, i):
        return ((i, 1),)

    def mul(self, a, b):
        acc = dict(a)
        for i, v in b:
            acc[i] = acc.get(i, 0) + v
        return tuple(sorted((i, v) for i, v in acc.items() if v))

    def inv(self, a):
        return tuple((i, -v) for i, v in a)

    def pow(self, a, e):
        return tuple((i, v * e) for i, v in a) if e else ()

    def word_for(self, el):
        return tuple(el)

    @staticmethod
    def vector(coords: dict) -> tuple:
        return tuple(sorted((i, v) for i, v in coords.items() if v))

    def ball(self, radius):
        r = range(-radius, radius + 1)
        return [self.vector(dict(enumerate(v))) for v in itertools.product(r, repeat=radius)]

    def folner_candidates(self, D):
        support = sorted({i for el in D for i, _ in el})
        for k in itertools.count(0):
            L = (1 << k) - 1
            r = range(-L, L + 1)
            yield [self.vector(dict(zip(support, v))) for v in itertools.product(r, repeat=len(support))]


@dataclass(frozen=True)
class Lamplighter(Group):
    """Z/2 wr Z; elements ``(lamps, position)`` with ``lamps`` a sorted tuple."""

    family = "Lamplighter"

    @property
    def identity(self):
        return ((), 0)

    def gen(self, i):
        return ((), 1) if i == 0 else ((0,), 0)

    def mul(self, a, b):
        (A, p), (B, q) = a, b
        return (tuple(sorted(set(A) ^ {x + p for x in B})), p + q)

    def inv(self, a):
        A, p = a
        return (tuple(x - p for x in A), -p)

    def pow(self, a, e):
        A, p = a
        if not A:
            return ((), p * e)
        return Group.pow(self, a, e)

    def word_for(self, el):
        A, p = el
        letters = []
        for x in A:
            letters += [(0, x), (1, 1), (0, -x)]
        letters.append((0, p))
        return reduce_word(letters)

    def ball(self, radius):
        window = range(-radius, radius + 1)
        out = []
        for p in window:
            for k in range(len(window) + 1):
                for A in itertools.combinations(window, k):
                    out.append((A, p))
        return out

    def folner_candidates(self, D):
        shifts = [p for _, p in D if p]
        if not shifts:
            # D generates a finite group of lamp configurations
            span = {()}
            for A, _ in D:
                span |= {tuple(sorted(set(S) ^ set(A))) for S in span}
            while True:
                yield [(S, 0) for S in sorted(span)]
        # stay inside the subgroup: positions in dZ, and relative lamp windows
        # covering every lamp D can switch on from a position in the set
        d = gcd(*shifts)
        lamps = sorted({x for A, _ in D for x in A})
        for L in itertools.count(1):
            offsets = sorted({b - d * j for b in lamps for j in range(L)})
            out = []
            for j in range(L):
                p = d * j
                window = [p + o for o in offsets]
                for k in range(len(window) + 1):
                    for A in itertools.combinations(window, k):
                        out.append((A, p))
            yield out

    def format(self, el):
        A, p = el
        return f"lamps={list(A)},pos={p}"


@dataclass(frozen=True)
class Heisenberg(Group):
    """Integer Heisenberg group; ``(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')``."""

    family = "Heisenberg"

    @property
    def identity(self):
        return (0, 0, 0)

    def gen(self, i):
        return ((1, 0, 0), (0, 1, 0))[i] if i < 2 else (0, 0, 1)

    def mul(self, x, y):
        return (x[0] + y[0], x[1] + y[1], x[2] + y[2] + x[0] * y[1])

    def inv(self, x):
        a, b, c = x
        return (-a, -b, a * b - c)

    def word_for(self, el):
        a, b, c = el
        return reduce_word([(0, a), (1, b), (2, c - a * b)])

    def ball(self, radius):
        r = range(-radius, radius + 1)
        rc = range(-radius * radius, radius * radius + 1)
        return list(itertools.product(r, r, rc))

    def folner_candidates(self, D):
        for s in itertools.count(1):
            r = range(-s, s + 1)
            rc = range(-s * s, s * s + 1)
            yield list(itertools.product(r, r, rc))


@dataclass(frozen=True)
class Finite(Group):
    table: tuple = ()
    gens: tuple | None = None
    family = "Finite"

    def __post_init__(self):
        k = len(self.table)
        if k == 0 or any(len(row) != k for row in self.table):
            raise DescriptorError("Finite needs a square multiplication table")
        if any(not 0 <= x < k for row in self.table for x in row):
            raise DescriptorError("table entries must be element indices")
        ids = [e for e in range(k) if all(self.table[e][x] == x == self.table[x][e] for x in range(k))]
        if not ids:
            raise DescriptorError("table has no identity element")
        for a, b, c in itertools.product(range(k), repeat=3):
            if self.table[self.table[a][b]][c] != self.table[a][self.table[b][c]]:
                raise DescriptorError("table is not associative")
        object.__setattr__(self, "_e", ids[0])
        object.__setattr__(self, "_inv", tuple(next(y for y in range(k) if self.table[x][y] == ids[0]) for x in range(k)))

    @property
    def order(self):
        return len(self.table)

    @property
    def identity(self):
        return self._e

    def _gen_list(self):
        if self.gens is not None:
            return list(self.gens)
        return [x for x in range(self.order) if x != self._e] or [self._e]

    def gen(self, i):
        gl = self._gen_list()
        return gl[i % len(gl)]

    def mul(self, a, b):
        return self.table[a][b]

    def inv(self, a):
        return self._inv[a]

    def word_for(self, el):
        return _finite_words(self)[el]

    def to_json(self):
        out: dict[str, Any] = {"family": "Finite", "table": [list(r) for r in self.table]}
        if self.gens is not None:
            out["gens"] = list(self.gens)
        return out

    def ball(self, radius):
        return list(range(self.order))

    def folner_candidates(self, D):
        while True:
            yield list(range(self.order))


@lru_cache(maxsize=None)
def _finite_words(G: Finite) -> dict:
    gl = G._gen_list()
    words = {G.identity: ()}
    queue = deque([G.identity])
    while queue:
        x = queue.popleft()
        for i, g in enumerate(gl):
            y = G.mul(x, g)
            if y not in words:
                words[y] = reduce_word(words[x] + ((i, 1),))
                queue.append(y)
    if len(words) != G.order:
        raise DescriptorError("generator images do not generate the group")
    return words


@dataclass(frozen=True)
class CircleRationals(Group):
    """Q/Z inside the circle R/Z, with the arc metric (at most 1/2)."""

    family = "CircleRationals"
    metric = "arc"

    @property
    def identity(self):
        return Fraction(0)

    def gen(self, i):
        return Fraction(1, i + 1) % 1

    def mul(self, a, b):
        return (a + b) % 1

    def inv(self, a):
        return (-a) % 1

    def pow(self, a, e):
        return (a * e) % 1

    def word_for(self, el):
        el = Fraction(el) % 1
        return ((el.denominator - 1, el.numerator),) if el else ()

    @staticmethod
    def arc(a, b) -> Fraction:
        delta = (a - b) % 1
        return min(delta, 1 - delta)

    def distance(self, a, b):
        return self.arc(a, b)

    def ball(self, radius):
        return sorted({Fraction(k, N) for N in range(1, radius + 1) for k in range(N)})

    def folner_candidates(self, D):
        # the finite cyclic subgroup generated by D is exactly invariant
        N = lcm(*[Fraction(x).denominator for x in D]) if D else 1
        while True:
            yield [Fraction(k, N) for k in range(N)]


FAMILIES = {
    "Z": IntegerGroup,
    "Zd": Zd,
    "DirectSumZ": DirectSumZ,
    "Lamplighter": Lamplighter,
    "Heisenberg": Heisenberg,
    "Finite": Finite,
    "CircleRationals": CircleRationals,
}


def from_json(obj) -> Group:
    """Build a descriptor from ``{"family": ...}`` (dict or JSON text)."""
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise DescriptorError(f"malformed group JSON: {exc}") from exc
    if not isinstance(obj, dict) or "family" not in obj:
        raise DescriptorError("group descriptor must be an object with a 'family' key")
    fam = obj["family"]
    if fam not in FAMILIES:
        raise DescriptorError(f"unknown family {fam!r}")
    if fam == "Zd":
        return Zd(int(obj.get("d", 2)))
    if fam == "Finite":
        table = tuple(tuple(int(x) for x in row) for row in obj.get("table", ()))
        gens = obj.get("gens")
        return Finite(table, tuple(gens) if gens is not None else None)
    return FAMILIES[fam]()


def cyclic(k: int) -> Finite:
    return Finite(tuple(tuple((i + j) % k for j in range(k)) for i in range(k)))


# ---------------------------------------------------------------------------
# the numbering nu

@lru_cache(maxsize=1 << 18)
def eval_code(G: Group, code: int):
    out = G.identity
    for g, e in decode_word(code):
        out = G.mul(out, G.pow(G.gen(g), e))
    return out


def equal(G: Group, a: int, b: int) -> bool:
    return eval_code(G, a) == eval_code(G, b)


def code_for(G: Group, el) -> int:
    """A code whose image is ``el`` (not necessarily the least one)."""
    return encode_word(G.word_for(el))


def least_code(G: Group, el, limit: int = 10**5) -> int:
    """Least code of ``el`` (searches upward; the injective-view numbering)."""
    for c in range(limit):
        if eval_code(G, c) == el:
            return c
    raise LookupError(f"no code below {limit} for {G.format(el)}")


def injective_view(G: Group, count: int, limit: int = 10**5) -> list[int]:
    """First ``count`` least codes: the bijective numbering n -> least codes."""
    seen = set()
    out = []
    for c in range(limit):
        el = eval_code(G, c)
        if el not in seen:
            seen.add(el)
            out.append(c)
            if len(out) == count:
                return out
    raise LookupError("limit too small")


def equality_pairs(G: Group, budget: int) -> list[tuple[int, int]]:
    """First ``budget`` true pairs ``nu(a) = nu(b)`` by code sum, then lexicographically."""
    out = []
    for s in itertools.count(0):
        if len(out) >= budget:
            return out[:budget]
        for a in range(s + 1):
            if equal(G, a, s - a):
                out.append((a, s - a))
                if len(out) >= budget:
                    return out


class EqualityEnumerator:
    """Semi-decision access to ``nu(a) = nu(b)``; never exposes a refutation.

    Confirmation of candidate pairs is simulated as a round-robin process:
    tick ``t`` visits candidate ``t mod len(candidates)``, and a true pair
    is confirmed on its ``delay``-th visit.  False pairs are never
    confirmed.  The emitted stream is computed analytically (the tick stamps
    are those of the round-robin), so large candidate sets stay cheap.
    """

    def __init__(self, G: Group, delay_mod: int = 3):
        self._G = G
        self._delay_mod = delay_mod
        self.ticks = 0
        self.requests = 0

    def delay(self, a: int, b: int) -> int:
        return 1 + (a + b) % self._delay_mod

    def confirm(self, lefts: list[int], rights: list[int]) -> Iterator[tuple[int, int, int]]:
        """Yield ``(tick, i, j)`` confirming ``nu(lefts[i]) = nu(rights[j])``.

        Candidates are all index pairs ``(i, j)`` in row-major order.
        """
        self.requests += 1
        G = self._G
        width = len(rights)
        total = len(lefts) * width
        by_value: dict = {}
        for j, r in enumerate(rights):
            by_value.setdefault(eval_code(G, r), []).append(j)
        hits = []
        for i, l in enumerate(lefts):
            for j in by_value.get(eval_code(G, l), ()):
                pos = i * width + j
                hits.append(((self.delay(l, rights[j]) - 1) * total + pos + 1, i, j))
        hits.sort()
        for tick, i, j in hits:
            self.ticks = max(self.ticks, tick)
            yield tick, i, j

    def pairs_within(self, codes: list[int]) -> Iterator[tuple[int, int, int]]:
        """Confirmations ``(tick, a, b)`` for pairs ``a < b`` inside ``codes``."""
        codes = sorted(set(codes))
        for tick, i, j in self.confirm(codes, codes):
            if i < j:
                yield tick, codes[i], codes[j]

    def clone(self) -> "EqualityEnumerator":
        return EqualityEnumerator(self._G, self._delay_mod)
