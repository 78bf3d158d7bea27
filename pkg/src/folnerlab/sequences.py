"""Computable Folner sequences: finite-horizon checks and the product-set reduction.

A sequence program maps ``j`` to a finite code set ``F_j``.  The horizon
check reports, for each test element ``x`` and precision ``n``, the least
``l`` after which every ``F_k`` up to the horizon has defect ``< 1/n``.

The reduction builds, from a model of a family of c.e. sets ``W_n``, product
sets in the direct sum of copies of Z.  Coordinate ``i`` of the sum is the
generator ``g_i``; coordinates are used from 1 upward.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod
from typing import Callable, Iterable, Iterator

from .folner import element_defect, image
from .zoo import DirectSumZ, Group, code_for, eval_code


class TotalityFailure(Exception):
    """The program is undefined at some index inside the horizon."""

    def __init__(self, j: int, reason: str = ""):
        super().__init__(f"program undefined at j={j}" + (f": {reason}" if reason else ""))
        self.j = j


@dataclass(frozen=True)
class SequenceProgram:
    """A rule ``j -> codes of F_j`` described by a small JSON object.

    Kinds: ``interval`` (powers ``g^k``, ``|k| <= scale*j``), ``box``
    (products of such powers over several generators), ``ball`` (the
    family's ball of radius ``j``), ``constant`` and ``list`` (explicit code
    sets; a list is undefined past its end).
    """

    spec: dict
    group: Group

    def __call__(self, j: int) -> tuple[int, ...]:
        kind = self.spec.get("kind")
        G = self.group
        if kind == "interval":
            g = G.gen(int(self.spec.get("gen", 0)))
            r = int(self.spec.get("scale", 1)) * j
            out = {code_for(G, G.pow(g, k)) for k in range(-r, r + 1)}
        elif kind == "box":
            gens = [G.gen(int(i)) for i in self.spec["gens"]]
            r = int(self.spec.get("scale", 1)) * j
            out = set()
            for ks in itertools.product(range(-r, r + 1), repeat=len(gens)):
                el = G.identity
                for g, k in zip(gens, ks):
                    el = G.mul(el, G.pow(g, k))
                out.add(code_for(G, el))
        elif kind == "ball":
            out = {code_for(G, el) for el in G.ball(j)}
        elif kind == "constant":
            out = {int(c) for c in self.spec["codes"]}
        elif kind == "list":
            sets = self.spec["sets"]
            if j >= len(sets):
                raise TotalityFailure(j, "past the end of the list")
            out = {int(c) for c in sets[j]}
        else:
            raise ValueError(f"unknown program kind {kind!r}")
        if not out:
            raise TotalityFailure(j, "empty set")
        return tuple(sorted(out))


@dataclass
class HorizonLine:
    x: int
    n: int
    l: int
    stable_from: int
    horizon: int
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.l < self.horizon

    def to_json(self) -> dict:
        return {"x": self.x, "n": self.n, "l": self.l, "stable_from": self.stable_from,
                "passed": self.passed, "violations": self.violations}


def verify_sequence_horizon(G: Group, prog: Callable[[int], Iterable[int]], horizon: int,
                            x_set: Iterable[int], n_max: int,
                            defect_fn: Callable | None = None) -> list[HorizonLine]:
    """One line per ``(x, n)`` with ``n = 1..n_max``; indices ``k`` run over ``1..horizon``.

    ``l`` is the least value with every ``k in (l, horizon]`` good, and
    ``stable_from = l + 1`` is the first good index of that tail.  A line
    fails when the last index itself is bad (then ``l = horizon``).
    """
    xs = sorted(set(x_set))
    defects: dict[tuple[int, int], Fraction] = {}
    for k in range(1, horizon + 1):
        if defect_fn is not None:
            for x in xs:
                defects[k, x] = defect_fn(k, x)
            continue
        try:
            S = image(G, prog(k))
        except TotalityFailure:
            raise
        except Exception as exc:  # anything else the rule throws is still partiality
            raise TotalityFailure(k, str(exc)) from exc
        for x in xs:
            defects[k, x] = element_defect(G, S, eval_code(G, x))
    lines = []
    for x in xs:
        for n in range(1, n_max + 1):
            bound = Fraction(1, n)
            bad = [k for k in range(1, horizon + 1) if defects[k, x] >= bound]
            l = bad[-1] if bad else 0
            lines.append(HorizonLine(x, n, l, l + 1, horizon, bad))
    return lines


# ---------------------------------------------------------------------------
# product sets in the direct sum of copies of Z

@dataclass(frozen=True)
class ProductSet:
    """``prod_i factors[i]``; coordinates outside ``factors`` are ``{0}``."""

    factors: tuple[tuple[int, tuple[int, ...]], ...]

    @classmethod
    def of(cls, factors: dict) -> "ProductSet":
        return cls(tuple(sorted((int(i), tuple(sorted(set(f)))) for i, f in factors.items())))

    def __len__(self) -> int:
        return prod(len(f) for _, f in self.factors)

    def overlap(self, v: dict) -> Fraction:
        """``|F n (v + F)| / |F|`` computed coordinate-wise."""
        out = Fraction(1)
        coords = dict(self.factors)
        for i in set(coords) | set(v):
            Fi = set(coords.get(i, (0,)))
            shift = v.get(i, 0)
            out *= Fraction(len(Fi & {a + shift for a in Fi}), len(Fi))
        return out

    def defect(self, v: dict) -> Fraction:
        return 1 - self.overlap(v)

    def materialize(self) -> list[tuple]:
        idx = [i for i, _ in self.factors]
        return [DirectSumZ.vector(dict(zip(idx, vals)))
                for vals in itertools.product(*(f for _, f in self.factors))]


_W_KINDS = ("all", "empty", "upto_n")


def _w_enumerator(spec, n: int) -> Iterator[int]:
    if spec == "all":
        return itertools.count(0)
    if spec == "empty":
        return iter(())
    if spec == "upto_n":
        return iter(range(n + 1))
    if isinstance(spec, dict) and "range" in spec:
        a, b = spec["range"]
        return iter(range(int(a), int(b)))
    if isinstance(spec, list):
        return iter(dict.fromkeys(int(x) for x in spec))
    raise ValueError(f"bad W description {spec!r}; use a list, {{'range': [a, b]}} or one of {_W_KINDS}")


class CeFamilyModel:
    """A family ``W_1, W_2, ...`` of enumerable sets and a fair pair enumeration.

    JSON: ``{"W": {"1": "all", "2": [0, 1, 2]}, "default": "empty"}``.
    Stage ``t`` emits the ``(t - n)``-th element of ``W_n`` for ``n = 1..t``
    when it exists, so each element appears exactly once.
    """

    def __init__(self, W: dict, default="empty"):
        self.W = {int(k): v for k, v in W.items()}
        self.default = default
        for v in list(self.W.values()) + [default]:
            _w_enumerator(v, 1)  # validate early
        self._pairs: list[tuple[int, int]] = []
        self._gen = self._enumerate()

    @classmethod
    def from_json(cls, obj: dict) -> "CeFamilyModel":
        return cls(obj.get("W", {}), obj.get("default", "empty"))

    def to_json(self) -> dict:
        return {"W": {str(k): v for k, v in sorted(self.W.items())}, "default": self.default}

    def spec(self, n: int):
        return self.W.get(n, self.default)

    def is_all_finite(self) -> bool:
        return "all" not in (list(self.W.values()) + [self.default])

    def _enumerate(self) -> Iterator[tuple[int, int]]:
        its: dict[int, Iterator[int] | None] = {}
        last_explicit = max(self.W, default=0)
        for t in itertools.count(1):
            its[t] = _w_enumerator(self.spec(t), t)
            emitted = False
            for n in range(1, t + 1):
                it = its[n]
                if it is None:
                    continue
                x = next(it, None)
                if x is None:
                    its[n] = None
                else:
                    emitted = True
                    yield n, x
            # with an empty default, nothing new can appear once the explicit part is spent
            if self.default == "empty" and t > last_explicit and not emitted:
                return

    def pair(self, s: int) -> tuple[int, int] | None:
        """The ``s``-th pair (``s >= 1``), or None if the enumeration is shorter."""
        while len(self._pairs) < s:
            nxt = next(self._gen, None)
            if nxt is None:
                return None
            self._pairs.append(nxt)
        return self._pairs[s - 1]


def build_reduction_set(model: CeFamilyModel, s: int) -> ProductSet:
    """``prod_{i=1..s} F_{s,i}`` with ``F_{s,i} = {-s..s}`` except ``{-1,0,1}`` at ``i = n_s``."""
    if s < 1:
        raise ValueError("stages start at s = 1")
    p = model.pair(s)
    exceptional = p[0] if p is not None else None
    return ProductSet.of({i: range(-1, 2) if i == exceptional else range(-s, s + 1)
                          for i in range(1, s + 1)})


@dataclass
class CaseStudy:
    verdict: str  # "behaves-as-folner" or "infinitely-often-bad"
    horizon: int
    thresholds: dict  # generator index -> least l with a clean tail (1/4 check)
    bad_indices: dict  # generator index -> stages s where the 1/4 check fails

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "horizon": self.horizon,
                "thresholds": {str(k): v for k, v in self.thresholds.items()},
                "bad_indices": {str(k): v for k, v in self.bad_indices.items()}}


def reduction_case_study(model: CeFamilyModel, horizon: int, generators: Iterable[int] | None = None,
                         bound: Fraction = Fraction(1, 4)) -> CaseStudy:
    """Run the reduction up to ``horizon`` and sort the model into the two cases.

    For each tested generator ``g_i`` it records the stages where ``F_s`` is
    not ``bound``-Folner.  Stages ``s < i`` are ignored since ``g_i`` is not
    yet a coordinate of the product.  The verdict is "infinitely-often-bad"
    when some generator's bad stages keep coming (its enumerated set is
    infinite in the model), and "behaves-as-folner" otherwise.
    """
    gens = sorted(set(generators)) if generators is not None else list(range(1, min(horizon, 10) + 1))
    sets = {s: build_reduction_set(model, s) for s in range(1, horizon + 1)}
    bad: dict[int, list[int]] = {}
    thresholds: dict[int, int] = {}
    for i in gens:
        hits = [s for s in range(max(i, 1), horizon + 1) if sets[s].defect({i: 1}) > bound]
        bad[i] = hits
        thresholds[i] = max([i - 1] + hits)
    infinite = {n for n in gens if model.spec(n) == "all"}
    verdict = "infinitely-often-bad" if infinite and any(bad[n] for n in infinite) else "behaves-as-folner"
    return CaseStudy(verdict, horizon, thresholds, bad)


def product_defect_checked(P: ProductSet, v: dict) -> tuple[Fraction, Fraction]:
    """Factored defect next to the generic one on the materialized set (small sets only)."""
    G = DirectSumZ()
    S = set(P.materialize())
    return P.defect(v), element_defect(G, S, DirectSumZ.vector(v))


def reduction_defect_fn(model: CeFamilyModel) -> Callable[[int, int], Fraction]:
    """``(s, x) -> defect of F_s under nu(x)``, for ``verify_sequence_horizon(defect_fn=...)``."""
    G = DirectSumZ()
    cache: dict[int, ProductSet] = {}

    def fn(s: int, x: int) -> Fraction:
        if s not in cache:
            cache[s] = build_reduction_set(model, s)
        return cache[s].defect(dict(eval_code(G, x)))

    return fn
