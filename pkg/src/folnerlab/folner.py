"""Folner defects, Folner sets, the Folner function and the two searches.

All ratios are exact ``Fraction`` values.  Sets of codes are collapsed
through the numbering before anything is counted, so ``defect`` measures
``|nu(F) \\ nu(x) nu(F)| / |nu(F)|``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Iterable, Iterator

from .zoo import Group, code_for, eval_code


class Exhausted(Exception):
    """Budget ran out; says nothing about non-amenability."""

    def __init__(self, message: str, consumed: int = 0):
        super().__init__(message)
        self.consumed = consumed


@dataclass(frozen=True)
class FolnerWitness:
    codes: tuple[int, ...]
    n: int
    D: tuple[int, ...]
    defects: dict = field(compare=False)
    injective: bool

    def to_json(self, G: Group) -> dict:
        return {
            "kind": "folner",
            "group": G.to_json(),
            "n": self.n,
            "D": list(self.D),
            "codes": list(self.codes),
            "defects": {str(x): str(q) for x, q in self.defects.items()},
            "injective": self.injective,
        }


@dataclass(frozen=True)
class FolnerRefusal:
    x: int
    defect: Fraction
    n: int

    def __bool__(self):
        return False


def image(G: Group, F: Iterable[int]) -> set:
    return {eval_code(G, f) for f in F}


def element_defect(G: Group, S: set, g) -> Fraction:
    if not S:
        raise ValueError("Folner defect of an empty set")
    shifted = {G.mul(g, s) for s in S}
    return Fraction(len(S - shifted), len(S))


def element_overlap(G: Group, S: set, g) -> Fraction:
    if not S:
        raise ValueError("empty set")
    shifted = {G.mul(g, s) for s in S}
    return Fraction(len(S & shifted), len(S))


def defect(G: Group, F: Iterable[int], x: int) -> Fraction:
    return element_defect(G, image(G, F), eval_code(G, x))


def overlap(G: Group, F: Iterable[int], x: int) -> Fraction:
    return element_overlap(G, image(G, F), eval_code(G, x))


def is_folner(G: Group, F: Iterable[int], D: Iterable[int], n: int) -> FolnerWitness | FolnerRefusal:
    F = tuple(sorted(set(F)))
    S = image(G, F)
    bound = Fraction(1, n)
    defects = {}
    for x in sorted(set(D)):
        q = element_defect(G, S, eval_code(G, x))
        if q > bound:
            return FolnerRefusal(x, q, n)
        defects[x] = q
    return FolnerWitness(F, n, tuple(sorted(set(D))), defects, len(S) == len(F))


def finite_sets(max_size: int | None = None) -> Iterator[tuple[int, ...]]:
    """All nonempty finite sets of naturals: by max element, then size, then lex."""
    for M in itertools.count(0):
        top = M + 1 if max_size is None else min(M + 1, max_size)
        for k in range(1, top + 1):
            for rest in itertools.combinations(range(M), k - 1):
                yield rest + (M,)


def search_folner(G: Group, n: int, D: Iterable[int], budget: int, max_size: int | None = None) -> FolnerWitness:
    """First injective 1/n-Folner code set in the canonical order of finite sets."""
    D = tuple(sorted(set(D)))
    targets = [eval_code(G, x) for x in D]
    bound = Fraction(1, n)
    for count, F in enumerate(finite_sets(max_size)):
        if count >= budget:
            raise Exhausted(f"no witness among the first {budget} candidate sets", budget)
        S = image(G, F)
        if len(S) != len(F):
            continue
        if all(element_defect(G, S, g) <= bound for g in targets):
            return is_folner(G, F, D, n)
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class FolnerFunctionValue:
    value: int | None
    ball_size: int
    upper_estimate: bool
    witness: tuple = ()


def folner_function(G: Group, n: int, D: Iterable[int], search_bound: int) -> FolnerFunctionValue:
    """Minimum size of a 1/n-Folner set among subsets of ``G.ball(search_bound)``.

    For infinite groups the ball truncates the minimum over ``G``, so the
    value is flagged as an upper estimate.  ``value`` is None when no subset
    of the ball qualifies.
    """
    targets = [eval_code(G, x) for x in set(D)]
    ball = G.ball(search_bound)
    finite_whole = hasattr(G, "order") and len(ball) == G.order
    bound = Fraction(1, n)
    for k in range(1, len(ball) + 1):
        for combo in itertools.combinations(ball, k):
            S = set(combo)
            if all(element_defect(G, S, g) <= bound for g in targets):
                return FolnerFunctionValue(k, len(ball), not finite_whole, combo)
    return FolnerFunctionValue(None, len(ball), True)


def computable_folner(G: Group, n: int, D: Iterable[int], max_candidates: int | None = None) -> tuple[int, ...]:
    """Injective code set whose image is 1/n-Folner for ``nu(D)``.

    Plays the role of the computable-amenability algorithm: it walks the
    family's constructive candidates and returns the first one that passes
    the exact check.
    """
    D = sorted(set(D))
    targets = [eval_code(G, x) for x in D]
    bound = Fraction(1, n)
    for k, cand in enumerate(G.folner_candidates(targets)):
        if max_candidates is not None and k >= max_candidates:
            break
        S = set(cand)
        if S and all(element_defect(G, S, g) <= bound for g in targets):
            return tuple(sorted(code_for(G, el) for el in S))
    raise Exhausted(f"no Folner candidate within {max_candidates} scales")


@dataclass(frozen=True)
class SigmaResult:
    superset: tuple[int, ...]
    certificate: object  # reiter.ReiterFunction
    subset: tuple[int, ...] | None


def sigma_search(G: Group, n: int, D: Iterable[int], budget: int, decidable: bool = True) -> SigmaResult:
    """Sigma route: a Reiter certificate, then a Folner subset of its support.

    The certificate is found through the semi-decision procedure only.  The
    subset is extracted when equality is decidable; otherwise only the
    superset and its certificate are returned.
    """
    from . import reiter

    D = tuple(sorted(set(D)))
    # level sets of a 1/m-invariant function have defect <= |D|/(2m)
    m = max(1, ceil(Fraction(n * len(D), 2)))
    f = reiter.compute_reiter(G, m, D, budget)
    superset = tuple(sorted(f.values))
    if not decidable:
        return SigmaResult(superset, f, None)
    sub = reiter.extract_folner(G, f, D, m)
    if D and not is_folner(G, sub, D, n):
        raise AssertionError("extracted subset failed the Folner re-check")
    return SigmaResult(superset, f, tuple(sorted(sub)))
