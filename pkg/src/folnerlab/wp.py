"""Deciding equality from a Folner-set oracle and an equality enumerator.

Given codes ``n1, n2``, the oracle returns an injectively numbered
1/3-Folner set ``F`` for ``{n1, n2}``.  Confirmations of
``nu(n_i * f) = nu(f')`` are collected for all ``f, f'`` in ``F`` until
each ``Sigma_i`` covers two thirds of ``F``.  Two thirds plus two thirds
exceeds one, so some ``f`` has partners ``f'`` in ``Sigma_1`` and ``f''`` in
``Sigma_2``, and ``nu(n1) = nu(n2)`` exactly when ``f' = f''``.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable

from .folner import Exhausted, computable_folner
from .words import star
from .zoo import EqualityEnumerator, Group

FolnerOracle = Callable[[int, tuple], tuple]


class InstrumentedOracle:
    """Wraps an oracle and records every ``(n, D)`` request."""

    def __init__(self, oracle: FolnerOracle):
        self._oracle = oracle
        self.requests: list[tuple[int, tuple]] = []

    def __call__(self, n: int, D: tuple) -> tuple:
        self.requests.append((n, tuple(D)))
        return self._oracle(n, D)


def zoo_oracle(G: Group) -> FolnerOracle:
    """The computable-amenability algorithm of a zoo family."""
    return lambda n, D: computable_folner(G, n, D)


@dataclass(frozen=True)
class WpTrace:
    equal: bool
    folner_size: int
    pivot: int
    partners: tuple[int, int]
    ticks: int


def _tagged(i, events):
    for tick, a, b in events:
        yield tick, i, a, b


def wp_trace(n1: int, n2: int, oracle: FolnerOracle, enumerator: EqualityEnumerator,
             budget: int | None = None) -> WpTrace:
    if n1 == n2:
        return WpTrace(True, 0, n1, (n1, n1), 0)
    F = sorted(set(oracle(3, (n1, n2))))
    need = 2 * len(F)  # 3|Sigma_i| >= 2|F|
    streams = [_tagged(i, enumerator.confirm([star(n, f) for f in F], F)) for i, n in enumerate((n1, n2))]
    sigma: list[dict[int, int]] = [{}, {}]
    tick = 0
    for tick, i, a, b in heapq.merge(*streams):
        if budget is not None and tick > budget:
            raise Exhausted(f"threshold not reached within {budget} ticks", budget)
        sigma[i][F[a]] = F[b]
        if 3 * len(sigma[0]) >= need and 3 * len(sigma[1]) >= need:
            break
    else:
        raise Exhausted("enumerator ran dry before the 2/3 threshold; the oracle set is not Folner", tick)
    common = sorted(set(sigma[0]) & set(sigma[1]))
    if not common:
        raise AssertionError("pigeonhole failed: Sigma domains are disjoint")
    f = common[0]
    return WpTrace(sigma[0][f] == sigma[1][f], len(F), f, (sigma[0][f], sigma[1][f]), tick)


def decide_equal_via_folner(n1: int, n2: int, oracle: FolnerOracle, enumerator: EqualityEnumerator,
                            budget: int | None = None) -> bool:
    return wp_trace(n1, n2, oracle, enumerator, budget).equal
