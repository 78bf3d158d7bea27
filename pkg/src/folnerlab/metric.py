"""Metric groups: matching numbers, metric Folner sets and distance estimation.

Every zoo family carries a right-invariant metric bounded by 1: the arc
metric on the circle, the {0,1}-metric everywhere else.  Edges of the
bipartite graph between ``F1`` and ``F2`` join ``x`` and ``y`` when
``d(y, x) < q`` (the open ball around the identity, transported by right
invariance).
"""

from __future__ import annotations

import bisect
import heapq
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor
from typing import Callable, Iterable, Iterator

from .folner import Exhausted, computable_folner, finite_sets
from .sequences import HorizonLine
from .words import inv, star
from .zoo import CircleRationals, Group, code_for, eval_code


# ---------------------------------------------------------------------------
# bipartite matching

@dataclass
class Matching:
    size: int
    pairs: dict  # left index -> right index
    deficiency: tuple  # S with |S| - |N(S)| = |left| - size

    def to_json(self) -> dict:
        return {"mu": self.size, "pairs": sorted(self.pairs.items()), "hall_set": list(self.deficiency)}


def max_matching(n_left: int, adj: list[list[int]]) -> Matching:
    """Augmenting-path maximum matching plus a Hall deficiency set from the residual reachability."""
    match_l: list[int | None] = [None] * n_left
    match_r: dict[int, int] = {}

    def augment(u: int, seen: set) -> bool:
        stack = [(u, iter(adj[u]))]
        path = []
        while stack:
            node, it = stack[-1]
            advanced = False
            for v in it:
                if v in seen:
                    continue
                seen.add(v)
                w = match_r.get(v)
                if w is None:
                    path.append((node, v))
                    for a, b in path:
                        match_l[a] = b
                        match_r[b] = a
                    return True
                path.append((node, v))
                stack.append((w, iter(adj[w])))
                advanced = True
                break
            if not advanced:
                stack.pop()
                if path:
                    path.pop()
        return False

    for u in range(n_left):
        augment(u, set())
    size = sum(v is not None for v in match_l)
    # alternating reachability from free left vertices
    S = {u for u in range(n_left) if match_l[u] is None}
    frontier = list(S)
    reached_r: set[int] = set()
    while frontier:
        u = frontier.pop()
        for v in adj[u]:
            if v not in reached_r:
                reached_r.add(v)
                w = match_r.get(v)
                if w is not None and w not in S:
                    S.add(w)
                    frontier.append(w)
    return Matching(size, {u: v for u, v in enumerate(match_l) if v is not None}, tuple(sorted(S)))


def hall_value(n_left: int, adj: list[list[int]], S: Iterable[int]) -> int:
    S = set(S)
    neigh = set().union(*(adj[u] for u in S)) if S else set()
    return n_left - (len(S) - len(neigh))


def hall_exhaustive(n_left: int, adj: list[list[int]]) -> int:
    """``|F1| - max_S (|S| - |N(S)|)`` by enumerating every subset; small instances only."""
    best = 0
    for mask in range(1 << n_left):
        S = [u for u in range(n_left) if mask >> u & 1]
        neigh = set().union(*(adj[u] for u in S)) if S else set()
        best = max(best, len(S) - len(neigh))
    return n_left - best


class IncrementalMatching:
    """Maximum matching maintained under edge insertions."""

    def __init__(self, n_left: int):
        self.adj: list[list[int]] = [[] for _ in range(n_left)]
        self.match_l: list[int | None] = [None] * n_left
        self.match_r: dict[int, int] = {}
        self.size = 0

    def add_edge(self, u: int, v: int) -> bool:
        if v in self.adj[u]:
            return False
        self.adj[u].append(v)
        if self.match_l[u] is None and v not in self.match_r:
            self.match_l[u], self.match_r[v] = v, u
            self.size += 1
            return True
        # any new augmenting path must use (u, v); search from every free left vertex
        parent: dict[int, tuple[int, int | None]] = {}
        frontier = [x for x, m in enumerate(self.match_l) if m is None]
        seen_l = set(frontier)
        while frontier:
            nxt = []
            for x in frontier:
                for y in self.adj[x]:
                    if y in parent:
                        continue
                    parent[y] = (x, None)
                    w = self.match_r.get(y)
                    if w is None:
                        self._flip(y, parent)
                        self.size += 1
                        return True
                    if w not in seen_l:
                        seen_l.add(w)
                        nxt.append(w)
            frontier = nxt
        return False

    def _flip(self, y: int, parent: dict):
        while True:
            x, _ = parent[y]
            prev = self.match_l[x]
            self.match_l[x], self.match_r[y] = y, x
            if prev is None:
                return
            y = prev


# ---------------------------------------------------------------------------
# distances

def distance(G: Group, a, b) -> Fraction:
    return Fraction(G.distance(a, b))


class PrecisionFailure(RuntimeError):
    pass


class DistanceOracle:
    """``(i, j, eps) -> l`` with ``d(nu(i), nu(j))`` in ``[l, l + eps)``.

    Answers lie on the grid ``eps * Z``, so answers at nested precisions
    overlap.  ``queries`` counts calls.
    """

    def __init__(self, G: Group):
        self.G = G
        self.queries = 0

    def __call__(self, i: int, j: int, eps: Fraction) -> Fraction:
        self.queries += 1
        d = distance(self.G, eval_code(self.G, i), eval_code(self.G, j))
        return floor(d / eps) * eps

    def below(self, i: int, j: int, q: Fraction, eps: Fraction, max_depth: int = 8) -> bool:
        """Decide ``d < q`` from interval answers, refining on a straddle."""
        q = Fraction(q)
        for _ in range(max_depth):
            lo = self(i, j, eps)
            if lo + eps <= q:
                return True
            if lo >= q:
                return False
            # a grid aligned with q decides at once
            eps = Fraction(1, q.denominator * 2 * max(1, ceil(1 / eps)))
        raise PrecisionFailure(f"edge ({i}, {j}) undecided at radius {q}")


def _edges(G: Group, F1: list, F2: list, q: Fraction) -> list[list[int]]:
    q = Fraction(q)
    if getattr(G, "metric", "discrete") == "arc":
        return _arc_edges(F1, F2, q)
    index = {}
    for j, y in enumerate(F2):
        index.setdefault(y, []).append(j)
    if q > 1:
        return [list(range(len(F2))) for _ in F1]
    return [list(index.get(x, ())) for x in F1]  # d < q <= 1 means equal


def _arc_edges(F1: list, F2: list, q: Fraction) -> list[list[int]]:
    if q > Fraction(1, 2):
        return [list(range(len(F2))) for _ in F1]
    order = sorted(range(len(F2)), key=lambda j: F2[j])
    vals = [F2[j] for j in order]
    adj = []
    for x in F1:
        out = []
        for shift in (-1, 0, 1):
            lo = bisect.bisect_right(vals, x + shift - q)
            hi = bisect.bisect_left(vals, x + shift + q)
            out.extend(order[lo:hi])
        adj.append(sorted(set(j for j in out if CircleRationals.arc(x, F2[j]) < q)))
    return adj


def matching_number(G: Group, F1: Iterable, F2: Iterable, q: Fraction,
                    oracle: DistanceOracle | None = None, eps: Fraction = Fraction(1, 1000),
                    closed: bool = False) -> Matching:
    """Matching number of ``R = {(x, y) : d(y, x) < q}`` on elements ``F1 x F2``.

    With an ``oracle`` (which works on codes) every edge is decided through
    interval answers; otherwise exact distances are used.  ``closed`` switches
    to the closed ball ``d(y, x) <= q``.
    """
    F1, F2 = list(F1), list(F2)
    if closed:
        q = Fraction(q)
        adj = [[j for j, y in enumerate(F2) if distance(G, y, x) <= q] for x in F1]
    elif oracle is None:
        adj = _edges(G, F1, F2, q)
    else:
        c1 = [code_for(G, x) for x in F1]
        c2 = [code_for(G, y) for y in F2]
        adj = [[j for j, b in enumerate(c2) if oracle.below(b, a, q, eps)] for a in c1]
    return max_matching(len(F1), adj)


def eps_matching(G: Group, F: Iterable, g, eps: Fraction) -> dict:
    """A maximum partial injection ``F -> gF`` moving points by less than ``eps``."""
    F = list(dict.fromkeys(F))
    gF = [G.mul(g, x) for x in F]
    M = matching_number(G, F, gF, eps)
    return {F[u]: gF[v] for u, v in M.pairs.items()}


@dataclass(frozen=True)
class MetricFolnerWitness:
    codes: tuple
    m: int
    n: int
    mu: dict

    def to_json(self, G: Group) -> dict:
        return {"kind": "metric-folner", "group": G.to_json(), "m": self.m, "n": self.n,
                "codes": list(self.codes), "mu": {str(k): v for k, v in self.mu.items()}}


@dataclass(frozen=True)
class MetricRefusal:
    e: int
    mu: int
    needed: Fraction

    def __bool__(self):
        return False


def is_metric_folner(G: Group, F: Iterable[int], D: Iterable[int], m: int, n: int):
    """``mu(F, eF, B_{<1/m}) >= (n-1)/n |F|`` for every ``e`` in ``D``."""
    S = list(dict.fromkeys(eval_code(G, c) for c in F))
    theta = Fraction(n - 1, n) * len(S)
    mus = {}
    for e in sorted(set(D)):
        g = eval_code(G, e)
        mu = matching_number(G, S, [G.mul(g, s) for s in S], Fraction(1, m)).size
        if mu < theta:
            return MetricRefusal(e, mu, theta)
        mus[e] = mu
    return MetricFolnerWitness(tuple(sorted(set(F))), m, n, mus)


# ---------------------------------------------------------------------------
# enumerated distance facts

def rationals_01() -> Iterator[Fraction]:
    """Rationals in ``(0, 1)`` by denominator, then numerator, without repeats."""
    for den in itertools.count(2):
        for num in range(1, den):
            q = Fraction(num, den)
            if q.denominator == den:
                yield q


class FactEnumerator:
    """Simulated enumeration of the true facts ``d(nu(a), nu(b)) < q``.

    ``confirm_below`` mirrors the equality enumerator: all candidate pairs
    run round-robin and a true fact about ``(i, j)`` shows up after a delay
    of ``1 + (a + b) % delay_mod`` rounds.
    """

    def __init__(self, G: Group, delay_mod: int = 3):
        self.G = G
        self.delay_mod = delay_mod
        self.requests = 0

    def confirm_below(self, lefts: list[int], rights: list[int], q: Fraction) -> Iterator[tuple[int, int, int]]:
        self.requests += 1
        G = self.G
        L = [eval_code(G, a) for a in lefts]
        R = [eval_code(G, b) for b in rights]
        adj = _edges(G, L, R, Fraction(q))
        width, total = len(rights), len(lefts) * len(rights)
        hits = []
        for i, js in enumerate(adj):
            for j in js:
                delay = 1 + (lefts[i] + rights[j]) % self.delay_mod
                hits.append(((delay - 1) * total + i * width + j + 1, i, j))
        hits.sort()
        return iter(hits)

    def facts(self, codes: list[int]) -> Iterator[tuple[int, int, Fraction]]:
        """All true ``(a, b, q)`` with ``a <= b`` in ``codes``, dovetailed over pairs and rationals."""
        codes = sorted(set(codes))
        pairs = [(a, b) for i, a in enumerate(codes) for b in codes[i:]]
        els = {c: eval_code(self.G, c) for c in codes}
        qs: list[Fraction] = []
        qgen = rationals_01()
        for t in itertools.count(0):
            while len(qs) <= t:
                qs.append(next(qgen))
            for r in range(t + 1):
                p = t - r
                if p < len(pairs):
                    a, b = pairs[p]
                    if distance(self.G, els[a], els[b]) < qs[r]:
                        yield a, b, qs[r]


@dataclass
class ThetaCertified:
    folner: tuple
    consumed: int
    mu: dict
    kind = "certified"


@dataclass
class NotYet:
    consumed: int
    mu: dict = field(default_factory=dict)
    kind = "not-yet"


def theta_hat(G: Group, m: int, n: int, D: Iterable[int], F: Iterable[int], budget: int,
              facts: FactEnumerator | None = None) -> ThetaCertified | NotYet:
    """Semi-decide ``(m, n, D, F)`` from enumerated distance facts.

    Equality is decided directly; distances are learnt only from facts
    ``d < q``, and an edge of the ``1/m`` ball is known once some fact with
    ``q <= 1/m`` has been seen.  The known matching numbers can only grow.
    """
    D = sorted(set(D))
    F = sorted(set(F))
    facts = facts or FactEnumerator(G)
    reps: dict = {}
    for c in sorted(set(F) | {star(e, f) for e in D for f in F}):
        reps.setdefault(eval_code(G, c), c)
    rep_of = {c: reps[eval_code(G, c)] for c in set(F) | {star(e, f) for e in D for f in F}}
    F0F = sorted({rep_of[f] for f in F})
    theta = Fraction(n - 1, n) * len(F0F)
    radius = Fraction(1, m)
    pos = {c: i for i, c in enumerate(F0F)}
    # right side for e: the representatives of e * f, f in F0 n F
    sides = {e: [rep_of[star(e, f)] for f in F0F] for e in D}
    where = {e: {} for e in D}
    for e in D:
        for j, c in enumerate(sides[e]):
            where[e].setdefault(c, []).append(j)
    inc = {e: IncrementalMatching(len(F0F)) for e in D}
    mu = {e: 0 for e in D}

    def done() -> bool:
        return all(mu[e] >= theta for e in D)

    if done():
        return ThetaCertified(tuple(F0F), 0, dict(mu))
    consumed = 0
    for a, b, q in facts.facts(sorted(set(rep_of.values()))):
        if consumed >= budget:
            break
        consumed += 1
        if q > radius:
            continue
        changed = False
        for x, y in ((a, b), (b, a)):
            if x not in pos:
                continue
            for e in D:
                for j in where[e].get(y, ()):
                    changed |= inc[e].add_edge(pos[x], j)
        if changed:
            for e in D:
                assert inc[e].size >= mu[e], "matching number decreased"
                mu[e] = inc[e].size
            if done():
                return ThetaCertified(tuple(F0F), consumed, dict(mu))
    return NotYet(consumed, dict(mu))


@dataclass
class Assignment:
    """Lazy ``(i, j) -> q`` with ``d(nu(i), nu(j))`` in ``[q, q + 1/l)``."""

    G: Group
    l: int
    cache: dict = field(default_factory=dict)

    def __getitem__(self, key: tuple[int, int]) -> Fraction:
        if key not in self.cache:
            i, j = key
            d = distance(self.G, eval_code(self.G, i), eval_code(self.G, j))
            self.cache[key] = Fraction(floor(d * self.l), self.l)
        return self.cache[key]

    def table(self, codes: Iterable[int]) -> dict:
        codes = list(codes)
        return {(i, j): self[i, j] for i in codes for j in codes}


def search_metric_folner(G: Group, l: int, m: int, n: int, D: Iterable[int], budget: int,
                         max_size: int | None = None) -> tuple[MetricFolnerWitness, dict]:
    """First injective code set in canonical order meeting the metric Folner inequality."""
    D = sorted(set(D))
    for count, F in enumerate(finite_sets(max_size)):
        if count >= budget:
            raise Exhausted(f"no metric Folner set among the first {budget} candidates", budget)
        if len({eval_code(G, c) for c in F}) != len(F):
            continue
        w = is_metric_folner(G, F, D, m, n)
        if w:
            return w, Assignment(G, l).table(F)
    raise AssertionError("unreachable")


def circle_grid(m: int) -> list[Fraction]:
    N = m + 1
    return [Fraction(k, N) for k in range(N)]


def zoo_metric_oracle(G: Group) -> Callable:
    """Computable-amenability algorithm for a zoo family: ``(l, m, n, D) -> (F, assignment)``.

    On the circle the grid ``{k/N}`` with ``N > m`` moves every point by at
    most ``1/(2N) < 1/m``.  Discrete families use their Folner sets.
    """

    def oracle(l: int, m: int, n: int, D: tuple):
        if isinstance(G, CircleRationals):
            F = tuple(sorted(code_for(G, x) for x in circle_grid(m)))
        else:
            F = computable_folner(G, n, D)
        if not is_metric_folner(G, F, D, m, n):
            raise AssertionError("oracle produced a set failing the metric check")
        return F, Assignment(G, l)

    return oracle


@dataclass(frozen=True)
class DistanceEstimate:
    q0: Fraction
    eps: Fraction
    l: int
    m: int
    n: int
    pivot: int
    partners: tuple
    ticks: int


def estimate_parameters(eps: Fraction) -> tuple[int, int, int]:
    """``(l, m, n)`` with ``1/l + 4/m < eps``; also ``2/l <= eps``, ``m > 4/eps`` and ``n = 3``."""
    eps = Fraction(eps)
    l = ceil(2 / eps)
    m = floor(8 / eps) + 1
    return l, m, 3


def estimate_distance(G: Group, n1: int, n2: int, eps: Fraction, ca_oracle: Callable,
                      facts: FactEnumerator | None = None, budget: int | None = None) -> DistanceEstimate:
    """``q0`` with ``d(nu(n1), nu(n2))`` in ``[q0, q0 + eps)``.

    Only the fact enumerator and the oracle are consulted.  Matchings
    ``Sigma_i`` of ``{(f, f') : d(n_i f, f') < 1/m}`` grow until both reach
    ``(n-1)/n |F|``; a shared ``f`` gives partners ``f'``, ``f''`` and the
    assignment ``q`` for ``(f', f'')``.  Right invariance and two triangle
    inequalities place the distance in ``[q - 2/m, q + 1/l + 2/m)``.
    """
    eps = Fraction(eps)
    facts = facts or FactEnumerator(G)
    l, m, n = estimate_parameters(eps)
    F, assignment = ca_oracle(l, m, n, tuple(sorted({n1, n2})))
    F = sorted(F)
    need = Fraction(n - 1, n) * len(F)
    radius = Fraction(1, m)

    def tagged(i, events):
        for tick, a, b in events:
            yield tick, i, a, b

    streams = [tagged(i, facts.confirm_below([star(c, f) for f in F], F, radius)) for i, c in enumerate((n1, n2))]
    inc = [IncrementalMatching(len(F)), IncrementalMatching(len(F))]
    tick = 0
    for tick, i, a, b in heapq.merge(*streams):
        if budget is not None and tick > budget:
            raise Exhausted(f"matching threshold not reached within {budget} ticks", budget)
        inc[i].add_edge(a, b)
        if inc[0].size >= need and inc[1].size >= need:
            break
    else:
        raise AssertionError("fact stream ended below the threshold; the oracle set is not metric Folner")
    common = sorted(set(u for u, v in enumerate(inc[0].match_l) if v is not None)
                    & set(u for u, v in enumerate(inc[1].match_l) if v is not None))
    u = common[0]
    f1, f2 = F[inc[0].match_l[u]], F[inc[1].match_l[u]]
    q = assignment[f1, f2]
    q0 = max(Fraction(0), q - 2 * radius)
    return DistanceEstimate(q0, eps, l, m, n, F[u], (f1, f2), tick)


def verify_metric_sequence_horizon(G: Group, prog: Callable[[int], Iterable[int]], horizon: int,
                                   x_set: Iterable[int], n_max: int) -> list[HorizonLine]:
    """Per ``(g, n)``: least ``l`` with ``mu(F_k, gF_k, B_{<1/n}) >= (n-1)/n |F_k|`` for all ``k in (l, horizon]``."""
    xs = sorted(set(x_set))
    good: dict = {}
    for k in range(1, horizon + 1):
        S = list(dict.fromkeys(eval_code(G, c) for c in prog(k)))
        for x in xs:
            g = eval_code(G, x)
            gS = [G.mul(g, s) for s in S]
            for n in range(1, n_max + 1):
                mu = matching_number(G, S, gS, Fraction(1, n)).size
                good[k, x, n] = mu >= Fraction(n - 1, n) * len(S)
    lines = []
    for x in xs:
        for n in range(1, n_max + 1):
            bad = [k for k in range(1, horizon + 1) if not good[k, x, n]]
            l = bad[-1] if bad else 0
            lines.append(HorizonLine(x, n, l, l + 1, horizon, bad))
    return lines
