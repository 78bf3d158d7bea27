"""Means over the intervals {-j..j} of Z, the slow-convergence sequence x0, and friends.

Binary sequences on Z are symmetric (``x(-i) = x(i)``) and stored as runs of
equal bits over ``i >= 1`` together with ``x(0)``.  On one run the mean

    m_j = (x(0) + 2 * #{1 <= i <= j : x(i) = 1}) / (2j + 1)

is a monotone function of ``j``, so thresholds and maxima over a run are
found exactly from its endpoints plus a binary search.
"""

from __future__ import annotations

import ast
import bisect
import itertools
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator


class BinarySeqZ:
    """Common interface: ``x0``, ``runs(upto)``, ``limit_mean``."""

    x0: int = 1

    def runs(self, upto: int) -> Iterator[tuple[int, int, int]]:
        """Maximal ``(start, end, bit)`` runs covering ``1..upto``."""
        raise NotImplementedError

    def limit_mean(self) -> Fraction:
        raise NotImplementedError

    def bit(self, i: int) -> int:
        i = abs(i)
        if i == 0:
            return self.x0
        for a, b, v in self.runs(i):
            if a <= i <= b:
                return v
        raise AssertionError("runs must cover every index")

    def ones_upto(self, j: int) -> int:
        return sum(b - a + 1 for a, b, v in self.runs(j) if v)

    def materialize(self, upto: int) -> list[int]:
        """``[x(0), x(1), ..., x(upto)]``."""
        out = [self.x0]
        for a, b, v in self.runs(upto):
            out.extend([v] * (b - a + 1))
        return out


def _merge_runs(bits: Iterator[tuple[int, int]], upto: int) -> Iterator[tuple[int, int, int]]:
    start = prev = None
    last = 0
    for i, v in bits:
        if i > upto:
            break
        if prev is None:
            start, prev = i, v
        elif v != prev:
            yield start, i - 1, prev
            start, prev = i, v
        last = i
    if prev is not None:
        yield start, last, prev


@dataclass(frozen=True)
class ExplicitSymmetric(BinarySeqZ):
    """Values ``x(0..N)`` followed by a repeating tail pattern."""

    values: tuple[int, ...]
    tail: tuple[int, ...] = (0,)

    def __post_init__(self):
        if not self.values or not self.tail:
            raise ValueError("need x(0) and a nonempty tail pattern")
        if any(v not in (0, 1) for v in self.values + self.tail):
            raise ValueError("bits must be 0 or 1")

    @property
    def x0(self) -> int:
        return self.values[0]

    def _bit(self, i: int) -> int:
        N = len(self.values) - 1
        if i <= N:
            return self.values[i]
        return self.tail[(i - N - 1) % len(self.tail)]

    def bit(self, i: int) -> int:
        return self._bit(abs(i))

    def runs(self, upto):
        return _merge_runs(((i, self._bit(i)) for i in itertools.count(1)), upto)

    def ones_upto(self, j: int) -> int:
        N = len(self.values) - 1
        if j <= N:
            return sum(self.values[1:j + 1])
        head = sum(self.values[1:])
        full, rest = divmod(j - N, len(self.tail))
        return head + full * sum(self.tail) + sum(self.tail[:rest])

    def limit_mean(self) -> Fraction:
        return Fraction(sum(self.tail), len(self.tail))

    def to_json(self) -> dict:
        return {"values": list(self.values), "tail": list(self.tail)}

    @classmethod
    def from_json(cls, obj: dict) -> "ExplicitSymmetric":
        return cls(tuple(int(v) for v in obj["values"]), tuple(int(v) for v in obj.get("tail", [0])))


@dataclass
class Constructed(BinarySeqZ):
    """Run-length table: ``ones`` holds the disjoint intervals ``[a, b]`` of 1-bits in ``i >= 1``."""

    ones: list = field(default_factory=list)
    length: int = 0  # defined on -length..length; beyond that the bits are 0
    x0: int = 1
    _starts: list = field(default_factory=list, repr=False)
    _prefix: list = field(default_factory=list, repr=False)

    def add_ones(self, a: int, b: int):
        if b < a:
            return
        if self.ones and a <= self.ones[-1][1]:
            raise ValueError("runs must be appended in order")
        self.ones.append((a, b))
        self._starts.append(a)
        self._prefix.append((self._prefix[-1] if self._prefix else 0) + b - a + 1)

    def ones_upto(self, j: int) -> int:
        k = bisect.bisect_right(self._starts, j)
        if k == 0:
            return 0
        a, b = self.ones[k - 1]
        before = self._prefix[k - 2] if k >= 2 else 0
        return before + min(b, j) - a + 1

    def runs(self, upto):
        pos = 1
        for a, b in self.ones:
            if a > upto:
                break
            if a > pos:
                yield pos, a - 1, 0
            yield a, min(b, upto), 1
            pos = b + 1
        if pos <= upto:
            yield pos, upto, 0

    def bit(self, i: int) -> int:
        i = abs(i)
        if i == 0:
            return self.x0
        return self.ones_upto(i) - self.ones_upto(i - 1)

    def limit_mean(self) -> Fraction:
        return Fraction(0)


def mean_at(x: BinarySeqZ, j: int) -> Fraction:
    if j < 0:
        raise ValueError("j must be a natural number")
    return Fraction(x.x0 + 2 * x.ones_upto(j), 2 * j + 1)


def _bits_mean(bits: list[int], j: int) -> Fraction:
    return Fraction(bits[0] + 2 * sum(bits[1:j + 1]), 2 * j + 1)


# ---------------------------------------------------------------------------
# the slow sequence x0

@dataclass(frozen=True)
class Step:
    k: int
    f: int
    prev: int  # i_{k-1}
    zeros_to: int  # i'_{k-1}
    t: int
    i: int  # i_k
    peak: Fraction  # m at i'_{k-1} + f(k)


def _sandwich(total: int, i: int, k: int) -> bool:
    """``total/(2i+1) < 1/(k-1) <= total/(2i-1)``, the invariant at the end of step ``k-1``."""
    return (k - 1) * total < 2 * i + 1 and 2 * i - 1 <= (k - 1) * total


def build_x0(f: Callable[[int], int], k_max: int) -> tuple[Constructed, list[Step]]:
    """Construct x0 up to ``i_{k_max}`` for the step function ``f``.

    Starts from ``i_2 = 5`` with bits ``0,0,0,1,1`` at ``1..5`` and ``x(0) = 1``.
    Each step adds a run of zeros up to ``i'``, ``f(k)`` ones, and zeros up
    to ``i_k = f(k) + t_k``, with ``i'`` and ``t_k`` the least values meeting
    the required bounds.
    """
    x = Constructed(length=5)
    x.add_ones(4, 5)
    steps: list[Step] = []
    prev = 5
    total = 1 + 2 * x.ones_upto(prev)
    for k in range(3, k_max + 1):
        assert _sandwich(total, prev, k), f"invariant lost before step {k}"
        fk = int(f(k))
        if fk < 0:
            raise ValueError("f must be natural-valued")
        num = 2 * fk + total
        # least i' >= prev with num/(2f+2i'+1) < 1/(k-1)
        ip = max(prev, ((k - 1) * num - 2 * fk - 1) // 2 + 1)
        assert Fraction(1, k) <= Fraction(num, 2 * fk + 2 * ip + 1) < Fraction(1, k - 1), f"no i' at step {k}"
        # least t > i' with num/(2f+2t+1) < 1/k
        t = max(ip + 1, (k * num - 2 * fk - 1) // 2 + 1)
        assert Fraction(num, 2 * fk + 2 * t + 1) < Fraction(1, k)
        ik = fk + t
        x.add_ones(ip + 1, ip + fk)
        x.length = ik
        steps.append(Step(k, fk, prev, ip, t, ik, Fraction(num, 2 * (ip + fk) + 1)))
        prev, total = ik, num
    return x, steps


def resandwich(x: Constructed, steps: list[Step]) -> bool:
    """Re-derive the step invariant from the bits alone."""
    for s in steps:
        total = x.x0 + 2 * x.ones_upto(s.i)
        if not _sandwich(total, s.i, s.k + 1):
            return False
    return True


def run_extremes(x: BinarySeqZ, lo: int, hi: int) -> tuple[Fraction, Fraction]:
    """Exact ``(min, max)`` of ``m_j`` over ``lo <= j <= hi``."""
    vals = [mean_at(x, lo), mean_at(x, hi)]
    for a, b, _ in x.runs(hi):
        if b < lo:
            continue
        for j in (max(a, lo), b):
            vals.append(mean_at(x, j))
        if a - 1 >= lo:
            vals.append(mean_at(x, a - 1))
    return min(vals), max(vals)


def _monotone_span(pred: Callable[[int], bool], a: int, b: int) -> tuple[int, int] | None:
    """The sub-interval of ``[a, b]`` where a monotone predicate holds."""
    pa, pb = pred(a), pred(b)
    if pa and pb:
        return a, b
    if not pa and not pb:
        return None
    lo, hi = a, b  # pred(lo) != pred(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid) == pa:
            lo = mid
        else:
            hi = mid
    return (a, lo) if pa else (hi, b)


def violations(x: BinarySeqZ, k: int, lo: int, horizon: int) -> list[tuple[int, int]]:
    """Intervals of ``j in [lo, horizon]`` with ``|m_j - m| >= 1/k``."""
    m = x.limit_mean()
    eps = Fraction(1, k)
    out = []
    # a run [a, b] governs m_j for j in [a, b]; j = 0 has no run, so check it apart
    pieces = [(0, 0)] if lo == 0 else []
    pieces += [(a, b) for a, b, _ in x.runs(horizon)]
    for a, b in pieces:
        a, b = max(a, lo), min(b, horizon)
        if a > b:
            continue
        for pred in (lambda j: mean_at(x, j) - m >= eps, lambda j: m - mean_at(x, j) >= eps):
            span = _monotone_span(pred, a, b)
            if span:
                out.append(span)
    out.sort()
    merged: list[list[int]] = []
    for a, b in out:
        if merged and a <= merged[-1][1] + 1:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [tuple(s) for s in merged]


@dataclass
class ModulusRow:
    k: int
    f_k: int
    j_min: int | None  # least j with every j' in (j, horizon] inside 1/k of m
    first_violation: int | None  # least j > f(k) with |m_j - m| >= 1/k
    last_violation: int | None
    undetermined: bool = False  # horizon does not reach past f(k)

    def to_json(self) -> dict:
        return {"k": self.k, "f_k": self.f_k, "j_min": self.j_min, "first_violation": self.first_violation,
                "last_violation": self.last_violation, "undetermined": self.undetermined}


def modulus_table(x: BinarySeqZ, f: Callable[[int], int], k_max: int, horizon: int, k_min: int = 1) -> list[ModulusRow]:
    """Pointed modulus of convergence on ``0..horizon`` and the violations of ``f`` as a modulus.

    ``j_min`` is computed relative to the horizon: past the horizon nothing
    is claimed.  A row is ``undetermined`` when ``f(k) >= horizon``.
    """
    rows = []
    for k in range(k_min, k_max + 1):
        fk = int(f(k))
        bad = violations(x, k, 0, horizon)
        j_min = bad[-1][1] if bad else 0
        late = [(a, b) for a, b in bad if b > fk]
        first = max(late[0][0], fk + 1) if late else None
        last = late[-1][1] if late else None
        rows.append(ModulusRow(k, fk, j_min, first, last, fk >= horizon))
    return rows


def dominator(g_list: list[Callable[[int], int]], n: int) -> int:
    """``sum_{i=1..n} sum_{j=1..n} g_i(j)`` over the listed functions."""
    return sum(int(g(j)) for g in g_list[:n] for j in range(1, n + 1))


# ---------------------------------------------------------------------------
# binary expansion along the Folner order 0, -1, 1, -2, 2, ...

def folner_position(i: int) -> int:
    """Element ``g_i`` (``i >= 1``) of Z in the order of the intervals."""
    if i < 1:
        raise ValueError("positions start at 1")
    t = i // 2
    return -t if i % 2 == 0 else t


def real_embed(x: BinarySeqZ, N: int) -> Fraction:
    return sum((Fraction(x.bit(folner_position(i)), 1 << i) for i in range(1, N + 1)), Fraction(0))


def real_value(x: ExplicitSymmetric) -> Fraction:
    """Exact limit of ``real_embed`` for an eventually periodic sequence."""
    N = len(x.values) - 1
    head = 2 * N + 1  # g_1..g_{2N+1} cover -N..N
    period = 2 * len(x.tail)
    block = sum((Fraction(x.bit(folner_position(head + i)), 1 << i) for i in range(1, period + 1)), Fraction(0))
    tail = block / (1 - Fraction(1, 1 << period)) / (1 << head)
    return real_embed(x, head) + tail


class WitnessRefusal(ValueError):
    pass


@dataclass(frozen=True)
class DiscontinuityWitness:
    x_prime: ExplicitSymmetric
    n: int
    r: Fraction
    r_prime: Fraction
    m: Fraction
    m_prime: Fraction


def discontinuity_witness(x: ExplicitSymmetric, q: Fraction, q2: Fraction, eps: Fraction,
                          max_n: int = 4096) -> DiscontinuityWitness:
    """Truncate ``x`` along the Folner order and switch the tail to flip the mean.

    The tail becomes all 0 when ``m(x) > 1/2`` and all 1 when ``m(x) < 1/2``.
    ``n`` is odd so that the truncation keeps ``x'`` symmetric.
    """
    q, q2, eps = Fraction(q), Fraction(q2), Fraction(eps)
    r = real_value(x)
    m = x.limit_mean()
    if not q < r < q2:
        raise WitnessRefusal(f"r = {r} is not inside ({q}, {q2})")
    if m == Fraction(1, 2):
        raise WitnessRefusal("m(x) = 1/2: a constant tail moves the mean by exactly 1/2, not more")
    fill = 0 if m > Fraction(1, 2) else 1
    for n in range(1, max_n + 1, 2):
        partial = real_embed(x, n)
        step = Fraction(1, 1 << n)
        r2 = partial + fill * step
        if q < partial and r2 < q2 and r - partial < eps and step < eps and abs(r - r2) < eps:
            t = n // 2
            xp = ExplicitSymmetric(tuple(x.bit(i) for i in range(t + 1)), (fill,))
            assert real_value(xp) == r2
            mp = xp.limit_mean()
            assert abs(m - mp) > Fraction(1, 2)
            return DiscontinuityWitness(xp, n, r, r2, m, mp)
    raise WitnessRefusal(f"no truncation up to n = {max_n}; the tail must drop below {min(eps, q2 - r, r - q)}")


# ---------------------------------------------------------------------------
# integer functions given as expressions in k

_BIN = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.FloorDiv: operator.floordiv, ast.Mod: operator.mod, ast.Pow: operator.pow,
        ast.BitXor: operator.pow}
_FUNCS = {"max": max, "min": min, "abs": abs}


def parse_function(text: str, var: str = "k") -> Callable[[int], int]:
    """``"2^k"``, ``"k*k+1"``, ``"max(k, 3)"``... as an integer function; ``^`` is power."""
    tree = ast.parse(text.strip(), mode="eval")

    def ev(node, v):
        if isinstance(node, ast.Expression):
            return ev(node.body, v)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return node.value
        if isinstance(node, ast.Name) and node.id == var:
            return v
        if isinstance(node, ast.BinOp) and type(node.op) in _BIN:
            return _BIN[type(node.op)](ev(node.left, v), ev(node.right, v))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -ev(node.operand, v)
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
            return _FUNCS[node.func.id](*(ev(a, v) for a in node.args))
        raise ValueError(f"unsupported syntax in {text!r}")

    ev(tree, 1)  # reject bad syntax early
    return lambda v: int(ev(tree, v))
