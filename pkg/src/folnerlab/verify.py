"""Independent re-checking of witness JSON.

Nothing here calls the search or certification code.  Defects, l1 ratios and
matchings are recomputed from the group arithmetic alone, with a max-flow
matching that differs from the augmenting-path routine used when searching.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction

from .zoo import Group, eval_code, from_json
from .words import inv


class MalformedWitness(ValueError):
    """The witness document is missing fields or has the wrong types."""


def _field(doc: dict, key: str):
    if key not in doc:
        raise MalformedWitness(f"$.{key}: missing")
    return doc[key]


def _codes(doc: dict, key: str) -> list[int]:
    vals = _field(doc, key)
    if not isinstance(vals, list) or not all(isinstance(v, int) and v >= 0 for v in vals):
        raise MalformedWitness(f"$.{key}: expected a list of natural numbers")
    return vals


def _frac(text, path: str) -> Fraction:
    try:
        return Fraction(text)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise MalformedWitness(f"{path}: not a rational {text!r}") from exc


def _left_translate(G: Group, g, S) -> set:
    return {G.mul(g, s) for s in S}


def check_folner(doc: dict) -> dict:
    G = from_json(_field(doc, "group"))
    codes = _codes(doc, "codes")
    n = int(_field(doc, "n"))
    D = _codes(doc, "D")
    if not codes:
        return {"valid": False, "reason": "empty set"}
    S = {eval_code(G, c) for c in codes}
    injective = len(S) == len(set(codes))
    problems = []
    if bool(doc.get("injective", injective)) != injective:
        problems.append("injectivity flag is wrong")
    recomputed = {}
    for x in D:
        moved = _left_translate(G, eval_code(G, x), S)
        d = Fraction(sum(1 for s in S if s not in moved), len(S))
        recomputed[str(x)] = str(d)
        if d * n > 1:
            problems.append(f"defect {d} of x={x} exceeds 1/{n}")
        claimed = doc.get("defects", {}).get(str(x))
        if claimed is not None and _frac(claimed, f"$.defects.{x}") != d:
            problems.append(f"claimed defect {claimed} for x={x}, recomputed {d}")
    return {"valid": not problems, "problems": problems, "defects": recomputed, "injective": injective}


def check_reiter(doc: dict) -> dict:
    """``||h - x.h||_1 / ||h||_1 <= 1/n`` for the pushforward ``h`` (the kappa certificate)."""
    G = from_json(_field(doc, "group"))
    n = int(_field(doc, "n"))
    D = _codes(doc, "D")
    support = _field(doc, "support")
    if not isinstance(support, dict) or not support:
        raise MalformedWitness("$.support: expected a nonempty object code -> p/q")
    h: dict = {}
    for c, v in support.items():
        val = _frac(v, f"$.support.{c}")
        if val <= 0:
            return {"valid": False, "problems": [f"nonpositive value at {c}"]}
        g = eval_code(G, int(c))
        h[g] = h.get(g, 0) + val
    norm = sum(h.values())
    problems = []
    ratios = {}
    strict = True
    for x in D:
        xi = eval_code(G, inv(x))
        # (x.h)(g) = h(x^-1 g)
        pts = set(h) | {G.mul(eval_code(G, x), g) for g in h}
        l1 = sum(abs(h.get(g, 0) - h.get(G.mul(xi, g), 0)) for g in pts)
        r = Fraction(l1) / norm
        ratios[str(x)] = str(r)
        if r * n > 1:
            problems.append(f"ratio {r} of x={x} exceeds 1/{n}")
        strict &= r * n < 1
    return {"valid": not problems, "problems": problems, "ratios": ratios, "strict": strict}


def flow_matching(left: list, right: list, edge) -> int:
    """Maximum matching size by BFS augmentation on the unit-capacity flow network."""
    mate_l = [None] * len(left)
    mate_r = [None] * len(right)
    adj = [[j for j, y in enumerate(right) if edge(x, y)] for x in left]
    size = 0
    for s in range(len(left)):
        parent = {}
        q = deque([s])
        seen = {s}
        end = None
        while q and end is None:
            u = q.popleft()
            for v in adj[u]:
                if v in parent:
                    continue
                parent[v] = u
                if mate_r[v] is None:
                    end = v
                    break
                if mate_r[v] not in seen:
                    seen.add(mate_r[v])
                    q.append(mate_r[v])
        if end is None:
            continue
        v = end
        while v is not None:
            u = parent[v]
            nxt = mate_l[u]
            mate_l[u], mate_r[v] = v, u
            v = nxt
        size += 1
    return size


def check_metric_folner(doc: dict) -> dict:
    G = from_json(_field(doc, "group"))
    codes = _codes(doc, "codes")
    D = _codes(doc, "D") if "D" in doc else [int(k) for k in _field(doc, "mu")]
    m, n = int(_field(doc, "m")), int(_field(doc, "n"))
    S = list(dict.fromkeys(eval_code(G, c) for c in codes))
    problems = []
    if len(S) != len(set(codes)):
        problems.append("codes are not injective")
    radius = Fraction(1, m)
    mus = {}
    for e in D:
        g = eval_code(G, e)
        eS = [G.mul(g, s) for s in S]
        mu = flow_matching(S, eS, lambda x, y: Fraction(G.distance(y, x)) < radius)
        mus[str(e)] = mu
        if mu * n < (n - 1) * len(S):
            problems.append(f"mu={mu} for e={e} below {n - 1}/{n} of {len(S)}")
        claimed = doc.get("mu", {}).get(str(e))
        if claimed is not None and int(claimed) != mu:
            problems.append(f"claimed mu {claimed} for e={e}, recomputed {mu}")
    if "assignment" in doc:
        l = int(_field(doc, "l"))
        for key, q in doc["assignment"].items():
            i, j = (int(t) for t in key.split(","))
            q = _frac(q, f"$.assignment.{key}")
            d = Fraction(G.distance(eval_code(G, i), eval_code(G, j)))
            if not q <= d < q + Fraction(1, l):
                problems.append(f"assignment {key} -> {q} misses d = {d}")
    return {"valid": not problems, "problems": problems, "mu": mus}


CHECKS = {"folner": check_folner, "reiter": check_reiter, "metric-folner": check_metric_folner}


def check(doc) -> dict:
    if not isinstance(doc, dict):
        raise MalformedWitness("$: expected a JSON object")
    kind = _field(doc, "kind")
    if kind not in CHECKS:
        raise MalformedWitness(f"$.kind: unknown witness kind {kind!r}")
    out = CHECKS[kind](doc)
    out["kind"] = kind
    return out


__all__ = ["MalformedWitness", "check", "check_folner", "check_metric_folner", "check_reiter", "flow_matching"]
