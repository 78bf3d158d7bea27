"""Command line entry point.

Exit codes: 0 success or witness, 2 refusal or refutation, 3 budget
exhausted, 64 usage error.  JSON output is key-sorted so reruns are
byte-identical; rationals are written as ``"p/q"`` strings.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path

from . import meanlab, metric, reiter, sequences, verify, wp
from .folner import Exhausted, folner_function, search_folner
from .words import code_of, decode_word, format_word
from .zoo import DescriptorError, EqualityEnumerator, FAMILIES, equal, eval_code, from_json

OK, REFUSED, EXHAUSTED, USAGE = 0, 2, 3, 64


class UsageError(Exception):
    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(self.prog, message)


# ---------------------------------------------------------------------------
# argument helpers

def _read_json(text: str, where: str):
    """Inline JSON, ``-`` for stdin, or a file path."""
    src = text
    if text == "-":
        text = sys.stdin.read()
        src = "<stdin>"
    elif not text.lstrip().startswith(("{", "[")):
        try:
            text = Path(text).read_text()
        except OSError as exc:
            raise UsageError(f"{where} ({src})", f"cannot read file: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{where} ({src})", f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _group(text: str):
    obj = _read_json(text, "--group")
    if not isinstance(obj, dict):
        raise UsageError("--group $", "expected an object")
    if "family" not in obj:
        raise UsageError("--group $.family", "missing")
    if obj["family"] not in FAMILIES:
        raise UsageError("--group $.family", f"unknown family {obj['family']!r}; known: {', '.join(sorted(FAMILIES))}")
    try:
        return from_json(obj)
    except (DescriptorError, ValueError, TypeError) as exc:
        raise UsageError("--group $", str(exc)) from exc


def _word(text: str, where: str) -> int:
    try:
        return code_of(text)
    except ValueError as exc:
        raise UsageError(where, str(exc)) from exc


def _words(items, where: str) -> list[int]:
    out = []
    for item in items or ():
        for part in item.replace(",", " ").split():
            out.append(_word(part, where))
    return out


def _rational(text: str, where: str) -> Fraction:
    try:
        q = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(where, f"not a rational {text!r}") from exc
    if q <= 0:
        raise UsageError(where, "must be positive")
    return q


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _natural(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError("must be a natural number")
    return v


def _word_of(code: int) -> str:
    return format_word(decode_word(code))


def _decimal(q: Fraction, places: int = 12) -> str:
    with localcontext() as ctx:
        ctx.prec = places + 30
        return str((Decimal(q.numerator) / Decimal(q.denominator)).quantize(Decimal(1).scaleb(-places)))


# ---------------------------------------------------------------------------
# output

class Out:
    def __init__(self, stream, fmt: str | None):
        self.stream = stream
        self.fmt = fmt

    def json(self, obj):
        self.stream.write(json.dumps(obj, sort_keys=True, indent=2) + "\n")

    def rows(self, header: list[str], rows: list[list], obj=None, stream=None):
        """CSV when asked for (or when no JSON form exists), JSON otherwise."""
        if self.fmt == "csv" or obj is None:
            w = csv.writer(stream or self.stream, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
        else:
            self.json(obj)

    def need_json(self, cmd: str):
        if self.fmt == "csv":
            raise UsageError("--format", f"{cmd} has no CSV form")


def _budget(args, default: int) -> int:
    return args.budget if getattr(args, "budget", None) is not None else default


# ---------------------------------------------------------------------------
# folner

def cmd_folner_search(args, out: Out) -> int:
    out.need_json("folner search")
    G = _group(args.group)
    D = _words(args.D, "--D")
    try:
        w = search_folner(G, args.n, D, _budget(args, 100_000), args.max_size)
    except Exhausted as exc:
        out.json({"status": "exhausted", "reason": str(exc), "consumed": exc.consumed})
        return EXHAUSTED
    doc = w.to_json(G)
    doc["words"] = [_word_of(c) for c in w.codes]
    out.json(doc)
    return OK


def cmd_folner_function(args, out: Out) -> int:
    out.need_json("folner function")
    G = _group(args.group)
    D = _words(args.D, "--D")
    v = folner_function(G, args.n, D, args.bound)
    doc = {"n": args.n, "D": D, "bound": args.bound, "value": v.value, "ball_size": v.ball_size,
           "upper_estimate": v.upper_estimate, "witness": [G.format(el) for el in v.witness]}
    if v.value is None:
        doc["reason"] = "no subset of the ball is Folner"
        out.json(doc)
        return REFUSED
    out.json(doc)
    return OK


# ---------------------------------------------------------------------------
# reiter

def cmd_reiter_verify(args, out: Out) -> int:
    out.need_json("reiter verify")
    G = _group(args.group)
    D = _words(args.D, "--D")
    obj = _read_json(args.f, "--f")
    try:
        f = reiter.ReiterFunction.from_json(obj)
    except (KeyError, TypeError, ValueError, ZeroDivisionError, AttributeError) as exc:
        raise UsageError("--f $.support", f"bad Reiter function: {exc}") from exc
    verdict = reiter.kappa_verify(G, args.n, D, f, _budget(args, 100_000))
    doc = {"verdict": verdict.kind, "ticks": verdict.ticks}
    if isinstance(verdict, reiter.Certified):
        doc["ratios"] = {str(k): str(v) for k, v in verdict.ratios.items()}
        out.json(doc)
        return OK
    if isinstance(verdict, reiter.RefutedAtFullPartition):
        doc.update(x=verdict.x, ratio=str(verdict.ratio), reason="ratio above 1/n at the full partition")
        out.json(doc)
        return REFUSED
    out.json(doc)
    return EXHAUSTED


def cmd_reiter_compute(args, out: Out) -> int:
    out.need_json("reiter compute")
    G = _group(args.group)
    D = sorted(set(_words(args.D, "--D")))
    try:
        f = reiter.compute_reiter(G, args.n, D, _budget(args, 1_000_000))
    except Exhausted as exc:
        out.json({"status": "exhausted", "reason": str(exc), "consumed": exc.consumed})
        return EXHAUSTED
    doc = {"kind": "reiter", "group": G.to_json(), "n": args.n, "D": D}
    doc.update(f.to_json())
    out.json(doc)
    return OK


# ---------------------------------------------------------------------------
# word problem

def cmd_decide_eq(args, out: Out) -> int:
    G = _group(args.group)
    a, b = _word(args.w1, "--w1"), _word(args.w2, "--w2")
    oracle = wp.InstrumentedOracle(wp.zoo_oracle(G))
    try:
        t = wp.wp_trace(a, b, oracle, EqualityEnumerator(G), args.budget)
    except Exhausted as exc:
        out.json({"status": "exhausted", "reason": str(exc)})
        return EXHAUSTED
    verdict = "equal" if t.equal else "not-equal"
    if out.fmt == "json":
        out.json({"verdict": verdict, "w1": a, "w2": b, "folner_size": t.folner_size, "pivot": t.pivot,
                  "partners": list(t.partners), "ticks": t.ticks,
                  "oracle_requests": [[n, list(D)] for n, D in oracle.requests]})
    else:
        out.stream.write(verdict + "\n")
    return OK


def cmd_sweep_wp(args, out: Out) -> int:
    out.need_json("sweep wp")
    G = _group(args.group)
    rng = random.Random(args.seed)
    oracle = wp.InstrumentedOracle(wp.zoo_oracle(G))
    enum = EqualityEnumerator(G)
    agree = equal_count = 0
    for _ in range(args.count):
        a, b = rng.randrange(args.max_code), rng.randrange(args.max_code)
        try:
            verdict = wp.decide_equal_via_folner(a, b, oracle, enum)
        except Exhausted as exc:
            out.json({"status": "exhausted", "reason": str(exc), "pair": [a, b]})
            return EXHAUSTED
        truth = equal(G, a, b)
        agree += verdict == truth
        equal_count += truth
    shapes = sorted({(n, len(D)) for n, D in oracle.requests})
    out.json({"seed": args.seed, "count": args.count, "agree": agree, "equal_pairs": equal_count,
              "request_shapes": [list(s) for s in shapes]})
    return OK if agree == args.count else REFUSED


# ---------------------------------------------------------------------------
# sequences

def _program(args, G):
    spec = _read_json(args.prog, "--prog")
    if not isinstance(spec, dict) or "kind" not in spec:
        raise UsageError("--prog $.kind", "missing")
    if spec["kind"] not in ("interval", "box", "ball", "constant", "list"):
        raise UsageError("--prog $.kind", f"unknown program kind {spec['kind']!r}")
    return sequences.SequenceProgram(spec, G)


def cmd_sequence_check(args, out: Out) -> int:
    G = _group(args.group)
    prog = _program(args, G)
    xs = _words(args.x, "--x")
    try:
        if args.metric:
            lines = metric.verify_metric_sequence_horizon(G, prog, args.horizon, xs, args.nmax)
        else:
            lines = sequences.verify_sequence_horizon(G, prog, args.horizon, xs, args.nmax)
    except sequences.TotalityFailure as exc:
        out.json({"status": "totality-failure", "j": exc.j, "reason": str(exc)})
        return REFUSED
    passed = all(line.passed for line in lines)
    out.rows(["x", "n", "l", "stable_from", "passed", "violations"],
             [[l.x, l.n, l.l, l.stable_from, l.passed, len(l.violations)] for l in lines],
             {"horizon": args.horizon, "passed": passed, "lines": [l.to_json() for l in lines]})
    return OK if passed else REFUSED


def cmd_sequence_reduction(args, out: Out) -> int:
    out.need_json("sequence reduction")
    obj = _read_json(args.model, "--model")
    if not isinstance(obj, dict):
        raise UsageError("--model $", "expected an object")
    try:
        model = sequences.CeFamilyModel.from_json(obj)
    except (ValueError, TypeError) as exc:
        raise UsageError("--model $.W", str(exc)) from exc
    gens = [int(g) for g in args.gens.split(",")] if args.gens else None
    study = sequences.reduction_case_study(model, args.horizon, gens)
    out.json(study.to_json())
    return OK


# ---------------------------------------------------------------------------
# means

def _mean_rows(x, js) -> list[list]:
    rows = []
    for j in js:
        q = meanlab.mean_at(x, j)
        rows.append([j, q.numerator, q.denominator, _decimal(q)])
    return rows


MEAN_HEADER = ["j", "mj_num", "mj_den", "mj_decimal"]


def cmd_convmod(args, out: Out) -> int:
    try:
        f = meanlab.parse_function(args.f)
        f(3)
    except (ValueError, SyntaxError, ZeroDivisionError) as exc:
        raise UsageError("--f", str(exc)) from exc
    x, steps = meanlab.build_x0(f, args.kmax)
    horizon = args.horizon or x.length
    if args.csv:
        rows = _mean_rows(x, range(0, x.length + 1))
        if args.csv == "-":
            out.rows(MEAN_HEADER, rows)
            return OK
        with open(args.csv, "w", newline="") as fh:
            out.rows(MEAN_HEADER, rows, stream=fh)
    table = meanlab.modulus_table(x, f, args.kmax, horizon, k_min=3)
    out.need_json("convmod without --csv -")
    out.json({
        "f": args.f, "kmax": args.kmax, "horizon": horizon, "i_2": 5,
        "steps": [{"k": s.k, "f_k": s.f, "i_prev": s.prev, "i_prime": s.zeros_to, "t": s.t, "i_k": s.i,
                   "peak": str(s.peak)} for s in steps],
        "modulus": [r.to_json() for r in table],
    })
    return OK


def cmd_means_table(args, out: Out) -> int:
    obj = _read_json(args.x, "--x")
    try:
        x = meanlab.ExplicitSymmetric.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError("--x $.values", str(exc)) from exc
    rows = _mean_rows(x, range(0, args.jmax + 1))
    m = x.limit_mean()
    out.rows(MEAN_HEADER, rows, {"limit_mean": str(m), "rows": [
        {"j": r[0], "m_j": f"{r[1]}/{r[2]}", "decimal": r[3]} for r in rows]})
    return OK


# ---------------------------------------------------------------------------
# metric

def cmd_metric_matching(args, out: Out) -> int:
    out.need_json("metric matching")
    G = _group(args.group)
    F1 = [eval_code(G, c) for c in _words(args.F, "--F")]
    F1 = list(dict.fromkeys(F1))
    if args.F2:
        F2 = list(dict.fromkeys(eval_code(G, c) for c in _words(args.F2, "--F2")))
    elif args.g:
        g = eval_code(G, _word(args.g, "--g"))
        F2 = [G.mul(g, x) for x in F1]
    else:
        raise UsageError("metric matching", "one of --g or --F2 is required")
    q = _rational(args.ball, "--ball")
    M = metric.matching_number(G, F1, F2, q)
    doc = M.to_json()
    doc.update(left=[G.format(x) for x in F1], right=[G.format(y) for y in F2], ball=str(q))
    out.json(doc)
    return OK


def cmd_metric_folner(args, out: Out) -> int:
    out.need_json("metric folner")
    G = _group(args.group)
    D = sorted(set(_words(args.D, "--D")))
    try:
        w, table = metric.search_metric_folner(G, args.l, args.m, args.n, D, _budget(args, 100_000), args.max_size)
    except Exhausted as exc:
        out.json({"status": "exhausted", "reason": str(exc), "consumed": exc.consumed})
        return EXHAUSTED
    doc = w.to_json(G)
    doc.update(D=D, l=args.l, words=[_word_of(c) for c in w.codes],
               assignment={f"{i},{j}": str(q) for (i, j), q in sorted(table.items())})
    out.json(doc)
    return OK


def cmd_metric_estimate(args, out: Out) -> int:
    out.need_json("metric estimate")
    G = _group(args.group)
    a, b = _word(args.w1, "--w1"), _word(args.w2, "--w2")
    eps = _rational(args.eps, "--eps")
    try:
        est = metric.estimate_distance(G, a, b, eps, metric.zoo_metric_oracle(G), budget=args.budget)
    except Exhausted as exc:
        out.json({"status": "exhausted", "reason": str(exc)})
        return EXHAUSTED
    out.json({"q0": str(est.q0), "window": [str(est.q0), str(est.q0 + eps)], "eps": str(eps),
              "l": est.l, "m": est.m, "n": est.n, "pivot": est.pivot, "partners": list(est.partners),
              "ticks": est.ticks})
    return OK


# ---------------------------------------------------------------------------
# verification

def cmd_verify(args, out: Out) -> int:
    out.need_json("verify")
    doc = _read_json(args.witness, "witness")
    try:
        report = verify.check(doc)
    except verify.MalformedWitness as exc:
        raise UsageError("witness", str(exc)) from exc
    except (DescriptorError, ValueError, TypeError) as exc:
        raise UsageError("witness $.group", str(exc)) from exc
    out.json(report)
    return OK if report["valid"] else REFUSED


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--budget", type=_natural, default=argparse.SUPPRESS,
                        help="candidate / move / tick budget (command specific)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for randomized sweeps")
    common.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)

    p = _Parser(prog="folnerlab", description="Folner sets, Reiter functions and matchings on numbered groups.")
    p.add_argument("--budget", type=_natural, default=None, help="candidate / move / tick budget")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized sweeps")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def leaf(parent, name, fn, help_text):
        q = parent.add_parser(name, parents=[common], help=help_text)
        q.set_defaults(fn=fn)
        return q

    def group_arg(q):
        q.add_argument("--group", required=True, help="group descriptor: inline JSON or a file")

    fol = sub.add_parser("folner", help="Folner sets").add_subparsers(dest="sub", parser_class=_Parser, required=True)
    q = leaf(fol, "search", cmd_folner_search, "first injective Folner code set")
    group_arg(q)
    q.add_argument("--n", type=_positive, required=True)
    q.add_argument("--D", nargs="+", default=[], help="words such as g0 g0^-1")
    q.add_argument("--max-size", type=_positive, default=None)
    q = leaf(fol, "function", cmd_folner_function, "Folner function within a ball")
    group_arg(q)
    q.add_argument("--n", type=_positive, required=True)
    q.add_argument("--D", nargs="+", default=[])
    q.add_argument("--bound", type=_natural, required=True, help="ball radius")

    rei = sub.add_parser("reiter", help="Reiter functions").add_subparsers(dest="sub", parser_class=_Parser, required=True)
    q = leaf(rei, "verify", cmd_reiter_verify, "run the partition-merge verifier on a function")
    group_arg(q)
    q.add_argument("--n", type=_positive, required=True)
    q.add_argument("--D", nargs="+", default=[])
    q.add_argument("--f", required=True, help='{"support": {"<code>": "p/q"}}')
    q = leaf(rei, "compute", cmd_reiter_compute, "find a certified characteristic function")
    group_arg(q)
    q.add_argument("--n", type=_positive, required=True)
    q.add_argument("--D", nargs="+", default=[])

    q = leaf(sub, "decide-eq", cmd_decide_eq, "decide equality from a Folner oracle and the pair enumerator")
    group_arg(q)
    q.add_argument("--w1", required=True)
    q.add_argument("--w2", required=True)

    swp = sub.add_parser("sweep", help="randomized sweeps").add_subparsers(dest="sub", parser_class=_Parser, required=True)
    q = leaf(swp, "wp", cmd_sweep_wp, "compare the Folner-based decider with direct equality")
    group_arg(q)
    q.add_argument("--count", type=_positive, default=100)
    q.add_argument("--max-code", type=_positive, default=1000)

    seq = sub.add_parser("sequence", help="Folner sequences").add_subparsers(dest="sub", parser_class=_Parser, required=True)
    q = leaf(seq, "check", cmd_sequence_check, "finite-horizon check of a Folner sequence")
    group_arg(q)
    q.add_argument("--prog", required=True, help='e.g. {"kind": "interval", "gen": 0}')
    q.add_argument("--horizon", type=_positive, required=True)
    q.add_argument("--nmax", type=_positive, required=True)
    q.add_argument("--x", nargs="+", required=True)
    q.add_argument("--metric", action="store_true", help="use the matching condition instead of defects")
    q = leaf(seq, "reduction", cmd_sequence_reduction, "product-set reduction case study")
    q.add_argument("--model", required=True, help='{"W": {"1": "all", "2": [0, 1, 2]}}')
    q.add_argument("--horizon", type=_positive, required=True)
    q.add_argument("--gens", default=None, help="comma separated generator indices")

    q = leaf(sub, "convmod", cmd_convmod, "slow-convergence sequence and its modulus table")
    q.add_argument("--f", required=True, help='expression in k, e.g. "2^k"')
    q.add_argument("--kmax", type=_positive, required=True)
    q.add_argument("--csv", default=None, help="write m_j rows to a file, or - for stdout")
    q.add_argument("--horizon", type=_positive, default=None)

    mea = sub.add_parser("means", help="interval means").add_subparsers(dest="sub", parser_class=_Parser, required=True)
    q = leaf(mea, "table", cmd_means_table, "m_j for an eventually periodic symmetric sequence")
    q.add_argument("--x", required=True, help='{"values": [1, 0, 1], "tail": [0, 1]}')
    q.add_argument("--jmax", type=_natural, required=True)

    met = sub.add_parser("metric", help="metric groups").add_subparsers(dest="sub", parser_class=_Parser, required=True)
    q = leaf(met, "matching", cmd_metric_matching, "matching number inside a ball")
    group_arg(q)
    q.add_argument("--F", nargs="+", required=True)
    q.add_argument("--g", default=None)
    q.add_argument("--F2", nargs="+", default=None)
    q.add_argument("--ball", required=True, help="radius p/q")
    q = leaf(met, "folner", cmd_metric_folner, "first metric Folner set with a distance assignment")
    group_arg(q)
    q.add_argument("--m", type=_positive, required=True)
    q.add_argument("--n", type=_positive, required=True)
    q.add_argument("--D", nargs="+", default=[])
    q.add_argument("--l", type=_positive, default=10)
    q.add_argument("--max-size", type=_positive, default=None)
    q = leaf(met, "estimate", cmd_metric_estimate, "distance estimate from a Folner oracle")
    group_arg(q)
    q.add_argument("--w1", required=True)
    q.add_argument("--w2", required=True)
    q.add_argument("--eps", required=True, help="precision p/q")

    q = leaf(sub, "verify", cmd_verify, "independently re-check a witness")
    q.add_argument("witness", help="witness JSON file, inline JSON or -")
    return p


def main(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args, Out(stdout, args.format))
    except UsageError as exc:
        stderr.write(f"usage error: {exc}\n")
        return USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except BrokenPipeError:  # reader such as head went away
        return OK


def run(argv: list[str]) -> tuple[int, str, str]:
    """Run in-process and capture ``(exit code, stdout, stderr)``."""
    o, e = io.StringIO(), io.StringIO()
    code = main(argv, o, e)
    return code, o.getvalue(), e.getvalue()
