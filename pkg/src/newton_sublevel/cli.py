"""Expression front end, command dispatcher, and report serialization.

Phase expressions follow a small grammar, parsed by recursive descent:

    expr     := ('+' | '-')? term (('+' | '-') term)*
    term     := factor ('*'? factor)*
    factor   := base ('^' exponent)?
    base     := 'x' | 'y' | rational | '(' expr ')'
    exponent := '-'? rational | '(' '-'? rational ')'
    rational := INT ('/' INT)?

Coefficient arithmetic is exact; x may carry nonnegative rational powers,
y only nonnegative integer ones.  Subcommands write JSON/CSV reports under
--out; exit code 0 on success, 2 on a verification failure (a
``<command>.FAILED`` marker is left next to any partial outputs), 1 on
usage or parse errors.  Reports carry no timestamps and serialize with
sorted keys so equal runs produce equal bytes; rationals appear as
"num/den" strings.  NEWTON_SUBLEVEL_THREADS caps sampling parallelism.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .adapt import to_superadapted
from .exact_poly import (
    PuiseuxPoly,
    format_poly,
    poly_add,
    poly_mul,
    poly_scale,
)
from .measure_lab import (
    Cutoff,
    Disk,
    decay_csv,
    decay_pairs,
    fit_decay,
    fit_growth,
    measure_csv,
    sublevel_measure,
    vdc_check,
)
from .newton import bisectrix_classify, newton_distance, newton_polygon_of
from .resolve import ResolveParams, decomposition_to_json, resolve, verify_chart
from .roots import isolate_real_roots, refine_root
from .stability import mixture_csv, mixture_sweep, stability_sweep, sweep_csv

REPORT_SCHEMA = "newton-sublevel/report/1"
_VERSION = "0.1.0"

__all__ = [
    "ParseError",
    "PhaseExpr",
    "ReportEnvelope",
    "parse_expression",
    "print_expression",
    "run",
    "main",
]


# ---------------------------------------------------------------------------
# tokens


class ParseError(ValueError):
    """Syntax or semantic error in a phase expression, with position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class _Token:
    kind: str  # INT | NAME | OP | END
    text: str
    line: int
    col: int


_OPS = set("+-*/^()")


def _tokenize(text: str) -> List[_Token]:
    toks: List[_Token] = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            toks.append(_Token("INT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch in ("x", "y"):
            toks.append(_Token("NAME", ch, line, col))
            col += 1
            i += 1
            continue
        if ch in _OPS:
            toks.append(_Token("OP", ch, line, col))
            col += 1
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(_Token("END", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Lit:
    value: Fraction


@dataclass(frozen=True)
class Var:
    name: str  # "x" | "y"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exp: Fraction


@dataclass(frozen=True)
class Prod:
    factors: Tuple["Node", ...]


@dataclass(frozen=True)
class Sum:
    signs: Tuple[int, ...]
    terms: Tuple["Node", ...]


Node = Union[Lit, Var, Pow, Prod, Sum]


class _Parser:
    def __init__(self, toks: List[_Token]):
        self.toks = toks
        self.i = 0

    def peek(self) -> _Token:
        return self.toks[self.i]

    def advance(self) -> _Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect_op(self, ch: str) -> _Token:
        t = self.peek()
        if t.kind == "OP" and t.text == ch:
            return self.advance()
        raise ParseError(f"expected {ch!r}, found {t.text or 'end of input'!r}",
                         t.line, t.col)

    # expr := ('+'|'-')? term (('+'|'-') term)*
    def expr(self) -> Node:
        signs: List[int] = []
        terms: List[Node] = []
        t = self.peek()
        if t.kind == "OP" and t.text in "+-":
            self.advance()
            signs.append(1 if t.text == "+" else -1)
        else:
            signs.append(1)
        terms.append(self.term())
        while True:
            t = self.peek()
            if t.kind == "OP" and t.text in "+-":
                self.advance()
                signs.append(1 if t.text == "+" else -1)
                terms.append(self.term())
            else:
                break
        if len(terms) == 1 and signs[0] == 1:
            return terms[0]
        return Sum(tuple(signs), tuple(terms))

    # term := factor ('*'? factor)*  -- adjacency multiplies
    def term(self) -> Node:
        factors = [self.factor()]
        while True:
            t = self.peek()
            if t.kind == "OP" and t.text == "*":
                self.advance()
                factors.append(self.factor())
            elif t.kind in ("NAME", "INT") or (t.kind == "OP" and t.text == "("):
                factors.append(self.factor())
            else:
                break
        if len(factors) == 1:
            return factors[0]
        return Prod(tuple(factors))

    # factor := base ('^' exponent)?
    def factor(self) -> Node:
        b = self.base()
        t = self.peek()
        if t.kind == "OP" and t.text == "^":
            self.advance()
            e = self.exponent()
            return Pow(b, e)
        return b

    def base(self) -> Node:
        t = self.peek()
        if t.kind == "NAME":
            self.advance()
            return Var(t.text)
        if t.kind == "INT":
            return Lit(self.rational())
        if t.kind == "OP" and t.text == "(":
            self.advance()
            inner = self.expr()
            self.expect_op(")")
            return inner
        raise ParseError(
            f"expected 'x', 'y', a rational, or '(', found {t.text or 'end of input'!r}",
            t.line, t.col)

    def rational(self) -> Fraction:
        t = self.peek()
        if t.kind != "INT":
            raise ParseError(f"expected an integer, found {t.text or 'end of input'!r}",
                             t.line, t.col)
        self.advance()
        num = int(t.text)
        nxt = self.peek()
        if nxt.kind == "OP" and nxt.text == "/":
            self.advance()
            d = self.peek()
            if d.kind != "INT":
                raise ParseError(
                    f"expected a denominator, found {d.text or 'end of input'!r}",
                    d.line, d.col)
            self.advance()
            if int(d.text) == 0:
                raise ParseError("zero denominator", d.line, d.col)
            return Fraction(num, int(d.text))
        return Fraction(num)

    # exponent := '-'? rational | '(' '-'? rational ')'
    def exponent(self) -> Fraction:
        t = self.peek()
        parens = t.kind == "OP" and t.text == "("
        if parens:
            self.advance()
            t = self.peek()
        sign = 1
        if t.kind == "OP" and t.text == "-":
            self.advance()
            sign = -1
        q = sign * self.rational()
        if parens:
            self.expect_op(")")
        return q


def _needs_parens_in_prod(n: Node) -> bool:
    return isinstance(n, Sum)


def _needs_parens_in_pow(n: Node) -> bool:
    return isinstance(n, (Sum, Prod)) or (isinstance(n, Lit) and n.value.denominator != 1)


def print_expression(node: Node) -> str:
    """Canonical text form; reparsing it reproduces the same AST."""
    if isinstance(node, Lit):
        return str(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Pow):
        b = print_expression(node.base)
        if _needs_parens_in_pow(node.base):
            b = f"({b})"
        e = node.exp
        etxt = str(e) if e.denominator == 1 and e >= 0 else f"({e})"
        return f"{b}^{etxt}"
    if isinstance(node, Prod):
        parts = []
        for f in node.factors:
            s = print_expression(f)
            parts.append(f"({s})" if _needs_parens_in_prod(f) else s)
        return "*".join(parts)
    if isinstance(node, Sum):
        parts = []
        for k, (sg, t) in enumerate(zip(node.signs, node.terms)):
            s = print_expression(t)
            if isinstance(t, Sum):
                s = f"({s})"
            if k == 0:
                parts.append(s if sg == 1 else f"-{s}")
            else:
                parts.append(f" + {s}" if sg == 1 else f" - {s}")
        return "".join(parts)
    raise TypeError(f"not an expression node: {node!r}")


def _expand(node: Node) -> PuiseuxPoly:
    if isinstance(node, Lit):
        return PuiseuxPoly.constant(node.value)
    if isinstance(node, Var):
        if node.name == "x":
            return PuiseuxPoly.monomial(1, Fraction(1), 0)
        return PuiseuxPoly.monomial(1, Fraction(0), 1)
    if isinstance(node, Pow):
        e = node.exp
        if isinstance(node.base, Var):
            if node.base.name == "x":
                if e < 0:
                    raise ParseError("negative x-power", 1, 1)
                return PuiseuxPoly.monomial(1, e, 0)
            if e < 0 or e.denominator != 1:
                raise ParseError("negative or fractional y-power", 1, 1)
            return PuiseuxPoly.monomial(1, Fraction(0), int(e))
        if isinstance(node.base, Lit):
            if e.denominator != 1:
                raise ParseError("fractional power of a rational literal", 1, 1)
            if node.base.value == 0 and e < 0:
                raise ParseError("zero raised to a negative power", 1, 1)
            return PuiseuxPoly.constant(node.base.value ** int(e))
        if e < 0 or e.denominator != 1:
            raise ParseError(
                "compound bases take nonnegative integer powers only", 1, 1)
        out = PuiseuxPoly.constant(1)
        b = _expand(node.base)
        for _ in range(int(e)):
            out = poly_mul(out, b)
        return out
    if isinstance(node, Prod):
        out = PuiseuxPoly.constant(1)
        for f in node.factors:
            out = poly_mul(out, _expand(f))
        return out
    if isinstance(node, Sum):
        out = PuiseuxPoly.zero()
        for sg, t in zip(node.signs, node.terms):
            out = poly_add(out, poly_scale(_expand(t), sg))
        return out
    raise TypeError(f"not an expression node: {node!r}")


@dataclass(frozen=True)
class PhaseExpr:
    source: str
    ast: Node
    poly: PuiseuxPoly


def parse_expression(text: str) -> PhaseExpr:
    """Parse a phase expression to an AST and its exact polynomial expansion."""
    toks = _tokenize(text)
    if toks[0].kind == "END":
        raise ParseError("empty expression", toks[0].line, toks[0].col)
    p = _Parser(toks)
    ast = p.expr()
    t = p.peek()
    if t.kind != "END":
        raise ParseError(f"trailing input starting at {t.text!r}", t.line, t.col)
    return PhaseExpr(source=text, ast=ast, poly=_expand(ast))


# ---------------------------------------------------------------------------
# report plumbing


@dataclass(frozen=True)
class ReportEnvelope:
    command: str
    inputs: Dict[str, object]
    config: Dict[str, object]
    results: Dict[str, object]

    def as_dict(self) -> Dict[str, object]:
        return {
            "schema": REPORT_SCHEMA,
            "command": self.command,
            "input": self.inputs,
            "config": self.config,
            "results": self.results,
            "versions": {"newton-sublevel": _VERSION},
        }


def _fstr(q: Fraction) -> str:
    # "num/den" for proper fractions, bare "num" for integers — never floats
    return str(Fraction(q))


def _write_json(out: Path, name: str, obj: Dict[str, object]) -> Path:
    path = out / name
    path.write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    return path


def _write_text(out: Path, name: str, text: str) -> Path:
    path = out / name
    path.write_text(text, encoding="utf-8")
    return path


def _fail_marker(out: Path, command: str, message: str) -> None:
    (out / f"{command}.FAILED").write_text(message + "\n", encoding="utf-8")


def _polygon_json(np_) -> Dict[str, object]:
    return {
        "vertices": [[_fstr(a), _fstr(b)] for (a, b) in np_.vertices],
        "edges": [
            {"lo": [_fstr(e.lo[0]), _fstr(e.lo[1])],
             "hi": [_fstr(e.hi[0]), _fstr(e.hi[1])],
             "m": _fstr(e.m), "alpha": _fstr(e.alpha)}
            for e in np_.edges
        ],
        "a_min": _fstr(np_.a_min),
        "b_min": _fstr(np_.b_min),
    }


def _index_json(idx) -> Dict[str, object]:
    return {"j": _fstr(idx.j), "p": idx.p, "morse_hyperbolic": idx.morse_hyperbolic}


# ---------------------------------------------------------------------------
# flags


class _UsageError(Exception):
    pass


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit(2); usage errors are 1 here
        raise _UsageError(message)


_CONFIG_KEYS = {
    "out": "out", "seed": "seed", "samples": "samples", "eps": "eps",
    "lambda": "lam", "mode": "mode", "xi": "xi", "delta": "delta",
    "eta": "eta", "radius": "radius", "t-grid": "t_grid",
}


def _load_config(path: str) -> Dict[str, str]:
    vals: Dict[str, str] = {}
    for ln, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise _UsageError(f"{path}:{ln}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise _UsageError(f"{path}:{ln}: unknown config key {key!r}")
        vals[_CONFIG_KEYS[key]] = val
    return vals


def _resolve_opt(args, config: Dict[str, str], dest: str, default, conv):
    v = getattr(args, dest, None)
    if v is None and dest in config:
        v = config[dest]
    if v is None:
        return default
    if isinstance(v, str) and conv is not str:
        try:
            return conv(v)
        except _UsageError:
            raise
        except (ValueError, ZeroDivisionError) as exc:
            raise _UsageError(f"bad value for {dest}: {v!r} ({exc})")
    return v


def _parse_range(spec: str, what: str) -> List[float]:
    """LO..HI[:COUNT] -> geometric grid, order as written."""
    body, _, cnt = spec.partition(":")
    lo, sep, hi = body.partition("..")
    if not sep:
        raise _UsageError(f"--{what} expects LO..HI[:COUNT], got {spec!r}")
    try:
        lof, hif = float(lo), float(hi)
        n = int(cnt) if cnt else 8
    except ValueError:
        raise _UsageError(f"--{what} expects LO..HI[:COUNT], got {spec!r}")
    if lof <= 0 or hif <= 0 or n < 1:
        raise _UsageError(f"--{what}: bounds must be positive and COUNT >= 1")
    if n == 1:
        return [lof]
    return [float(v) for v in np.geomspace(lof, hif, n)]


def _parse_tgrid(spec: str, allow_inf: bool) -> List[Optional[Fraction]]:
    out: List[Optional[Fraction]] = []
    for part in spec.split(","):
        s = part.strip()
        if not s:
            continue
        if s.lower() in ("inf", "infinity"):
            if not allow_inf:
                raise _UsageError("'inf' is only meaningful with --mixture")
            out.append(None)
            continue
        try:
            out.append(Fraction(s))
        except (ValueError, ZeroDivisionError):
            raise _UsageError(f"--t-grid: not a rational: {s!r}")
    if not out:
        raise _UsageError("--t-grid: empty grid")
    return out


def _frac_opt(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise _UsageError(f"not a rational: {s!r}")


def _threads_from_env() -> int:
    raw = os.environ.get("NEWTON_SUBLEVEL_THREADS", "")
    if not raw.strip():
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise _UsageError(f"NEWTON_SUBLEVEL_THREADS must be an integer, got {raw!r}")


def _build_parser() -> _ArgParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output directory (default: .)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--samples", type=int, default=None)
    common.add_argument("--eps", default=None, metavar="LO..HI[:COUNT]")
    common.add_argument("--lambda", dest="lam", default=None, metavar="LO..HI[:COUNT]")
    common.add_argument("--mode", choices=("exact", "numeric"), default=None)
    common.add_argument("--xi", default=None, metavar="RAT")
    common.add_argument("--delta", default=None, metavar="RAT")
    common.add_argument("--eta", default=None, metavar="RAT")
    common.add_argument("--radius", default=None, metavar="RAT")
    common.add_argument("--t-grid", dest="t_grid", default=None, metavar="LIST")
    common.add_argument("--config", default=None, metavar="FILE",
                        help="key = value defaults; explicit flags win")

    ap = _ArgParser(prog="newton-sublevel",
                    description="Newton-polygon invariants, resolution charts, and "
                                "sublevel/oscillatory asymptotics for bivariate phases.")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common]).add_argument("expr")
    sub.add_parser("adapt", parents=[common]).add_argument("expr")
    sub.add_parser("resolve", parents=[common]).add_argument("expr")
    sub.add_parser("measure", parents=[common]).add_argument("expr")
    sub.add_parser("oscillate", parents=[common]).add_argument("expr")
    sw = sub.add_parser("sweep", parents=[common])
    sw.add_argument("expr")
    sw.add_argument("perturbation")
    sw.add_argument("--mixture", action="store_true",
                    help="treat the second phase as a mixture endpoint instead of "
                         "a perturbation; --t-grid entries are ratios, 'inf' allowed")
    sub.add_parser("check-vdc", parents=[common])
    return ap


# ---------------------------------------------------------------------------
# subcommands


def _cmd_analyze(expr: PhaseExpr, out: Path, cfg: Dict[str, object]) -> int:
    np_ = newton_polygon_of(expr.poly)
    d = newton_distance(np_)
    cls = bisectrix_classify(np_)
    rep = to_superadapted(expr.poly)
    results = {
        "expression": print_expression(expr.ast),
        "polynomial": format_poly(expr.poly),
        "polygon": _polygon_json(np_),
        "newton_distance": _fstr(d),
        "bisectrix": {"tag": cls.tag,
                      "touch_point": [_fstr(cls.touch_point[0]), _fstr(cls.touch_point[1])]},
        "superadapted": bool(rep.iterations == 0),
        "shears_to_superadapted": rep.iterations,
        "index": _index_json(rep.index),
    }
    env = ReportEnvelope("analyze", {"expr": expr.source}, cfg, results)
    path = _write_json(out, "analyze.json", env.as_dict())
    print(f"wrote {path}")
    print(f"d = {d}, index (j, p) = ({rep.index.j}, {rep.index.p})")
    return 0


def _cmd_adapt(expr: PhaseExpr, out: Path, cfg: Dict[str, object]) -> int:
    rep = to_superadapted(expr.poly)
    results = {
        "original": format_poly(rep.original),
        "final": format_poly(rep.final),
        "iterations": rep.iterations,
        "shears": [
            {"m": _fstr(s.m), "root": _fstr(s.root), "x_sign": s.x_sign,
             "curve": format_poly(s.curve)}
            for s in rep.shears_applied
        ],
        "final_polygon": _polygon_json(newton_polygon_of(rep.final)),
        "index": _index_json(rep.index),
    }
    env = ReportEnvelope("adapt", {"expr": expr.source}, cfg, results)
    path = _write_json(out, "adapt.json", env.as_dict())
    print(f"wrote {path}")
    print(f"{results['original']}  ->  {results['final']}  "
          f"({rep.iterations} shear(s))")
    return 0


def _cmd_resolve(expr: PhaseExpr, out: Path, cfg: Dict[str, object],
                 opts: Dict[str, object]) -> int:
    params = ResolveParams()
    overrides = {}
    if opts["xi"] is not None:
        overrides["xi"] = opts["xi"]
    if opts["delta"] is not None:
        overrides["delta"] = opts["delta"]
    if opts["eta"] is not None:
        overrides["eta"] = opts["eta"]
    if opts["radius"] is not None:
        overrides["x_max"] = opts["radius"]
    if opts["mode"] is not None:
        overrides["mode"] = opts["mode"]
    if overrides:
        params = dataclasses.replace(params, **overrides)
    dec = resolve(expr.poly, params)
    _write_json(out, "resolution.json", decomposition_to_json(dec))

    seed = int(opts["seed"])
    samples = int(opts["samples"]) if opts["samples"] is not None else 1000
    rows = []
    all_ok = True
    for i, chart in enumerate(dec.charts):
        rep = verify_chart(expr.poly, chart, samples=samples, seed=seed)
        all_ok = all_ok and rep.passed
        rows.append({
            "chart": i,
            "label": chart.label,
            "mode": chart.mode,
            "passed": rep.passed,
            "max_ratio_violation": rep.max_ratio_violation,
            "sign_ok": rep.sign_ok,
            "x_max": rep.x_max,
        })
    results = {
        "charts": len(dec.charts),
        "radius": _fstr(dec.radius),
        "verify": rows,
        "all_passed": all_ok,
    }
    env = ReportEnvelope("resolve", {"expr": expr.source}, cfg, results)
    path = _write_json(out, "verify.json", env.as_dict())
    print(f"wrote {out / 'resolution.json'}")
    print(f"wrote {path}")
    print(f"{len(dec.charts)} charts, radius {dec.radius}, "
          f"verification {'passed' if all_ok else 'FAILED'}")
    if not all_ok:
        _fail_marker(out, "resolve", "chart verification failed; see verify.json")
        return 2
    return 0


def _cmd_measure(expr: PhaseExpr, out: Path, cfg: Dict[str, object],
                 opts: Dict[str, object]) -> int:
    eps = opts["eps"] if opts["eps"] is not None else _parse_range("1e-2..1e-6:8", "eps")
    budget = int(opts["samples"]) if opts["samples"] is not None else 10**6
    seed = int(opts["seed"])
    method = "GRID" if opts["mode"] == "exact" else "MC"
    if method == "GRID":
        # grid evaluator takes a dyadic depth; match the cell count to the budget
        budget = max(1, min(14, round(math.log2(max(2, budget)) / 2)))
    region = Disk(float(opts["radius"])) if opts["radius"] is not None else Disk(1.0)
    threads = _threads_from_env()
    samples = [
        sublevel_measure(expr.poly, region, e, budget=budget, seed=seed,
                         method=method, threads=threads)
        for e in eps
    ]
    _write_text(out, "measure.csv", measure_csv(samples))
    try:
        fit = fit_growth(samples)
        fit_json: Dict[str, object] = {
            "j_hat": fit.j_hat, "p_hat": fit.p_hat, "C_hat": fit.C_hat,
            "residual_rms": fit.residual_rms, "p_rounded": fit.p_rounded,
        }
    except ValueError as exc:
        fit_json = {"error": str(exc)}
    results = {
        "region": {"type": "disk", "radius": float(region.radius)},
        "method": method,
        "samples": [
            {"epsilon": s.epsilon, "estimate": s.estimate, "stderr": s.stderr,
             "n": s.n_samples, "method": s.method}
            for s in samples
        ],
        "fit": fit_json,
    }
    env = ReportEnvelope("measure", {"expr": expr.source}, cfg, results)
    path = _write_json(out, "measure.json", env.as_dict())
    print(f"wrote {out / 'measure.csv'}")
    print(f"wrote {path}")
    if "j_hat" in fit_json:
        print(f"fit: j = {fit_json['j_hat']:.4f}, p = {fit_json['p_hat']:.3f} "
              f"(rounded {fit_json['p_rounded']})")
    else:
        print(f"fit unavailable: {fit_json['error']}")
    return 0


def _cmd_oscillate(expr: PhaseExpr, out: Path, cfg: Dict[str, object],
                   opts: Dict[str, object]) -> int:
    lams = opts["lam"] if opts["lam"] is not None else _parse_range("50..800:8", "lambda")
    radius = float(opts["radius"]) if opts["radius"] is not None else 1.0
    cutoff = Cutoff(radius=radius, order=3)
    pairs = decay_pairs(expr.poly, cutoff, lams)
    _write_text(out, "oscillate.csv", decay_csv(pairs))
    mags = [(lam, abs(val)) for lam, val in pairs]
    try:
        fit = fit_decay(mags)
        fit_json: Dict[str, object] = {
            "j_hat": fit.j_hat, "p_hat": fit.p_hat, "C_hat": fit.C_hat,
            "residual_rms": fit.residual_rms, "p_rounded": fit.p_rounded,
        }
    except ValueError as exc:
        fit_json = {"error": str(exc)}
    results = {
        "cutoff": {"radius": radius, "order": cutoff.order},
        "pairs": [
            {"lambda": lam, "re": val.real, "im": val.imag, "abs": abs(val)}
            for lam, val in pairs
        ],
        "fit": fit_json,
    }
    env = ReportEnvelope("oscillate", {"expr": expr.source}, cfg, results)
    path = _write_json(out, "oscillate.json", env.as_dict())
    print(f"wrote {out / 'oscillate.csv'}")
    print(f"wrote {path}")
    if "j_hat" in fit_json:
        print(f"fit: decay exponent j = {fit_json['j_hat']:.4f}, "
              f"p = {fit_json['p_hat']:.3f}")
    else:
        print(f"fit unavailable: {fit_json['error']}")
    return 0


def _sweep_row_json(r) -> Dict[str, object]:
    return {
        "t": None if r.t is None else _fstr(r.t),
        "j": None if r.index is None else _fstr(r.index.j),
        "p": None if r.index is None else r.index.p,
        "superadapt_ok": r.superadapt_ok,
        "polygon_contains_NS": r.polygon_contains_NS,
        "flags": sorted(r.flags),
        "note": r.note,
    }


def _mixture_row_json(r) -> Dict[str, object]:
    return {
        "ratio": "inf" if r.ratio is None else _fstr(r.ratio),
        "j": None if r.index is None else _fstr(r.index.j),
        "p": None if r.index is None else r.index.p,
        "osc_p": r.osc_p,
        "superadapt_ok": r.superadapt_ok,
        "flags": sorted(r.flags),
        "note": r.note,
    }


def _cmd_sweep(expr: PhaseExpr, pert: PhaseExpr, mixture: bool, out: Path,
               cfg: Dict[str, object], opts: Dict[str, object]) -> int:
    if mixture:
        grid = (opts["t_grid"] if opts["t_grid"] is not None
                else _parse_tgrid("0,1/2,1,2,inf", allow_inf=True))
        rows, verdict = mixture_sweep(expr.poly, pert.poly, grid)
        _write_text(out, "sweep.csv", mixture_csv(rows))
        results = {"kind": "mixture",
                   "rows": [_mixture_row_json(r) for r in rows],
                   "verdict": verdict}
    else:
        grid = (opts["t_grid"] if opts["t_grid"] is not None
                else _parse_tgrid("-1,-1/2,1/2,1", allow_inf=False))
        rows, verdict = stability_sweep(expr.poly, pert.poly, grid)
        _write_text(out, "sweep.csv", sweep_csv(rows))
        results = {"kind": "stability",
                   "rows": [_sweep_row_json(r) for r in rows],
                   "verdict": verdict}
    env = ReportEnvelope("sweep", {"expr": expr.source, "perturbation": pert.source},
                         cfg, results)
    path = _write_json(out, "sweep.json", env.as_dict())
    print(f"wrote {out / 'sweep.csv'}")
    print(f"wrote {path}")
    ok = bool(verdict["ok"])
    print(f"verdict: {'ok' if ok else 'VIOLATIONS'}")
    if not ok:
        _fail_marker(out, "sweep", "index bound violated on a non-flagged row; "
                                   "see sweep.json")
        return 2
    return 0


def _random_vdc_instance(rng: np.random.Generator, k: int):
    """Integer polynomial of degree in [k, k+3] whose k-th derivative is
    root-free on [0, 1], with a certified safe lower constant."""
    deg = int(rng.integers(k, k + 4))
    while True:
        coeffs = [Fraction(int(c)) for c in rng.integers(-9, 10, size=deg + 1)]
        if coeffs[-1] == 0:
            coeffs[-1] = Fraction(int(rng.integers(1, 10)))
        dk = list(coeffs)
        for _ in range(k):
            dk = [i * dk[i] for i in range(1, len(dk))]
        if not dk or all(c == 0 for c in dk):
            continue
        lo_v = _horner_frac(dk, Fraction(0))
        hi_v = _horner_frac(dk, Fraction(1))
        if lo_v == 0 or hi_v == 0 or (lo_v > 0) != (hi_v > 0):
            continue
        if any(r.lo < 1 and r.hi > 0 for r in isolate_real_roots(dk)):
            continue
        # min of |f^(k)| sits at an endpoint or a critical point of f^(k)
        cand = [abs(lo_v), abs(hi_v)]
        dk1 = [i * dk[i] for i in range(1, len(dk))]
        if any(c != 0 for c in dk1):
            for r in isolate_real_roots(dk1):
                if r.hi <= 0 or r.lo >= 1:
                    continue
                rr = refine_root(r, Fraction(1, 2**40))
                cand.append(abs(_horner_frac(dk, rr.midpoint())))
        fk_min = min(cand)
        if fk_min <= 0:
            continue
        c = fk_min / math.factorial(k) * Fraction(1023, 1024)
        return coeffs, c


def _horner_frac(cs: Sequence[Fraction], t: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(cs):
        acc = acc * t + c
    return acc


def _cmd_check_vdc(out: Path, cfg: Dict[str, object], opts: Dict[str, object]) -> int:
    per_k = int(opts["samples"]) if opts["samples"] is not None else 200
    seed = int(opts["seed"])
    interval = (Fraction(0), Fraction(1))
    per_k_rows = []
    violations = 0
    worst = 0.0
    for k in (1, 2, 3):
        rng = np.random.default_rng([seed, k])
        max_ratio = 0.0
        kv = 0
        for _ in range(per_k):
            coeffs, c = _random_vdc_instance(rng, k)
            eps = Fraction(10) ** -int(rng.integers(2, 7))
            chk = vdc_check(coeffs, interval, k, c, eps)
            ratio = chk["measured"] / chk["bound"] if chk["bound"] else 0.0
            max_ratio = max(max_ratio, float(ratio))
            if not chk["ok"]:
                kv += 1
        violations += kv
        worst = max(worst, max_ratio)
        per_k_rows.append({"k": k, "count": per_k, "violations": kv,
                           "max_measured_over_bound": max_ratio})
    results = {"per_k": per_k_rows, "violations": violations,
               "max_measured_over_bound": worst}
    env = ReportEnvelope("check-vdc", {}, cfg, results)
    path = _write_json(out, "vdc.json", env.as_dict())
    print(f"wrote {path}")
    print(f"{3 * per_k} instances, {violations} violations, "
          f"max measured/bound = {worst:.4f}")
    if violations:
        _fail_marker(out, "check-vdc", f"{violations} sublevel bound violations")
        return 2
    return 0


# ---------------------------------------------------------------------------
# dispatcher


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse flags, dispatch one subcommand, return the process exit code."""
    if argv is None:
        argv = sys.argv[1:]
    argv = list(argv)
    # join "--t-grid -1/2,..." so argparse does not read the value as a flag
    for i in range(len(argv) - 1):
        if argv[i] == "--t-grid" and argv[i + 1].startswith("-"):
            argv[i:i + 2] = [f"--t-grid={argv[i + 1]}"]
            break
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    try:
        config = _load_config(args.config) if args.config else {}
        opts = {
            "out": _resolve_opt(args, config, "out", ".", str),
            "seed": _resolve_opt(args, config, "seed", 0, int),
            "samples": _resolve_opt(args, config, "samples", None, int),
            "eps": _resolve_opt(args, config, "eps", None,
                                lambda s: _parse_range(s, "eps")),
            "lam": _resolve_opt(args, config, "lam", None,
                                lambda s: _parse_range(s, "lambda")),
            "mode": _resolve_opt(args, config, "mode", None, str),
            "xi": _resolve_opt(args, config, "xi", None, _frac_opt),
            "delta": _resolve_opt(args, config, "delta", None, _frac_opt),
            "eta": _resolve_opt(args, config, "eta", None, _frac_opt),
            "radius": _resolve_opt(args, config, "radius", None, _frac_opt),
            "t_grid": _resolve_opt(
                args, config, "t_grid", None,
                lambda s: _parse_tgrid(s, allow_inf=getattr(args, "mixture", False))),
        }
        if opts["mode"] not in (None, "exact", "numeric"):
            raise _UsageError(f"--mode must be exact or numeric, got {opts['mode']!r}")
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1

    out = Path(opts["out"])
    command = args.command
    # thread count deliberately not echoed: reports must be byte-identical
    # across 1-thread and N-thread runs
    cfg_echo = {
        "seed": opts["seed"],
        "samples": opts["samples"],
    }

    try:
        exprs = []
        for attr in ("expr", "perturbation"):
            if hasattr(args, attr):
                exprs.append(parse_expression(getattr(args, attr)))
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    out.mkdir(parents=True, exist_ok=True)
    try:
        if command == "analyze":
            return _cmd_analyze(exprs[0], out, cfg_echo)
        if command == "adapt":
            return _cmd_adapt(exprs[0], out, cfg_echo)
        if command == "resolve":
            return _cmd_resolve(exprs[0], out, cfg_echo, opts)
        if command == "measure":
            return _cmd_measure(exprs[0], out, cfg_echo, opts)
        if command == "oscillate":
            return _cmd_oscillate(exprs[0], out, cfg_echo, opts)
        if command == "sweep":
            return _cmd_sweep(exprs[0], exprs[1], bool(getattr(args, "mixture", False)),
                              out, cfg_echo, opts)
        if command == "check-vdc":
            return _cmd_check_vdc(out, cfg_echo, opts)
        raise _UsageError(f"unknown command {command!r}")  # pragma: no cover
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        _fail_marker(out, command, str(exc))
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
