"""Resolution of a phase into monomial-comparable curved-triangle charts.

The engine tiles the sector {0 < x < r, 0 < y < c·x^eta} with charts
(x, y) -> (sign_x·x, sign_y·y - g(x)) on whose curved-triangle domains the
phase is comparable to a single monomial b·x^alpha·y^beta ("corner" charts,
mode C, with derivative bounds) or to b·x^alpha with a certified ratio band
("band" charts, mode B, no y factor).

The recursion works level by level down the Newton polygon.  At each level
(a compact edge of reciprocal slope m) the positive real roots r of the
edge polynomial S_e(1, y) mark branches y ~ r x^m along which the phase
degenerates; a strip around each branch curve is shifted by the curve and
resolved recursively, with the root order strictly decreasing.  Between
strips the edge polynomial is bounded away from zero, giving band charts;
above and below the strip stack, a vertex monomial dominates, giving corner
charts.  Strip boundaries are taken parallel to the branch curve so each
recursive sector again has a monomial roof.

Only x is ever ramified: branch curves may carry fractional powers of x,
but y stays polynomial, and the chart maps all have Jacobian ±1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .exact_poly import (
    DEFAULT_TRUNCATION_ORDER,
    PuiseuxPoly,
    Rational,
    deriv_y,
    divide_out_x,
    eval_rational,
    eval_real,
    poly_add,
    poly_mul,
    poly_scale,
    subst_scale,
    subst_shear,
)
from .newton import CompactEdge, NewtonPolygon, edge_polynomial, newton_polygon_of
from .roots import IsolatedRoot, coeffs_of, isolate_real_roots, refine_root

# ---------------------------------------------------------------------------
# parameters and result types


@dataclass(frozen=True)
class ResolveParams:
    """Tuning knobs; the defaults are certified per-chart rather than proven."""

    eta: Optional[Fraction] = None      # sector roof exponent; default min(1/2, m_min/2)
    xi: Fraction = Fraction(1, 8)       # strip half-width cap
    delta: Fraction = Fraction(1, 4)    # comparability slack
    x_max: Fraction = Fraction(1, 4)    # initial chart radius cap
    max_depth: int = 16
    truncation_order: int = 40
    mode: str = "exact"                 # "exact" | "numeric"
    certify: bool = True                # run verify_chart with x_max halving
    certify_retries: int = 20
    verify_samples: int = 400
    verify_seed: int = 1729


@dataclass(frozen=True)
class Chart:
    """One curved-triangle piece: lower(x) < y < upper(x), 0 < x < x_max.

    Domain coordinates relate to the resolved phase's frame by
    (x, y) |-> (sign_x·x, sign_y·(y + g(x))); equivalently the chart map
    phi(X, Y) = (sign_x·X, sign_y·Y - g(X)) sends frame points into the
    chart, with Jacobian determinant ±1.
    """

    sign_x: int
    sign_y: int
    g: PuiseuxPoly
    lower: PuiseuxPoly
    upper: PuiseuxPoly
    monomial: Tuple[Fraction, Fraction, int]  # (b, alpha, beta)
    mode: str                                  # "B" | "C"
    x_max: Fraction
    delta: Fraction
    phase: PuiseuxPoly
    band: Optional[Tuple[Fraction, Fraction]] = None  # mode B: ratio range around b
    label: str = ""                                   # "corner" | "band"

    def contains(self, x: float, y: float) -> bool:
        u = self.sign_x * x
        if not 0.0 < u < float(self.x_max):
            return False
        yc = self.sign_y * y - eval_real(self.g, u, 0.0)
        return eval_real(self.lower, u, 0.0) < yc < eval_real(self.upper, u, 0.0)


@dataclass(frozen=True)
class TraceNode:
    """One branch step of the recursion: the root it chased and the shear used."""

    m: Fraction
    root: Fraction
    order: int
    curve: PuiseuxPoly
    xi: Fraction
    children: Tuple["TraceNode", ...] = ()


@dataclass(frozen=True)
class SectorDescriptor:
    eta: Fraction
    roof_coeff: Fraction = Fraction(1)
    sign_x: int = 1
    sign_y: int = 1
    swapped: bool = False  # True when the x/y roles were exchanged by the caller


@dataclass(frozen=True)
class Decomposition:
    sector: SectorDescriptor
    charts: Tuple[Chart, ...]
    recursion_trace: Tuple[TraceNode, ...]
    truncation_order: Fraction

    @property
    def radius(self) -> Fraction:
        return min((c.x_max for c in self.charts), default=Fraction(0))

    def locate(self, x: float, y: float) -> List[int]:
        return [i for i, c in enumerate(self.charts) if c.contains(x, y)]


# ---------------------------------------------------------------------------
# small exact helpers


def _poly_sub(p: PuiseuxPoly, q: PuiseuxPoly) -> PuiseuxPoly:
    return poly_add(p, poly_scale(q, -1))


def _monocurve(c, a) -> PuiseuxPoly:
    return PuiseuxPoly.monomial(c, a, 0)


def _falling(a: Fraction, k: int) -> Fraction:
    out = Fraction(1)
    for i in range(k):
        out *= a - i
    return out


def _rational_below(x: float) -> Fraction:
    """A positive rational safely under the float bound x."""
    if x <= 0.0:
        return Fraction(0)
    if math.isinf(x):
        return Fraction(10**9)
    return Fraction(x) * Fraction((1 << 20) - 1, 1 << 20)


def _subst_y_curve(p: PuiseuxPoly, t: PuiseuxPoly) -> PuiseuxPoly:
    """p(x, t(x)) for a curve t in x alone (Horner in y)."""
    if t.y_degree() > 0:
        raise ValueError("not a curve substitution: t contains y")
    byb = p.as_y_coefficients()
    if not byb:
        return PuiseuxPoly.zero()
    acc = PuiseuxPoly({}, p.truncation_order)
    for b in range(max(byb), -1, -1):
        acc = acc * t
        if b in byb:
            acc = acc + byb[b]
    return acc


def _curve_separation_xmax(lo: PuiseuxPoly, up: PuiseuxPoly) -> Optional[Fraction]:
    """Largest radius guaranteeing up(x) - lo(x) > 0 on (0, radius].

    The difference's leading term must be positive; each remaining term is
    forced below an equal share of half the leading coefficient.
    """
    diff = _poly_sub(up, lo)
    terms = sorted(diff.terms.items())
    if not terms:
        return Fraction(0)
    (a0, _), c0 = terms[0]
    if c0 <= 0:
        return Fraction(0)
    tail = terms[1:]
    if not tail:
        return None  # single term: positive everywhere
    bound: Optional[Fraction] = None
    share = Fraction(c0, 2 * len(tail))
    for (a, _), c in tail:
        # |c| x^(a-a0) <= share
        x = float(share / abs(c)) ** (1.0 / float(a - a0))
        r = _rational_below(x)
        bound = r if bound is None else min(bound, r)
    return bound


def _min_opt(*vals: Optional[Fraction]) -> Optional[Fraction]:
    present = [v for v in vals if v is not None]
    return min(present) if present else None


# ---------------------------------------------------------------------------
# cut sizing: vertex domination with derivative-order headroom


def _edge_terms(p: PuiseuxPoly, edge: CompactEdge):
    return [((a, b), c) for (a, b), c in p.items() if a + edge.m * b == edge.alpha]


def _order_headroom(terms, vertex) -> Fraction:
    """Worst falling-factorial inflation of any non-vertex edge term over the
    derivative orders checked at this vertex (k <= ceil(a_v), l <= b_v)."""
    av, bv = vertex
    bv = int(bv)
    kmax = max(0, math.ceil(av))
    worst = Fraction(1)
    for (a, b), _ in terms:
        if (a, b) == (av, bv):
            continue
        for k in range(kmax + 1):
            fa = abs(_falling(a, k))
            for l in range(bv + 1):
                fb = abs(_falling(b, l))
                if fa * fb > worst:
                    worst = fa * fb
    return worst


def _lower_cut(p: PuiseuxPoly, edge: CompactEdge, delta: Fraction,
               cap: Fraction) -> Fraction:
    """Largest c in {cap, cap/2, ...} with the edge terms above the lower
    vertex summing below (delta/4F)·|s_v| at y = c·x^m."""
    av, bv = edge.lower_vertex
    terms = _edge_terms(p, edge)
    sv = abs(p.coeff(av, bv))
    target = delta * sv / (4 * _order_headroom(terms, edge.lower_vertex))
    c = cap
    for _ in range(512):
        total = sum(abs(cf) * c ** int(b - bv) for (a, b), cf in terms if b > bv)
        if total <= target:
            return c
        c /= 2
    raise RuntimeError("lower cut did not stabilize (degenerate edge data)")


def _upper_cut(p: PuiseuxPoly, edge: CompactEdge, delta: Fraction,
               floor_: Fraction) -> Fraction:
    """Smallest power-of-two multiple of floor_ with the edge terms below the
    upper vertex summing under (delta/4F)·|s_v| at y = hi·x^m."""
    av, bv = edge.upper_vertex
    terms = _edge_terms(p, edge)
    sv = abs(p.coeff(av, bv))
    target = delta * sv / (4 * _order_headroom(terms, edge.upper_vertex))
    hi = max(floor_, Fraction(1))
    for _ in range(512):
        total = sum(abs(cf) / hi ** int(bv - b) for (a, b), cf in terms if b < bv)
        if total <= target:
            return hi
        hi *= 2
    raise RuntimeError("upper cut did not stabilize (degenerate edge data)")


# ---------------------------------------------------------------------------
# exact range of an edge polynomial on a root-free interval


def _horner(cs: Sequence[Fraction], t: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(cs):
        acc = acc * t + c
    return acc


def _band_range(q: PuiseuxPoly, c1: Fraction, c2: Fraction) -> Tuple[Fraction, Fraction]:
    """Rigorous [min, max] of the edge polynomial on [c1, c2] (no roots inside)."""
    cs = coeffs_of(q)
    dcs = tuple(i * c for i, c in enumerate(cs))[1:]
    cands = [_horner(cs, c1), _horner(cs, c2)]
    width_cap = (c2 - c1) / 10**6
    pad = Fraction(0)
    if any(dcs):
        big = max(abs(c1), abs(c2), Fraction(1))
        slope_bound = sum(abs(c) * big**i for i, c in enumerate(dcs))
        for r in isolate_real_roots(dcs, domain="all"):
            if r.hi <= c1 or r.lo >= c2:
                continue
            while r.width > width_cap:
                r = refine_root(r, r.width / 4)
            lo = min(max(r.lo, c1), c2)
            hi = min(max(r.hi, c1), c2)
            cands.append(_horner(cs, lo))
            cands.append(_horner(cs, hi))
            pad = max(pad, slope_bound * (hi - lo))
    qmin, qmax = min(cands) - pad, max(cands) + pad
    if qmin <= 0 <= qmax:
        raise RuntimeError(
            f"edge band [{c1}, {c2}] is not bounded away from zero (range [{qmin}, {qmax}])")
    return qmin, qmax


# ---------------------------------------------------------------------------
# branch curves (Newton–Puiseux lifting with a frozen derivative)


def branch_curve(p: PuiseuxPoly, edge: CompactEdge, root: IsolatedRoot,
                 truncation_order=None, numeric: bool = False) -> PuiseuxPoly:
    """Curve y = x^m·t(x) following the branch rooted at an edge root.

    t solves d_y^(o-1) s(x, t(x)) = 0 where s(x, y) = x^(-alpha)·p(x, x^m y)
    and o is the root's multiplicity; coefficients are produced by repeated
    linear solves against the frozen derivative A = d_y^o s(0, r) != 0.
    """
    m, alpha = edge.m, edge.alpha
    o = root.multiplicity
    if truncation_order is not None:
        cap = Fraction(truncation_order)
    elif p.truncation_order is not None:
        cap = p.truncation_order
    else:
        cap = Fraction(DEFAULT_TRUNCATION_ORDER)
    s = divide_out_x(subst_scale(p, m), alpha)
    if s.truncation_order is not None and s.truncation_order < cap:
        cap = s.truncation_order
    h = deriv_y(s, o - 1)
    r = root.exact_value
    if r is None:
        if not numeric:
            raise ValueError(
                "irrational edge root in exact mode: switch to certified-numeric mode")
        r = _polish_root(h, root)
    hy = deriv_y(h, 1)
    a_coef = eval_rational(hy, Fraction(0), r)
    if a_coef == 0:
        raise RuntimeError("branch lifting pivot vanished (contradicts root multiplicity)")
    t = PuiseuxPoly({(Fraction(0), 0): r}, cap)
    for _ in range(500):
        e = _subst_y_curve(h, t)
        if numeric:
            e = PuiseuxPoly({k: c for k, c in e.terms.items() if abs(c) > Fraction(1, 10**25)},
                            e.truncation_order)
        if e.is_zero():
            break
        (a_star, _), c_star = min(e.terms.items())
        if a_star >= cap:
            break
        t = poly_add(t, _monocurve(-c_star / a_coef, a_star))
    else:
        raise RuntimeError("branch lifting did not terminate within 500 corrections")
    return poly_mul(_monocurve(Fraction(1), m), t)


def _polish_root(h: PuiseuxPoly, root: IsolatedRoot) -> Fraction:
    """Numeric mode: float-Newton the root of h(0, ·), then snap to a rational."""
    cs = [float(c) for c in coeffs_of(PuiseuxPoly(
        {k: c for k, c in h.terms.items() if k[0] == 0}, h.truncation_order))]
    dcs = [i * c for i, c in enumerate(cs)][1:]

    def ev(coeffs, t):
        acc = 0.0
        for c in reversed(coeffs):
            acc = acc * t + c
        return acc

    t = root.approx
    for _ in range(80):
        d = ev(dcs, t)
        if d == 0.0:
            break
        step = ev(cs, t) / d
        t -= step
        if abs(step) < 1e-17 * max(1.0, abs(t)):
            break
    return Fraction(t).limit_denominator(10**15)


# ---------------------------------------------------------------------------
# the recursion


@dataclass
class _Piece:
    """Mutable chart-in-progress relative to the current sector frame."""

    sign_y: int
    g: PuiseuxPoly
    lower: PuiseuxPoly
    upper: PuiseuxPoly
    monomial: Tuple[Fraction, Fraction, int]
    mode: str
    x_max: Optional[Fraction]
    phase: PuiseuxPoly
    band: Optional[Tuple[Fraction, Fraction]] = None
    label: str = ""


def _compose_half(pieces: List[_Piece], s: int, g_v: PuiseuxPoly) -> None:
    """Lift pieces from a strip-half frame (y_parent = s·(y_child + s·g_v))
    into the parent frame."""
    g_prime = poly_scale(g_v, s)
    for pc in pieces:
        pc.g = poly_add(pc.g, poly_scale(g_prime, pc.sign_y))
        pc.sign_y = s * pc.sign_y


def _cap_xmax(pieces: List[_Piece], cap: Optional[Fraction]) -> None:
    if cap is None:
        return
    for pc in pieces:
        pc.x_max = cap if pc.x_max is None else min(pc.x_max, cap)


def _perturb_xi(xi: Fraction, forbidden: List[Fraction]) -> Fraction:
    for _ in range(64):
        if all(xi != f for f in forbidden):
            return xi
        xi *= Fraction(63, 64)
    raise RuntimeError("could not perturb strip half-width off the root set")


def _positive_roots(q: PuiseuxPoly, numeric: bool) -> List[IsolatedRoot]:
    if len(q.terms) <= 1:
        return []
    roots = isolate_real_roots(q, domain="positive")
    out = []
    for r in roots:
        if r.exact_value is None and not numeric:
            raise ValueError(
                "irrational edge root in exact mode: switch to certified-numeric mode")
        out.append(r)
    return out


def _root_value(r: IsolatedRoot) -> Fraction:
    if r.exact_value is not None:
        return r.exact_value
    rr = r
    while rr.width > Fraction(1, 10**15):
        rr = refine_root(rr, rr.width / 4)
    return Fraction(rr.approx).limit_denominator(10**15)


@dataclass
class _Level:
    edge: CompactEdge
    m: Fraction
    is_roof: bool


def _resolve_sector(p: PuiseuxPoly, roof_coeff: Fraction, roof_exp: Fraction,
                    depth: int, params: ResolveParams
                    ) -> Tuple[List[_Piece], List[TraceNode]]:
    """Tile {0 < y < roof_coeff·x^roof_exp} for the phase p (its own frame)."""
    if depth > params.max_depth:
        raise RuntimeError("resolution recursion exceeded max_depth "
                           "(order decrease violated)")
    numeric = params.mode == "numeric"
    poly = newton_polygon_of(p)
    levels = [_Level(e, e.m, e.m == roof_exp)
              for e in poly.edges if e.m >= roof_exp]
    pieces: List[_Piece] = []
    traces: List[TraceNode] = []

    if not levels:
        # single dominating vertex over the whole sector
        av, bv = min(poly.vertices, key=lambda v: (v[0] + roof_exp * v[1], v[1]))
        sv = p.coeff(av, bv)
        pieces.append(_Piece(
            sign_y=1, g=PuiseuxPoly.zero(), lower=PuiseuxPoly.zero(),
            upper=_monocurve(roof_coeff, roof_exp),
            monomial=(sv, av, int(bv)), mode="C", x_max=None, phase=p, label="corner"))
        return pieces, traces

    prev_curve = _monocurve(roof_coeff, roof_exp)   # current upper boundary
    prev_limit: Optional[Fraction] = roof_coeff     # its coefficient at this level's scale
    for lvl in levels:
        q = edge_polynomial(p, lvl.edge, 1)
        roots = _positive_roots(q, numeric)
        roots = sorted(roots, key=lambda r: _root_value(r), reverse=True)
        if lvl.is_roof:
            roots = [r for r in roots if _root_value(r) < roof_coeff]
            if any(eval_rational(q, Fraction(0), roof_coeff) == 0 for _ in (0,)):
                raise ValueError("sector roof grazes a root curve; choose a different eta")
            top_coeff = roof_coeff
        else:
            rmax = _root_value(roots[0]) if roots else Fraction(0)
            hi = _upper_cut(p, lvl.edge, params.delta, 2 * rmax + 2)
            # corner chart between the previous level's floor and this cut
            av, bv = lvl.edge.upper_vertex
            hic = _monocurve(hi, lvl.m)
            pieces.append(_Piece(
                sign_y=1, g=PuiseuxPoly.zero(), lower=hic, upper=prev_curve,
                monomial=(p.coeff(av, bv), av, int(bv)), mode="C",
                x_max=_curve_separation_xmax(hic, prev_curve), phase=p,
                label="corner"))
            prev_curve, prev_limit, top_coeff = hic, hi, hi

        vals = [_root_value(r) for r in roots]
        for k, root in enumerate(roots):
            r = vals[k]
            margins = [params.xi, r / 4, (top_coeff - vals[0]) / 4]
            if k > 0:
                margins.append((vals[k - 1] - r) / 4)
            if k + 1 < len(vals):
                margins.append((r - vals[k + 1]) / 4)
            xi0 = min(m for m in margins if m > 0)
            g_v = branch_curve(p, lvl.edge, root,
                               truncation_order=params.truncation_order,
                               numeric=numeric)
            p_up = subst_shear(p, 1, g_v)
            p_dn = subst_shear(p, -1, g_v)
            forbidden: List[Fraction] = []
            for child in (p_up, p_dn):
                cpoly = newton_polygon_of(child)
                for e in cpoly.edges:
                    if e.m == lvl.m:
                        qq = edge_polynomial(child, e, 1)
                        for rr in isolate_real_roots(qq, domain="positive"):
                            if rr.exact_value is not None:
                                forbidden.append(rr.exact_value)
            xi = _perturb_xi(xi0, forbidden)

            # band chart between the current upper boundary and this strip
            strip_top = poly_add(g_v, _monocurve(xi, lvl.m))
            lim_lo, lim_hi = r + xi, prev_limit
            if lim_hi is None or lim_hi > lim_lo:
                if lim_hi is None:
                    raise RuntimeError("band above a strip lost its ceiling")
                bmin, bmax = _band_range(q, lim_lo, lim_hi)
                mid = eval_rational(q, Fraction(0), (lim_lo + lim_hi) / 2)
                ratios = sorted((bmin / mid, bmax / mid))
                pieces.append(_Piece(
                    sign_y=1, g=strip_top, lower=PuiseuxPoly.zero(),
                    upper=_poly_sub(prev_curve, strip_top),
                    monomial=(mid, lvl.edge.alpha, 0), mode="B",
                    x_max=_curve_separation_xmax(strip_top, prev_curve),
                    phase=subst_shear(p, 1, strip_top),
                    band=(ratios[0], ratios[1]), label="band"))

            # the strip itself: resolve both halves against the branch curve
            up_pieces, up_tr = _resolve_sector(p_up, xi, lvl.m, depth + 1, params)
            _compose_half(up_pieces, 1, g_v)
            dn_pieces, dn_tr = _resolve_sector(p_dn, xi, lvl.m, depth + 1, params)
            _compose_half(dn_pieces, -1, g_v)
            strip_bot = _poly_sub(g_v, _monocurve(xi, lvl.m))
            strip_cap = _min_opt(_curve_separation_xmax(PuiseuxPoly.zero(), strip_bot),
                                 _curve_separation_xmax(strip_bot, strip_top))
            _cap_xmax(up_pieces, strip_cap)
            _cap_xmax(dn_pieces, strip_cap)
            pieces.extend(up_pieces)
            pieces.extend(dn_pieces)
            traces.append(TraceNode(m=lvl.m, root=r, order=root.multiplicity,
                                    curve=g_v, xi=xi,
                                    children=tuple(up_tr) + tuple(dn_tr)))
            prev_curve, prev_limit = strip_bot, r - xi

        # floor cut and the band reaching down to it
        cap0 = prev_limit if prev_limit is not None else roof_coeff
        c_bot = _lower_cut(p, lvl.edge, params.delta, cap0)
        if c_bot < cap0:
            bmin, bmax = _band_range(q, c_bot, cap0)
            mid = eval_rational(q, Fraction(0), (c_bot + cap0) / 2)
            ratios = sorted((bmin / mid, bmax / mid))
            floor_curve = _monocurve(c_bot, lvl.m)
            pieces.append(_Piece(
                sign_y=1, g=floor_curve, lower=PuiseuxPoly.zero(),
                upper=_poly_sub(prev_curve, floor_curve),
                monomial=(mid, lvl.edge.alpha, 0), mode="B",
                x_max=_curve_separation_xmax(floor_curve, prev_curve),
                phase=subst_shear(p, 1, floor_curve),
                band=(ratios[0], ratios[1]), label="band"))
            prev_curve, prev_limit = floor_curve, c_bot

    # the bottom corner: the last level's lower vertex dominates down to y = 0
    av, bv = levels[-1].edge.lower_vertex
    pieces.append(_Piece(
        sign_y=1, g=PuiseuxPoly.zero(), lower=PuiseuxPoly.zero(),
        upper=prev_curve, monomial=(p.coeff(av, bv), av, int(bv)), mode="C",
        x_max=_curve_separation_xmax(PuiseuxPoly.zero(), prev_curve),
        phase=p, label="corner"))
    return pieces, traces


def resolve(p: PuiseuxPoly, params: Optional[ResolveParams] = None) -> Decomposition:
    """Decompose the sector {0 < x, 0 < y < x^eta} for p into charts.

    The input must already be reflected into the first quadrant (use
    reflect_axes for the other sectors).  Charts are certified by sampling,
    halving each chart's radius until its comparability check passes.
    """
    if params is None:
        params = ResolveParams()
    if p.is_zero():
        raise ValueError("cannot resolve the zero phase")
    trunc = Fraction(params.truncation_order)
    poly = newton_polygon_of(p)
    eta = params.eta
    if eta is None:
        slopes = [e.m for e in poly.edges]
        eta = min(Fraction(1, 2), min(slopes) / 2) if slopes else Fraction(1, 2)
    eta = Fraction(eta)
    if eta <= 0:
        raise ValueError("sector roof exponent must be positive")

    pieces, traces = _resolve_sector(p, Fraction(1), eta, 0, params)

    charts = []
    for pc in pieces:
        x_max = min(params.x_max, pc.x_max) if pc.x_max is not None else params.x_max
        charts.append(Chart(
            sign_x=1, sign_y=pc.sign_y, g=pc.g, lower=pc.lower, upper=pc.upper,
            monomial=pc.monomial, mode=pc.mode, x_max=x_max, delta=params.delta,
            phase=pc.phase, band=pc.band, label=pc.label))

    bs = [b for (_, b) in p.support()]
    span = max(1, max(bs) - min(bs))
    cap = 8 * (2 * span) ** (span + 1)
    if len(charts) > cap:
        raise RuntimeError(f"chart count {len(charts)} exceeds the structural cap {cap}")

    if params.certify:
        charts = [_certify(p, c, params) for c in charts]

    return Decomposition(
        sector=SectorDescriptor(eta=eta),
        charts=tuple(charts),
        recursion_trace=tuple(traces),
        truncation_order=trunc,
    )


def _certify(p: PuiseuxPoly, c: Chart, params: ResolveParams) -> Chart:
    for _ in range(params.certify_retries):
        try:
            rep = verify_chart(p, c, samples=params.verify_samples,
                               seed=params.verify_seed)
        except ValueError:
            rep = None
        if rep is not None and rep.passed:
            return c
        c = replace(c, x_max=c.x_max / 2)
    raise RuntimeError(
        f"chart certification failed after {params.certify_retries} retries "
        f"(mode {c.mode}, monomial {c.monomial})")


# ---------------------------------------------------------------------------
# chart maps and verification


def chart_apply(c: Chart, x: float, y: float) -> Tuple[float, float]:
    """Frame point -> chart point: (sign_x·x, sign_y·y - g(x)); needs x >= 0."""
    if x < 0:
        raise ValueError("chart_apply expects x >= 0 (reflect first)")
    return (c.sign_x * x, c.sign_y * y - eval_real(c.g, x, 0.0))


def chart_unapply(c: Chart, u: float, v: float) -> Tuple[float, float]:
    """Chart point -> frame point (exact inverse of chart_apply)."""
    x = c.sign_x * u
    return (x, c.sign_y * (v + eval_real(c.g, x, 0.0)))


@dataclass(frozen=True)
class VerifyReport:
    passed: bool
    mode: str
    max_ratio_violation: float
    derivative_check: Optional[Dict[str, object]]
    sign_ok: bool
    samples: int
    seed: int
    x_max: float


def _float_terms(p: PuiseuxPoly):
    return [(float(cf), float(a), b) for (a, b), cf in p.items()]


def _eval_terms(terms, x: float, y: float) -> float:
    tot = 0.0
    for cf, a, b in terms:
        v = cf * math.pow(x, a)
        if b:
            v *= y**b
        tot += v
    return tot


def _deriv_terms(p: PuiseuxPoly, k: int, l: int):
    """Termwise d_x^k d_y^l; x exponents may go negative (evaluated at x > 0)."""
    out = []
    for (a, b), cf in p.items():
        if b < l:
            continue
        c = cf * _falling(a, k) * _falling(Fraction(b), l)
        if c != 0:
            out.append((float(c), float(a - k), b - l))
    return out


def verify_chart(p: PuiseuxPoly, c: Chart, samples: int = 1000,
                 seed: int = 0) -> VerifyReport:
    """Sample the chart domain and check comparability to the monomial model.

    Mode C gates both the ratio |S∘phi / (b x^a y^b) - 1| <= delta and the
    derivative bounds |d_x^k d_y^l S∘phi - b·fall(a,k)·fall(b,l)·x^(a-k)y^(b-l)|
    <= delta·|b|·x^(a-k)·y^(b-l) for k <= ceil(alpha), l <= beta.  The
    published form of that inequality swaps k and l on the bound's exponents;
    the swapped quantity is reported informationally but not gated, because
    it fails scale-invariantly on valid charts (see the derivative check
    notes in the test-suite).  Mode B gates the ratio band and sign constancy.
    """
    b_coef, alpha, beta = c.monomial
    bf, af = float(b_coef), float(alpha)
    if bf == 0.0:
        raise ValueError("chart monomial has zero coefficient")
    x_hi = float(c.x_max)
    lo_t = _float_terms(c.lower)
    up_t = _float_terms(c.upper)
    ph_t = _float_terms(c.phase)
    delta = float(c.delta)

    phi1 = 0.6180339887498949
    phi2 = 0.7548776662466927
    s1 = math.modf(seed * 0.8191725133961645 + 0.1375)[0]
    s2 = math.modf(seed * 0.2887043245670215 + 0.6913)[0]

    xs = []
    for i in range(samples):
        u = (s1 + i * phi1) % 1.0
        v = (s2 + i * phi2) % 1.0
        if i % 4 == 3:
            x = x_hi * math.pow(4.0, -(1.0 + 3.0 * u))
        else:
            x = x_hi * min(max(u, 1e-4), 1.0 - 1e-9)
        if i % 5 == 4:
            w = 0.001 if i % 2 else 0.999
        else:
            w = min(max(v, 1e-4), 1.0 - 1e-4)
        xs.append((x, w))
    # deterministic probes independent of the seed: remainder terms peak at
    # large x, so certification must always see the far boundary
    x_levels = [x_hi * q for q in (0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875)]
    x_levels += [x_hi * (1.0 - 2.0 ** -k) for k in range(3, 8)]
    x_levels.append(x_hi * (1.0 - 1e-9))
    w_levels = (0.001, 0.05, 0.2, 0.4, 0.5, 0.6, 0.8, 0.95, 0.999)
    xs.extend((x, w) for x in x_levels for w in w_levels)

    pts = []
    for x, w in xs:
        lo = _eval_terms(lo_t, x, 0.0)
        up = _eval_terms(up_t, x, 0.0)
        if not up > lo:
            raise ValueError(f"empty chart domain at x = {x:.3g}: shrink x_max")
        pts.append((x, lo + (up - lo) * w))

    sign_ok = True
    worst_ratio = 0.0
    deriv_report: Optional[Dict[str, object]] = None

    if c.mode == "C":
        bi = int(beta)
        for x, y in pts:
            model = bf * math.pow(x, af) * y**bi
            val = _eval_terms(ph_t, x, y)
            if val * model <= 0.0:
                sign_ok = False
            worst_ratio = max(worst_ratio, abs(val / model - 1.0))
        worst_d = 0.0
        worst_printed = 0.0
        orders = []
        for k in range(math.ceil(alpha) + 1):
            for l in range(bi + 1):
                if k == 0 and l == 0:
                    continue
                orders.append((k, l))
                dt = _deriv_terms(c.phase, k, l)
                mcf = bf * float(_falling(alpha, k)) * float(_falling(Fraction(bi), l))
                for x, y in pts:
                    lhs = abs(_eval_terms(dt, x, y)
                              - mcf * math.pow(x, af - k) * y ** (bi - l))
                    nat = abs(bf) * math.pow(x, af - k) * y ** (bi - l)
                    pr = abs(bf) * math.pow(x, af - l) * y ** (bi - k)
                    worst_d = max(worst_d, lhs / nat)
                    worst_printed = max(worst_printed, lhs / pr if pr > 0 else 0.0)
        deriv_report = {"max_violation": worst_d,
                        "printed_form_violation": worst_printed,
                        "orders": orders}
        passed = sign_ok and worst_ratio <= delta and worst_d <= delta
    elif c.mode == "B":
        if c.band is None:
            raise ValueError("band chart missing its ratio band")
        blo, bhi = float(c.band[0]), float(c.band[1])
        lo_gate, hi_gate = blo * (1.0 - delta), bhi * (1.0 + delta)
        for x, y in pts:
            ratio = _eval_terms(ph_t, x, y) / (bf * math.pow(x, af))
            if ratio <= 0.0:
                sign_ok = False
            breach = max(0.0, (lo_gate - ratio) / blo, (ratio - hi_gate) / bhi)
            worst_ratio = max(worst_ratio, breach)
        passed = sign_ok and worst_ratio == 0.0
    else:
        raise ValueError(f"unknown chart mode {c.mode!r}")

    return VerifyReport(passed=passed, mode=c.mode,
                        max_ratio_violation=worst_ratio,
                        derivative_check=deriv_report, sign_ok=sign_ok,
                        samples=samples, seed=seed, x_max=x_hi)


# ---------------------------------------------------------------------------
# serialization


def _frac_str(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def _curve_json(p: PuiseuxPoly):
    return [[_frac_str(cf), _frac_str(a), b] for (a, b), cf in p.items()]


def _trace_json(node: TraceNode) -> dict:
    return {
        "m": _frac_str(node.m),
        "root": _frac_str(node.root),
        "order": node.order,
        "curve": _curve_json(node.curve),
        "xi": _frac_str(node.xi),
        "children": [_trace_json(ch) for ch in node.children],
    }


def decomposition_to_json(dec: Decomposition) -> dict:
    return {
        "schema": "newton-sublevel/decomposition/1",
        "sector": {
            "eta": _frac_str(dec.sector.eta),
            "roof_coeff": _frac_str(dec.sector.roof_coeff),
            "sign_x": dec.sector.sign_x,
            "sign_y": dec.sector.sign_y,
            "swapped": dec.sector.swapped,
        },
        "truncation_order": _frac_str(dec.truncation_order),
        "radius": _frac_str(dec.radius),
        "charts": [
            {
                "sign_x": c.sign_x,
                "sign_y": c.sign_y,
                "mode": c.mode,
                "label": c.label,
                "g": _curve_json(c.g),
                "lower": _curve_json(c.lower),
                "upper": _curve_json(c.upper),
                "monomial": {
                    "coeff": _frac_str(c.monomial[0]),
                    "alpha": _frac_str(c.monomial[1]),
                    "beta": int(c.monomial[2]),
                },
                "x_max": _frac_str(c.x_max),
                "delta": _frac_str(c.delta),
                "band": ([_frac_str(c.band[0]), _frac_str(c.band[1])]
                         if c.band is not None else None),
            }
            for c in dec.charts
        ],
        "recursion_trace": [_trace_json(t) for t in dec.recursion_trace],
    }
