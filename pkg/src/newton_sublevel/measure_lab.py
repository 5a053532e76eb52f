"""Sublevel-measure and oscillatory-integral laboratory.

Numerical verification layer: Monte Carlo / midpoint-grid estimates of
sublevel-set areas |{|S| < eps}|, exact closed forms for monomial phases on
curved triangles, two-regressor asymptotic fits for the growth law
C * eps^j * |ln eps|^p and the decay law D * lam^-j * (ln lam)^p, a van der
Corput bound checker whose hypothesis is certified by root isolation, and
tensor Gauss-Legendre quadrature for oscillatory integrals with a fixed
polynomial bump cutoff.

Determinism contract: estimates depend only on (seed, budget).  Monte Carlo
uses one PCG64 stream per fixed-size block (jumped streams, integer counts),
so results are bit-identical for any thread count.
"""

from __future__ import annotations

import cmath
import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .exact_poly import PuiseuxPoly, eval_rational
from .roots import (IsolatedRoot, coeffs_of, count_roots_halfopen,
                    isolate_real_roots, refine_root)

_BLOCK = 1 << 16          # Monte Carlo block size; fixed so threading cannot reorder sums
_ROOT_WIDTH = Fraction(1, 2 ** 60)


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class MeasureSample:
    epsilon: float
    estimate: float
    stderr: float
    n_samples: int
    method: str            # MC | GRID | EXACT


@dataclass(frozen=True)
class FitResult:
    j_hat: float
    p_hat: float
    C_hat: float
    residual_rms: float
    p_rounded: int


@dataclass(frozen=True)
class Disk:
    """Open disk of the given radius centered at the origin."""

    radius: float = 1.0


@dataclass(frozen=True)
class SectorProduct:
    """Axis-aligned product region (0, x_side) x (0, y_side)."""

    x_side: float = 1.0
    y_side: float = 1.0


@dataclass(frozen=True)
class CurvedTriangle:
    """{(x, y): 0 < x < x_max, lower(x) < y < upper(x)} for y-free curves."""

    lower: PuiseuxPoly
    upper: PuiseuxPoly
    x_max: float = 1.0


Region = Union[Disk, SectorProduct, CurvedTriangle]


def curved_triangle(m, N, x0) -> CurvedTriangle:
    """The standard aperture {0 < x < x0, 0 < y < N x^m}."""
    return CurvedTriangle(PuiseuxPoly.zero(),
                          PuiseuxPoly.monomial(N, Fraction(m), 0), float(x0))


@dataclass(frozen=True)
class MonomialMeasure:
    value: float
    regime: str            # y-exponent-dominant | balanced-logarithmic | x-exponent-dominant | degenerate-*
    leading_exponent: Fraction
    log_power: int


@dataclass(frozen=True)
class Cutoff:
    """Polynomial bump (1 - (x^2+y^2)/r^2)^order on the disk of radius r."""

    radius: float = 1.0
    order: int = 3


# ---------------------------------------------------------------------------
# region geometry


def region_area(region: Region) -> float:
    if isinstance(region, Disk):
        return math.pi * region.radius ** 2
    if isinstance(region, SectorProduct):
        return region.x_side * region.y_side
    if isinstance(region, CurvedTriangle):
        width = region.upper - region.lower
        total = 0.0
        for (a, b), c in width.items():
            if b != 0:
                raise ValueError("curved-triangle boundaries must not involve y")
            total += float(c) * region.x_max ** (float(a) + 1.0) / (float(a) + 1.0)
        if total <= 0.0:
            raise ValueError("curved triangle has nonpositive area")
        return total
    raise TypeError(f"not a region: {region!r}")


def _curve_terms(p: PuiseuxPoly) -> List[Tuple[float, float]]:
    out = []
    for (a, b), c in p.items():
        if b != 0:
            raise ValueError("curved-triangle boundaries must not involve y")
        out.append((float(c), float(a)))
    return out


def _eval_curve(terms, X):
    out = np.zeros_like(X)
    for c, a in terms:
        out += c * X ** a
    return out


def _bounding_box(region: Region) -> Tuple[float, float, float, float]:
    if isinstance(region, Disk):
        r = region.radius
        return (-r, r, -r, r)
    if isinstance(region, SectorProduct):
        return (0.0, region.x_side, 0.0, region.y_side)
    # curve extrema probed on a fine grid; pad by 1% so the box surely covers
    lo_t, up_t = _curve_terms(region.lower), _curve_terms(region.upper)
    xs = np.linspace(0.0, region.x_max, 4097)[1:]
    lo = float(np.min(_eval_curve(lo_t, xs)))
    hi = float(np.max(_eval_curve(up_t, xs)))
    pad = 0.01 * max(hi - lo, 1e-30)
    return (0.0, region.x_max, min(lo, 0.0) - pad, hi + pad)


def _member_mask(region: Region, X, Y):
    if isinstance(region, Disk):
        return X * X + Y * Y < region.radius ** 2
    if isinstance(region, SectorProduct):
        return (X > 0.0) & (X < region.x_side) & (Y > 0.0) & (Y < region.y_side)
    lo_t, up_t = _curve_terms(region.lower), _curve_terms(region.upper)
    ok = (X > 0.0) & (X < region.x_max)
    Xs = np.where(ok, X, 1.0)  # avoid 0**negative-free eval on masked-out points
    return ok & (Y > _eval_curve(lo_t, Xs)) & (Y < _eval_curve(up_t, Xs))


# ---------------------------------------------------------------------------
# phase evaluation (vectorized)


def _phase_terms(p: PuiseuxPoly, needs_negative_x: bool):
    """Float view [(c, a, b)]; integer-x-exponent check when x < 0 occurs."""
    terms = []
    for (a, b), c in p.items():
        if needs_negative_x and a != int(a):
            raise ValueError(
                "phase has fractional x-exponents but the region crosses x = 0; "
                "use an x > 0 region")
        terms.append((float(c), (int(a) if a == int(a) else float(a)), int(b)))
    return terms


def _eval_phase(terms, X, Y):
    out = np.zeros_like(X)
    for c, a, b in terms:
        out += c * X ** a * Y ** b
    return out


# ---------------------------------------------------------------------------
# sublevel measure


def _mc_block(args):
    terms, region, box, epsilon, seed, block, count = args
    rng = np.random.Generator(np.random.PCG64(seed).jumped(block + 1))
    x0, x1, y0, y1 = box
    X = x0 + (x1 - x0) * rng.random(count)
    Y = y0 + (y1 - y0) * rng.random(count)
    inside = _member_mask(region, X, Y)
    k_in = int(np.count_nonzero(inside))
    if k_in == 0:
        return 0, 0
    S = _eval_phase(terms, X[inside], Y[inside])
    k_sub = int(np.count_nonzero(np.abs(S) < epsilon))
    return k_in, k_sub


def sublevel_measure(p: PuiseuxPoly, region: Region, epsilon,
                     budget: int = 10 ** 6, seed: int = 0,
                     method: str = "MC", threads: int = 1) -> MeasureSample:
    """Estimate |{(x,y) in region: |S(x,y)| < epsilon}|.

    method MC: budget = number of samples (conditional hit estimator on the
    bounding box; stderr from the binomial count).  method GRID: budget =
    dyadic depth, midpoint rule on a 2^budget x 2^budget grid; stderr is the
    difference against depth-1.  method EXACT: delegates to
    monomial_measure_exact; only single-term phases on a monomial curved
    triangle qualify.
    """
    epsilon = float(epsilon)
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    area = region_area(region)

    if method == "EXACT":
        if len(p.terms) != 1 or not isinstance(region, CurvedTriangle):
            raise ValueError("EXACT method needs a monomial phase on a curved triangle")
        if not region.lower.is_zero() or len(region.upper.terms) != 1:
            raise ValueError("EXACT method needs a monomial curved triangle based at y = 0")
        ((ea, eb), ec), = p.items()
        ((ma, mb), mc), = region.upper.items()
        if mb != 0 or mc <= 0:
            raise ValueError("EXACT method needs an upper boundary N x^m with N > 0")
        mm = monomial_measure_exact(abs(ec), ea, eb, ma, mc, region.x_max, epsilon)
        return MeasureSample(epsilon, mm.value, 0.0, 0, "EXACT")

    box = _bounding_box(region)
    terms = _phase_terms(p, needs_negative_x=box[0] < 0.0 or box[2] < 0.0)

    if method == "MC":
        n = int(budget)
        if n <= 0:
            raise ValueError("budget must be positive")
        blocks = []
        off = 0
        while off < n:
            count = min(_BLOCK, n - off)
            blocks.append((terms, region, box, epsilon, seed, len(blocks), count))
            off += count
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                counts = list(pool.map(_mc_block, blocks))
        else:
            counts = [_mc_block(b) for b in blocks]
        k_in = sum(c[0] for c in counts)
        k_sub = sum(c[1] for c in counts)
        if k_in == 0:
            return MeasureSample(epsilon, 0.0, area, n, "MC")
        phat = k_sub / k_in
        estimate = area * phat
        if k_sub == 0:
            stderr = area * 3.0 / k_in  # rule-of-three upper scale for empty counts
        else:
            stderr = area * math.sqrt(phat * (1.0 - phat) / k_in)
        return MeasureSample(epsilon, estimate, stderr, n, "MC")

    if method == "GRID":
        depth = int(budget)
        if not 1 <= depth <= 14:
            raise ValueError("grid depth must be between 1 and 14")

        def grid_estimate(d: int) -> Tuple[float, int]:
            n_axis = 1 << d
            x0, x1, y0, y1 = box
            xs = x0 + (x1 - x0) * (np.arange(n_axis) + 0.5) / n_axis
            ys = y0 + (y1 - y0) * (np.arange(n_axis) + 0.5) / n_axis
            k_in = 0
            k_sub = 0
            chunk = max(1, 4_000_000 // n_axis)
            for i in range(0, n_axis, chunk):
                X = xs[i:i + chunk][:, None]
                Y = ys[None, :]
                Xb, Yb = np.broadcast_arrays(X, Y)
                inside = _member_mask(region, Xb, Yb)
                k_in += int(np.count_nonzero(inside))
                if k_in:
                    S = _eval_phase(terms, Xb[inside], Yb[inside])
                    k_sub += int(np.count_nonzero(np.abs(S) < epsilon))
            if k_in == 0:
                return 0.0, 0
            return area * k_sub / k_in, k_in

        est, cells = grid_estimate(depth)
        prev, _ = grid_estimate(depth - 1)
        # successive differences can be accidentally small; floor the error by
        # the boundary-cell band of an isoperimetric set of the same area
        x0, x1, y0, y1 = box
        h = max(x1 - x0, y1 - y0) / (1 << depth)
        perimeter_proxy = 2.0 * math.sqrt(math.pi * max(est, 0.0))
        stderr = max(abs(est - prev), 0.5 * perimeter_proxy * h,
                     area / max(cells, 1))
        return MeasureSample(epsilon, est, stderr, cells, "GRID")

    raise ValueError("method must be MC, GRID, or EXACT")


# ---------------------------------------------------------------------------
# exact monomial measures on the standard aperture


def _frac(v) -> Fraction:
    if isinstance(v, float):
        return Fraction(v).limit_denominator(10 ** 9)
    return Fraction(v)


def monomial_measure_exact(a, alpha, beta, m, N, x0, epsilon) -> MonomialMeasure:
    """Exact |{(x,y): 0<x<x0, 0<y<N x^m, a x^alpha y^beta < epsilon}|.

    Piecewise closed form: below the crossover abscissa the full slice
    0 < y < N x^m is admissible; above it the constraint truncates the slice.
    The regime tag classifies the small-epsilon asymptotics by beta vs alpha.
    """
    af, alf, bef, mf = float(a), float(alpha), float(beta), float(m)
    Nf, x0f, eps = float(N), float(x0), float(epsilon)
    if af <= 0 or Nf <= 0 or x0f <= 0 or eps <= 0 or mf <= 0:
        raise ValueError("a, N, x0, m, epsilon must all be positive")
    if alf < 0 or bef < 0:
        raise ValueError("alpha and beta must be nonnegative")
    alpha_q, beta_q, m_q = _frac(alpha), _frac(beta), _frac(m)

    full_area = Nf * x0f ** (mf + 1.0) / (mf + 1.0)

    if bef == 0.0:
        if alf == 0.0:
            # constant phase: all or nothing
            if af <= eps:
                return MonomialMeasure(full_area, "degenerate-full", Fraction(0), 0)
            return MonomialMeasure(0.0, "degenerate-empty", Fraction(0), 0)
        X = min(x0f, (eps / af) ** (1.0 / alf))
        value = Nf * X ** (mf + 1.0) / (mf + 1.0)
        return MonomialMeasure(value, "x-exponent-dominant",
                               (m_q + 1) / alpha_q, 0)

    # beta > 0: slice height min(N x^m, (eps/a)^{1/beta} x^{-alpha/beta})
    denom = mf * bef + alf
    xc = (eps / af) ** (1.0 / denom) * Nf ** (-bef / denom)
    X1 = min(xc, x0f)
    value = Nf * X1 ** (mf + 1.0) / (mf + 1.0)
    if xc < x0f:
        A = (eps / af) ** (1.0 / bef)
        kappa = alf / bef
        if kappa == 1.0:
            value += A * math.log(x0f / xc)
        else:
            value += A * (x0f ** (1.0 - kappa) - xc ** (1.0 - kappa)) / (1.0 - kappa)

    if bef > alf:
        return MonomialMeasure(value, "y-exponent-dominant", 1 / beta_q, 0)
    if bef == alf:
        return MonomialMeasure(value, "balanced-logarithmic", 1 / beta_q, 1)
    return MonomialMeasure(value, "x-exponent-dominant",
                           (m_q + 1) / (alpha_q + m_q * beta_q), 0)


# ---------------------------------------------------------------------------
# asymptotic fits


def _wls(A, target, w):
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(A * sw[:, None], target * sw, rcond=None)
    resid = A @ coef - target
    rms = float(math.sqrt(float(np.sum(w * resid * resid) / np.sum(w))))
    return coef, rms


def _two_regressor_fit(xvals, yvals, log_reg, p_fixed, span_decades, what,
                       weights=None):
    x = np.asarray(xvals, dtype=float)
    y = np.asarray(yvals, dtype=float)
    if len(x) < 4:
        raise ValueError(f"need at least 4 {what} samples to fit")
    if np.any(y <= 0.0):
        raise ValueError(f"all {what} values must be positive to fit in log space")
    if np.any(x == 1.0):
        raise ValueError(f"{what} = 1 makes the log regressor singular")
    span = np.max(x) / np.min(x)
    if span < 10.0 ** span_decades * (1.0 - 1e-9):
        raise ValueError(
            f"{what} range too narrow: need >= {span_decades} decades, got "
            f"{math.log10(span):.2f}")
    L = np.log(x)
    G = np.log(np.abs(np.log(x)))
    target = np.log(y)
    w = np.ones_like(L) if weights is None else np.asarray(weights, dtype=float)

    if p_fixed is not None:
        A = np.column_stack([np.ones_like(L), log_reg * L])
        sv = np.linalg.svd(A, compute_uv=False)
        if sv[-1] <= 1e-12 * sv[0]:
            raise ValueError("degenerate design matrix: widen the sample range")
        coef, rms = _wls(A, target - float(p_fixed) * G, w)
        return FitResult(float(coef[1]), float(p_fixed), float(math.exp(coef[0])),
                         rms, int(p_fixed))

    A_free = np.column_stack([np.ones_like(L), log_reg * L, G])
    sv = np.linalg.svd(A_free, compute_uv=False)
    if sv[-1] <= 1e-12 * sv[0]:
        raise ValueError("degenerate design matrix: widen the sample range")
    # The two log-scale regressors are nearly collinear over realistic spans,
    # so the continuous p_hat from the free fit only diagnoses; the shipped
    # p_rounded comes from a ratio test between the p = 0 and p = 1 constrained
    # models, and (j, C) are read off the winner, which is well conditioned.
    coef_free, _ = _wls(A_free, target, w)
    A = np.column_stack([np.ones_like(L), log_reg * L])
    coef0, rms0 = _wls(A, target, w)
    coef1, rms1 = _wls(A, target - G, w)
    if rms0 <= rms1:
        p_rounded, coef, rms = 0, coef0, rms0
    else:
        p_rounded, coef, rms = 1, coef1, rms1
    return FitResult(float(coef[1]), float(coef_free[2]),
                     float(math.exp(coef[0])), rms, p_rounded)


def fit_growth(samples: Sequence[MeasureSample],
               p_fixed: Optional[int] = None) -> FitResult:
    """Fit log M = log C + j log eps + p log|log eps| by weighted least squares.

    Requires >= 4 samples with positive estimates spanning >= 3 decades of
    epsilon.  Sample stderr supplies the weights (noiseless points count as
    precisely as the best noisy one).  p_fixed freezes the log exponent;
    otherwise p is chosen by the log-presence ratio test and the continuous
    p_hat of the free fit is reported alongside.
    """
    eps = [s.epsilon for s in samples]
    est = [s.estimate for s in samples]
    if len(set(eps)) != len(eps):
        raise ValueError("duplicate epsilon values in fit input")
    rel2 = np.array([
        (s.stderr / s.estimate) ** 2 if s.estimate > 0 else 0.0
        for s in samples
    ])
    positive = rel2[rel2 > 0.0]
    weights = None
    if positive.size:
        weights = 1.0 / np.maximum(rel2, float(positive.min()))
    return _two_regressor_fit(eps, est, +1.0, p_fixed, 3.0, "epsilon",
                              weights=weights)


def fit_decay(pairs: Sequence[Tuple[float, float]],
              p_fixed: Optional[int] = None) -> FitResult:
    """Fit log|J| = log D - j log lam + p log log lam.

    Requires >= 4 pairs spanning >= 1.2 decades of lambda (the shipped
    oscillatory sweeps use [50, 800], which is 1.2 decades).
    """
    lams = [q[0] for q in pairs]
    vals = [q[1] for q in pairs]
    if any(l <= 1.0 for l in lams):
        raise ValueError("decay fit needs lambda > 1")
    return _two_regressor_fit(lams, vals, -1.0, p_fixed, 1.2, "lambda")


# ---------------------------------------------------------------------------
# van der Corput


def vdc_sublevel_bound(k: int, c, epsilon, interval_length) -> float:
    """min(|I|, 4 c^{-1/k} eps^{1/k}) for |f^(k)| > c k! on I."""
    if k <= 0:
        raise ValueError("k must be a positive integer")
    c, epsilon, L = float(c), float(epsilon), float(interval_length)
    if c <= 0 or epsilon <= 0 or L <= 0:
        raise ValueError("c, epsilon, interval_length must be positive")
    return min(L, 4.0 * c ** (-1.0 / k) * epsilon ** (1.0 / k))


def _dcoeffs(cs: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    return tuple(cs[i] * i for i in range(1, len(cs)))


def _poly_value(cs: Sequence[Fraction], t: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(cs):
        acc = acc * t + c
    return acc


def _roots_in_interval(cs, lo: Fraction, hi: Fraction) -> List[Fraction]:
    """Refined positions of the real roots of cs inside [lo, hi]."""
    cs = tuple(cs)
    if len(cs) <= 1:
        return []
    out = []
    for r in isolate_real_roots(cs, domain="all"):
        if r.exact_value is None:
            r = refine_root(r, _ROOT_WIDTH)
        pos = r.midpoint()
        if lo <= pos <= hi:
            out.append(pos)
    return out


def vdc_check(f, interval, k: int, c, epsilon) -> Dict[str, object]:
    """Certified sublevel check: measure {t in I: |f| < eps} vs the bound.

    The derivative hypothesis |f^(k)| >= c k! on I is verified first by root
    isolation of f^(k) -+ c k! (no roots inside I, correct magnitude at the
    midpoint); a failing hypothesis raises rather than returning a vacuous ok.
    The sublevel measure itself is computed exactly by isolating the roots of
    f -+ eps and summing the subintervals where |f| < eps.
    """
    cs = tuple(coeffs_of(f))
    lo, hi = Fraction(interval[0]), Fraction(interval[1])
    if not lo < hi:
        raise ValueError("empty interval")
    k = int(k)
    c_q, eps_q = Fraction(c), Fraction(epsilon)
    if k <= 0 or c_q <= 0 or eps_q <= 0:
        raise ValueError("k, c, epsilon must be positive")

    dk = cs
    for _ in range(k):
        dk = _dcoeffs(dk)
    gate = c_q * math.factorial(k)
    mid = (lo + hi) / 2
    hyp_ok = bool(dk) and abs(_poly_value(dk, mid)) >= gate
    if hyp_ok:
        # |f^(k)| >= c k! on the closed interval: each of f^(k) -+ c k! is
        # identically zero or root-free there (touching minima are rejected
        # as uncertifiable rather than silently accepted)
        for sign in (Fraction(1), Fraction(-1)):
            shifted = (dk[0] + sign * gate,) + tuple(dk[1:])
            if all(cc == 0 for cc in shifted):
                continue
            if _poly_value(shifted, lo) == 0 or _poly_value(shifted, hi) == 0:
                hyp_ok = False
                break
            if len(shifted) > 1 and count_roots_halfopen(shifted, lo, hi) > 0:
                hyp_ok = False
                break
    if not hyp_ok:
        raise ValueError(
            f"derivative hypothesis violated: |f^({k})| >= c*{k}! fails on the interval")

    cuts = {lo, hi}
    for sign in (eps_q, -eps_q):
        shifted = (cs[0] + sign,) + cs[1:] if cs else (sign,)
        cuts.update(_roots_in_interval(shifted, lo, hi))
    pts = sorted(cuts)
    measured = Fraction(0)
    for t0, t1 in zip(pts, pts[1:]):
        if abs(_poly_value(cs, (t0 + t1) / 2)) < eps_q:
            measured += t1 - t0
    bound = vdc_sublevel_bound(k, c_q, eps_q, hi - lo)
    measured_f = float(measured)
    return {"measured": measured_f, "bound": bound, "ok": measured_f <= bound}


def slice_domination_check(g: PuiseuxPoly, a, alpha, beta: int, m, N, x0,
                           epsilon, xs: Sequence) -> Dict[str, object]:
    """Per-slice comparison of |{|g| < eps}| against 4x the monomial slice.

    For each sample abscissa x the derivative bound |d^beta_y g| > a beta! x^alpha
    is certified on (0, N x^m] by root isolation; the slice sublevel measure is
    then computed exactly and compared with 4 * min(N x^m, (eps/(a x^alpha))^{1/beta}).
    """
    beta = int(beta)
    if beta <= 0:
        raise ValueError("beta must be a positive integer")
    a_f, al_f, m_f, N_f = float(a), float(alpha), float(m), float(N)
    eps_q = Fraction(epsilon)
    rows = []
    all_ok = True
    ycoeffs = g.as_y_coefficients()
    top = max(ycoeffs) if ycoeffs else 0
    for x in xs:
        xq = Fraction(x)
        if not 0 < xq < Fraction(x0):
            raise ValueError("sample abscissa outside (0, x0)")
        cs = tuple(eval_rational(ycoeffs.get(i, PuiseuxPoly.zero()), xq, Fraction(0))
                   for i in range(top + 1))
        ymax = Fraction(N) * xq ** int(m) if float(m) == int(m) else None
        if ymax is None:
            # fractional aperture exponent: fall back to a float ceiling
            ymax = Fraction(N_f * float(xq) ** m_f).limit_denominator(10 ** 12)
        dk = cs
        for _ in range(beta):
            dk = _dcoeffs(dk)
        gate_f = a_f * math.factorial(beta) * float(xq) ** al_f
        gate = Fraction(gate_f).limit_denominator(10 ** 15)
        certified = bool(dk) and abs(_poly_value(dk, ymax / 2)) > gate
        if certified:
            for sign in (Fraction(1), Fraction(-1)):
                shifted = (dk[0] + sign * gate,) + dk[1:]
                if len(shifted) > 1 and count_roots_halfopen(shifted, Fraction(0), ymax) > 0:
                    certified = False
                    break
        if not certified:
            all_ok = False
            rows.append({"x": float(xq), "certified": False, "ok": False})
            continue
        cuts = {Fraction(0), ymax}
        for sign in (eps_q, -eps_q):
            shifted = (cs[0] + sign,) + cs[1:]
            cuts.update(_roots_in_interval(shifted, Fraction(0), ymax))
        pts = sorted(cuts)
        measured = Fraction(0)
        for t0, t1 in zip(pts, pts[1:]):
            if abs(_poly_value(cs, (t0 + t1) / 2)) < eps_q:
                measured += t1 - t0
        mono_slice = min(float(ymax),
                         (float(eps_q) / (a_f * float(xq) ** al_f)) ** (1.0 / beta))
        ok = float(measured) <= 4.0 * mono_slice * (1.0 + 1e-12)
        all_ok = all_ok and ok
        rows.append({"x": float(xq), "certified": True,
                     "measured": float(measured), "cap": 4.0 * mono_slice, "ok": ok})
    return {"all_ok": all_ok, "rows": rows}


# ---------------------------------------------------------------------------
# oscillatory integrals


def _bump_values(cutoff: Cutoff, X, Y):
    R2 = (X * X + Y * Y) / cutoff.radius ** 2
    base = np.maximum(0.0, 1.0 - R2)
    return base ** cutoff.order


def oscillatory_integral(p: PuiseuxPoly, cutoff: Cutoff, lam,
                         depth: int = 9, rtol: float = 1e-3,
                         atol: float = 1e-9, nodes: int = 10) -> complex:
    """Tensor Gauss-Legendre quadrature of integral of e^{i lam S} phi.

    Panel count doubles until two consecutive estimates agree to rtol
    (relative) or atol (absolute).  Non-convergence at the requested depth
    raises RuntimeError carrying the last estimate in .achieved.  Negative
    lam is evaluated by conjugation of the positive-lam integral.
    """
    lam = float(lam)
    if lam < 0.0:
        return oscillatory_integral(p, cutoff, -lam, depth, rtol, atol,
                                    nodes).conjugate()
    terms = _phase_terms(p, needs_negative_x=True)
    r = float(cutoff.radius)
    if r <= 0.0:
        raise ValueError("cutoff radius must be positive")
    gl_x, gl_w = np.polynomial.legendre.leggauss(int(nodes))

    def estimate(panels: int) -> complex:
        h = 2.0 * r / panels
        centers = -r + h * (np.arange(panels) + 0.5)
        X = (centers[:, None] + 0.5 * h * gl_x[None, :]).ravel()
        W = np.tile(0.5 * h * gl_w, panels)
        total = 0.0 + 0.0j
        chunk = max(1, 4_000_000 // len(X))
        for i in range(0, len(X), chunk):
            Xb = X[i:i + chunk][:, None]
            Yb = X[None, :]
            Xg, Yg = np.broadcast_arrays(Xb, Yb)
            phi = _bump_values(cutoff, Xg, Yg)
            S = _eval_phase(terms, Xg, Yg)
            vals = phi * np.exp(1j * lam * S)
            total += complex((W[i:i + chunk][:, None] * W[None, :] * vals).sum())
        return total

    prev = estimate(8)
    panels = 8
    for _ in range(int(depth)):
        panels *= 2
        cur = estimate(panels)
        if abs(cur - prev) <= max(rtol * abs(cur), atol):
            return cur
        prev = cur
    err = RuntimeError(
        f"oscillatory quadrature did not converge by {panels} panels; "
        f"last estimate {prev!r}")
    err.achieved = prev
    raise err


def decay_pairs(p: PuiseuxPoly, cutoff: Cutoff, lams: Sequence[float],
                **kw) -> List[Tuple[float, complex]]:
    return [(float(l), oscillatory_integral(p, cutoff, l, **kw)) for l in lams]


def decay_coefficient_cap(index, samples: Sequence[MeasureSample],
                          phi_sup: float = 1.0, safety: float = 3.0) -> float:
    """Predicted ceiling for |J| lam^j / (ln lam)^p from sublevel data.

    Transfers the growth constant sup_eps M(eps)/(eps^j |ln eps|^p) to the
    oscillatory side via the factor j*Gamma(j), padded by the stated safety
    multiple.
    """
    j = float(index.j)
    pp = int(index.p)
    best = 0.0
    for s in samples:
        denom = s.epsilon ** j * abs(math.log(s.epsilon)) ** pp
        if denom > 0.0:
            best = max(best, s.estimate / denom)
    return safety * j * math.gamma(j) * best * phi_sup


# ---------------------------------------------------------------------------
# CSV emitters


def measure_csv(samples: Sequence[MeasureSample]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["epsilon", "estimate", "stderr", "n", "method"])
    for s in samples:
        w.writerow([repr(s.epsilon), repr(s.estimate), repr(s.stderr),
                    s.n_samples, s.method])
    return buf.getvalue()


def decay_csv(rows: Sequence[Tuple[float, complex]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["lambda", "re", "im", "abs"])
    for lam, J in rows:
        w.writerow([repr(float(lam)), repr(J.real), repr(J.imag), repr(abs(J))])
    return buf.getvalue()
