"""Exact real-root isolation for univariate rational polynomials.

Pipeline: squarefree decomposition (Yun), cheap rational-root extraction,
then Sturm-sequence bisection for whatever is left.  Every root comes back
as a half-open rational interval (lo, hi] containing exactly one distinct
real root of the input, together with its multiplicity and, when the root
is rational, its exact value.

Polynomials enter either as y-only PuiseuxPoly values (the edge polynomials
produced upstream) or as dense coefficient sequences [c0, c1, ...].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .exact_poly import PuiseuxPoly, _as_fraction

Coeffs = Tuple[Fraction, ...]


# ---- dense coefficient helpers ----


def _trim(cs: Sequence[Fraction]) -> Coeffs:
    cs = list(cs)
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


def coeffs_of(q) -> Coeffs:
    """Dense [c0, c1, ...] from a y-only PuiseuxPoly or a sequence."""
    if isinstance(q, PuiseuxPoly):
        if any(a != 0 for (a, _b) in q.terms):
            raise ValueError("expected a polynomial in y alone")
        deg = q.y_degree()
        out = [Fraction(0)] * (deg + 1)
        for (_a, b), c in q.terms.items():
            out[b] = c
        return _trim(out)
    return _trim([_as_fraction(c) for c in q])


def poly_from_coeffs(cs: Sequence[Fraction]) -> PuiseuxPoly:
    return PuiseuxPoly({(Fraction(0), i): c for i, c in enumerate(cs) if c != 0})


def _eval(cs: Coeffs, t: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(cs):
        acc = acc * t + c
    return acc


def _deriv(cs: Coeffs) -> Coeffs:
    return _trim([i * c for i, c in enumerate(cs)][1:])


def _monic(cs: Coeffs) -> Coeffs:
    if not cs:
        return cs
    lc = cs[-1]
    return tuple(c / lc for c in cs)


def _divmod(num: Coeffs, den: Coeffs) -> Tuple[Coeffs, Coeffs]:
    if not den:
        raise ZeroDivisionError("polynomial division by zero")
    num_l = list(num)
    q = [Fraction(0)] * max(0, len(num) - len(den) + 1)
    for i in range(len(num) - len(den), -1, -1):
        c = num_l[i + len(den) - 1] / den[-1]
        q[i] = c
        if c != 0:
            for j, d in enumerate(den):
                num_l[i + j] -= c * d
    return _trim(q), _trim(num_l[: len(den) - 1])


def _gcd(a: Coeffs, b: Coeffs) -> Coeffs:
    while b:
        a, b = b, _divmod(a, b)[1]
    return _monic(a)


def _mul(a: Coeffs, b: Coeffs) -> Coeffs:
    if not a or not b:
        return tuple()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca == 0:
            continue
        for j, cb in enumerate(b):
            out[i + j] += ca * cb
    return _trim(out)


def _sub(a: Coeffs, b: Coeffs) -> Coeffs:
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else Fraction(0)) -
                  (b[i] if i < len(b) else Fraction(0)) for i in range(n)])


# ---- squarefree decomposition ----


def squarefree_factor(q) -> List[Tuple[PuiseuxPoly, int]]:
    """Yun decomposition q = lc * prod f_k^k with monic squarefree pairwise-coprime f_k.

    Returned in increasing multiplicity order; the leading coefficient of q
    is dropped (roots are unaffected).
    """
    cs = coeffs_of(q)
    if not cs:
        raise ValueError("cannot decompose the zero polynomial")
    cs = _monic(cs)
    if len(cs) == 1:
        return []
    d = _deriv(cs)
    u = _gcd(cs, d)
    v, _ = _divmod(cs, u)
    w, _ = _divmod(d, u)
    out: List[Tuple[PuiseuxPoly, int]] = []
    i = 1
    while len(v) > 1:
        z = _sub(w, _deriv(v))
        h = _gcd(v, z)
        if len(h) > 1:
            out.append((poly_from_coeffs(h), i))
        v, _ = _divmod(v, h)
        w, _ = _divmod(z, h)
        i += 1
    return out


# ---- Sturm machinery ----


def sturm_sequence(cs: Coeffs) -> List[Coeffs]:
    seq = [cs, _deriv(cs)]
    while seq[-1]:
        rem = _divmod(seq[-2], seq[-1])[1]
        if not rem:
            break
        seq.append(tuple(-c for c in rem))
    return [s for s in seq if s]


def _variations(seq: List[Coeffs], t: Fraction) -> int:
    signs = []
    for cs in seq:
        v = _eval(cs, t)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots_halfopen(cs, lo, hi) -> int:
    """Distinct real roots of cs in (lo, hi] (multiplicity ignored)."""
    cs = coeffs_of(cs)
    sf, _ = _divmod(cs, _gcd(cs, _deriv(cs))) if len(cs) > 2 else (cs, ())
    seq = sturm_sequence(_monic(sf))
    return _variations(seq, _as_fraction(lo)) - _variations(seq, _as_fraction(hi))


def cauchy_bound(cs: Coeffs) -> Fraction:
    """B with every real root in (-B, B]."""
    if len(cs) <= 1:
        return Fraction(1)
    lc = abs(cs[-1])
    return 1 + max(abs(c) / lc for c in cs[:-1])


# ---- rational root extraction ----


def _divisors(n: int) -> List[int]:
    n = abs(n)
    out = []
    i = 1
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            if i != n // i:
                out.append(n // i)
        i += 1
    return sorted(out)


_DIVISOR_GUARD = 10 ** 12


def _rational_roots(cs: Coeffs) -> List[Fraction]:
    """Rational roots of a squarefree polynomial (without multiplicity)."""
    found: List[Fraction] = []
    work = cs
    # deflate powers of y first: 0 is the easy rational root
    k = 0
    while work and work[0] == 0:
        work = work[1:]
        k += 1
    if k:
        found.append(Fraction(0))
    if len(work) <= 1:
        return found
    # integerize: multiply by the lcm of denominators
    denlcm = 1
    for c in work:
        denlcm = denlcm * c.denominator // math.gcd(denlcm, c.denominator)
    ics = [int(c * denlcm) for c in work]
    g = 0
    for c in ics:
        g = math.gcd(g, c)
    if g:
        ics = [c // g for c in ics]
    if abs(ics[0]) > _DIVISOR_GUARD or abs(ics[-1]) > _DIVISOR_GUARD:
        return found  # too big to factor cheaply; bisection will cope
    for p in _divisors(ics[0]):
        for q in _divisors(ics[-1]):
            for cand in (Fraction(p, q), Fraction(-p, q)):
                if cand not in found and _eval(work, cand) == 0:
                    found.append(cand)
    return found


# ---- isolation ----


@dataclass(frozen=True)
class IsolatedRoot:
    """One distinct real root: lo < root <= hi, with multiplicity in the input."""

    lo: Fraction
    hi: Fraction
    multiplicity: int
    exact_value: Optional[Fraction] = None
    factor: Coeffs = ()  # squarefree factor the root belongs to (for refinement)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def midpoint(self) -> Fraction:
        if self.exact_value is not None:
            return self.exact_value
        return (self.lo + self.hi) / 2

    def approx(self) -> float:
        return float(self.midpoint())

    def contains(self, t) -> bool:
        t = _as_fraction(t)
        return self.lo < t <= self.hi


def _safe_cut(cs: Coeffs, lo: Fraction, hi: Fraction) -> Fraction:
    """A point strictly inside (lo, hi) that is not a root of cs."""
    mid = (lo + hi) / 2
    step = (hi - lo) / 64
    while _eval(cs, mid) == 0:
        mid += step
        step /= 3
        if not lo < mid < hi:  # pragma: no cover - separation makes this unreachable
            raise AssertionError("could not find a root-free cut point")
    return mid


def _isolate_squarefree(cs: Coeffs, lo: Fraction, hi: Fraction,
                        seq: List[Coeffs]) -> List[Tuple[Fraction, Fraction]]:
    """Disjoint (lo, hi] intervals isolating every root of squarefree cs in (lo, hi]."""
    n = _variations(seq, lo) - _variations(seq, hi)
    if n == 0:
        return []
    if n == 1:
        return [(lo, hi)]
    cut = _safe_cut(cs, lo, hi)
    return _isolate_squarefree(cs, lo, cut, seq) + _isolate_squarefree(cs, cut, hi, seq)


def isolate_real_roots(q, domain: str = "all") -> List[IsolatedRoot]:
    """Distinct real roots of q with multiplicities, sorted by position.

    domain 'all' keeps every real root (including 0); 'positive' keeps roots > 0.
    """
    if domain not in ("all", "positive"):
        raise ValueError("domain must be 'all' or 'positive'")
    cs = coeffs_of(q)
    if not cs:
        raise ValueError("cannot isolate the roots of the zero polynomial")
    if len(cs) == 1:
        return []

    roots: List[IsolatedRoot] = []
    for f_poly, mult in squarefree_factor(cs):
        f = coeffs_of(f_poly)
        rationals = _rational_roots(f)
        g = f
        for r in rationals:
            g, rem = _divmod(g, (-r, Fraction(1)))
            assert not rem
        for r in rationals:
            roots.append(IsolatedRoot(lo=r - 1, hi=r, multiplicity=mult,
                                      exact_value=r, factor=f))
        if len(g) > 1:
            b = cauchy_bound(g)
            seq = sturm_sequence(g)
            for ilo, ihi in _isolate_squarefree(g, -b, b, seq):
                roots.append(IsolatedRoot(lo=ilo, hi=ihi, multiplicity=mult,
                                          exact_value=None, factor=g))

    # refine until intervals are pairwise disjoint and sign-decided at 0
    changed = True
    while changed:
        changed = False
        roots.sort(key=lambda r: (r.lo, r.hi))
        for i in range(len(roots) - 1):
            a, b = roots[i], roots[i + 1]
            if a.hi > b.lo:
                roots[i] = _halve(a)
                roots[i + 1] = _halve(b)
                changed = True
        for i, r in enumerate(roots):
            if r.exact_value is None and r.lo < 0 < r.hi and _eval(r.factor, Fraction(0)) != 0:
                roots[i] = _halve(r)
                changed = True

    if domain == "positive":
        roots = [r for r in roots if (r.exact_value is not None and r.exact_value > 0)
                 or (r.exact_value is None and r.lo >= 0)]
    return roots


def _halve(r: IsolatedRoot) -> IsolatedRoot:
    """Shrink the isolating interval by one bisection step."""
    if r.exact_value is not None:
        return replace(r, lo=r.exact_value - r.width / 2, hi=r.exact_value)
    mid = _safe_cut(r.factor, r.lo, r.hi)
    # squarefree factor changes sign across its single root in the interval
    if _eval(r.factor, r.lo) * _eval(r.factor, mid) < 0:
        return replace(r, hi=mid)
    return replace(r, lo=mid)


def refine_root(r: IsolatedRoot, width) -> IsolatedRoot:
    """Shrink the isolating interval until hi - lo <= width (no-op if already)."""
    width = _as_fraction(width)
    if width <= 0:
        raise ValueError("target width must be positive")
    while r.width > width:
        r = _halve(r)
    return r
