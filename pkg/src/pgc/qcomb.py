"""Exact q-combinatorics and certified rational enclosures.

Gaussian coefficients and Galois numbers are computed as exact integers.
The analytic constants C(q) = sum_r q^(-r^2) and D(q) = prod_j (1-q^-j)^-1
are returned as rational enclosures with certified tail bounds, so every
inequality in the bound suites can be decided without floating point.
Powers q^e with fractional e are likewise enclosed by scaled integer roots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence, Union

from .errors import (InternalConsistencyError, InvalidParameterError,
                     ResourceLimitError)

Rat = Union[int, Fraction]

DEFAULT_TOL = Fraction(1, 10**12)

# Scale 2^-96 used when enclosing irrational roots; far below every gap
# the bound suites exercise.
_ROOT_BITS = 96

_TERM_BUDGET = 10**6


class Interval:
    """Closed interval with exact rational endpoints."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: Rat, hi: Rat):
        lo, hi = Fraction(lo), Fraction(hi)
        if lo > hi:
            raise InvalidParameterError(f"empty interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    @staticmethod
    def point(x: Rat) -> "Interval":
        x = Fraction(x)
        return Interval(x, x)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __add__(self, other):
        if isinstance(other, Interval):
            return Interval(self.lo + other.lo, self.hi + other.hi)
        return Interval(self.lo + other, self.hi + other)

    __radd__ = __add__

    def __mul__(self, other):
        if isinstance(other, Interval):
            prods = (self.lo * other.lo, self.lo * other.hi,
                     self.hi * other.lo, self.hi * other.hi)
            return Interval(min(prods), max(prods))
        other = Fraction(other)
        if other >= 0:
            return Interval(self.lo * other, self.hi * other)
        return Interval(self.hi * other, self.lo * other)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Interval":
        if k < 0:
            return self.reciprocal() ** (-k)
        out = Interval.point(1)
        for _ in range(k):
            out = out * self
        return out

    def reciprocal(self) -> "Interval":
        if self.lo <= 0 <= self.hi:
            raise InvalidParameterError("reciprocal of interval containing 0")
        return Interval(1 / self.hi, 1 / self.lo)

    def certainly_le(self, other: Union["Interval", Rat]) -> bool:
        hi = other.lo if isinstance(other, Interval) else Fraction(other)
        return self.hi <= hi

    def certainly_ge(self, other: Union["Interval", Rat]) -> bool:
        lo = other.hi if isinstance(other, Interval) else Fraction(other)
        return self.lo >= lo

    def contains(self, x: Rat) -> bool:
        return self.lo <= Fraction(x) <= self.hi

    def to_json(self) -> dict:
        return {"lo": str(self.lo), "hi": str(self.hi)}

    def __repr__(self):
        if self.is_point:
            return f"Interval({self.lo})"
        return f"Interval({self.lo}, {self.hi})"

    def __eq__(self, other):
        return (isinstance(other, Interval)
                and self.lo == other.lo and self.hi == other.hi)

    def __hash__(self):
        return hash((self.lo, self.hi))


def iroot(n: int, k: int) -> int:
    """Floor of the k-th root of a nonnegative integer."""
    if n < 0 or k < 1:
        raise InvalidParameterError("iroot needs n >= 0, k >= 1")
    if n == 0 or k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def _root_interval(x: Fraction, k: int) -> Interval:
    """Enclosure of x^(1/k) for rational x > 0."""
    if x <= 0:
        raise InvalidParameterError("root of nonpositive value")
    if k == 1:
        return Interval.point(x)
    scale = 1 << _ROOT_BITS
    sk = scale ** k
    n_lo = (x.numerator * sk) // x.denominator
    t = iroot(n_lo, k)
    if t ** k * x.denominator == x.numerator * sk:
        return Interval.point(Fraction(t, scale))
    n_hi = -((-x.numerator * sk) // x.denominator)
    u = iroot(n_hi, k)
    return Interval(Fraction(t, scale), Fraction(u + 1, scale))


def qpow(q: Rat, e: Rat) -> Interval:
    """Enclosure of q^e for rational q > 1 and rational e.

    Exact (a point interval) whenever e is an integer or q^e happens to
    be rational.
    """
    q = Fraction(q)
    if q <= 1:
        raise InvalidParameterError("qpow needs base > 1")
    e = Fraction(e)
    if e == 0:
        return Interval.point(1)
    neg = e < 0
    e = abs(e)
    base = q ** e.numerator
    out = _root_interval(base, e.denominator)
    return out.reciprocal() if neg else out


def log_interval(x: Rat, p: int, den: int = 256) -> Interval:
    """Enclosure of log_p(x) with endpoints of denominator den, x > 0."""
    x = Fraction(x)
    if x <= 0 or p < 2:
        raise InvalidParameterError("log_interval needs x > 0, p >= 2")
    y = x ** den
    # floor(log_p y): float estimate from bit lengths, then exact adjustment
    bits = y.numerator.bit_length() - y.denominator.bit_length()
    a = int(bits * 0.6931471805599453 / math.log(p))
    pa = Fraction(p) ** a
    while pa * p <= y:
        pa *= p
        a += 1
    while pa > y:
        pa /= p
        a -= 1
    if pa == y:
        return Interval.point(Fraction(a, den))
    return Interval(Fraction(a, den), Fraction(a + 1, den))


def log_interval_over(iv: Interval, p: int, den: int = 256) -> Interval:
    """Enclosure of log_p over an interval of positive rationals."""
    return Interval(log_interval(iv.lo, p, den).lo, log_interval(iv.hi, p, den).hi)


# ---------------------------------------------------------------------------
# Gaussian coefficients and Galois numbers


def gauss(n: int, k: int, q: int) -> int:
    """Gaussian coefficient [n choose k]_q, the number of k-dimensional
    subspaces of an n-dimensional space over a field with q elements."""
    if q < 2:
        raise InvalidParameterError("q must be at least 2")
    if n < 0:
        raise InvalidParameterError("n must be nonnegative")
    if k < 0 or k > n:
        return 0
    num = 1
    den = 1
    for i in range(k):
        num *= q ** n - q ** i
        den *= q ** k - q ** i
    quot, rem = divmod(num, den)
    if rem:
        raise InternalConsistencyError("gaussian coefficient not integral")
    return quot


def galois(n: int, q: int) -> int:
    """Galois number G_n(q): total number of subspaces of F_q^n."""
    if q < 2:
        raise InvalidParameterError("q must be at least 2")
    if n < 0:
        raise InvalidParameterError("n must be nonnegative")
    return sum(gauss(n, k, q) for k in range(n + 1))


# ---------------------------------------------------------------------------
# Theta constants C(q), D(q)


@dataclass(frozen=True)
class BoundConstants:
    """Certified enclosures of C(q), D(q) and of eps = log_q(C(q)D(q))."""

    q: Fraction
    c: Interval
    d: Interval
    epsilon_hi: Optional[Fraction]
    tol: Fraction

    @property
    def cd(self) -> Interval:
        return self.c * self.d

    def to_json(self) -> dict:
        return {
            "q": str(self.q),
            "C": self.c.to_json(),
            "D": self.d.to_json(),
            "epsilon_hi": None if self.epsilon_hi is None else str(self.epsilon_hi),
            "tol": str(self.tol),
        }


def theta_c(q: Rat, tol: Rat = DEFAULT_TOL) -> Interval:
    """Enclosure of C(q) = sum_{r in Z} q^(-r^2) for rational q > 1."""
    q = Fraction(q)
    tol = Fraction(tol)
    if q <= 1 or tol <= 0:
        raise InvalidParameterError("theta_c needs q > 1, tol > 0")
    total = Fraction(1)
    r = 0
    while True:
        r += 1
        total += 2 / q ** (r * r)
        # terms past r shrink at least geometrically with ratio q^-(2r+1)
        ratio = 1 / q ** (2 * r + 1)
        tail = (2 / q ** ((r + 1) ** 2)) / (1 - ratio)
        if tail <= tol:
            return Interval(total, total + tail)


def theta_d(q: Rat, tol: Rat = DEFAULT_TOL) -> Interval:
    """Enclosure of D(q) = prod_{j>=1} (1 - q^-j)^-1 for rational q > 1."""
    q = Fraction(q)
    tol = Fraction(tol)
    if q <= 1 or tol <= 0:
        raise InvalidParameterError("theta_d needs q > 1, tol > 0")
    prod = Fraction(1)
    j = 0
    while True:
        j += 1
        prod /= 1 - 1 / q ** j
        # -log(1-x) <= 2x for x <= 1/2, so the log of the remaining product
        # is at most eps = 2 * sum_{i>j} q^-i; then e^eps <= 1 + 2 eps.
        if q ** (j + 1) < 2:
            continue
        eps = 2 * (1 / q ** j) / (q - 1)
        if eps > Fraction(1, 2):
            continue
        width = prod * 2 * eps
        if width <= tol:
            return Interval(prod, prod * (1 + 2 * eps))


def _log_upper(x: Fraction, p: Fraction, den: int = 256) -> Fraction:
    y = x ** den
    a = 0
    v = Fraction(1)
    while v < y:
        v *= p
        a += 1
    return Fraction(a, den)


@lru_cache(maxsize=None)
def _theta_constants_cached(q: Fraction, tol: Fraction) -> BoundConstants:
    c = theta_c(q, tol)
    d = theta_d(q, tol)
    eps_hi = _log_upper(c.hi * d.hi, q) if q >= 2 else None
    return BoundConstants(q=q, c=c, d=d, epsilon_hi=eps_hi, tol=tol)


def theta_constants(q: Rat, tol: Rat = DEFAULT_TOL) -> BoundConstants:
    """Enclosures of C(q) and D(q) with width at most tol."""
    q = Fraction(q)
    tol = Fraction(tol)
    if q < 2:
        raise InvalidParameterError("theta_constants needs q >= 2")
    if tol <= 0:
        raise InvalidParameterError("tol must be positive")
    return _theta_constants_cached(q, tol)


def theta_c_over(base: Interval, tol: Rat = DEFAULT_TOL) -> Interval:
    """Enclosure of C over an interval of bases; C is decreasing."""
    hi = theta_c(base.lo, tol).hi
    lo = theta_c(base.hi, tol).lo
    return Interval(lo, hi)


# ---------------------------------------------------------------------------
# Quadratic-sum bounds


@dataclass(frozen=True)
class PolyBoundResult:
    exact: Interval        # sum_{t<=r<=u} q^f(r); a point when all f(r) integral
    bound: Interval        # C(q^a) * q^(max f on [t,u])
    argmax: Fraction       # real maximizer of f clamped to [t, u]


def polybound(a: Rat, b: Rat, c: Rat, t: int, u: int, q: int,
              tol: Rat = DEFAULT_TOL) -> PolyBoundResult:
    """Sum of q^f(r) over integers t <= r <= u for f(x) = -ax^2 + bx + c,
    together with the theta-function upper bound C(q^a) q^(max f)."""
    a, b, c = Fraction(a), Fraction(b), Fraction(c)
    if a <= 0:
        raise InvalidParameterError("leading coefficient a must be positive")
    if q < 2:
        raise InvalidParameterError("q must be at least 2")
    if t > u:
        raise InvalidParameterError("need t <= u")
    if u - t + 1 > _TERM_BUDGET:
        raise ResourceLimitError("too many terms in polybound sum")

    def f(x: Fraction) -> Fraction:
        return -a * x * x + b * x + c

    exact = Interval.point(0)
    for r in range(t, u + 1):
        exact = exact + qpow(q, f(Fraction(r)))
    y = min(max(b / (2 * a), Fraction(t)), Fraction(u))
    cqa = theta_c_over(qpow(q, a), tol)
    bound = cqa * qpow(q, f(y))
    return PolyBoundResult(exact=exact, bound=bound, argmax=y)


def quadbound(n: int, s: int, eps: Rat = 0) -> tuple[int, Fraction]:
    """Upper bounds (n-s+1)^2 + (s-1) for a sum of squares of a composition
    of n into s positive parts, and (n-1)^2 + 1 + 2 eps for the eps-shifted
    variant."""
    if s < 1 or n < 1:
        raise InvalidParameterError("need n >= 1 and s >= 1")
    if s > n:
        raise InvalidParameterError("a composition needs s <= n")
    eps = Fraction(eps)
    if eps < 0:
        raise InvalidParameterError("eps must be nonnegative")
    bound1 = (n - s + 1) ** 2 + (s - 1)
    bound2 = Fraction((n - 1) ** 2 + 1) + 2 * eps
    return bound1, bound2


# ---------------------------------------------------------------------------
# Products of Gaussian-coefficient bounds (the layered sums A_i)


class _SqrtVal:
    """Exact value a + b*sqrt(p) with rational a, b."""

    __slots__ = ("a", "b", "p")

    def __init__(self, p: int, a: Rat = 0, b: Rat = 0):
        self.p = p
        self.a = Fraction(a)
        self.b = Fraction(b)

    def add(self, other: "_SqrtVal") -> "_SqrtVal":
        return _SqrtVal(self.p, self.a + other.a, self.b + other.b)

    def mul_half_power(self, k2: int) -> "_SqrtVal":
        """Multiply by p^(k2/2) for an integer k2."""
        m, odd = divmod(k2, 2)
        scale = Fraction(self.p) ** m
        a, b = self.a * scale, self.b * scale
        if odd:
            a, b = b * self.p, a
        return _SqrtVal(self.p, a, b)

    def to_interval(self) -> Interval:
        if self.b == 0:
            return Interval.point(self.a)
        root = _root_interval(Fraction(self.p), 2)
        return Interval.point(self.a) + root * self.b


def _half_power_term(p: int, num2: int) -> _SqrtVal:
    """p^(num2/2) as an exact a + b*sqrt(p)."""
    return _SqrtVal(p, 1, 0).mul_half_power(num2)


def gaussprods_A(i: int, u_i: int, dcum: Sequence[int], p: int,
                 tol: Rat = DEFAULT_TOL) -> tuple[Interval, Optional[Interval]]:
    """The layered sum A_i(u_i) over admissible tuples (u_{i+1},...,u_n),
    evaluated exactly, and its closed-form upper bound (None when i = n-1,
    where the closed form is not defined)."""
    n = len(dcum)
    d = dcum[0]
    if not 1 <= i <= n - 1:
        raise InvalidParameterError("need 1 <= i <= n-1")
    if not 0 <= u_i <= dcum[i - 1]:
        raise InvalidParameterError("u_i out of range")
    if p < 2:
        raise InvalidParameterError("p must be at least 2")

    def bounds_for(j: int) -> range:
        # index ranges: free levels 0..d_j, then 1..d_{n-1}, then 2..d_n
        dj = dcum[j - 1]
        if j == n:
            return range(2, dj + 1)
        if j == n - 1:
            return range(1, dj + 1)
        return range(0, dj + 1)

    work = 1
    for j in range(i + 1, n + 1):
        work *= len(bounds_for(j))
        if work > _TERM_BUDGET:
            raise ResourceLimitError("gaussprods_A index range too large")

    memo: dict[tuple[int, int], _SqrtVal] = {}

    def a_level(j: int, uj: int) -> _SqrtVal:
        # A_j(u_j) = sum over u_{j+1} of p^-(u_{j+1}-d_{j+1})(u_{j+1}-u_j/2) A_{j+1}
        if j == n:
            return _SqrtVal(p, 1, 0)
        key = (j, uj)
        if key in memo:
            return memo[key]
        total = _SqrtVal(p, 0, 0)
        dj1 = dcum[j]
        for u_next in bounds_for(j + 1):
            num2 = -(u_next - dj1) * (2 * u_next - uj)  # doubled exponent
            total = total.add(a_level(j + 1, u_next).mul_half_power(num2))
        memo[key] = total
        return total

    exact = a_level(i, u_i).to_interval()

    bound = None
    if i <= n - 2:
        dn, dn1, di1 = dcum[n - 1], dcum[n - 2], dcum[i]
        expo = (Fraction(-15, 16) + Fraction(dn * dn, 4) + dn1 - Fraction(dn, 4)
                - Fraction(u_i * (di1 - 1), 2))
        cpow = theta_c(p, tol) ** (n - i)
        bound = cpow * qpow(p, expo)
    return exact, bound


def gaussprods_hypotheses_hold(d: int, n: int) -> bool:
    """Parameter regime in which the A_i closed-form bound is asserted."""
    return (n >= 3 and d >= 6) or (n >= 10 and d >= 5)


# ---------------------------------------------------------------------------
# Right-hand sides of the two estimate theorems


@dataclass(frozen=True)
class TheoremBounds:
    d: int
    n: int
    p: int
    est1_applicable: bool
    est1_rhs: Optional[Interval]
    est1_rhs_quarter_variant: Optional[Interval]
    est2_applicable: bool
    K: Interval
    x: Fraction
    est2_rhs: Interval

    def to_json(self) -> dict:
        return {
            "d": self.d, "n": self.n, "p": self.p,
            "est1_applicable": self.est1_applicable,
            "est1_rhs": None if self.est1_rhs is None else self.est1_rhs.to_json(),
            "est1_rhs_quarter_variant": (
                None if self.est1_rhs_quarter_variant is None
                else self.est1_rhs_quarter_variant.to_json()),
            "est2_applicable": self.est2_applicable,
            "K": self.K.to_json(),
            "x": str(self.x),
            "est2_rhs": self.est2_rhs.to_json(),
        }


def theorem_bounds(d: int, n: int, p: int, dcum: Sequence[int],
                   tol: Rat = DEFAULT_TOL) -> TheoremBounds:
    """Constants for the two orbit-ratio estimates at (d, n, p).

    dcum must be the cumulative layer ranks d_1..d_n.  Values are computed
    whenever the formulas make sense; applicability of each theorem's
    hypotheses is flagged separately, never raised.
    """
    if len(dcum) != n or n < 1:
        raise InvalidParameterError("dcum must list d_1..d_n")
    consts = theta_constants(p, tol)
    c, dq = consts.c, consts.d

    est1_rhs = est1_var = None
    if n >= 2:
        e1 = dcum[n - 2] - Fraction(dcum[n - 1], 4) + d * d
        factor = c ** (n - 1) * dq ** (n - 2)
        est1_rhs = 1 + factor * qpow(p, e1)
        # a variant with an extra +1/4 in the exponent circulates alongside
        # the stated form; both are exposed, neither is silently chosen
        est1_var = 1 + factor * qpow(p, e1 + Fraction(1, 4))
    est1_applicable = gaussprods_hypotheses_hold(d, n)

    if n == 2:
        k = c ** 5 * dq ** 4 * qpow(p, Fraction(17, 4))
        x = Fraction(-d)
    else:
        k = c ** 2 * dq * qpow(p, Fraction(3, 4))
        x = Fraction(d * d) - Fraction(dcum[n - 1], 2)
    est2_applicable = (n == 2 and d >= 10) or (n >= 3 and d >= 3)
    est2_rhs = 1 + k * qpow(p, x)

    return TheoremBounds(
        d=d, n=n, p=p,
        est1_applicable=est1_applicable,
        est1_rhs=est1_rhs,
        est1_rhs_quarter_variant=est1_var,
        est2_applicable=est2_applicable,
        K=k, x=x, est2_rhs=est2_rhs,
    )
