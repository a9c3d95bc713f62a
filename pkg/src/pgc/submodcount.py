"""Exact counting of submodules of finite F_p<g>-modules.

The closed-form count of submodules of fixed type inside a module of fixed
type over a discrete valuation ring, totals via the primary decomposition,
centralizer orders for conjugacy-class sizes, and the two logarithmic
bounds on the total submodule count (the general non-scalar bound and the
stronger bound for the degree-2 layer module).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Optional

import numpy as np

from . import qcomb
from .errors import InternalConsistencyError, InvalidParameterError
from .fplinalg import (Mat, ModuleType, Partition, batch_apply,
                       batch_canonicalize, batch_keys, enumerate_subspaces,
                       is_invariant, module_type, poly_deg, scalar_of,
                       subspace_dim_array)
from .qcomb import Interval, log_interval, log_interval_over, theta_constants


def count_by_type(q: int, alpha: Partition, beta: Partition) -> int:
    """Number of submodules of type beta' in a module of type alpha' over a
    discrete valuation ring with residue field of order q.

    The inputs are the unconjugated partitions alpha and beta, exactly as
    the product formula consumes them; beta must be contained in alpha.
    """
    if q < 2:
        raise InvalidParameterError("residue field order must be >= 2")
    if not alpha.contains(beta):
        raise InvalidParameterError("beta must be contained in alpha")
    out = 1
    r = len(beta)
    for i in range(1, r + 1):
        b_i, b_next = beta.part(i), beta.part(i + 1)
        a_i = alpha.part(i)
        out *= qcomb.gauss(a_i - b_next, b_i - b_next, q)
        out *= q ** (b_next * (a_i - b_i))
    return out


def subpartitions(alpha: Partition) -> Iterator[Partition]:
    """All partitions beta contained in alpha."""
    def rec(i: int, prev: int, acc: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        yield acc
        if i > len(alpha.parts):
            return
        for v in range(1, min(alpha.part(i), prev) + 1):
            yield from rec(i + 1, v, acc + (v,))

    if not alpha.parts:
        yield alpha
        return
    for parts in rec(1, alpha.parts[0], ()):
        yield Partition(parts)


def total_submodules(mu: ModuleType) -> int:
    """Total number of submodules of a module of the given type; the
    product over primary components of the sum over contained types."""
    out = 1
    for f, mu_f in mu.assignments:
        q = mu.p ** poly_deg(f)
        alpha = mu_f.conjugate()
        out *= sum(count_by_type(q, alpha, beta) for beta in subpartitions(alpha))
    return out


def fixed_subspace_count(g: Mat) -> int:
    """Number of subspaces of F_p^n fixed by g (g-submodules)."""
    return total_submodules(module_type(g))


def fixed_subspace_count_bruteforce(g: Mat, budget: int = 10**6) -> int:
    """Oracle: test every subspace for invariance."""
    return sum(1 for w in enumerate_subspaces(g.p, g.nrows, budget=budget)
               if is_invariant(g, w))


@lru_cache(maxsize=8)
def _subspace_batches(p: int, m: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    out = []
    for k in range(m + 1):
        arr = subspace_dim_array(p, m, k)
        out.append((arr, batch_keys(arr, p)))
    return tuple(out)


def fixed_subspace_count_batched(g: Mat) -> int:
    """Oracle equivalent to the brute-force count, vectorized over the full
    subspace list of F_p^m (cached per (p, m))."""
    p, m = g.p, g.nrows
    total = 0
    for arr, keys in _subspace_batches(p, m):
        if arr.shape[0] == 0:
            continue
        if arr.shape[1] == 0:
            total += 1
            continue
        img = batch_canonicalize(batch_apply(arr, g), p)
        total += int((batch_keys(img, p) == keys).sum())
    return total


# ---------------------------------------------------------------------------
# Centralizer orders

def aut_order_of_type(lam: Partition, q: int) -> int:
    """Order of the automorphism group of a finite module of type lam over
    a discrete valuation ring with residue field of order q."""
    if q < 2:
        raise InvalidParameterError("residue field order must be >= 2")
    conj = lam.conjugate().parts
    out = Fraction(q) ** sum(c * c for c in conj)
    mults = {}
    for part in lam.parts:
        mults[part] = mults.get(part, 0) + 1
    for m in mults.values():
        for k in range(1, m + 1):
            out *= 1 - Fraction(1, q ** k)
    if out.denominator != 1:
        raise InternalConsistencyError("automorphism order not integral")
    return int(out)


def centralizer_order(mu: ModuleType) -> int:
    """Order of the centralizer in GL of a matrix with the given module
    type; the product of the per-component module automorphism counts."""
    if not mu.is_invertible:
        raise InvalidParameterError("centralizer_order needs an invertible type")
    out = 1
    for f, mu_f in mu.assignments:
        out *= aut_order_of_type(mu_f, mu.p ** poly_deg(f))
    return out


def centralizer_order_bruteforce(g: Mat, gl_elements) -> int:
    """Oracle: count commuting elements among an explicit list of
    invertible matrices."""
    return sum(1 for h in gl_elements if h * g == g * h)


# ---------------------------------------------------------------------------
# Bounds on the total submodule count S_M

@dataclass(frozen=True)
class BoundReport:
    m: int
    mode: str                       # "scalar", "general", or "layer2"
    scalar: Optional[int]
    s_m: int
    log_p_s_m: Interval
    bound: Optional[Interval]       # enclosure of the bound on log_p S_M
    satisfied: Optional[bool]

    def to_json(self) -> dict:
        return {
            "m": self.m, "mode": self.mode, "scalar": self.scalar,
            "S_M": str(self.s_m),
            "log_p_S_M": self.log_p_s_m.to_json(),
            "bound": None if self.bound is None else self.bound.to_json(),
            "satisfied": self.satisfied,
        }


def bound_checks(action: Mat, layer2: bool = False,
                 tol: Fraction = qcomb.DEFAULT_TOL) -> BoundReport:
    """Exact S_M for the module on which `action` acts, compared against
    the applicable logarithmic bound.

    With layer2=False the general bound (m^2-2m+2)/4 + 2 eps applies to any
    non-scalar action.  With layer2=True the action must be the degree-2
    layer module of a non-identity g (an extension of the exterior square
    by the natural module) and the stronger case-split bound applies.
    Scalar actions are reported with S_M = G_m(p) and no bound.

    All comparisons are exact: both sides are raised to the fourth power
    and the upper enclosure of C(p)D(p) is used for the bound side.
    """
    p = action.p
    m = action.nrows
    s_m = fixed_subspace_count(action)
    log_s = log_interval(s_m, p)
    c = scalar_of(action)
    consts = theta_constants(p, tol)
    cd = consts.cd
    eps_iv = log_interval_over(cd, p)

    if c is not None:
        ok = s_m == qcomb.galois(m, p)
        if not ok:
            raise InternalConsistencyError("scalar action with S_M != Galois number")
        return BoundReport(m=m, mode="scalar", scalar=c, s_m=s_m,
                           log_p_s_m=log_s, bound=None, satisfied=ok)

    if not layer2:
        # log_p S_M <= (m^2 - 2m + 2)/4 + 2 eps, i.e.
        # S_M^4 <= p^(m^2-2m+2) (C D)^8
        expo = m * m - 2 * m + 2
        rhs = Fraction(p) ** expo * cd.hi ** 8
        satisfied = Fraction(s_m) ** 4 <= rhs
        bound = Interval.point(Fraction(expo, 4)) + eps_iv * 2
        return BoundReport(m=m, mode="general", scalar=None, s_m=s_m,
                           log_p_s_m=log_s, bound=bound, satisfied=satisfied)

    # stronger bound for the degree-2 layer: log_p S_M <= (m-4)^2/4 + C
    expo = (m - 4) ** 2
    if m <= 45:
        # C = eps + 2m - 4
        rhs = Fraction(p) ** (expo + 8 * m - 16) * cd.hi ** 4
        bound = Interval.point(Fraction(expo, 4) + 2 * m - 4) + eps_iv
    else:
        # C = 5 eps + 4
        rhs = Fraction(p) ** (expo + 16) * cd.hi ** 20
        bound = Interval.point(Fraction(expo, 4) + 4) + eps_iv * 5
    satisfied = Fraction(s_m) ** 4 <= rhs
    return BoundReport(m=m, mode="layer2", scalar=None, s_m=s_m,
                       log_p_s_m=log_s, bound=bound, satisfied=satisfied)
