"""Orbit censuses of GL(d, F_p) acting on subspaces of a lower p-series
layer of a free group.

Conjugacy classes are enumerated through module types (invertible types of
weighted size d), class sizes come from centralizer orders, and orbit
counts follow from the Cauchy-Frobenius lemma with exact division checks.
Small layers are also censused explicitly, orbit by orbit, giving per-orbit
stabilizer orders and the count of regular orbits.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Optional, Sequence

import numpy as np

from . import qcomb
from .errors import (InternalConsistencyError, InvalidParameterError,
                     ResourceLimitError)
from .fplinalg import (Mat, ModuleType, Partition, Subspace, batch_apply,
                       batch_canonicalize, batch_keys, check_prime,
                       irreducibles, poly_deg, subspace_dim_array)
from .freelie import LayerModule, layer_ranks, layer_representation
from .qcomb import Interval, galois
from .submodcount import centralizer_order, module_type, total_submodules

DEFAULT_CENSUS_BUDGET = 10**8


def gl_order(d: int, p: int) -> int:
    """Order of GL(d, F_p)."""
    check_prime(p)
    if d < 0:
        raise InvalidParameterError("d must be nonnegative")
    out = 1
    for i in range(d):
        out *= p ** d - p ** i
    return out


def primitive_root(p: int) -> int:
    check_prime(p)
    if p == 2:
        return 1
    for g in range(2, p):
        x, order = g, 1
        while x != 1:
            x = x * g % p
            order += 1
        if order == p - 1:
            return g
    raise InternalConsistencyError("no primitive root found")


def gl_generators(d: int, p: int) -> list[Mat]:
    """A generating set of GL(d, p): the cycle of elementary transvections
    I + E_{i,i+1}, the wrap-around I + E_{d-1,0}, and diag(zeta, 1, ..., 1)
    when p > 2 (for prime p these generate SL and the determinant fills in
    the rest)."""
    check_prime(p)
    if d < 1:
        raise InvalidParameterError("d must be positive")
    gens = []
    if d >= 2:
        for i in range(d - 1):
            rows = [[1 if a == b else 0 for b in range(d)] for a in range(d)]
            rows[i][i + 1] = 1
            gens.append(Mat(p, rows))
        rows = [[1 if a == b else 0 for b in range(d)] for a in range(d)]
        rows[d - 1][0] = 1
        gens.append(Mat(p, rows))
    if p > 2:
        rows = [[1 if a == b else 0 for b in range(d)] for a in range(d)]
        rows[0][0] = primitive_root(p)
        gens.append(Mat(p, rows))
    return gens


def group_closure(gens: Sequence[Mat], limit: int = 10**6) -> set[Mat]:
    """All products of the generators (breadth-first closure)."""
    if not gens:
        raise InvalidParameterError("need at least one generator")
    ident = Mat.identity(gens[0].p, gens[0].nrows)
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = a * g
                if b not in seen:
                    if len(seen) >= limit:
                        raise ResourceLimitError("group closure exceeds limit")
                    seen.add(b)
                    nxt.append(b)
        frontier = nxt
    return seen


# ---------------------------------------------------------------------------
# Conjugacy classes via module types

@dataclass(frozen=True)
class ConjClass:
    rep: Mat
    mtype: ModuleType
    size: int


@lru_cache(maxsize=None)
def _partitions_of(n: int) -> tuple[tuple[int, ...], ...]:
    if n == 0:
        return ((),)
    out = []

    def rec(remaining: int, maxpart: int, acc: tuple[int, ...]):
        if remaining == 0:
            out.append(acc)
            return
        for part in range(min(remaining, maxpart), 0, -1):
            rec(remaining - part, part, acc + (part,))

    rec(n, n, ())
    return tuple(out)


def module_types_of_dim(p: int, m: int, invertible_only: bool = True
                        ) -> Iterator[ModuleType]:
    """All module types of total dimension m over F_p; with
    invertible_only the factor t is excluded."""
    check_prime(p)
    irs = [f for f in irreducibles(p, m)
           if not (invertible_only and f == (0, 1))]

    def rec(i: int, remaining: int, acc: tuple):
        if remaining == 0:
            yield ModuleType.make(p, dict(acc))
            return
        # irreducibles are sorted by degree, so nothing further fits either
        if i == len(irs) or poly_deg(irs[i]) > remaining:
            return
        yield from rec(i + 1, remaining, acc)
        f = irs[i]
        deg = poly_deg(f)
        for size in range(1, remaining // deg + 1):
            for lam in _partitions_of(size):
                yield from rec(i + 1, remaining - deg * size,
                               acc + ((f, Partition(lam)),))

    yield from rec(0, m, ())


@lru_cache(maxsize=None)
def conjugacy_classes(d: int, p: int) -> tuple[ConjClass, ...]:
    """Conjugacy classes of GL(d, p): one block-companion representative
    per invertible module type, with sizes from centralizer orders.  The
    class equation (sizes summing to |GL|) is always verified."""
    order = gl_order(d, p)
    out = []
    for mtype in module_types_of_dim(p, d, invertible_only=True):
        cent = centralizer_order(mtype)
        size, rem = divmod(order, cent)
        if rem:
            raise InternalConsistencyError("centralizer order does not divide |GL|")
        out.append(ConjClass(rep=mtype.representative(), mtype=mtype, size=size))
    if sum(c.size for c in out) != order:
        raise InternalConsistencyError("class sizes do not sum to |GL|")
    return tuple(sorted(out, key=lambda c: (c.size, c.mtype.assignments)))


def conjugacy_classes_bruteforce(d: int, p: int, limit: int = 2 * 10**4
                                 ) -> list[tuple[Mat, int]]:
    """Oracle: partition all of GL(d, p) into conjugation orbits."""
    import itertools
    if p ** (d * d) > 4 * limit:
        raise ResourceLimitError("brute conjugation partition too large")
    elems = [Mat(p, rows) for rows in
             itertools.product(itertools.product(range(p), repeat=d), repeat=d)]
    elems = [g for g in elems if g.is_invertible]
    gens = gl_generators(d, p)
    conj = [(g, g.inverse()) for g in gens]
    seen: set[Mat] = set()
    out = []
    for g in elems:
        if g in seen:
            continue
        orbit = {g}
        frontier = [g]
        while frontier:
            nxt = []
            for x in frontier:
                for a, ainv in conj:
                    y = a * x * ainv
                    if y not in orbit:
                        orbit.add(y)
                        nxt.append(y)
            frontier = nxt
        seen |= orbit
        out.append((g, len(orbit)))
    return out


# ---------------------------------------------------------------------------
# Cauchy-Frobenius orbit counting

@lru_cache(maxsize=None)
def class_fixed_counts(d: int, n: int, p: int) -> tuple[tuple[int, int], ...]:
    """(class size, fixed subspace count on the layer) per conjugacy
    class."""
    module = layer_representation(d, n, p)
    out = []
    for cls in conjugacy_classes(d, p):
        action = module.rho(cls.rep)
        out.append((cls.size, total_submodules(module_type(action))))
    return tuple(out)


def orbit_count(d: int, n: int, p: int) -> int:
    """Number of GL(d, p)-orbits on subspaces of the degree-n layer, by the
    Cauchy-Frobenius lemma; the division by |GL| must be exact."""
    order = gl_order(d, p)
    total = sum(size * fixed for size, fixed in class_fixed_counts(d, n, p))
    count, rem = divmod(total, order)
    if rem:
        raise InternalConsistencyError(
            "Cauchy-Frobenius sum not divisible by |GL|")
    return count


# ---------------------------------------------------------------------------
# Explicit orbit enumeration

@dataclass(frozen=True)
class ExplicitCensus:
    d: int
    n: int
    p: int
    layer_dim: int
    total_subspaces: int
    orbit_count: int
    regular_count: int
    stabilizer_orders: tuple[tuple[int, int], ...]  # (stabilizer order, #orbits)

    def to_json(self) -> dict:
        return {
            "d": self.d, "n": self.n, "p": self.p,
            "layer_dim": self.layer_dim,
            "total_subspaces": str(self.total_subspaces),
            "orbit_count": str(self.orbit_count),
            "regular_count": str(self.regular_count),
            "stabilizer_orders": [[str(s), str(c)] for s, c in self.stabilizer_orders],
        }


def _gens_with_inverses(d: int, p: int) -> list[Mat]:
    gens = gl_generators(d, p)
    out = []
    for g in gens:
        for h in (g, g.inverse()):
            if h not in out:
                out.append(h)
    return out


def explicit_orbit_census(d: int, n: int, p: int,
                          budget: int = DEFAULT_CENSUS_BUDGET) -> ExplicitCensus:
    """Partition all subspaces of the degree-n layer into GL(d, p)-orbits.

    The budget caps the number of subspace-image operations performed,
    which is (number of subspaces) x (number of generators, with
    inverses).  Per-orbit stabilizer orders are |GL| / orbit size; both the
    divisibility and the total count are checked.
    """
    module = layer_representation(d, n, p)
    m = module.dim
    order = gl_order(d, p)
    gens = _gens_with_inverses(d, p)
    total = galois(m, p)
    if total * len(gens) > budget:
        raise ResourceLimitError(
            f"explicit census needs {total * len(gens)} subspace images, "
            f"budget is {budget}")
    rhos = [module.rho(g) for g in gens]

    orbit_total = 0
    regular_total = 0
    stab_hist: dict[int, int] = {}
    checked_total = 0
    for k in range(m + 1):
        arr = subspace_dim_array(p, m, k)
        count = arr.shape[0]
        checked_total += count
        if k == 0 or count == 1:
            sizes = np.array([1] * count, dtype=np.int64)
        else:
            keys = batch_keys(arr, p)
            sort_order = np.argsort(keys, kind="stable")
            sorted_keys = keys[sort_order]
            neighbors = []
            for rho in rhos:
                img = batch_canonicalize(batch_apply(arr, rho), p)
                ik = batch_keys(img, p)
                pos = np.searchsorted(sorted_keys, ik)
                if not (sorted_keys[pos] == ik).all():
                    raise InternalConsistencyError(
                        "image of a subspace is not a canonical subspace")
                neighbors.append(sort_order[pos].astype(np.int64))
            label = np.arange(count, dtype=np.int64)
            while True:
                new = label
                for nbr in neighbors:
                    new = np.minimum(new, new[nbr])
                new = np.minimum(new, new[new])
                if (new == label).all():
                    break
                label = new
            _, sizes = np.unique(label, return_counts=True)
        for size in sizes.tolist():
            stab, rem = divmod(order, size)
            if rem:
                raise InternalConsistencyError("orbit size does not divide |GL|")
            orbit_total += 1
            if stab == 1:
                regular_total += 1
            stab_hist[stab] = stab_hist.get(stab, 0) + 1
        if int(sizes.sum()) != count:
            raise InternalConsistencyError("orbit sizes do not cover dimension class")
    if checked_total != total:
        raise InternalConsistencyError("subspace enumeration incomplete")
    return ExplicitCensus(
        d=d, n=n, p=p, layer_dim=m, total_subspaces=total,
        orbit_count=orbit_total, regular_count=regular_total,
        stabilizer_orders=tuple(sorted(stab_hist.items())))


def explicit_orbit_census_bruteforce(d: int, n: int, p: int,
                                     budget: int = 10**5) -> ExplicitCensus:
    """Oracle: the same census with python sets of canonical subspaces."""
    from .fplinalg import enumerate_subspaces
    module = layer_representation(d, n, p)
    m = module.dim
    order = gl_order(d, p)
    gens = _gens_with_inverses(d, p)
    rhos = [module.rho(g) for g in gens]
    total = galois(m, p)
    if total * len(rhos) > budget:
        raise ResourceLimitError("brute explicit census too large")
    seen: set[Subspace] = set()
    orbit_total = regular_total = 0
    stab_hist: dict[int, int] = {}
    for w in enumerate_subspaces(p, m):
        if w in seen:
            continue
        orbit = {w}
        frontier = [w]
        while frontier:
            nxt = []
            for x in frontier:
                for rho in rhos:
                    y = x.image_under(rho)
                    if y not in orbit:
                        orbit.add(y)
                        nxt.append(y)
            frontier = nxt
        seen |= orbit
        stab, rem = divmod(order, len(orbit))
        if rem:
            raise InternalConsistencyError("orbit size does not divide |GL|")
        orbit_total += 1
        if stab == 1:
            regular_total += 1
        stab_hist[stab] = stab_hist.get(stab, 0) + 1
    if len(seen) != total:
        raise InternalConsistencyError("orbits do not cover all subspaces")
    return ExplicitCensus(
        d=d, n=n, p=p, layer_dim=m, total_subspaces=total,
        orbit_count=orbit_total, regular_count=regular_total,
        stabilizer_orders=tuple(sorted(stab_hist.items())))


def orbit_of_subspace(w: Subspace, actions: Sequence[Mat]) -> set[Subspace]:
    """Orbit of a single subspace under the group generated by the given
    layer actions."""
    orbit = {w}
    frontier = [w]
    while frontier:
        nxt = []
        for x in frontier:
            for rho in actions:
                y = x.image_under(rho)
                if y not in orbit:
                    orbit.add(y)
                    nxt.append(y)
        frontier = nxt
    return orbit


def stabilizer_order_of(w: Subspace, actions: Sequence[Mat], group_order: int) -> int:
    orbit = orbit_of_subspace(w, actions)
    stab, rem = divmod(group_order, len(orbit))
    if rem:
        raise InternalConsistencyError("orbit size does not divide group order")
    return stab


# ---------------------------------------------------------------------------
# Regular-orbit lower bound and the estimate theorems

def regular_lower_bound(c_count: int, orbit_cnt: int, order: int
                        ) -> tuple[Fraction, Fraction]:
    """Exact lower bound max(0, 2|C|/|GL| - |orbits|) for the number of
    regular orbits, and the induced lower bound for their proportion."""
    bound = 2 * Fraction(c_count, order) - orbit_cnt
    if bound < 0:
        bound = Fraction(0)
    return bound, bound / orbit_cnt


@dataclass(frozen=True)
class Est2Report:
    d: int
    n: int
    p: int
    applicable: bool
    informative: bool               # K p^x < 1, so part (b) says something
    ratio: Fraction                 # |orbits| |GL| / |C|, exact
    rhs: Interval                   # 1 + K p^x
    lower_ok: bool                  # 1 <= ratio, exact
    upper_certified: bool           # ratio <= rhs.lo
    upper_violated: bool            # ratio > rhs.hi
    ratio_b: Optional[Fraction]     # |orbits| / |regular orbits| when known
    b_upper_certified: Optional[bool]

    def to_json(self) -> dict:
        return {
            "d": self.d, "n": self.n, "p": self.p,
            "applicable": self.applicable,
            "informative": self.informative,
            "ratio": str(self.ratio),
            "rhs": self.rhs.to_json(),
            "lower_ok": self.lower_ok,
            "upper_certified": self.upper_certified,
            "upper_violated": self.upper_violated,
            "ratio_b": None if self.ratio_b is None else str(self.ratio_b),
            "b_upper_certified": self.b_upper_certified,
        }


def verify_est2(d: int, n: int, p: int,
                regular_count: Optional[int] = None,
                tol: Fraction = qcomb.DEFAULT_TOL) -> Est2Report:
    """Both inequalities of the orbit-ratio estimate at (d, n, p): the left
    sides exactly, the right sides as certified enclosures.  Part (b) is
    evaluated when the exact regular-orbit count is supplied and K p^x < 1
    (it is flagged uninformative otherwise)."""
    ranks = layer_ranks(d, n)
    tb = qcomb.theorem_bounds(d, n, p, ranks.cumulative, tol)
    order = gl_order(d, p)
    c_count = galois(ranks.d_i(n), p)
    orbits = orbit_count(d, n, p)
    ratio = Fraction(orbits * order, c_count)
    kpx = tb.K * qcomb.qpow(p, tb.x)
    informative = kpx.hi < 1
    rhs = tb.est2_rhs
    ratio_b = None
    b_upper = None
    if regular_count is not None and regular_count > 0:
        ratio_b = Fraction(orbits, regular_count)
        if informative:
            denom = Interval(1 - kpx.hi, 1 - kpx.lo)
            rhs_b = (1 + kpx) * denom.reciprocal()
            b_upper = ratio_b <= rhs_b.lo and ratio_b >= 1
    return Est2Report(
        d=d, n=n, p=p,
        applicable=tb.est2_applicable,
        informative=informative,
        ratio=ratio,
        rhs=rhs,
        lower_ok=ratio >= 1,
        upper_certified=ratio <= rhs.lo,
        upper_violated=ratio > rhs.hi,
        ratio_b=ratio_b,
        b_upper_certified=b_upper,
    )


# ---------------------------------------------------------------------------
# Census reports

@dataclass(frozen=True)
class CensusReport:
    d: int
    n: int
    p: int
    layer_dim: int
    c_count: int                    # |C| = G_{d_n}(p)
    orbit_count: int                # |orbits| (= |A| when n = 2)
    gl_order: int
    b_count: Optional[int]          # |orbits| - 1 at n = 2
    regular_count: Optional[int]    # exact, when an explicit census ran
    regular_lower: Fraction         # exact lower bound for regular orbits
    r_lower: Fraction               # lower bound for |regular| / |orbits|
    est2: Optional[Est2Report]

    def to_json(self) -> dict:
        return {
            "schema": "pgc/1",
            "d": self.d, "n": self.n, "p": self.p,
            "layer_dim": self.layer_dim,
            "C_count": str(self.c_count),
            "orbit_count": str(self.orbit_count),
            "GL_order": str(self.gl_order),
            "B_count": None if self.b_count is None else str(self.b_count),
            "regular_count": (None if self.regular_count is None
                              else str(self.regular_count)),
            "regular_lower": str(self.regular_lower),
            "r_lower": str(self.r_lower),
            "est2": None if self.est2 is None else self.est2.to_json(),
        }


def census_report(d: int, n: int, p: int, explicit: bool = False,
                  budget: int = DEFAULT_CENSUS_BUDGET) -> CensusReport:
    """Exact census of GL(d, p)-orbits on the degree-n layer.

    With explicit=True (and within budget) the orbits are enumerated one
    by one, giving the exact number of regular orbits; otherwise only the
    counting-argument lower bound for regular orbits is reported.
    """
    ranks = layer_ranks(d, n)
    m = ranks.d_i(n)
    order = gl_order(d, p)
    c_count = galois(m, p)
    orbits = orbit_count(d, n, p)
    regular = None
    if explicit:
        census = explicit_orbit_census(d, n, p, budget=budget)
        if census.orbit_count != orbits:
            raise InternalConsistencyError(
                "explicit census disagrees with Cauchy-Frobenius count")
        regular = census.regular_count
    reg_lower, ratio_lower = regular_lower_bound(c_count, orbits, order)
    if regular is not None:
        if Fraction(regular) < reg_lower:
            raise InternalConsistencyError(
                "explicit regular count below its proven lower bound")
        r_lower = Fraction(regular, orbits)
    else:
        r_lower = ratio_lower
    est2 = verify_est2(d, n, p, regular_count=regular)
    return CensusReport(
        d=d, n=n, p=p, layer_dim=m,
        c_count=c_count, orbit_count=orbits, gl_order=order,
        b_count=orbits - 1 if n == 2 else None,
        regular_count=regular,
        regular_lower=reg_lower,
        r_lower=r_lower,
        est2=est2,
    )


def proportion_report(d: int, p: int, explicit: bool = True,
                      budget: int = DEFAULT_CENSUS_BUDGET) -> CensusReport:
    """The n = 2 specialization: orbit classes are exactly the isomorphism
    classes of d-generated p-groups of lower p-length at most 2, and
    r_lower bounds from below the proportion of them whose automorphism
    group is a p-group."""
    try:
        return census_report(d, 2, p, explicit=explicit, budget=budget)
    except ResourceLimitError:
        return census_report(d, 2, p, explicit=False, budget=budget)
