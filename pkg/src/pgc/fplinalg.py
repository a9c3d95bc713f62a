"""Exact linear algebra over prime fields.

Canonical subspaces (reduced row echelon bases), subspace enumeration,
polynomial factorization by trial division, and the classification of a
square matrix as a module over F_p<g> by its type (one partition per
irreducible factor of the characteristic polynomial).

Matrices act on column vectors; the columns of a matrix are the images of
the basis vectors.  Subspace bases are stored as rows.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from . import qcomb
from .errors import (InternalConsistencyError, InvalidParameterError,
                     ResourceLimitError)

DEFAULT_ENUM_BUDGET = 10**7


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def check_prime(p: int) -> int:
    if not isinstance(p, int) or not is_prime(p):
        raise InvalidParameterError(f"{p!r} is not a prime")
    return p


@lru_cache(maxsize=None)
def inverse_table(p: int) -> tuple[int, ...]:
    """Multiplicative inverses mod p, with 0 mapped to 0."""
    return (0,) + tuple(pow(a, p - 2, p) for a in range(1, p))


def rref(rows: Iterable[Sequence[int]], ncols: int, p: int,
         ) -> tuple[tuple[tuple[int, ...], ...], tuple[int, ...]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    inv = inverse_table(p)
    work = [list(int(x) % p for x in row) for row in rows]
    for row in work:
        if len(row) != ncols:
            raise InvalidParameterError("row length does not match ambient")
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = None
        for i in range(r, len(work)):
            if work[i][c]:
                pivot = i
                break
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        scale = inv[work[r][c]]
        if scale != 1:
            work[r] = [(scale * x) % p for x in work[r]]
        prow = work[r]
        for i in range(len(work)):
            if i != r and work[i][c]:
                f = work[i][c]
                work[i] = [(x - f * y) % p for x, y in zip(work[i], prow)]
        pivots.append(c)
        r += 1
        if r == len(work):
            break
    return tuple(tuple(row) for row in work[:r]), tuple(pivots)


class Mat:
    """Immutable matrix over F_p."""

    __slots__ = ("p", "rows")

    def __init__(self, p: int, rows: Iterable[Sequence[int]]):
        check_prime(p)
        self.p = p
        try:
            self.rows = tuple(tuple(int(x) % p for x in row) for row in rows)
        except (TypeError, ValueError) as exc:
            raise InvalidParameterError("entries must reduce mod p") from exc
        if self.rows:
            w = len(self.rows[0])
            if any(len(r) != w for r in self.rows):
                raise InvalidParameterError("ragged matrix")

    @staticmethod
    def identity(p: int, n: int) -> "Mat":
        return Mat(p, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @staticmethod
    def zero(p: int, r: int, c: int) -> "Mat":
        return Mat(p, [[0] * c for _ in range(r)])

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    @property
    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def __mul__(self, other: "Mat") -> "Mat":
        if self.p != other.p or self.ncols != other.nrows:
            raise InvalidParameterError("matrix shapes/fields do not match")
        p = self.p
        bt = tuple(zip(*other.rows))
        return Mat(p, [[sum(a * b for a, b in zip(row, col)) % p for col in bt]
                       for row in self.rows])

    def __add__(self, other: "Mat") -> "Mat":
        if self.p != other.p or self.nrows != other.nrows or self.ncols != other.ncols:
            raise InvalidParameterError("matrix shapes/fields do not match")
        p = self.p
        return Mat(p, [[(a + b) % p for a, b in zip(r1, r2)]
                       for r1, r2 in zip(self.rows, other.rows)])

    def __sub__(self, other: "Mat") -> "Mat":
        return self + other.scale(-1)

    def scale(self, c: int) -> "Mat":
        p = self.p
        c %= p
        return Mat(p, [[(c * x) % p for x in row] for row in self.rows])

    def __pow__(self, k: int) -> "Mat":
        if not self.is_square or k < 0:
            raise InvalidParameterError("power needs a square matrix, k >= 0")
        out = Mat.identity(self.p, self.nrows)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def apply(self, vec: Sequence[int]) -> tuple[int, ...]:
        """Image of a column vector."""
        p = self.p
        if len(vec) != self.ncols:
            raise InvalidParameterError("vector length mismatch")
        return tuple(sum(a * v for a, v in zip(row, vec)) % p for row in self.rows)

    def transpose(self) -> "Mat":
        return Mat(self.p, tuple(zip(*self.rows)))

    def rank(self) -> int:
        return len(rref(self.rows, self.ncols, self.p)[0])

    def nullity(self) -> int:
        return self.ncols - self.rank()

    @property
    def is_invertible(self) -> bool:
        return self.is_square and self.rank() == self.nrows

    def inverse(self) -> "Mat":
        if not self.is_square:
            raise InvalidParameterError("inverse of a non-square matrix")
        n = self.nrows
        aug = [list(row) + [1 if i == j else 0 for j in range(n)]
               for i, row in enumerate(self.rows)]
        reduced, pivots = rref(aug, 2 * n, self.p)
        if pivots[:n] != tuple(range(n)):
            raise InvalidParameterError("matrix is singular")
        return Mat(self.p, [row[n:] for row in reduced])

    def is_identity(self) -> bool:
        return self.is_square and self == Mat.identity(self.p, self.nrows)

    def to_numpy(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int16)

    def to_json(self) -> dict:
        return {"p": self.p, "rows": [list(r) for r in self.rows]}

    def __eq__(self, other):
        return (isinstance(other, Mat) and self.p == other.p
                and self.rows == other.rows)

    def __hash__(self):
        return hash((self.p, self.rows))

    def __repr__(self):
        return f"Mat(p={self.p}, rows={self.rows})"


def scalar_of(g: Mat) -> Optional[int]:
    """The scalar c with g = c*I, if one exists."""
    if not g.is_square:
        raise InvalidParameterError("scalar_of needs a square matrix")
    if g.nrows == 0:
        return 1
    c = g.rows[0][0]
    for i, row in enumerate(g.rows):
        for j, x in enumerate(row):
            if x != (c if i == j else 0):
                return None
    return c


class Subspace:
    """Subspace of F_p^m with a canonical reduced-row-echelon basis."""

    __slots__ = ("p", "ambient", "rows")

    def __init__(self, p: int, ambient: int, rows: tuple[tuple[int, ...], ...]):
        self.p = p
        self.ambient = ambient
        self.rows = rows

    @staticmethod
    def from_vectors(p: int, ambient: int, vectors: Iterable[Sequence[int]]
                     ) -> "Subspace":
        check_prime(p)
        rows, _ = rref(vectors, ambient, p)
        return Subspace(p, ambient, rows)

    @staticmethod
    def zero(p: int, ambient: int) -> "Subspace":
        return Subspace(p, ambient, ())

    @staticmethod
    def full(p: int, ambient: int) -> "Subspace":
        return Subspace.from_vectors(
            p, ambient,
            [[1 if i == j else 0 for j in range(ambient)] for i in range(ambient)])

    @property
    def dim(self) -> int:
        return len(self.rows)

    def contains(self, vec: Sequence[int]) -> bool:
        return all(x == 0 for x in self.reduce(vec))

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains(row) for row in other.rows)

    def reduce(self, vec: Sequence[int]) -> tuple[int, ...]:
        """Canonical coset representative of vec modulo this subspace."""
        p = self.p
        v = [int(x) % p for x in vec]
        if len(v) != self.ambient:
            raise InvalidParameterError("vector length mismatch")
        for row in self.rows:
            c = next(i for i, x in enumerate(row) if x)
            if v[c]:
                f = v[c]
                v = [(a - f * b) % p for a, b in zip(v, row)]
        return tuple(v)

    def sum(self, other: "Subspace") -> "Subspace":
        return Subspace.from_vectors(self.p, self.ambient, self.rows + other.rows)

    def image_under(self, g: Mat) -> "Subspace":
        """Image subspace g(W) for g acting on column vectors."""
        if g.ncols != self.ambient:
            raise InvalidParameterError("dimension mismatch")
        vecs = [g.apply(row) for row in self.rows]
        return Subspace.from_vectors(g.p, g.nrows, vecs)

    def basis_complement_dims(self) -> int:
        return self.ambient - self.dim

    def to_json(self) -> dict:
        return {"p": self.p, "ambient": self.ambient,
                "rows": [list(r) for r in self.rows]}

    def __eq__(self, other):
        return (isinstance(other, Subspace) and self.p == other.p
                and self.ambient == other.ambient and self.rows == other.rows)

    def __hash__(self):
        return hash((self.p, self.ambient, self.rows))

    def __repr__(self):
        return f"Subspace(p={self.p}, ambient={self.ambient}, rows={self.rows})"


def canonicalize(p: int, vectors: Iterable[Sequence[int]], ambient: Optional[int] = None
                 ) -> Subspace:
    """Canonical subspace spanned by the given vectors."""
    vectors = [tuple(v) for v in vectors]
    if ambient is None:
        if not vectors:
            raise InvalidParameterError("ambient dimension required for empty span")
        ambient = len(vectors[0])
    return Subspace.from_vectors(p, ambient, vectors)


def is_invariant(g: Mat, w: Subspace) -> bool:
    """True iff g(W) = W."""
    if g.ncols != w.ambient or g.nrows != w.ambient or g.p != w.p:
        raise InvalidParameterError("dimension mismatch")
    return w.image_under(g) == w


# ---------------------------------------------------------------------------
# Subspace enumeration

def _free_positions(pivots: Sequence[int], m: int) -> list[tuple[int, int]]:
    pivset = set(pivots)
    return [(r, c) for r in range(len(pivots)) for c in range(m)
            if c > pivots[r] and c not in pivset]


def enumerate_subspaces(p: int, m: int, dim_filter: Optional[int] = None,
                        budget: int = DEFAULT_ENUM_BUDGET) -> Iterator[Subspace]:
    """All subspaces of F_p^m, each exactly once, in a fixed order:
    dimension ascending, then pivot columns lexicographic, then free
    entries lexicographic."""
    check_prime(p)
    if m < 0:
        raise InvalidParameterError("ambient dimension must be nonnegative")
    total = (qcomb.galois(m, p) if dim_filter is None
             else qcomb.gauss(m, dim_filter, p))
    if total > budget:
        raise ResourceLimitError(
            f"{total} subspaces exceed enumeration budget {budget}")
    dims = range(m + 1) if dim_filter is None else [dim_filter]
    for k in dims:
        if k < 0 or k > m:
            continue
        for pivots in itertools.combinations(range(m), k):
            free = _free_positions(pivots, m)
            for assign in itertools.product(range(p), repeat=len(free)):
                rows = [[0] * m for _ in range(k)]
                for r, c in zip(range(k), pivots):
                    rows[r][c] = 1
                for (r, c), v in zip(free, assign):
                    rows[r][c] = v
                yield Subspace(p, m, tuple(tuple(row) for row in rows))


def subspace_dim_array(p: int, m: int, k: int) -> np.ndarray:
    """All k-dimensional subspaces of F_p^m as a (N, k, m) int16 array of
    canonical bases, in the same order as enumerate_subspaces."""
    check_prime(p)
    blocks = []
    for pivots in itertools.combinations(range(m), k):
        free = _free_positions(pivots, m)
        t = len(free)
        count = p ** t
        block = np.zeros((count, k, m), dtype=np.int16)
        for r, c in zip(range(k), pivots):
            block[:, r, c] = 1
        idx = np.arange(count)
        for pos, (r, c) in enumerate(free):
            block[:, r, c] = (idx // p ** (t - 1 - pos)) % p
        blocks.append(block)
    if not blocks:
        return np.zeros((1 if k == 0 else 0, k, m), dtype=np.int16)
    return np.concatenate(blocks, axis=0)


def batch_canonicalize(a: np.ndarray, p: int) -> np.ndarray:
    """Reduced row echelon form of each matrix in a (N, k, m) batch.

    Rows of rank-deficient inputs end as zero rows at the bottom.
    """
    a = np.mod(a, p).astype(np.int16)
    n, k, m = a.shape
    if n == 0 or k == 0:
        return a
    inv = np.array(inverse_table(p), dtype=np.int16)
    ptr = np.zeros(n, dtype=np.int64)
    row_idx = np.arange(k)
    nrange = np.arange(n)
    for c in range(m):
        col = a[:, :, c]
        cand = (col != 0) & (row_idx[None, :] >= ptr[:, None])
        has = cand.any(axis=1)
        if not has.any():
            continue
        first = np.where(has, cand.argmax(axis=1), 0)
        pr = np.minimum(ptr, k - 1)
        rowf = a[nrange, first].copy()
        rowp = a[nrange, pr].copy()
        mask = has[:, None]
        a[nrange, first] = np.where(mask, rowp, a[nrange, first])
        norm = (rowf * inv[rowf[:, c]][:, None]) % p
        norm = np.where(mask, norm, 0).astype(np.int16)
        a[nrange, pr] = np.where(mask, norm, a[nrange, pr])
        factors = a[:, :, c].copy()
        factors[nrange, pr] = 0
        a -= factors[:, :, None] * norm[:, None, :]
        np.mod(a, p, out=a)
        ptr += has
    return a


def batch_apply(a: np.ndarray, g: Mat) -> np.ndarray:
    """Images of a batch of row-bases under g (column action)."""
    gt = g.to_numpy().T
    n, k, m = a.shape
    out = a.reshape(n * k, m) @ gt
    return np.mod(out, g.p).reshape(n, k, m).astype(np.int16)


def batch_keys(a: np.ndarray, p: int) -> np.ndarray:
    """Injective int64 key per matrix; requires p**(k*m) < 2**63."""
    n, k, m = a.shape
    if p ** (k * m) >= 2 ** 63:
        raise ResourceLimitError("subspace key does not fit in int64")
    weights = (p ** np.arange(k * m, dtype=np.int64))
    return a.reshape(n, k * m).astype(np.int64) @ weights


# ---------------------------------------------------------------------------
# Polynomials over F_p (coefficient tuples, ascending, no trailing zeros)

def poly_trim(coeffs: Sequence[int], p: int) -> tuple[int, ...]:
    c = [int(x) % p for x in coeffs]
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def poly_deg(f: Sequence[int]) -> int:
    return len(f) - 1


def poly_mul(f: Sequence[int], g: Sequence[int], p: int) -> tuple[int, ...]:
    if not f or not g:
        return ()
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = (out[i + j] + a * b) % p
    return poly_trim(out, p)


def poly_divmod(f: Sequence[int], g: Sequence[int], p: int
                ) -> tuple[tuple[int, ...], tuple[int, ...]]:
    f = list(poly_trim(f, p))
    g = poly_trim(g, p)
    if not g:
        raise InvalidParameterError("division by zero polynomial")
    inv = inverse_table(p)
    lead = inv[g[-1]]
    q = [0] * max(0, len(f) - len(g) + 1)
    while len(f) >= len(g):
        c = (f[-1] * lead) % p
        k = len(f) - len(g)
        q[k] = c
        for i, b in enumerate(g):
            f[k + i] = (f[k + i] - c * b) % p
        while f and f[-1] == 0:
            f.pop()
    return poly_trim(q, p), tuple(f)


def poly_monic(f: Sequence[int], p: int) -> tuple[int, ...]:
    f = poly_trim(f, p)
    if not f:
        raise InvalidParameterError("zero polynomial")
    inv = inverse_table(p)[f[-1]]
    return tuple((inv * c) % p for c in f)


def poly_pow(f: Sequence[int], e: int, p: int) -> tuple[int, ...]:
    out: tuple[int, ...] = (1,)
    base = poly_trim(f, p)
    while e:
        if e & 1:
            out = poly_mul(out, base, p)
        base = poly_mul(base, base, p)
        e >>= 1
    return out


def poly_str(f: Sequence[int]) -> str:
    terms = []
    for i in range(len(f) - 1, -1, -1):
        c = f[i]
        if not c:
            continue
        if i == 0:
            terms.append(str(c))
        elif i == 1:
            terms.append("t" if c == 1 else f"{c}t")
        else:
            terms.append(f"t^{i}" if c == 1 else f"{c}t^{i}")
    return " + ".join(terms) if terms else "0"


@lru_cache(maxsize=None)
def irreducibles(p: int, maxdeg: int) -> tuple[tuple[int, ...], ...]:
    """Monic irreducibles over F_p of degree <= maxdeg, sorted by degree
    then coefficients; sieve by trial division."""
    check_prime(p)
    found: list[tuple[int, ...]] = []
    for deg in range(1, maxdeg + 1):
        half = deg // 2
        lower = [g for g in found if poly_deg(g) <= half]
        for tail in itertools.product(range(p), repeat=deg):
            f = tail + (1,)
            if any(not poly_divmod(f, g, p)[1] for g in lower):
                continue
            found.append(f)
    return tuple(found)


def factor_poly(f: Sequence[int], p: int) -> dict[tuple[int, ...], int]:
    """Factor a nonzero polynomial into monic irreducibles with
    multiplicities (the unit leading coefficient is dropped)."""
    check_prime(p)
    f = poly_trim(f, p)
    if not f:
        raise InvalidParameterError("cannot factor the zero polynomial")
    rem = poly_monic(f, p)
    out: dict[tuple[int, ...], int] = {}
    if poly_deg(rem) == 0:
        return out
    for g in irreducibles(p, poly_deg(rem) // 2):
        if poly_deg(g) > poly_deg(rem) // 2:
            break
        while True:
            q, r = poly_divmod(rem, g, p)
            if r:
                break
            out[g] = out.get(g, 0) + 1
            rem = q
        if poly_deg(rem) == 0:
            break
    if poly_deg(rem) > 0:
        out[rem] = out.get(rem, 0) + 1
    check = (1,)
    for g, e in out.items():
        check = poly_mul(check, poly_pow(g, e, p), p)
    if check != poly_monic(f, p):
        raise InternalConsistencyError("factorization does not multiply back")
    return out


def companion(f: Sequence[int], p: int) -> Mat:
    """Companion matrix of a monic polynomial."""
    f = poly_trim(f, p)
    n = poly_deg(f)
    if n < 1 or f[-1] != 1:
        raise InvalidParameterError("companion needs a monic polynomial of degree >= 1")
    rows = [[0] * n for _ in range(n)]
    for i in range(1, n):
        rows[i][i - 1] = 1
    for i in range(n):
        rows[i][n - 1] = (-f[i]) % p
    return Mat(p, rows)


def block_diag(p: int, mats: Sequence[Mat]) -> Mat:
    n = sum(m.nrows for m in mats)
    rows = [[0] * n for _ in range(n)]
    off = 0
    for m in mats:
        for i, row in enumerate(m.rows):
            for j, x in enumerate(row):
                rows[off + i][off + j] = x
        off += m.nrows
    return Mat(p, rows)


def charpoly(g: Mat) -> tuple[int, ...]:
    """Characteristic polynomial det(tI - g), monic, ascending coefficients
    (Berkowitz; division free)."""
    if not g.is_square:
        raise InvalidParameterError("charpoly needs a square matrix")
    p = g.p
    n = g.nrows
    if n == 0:
        return (1,)
    a = g.rows
    coeffs = [1, (-a[0][0]) % p]  # descending
    for r in range(1, n):
        rrow = a[r][:r]
        ccol = [a[i][r] for i in range(r)]
        block = [a[i][:r] for i in range(r)]
        s_vals = []
        v = list(ccol)
        for k in range(r):
            s_vals.append(sum(x * y for x, y in zip(rrow, v)) % p)
            if k < r - 1:
                v = [sum(block[i][j] * v[j] for j in range(r)) % p
                     for i in range(r)]
        qvec = [1, (-a[r][r]) % p] + [(-s) % p for s in s_vals]
        new = [0] * (r + 2)
        for i, ci in enumerate(coeffs):
            if ci:
                top = min(len(qvec), r + 2 - i)
                for j in range(top):
                    new[i + j] = (new[i + j] + ci * qvec[j]) % p
        coeffs = new
    return tuple(reversed(coeffs))


def charpoly_bruteforce(g: Mat) -> tuple[int, ...]:
    """det(tI - g) by cofactor expansion on polynomial entries; test oracle
    for small n."""
    p = g.p
    n = g.nrows

    def det(rows):
        if not rows:
            return (1,)
        if len(rows) == 1:
            return rows[0][0]
        total: tuple[int, ...] = ()
        for j, entry in enumerate(rows[0]):
            if not entry:
                continue
            minor = [[row[jj] for jj in range(len(row)) if jj != j]
                     for row in rows[1:]]
            term = poly_mul(entry, det(minor), p)
            if j % 2:
                term = tuple((-c) % p for c in term)
            total = poly_trim(
                [x + y for x, y in itertools.zip_longest(total, term, fillvalue=0)], p)
        return total

    entries = [[poly_trim([(-g.rows[i][j]) % p] + ([1] if i == j else []), p)
                for j in range(n)] for i in range(n)]
    return det(entries)


# ---------------------------------------------------------------------------
# Partitions and module types

@dataclass(frozen=True)
class Partition:
    parts: tuple[int, ...]

    def __post_init__(self):
        if any(x < 1 for x in self.parts):
            raise InvalidParameterError("partition parts must be positive")
        if any(self.parts[i] < self.parts[i + 1] for i in range(len(self.parts) - 1)):
            raise InvalidParameterError("parts must be weakly decreasing")

    @property
    def size(self) -> int:
        return sum(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def part(self, i: int) -> int:
        """1-indexed part, 0 beyond the length."""
        return self.parts[i - 1] if 1 <= i <= len(self.parts) else 0

    def conjugate(self) -> "Partition":
        if not self.parts:
            return self
        return Partition(tuple(sum(1 for x in self.parts if x >= i)
                               for i in range(1, self.parts[0] + 1)))

    def contains(self, other: "Partition") -> bool:
        return all(other.part(i) <= self.part(i)
                   for i in range(1, len(other.parts) + 1))

    def __repr__(self):
        return f"Partition{self.parts}"


@dataclass(frozen=True)
class ModuleType:
    """Type of an F_p<g>-module: a partition for each irreducible factor."""

    p: int
    assignments: tuple[tuple[tuple[int, ...], Partition], ...]

    @staticmethod
    def make(p: int, assignments: dict[tuple[int, ...], Partition]) -> "ModuleType":
        items = tuple(sorted(assignments.items(),
                             key=lambda kv: (poly_deg(kv[0]), kv[0])))
        for f, mu in items:
            if not mu.parts:
                raise InvalidParameterError("empty partition in module type")
            if f != poly_monic(f, p):
                raise InvalidParameterError("factors must be monic")
        return ModuleType(p, items)

    @property
    def dim(self) -> int:
        return sum(poly_deg(f) * mu.size for f, mu in self.assignments)

    @property
    def is_invertible(self) -> bool:
        t = (0, 1)
        return all(f != t for f, _ in self.assignments)

    def partition_for(self, f: tuple[int, ...]) -> Optional[Partition]:
        for g, mu in self.assignments:
            if g == f:
                return mu
        return None

    def representative(self) -> Mat:
        """Block companion matrix with this module type."""
        blocks = [companion(poly_pow(f, s, self.p), self.p)
                  for f, mu in self.assignments for s in mu.parts]
        return block_diag(self.p, blocks)

    def to_json(self) -> dict:
        return {"p": self.p,
                "factors": [{"poly": list(f), "partition": list(mu.parts)}
                            for f, mu in self.assignments]}

    def __repr__(self):
        inner = ", ".join(f"{poly_str(f)} -> {mu.parts}"
                          for f, mu in self.assignments)
        return f"ModuleType({inner})"


def _nullity_sequence(g: Mat, f: tuple[int, ...]) -> list[int]:
    """Nullities of f(g)^k for k = 1, 2, ... until they stabilize."""
    p = g.p
    n = g.nrows
    fg = poly_eval_mat(f, g)
    seq = []
    power = Mat.identity(p, n)
    prev = 0
    while True:
        power = power * fg
        nul = power.nullity()
        seq.append(nul)
        if nul == prev:
            seq.pop()
            break
        prev = nul
    return seq


def poly_eval_mat(f: Sequence[int], g: Mat) -> Mat:
    p = g.p
    n = g.nrows
    out = Mat.zero(p, n, n)
    ident = Mat.identity(p, n)
    for c in reversed(poly_trim(f, p)):
        out = out * g + ident.scale(c)
    return out


def module_type(g: Mat, validate: bool = True) -> ModuleType:
    """Type of F_p^n as a module over F_p<g>.

    For each irreducible factor f of the characteristic polynomial, the
    conjugate partition's k-th part is (nullity f(g)^k - nullity f(g)^{k-1})
    divided by deg f.  With validate=True the block-companion matrix rebuilt
    from the type is checked to have the same nullity sequences.
    """
    if not g.is_square:
        raise InvalidParameterError("module_type needs a square matrix")
    p = g.p
    cp = charpoly(g)
    assignments: dict[tuple[int, ...], Partition] = {}
    for f in factor_poly(cp, p):
        seq = _nullity_sequence(g, f)
        diffs = [seq[0]] + [seq[i] - seq[i - 1] for i in range(1, len(seq))]
        conj_parts = []
        for dnul in diffs:
            q, r = divmod(dnul, poly_deg(f))
            if r:
                raise InternalConsistencyError("nullity jump not divisible by deg f")
            conj_parts.append(q)
        mu = Partition(tuple(conj_parts)).conjugate()
        assignments[f] = mu
    mt = ModuleType.make(p, assignments)
    if mt.dim != g.nrows:
        raise InternalConsistencyError("module type dimensions do not add up")
    if validate:
        rep = mt.representative()
        for f, _ in mt.assignments:
            if _nullity_sequence(rep, f) != _nullity_sequence(g, f):
                raise InternalConsistencyError(
                    "reconstructed companion matrix is not conjugate to g")
    return mt


# ---------------------------------------------------------------------------
# Randomized helpers shared by tests and verification suites

def random_matrix(p: int, n: int, rng) -> Mat:
    return Mat(p, [[rng.randrange(p) for _ in range(n)] for _ in range(n)])


def random_invertible(p: int, n: int, rng) -> Mat:
    while True:
        g = random_matrix(p, n, rng)
        if g.is_invertible:
            return g


def random_subspace(p: int, m: int, rng, dim: Optional[int] = None) -> Subspace:
    k = rng.randint(0, m) if dim is None else dim
    vecs = [[rng.randrange(p) for _ in range(m)] for _ in range(k)]
    return Subspace.from_vectors(p, m, vecs)
