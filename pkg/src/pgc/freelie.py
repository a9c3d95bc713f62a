"""Free Lie algebra machinery on d generators.

Lyndon words (Duval's algorithm, with a filter oracle), right standard
bracketings, expansion into the free associative algebra over F_p, Witt
layer ranks, the commutator maps between homogeneous components, and the
layer modules carrying the GL(d, F_p) substitution action, including the
non-split extension module that replaces degree <= 2 when p = 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Sequence, Union

from .errors import InternalConsistencyError, InvalidParameterError
from .fplinalg import Mat, Subspace, check_prime

Word = tuple[int, ...]
# A bracket tree is a letter (leaf) or a pair of bracket trees.
BracketTree = Union[int, tuple]


def mobius(n: int) -> int:
    if n < 1:
        raise InvalidParameterError("mobius needs n >= 1")
    out = 1
    i = 2
    while i * i <= n:
        if n % i == 0:
            n //= i
            if n % i == 0:
                return 0
            out = -out
        i += 1
    if n > 1:
        out = -out
    return out


def witt_dim(d: int, n: int) -> int:
    """Dimension of the degree-n homogeneous component of the free Lie
    algebra on d generators (Witt's formula)."""
    if d < 1 or n < 1:
        raise InvalidParameterError("witt_dim needs d, n >= 1")
    total = sum(mobius(n // j) * d ** j for j in range(1, n + 1) if n % j == 0)
    q, r = divmod(total, n)
    if r:
        raise InternalConsistencyError("Witt sum not divisible by n")
    return q


@dataclass(frozen=True)
class LayerRanks:
    d: int
    witt: tuple[int, ...]

    @property
    def cumulative(self) -> tuple[int, ...]:
        out = []
        total = 0
        for w in self.witt:
            total += w
            out.append(total)
        return tuple(out)

    def d_i(self, i: int) -> int:
        return self.cumulative[i - 1]


def layer_ranks(d: int, n: int) -> LayerRanks:
    """Witt dimensions w_1..w_n and their cumulative sums d_1..d_n; d_n is
    the rank of the n-th lower p-series layer of a free group on d
    generators."""
    if d < 2 or n < 1:
        raise InvalidParameterError("layer_ranks needs d >= 2, n >= 1")
    return LayerRanks(d=d, witt=tuple(witt_dim(d, i) for i in range(1, n + 1)))


# ---------------------------------------------------------------------------
# Lyndon words

def is_lyndon(w: Word) -> bool:
    """True iff w is strictly smaller than all of its proper nontrivial
    tails."""
    if not w:
        return False
    return all(w < w[i:] for i in range(1, len(w)))


def lyndon_words_upto(d: int, n: int) -> Iterator[Word]:
    """All Lyndon words over {1..d} of length <= n, in lexicographic order
    (Duval's algorithm)."""
    if d < 1 or n < 1:
        return
    w = [1]
    yield tuple(w)
    while True:
        w = [w[i % len(w)] for i in range(n)]
        while w and w[-1] == d:
            w.pop()
        if not w:
            return
        w[-1] += 1
        yield tuple(w)


def lyndon_words(d: int, n: int) -> tuple[Word, ...]:
    """Lyndon words of length exactly n, lexicographically sorted."""
    return tuple(w for w in lyndon_words_upto(d, n) if len(w) == n)


def lyndon_words_bruteforce(d: int, n: int) -> tuple[Word, ...]:
    """Filter oracle: test every word of length n against the tail
    condition."""
    import itertools
    return tuple(w for w in itertools.product(range(1, d + 1), repeat=n)
                 if is_lyndon(w))


def standard_bracketing(w: Word) -> BracketTree:
    """Right standard bracketing: split at the longest proper tail of w
    that is a Lyndon word."""
    w = tuple(w)
    if not is_lyndon(w):
        raise InvalidParameterError(f"{w} is not a Lyndon word")
    if len(w) == 1:
        return w[0]
    for i in range(1, len(w)):
        if is_lyndon(w[i:]):
            return (standard_bracketing(w[:i]), standard_bracketing(w[i:]))
    raise InternalConsistencyError("no Lyndon tail found")


def foliage(t: BracketTree) -> Word:
    if isinstance(t, int):
        return (t,)
    return foliage(t[0]) + foliage(t[1])


# ---------------------------------------------------------------------------
# Noncommutative polynomials

class NcPoly:
    """Element of the free associative algebra over F_p, stored as a map
    from words to nonzero coefficients."""

    __slots__ = ("p", "terms")

    def __init__(self, p: int, terms: Optional[dict[Word, int]] = None):
        self.p = p
        self.terms = {w: c % p for w, c in (terms or {}).items() if c % p}

    @staticmethod
    def letter(l: int, p: int) -> "NcPoly":
        return NcPoly(p, {(l,): 1})

    @staticmethod
    def zero(p: int) -> "NcPoly":
        return NcPoly(p, {})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self) -> set[int]:
        return {len(w) for w in self.terms}

    def component(self, n: int) -> "NcPoly":
        return NcPoly(self.p, {w: c for w, c in self.terms.items() if len(w) == n})

    def __add__(self, other: "NcPoly") -> "NcPoly":
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return NcPoly(self.p, out)

    def __sub__(self, other: "NcPoly") -> "NcPoly":
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) - c
        return NcPoly(self.p, out)

    def scale(self, c: int) -> "NcPoly":
        return NcPoly(self.p, {w: c * v for w, v in self.terms.items()})

    def __mul__(self, other: "NcPoly") -> "NcPoly":
        out: dict[Word, int] = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 + w2
                out[w] = out.get(w, 0) + c1 * c2
        return NcPoly(self.p, out)

    def bracket(self, other: "NcPoly") -> "NcPoly":
        return self * other - other * self

    def min_word(self) -> Word:
        """Least word by (length, lex); the polynomial must be nonzero."""
        return min(self.terms, key=lambda w: (len(w), w))

    def __eq__(self, other):
        return (isinstance(other, NcPoly) and self.p == other.p
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.p, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "NcPoly(0)"
        parts = [f"{c}*{''.join(map(str, w))}"
                 for w, c in sorted(self.terms.items(), key=lambda t: (len(t[0]), t[0]))]
        return "NcPoly(" + " + ".join(parts) + ")"


def expand(tree: BracketTree, p: int) -> NcPoly:
    """Full expansion of a bracket tree under [f, g] = fg - gf."""
    check_prime(p)
    if isinstance(tree, int):
        return NcPoly.letter(tree, p)
    left, right = tree
    return expand(left, p).bracket(expand(right, p))


@lru_cache(maxsize=None)
def expand_lyndon(w: Word, p: int) -> NcPoly:
    return expand(standard_bracketing(w), p)


@lru_cache(maxsize=None)
def _lyndon_basis(d: int, n: int, p: int) -> tuple[tuple[Word, ...], dict[Word, NcPoly]]:
    words = lyndon_words(d, n)
    return words, {w: expand_lyndon(w, p) for w in words}


def to_lyndon_coords(f: NcPoly, d: int, n: int) -> Optional[tuple[int, ...]]:
    """Coordinates of a homogeneous degree-n polynomial in the Lyndon basis
    of the free Lie algebra on d generators, or None when f is not in the
    Lie span.  Uses the triangularity of the standard bracketing: the least
    word of each basis expansion is the Lyndon word itself."""
    p = f.p
    degs = f.degrees()
    if degs and degs != {n}:
        raise InvalidParameterError("polynomial is not homogeneous of the given degree")
    words, basis = _lyndon_basis(d, n, p)
    index = {w: i for i, w in enumerate(words)}
    coords = [0] * len(words)
    residue = f
    while not residue.is_zero:
        w = residue.min_word()
        if w not in index:
            return None
        c = residue.terms[w]
        coords[index[w]] = c
        residue = residue - basis[w].scale(c)
    return tuple(coords)


def substitute(f: NcPoly, g: Mat) -> NcPoly:
    """Algebra endomorphism sending letter x_l to sum_k g[k][l] x_k."""
    p = f.p
    d = g.nrows
    out: dict[Word, int] = {}
    for word, c in f.terms.items():
        partial: dict[Word, int] = {(): c}
        for l in word:
            if not 1 <= l <= d:
                raise InvalidParameterError("letter outside alphabet of g")
            nxt: dict[Word, int] = {}
            for w0, c0 in partial.items():
                for k in range(1, d + 1):
                    a = g.rows[k - 1][l - 1]
                    if a:
                        w1 = w0 + (k,)
                        nxt[w1] = (nxt.get(w1, 0) + c0 * a) % p
            partial = {w: v for w, v in nxt.items() if v}
        for w1, c1 in partial.items():
            out[w1] = out.get(w1, 0) + c1
    return NcPoly(p, out)


def poly_rank(polys: Iterable[NcPoly], p: int) -> int:
    """Rank of a family of polynomials over F_p (sparse elimination keyed
    by (length, word))."""
    inv = None
    pivots: dict[tuple[int, Word], NcPoly] = {}
    rank = 0
    for f in polys:
        cur = f
        while not cur.is_zero:
            w = cur.min_word()
            key = (len(w), w)
            if key in pivots:
                cur = cur - pivots[key].scale(cur.terms[w])
            else:
                if inv is None:
                    from .fplinalg import inverse_table
                    inv = inverse_table(p)
                pivots[key] = cur.scale(inv[cur.terms[w]])
                rank += 1
                break
    return rank


# ---------------------------------------------------------------------------
# Layer modules

@dataclass(frozen=True)
class LayerModule:
    """The n-th lower p-series layer of a free group on d generators, as a
    module for GL(d, F_p): basis labels, realizing polynomials, and the
    representation matrix rho(g)."""

    d: int
    n: int
    p: int
    labels: tuple[tuple, ...]
    basis: tuple[NcPoly, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def poly_of(self, coords: Sequence[int]) -> NcPoly:
        if len(coords) != self.dim:
            raise InvalidParameterError("coordinate length mismatch")
        out = NcPoly.zero(self.p)
        for c, b in zip(coords, self.basis):
            if c % self.p:
                out = out + b.scale(c)
        return out

    def coords_of(self, f: NcPoly) -> tuple[int, ...]:
        """Coordinates of a polynomial lying in the layer module."""
        p = self.p
        coords = [0] * self.dim
        residue = f
        if self.p == 2 and self.n >= 2:
            # peel the degree-1 component with the pow-coordinates first
            deg1 = residue.component(1)
            for i, label in enumerate(self.labels):
                if label[0] == "pow1":
                    c = deg1.terms.get((label[1],), 0)
                    if c:
                        coords[i] = c
                        residue = residue - self.basis[i].scale(c)
        for deg in sorted(residue.degrees()):
            comp = residue.component(deg)
            vec = to_lyndon_coords(comp, self.d, deg)
            if vec is None:
                raise InvalidParameterError("polynomial not in the layer module")
            words = lyndon_words(self.d, deg)
            for w, c in zip(words, vec):
                if c:
                    idx = self.labels.index(("lie", w))
                    coords[idx] = c
            residue = residue - comp
        return tuple(coords)

    def rho(self, g: Mat) -> Mat:
        """Representation matrix of g; columns are images of basis vectors."""
        if g.p != self.p or g.nrows != self.d or not g.is_square:
            raise InvalidParameterError("g must be d x d over F_p")
        cols = []
        for label, b in zip(self.labels, self.basis):
            image = substitute(b, g)
            cols.append(self.coords_of(image))
        return Mat(self.p, tuple(zip(*cols)))


@lru_cache(maxsize=None)
def layer_representation(d: int, n: int, p: int) -> LayerModule:
    """Layer module of degree n: the direct sum of the Lie components of
    degree 1..n when p is odd, with the degree <= 2 part replaced by the
    extension module spanned by x_i + x_i^2 and the degree-2 brackets when
    p = 2 and n >= 2."""
    check_prime(p)
    if d < 2 or n < 1:
        raise InvalidParameterError("layer_representation needs d >= 2, n >= 1")
    labels: list[tuple] = []
    basis: list[NcPoly] = []
    if p == 2 and n >= 2:
        for i in range(1, d + 1):
            labels.append(("pow1", i))
            sq = NcPoly(p, {(i,): 1, (i, i): 1})
            basis.append(sq)
        for w in lyndon_words(d, 2):
            labels.append(("lie", w))
            basis.append(expand_lyndon(w, p))
        lower = 3
    else:
        lower = 1
    for deg in range(lower, n + 1):
        for w in lyndon_words(d, deg):
            labels.append(("lie", w))
            basis.append(expand_lyndon(w, p))
    module = LayerModule(d=d, n=n, p=p, labels=tuple(labels), basis=tuple(basis))
    expected = layer_ranks(d, n).d_i(n)
    if module.dim != expected:
        raise InternalConsistencyError("layer dimension disagrees with Witt ranks")
    return module


# ---------------------------------------------------------------------------
# Commutator maps

def bracket_with_letter(f: NcPoly, j: int) -> NcPoly:
    return f.bracket(NcPoly.letter(j, f.p))


def com_matrix(j: int, n: int, d: int, p: int) -> Mat:
    """Matrix of f -> [f, x_j] from the degree-n to the degree-(n+1) Lie
    component, in Lyndon bases."""
    check_prime(p)
    if not 1 <= j <= d:
        raise InvalidParameterError("letter index out of range")
    words = lyndon_words(d, n)
    cols = []
    for w in words:
        img = bracket_with_letter(expand_lyndon(w, p), j)
        vec = to_lyndon_coords(img, d, n + 1)
        if vec is None:
            raise InternalConsistencyError("bracket left the Lie algebra")
        cols.append(vec)
    target = lyndon_words(d, n + 1)
    if not cols:
        return Mat.zero(p, len(target), 0)
    return Mat(p, tuple(zip(*cols)))


def _com_family(polys: Sequence[NcPoly], d: int) -> list[NcPoly]:
    return [bracket_with_letter(f, j) for f in polys for j in range(1, d + 1)]


def com_dims(w: Union[Subspace, Sequence[Sequence[int]]], d: int, n: int, p: int
             ) -> tuple[int, int, int]:
    """(dim W, dim(W + com W), dim com W) for a subspace W given in the
    coordinates of the degree-n layer module."""
    module = layer_representation(d, n, p)
    vectors = w.rows if isinstance(w, Subspace) else [tuple(v) for v in w]
    polys = [module.poly_of(v) for v in vectors]
    coms = _com_family(polys, d)
    dim_w = poly_rank(polys, p)
    dim_w_plus = poly_rank(list(polys) + coms, p)
    dim_com = poly_rank(coms, p)
    return dim_w, dim_w_plus, dim_com


def com_dim_growth(w: Union[Subspace, Sequence[Sequence[int]]], d: int, n: int,
                   p: int) -> tuple[int, int]:
    """(dim W, dim(W + com W)) for W inside the degree-n layer module."""
    dim_w, dim_w_plus, _ = com_dims(w, d, n, p)
    return dim_w, dim_w_plus
