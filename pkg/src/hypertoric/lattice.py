"""Exact integer linear algebra for generator sets.

All routines work on Python ints (and :class:`fractions.Fraction` where a
rational solve is unavoidable); nothing here touches floating point.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ArityError, NoUnimodularSubsetError, SchemaError, ZeroVectorError

IntVector = tuple  # tuple[int, ...]


def int_vector(v: Iterable) -> IntVector:
    out = []
    for x in v:
        if isinstance(x, bool) or not isinstance(x, int):
            if isinstance(x, Fraction) and x.denominator == 1:
                x = int(x)
            elif isinstance(x, float) and x.is_integer():
                x = int(x)
            else:
                raise SchemaError(f"non-integer lattice coordinate {x!r}")
        out.append(int(x))
    if not out:
        raise SchemaError("empty lattice vector")
    return tuple(out)


# ---------------------------------------------------------------------------
# fraction-free elimination


def _bareiss(rows, ncols):
    """Fraction-free row echelon form in place; returns (rank, swaps)."""
    m = len(rows)
    r = 0
    swaps = 0
    prev = 1
    for c in range(ncols):
        piv = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if piv is None:
            continue
        if piv != r:
            rows[r], rows[piv] = rows[piv], rows[r]
            swaps += 1
        p = rows[r][c]
        for i in range(r + 1, m):
            a = rows[i][c]
            row_i = rows[i]
            row_r = rows[r]
            for j in range(c + 1, ncols):
                row_i[j] = (p * row_i[j] - a * row_r[j]) // prev
            row_i[c] = 0
        prev = p
        r += 1
        if r == m:
            break
    return r, swaps


def _integer_rows(rows):
    """Scale rational rows to integer rows (rank-preserving)."""
    out = []
    for row in rows:
        row = [Fraction(x) for x in row]
        den = 1
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
        out.append([int(x * den) for x in row])
    return out


def rank(rows: Sequence[Sequence]) -> int:
    """Exact rank of a list of integer (or rational) vectors."""
    rows = list(rows)
    if not rows:
        return 0
    ncols = len(rows[0])
    if any(len(r) != ncols for r in rows):
        raise SchemaError("vectors of unequal length")
    if all(isinstance(x, int) for r in rows for x in r):
        work = [list(r) for r in rows]
    else:
        work = _integer_rows(rows)
    return _bareiss(work, ncols)[0]


def det(rows: Sequence[Sequence[int]]) -> int:
    """Exact determinant of a square integer matrix (Bareiss)."""
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ArityError("determinant of a non-square matrix")
    if n == 0:
        return 1
    work = [list(r) for r in rows]
    r, swaps = _bareiss(work, n)
    if r < n:
        return 0
    d = work[n - 1][n - 1]
    return -d if swaps % 2 else d


def rref(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the rationals; returns (rows, pivots)."""
    M = [[Fraction(x) for x in r] for r in rows]
    if not M:
        return M, []
    ncols = len(M[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        p = M[r][c]
        M[r] = [x / p for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


def nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> list[tuple]:
    """Integer basis of {x : rows @ x = 0}, primitive vectors."""
    if ncols is None:
        ncols = len(rows[0])
    R, pivots = rref(rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, p in zip(R, pivots):
            x[p] = -row[f]
        v = _integer_rows([x])[0]
        g = math.gcd(*v)
        basis.append(tuple(a // g for a in v))
    return basis


def solve_particular(rows, rhs):
    """One rational solution of rows @ x = rhs, or None if inconsistent."""
    ncols = len(rows[0])
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    R, pivots = rref(aug)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for row, p in zip(R, pivots):
        x[p] = row[ncols]
    return x


def integer_inverse(rows: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    """Inverse of a unimodular integer matrix."""
    n = len(rows)
    aug = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(rows)]
    R, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ArityError("matrix is singular")
    inv = []
    for row in R:
        tail = row[n:]
        if any(x.denominator != 1 for x in tail):
            raise NoUnimodularSubsetError("matrix is not unimodular")
        inv.append(tuple(int(x) for x in tail))
    return tuple(inv)


def matvec(M, v):
    return tuple(sum(a * b for a, b in zip(row, v)) for row in M)


def matmul(A, B):
    cols = list(zip(*B))
    return tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in cols) for row in A)


def columns(vs):
    """Matrix (tuple of rows) whose columns are the given vectors."""
    return tuple(zip(*vs))


# ---------------------------------------------------------------------------
# generator tests


def is_primitive(v: Sequence[int]) -> bool:
    v = int_vector(v)
    if not any(v):
        raise ZeroVectorError("primitivity is undefined for the zero vector")
    return math.gcd(*v) == 1


def is_z_basis(vs: Sequence[Sequence[int]]) -> bool:
    """True iff the n given vectors of length n generate Z^n."""
    vs = [int_vector(v) for v in vs]
    if not vs:
        raise ArityError("need n vectors, got none")
    n = len(vs[0])
    if len(vs) != n or any(len(v) != n for v in vs):
        raise ArityError(f"need exactly {n} vectors of length {n}")
    return abs(det(vs)) == 1


def spans_full_rank(vs: Sequence[Sequence[int]], n: int | None = None) -> bool:
    vs = [int_vector(v) for v in vs]
    if not vs:
        raise SchemaError("empty vector list")
    if n is None:
        n = len(vs[0])
    if any(len(v) != n for v in vs):
        raise SchemaError("vector length differs from rank")
    return rank(vs) == n


@dataclass(frozen=True)
class BasisChange:
    """A GL(n, Z) change of coordinates; ``matrix @ inverse == I``."""

    matrix: tuple
    inverse: tuple

    def __post_init__(self):
        n = len(self.matrix)
        ident = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
        if matmul(self.matrix, self.inverse) != ident:
            raise ArityError("inverse does not invert matrix")
        if abs(det(self.matrix)) != 1:
            raise NoUnimodularSubsetError("basis change is not unimodular")

    @classmethod
    def identity(cls, n: int) -> "BasisChange":
        ident = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
        return cls(ident, ident)

    def apply(self, v):
        return matvec(self.matrix, v)

    def undo(self, v):
        return matvec(self.inverse, v)


@dataclass(frozen=True)
class GeneratorSet:
    """Distinct primitive generators plus the flat-index -> generator map.

    ``assignment[k]`` is the position in ``generators`` of the normal of
    flat ``k``. When omitted, flat ``k`` uses generator ``k``.
    """

    generators: tuple
    assignment: tuple | None = None

    def __post_init__(self):
        gens = tuple(int_vector(g) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        if not gens:
            raise SchemaError("empty generator set")
        n = len(gens[0])
        if any(len(g) != n for g in gens):
            raise SchemaError("generators of unequal length")
        if len(set(gens)) != len(gens):
            raise SchemaError("generators must be distinct")
        if self.assignment is not None:
            a = tuple(int(i) for i in self.assignment)
            if any(i < 0 or i >= len(gens) for i in a):
                raise SchemaError("assignment refers to a missing generator")
            object.__setattr__(self, "assignment", a)

    @property
    def rank(self) -> int:
        return len(self.generators[0])

    @classmethod
    def from_normals(cls, normals) -> "GeneratorSet":
        """Build from the per-flat normal list (repeats allowed)."""
        gens: list = []
        where: dict = {}
        assignment = []
        for u in normals:
            u = int_vector(u)
            if u not in where:
                where[u] = len(gens)
                gens.append(u)
            assignment.append(where[u])
        return cls(tuple(gens), tuple(assignment))

    def normal(self, k: int) -> IntVector:
        if self.assignment is None:
            return self.generators[k]
        return self.generators[self.assignment[k]]

    @property
    def flat_count(self) -> int:
        return len(self.generators) if self.assignment is None else len(self.assignment)


def find_z_basis(vs: Sequence[IntVector]) -> tuple[int, ...] | None:
    """First n-subset (lexicographic in input order) with |det| = 1."""
    n = len(vs[0])
    for combo in itertools.combinations(range(len(vs)), n):
        if abs(det([vs[i] for i in combo])) == 1:
            return combo
    return None


def normalize_generators(gs: GeneratorSet) -> tuple[BasisChange, GeneratorSet]:
    """Move the first Z-basis subset of ``gs`` onto the standard basis.

    Returns the change of basis ``B^-1`` (``B`` having the chosen basis as
    columns) and the transformed generators, in the original order.
    """
    combo = find_z_basis(gs.generators)
    if combo is None:
        raise NoUnimodularSubsetError("no n-subset of the generators is a Z-basis")
    B = columns([gs.generators[i] for i in combo])
    change = BasisChange(integer_inverse(B), tuple(tuple(r) for r in B))
    moved = tuple(change.apply(g) for g in gs.generators)
    return change, GeneratorSet(moved, gs.assignment)


def independent_on_index_set(gs: GeneratorSet, indices: Iterable[int]) -> bool:
    """Linear independence of the normals of the given flats."""
    idx = sorted(set(indices))
    if not idx:
        return True
    if len(idx) > gs.rank:
        return False
    return rank([gs.normal(k) for k in idx]) == len(idx)


def distinct_bound(n: int) -> int:
    """Maximum number of distinct generators under the Z-basis closure."""
    return 3**n - 1
