"""Exact linear algebra over Z/q for a prime power q = p^d.

For d > 1 the ring Z/q is not a field, so plain row echelon forms do not
give unique representatives of row modules: the span of (2,1) over Z/4
also contains (0,2), which no echelon row reveals.  The Howell form adds
the missing annihilator rows and is the unique canonical form for
submodules of (Z/q)^n, which is what makes subspace equality a plain
tuple comparison everywhere else in this package.

All matrices are immutable, eagerly reduced mod q, and stored as nested
tuples of plain ints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

MAX_Q = 32
MAX_AMBIENT = 256


class DimensionMismatch(ValueError):
    """Operands have incompatible shapes or moduli."""


def prime_power(q: int) -> tuple[int, int]:
    """Return (p, d) with q = p^d, or raise ValueError."""
    if q < 2:
        raise ValueError(f"modulus must be at least 2, got {q}")
    p = min(f for f in range(2, q + 1) if q % f == 0)
    d = 0
    m = q
    while m % p == 0:
        m //= p
        d += 1
    if m != 1:
        raise ValueError(f"{q} is not a prime power")
    return p, d


def pvaluation(a: int, p: int, d: int) -> int:
    """p-adic valuation of the representative a, capped at d (val of 0)."""
    if a == 0:
        return d
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    return min(v, d)


def unit_multiplier(a: int, q: int, p: int) -> int:
    """Unit x with x*a == p^v mod q, where v is the valuation of a.

    Normalizing pivots to plain p-powers is what pins down the canonical
    forms below.  For a == 0 returns 1.
    """
    if a % q == 0:
        return 1
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    return pow(a, -1, q)


def annihilator_generator(a: int, q: int) -> int:
    """Generator of the ideal {x : x*a == 0 mod q}."""
    return q // math.gcd(a % q, q)


def gcdex2(a: int, b: int, q: int) -> tuple[int, int, int, int, int]:
    """Extended gcd packaged as a 2x2 transform over Z/q.

    Returns (g, s, t, u, v) with s*a + t*b = g, u*a + v*b = 0 and
    [[s, t], [u, v]] of determinant 1, hence invertible mod q.
    """
    a %= q
    b %= q
    if b == 0:
        return a, 1, 0, 0, 1
    if a == 0:
        return b, 0, 1, 1, 0
    g, s, t = _egcd(a, b)
    return g % q, s % q, t % q, (-(b // g)) % q, (a // g) % q


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        quo = old_r // r
        old_r, r = r, old_r - quo * r
        old_s, s = s, old_s - quo * s
        old_t, t = t, old_t - quo * t
    return old_r, old_s, old_t


@dataclass(frozen=True)
class ZqMatrix:
    """Immutable matrix over Z/q with q a prime power, entries in [0, q)."""

    q: int
    nrows: int
    ncols: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        p, _ = prime_power(self.q)  # validates q
        if self.q > MAX_Q:
            raise ValueError(f"modulus {self.q} exceeds cap {MAX_Q}")
        if not (0 <= self.ncols <= MAX_AMBIENT):
            raise ValueError(f"column count {self.ncols} out of range")
        if len(self.entries) != self.nrows:
            raise DimensionMismatch("row count does not match entries")
        for row in self.entries:
            if len(row) != self.ncols:
                raise DimensionMismatch("ragged rows")
            if any(not (0 <= x < self.q) for x in row):
                raise ValueError("entry not reduced mod q")

    @staticmethod
    def from_rows(q: int, rows: Sequence[Sequence[int]], ncols: int | None = None) -> "ZqMatrix":
        rows = [tuple(x % q for x in row) for row in rows]
        if ncols is None:
            if not rows:
                raise ValueError("ncols required for an empty matrix")
            ncols = len(rows[0])
        return ZqMatrix(q, len(rows), ncols, tuple(rows))

    @staticmethod
    def identity(q: int, n: int) -> "ZqMatrix":
        return ZqMatrix(q, n, n, tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))

    @staticmethod
    def zero(q: int, nrows: int, ncols: int) -> "ZqMatrix":
        return ZqMatrix(q, nrows, ncols, tuple(tuple(0 for _ in range(ncols)) for _ in range(nrows)))

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i]

    def transpose(self) -> "ZqMatrix":
        return ZqMatrix(self.q, self.ncols, self.nrows,
                        tuple(tuple(self.entries[i][j] for i in range(self.nrows)) for j in range(self.ncols)))

    def matmul(self, other: "ZqMatrix") -> "ZqMatrix":
        if self.q != other.q or self.ncols != other.nrows:
            raise DimensionMismatch("matmul shape/modulus mismatch")
        q = self.q
        out = []
        for i in range(self.nrows):
            a = self.entries[i]
            out.append(tuple(sum(a[k] * other.entries[k][j] for k in range(self.ncols)) % q
                             for j in range(other.ncols)))
        return ZqMatrix(q, self.nrows, other.ncols, tuple(out))

    def apply_to_vector(self, v: Sequence[int]) -> tuple[int, ...]:
        """Matrix-times-column action on a length-ncols vector."""
        if len(v) != self.ncols:
            raise DimensionMismatch("vector length mismatch")
        q = self.q
        return tuple(sum(row[k] * v[k] for k in range(self.ncols)) % q for row in self.entries)

    def is_diagonal(self) -> bool:
        return all(self.entries[i][j] == 0
                   for i in range(self.nrows) for j in range(self.ncols) if i != j)


@dataclass(frozen=True)
class ZqSubspace:
    """Submodule of (Z/q)^ambient_dim in Howell canonical form.

    Two subspaces are equal as submodules iff the dataclasses compare
    equal; the basis rows are nonzero, pivot columns strictly increase,
    pivots are powers of p, and entries above a pivot are reduced below
    it.
    """

    q: int
    ambient_dim: int
    basis: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        prime_power(self.q)
        if self.q > MAX_Q:
            raise ValueError(f"modulus {self.q} exceeds cap {MAX_Q}")
        if not (0 <= self.ambient_dim <= MAX_AMBIENT):
            raise ValueError(f"ambient dimension {self.ambient_dim} out of range")
        for row in self.basis:
            if len(row) != self.ambient_dim:
                raise DimensionMismatch("basis row length mismatch")
            if not any(row):
                raise ValueError("zero basis row")
            if any(not (0 <= x < self.q) for x in row):
                raise ValueError("basis entry not reduced mod q")

    @property
    def nrows(self) -> int:
        return len(self.basis)

    def cardinality(self) -> int:
        p, d = prime_power(self.q)
        total = 1
        for row in self.basis:
            pivot = next(x for x in row if x != 0)
            total *= self.q // pivot
        return total

    def pivot_values(self) -> tuple[int, ...]:
        return tuple(next(x for x in row if x != 0) for row in self.basis)

    def contains(self, vec: Sequence[int]) -> bool:
        return not any(self.reduce_vector(vec))

    def reduce_vector(self, vec: Sequence[int]) -> tuple[int, ...]:
        """Canonical coset representative of vec modulo this submodule.

        Greedy left-to-right reduction is complete because the basis has
        the Howell closure property.
        """
        if len(vec) != self.ambient_dim:
            raise DimensionMismatch("vector length mismatch")
        q = self.q
        v = [x % q for x in vec]
        for row in self.basis:
            j = next(k for k, x in enumerate(row) if x != 0)
            coeff = v[j] // row[j]
            if coeff:
                for k in range(j, self.ambient_dim):
                    v[k] = (v[k] - coeff * row[k]) % q
        return tuple(v)

    def vectors(self) -> Iterable[tuple[int, ...]]:
        """Enumerate all elements (intended for small subspaces only)."""
        import itertools

        orders = [self.q // piv for piv in self.pivot_values()]
        for coeffs in itertools.product(*(range(o) for o in orders)):
            acc = [0] * self.ambient_dim
            for c, row in zip(coeffs, self.basis):
                if c:
                    for k in range(self.ambient_dim):
                        acc[k] = (acc[k] + c * row[k]) % self.q
            yield tuple(acc)


def zero_subspace(q: int, ambient_dim: int) -> ZqSubspace:
    return ZqSubspace(q, ambient_dim, ())


def full_subspace(q: int, ambient_dim: int) -> ZqSubspace:
    rows = tuple(tuple(1 if i == j else 0 for j in range(ambient_dim)) for i in range(ambient_dim))
    return ZqSubspace(q, ambient_dim, rows)


def canonicalize(q: int, ambient_dim: int, rows: Iterable[Sequence[int]]) -> ZqSubspace:
    """Howell canonical form of the row span; idempotent by construction."""
    return ZqSubspace(q, ambient_dim, _howell(q, ambient_dim, rows))


def _howell(q: int, ambient: int, rows: Iterable[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    p, d = prime_power(q)
    work = [[x % q for x in row] for row in rows]
    for row in work:
        if len(row) != ambient:
            raise DimensionMismatch("row length mismatch")
    r = 0
    for c in range(ambient):
        pivot_row = next((i for i in range(r, len(work)) if work[i][c] != 0), None)
        if pivot_row is None:
            continue
        work[r], work[pivot_row] = work[pivot_row], work[r]
        # Clear the column below via unimodular 2x2 transforms.
        for i in range(r + 1, len(work)):
            if work[i][c] == 0:
                continue
            g, s, t, u, v = gcdex2(work[r][c], work[i][c], q)
            new_r = [(s * work[r][k] + t * work[i][k]) % q for k in range(ambient)]
            new_i = [(u * work[r][k] + v * work[i][k]) % q for k in range(ambient)]
            work[r], work[i] = new_r, new_i
        # Normalize the pivot to a power of p.
        x = unit_multiplier(work[r][c], q, p)
        if x != 1:
            work[r] = [(x * e) % q for e in work[r]]
        pivot = work[r][c]
        # Reduce entries above the pivot into [0, pivot).
        for i in range(r):
            coeff = work[i][c] // pivot
            if coeff:
                work[i] = [(work[i][k] - coeff * work[r][k]) % q for k in range(ambient)]
        # Closure row: the annihilator multiple of the pivot row may have
        # support strictly to the right and must itself be spanned.
        ann = annihilator_generator(pivot, q)
        if ann % q != 0:
            extra = [(ann * e) % q for e in work[r]]
            if any(extra):
                work.append(extra)
        r += 1
    return tuple(tuple(row) for row in work[:r] if any(row))


def smith_normal_form(m: ZqMatrix) -> tuple[ZqMatrix, ZqMatrix, ZqMatrix]:
    """Diagonalize m over Z/q: returns (d, p, qm) with p*m*qm = d.

    Diagonal entries are powers of the residue prime (0 standing for
    p^d) in ascending divisibility order; p and qm are invertible.
    """
    q = m.q
    pr, dd = prime_power(q)
    a = [list(row) for row in m.entries]
    nr, nc = m.nrows, m.ncols
    left = [[1 if i == j else 0 for j in range(nr)] for i in range(nr)]
    right = [[1 if i == j else 0 for j in range(nc)] for i in range(nc)]

    def row_op(dst, src, mult):
        for k in range(nc):
            a[dst][k] = (a[dst][k] - mult * a[src][k]) % q
        for k in range(nr):
            left[dst][k] = (left[dst][k] - mult * left[src][k]) % q

    def col_op(dst, src, mult):
        for k in range(nr):
            a[k][dst] = (a[k][dst] - mult * a[k][src]) % q
        for k in range(nc):
            right[k][dst] = (right[k][dst] - mult * right[k][src]) % q

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        left[i], left[j] = left[j], left[i]

    def swap_cols(i, j):
        for k in range(nr):
            a[k][i], a[k][j] = a[k][j], a[k][i]
        for k in range(nc):
            right[k][i], right[k][j] = right[k][j], right[k][i]

    def scale_row(i, x):
        for k in range(nc):
            a[i][k] = (a[i][k] * x) % q
        for k in range(nr):
            left[i][k] = (left[i][k] * x) % q

    for t in range(min(nr, nc)):
        # Pick the entry of minimal valuation in the remaining block: the
        # cleared column and row then stay divisible by the pivot, which
        # yields the divisibility chain directly.
        best = None
        for i in range(t, nr):
            for j in range(t, nc):
                if a[i][j] != 0:
                    v = pvaluation(a[i][j], pr, dd)
                    if best is None or v < best[0]:
                        best = (v, i, j)
        if best is None:
            break
        v, bi, bj = best
        if bi != t:
            swap_rows(t, bi)
        if bj != t:
            swap_cols(t, bj)
        scale_row(t, unit_multiplier(a[t][t], q, pr))
        pivot = a[t][t]
        for i in range(nr):
            if i != t and a[i][t] != 0:
                row_op(i, t, a[i][t] // pivot)
        for j in range(nc):
            if j != t and a[t][j] != 0:
                col_op(j, t, a[t][j] // pivot)

    d = ZqMatrix(q, nr, nc, tuple(tuple(row) for row in a))
    pm = ZqMatrix(q, nr, nr, tuple(tuple(row) for row in left))
    qm = ZqMatrix(q, nc, nc, tuple(tuple(row) for row in right))
    return d, pm, qm


def diagonal_of(d: ZqMatrix) -> tuple[int, ...]:
    return tuple(d.entries[i][i] for i in range(min(d.nrows, d.ncols)))


def kernel(m: ZqMatrix) -> ZqSubspace:
    """{v in (Z/q)^ncols : m v = 0}, via the Smith form."""
    q = m.q
    if m.nrows == 0:
        return full_subspace(q, m.ncols)
    d, _, qm = smith_normal_form(m)
    diag = diagonal_of(d)
    rows = []
    for i in range(m.ncols):
        di = diag[i] if i < len(diag) else 0
        ann = annihilator_generator(di, q)
        col = tuple((ann * qm.entries[k][i]) % q for k in range(m.ncols))
        if any(col):
            rows.append(col)
    return canonicalize(q, m.ncols, rows)


def image(m: ZqMatrix) -> ZqSubspace:
    """Column space of m, i.e. the row span of its transpose."""
    return canonicalize(m.q, m.nrows, m.transpose().entries)


def row_space(m: ZqMatrix) -> ZqSubspace:
    return canonicalize(m.q, m.ncols, m.entries)


def annihilator(w: ZqSubspace) -> ZqSubspace:
    """{v : v.b = 0 for every basis row b}, under the standard dot pairing."""
    if w.nrows == 0:
        return full_subspace(w.q, w.ambient_dim)
    return kernel(ZqMatrix.from_rows(w.q, w.basis, w.ambient_dim))


def subspace_equal(a: ZqSubspace, b: ZqSubspace) -> bool:
    return a == b


def subspace_sum(a: ZqSubspace, b: ZqSubspace) -> ZqSubspace:
    if a.q != b.q or a.ambient_dim != b.ambient_dim:
        raise DimensionMismatch("subspace sum mismatch")
    return canonicalize(a.q, a.ambient_dim, a.basis + b.basis)


def subspace_intersect(a: ZqSubspace, b: ZqSubspace) -> ZqSubspace:
    """Intersection computed through the perfect pairing:
    (A cap B) = ann(ann(A) + ann(B))."""
    return annihilator(subspace_sum(annihilator(a), annihilator(b)))


def invariant_factors(w: ZqSubspace) -> tuple[int, ...]:
    """Orders of the cyclic factors of w, descending (its divisor chain)."""
    if w.nrows == 0:
        return ()
    d, _, _ = smith_normal_form(ZqMatrix.from_rows(w.q, w.basis, w.ambient_dim))
    factors = []
    for x in diagonal_of(d):
        if x != 0:
            factors.append(w.q // math.gcd(x, w.q))
    return tuple(sorted((f for f in factors if f > 1), reverse=True))
