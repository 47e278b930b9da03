"""Arithmetic in the third q-central truncation of free pro-p groups.

For S free on n generators, the quotient S^[3] by the third term of the
descending q-central series has unique normal forms

    sigma_1^{e_1} ... sigma_n^{e_n} * prod_{k<l} w_kl^{c_kl},

with e_k mod q^2, c_kl mod q and w_kl = [sigma_k, sigma_l] central.
Multiplication is collection: transposing sigma_k^a leftwards past
sigma_l^b (k < l) deposits w_kl^{-ab}, so the law is biadditive and
needs no generic rewriting.

Quotients G^[3] of S^[3] by a subgroup W of the central layer carry the
same normal forms with the central part reduced to a canonical coset
representative mod W.  Presentations whose relators stick out of the
Frattini subgroup are reduced to that shape by eliminating generators
with unit pivots; see relator_subspace.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass

from . import presentations as pres
from .freelie import word_nontriviality_certificate
from .zqlin import (
    ZqMatrix,
    ZqSubspace,
    canonicalize,
    diagonal_of,
    kernel,
    prime_power,
    row_space,
    smith_normal_form,
    subspace_intersect,
    zero_subspace,
)

MAX_GENERATORS = 8

CentralSubspace = ZqSubspace


class MixedExponentError(ValueError):
    """Relator images are p-divisible but nonzero in the degree-1 layer.

    Such presentations have a maximal elementary-abelian mod-q quotient
    smaller than (Z/q)^n and fall outside the range of groups this
    engine can put back into normal form.  Only possible for q = p^d
    with d > 1.
    """


def pair_list(n: int) -> list[tuple[int, int]]:
    return [(k, l) for k in range(n) for l in range(k + 1, n)]


@dataclass(frozen=True)
class TruncElement:
    """Normal form: generator exponents mod q^2, commutator exponents mod q."""

    e: tuple[int, ...]
    c: tuple[int, ...]


@dataclass(frozen=True)
class TruncGroup:
    """S^[3] (w = 0) or a central quotient G^[3] = S^[3]/w."""

    n: int
    q: int
    w: CentralSubspace

    def __post_init__(self):
        p, d = prime_power(self.q)
        # n = 0 is allowed so that fully eliminated presentations still
        # have a home (the trivial group).
        if not (0 <= self.n <= MAX_GENERATORS):
            raise ValueError(f"generator count {self.n} outside 0..{MAX_GENERATORS}")
        if self.w.ambient_dim != self.layer_rank or self.w.q != self.q:
            raise ValueError("central subspace has wrong ambient dimension or modulus")

    @property
    def p(self) -> int:
        return prime_power(self.q)[0]

    @property
    def npairs(self) -> int:
        return self.n * (self.n - 1) // 2

    @property
    def layer_rank(self) -> int:
        return self.n + self.n * (self.n - 1) // 2

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return pair_list(self.n)

    def order(self) -> int:
        return self.q ** (2 * self.n + self.npairs) // self.w.cardinality()

    def identity(self) -> TruncElement:
        return TruncElement((0,) * self.n, (0,) * self.npairs)

    def generator(self, k: int) -> TruncElement:
        if not 0 <= k < self.n:
            raise ValueError(f"no generator {k}")
        e = tuple(1 if i == k else 0 for i in range(self.n))
        return self.normalize(TruncElement(e, (0,) * self.npairs))

    def is_free(self) -> bool:
        return self.w.nrows == 0

    # -- normal forms -----------------------------------------------------

    def normalize(self, x: TruncElement) -> TruncElement:
        """Reduce the central (t|c) part of x to its canonical coset rep."""
        q = self.q
        if self.w.nrows == 0:
            return x
        vec = tuple(ek // q for ek in x.e) + x.c
        red = self.w.reduce_vector(vec)
        e = tuple((x.e[k] % q) + q * red[k] for k in range(self.n))
        return TruncElement(e, tuple(red[self.n:]))

    def _check(self, x: TruncElement):
        if len(x.e) != self.n or len(x.c) != self.npairs:
            raise ValueError("element has wrong shape for this group")

    # -- group law --------------------------------------------------------

    def multiply(self, a: TruncElement, b: TruncElement) -> TruncElement:
        self._check(a)
        self._check(b)
        q, qq = self.q, self.q * self.q
        e = tuple((x + y) % qq for x, y in zip(a.e, b.e))
        c = list(x + y for x, y in zip(a.c, b.c))
        for idx, (k, l) in enumerate(self.pairs):
            c[idx] = (c[idx] - b.e[k] * a.e[l]) % q
        return self.normalize(TruncElement(e, tuple(c)))

    def inverse(self, a: TruncElement) -> TruncElement:
        self._check(a)
        q, qq = self.q, self.q * self.q
        e = tuple((-x) % qq for x in a.e)
        c = list((-x) % q for x in a.c)
        for idx, (k, l) in enumerate(self.pairs):
            c[idx] = (c[idx] - a.e[k] * a.e[l]) % q
        return self.normalize(TruncElement(e, tuple(c)))

    def power(self, a: TruncElement, m: int) -> TruncElement:
        if m < 0:
            return self.power(self.inverse(a), -m)
        out = self.identity()
        base = a
        while m:
            if m & 1:
                out = self.multiply(out, base)
            base = self.multiply(base, base)
            m >>= 1
        return out

    def commutator(self, a: TruncElement, b: TruncElement) -> TruncElement:
        return self.multiply(
            self.multiply(self.inverse(a), self.inverse(b)), self.multiply(a, b)
        )

    def evaluate_word(
        self, word: pres.Word, env: dict[int, TruncElement] | None = None
    ) -> TruncElement:
        """Homomorphic evaluation; env overrides generator images."""
        match word:
            case pres.Generator(k):
                if env is not None:
                    if k not in env:
                        raise ValueError(f"no image supplied for generator {k}")
                    return env[k]
                return self.generator(k)
            case pres.Inverse(b):
                return self.inverse(self.evaluate_word(b, env))
            case pres.Power(b, m):
                return self.power(self.evaluate_word(b, env), m)
            case pres.Product(fs):
                out = self.identity()
                for f in fs:
                    out = self.multiply(out, self.evaluate_word(f, env))
                return out
            case pres.Commutator(a, b):
                return self.commutator(self.evaluate_word(a, env), self.evaluate_word(b, env))
        raise TypeError(f"not a word node: {word!r}")

    # -- central layer ----------------------------------------------------

    def is_central(self, x: TruncElement) -> bool:
        return all(ek % self.q == 0 for ek in x.e)

    def central_vector(self, x: TruncElement) -> tuple[int, ...]:
        """Coordinates (t | c) of a central element in the layer (Z/q)^{n + C(n,2)}."""
        if not self.is_central(x):
            raise ValueError("element is not in the central layer")
        return tuple(ek // self.q for ek in x.e) + x.c

    def central_element(self, vec: tuple[int, ...]) -> TruncElement:
        if len(vec) != self.layer_rank:
            raise ValueError("central vector has wrong length")
        e = tuple((self.q * t) % (self.q * self.q) for t in vec[: self.n])
        c = tuple(x % self.q for x in vec[self.n:])
        return self.normalize(TruncElement(e, c))

    def elements(self):
        """Iterate all canonical normal forms (small groups only)."""
        q, qq = self.q, self.q * self.q
        seen = set()
        for e in itertools.product(range(qq), repeat=self.n):
            for c in itertools.product(range(q), repeat=self.npairs):
                x = self.normalize(TruncElement(e, c))
                if x not in seen:
                    seen.add(x)
                    yield x


def free_truncation(n: int, q: int) -> TruncGroup:
    """S^[3] for the free pro-p group on n generators."""
    npairs = n * (n - 1) // 2
    return TruncGroup(n, q, zero_subspace(q, n + npairs))


def quotient(s3: TruncGroup, w: CentralSubspace) -> TruncGroup:
    if not s3.is_free():
        raise ValueError("quotient expects the free truncation")
    if w.ambient_dim != s3.layer_rank or w.q != s3.q:
        raise ValueError("central subspace has wrong ambient dimension or modulus")
    return TruncGroup(s3.n, s3.q, w)


# ---------------------------------------------------------------------------
# Relator subspaces and minimization


@dataclass(frozen=True)
class MinimalityReport:
    minimal: bool
    eliminated: tuple[tuple[str, str], ...]  # (generator name, pivot relator)
    kept: tuple[str, ...]
    kept_indices: tuple[int, ...]
    dropped_trivial: tuple[str, ...]
    warnings: tuple[str, ...]


def relator_subspace(
    presentation: pres.Presentation, certificate_class: int = 5
) -> tuple[CentralSubspace, MinimalityReport]:
    """Span of the relator images in the central layer, after minimization.

    Relators whose image already lies in the Frattini subgroup contribute
    their (t | c) coordinates directly.  A relator with a unit degree-1
    coefficient makes the presentation non-minimal: the corresponding
    generator is eliminated by a change of relator basis, and the span is
    computed over the surviving generators.  Relators that are trivial in
    the free group (no nontriviality certificate) are dropped with a
    warning.  Raises MixedExponentError when elimination stalls on a
    p-divisible nonzero image.
    """
    n, q = presentation.n, presentation.q
    p, d = prime_power(q)
    group = free_truncation(n, q)
    warnings: list[str] = []
    dropped: list[str] = []

    all_sources = pres.relator_source_list(presentation)

    ys: list[TruncElement] = []
    sources: list[str] = []
    for word, source in zip(presentation.relators, all_sources):
        y = group.evaluate_word(word)
        if y == group.identity():
            cert = word_nontriviality_certificate(word, n, min(certificate_class, 6))
            if cert is None:
                dropped.append(source)
                warnings.append(
                    f"relator {source!r} is trivial up to class {certificate_class}; dropped"
                )
                continue
        ys.append(y)
        sources.append(source)

    # Unit-pivot Gauss-Jordan on the degree-1 images, performed by relator
    # replacement inside S^[3] so the normal closure never changes.
    pivot_of_row: dict[int, int] = {}
    pivot_cols: set[int] = set()
    for col in range(n):
        found = None
        for i in range(len(ys)):
            if i in pivot_of_row:
                continue
            if ys[i].e[col] % p != 0:
                found = i
                break
        if found is None:
            continue
        i = found
        u = pow(ys[i].e[col] % q, -1, q)
        if u != 1:
            ys[i] = group.power(ys[i], u)
        for j in range(len(ys)):
            if j == i:
                continue
            alpha = ys[j].e[col] % q
            if alpha:
                ys[j] = group.multiply(ys[j], group.power(group.inverse(ys[i]), alpha))
        pivot_of_row[i] = col
        pivot_cols.add(col)

    for i, y in enumerate(ys):
        if i in pivot_of_row:
            continue
        if not group.is_central(y):
            raise MixedExponentError(
                f"relator {sources[i]!r} has p-divisible nonzero degree-1 image; "
                "the mod-q abelianization is not elementary of exponent q"
            )

    central_rows: list[tuple[int, ...]] = []
    for i, y in enumerate(ys):
        if i in pivot_of_row:
            central_rows.append(group.central_vector(group.power(y, q)))
            for j in range(n):
                central_rows.append(
                    group.central_vector(group.commutator(y, group.generator(j)))
                )
        else:
            central_rows.append(group.central_vector(y))

    big_span = canonicalize(q, group.layer_rank, central_rows)

    kept_indices = tuple(k for k in range(n) if k not in pivot_cols)
    eliminated = tuple(
        (presentation.generators[col], sources[i])
        for i, col in sorted(pivot_of_row.items(), key=lambda kv: kv[1])
    )

    if not pivot_cols:
        return big_span, MinimalityReport(
            minimal=True,
            eliminated=(),
            kept=presentation.generators,
            kept_indices=kept_indices,
            dropped_trivial=tuple(dropped),
            warnings=tuple(warnings),
        )

    # Restrict the central span to the coordinates of the kept generators:
    # that intersection is exactly what the relator subgroup meets of the
    # smaller free truncation.
    pairs = group.pairs
    kept_set = set(kept_indices)
    kept_coords = [k for k in range(n) if k in kept_set] + [
        n + idx for idx, (k, l) in enumerate(pairs) if k in kept_set and l in kept_set
    ]
    coord_rows = []
    for coord in kept_coords:
        row = [0] * group.layer_rank
        row[coord] = 1
        coord_rows.append(row)
    coord_subspace = canonicalize(q, group.layer_rank, coord_rows)
    restricted = subspace_intersect(big_span, coord_subspace)

    reindex = {coord: i for i, coord in enumerate(kept_coords)}
    small_rows = []
    for row in restricted.basis:
        small = [0] * len(kept_coords)
        for coord, x in enumerate(row):
            if x:
                small[reindex[coord]] = x
        small_rows.append(small)
    small_span = canonicalize(q, len(kept_coords), small_rows)

    # The quotient order must agree whether computed upstairs or on the
    # reduced generating set; a mismatch means a bug, not bad input.
    s = len(pivot_cols)
    n2 = len(kept_indices)
    closure_order = q**s * big_span.cardinality()
    upstairs = group.order() // closure_order
    downstairs = q ** (2 * n2 + n2 * (n2 - 1) // 2) // small_span.cardinality()
    if upstairs != downstairs:
        raise AssertionError("generator elimination produced inconsistent orders")

    report = MinimalityReport(
        minimal=False,
        eliminated=eliminated,
        kept=tuple(presentation.generators[k] for k in kept_indices),
        kept_indices=kept_indices,
        dropped_trivial=tuple(dropped),
        warnings=tuple(warnings)
        + tuple(f"eliminated generator {g!r} using relator {r!r}" for g, r in eliminated),
    )
    return small_span, report


def truncated_quotient(presentation: pres.Presentation) -> tuple[TruncGroup, MinimalityReport]:
    """G^[3] for a finitely presented pro-p group, with the minimality log."""
    w, report = relator_subspace(presentation)
    n2 = len(report.kept_indices)
    return quotient(free_truncation(n2, presentation.q), w), report


# ---------------------------------------------------------------------------
# Invariants and isomorphism screening


@dataclass(frozen=True)
class GroupInvariants:
    order: int
    abelianization: tuple[int, ...]  # cyclic factor orders, ascending
    center_order: int
    exponent: int


def group_invariants(g: TruncGroup) -> GroupInvariants:
    q, n = g.q, g.n
    p, d = prime_power(q)

    # Abelianization: (Z/q^2)^n modulo q times the t-block projection of w.
    t_rows = [row[:n] for row in g.w.basis]
    if t_rows:
        diag, _, _ = smith_normal_form(ZqMatrix.from_rows(q, t_rows, n))
        dvals = list(diagonal_of(diag))
    else:
        dvals = []
    dvals += [0] * (n - len(dvals))
    ab = tuple(sorted(q * (x if x else q) for x in dvals))

    # Center: degree-1 classes whose commutators with every generator fall
    # inside the commutator-block part of w.
    wc_rows = [row[n:] for row in g.w.basis if not any(row[:n])]
    npairs = g.npairs
    if n == 1:
        center = g.order()
    else:
        free = free_truncation(n, q)
        cols = []
        for k in range(n):
            colvecs = []
            for j in range(n):
                comm = free.commutator(free.generator(k), free.generator(j))
                colvecs.append(free.central_vector(comm)[n:])
            cols.append(colvecs)
        # unknowns: ebar (n) plus one lambda per generator equation
        nlam = len(wc_rows)
        rows = []
        for j in range(n):
            for idx in range(npairs):
                row = [cols[k][j][idx] for k in range(n)]
                for block in range(n):
                    if block == j:
                        row.extend((-wc_rows[l][idx]) % q for l in range(nlam))
                    else:
                        row.extend([0] * nlam)
                rows.append(row)
        if rows:
            ker = kernel(ZqMatrix.from_rows(q, rows, n + n * nlam))
            e_part = canonicalize(q, n, [r[:n] for r in ker.basis])
            size_e = e_part.cardinality()
        else:
            size_e = q**n
        center = size_e * q ** (n + npairs) // g.w.cardinality()

    # Exponent: q * smallest p-power j with p^j u_k in w for all k and,
    # for p = 2, p^j (q/2) w_kl in w for all pairs.
    tests = []
    for k in range(n):
        vec = [0] * g.layer_rank
        vec[k] = 1
        tests.append(vec)
    if p == 2:
        for idx in range(npairs):
            vec = [0] * g.layer_rank
            vec[n + idx] = q // 2
            tests.append(vec)
    exponent = q * q
    for j in range(d + 1):
        if all(g.w.contains([(x * p**j) % q for x in vec]) for vec in tests):
            exponent = q * p**j
            break

    return GroupInvariants(g.order(), ab, center, exponent)


DEFAULT_BUDGET = 200_000


def configured_budget() -> int:
    """Brute-force step cap, overridable through GQ3_BUDGET."""
    raw = os.environ.get("GQ3_BUDGET", "").strip()
    if raw:
        value = int(raw)
        if value > 0:
            return value
    return DEFAULT_BUDGET


def brute_isomorphic(a: TruncGroup, b: TruncGroup, budget: int | None = None) -> bool | None:
    """Decide isomorphism: canonical data, then invariants, then search.

    Equal (n, q, w) is a positive fast path; differing invariants a
    negative one.  Otherwise generating tuples of b are searched for one
    satisfying a's relations; None means the budget ran out first.
    """
    if budget is None:
        budget = configured_budget()
    if (a.n, a.q) == (b.n, b.q) and a.w == b.w:
        return True
    if group_invariants(a) != group_invariants(b):
        return False
    if b.order() > budget:
        return None
    elements = list(b.elements())
    p = prime_power(b.q)[0]
    examined = 0
    for images in itertools.product(elements, repeat=a.n):
        examined += 1
        if examined > budget:
            return None
        # generating tuples only: degree-1 parts must span mod p
        mat = ZqMatrix.from_rows(p, [[x % p for x in img.e] for img in images], b.n)
        if row_space(mat).cardinality() != p**b.n:
            continue
        if _respects_relations(a, b, images):
            return True
    return False


def _respects_relations(a: TruncGroup, b: TruncGroup, images) -> bool:
    q = a.q
    for row in a.w.basis:
        acc = b.identity()
        for k in range(a.n):
            t = row[k]
            if t:
                acc = b.multiply(acc, b.power(images[k], q * t))
        for idx, (k, l) in enumerate(a.pairs):
            cexp = row[a.n + idx]
            if cexp:
                acc = b.multiply(acc, b.power(b.commutator(images[k], images[l]), cexp))
        if acc != b.identity():
            return False
    return True
