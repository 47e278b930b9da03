"""Graded Z/q-algebras, quadratic hulls, and mod-q Milnor K-ring presets.

A graded algebra is stored through its relation subspaces: degree r
lives in the q^(rank^r)-element tensor coordinate space and T_r is the
canonical subspace of relations, so A_r = (Z/q)^(rank^r) / T_r.  The
quadratic hull generates T_r from the degree-2 relations placed in all
slot pairs, which is the whole structure of a quadratic algebra.

The field presets compute their degree-2 relations from first
principles: an exhaustive Steinberg sweep a (x) (1-a) over a bounded
Laurent-monomial window for the residue-field and local presets, and a
2-adic Hilbert-symbol oracle (square testing at fixed 2-power
precision) for the dyadic one.  Window or precision doubling must not
change the computed span; if it does, the oracle raises rather than
returning an unstable answer.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

from . import presentations as pres
from .cohom import CohomologyData, Report, TestOutcome, cohomology_data_from_presentation
from .zqlin import (
    ZqMatrix,
    ZqSubspace,
    canonicalize,
    kernel,
    prime_power,
    subspace_equal,
)

MAX_RANK = 4
MAX_DEGREE = 4
MAX_ELL = 10_000


class OracleInstability(AssertionError):
    """Doubling the enumeration window changed a computed relation span."""


class PresetError(ValueError):
    """Field preset and modulus are incompatible."""


# ---------------------------------------------------------------------------
# Graded algebras


@dataclass(frozen=True)
class GradedAlgebra:
    q: int
    gen_count: int
    degree_bound: int
    components: dict[int, ZqSubspace]  # degree -> relation subspace
    commutativity_flag: bool
    basis_names: tuple[str, ...] = ()

    def __post_init__(self):
        prime_power(self.q)
        if not (1 <= self.gen_count <= MAX_RANK):
            raise ValueError(f"degree-1 rank {self.gen_count} outside 1..{MAX_RANK}")
        if not (2 <= self.degree_bound <= MAX_DEGREE):
            raise ValueError(f"degree bound {self.degree_bound} outside 2..{MAX_DEGREE}")
        for r in range(2, self.degree_bound + 1):
            t = self.components.get(r)
            if t is None or t.ambient_dim != self.gen_count**r:
                raise ValueError(f"missing or malformed relation subspace in degree {r}")
        self._check_multiplicativity()
        if self.commutativity_flag:
            self._check_commutativity()

    def _check_multiplicativity(self):
        for r in range(2, self.degree_bound):
            t, t_next = self.components[r], self.components[r + 1]
            for row in t.basis:
                for i in range(self.gen_count):
                    left = _tensor_shift(row, self.gen_count, r, i, prepend=True)
                    right = _tensor_shift(row, self.gen_count, r, i, prepend=False)
                    if not (t_next.contains(left) and t_next.contains(right)):
                        raise ValueError(
                            f"relations in degree {r} do not multiply into degree {r + 1}"
                        )

    def _check_commutativity(self):
        t2 = self.components[2]
        m = self.gen_count
        for i in range(m):
            for j in range(i, m):
                row = [0] * (m * m)
                if i == j:
                    row[i * m + i] = 2 % self.q
                else:
                    row[i * m + j] = 1
                    row[j * m + i] = 1
                if any(row) and not t2.contains(row):
                    raise ValueError("degree-2 relations do not contain commutativity")

    def degree_cardinality(self, r: int) -> int:
        if r == 0:
            return self.q
        if r == 1:
            return self.q**self.gen_count
        return self.q ** (self.gen_count**r) // self.components[r].cardinality()

    def degree_divisors(self, r: int) -> tuple[int, ...]:
        """Cyclic factor orders of A_r, descending, trivial ones dropped."""
        if r == 1:
            return (self.q,) * self.gen_count
        t = self.components[r]
        n_coords = self.gen_count**r
        if t.nrows == 0:
            return (self.q,) * n_coords
        from .zqlin import diagonal_of, smith_normal_form

        d, _, _ = smith_normal_form(ZqMatrix.from_rows(self.q, t.basis, n_coords))
        diag = list(diagonal_of(d)) + [0] * (n_coords - min(t.nrows, n_coords))
        factors = [x if x else self.q for x in diag]
        return tuple(sorted((f for f in factors if f > 1), reverse=True))

    def degree_rank(self, r: int) -> int:
        """Number of free Z/q-factors of A_r."""
        if r == 1:
            return self.gen_count
        return sum(1 for f in self.degree_divisors(r) if f == self.q)


def _tensor_shift(row, m: int, r: int, i: int, prepend: bool):
    """e_i (x) row or row (x) e_i as a vector in the degree-(r+1) space."""
    out = [0] * m ** (r + 1)
    for idx, x in enumerate(row):
        if not x:
            continue
        if prepend:
            out[i * m**r + idx] = x
        else:
            out[idx * m + i] = x
    return out


def _monomials(m: int, r: int):
    return itertools.product(range(m), repeat=r)


def quadratic_hull(
    q: int,
    a1_rank: int,
    zero_pairs: ZqSubspace,
    r_max: int,
    basis_names: tuple[str, ...] = (),
) -> GradedAlgebra:
    """The graded algebra generated in degree 1 with relations generated
    by zero_pairs: T_r is spanned by the degree-2 relations placed in
    every slot pair, tensored with basis vectors elsewhere.
    """
    if not (1 <= a1_rank <= MAX_RANK):
        raise ValueError(f"rank {a1_rank} outside 1..{MAX_RANK}")
    if not (2 <= r_max <= MAX_DEGREE):
        raise ValueError(f"degree bound {r_max} outside 2..{MAX_DEGREE}")
    if a1_rank**r_max > 256:
        raise ValueError("tensor coordinate space exceeds the hard cap")
    if zero_pairs.ambient_dim != a1_rank * a1_rank or zero_pairs.q != q:
        raise ValueError("zero_pairs has wrong ambient dimension or modulus")

    m = a1_rank
    components = {2: zero_pairs}
    for r in range(3, r_max + 1):
        rows = []
        for i, j in itertools.combinations(range(r), 2):
            rest = [s for s in range(r) if s not in (i, j)]
            for fill in _monomials(m, r - 2):
                for zrow in zero_pairs.basis:
                    out = [0] * m**r
                    for (a, b) in _monomials(m, 2):
                        x = zrow[a * m + b]
                        if not x:
                            continue
                        slots = [0] * r
                        slots[i] = a
                        slots[j] = b
                        for s, g in zip(rest, fill):
                            slots[s] = g
                        idx = 0
                        for s in slots:
                            idx = idx * m + s
                        out[idx] = (out[idx] + x) % q
                    if any(out):
                        rows.append(out)
        components[r] = canonicalize(q, m**r, rows)

    commutative = _contains_commutativity(q, m, zero_pairs)
    return GradedAlgebra(q, m, r_max, components, commutative, basis_names)


def _contains_commutativity(q: int, m: int, t2: ZqSubspace) -> bool:
    for i in range(m):
        for j in range(i, m):
            row = [0] * (m * m)
            if i == j:
                row[i * m + i] = 2 % q
            else:
                row[i * m + j] = 1
                row[j * m + i] = 1
            if any(row) and not t2.contains(row):
                return False
    return True


def quadraticity_test(a: GradedAlgebra) -> dict[int, bool]:
    """Does the hull of the degree-(1,2) data reproduce every component?"""
    hull = quadratic_hull(a.q, a.gen_count, a.components[2], a.degree_bound)
    return {
        r: subspace_equal(hull.components[r], a.components[r])
        for r in range(2, a.degree_bound + 1)
    }


# ---------------------------------------------------------------------------
# Field presets


@dataclass(frozen=True)
class FieldPreset:
    kind: str  # "finite_field" | "tame_local" | "two_adic"
    ell: int = 0

    def __post_init__(self):
        if self.kind not in ("finite_field", "tame_local", "two_adic"):
            raise PresetError(f"unknown preset {self.kind!r}")
        if self.kind in ("finite_field", "tame_local"):
            if not (2 <= self.ell <= MAX_ELL) or not _is_prime(self.ell):
                raise PresetError(f"residue characteristic {self.ell} must be a prime <= {MAX_ELL}")

    def validate_modulus(self, q: int):
        p, d = prime_power(q)
        if self.kind == "two_adic":
            if q != 2:
                raise PresetError("the dyadic preset is defined for q = 2 only")
        else:
            if (self.ell - 1) % q != 0:
                raise PresetError(
                    f"q = {q} does not divide ell - 1 = {self.ell - 1}: "
                    "the field has no q-th roots of unity"
                )

    def describe(self) -> str:
        if self.kind == "finite_field":
            return f"finite field F_{self.ell}"
        if self.kind == "tame_local":
            return f"Laurent series field F_{self.ell}((t))"
        return "dyadic field Q_2"


def _is_prime(m: int) -> bool:
    if m < 2:
        return False
    return all(m % f for f in range(2, int(math.isqrt(m)) + 1))


def parse_preset(text: str) -> FieldPreset:
    """CLI syntax: finite:ell, tame_local:ell, two_adic."""
    name, _, arg = text.partition(":")
    name = name.strip()
    if name in ("finite", "finite_field"):
        return FieldPreset("finite_field", int(arg))
    if name in ("tame", "tame_local"):
        return FieldPreset("tame_local", int(arg))
    if name in ("two_adic", "2adic", "q2"):
        return FieldPreset("two_adic")
    raise PresetError(f"unknown preset {text!r}")


def _primitive_root(ell: int) -> int:
    order = ell - 1
    prime_factors = {f for f in range(2, order + 1) if order % f == 0 and _is_prime(f)}
    for g in range(2, ell):
        if all(pow(g, order // f, ell) != 1 for f in prime_factors):
            return g
    raise AssertionError(f"no primitive root modulo {ell}")


def _dlog_table(ell: int, g: int) -> dict[int, int]:
    table = {}
    x = 1
    for e in range(ell - 1):
        table[x] = e
        x = (x * g) % ell
    return table


def _grcomm_rows(q: int, m: int) -> list[list[int]]:
    rows = []
    for i in range(m):
        for j in range(i, m):
            row = [0] * (m * m)
            if i == j:
                row[i * m + i] = 2 % q
            else:
                row[i * m + j] = 1
                row[j * m + i] = 1
            if any(row):
                rows.append(row)
    return rows


def _outer(q: int, m: int, u, v) -> list[int]:
    row = [0] * (m * m)
    for a in range(m):
        for b in range(m):
            row[a * m + b] = (u[a] * v[b]) % q
    return row


def steinberg_relations_finite(ell: int, q: int) -> ZqSubspace:
    """Span of a (x) (1-a) over all of F_ell, on the rank-1 basis u."""
    g = _primitive_root(ell)
    dlog = _dlog_table(ell, g)
    rows = _grcomm_rows(q, 1)
    for a in range(2, ell):  # a != 0, 1
        one_minus = (1 - a) % ell
        row = _outer(q, 1, (dlog[a] % q,), (dlog[one_minus] % q,))
        if any(row):
            rows.append(row)
    return canonicalize(q, 1, rows)


def steinberg_relations_tame(ell: int, q: int, window: int = 2) -> ZqSubspace:
    """Span of a (x) (1-a) over Laurent monomials a = c t^v, |v| <= window.

    Classes are (unit dlog mod q, valuation mod q) on the basis (u, t).
    The class of 1 - c t^v reads off the valuation and leading unit:
    v > 0 gives the trivial class, v = 0 the class of 1 - c, and v < 0
    the class of -c t^v.
    """
    g = _primitive_root(ell)
    dlog = _dlog_table(ell, g)
    rows = _grcomm_rows(q, 2)
    for v in range(-window, window + 1):
        for c in range(1, ell):
            a_class = (dlog[c] % q, v % q)
            if v > 0:
                b_class = (0, 0)
            elif v == 0:
                if c == 1:
                    continue
                b_class = (dlog[(1 - c) % ell] % q, 0)
            else:
                b_class = (dlog[(-c) % ell] % q, v % q)
            row = _outer(q, 2, a_class, b_class)
            if any(row):
                rows.append(row)
    return canonicalize(q, 4, rows)


# -- dyadic Hilbert symbol ---------------------------------------------------

TWO_ADIC_CLASSES = (1, -1, 2, -2, 5, -5, 10, -10)
TWO_ADIC_BASIS = (-1, 2, 5)


def square_class_vector(a: int) -> tuple[int, int, int]:
    """Coordinates of a square class over the basis (-1, 2, 5)."""
    if a not in TWO_ADIC_CLASSES:
        raise ValueError(f"{a} is not a square-class representative")
    sign = 1 if a < 0 else 0
    two = 1 if a % 2 == 0 else 0
    five = 1 if abs(a) in (5, 10) else 0
    return (sign, two, five)


@lru_cache(maxsize=8)
def _square_sets(precision_bits: int) -> tuple[frozenset[int], frozenset[int]]:
    m = 1 << precision_bits
    return (
        frozenset((z * z) % m for z in range(m)),
        frozenset((z * z) % m for z in range(1, m, 2)),
    )


def hilbert_symbol_two_adic(a: int, b: int, precision_bits: int = 8) -> int:
    """(a, b)_2 via exhaustive square testing at the given 2-power modulus.

    Solvability of z^2 = a x^2 + b y^2 with a primitive triple is decided
    modulo 2^precision_bits; any primitive 2-adic solution survives the
    reduction and Hensel lifting recovers one from a solution mod 2^k for
    the representatives in use, so the test is exact.
    """
    m = 1 << precision_bits
    squares, odd_sq = _square_sets(precision_bits)
    all_sq = squares
    a_odd = {(a * s) % m for s in odd_sq}
    a_all = {(a * s) % m for s in all_sq}
    b_odd = {(b * s) % m for s in odd_sq}
    b_all = {(b * s) % m for s in all_sq}
    for u in a_odd:
        for v in b_all:
            if (u + v) % m in squares:
                return 1
    for u in a_all:
        for v in b_odd:
            if (u + v) % m in squares:
                return 1
    return -1


def hilbert_relation_span(q: int = 2, precision_bits: int = 8) -> ZqSubspace:
    """Span of a (x) b over the pairs of square classes with trivial symbol."""
    if q != 2:
        raise PresetError("the dyadic preset is defined for q = 2 only")
    rows = _grcomm_rows(2, 3)
    for a in TWO_ADIC_CLASSES:
        for b in TWO_ADIC_CLASSES:
            if hilbert_symbol_two_adic(a, b, precision_bits) == 1:
                row = _outer(2, 3, square_class_vector(a), square_class_vector(b))
                if any(row):
                    rows.append(row)
    return canonicalize(2, 9, rows)


def milnor_mod_q(
    preset: FieldPreset, q: int, r_max: int = 4, check_stability: bool = True
) -> GradedAlgebra:
    """The mod-q Milnor K-ring of a preset field in degrees <= r_max.

    Degree-2 relations come from the preset's enumeration oracle; higher
    degrees are generated as the quadratic hull.  With check_stability
    the oracle window (or 2-adic precision) is doubled and the span must
    not move.
    """
    preset.validate_modulus(q)
    if preset.kind == "finite_field":
        t2 = steinberg_relations_finite(preset.ell, q)
        if check_stability and not subspace_equal(t2, steinberg_relations_finite(preset.ell, q)):
            raise OracleInstability("finite-field Steinberg span not reproducible")
        names = ("u",)
    elif preset.kind == "tame_local":
        t2 = steinberg_relations_tame(preset.ell, q, window=2)
        if check_stability:
            doubled = steinberg_relations_tame(preset.ell, q, window=4)
            if not subspace_equal(t2, doubled):
                raise OracleInstability(
                    "tame Steinberg span changed when the valuation window doubled"
                )
        names = ("u", "t")
    else:
        t2 = hilbert_relation_span(q, precision_bits=8)
        if check_stability:
            refined = hilbert_relation_span(q, precision_bits=10)
            if not subspace_equal(t2, refined):
                raise OracleInstability(
                    "dyadic relation span changed under precision increase"
                )
        names = ("-1", "2", "5")
    return quadratic_hull(q, len(names), t2, r_max, names)


# ---------------------------------------------------------------------------
# Matched presentations and the symbol comparison


def preset_presentation(preset: FieldPreset, q: int) -> tuple[pres.Presentation, dict[str, str]]:
    """The standard presentation matched to a preset, with the
    degree-1 correspondence from K-ring basis names to generators.

    For the Laurent-series preset the relator exponent is the p-part of
    ell - 1 (the order of the p-primary roots of unity), carried by the
    uniformizer-dual generator; at truncation level the power vanishes
    entirely when q^2 divides ell - 1.
    """
    preset.validate_modulus(q)
    p, d = prime_power(q)
    if preset.kind == "finite_field":
        return pres.make_presentation(q, ["x1"], []), {"u": "x1"}
    if preset.kind == "tame_local":
        v = 0
        m = preset.ell - 1
        while m % p == 0:
            m //= p
            v += 1
        q_f = p**v
        return (
            pres.make_presentation(q, ["x1", "x2"], [f"x2^{q_f} [x1,x2]"]),
            {"u": "x1", "t": "x2"},
        )
    return (
        pres.make_presentation(2, ["x1", "x2", "x3"], ["x1^2 x2^4 [x2,x3]"]),
        {"-1": "x1", "2": "x2", "5": "x3"},
    )


def presentation_zero_pairs(cd: CohomologyData) -> ZqSubspace:
    """Kernel of the degree-(1,1) cup map of a cohomology model."""
    n, q = cd.n, cd.q
    cols = {}
    for a in range(n):
        for b in range(n):
            cols[(a, b)] = cd.cup_entry(a, b)
    rows = []
    for i in range(cd.h2_rank):
        rows.append(tuple(cols[(a, b)][i] for a in range(n) for b in range(n)))
    if not rows:
        from .zqlin import full_subspace

        return full_subspace(q, n * n)
    return kernel(ZqMatrix.from_rows(q, rows, n * n))


def galois_symbol_compare(
    preset: FieldPreset,
    presentation: pres.Presentation,
    correspondence: dict[str, str],
    r_max: int = 4,
    check_stability: bool = True,
) -> Report:
    """Check that the degree-1 correspondence extends to a graded
    isomorphism between the preset K-ring and the quadratic hull of the
    presentation's cohomology model, in degrees <= r_max.
    """
    algebra = milnor_mod_q(preset, presentation.q, r_max, check_stability)
    cd, report = cohomology_data_from_presentation(presentation)
    q = presentation.q

    kept_names = None
    outcomes: list[TestOutcome] = []
    assumptions = [f"preset: {preset.describe()}", f"tested degrees: 1..{r_max}"]
    if not report.minimal:
        assumptions.append(
            f"presentation auto-minimized; kept generators {report.kept}"
        )
    kept_names = report.kept

    if set(correspondence.keys()) != set(algebra.basis_names):
        raise PresetError(
            f"correspondence keys {sorted(correspondence)} do not match the "
            f"K-ring basis {algebra.basis_names}"
        )
    if len(set(correspondence.values())) != len(correspondence):
        raise PresetError("correspondence is not injective on generators")
    name_to_index = {name: i for i, name in enumerate(kept_names)}
    for target in correspondence.values():
        if target not in name_to_index:
            raise PresetError(f"correspondence targets unknown generator {target!r}")

    # degree 1: bijection on the free module bases
    if algebra.gen_count != cd.n:
        outcomes.append(
            TestOutcome(
                "degree-1",
                "triggered",
                f"K_1 rank {algebra.gen_count} != H^1 rank {cd.n}",
            )
        )
        return Report("not-isomorphic", tuple(outcomes), tuple(assumptions))
    outcomes.append(TestOutcome("degree-1", "passed"))

    perm = [name_to_index[correspondence[name]] for name in algebra.basis_names]
    m = algebra.gen_count

    field_t2 = algebra.components[2]
    mapped_rows = []
    for row in field_t2.basis:
        out = [0] * (m * m)
        for a in range(m):
            for b in range(m):
                out[perm[a] * m + perm[b]] = row[a * m + b]
        mapped_rows.append(out)
    mapped_t2 = canonicalize(q, m * m, mapped_rows)
    pres_t2 = presentation_zero_pairs(cd)

    pres_hull = quadratic_hull(q, m, pres_t2, r_max)
    field_hull_mapped = quadratic_hull(q, m, mapped_t2, r_max)

    ok = True
    for r in range(2, r_max + 1):
        same = subspace_equal(field_hull_mapped.components[r], pres_hull.components[r])
        card = algebra.degree_cardinality(r) == pres_hull.degree_cardinality(r)
        if same and card:
            outcomes.append(TestOutcome(f"degree-{r}", "passed"))
        else:
            ok = False
            outcomes.append(
                TestOutcome(
                    f"degree-{r}",
                    "triggered",
                    f"relation subspaces differ in degree {r}: K-ring side has "
                    f"cardinality {algebra.degree_cardinality(r)}, cohomology side "
                    f"{pres_hull.degree_cardinality(r)}",
                )
            )
            break

    verdict = "isomorphic" if ok else "not-isomorphic"
    return Report(
        verdict,
        tuple(outcomes),
        tuple(assumptions),
        data={
            "degree_ranks_field": [algebra.degree_rank(r) for r in range(1, r_max + 1)],
            "degree_ranks_presentation": [pres_hull.degree_rank(r) for r in range(1, r_max + 1)],
        },
    )
