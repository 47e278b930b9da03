import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from gq3.milnor import (
    FieldPreset,
    GradedAlgebra,
    PresetError,
    TWO_ADIC_CLASSES,
    galois_symbol_compare,
    hilbert_relation_span,
    hilbert_symbol_two_adic,
    milnor_mod_q,
    parse_preset,
    preset_presentation,
    quadratic_hull,
    quadraticity_test,
    square_class_vector,
    steinberg_relations_tame,
)
from gq3.cohom import cohomology_data_from_presentation
from gq3.zqlin import canonicalize, full_subspace, subspace_equal, zero_subspace


def grcomm_subspace(q, m):
    rows = []
    for i in range(m):
        for j in range(i, m):
            row = [0] * (m * m)
            if i == j:
                row[i * m + i] = 2 % q
            else:
                row[i * m + j] = 1
                row[j * m + i] = 1
            rows.append(row)
    return canonicalize(q, m * m, rows)


# ---------------------------------------------------------------------------
# Hulls


def test_hull_everything_vanishes():
    zp = full_subspace(3, 4)
    hull = quadratic_hull(3, 2, zp, 4)
    for r in range(2, 5):
        assert hull.degree_cardinality(r) == 1


def test_hull_no_relations():
    zp = zero_subspace(5, 4)
    hull = quadratic_hull(5, 2, zp, 3)
    assert hull.degree_cardinality(2) == 5**4
    assert hull.degree_cardinality(3) == 5**8
    assert not hull.commutativity_flag


def test_hull_spec_degree2_rank0():
    # rank 2 over q = 2 with all squares, the symmetric row, and one
    # off-diagonal product vanishing: degree 2 collapses entirely
    rows = [
        (1, 0, 0, 0),  # x (x) x
        (0, 0, 0, 1),  # y (x) y
        (0, 1, 1, 0),  # x (x) y + y (x) x
        (0, 1, 0, 0),  # x (x) y
    ]
    zp = canonicalize(2, 4, rows)
    hull = quadratic_hull(2, 2, zp, 3)
    assert hull.degree_rank(2) == 0
    assert hull.degree_cardinality(2) == 1


def test_hull_idempotent():
    rng = random.Random(7)
    for q in (2, 3, 4):
        for _ in range(10):
            m = rng.randint(1, 2)
            rows = [
                [rng.randrange(q) for _ in range(m * m)] for _ in range(rng.randint(0, 3))
            ]
            zp = canonicalize(q, m * m, rows)
            hull = quadratic_hull(q, m, zp, 4)
            rebuilt = quadratic_hull(q, m, hull.components[2], 4)
            for r in range(2, 5):
                assert subspace_equal(hull.components[r], rebuilt.components[r])
            assert all(quadraticity_test(hull).values())


def test_quadraticity_detects_extra_relation():
    # only x (x) x vanishes in degree 2; y (x) y (x) y survives in the hull
    zp = canonicalize(3, 4, [(1, 0, 0, 0)])
    hull = quadratic_hull(3, 2, zp, 3)
    extra = [0] * 8
    extra[7] = 1  # an artificial degree-3 relation y(x)y(x)y
    assert not hull.components[3].contains(extra)
    comps = dict(hull.components)
    comps[3] = canonicalize(3, 8, list(comps[3].basis) + [extra])
    bigger = GradedAlgebra(3, 2, 3, comps, hull.commutativity_flag)
    verdict = quadraticity_test(bigger)
    assert verdict[2] is True
    assert verdict[3] is False


def test_zero_algebra_quadratic():
    comps = {2: full_subspace(2, 4), 3: full_subspace(2, 8)}
    a = GradedAlgebra(2, 2, 3, comps, True)
    assert all(quadraticity_test(a).values())


@settings(max_examples=30, deadline=None)
@given(
    q=st.sampled_from([2, 3, 4]),
    seed=st.integers(min_value=0, max_value=10**6),
)
def test_hull_functorial_under_degree1_maps(q, seed):
    """A degree-1 map sending relations into relations induces maps of
    every hull degree."""
    rng = random.Random(seed)
    m = 2
    rows = [[rng.randrange(q) for _ in range(4)] for _ in range(rng.randint(0, 2))]
    zp_a = canonicalize(q, 4, rows)
    phi = [[rng.randrange(q) for _ in range(m)] for _ in range(m)]

    def map_tensor(row, r):
        out = [0] * m**r
        for idx, x in enumerate(row):
            if not x:
                continue
            digits = []
            v = idx
            for _ in range(r):
                digits.append(v % m)
                v //= m
            digits.reverse()
            # expand phi(e_{d1}) (x) ... multilinearly
            for images in itertools.product(range(m), repeat=r):
                coeff = x
                for d, im in zip(digits, images):
                    coeff = (coeff * phi[d][im]) % q
                if coeff:
                    pos = 0
                    for im in images:
                        pos = pos * m + im
                    out[pos] = (out[pos] + coeff) % q
        return out

    mapped = canonicalize(q, 4, [map_tensor(r_, 2) for r_ in zp_a.basis])
    zp_b = canonicalize(q, 4, list(mapped.basis) + [[rng.randrange(q) for _ in range(4)]])
    hull_a = quadratic_hull(q, m, zp_a, 3)
    hull_b = quadratic_hull(q, m, zp_b, 3)
    # functoriality: phi^{(x)r} carries T_r(A) into T_r(B)
    for r in range(2, 4):
        for row in hull_a.components[r].basis:
            assert hull_b.components[r].contains(map_tensor(row, r))


# ---------------------------------------------------------------------------
# Finite field presets


@pytest.mark.parametrize("ell,q", [(5, 2), (7, 2), (7, 3), (13, 3), (13, 2)])
def test_finite_field_k2_vanishes(ell, q):
    a = milnor_mod_q(FieldPreset("finite_field", ell), q)
    assert a.degree_rank(1) == 1
    assert a.degree_cardinality(2) == 1
    for r in range(3, 5):
        assert a.degree_cardinality(r) == 1


def test_finite_field_preset_validation():
    with pytest.raises(PresetError, match="roots of unity"):
        milnor_mod_q(FieldPreset("finite_field", 7), 5)
    with pytest.raises(PresetError, match="prime"):
        FieldPreset("finite_field", 10)


# ---------------------------------------------------------------------------
# Tame local presets


@pytest.mark.parametrize("ell,q", [(5, 2), (13, 2), (7, 3), (5, 4), (31, 5), (3, 2)])
def test_tame_local_ranks(ell, q):
    a = milnor_mod_q(FieldPreset("tame_local", ell), q)
    assert a.degree_rank(1) == 2
    assert a.degree_rank(2) == 1
    assert a.degree_divisors(2) == (q,)
    assert a.degree_cardinality(3) == 1
    assert a.degree_cardinality(4) == 1
    # the unit-uniformizer symbol generates degree 2: never a relation
    assert not a.components[2].contains([0, 1, 0, 0])


def test_tame_local_unit_uniformizer_symbol_nonzero():
    # the (u, t) tensor must stay out of the relation span: its tame
    # symbol is the nontrivial unit class
    for ell, q in [(5, 2), (7, 3), (3, 2)]:
        t2 = steinberg_relations_tame(ell, q)
        e_ut = [0, 1, 0, 0]
        assert not t2.contains(e_ut)


def test_tame_window_doubling_stable():
    for ell, q in [(5, 2), (7, 3)]:
        assert subspace_equal(
            steinberg_relations_tame(ell, q, window=2),
            steinberg_relations_tame(ell, q, window=4),
        )


# ---------------------------------------------------------------------------
# Dyadic preset


def classical_hilbert_two_adic(a: int, b: int) -> int:
    """Textbook formula: (a,b)_2 = (-1)^(eps(u)eps(v) + alpha omega(v) + beta omega(u))
    for a = 2^alpha u, b = 2^beta v."""

    def eps(u):
        return ((u - 1) // 2) % 2

    def omega(u):
        return ((u * u - 1) // 8) % 2

    alpha, u = 0, a
    while u % 2 == 0:
        u //= 2
        alpha += 1
    beta, v = 0, b
    while v % 2 == 0:
        v //= 2
        beta += 1
    exp = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)
    return -1 if exp % 2 else 1


@pytest.mark.parametrize("bits", [8, 10])
def test_hilbert_oracle_matches_classical_formula(bits):
    for a in TWO_ADIC_CLASSES:
        for b in TWO_ADIC_CLASSES:
            assert hilbert_symbol_two_adic(a, b, bits) == classical_hilbert_two_adic(a, b), (a, b)


def test_hilbert_minus_one_minus_one_nontrivial():
    assert hilbert_symbol_two_adic(-1, -1) == -1
    span = hilbert_relation_span()
    vec = square_class_vector(-1)
    row = [0] * 9
    for i in range(3):
        for j in range(3):
            row[i * 3 + j] = vec[i] * vec[j]
    assert not span.contains(row)


def test_hilbert_precision_stability():
    assert subspace_equal(hilbert_relation_span(2, 8), hilbert_relation_span(2, 10))


def test_two_adic_algebra_shape():
    a = milnor_mod_q(FieldPreset("two_adic"), 2)
    assert a.degree_rank(1) == 3
    assert a.degree_rank(2) == 1
    assert a.degree_cardinality(3) == 1


def test_two_adic_rejects_odd_q():
    with pytest.raises(PresetError):
        milnor_mod_q(FieldPreset("two_adic"), 3)


# ---------------------------------------------------------------------------
# Matched presentations and the comparison


def test_preset_presentation_exponents():
    p, corr = preset_presentation(FieldPreset("tame_local", 7), 3)
    assert p.relator_sources == ("x2^3 [x1,x2]",)
    p, corr = preset_presentation(FieldPreset("tame_local", 5), 2)
    assert p.relator_sources == ("x2^4 [x1,x2]",)
    assert corr == {"u": "x1", "t": "x2"}


def test_galois_compare_tame_examples():
    for ell, q in [(5, 2), (13, 2), (7, 3)]:
        preset = FieldPreset("tame_local", ell)
        p, corr = preset_presentation(preset, q)
        report = galois_symbol_compare(preset, p, corr)
        assert report.verdict == "isomorphic", (ell, q, report.to_json())
        assert report.data["degree_ranks_field"] == [2, 1, 0, 0]


def test_galois_compare_finite_vs_free():
    preset = FieldPreset("finite_field", 7)
    p, corr = preset_presentation(preset, 3)
    report = galois_symbol_compare(preset, p, corr)
    assert report.verdict == "isomorphic"
    assert report.data["degree_ranks_field"] == [1, 0, 0, 0]


def test_galois_compare_wrong_correspondence_fails():
    # asymmetric Bockstein: q = 2 with q exactly dividing ell - 1 puts
    # the diagonal relation on the uniformizer side only; swapping the
    # correspondence must be detected at degree 2
    preset = FieldPreset("tame_local", 3)
    p, corr = preset_presentation(preset, 2)
    good = galois_symbol_compare(preset, p, corr)
    assert good.verdict == "isomorphic"
    swapped = {"u": corr["t"], "t": corr["u"]}
    bad = galois_symbol_compare(preset, p, swapped)
    assert bad.verdict == "not-isomorphic"
    assert any(t.name == "degree-2" and t.status == "triggered" for t in bad.tests)


def test_two_adic_matched_presentation_consistent():
    preset = FieldPreset("two_adic")
    p, corr = preset_presentation(preset, 2)
    report = galois_symbol_compare(preset, p, corr)
    assert report.verdict == "isomorphic", report.to_json()


def test_two_adic_diagonal_rule_matches_hilbert_oracle():
    # cup(k,k) = bockstein(k) over q = 2 must mirror (a,a)_2 = (a,-1)_2
    preset = FieldPreset("two_adic")
    p, corr = preset_presentation(preset, 2)
    cd, _ = cohomology_data_from_presentation(p)
    from gq3.milnor import TWO_ADIC_BASIS

    gen_of = {name: idx for idx, name in enumerate(["x1", "x2", "x3"])}
    for name, a in zip(("-1", "2", "5"), TWO_ADIC_BASIS):
        k = gen_of[corr[name]]
        diag = cd.cup_entry(k, k)
        symbol = hilbert_symbol_two_adic(a, a)
        assert (symbol == -1) == any(diag), (name, symbol, diag)


def test_parse_preset():
    assert parse_preset("finite:5") == FieldPreset("finite_field", 5)
    assert parse_preset("tame_local:7") == FieldPreset("tame_local", 7)
    assert parse_preset("two_adic") == FieldPreset("two_adic")
    with pytest.raises(PresetError):
        parse_preset("padic:3")
