import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from gq3.zqlin import (
    ZqMatrix,
    ZqSubspace,
    annihilator,
    canonicalize,
    diagonal_of,
    full_subspace,
    gcdex2,
    image,
    invariant_factors,
    kernel,
    prime_power,
    smith_normal_form,
    subspace_equal,
    subspace_intersect,
    subspace_sum,
    zero_subspace,
)

MODULI = [2, 3, 4, 5, 8, 9]


def brute_span(q, ambient, rows):
    """Oracle: enumerate every Z/q-combination of the rows."""
    span = set()
    for coeffs in itertools.product(range(q), repeat=len(rows)):
        v = [0] * ambient
        for c, row in zip(coeffs, rows):
            for k in range(ambient):
                v[k] = (v[k] + c * row[k]) % q
        span.add(tuple(v))
    return span


def brute_annihilator(q, ambient, vectors):
    """Oracle: all vectors pairing to zero against every element."""
    out = set()
    for v in itertools.product(range(q), repeat=ambient):
        if all(sum(a * b for a, b in zip(v, w)) % q == 0 for w in vectors):
            out.add(v)
    return out


def test_prime_power_validation():
    assert prime_power(8) == (2, 3)
    assert prime_power(9) == (3, 2)
    with pytest.raises(ValueError):
        prime_power(6)
    with pytest.raises(ValueError):
        prime_power(1)


@pytest.mark.parametrize("q", MODULI)
def test_gcdex2_transform_is_unimodular(q):
    for a in range(q):
        for b in range(q):
            g, s, t, u, v = gcdex2(a, b, q)
            assert (s * a + t * b) % q == g % q
            assert (u * a + v * b) % q == 0
            det = (s * v - t * u) % q
            assert prime_power(q)[0] is not None
            import math

            assert math.gcd(det, q) == 1


def test_snf_zero_1x1_over_4():
    m = ZqMatrix.from_rows(4, [[0]])
    d, p, qm = smith_normal_form(m)
    assert diagonal_of(d) == (0,)
    assert p.entries == ((1,),) and qm.entries == ((1,),)


def test_snf_identity_over_9():
    m = ZqMatrix.identity(9, 2)
    d, _, _ = smith_normal_form(m)
    assert diagonal_of(d) == (1, 1)


def test_snf_2_over_4_by_direct_multiplication():
    # Verify p*m*qm = d over every choice, the 1x1 case exhaustively.
    m = ZqMatrix.from_rows(4, [[2]])
    d, p, qm = smith_normal_form(m)
    assert diagonal_of(d) == (2,)
    assert p.matmul(m).matmul(qm).entries == d.entries


@pytest.mark.parametrize("q", MODULI)
def test_snf_random_matrices(q):
    rng = random.Random(q * 101)
    p_, d_ = prime_power(q)
    for _ in range(40):
        nr = rng.randint(1, 4)
        nc = rng.randint(1, 4)
        m = ZqMatrix.from_rows(q, [[rng.randrange(q) for _ in range(nc)] for _ in range(nr)])
        d, pm, qm = smith_normal_form(m)
        assert pm.matmul(m).matmul(qm).entries == d.entries
        assert d.is_diagonal()
        diag = diagonal_of(d)
        # Every entry a power of p (or 0) and the chain divides in order.
        for x in diag:
            if x != 0:
                while x % p_ == 0:
                    x //= p_
                assert x == 1
        for a, b in zip(diag, diag[1:]):
            aa = a if a != 0 else q
            bb = b if b != 0 else q
            assert bb % aa == 0


def test_canonicalize_examples():
    s = canonicalize(4, 2, [(2, 0), (0, 2)])
    assert s.nrows == 2
    assert s.cardinality() == 4
    assert canonicalize(4, 2, []) == zero_subspace(4, 2)
    s3 = canonicalize(3, 2, [(1, 0), (1, 0)])
    assert s3.basis == ((1, 0),)


@pytest.mark.parametrize("q", [2, 3, 4])
@pytest.mark.parametrize("ambient", [1, 2, 3, 4])
def test_canonicalize_representation_independent_exhaustive(q, ambient):
    """Equal spans must give bit-identical subspaces (two-generator sets)."""
    by_span = {}
    vectors = list(itertools.product(range(q), repeat=ambient))
    for rows in itertools.product(vectors, repeat=2):
        span = frozenset(brute_span(q, ambient, rows))
        sub = canonicalize(q, ambient, rows)
        if ambient <= 3:
            assert set(sub.vectors()) == span
        assert sub.cardinality() == len(span)
        if span in by_span:
            assert by_span[span] == sub
        else:
            by_span[span] = sub
        # Idempotence
        assert canonicalize(q, ambient, sub.basis) == sub


@pytest.mark.parametrize("q", MODULI)
def test_canonicalize_idempotent_random(q):
    rng = random.Random(q)
    for _ in range(30):
        ambient = rng.randint(1, 5)
        rows = [[rng.randrange(q) for _ in range(ambient)] for _ in range(rng.randint(0, 4))]
        s = canonicalize(q, ambient, rows)
        assert canonicalize(q, ambient, s.basis) == s


def test_annihilator_examples():
    assert annihilator(zero_subspace(5, 3)) == full_subspace(5, 3)
    assert annihilator(full_subspace(5, 3)) == zero_subspace(5, 3)
    w = canonicalize(4, 2, [(2, 0)])
    expected = brute_annihilator(4, 2, [(2, 0)])
    got = annihilator(w)
    assert set(got.vectors()) == expected
    assert got == canonicalize(4, 2, [(2, 0), (0, 1)])


@pytest.mark.parametrize("q", MODULI)
def test_duality_perfectness_random(q):
    rng = random.Random(q * 7)
    for _ in range(50):
        m = rng.randint(1, 4)
        rows = [[rng.randrange(q) for _ in range(m)] for _ in range(rng.randint(0, 3))]
        w = canonicalize(q, m, rows)
        a = annihilator(w)
        assert w.cardinality() * a.cardinality() == q**m
        assert annihilator(a) == w


def test_kernel_examples():
    assert kernel(ZqMatrix.identity(3, 3)) == zero_subspace(3, 3)
    m = ZqMatrix.from_rows(4, [[2, 0], [0, 0]])
    got = kernel(m)
    oracle = {v for v in itertools.product(range(4), repeat=2)
              if all(x == 0 for x in m.apply_to_vector(v))}
    assert set(got.vectors()) == oracle
    assert got == canonicalize(4, 2, [(2, 0), (0, 1)])
    assert image(ZqMatrix.zero(5, 2, 3)) == zero_subspace(5, 2)


@pytest.mark.parametrize("q", MODULI)
def test_kernel_image_cardinality(q):
    rng = random.Random(q * 13)
    for _ in range(30):
        nr = rng.randint(1, 3)
        nc = rng.randint(1, 3)
        m = ZqMatrix.from_rows(q, [[rng.randrange(q) for _ in range(nc)] for _ in range(nr)])
        k = kernel(m)
        im = image(m)
        assert k.cardinality() * im.cardinality() == q**nc
        for v in k.vectors():
            assert all(x == 0 for x in m.apply_to_vector(v))


@pytest.mark.parametrize("q", [2, 3, 4])
def test_sum_intersect_against_enumeration(q):
    rng = random.Random(q * 17)
    for _ in range(25):
        ambient = rng.randint(1, 3)
        rows_a = [[rng.randrange(q) for _ in range(ambient)] for _ in range(rng.randint(0, 2))]
        rows_b = [[rng.randrange(q) for _ in range(ambient)] for _ in range(rng.randint(0, 2))]
        a = canonicalize(q, ambient, rows_a)
        b = canonicalize(q, ambient, rows_b)
        sa = brute_span(q, ambient, rows_a)
        sb = brute_span(q, ambient, rows_b)
        s = subspace_sum(a, b)
        sumset = {tuple((x + y) % q for x, y in zip(u, v)) for u in sa for v in sb}
        assert set(s.vectors()) == sumset
        inter = subspace_intersect(a, b)
        assert set(inter.vectors()) == (sa & sb)
        assert subspace_equal(subspace_sum(a, a), a)


def test_coset_reduction_is_canonical():
    # Representatives must be constant on cosets: check by enumeration.
    for q, ambient, rows in [(4, 2, [(2, 1)]), (2, 3, [(1, 1, 0)]), (9, 2, [(3, 1)])]:
        w = canonicalize(q, ambient, rows)
        elements = set(w.vectors())
        for v in itertools.product(range(q), repeat=ambient):
            red = w.reduce_vector(v)
            for x in elements:
                shifted = tuple((a + b) % q for a, b in zip(v, x))
                assert w.reduce_vector(shifted) == red


def test_subspace_construction_validated():
    with pytest.raises(ValueError):
        ZqSubspace(64, 2, ())  # modulus over the cap
    with pytest.raises(ValueError):
        ZqSubspace(4, 2, ((0, 0),))  # zero basis row
    with pytest.raises(ValueError):
        ZqSubspace(4, 2, ((5, 0),))  # entry not reduced


def test_invariant_factors():
    assert invariant_factors(canonicalize(4, 2, [(2, 0), (0, 2)])) == (2, 2)
    assert invariant_factors(canonicalize(4, 2, [(1, 0)])) == (4,)
    assert invariant_factors(zero_subspace(4, 2)) == ()
    assert invariant_factors(canonicalize(4, 2, [(2, 1)])) == (4,)


@settings(max_examples=150, deadline=None)
@given(
    q=st.sampled_from(MODULI),
    data=st.data(),
)
def test_double_annihilator_property(q, data):
    ambient = data.draw(st.integers(min_value=1, max_value=4))
    nrows = data.draw(st.integers(min_value=0, max_value=3))
    rows = [
        [data.draw(st.integers(min_value=0, max_value=q - 1)) for _ in range(ambient)]
        for _ in range(nrows)
    ]
    w = canonicalize(q, ambient, rows)
    assert annihilator(annihilator(w)) == w
    assert w.cardinality() * annihilator(w).cardinality() == q**ambient
