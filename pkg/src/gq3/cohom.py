"""Low-degree mod-q cohomology models and the reconstruction machinery.

H^1 of a presented pro-p group on n generators is the rank-n dual of
its maximal elementary quotient.  H^2 is modeled through the perfect
pairing with the relator subgroup inside the central layer of S^[3]:
its elements are linear functionals on that subgroup, coordinatized
against the canonical basis of the relator subspace.

The combined cup/Bockstein map out of the dual central layer has the
relator pairing matrix as its matrix; its kernel annihilates exactly
the relator subspace, which is what makes the quotient reconstructible
from the tables alone (reconstruct_g3).  Morphism and obstruction
checks ride on the same matrices.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from . import presentations as pres
from .freelie import word_nontriviality_certificate
from .trunc import (
    CentralSubspace,
    MinimalityReport,
    TruncElement,
    TruncGroup,
    free_truncation,
    pair_list,
    quotient,
    relator_subspace,
    truncated_quotient,
)
from .zqlin import (
    ZqMatrix,
    ZqSubspace,
    annihilator,
    canonicalize,
    full_subspace,
    invariant_factors,
    kernel,
    prime_power,
    row_space,
    subspace_equal,
    subspace_sum,
)


class MorphismError(ValueError):
    """Generator images do not define a homomorphism at this level."""


class HypothesisViolation(ValueError):
    """Input falls outside the elementary-quotient hypothesis."""


def kappa_constant(q: int) -> int:
    """The diagonal constant: x cup x = kappa * Bockstein(x), kappa = C(q,2) mod q."""
    return math.comb(q, 2) % q


@dataclass(frozen=True)
class CohomologyData:
    """Tables of H^1/H^2 data: ranks, cup products, and Bockstein values.

    cup[(k, l)] for k < l and bockstein[k] are coordinate vectors in the
    rank-h2_rank H^2 model.  The sign rule cup(l,k) = -cup(k,l) and the
    diagonal rule cup(k,k) = kappa * bockstein(k) are implied, not stored.
    """

    q: int
    n: int
    h2_rank: int
    cup: dict[tuple[int, int], tuple[int, ...]]
    bockstein: dict[int, tuple[int, ...]]
    h2_divisors: tuple[int, ...] = ()

    def __post_init__(self):
        prime_power(self.q)
        for k in range(self.n):
            vec = self.bockstein.get(k)
            if vec is None or len(vec) != self.h2_rank:
                raise ValueError(f"bockstein table missing or malformed at {k}")
        for k, l in pair_list(self.n):
            vec = self.cup.get((k, l))
            if vec is None or len(vec) != self.h2_rank:
                raise ValueError(f"cup table missing or malformed at ({k},{l})")

    @property
    def kappa(self) -> int:
        return kappa_constant(self.q)

    def cup_entry(self, k: int, l: int) -> tuple[int, ...]:
        if k < l:
            return self.cup[(k, l)]
        if k > l:
            return tuple((-x) % self.q for x in self.cup[(l, k)])
        return tuple((self.kappa * x) % self.q for x in self.bockstein[k])

    def to_json_dict(self) -> dict:
        return {
            "q": self.q,
            "n": self.n,
            "h2_rank": self.h2_rank,
            "h2_divisors": list(self.h2_divisors),
            "cup": {f"{k + 1},{l + 1}": list(v) for (k, l), v in sorted(self.cup.items())},
            "bockstein": {str(k + 1): list(v) for k, v in sorted(self.bockstein.items())},
            "kappa": self.kappa,
        }

    @staticmethod
    def from_json_dict(data: dict) -> "CohomologyData":
        q = int(data["q"])
        n = int(data["n"])
        h2_rank = int(data["h2_rank"])
        cup = {}
        for key, vec in data.get("cup", {}).items():
            k, l = (int(x) - 1 for x in key.split(","))
            cup[(k, l)] = tuple(int(x) % q for x in vec)
        bockstein = {}
        for key, vec in data.get("bockstein", {}).items():
            bockstein[int(key) - 1] = tuple(int(x) % q for x in vec)
        for k, l in pair_list(n):
            cup.setdefault((k, l), (0,) * h2_rank)
        for k in range(n):
            bockstein.setdefault(k, (0,) * h2_rank)
        return CohomologyData(q, n, h2_rank, cup, bockstein,
                              tuple(data.get("h2_divisors", ())))


def lambda_matrix(cd: CohomologyData) -> ZqMatrix:
    """Matrix of the cup+Bockstein map out of the dual central layer.

    Columns are indexed by the dual basis of the layer: first the n
    Bockstein columns, then one cup column per pair (k,l), k < l.  The
    kernel of this matrix is the kernel of the map to H^2.
    """
    cols = [cd.bockstein[k] for k in range(cd.n)]
    cols += [cd.cup[(k, l)] for k, l in pair_list(cd.n)]
    rows = [tuple(col[i] for col in cols) for i in range(cd.h2_rank)]
    return ZqMatrix.from_rows(cd.q, rows, len(cols))


def reconstruct_g3(cd: CohomologyData) -> TruncGroup:
    """The third q-central quotient determined by the cohomology tables.

    The kernel of the cup+Bockstein matrix, dualized through the perfect
    pairing on the central layer, is exactly the relator subspace.
    """
    ker = kernel(lambda_matrix(cd))
    w = annihilator(ker)
    return quotient(free_truncation(cd.n, cd.q), w)


def cohomology_data_from_presentation(
    presentation: pres.Presentation,
) -> tuple[CohomologyData, MinimalityReport]:
    """Extract the H^1/H^2 tables of the presented group.

    The presentation is minimized first; the H^2 model is coordinatized
    against the canonical basis of the relator subspace, so bockstein(k)
    reads off the sigma_k^q-coordinates of the basis rows and cup(k,l)
    the commutator coordinates.
    """
    w, report = relator_subspace(presentation)
    n = len(report.kept_indices)
    basis = w.basis
    r = len(basis)
    bockstein = {k: tuple(row[k] for row in basis) for k in range(n)}
    cup = {}
    for idx, (k, l) in enumerate(pair_list(n)):
        cup[(k, l)] = tuple(row[n + idx] for row in basis)
    cd = CohomologyData(
        presentation.q, n, r, cup, bockstein, invariant_factors(w)
    )
    return cd, report


# ---------------------------------------------------------------------------
# Structured reports


@dataclass(frozen=True)
class TestOutcome:
    name: str
    status: str  # "passed" | "triggered" | "skipped"
    witness: str = ""


@dataclass(frozen=True)
class Report:
    verdict: str
    tests: tuple[TestOutcome, ...]
    assumptions: tuple[str, ...]
    data: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "tests": [
                {"name": t.name, "status": t.status, "witness": t.witness}
                for t in self.tests
            ],
            "assumptions": list(self.assumptions),
            **self.data,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def check_relator_independence(
    presentation: pres.Presentation, certificate_class: int = 5
) -> Report:
    """Per-relator independence of the images in the central layer.

    A relator that is provably nontrivial in the free group but lands on
    zero, or inside the span of the other relators, witnesses that the
    relator subgroup cannot inject into the central layer, provided the
    relators are independent in the relation module.  That proviso is
    recorded as an assumption rather than verified.
    """
    n, q = presentation.n, presentation.q
    group = free_truncation(n, q)
    outcomes = []
    vectors = []
    infos = []
    for word, source in zip(presentation.relators, pres.relator_source_list(presentation)):
        y = group.evaluate_word(word)
        cert = word_nontriviality_certificate(word, n, certificate_class)
        central = group.is_central(y)
        vec = group.central_vector(y) if central else None
        vectors.append(vec)
        infos.append((source, cert, central))

    failed = False
    for i, (vec, (source, cert, central)) in enumerate(zip(vectors, infos)):
        if not central:
            outcomes.append(
                TestOutcome(
                    f"relator[{i}] frattini",
                    "triggered",
                    f"{source!r} has nonzero degree-1 image: presentation not minimal",
                )
            )
            failed = True
            continue
        others = [v for j, v in enumerate(vectors) if j != i and v is not None]
        span_others = canonicalize(q, group.layer_rank, others)
        if all(x == 0 for x in vec):
            if cert is not None:
                outcomes.append(
                    TestOutcome(
                        f"relator[{i}] zero-image",
                        "triggered",
                        f"{source!r} is nontrivial (weight {cert[0]}) but lands in the "
                        "third term of the series",
                    )
                )
                failed = True
            else:
                outcomes.append(
                    TestOutcome(
                        f"relator[{i}] zero-image",
                        "skipped",
                        f"{source!r} has zero image and no nontriviality certificate "
                        f"at class {certificate_class}",
                    )
                )
        elif span_others.contains(vec):
            outcomes.append(
                TestOutcome(
                    f"relator[{i}] dependency",
                    "triggered",
                    f"{source!r} image lies in the span of the other relator images",
                )
            )
            failed = True
        else:
            outcomes.append(TestOutcome(f"relator[{i}] independent", "passed"))

    assumptions = (
        "a triggered zero-image or dependency witnesses non-injectivity of the "
        "relation module into the central layer only if the relators are "
        "independent in it (user-asserted; plausible for small relator lists)",
    )
    verdict = "condition-failed" if failed else "consistent"
    return Report(verdict, tuple(outcomes), assumptions)


# ---------------------------------------------------------------------------
# Morphisms


@dataclass(frozen=True)
class MorphismReport:
    pi2_isomorphism: bool
    pi3_isomorphism: bool
    h1_isomorphism: bool
    h2_decomposable_isomorphism: bool
    b_holds: bool
    d_holds: bool
    agreement: bool
    target_h2_decomposable: bool

    def to_json_dict(self) -> dict:
        return {
            "pi2_isomorphism": self.pi2_isomorphism,
            "pi3_isomorphism": self.pi3_isomorphism,
            "h1_isomorphism": self.h1_isomorphism,
            "h2_decomposable_isomorphism": self.h2_decomposable_isomorphism,
            "condition_b": self.b_holds,
            "condition_d": self.d_holds,
            "agreement": self.agreement,
            "target_h2_decomposable_model": self.target_h2_decomposable,
        }


def _require_minimal(report: MinimalityReport, which: str):
    if not report.minimal:
        raise HypothesisViolation(
            f"{which} presentation is not minimal; eliminate generators first "
            f"(eliminated: {[g for g, _ in report.eliminated]})"
        )


def _layer_matrix(
    n1: int, images_free: list[TruncElement], target: TruncGroup
) -> ZqMatrix:
    """Matrix of the induced map between free central layers.

    Columns: images of u_k (the q-th powers of the generator images) and
    of w_kl (their commutators), as vectors in the target layer.
    """
    q = target.q
    cols = []
    for k in range(n1):
        cols.append(target.central_vector(target.power(images_free[k], q)))
    for k, l in pair_list(n1):
        cols.append(
            target.central_vector(target.commutator(images_free[k], images_free[l]))
        )
    rows = [tuple(col[i] for col in cols) for i in range(target.layer_rank)]
    return ZqMatrix.from_rows(q, rows, len(cols))


def _decomposable_part_lift(q: int, n: int, w: CentralSubspace) -> ZqSubspace:
    """Preimage in the dual layer of the span of the cup classes."""
    layer_rank = n + len(pair_list(n))
    kappa = kappa_constant(q)
    rows = []
    for idx in range(len(pair_list(n))):
        row = [0] * layer_rank
        row[n + idx] = 1
        rows.append(row)
    if kappa:
        for k in range(n):
            row = [0] * layer_rank
            row[k] = kappa
            rows.append(row)
    rows.extend(annihilator(w).basis)
    return canonicalize(q, layer_rank, rows)


def morphism_check(
    pres1: pres.Presentation,
    pres2: pres.Presentation,
    images: list[pres.Word],
) -> MorphismReport:
    """Instance check of the equivalence between group-level and
    cohomology-level isomorphism conditions.

    Condition (b): the induced maps on the level-2 and level-3 quotients
    are bijective.  Condition (d): the induced maps on H^1 and on the
    decomposable part of the H^2 model are bijective.  The report states
    whether both sides agreed on this instance.
    """
    if pres1.q != pres2.q:
        raise MorphismError("presentations have different moduli")
    q = pres1.q
    p = prime_power(q)[0]
    g1, rep1 = truncated_quotient(pres1)
    g2, rep2 = truncated_quotient(pres2)
    _require_minimal(rep1, "source")
    _require_minimal(rep2, "target")
    n1, n2 = g1.n, g2.n
    if len(images) != n1:
        raise MorphismError(f"expected {n1} generator images, got {len(images)}")

    free2 = free_truncation(n2, q)
    images_free = [free2.evaluate_word(w) for w in images]
    images_quot = [g2.normalize(x) for x in images_free]

    # well-definedness: relators of the source must die in the target
    env = dict(enumerate(images_quot))
    for word, source in zip(pres1.relators, pres.relator_source_list(pres1)):
        if g2.evaluate_word(word, env) != g2.identity():
            raise MorphismError(f"images do not respect relator {source!r}")

    # degree-1 matrix of the map, rows = images of the source generators
    deg1 = ZqMatrix.from_rows(q, [[x % q for x in img.e] for img in images_free], n2)
    deg1_mod_p = ZqMatrix.from_rows(p, [[x % p for x in img.e] for img in images_free], n2)
    surjective = row_space(deg1_mod_p).cardinality() == p**n2
    pi2_iso = n1 == n2 and surjective
    pi3_iso = surjective and g1.order() == g2.order()
    h1_iso = pi2_iso

    # induced map on the decomposable part of H^2, through the dual of
    # the free layer map
    lmat = _layer_matrix(n1, images_free, free2)
    lt = lmat.transpose()
    w1, w2 = g1.w, g2.w
    ann1, ann2 = annihilator(w1), annihilator(w2)
    p1 = _decomposable_part_lift(q, n1, w1)
    p2 = _decomposable_part_lift(q, n2, w2)
    pulled = [lt.apply_to_vector(v) for v in ann2.basis]
    for v in pulled:
        if not ann1.contains(v):
            raise AssertionError("dual layer map does not respect the annihilators")
    pulled_p2 = canonicalize(q, p1.ambient_dim, [lt.apply_to_vector(v) for v in p2.basis])
    image_span = subspace_sum(pulled_p2, ann1)
    d2_size_source = p2.cardinality() // ann2.cardinality()
    d2_size_target = p1.cardinality() // ann1.cardinality()
    pidec2_iso = subspace_equal(image_span, p1) and d2_size_source == d2_size_target

    layer2_full = full_subspace(q, p2.ambient_dim)
    target_h2_dec = subspace_equal(p2, layer2_full)

    b_holds = pi3_iso
    d_holds = h1_iso and pidec2_iso
    return MorphismReport(
        pi2_isomorphism=pi2_iso,
        pi3_isomorphism=pi3_iso,
        h1_isomorphism=h1_iso,
        h2_decomposable_isomorphism=pidec2_iso,
        b_holds=b_holds,
        d_holds=d_holds,
        agreement=b_holds == d_holds,
        target_h2_decomposable=target_h2_dec,
    )


# ---------------------------------------------------------------------------
# Obstruction screening


def obstruction_screen(
    presentation: pres.Presentation,
    cd_bound: int | None = None,
    torsion_free: bool = False,
    certificate_class: int = 5,
) -> Report:
    """Screen a pro-p presentation against the known obstructions to
    being a maximal pro-p Galois group (prime modulus only).

    Three tests, in order: the whole relation subgroup sitting inside
    the third term of the series; a dependent or vanishing relator image
    in the central layer; and a supplied cohomological dimension
    exceeding the generator rank.
    """
    q = presentation.q
    p_, d_ = prime_power(q)
    if d_ != 1:
        raise ValueError(f"the screen applies to prime modulus only, got q = {q}")

    n = presentation.n
    group = free_truncation(n, q)
    outcomes: list[TestOutcome] = []
    assumptions = [
        f"nontriviality certificates computed at class bound {certificate_class}",
    ]

    infos = []
    for word, source in zip(presentation.relators, pres.relator_source_list(presentation)):
        y = group.evaluate_word(word)
        cert = word_nontriviality_certificate(word, n, certificate_class)
        infos.append((word, source, y, cert))

    live = [(w, s, y, c) for (w, s, y, c) in infos if c is not None or y != group.identity()]

    # (i) every relator dies at level 3, some relator provably nontrivial
    all_in_level3 = bool(live) and all(y == group.identity() for _, _, y, _ in live)
    witness_cert = next((s for _, s, y, c in live if y == group.identity() and c), None)
    if all_in_level3 and witness_cert is not None:
        outcomes.append(
            TestOutcome(
                "relation-subgroup-inside-level-3",
                "triggered",
                f"all relators vanish at level 3; {witness_cert!r} is certified nontrivial",
            )
        )
        return Report("obstructed", tuple(outcomes), tuple(assumptions))
    outcomes.append(TestOutcome("relation-subgroup-inside-level-3", "passed"))

    # (ii) zero or dependent central images among certified relators
    central_vecs = [
        (s, group.central_vector(y), c)
        for _, s, y, c in live
        if group.is_central(y)
    ]
    triggered = None
    for i, (source, vec, cert) in enumerate(central_vecs):
        if cert is None:
            continue
        if all(x == 0 for x in vec):
            triggered = f"certified relator {source!r} has zero image in the central layer"
            break
        others = [v for j, (_, v, _) in enumerate(central_vecs) if j != i]
        if others and canonicalize(q, group.layer_rank, others).contains(vec):
            triggered = (
                f"certified relator {source!r} has image dependent on the other relators"
            )
            break
    if triggered:
        outcomes.append(TestOutcome("dependent-relator-image", "triggered", triggered))
        assumptions.append(
            "dependency witnesses failure of H^2 decomposability provided the "
            "relators are independent in the relation module (user-asserted)"
        )
        return Report("obstructed", tuple(outcomes), tuple(assumptions))
    outcomes.append(TestOutcome("dependent-relator-image", "passed"))

    # (iii) supplied cohomological dimension against dim H^1
    if cd_bound is not None:
        _, report = relator_subspace(presentation)
        dim_h1 = len(report.kept_indices)
        assumptions.append(f"user-supplied cd(G) = {cd_bound}")
        if dim_h1 < cd_bound:
            if p_ == 2 and not torsion_free:
                outcomes.append(
                    TestOutcome(
                        "dimension-versus-cd",
                        "skipped",
                        f"dim H^1 = {dim_h1} < cd = {cd_bound}, but p = 2 requires the "
                        "torsion-free flag",
                    )
                )
            else:
                if p_ == 2:
                    assumptions.append("user asserts the group is torsion-free")
                outcomes.append(
                    TestOutcome(
                        "dimension-versus-cd",
                        "triggered",
                        f"dim H^1 = {dim_h1} < cd(G) = {cd_bound}",
                    )
                )
                return Report("obstructed", tuple(outcomes), tuple(assumptions))
        else:
            outcomes.append(TestOutcome("dimension-versus-cd", "passed"))

    return Report("no_obstruction_found", tuple(outcomes), tuple(assumptions))
