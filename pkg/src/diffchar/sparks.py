"""Spark calculus: cochain models of circle-valued characters.

A spark of degree k is a pair (a, R): a rational k-cochain together
with an integral (k+1)-cocycle.  Its curvature is phi = delta(a) + R,
a rational cocycle with integer periods.  Two sparks present the same
character when they differ by (delta b - S, delta S) for a rational
(k-1)-cochain b and an integral k-cochain S; the membership test here
decides that relation exactly.

The star product pairs sparks of degrees k and l into one of degree
k + l + 1, satisfying the Leibniz identity
delta(a*) = phi_1 cup phi_2 - R_1 cup R_2 on the nose, which makes the
degree-(n-1) pairing on a closed oriented space well defined.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .cohomology import (
    cohomology_generators,
    cycle_lattice_basis,
    integer_cohomology,
)
from .complexes import (
    Chain,
    Cochain,
    SimplicialComplex,
    is_integer,
    pull_cochain,
    simplicial_chain_maps,
)
from .exact import RatElim


class SparkError(ValueError):
    """Data that does not satisfy the spark conditions."""


@dataclass(frozen=True)
class Spark:
    """Pair (a, R): rational k-cochain and integral (k+1)-cocycle."""

    a: Cochain
    R: Cochain

    @property
    def degree(self):
        return self.a.degree

    def __add__(self, other):
        return Spark(self.a + other.a, self.R + other.R)

    def __sub__(self, other):
        return Spark(self.a - other.a, self.R - other.R)

    def __neg__(self):
        return Spark(-self.a, -self.R)


def validate_spark(K: SimplicialComplex, s: Spark):
    if s.R.degree != s.a.degree + 1:
        raise SparkError(
            f"degree mismatch: a has degree {s.a.degree}, R degree {s.R.degree}"
        )
    if len(s.a.values) != K.n_simplices(s.a.degree):
        raise SparkError("cochain a has wrong length for this complex")
    if len(s.R.values) != K.n_simplices(s.R.degree):
        raise SparkError("cocycle R has wrong length for this complex")
    if not s.R.is_integral():
        raise SparkError("R must be integral")
    if not K.delta(s.R).is_zero():
        raise SparkError("R must be a cocycle")


def curvature(K: SimplicialComplex, s: Spark) -> Cochain:
    """phi = delta(a) + R; closed, with integer periods on cycles."""
    return K.delta(s.a) + s.R


def d2_class(K: SimplicialComplex, s: Spark):
    """Class of R in H^{k+1}(K; Z) as (free coords, torsion coords)."""
    Q = integer_cohomology(K, s.R.degree)
    return Q.coords([int(v) if is_integer(v) else v for v in s.R.values])


def mod1(x) -> Fraction:
    return Fraction(x) % 1


# ---------------------------------------------------------------------------
# constructors


def spark_from_cocycle(K: SimplicialComplex, R: Cochain) -> Spark:
    """Spark with the given integral cocycle as its second component.

    The first component is the least-squares minimizer of |R + delta a|
    (standard inner product), solved exactly over Q via the normal
    equations; free variables of the pivoted solve are set to zero, so
    the output is deterministic.
    """
    if not R.is_integral():
        raise SparkError("R must be integral")
    if not K.delta(R).is_zero():
        raise SparkError("R must be a cocycle")
    k = R.degree - 1
    if k < -1:
        raise SparkError("cocycle degree must be nonnegative")
    n_k = K.n_simplices(k)
    key = ("lsq_delta", k)
    if key not in K._cache:
        D = K.delta_rows(k)
        normal = [dict() for _ in range(n_k)]
        for row in D:
            items = list(row.items())
            for i, vi in items:
                ni = normal[i]
                for j, vj in items:
                    ni[j] = ni.get(j, 0) + vi * vj
        K._cache[key] = (D, normal)
    D, normal = K._cache[key]
    rhs = [0] * n_k
    for rowidx, row in enumerate(D):
        r = R.values[rowidx]
        if r:
            for i, vi in row.items():
                rhs[i] -= vi * r
    elim = RatElim([dict(r) for r in normal], n_k, rhs=[rhs])
    a = elim.solution()
    if a is None:
        raise AssertionError("normal equations must be consistent")
    return Spark(K.cochain(k, a), R)


def flat_spark_from_torsion(K, order, gen: Cochain, witness: Cochain, j=1) -> Spark:
    """Flat spark from torsion data delta(witness) = order * gen.

    Returns (a, R) = ((j/order) * witness, -j * gen); its curvature is
    zero and its degree-two class is -j times the class of gen.
    """
    a = witness.scale(Fraction(j, order))
    R = gen.scale(-j)
    return Spark(a, R)


# ---------------------------------------------------------------------------
# equivalence and holonomy


def spark_equivalent(K: SimplicialComplex, s1: Spark, s2: Spark) -> bool:
    """Decide whether two sparks present the same character.

    Exact test: equal curvatures, equal integral classes of R, and
    integer periods of a_1 - a_2 on a basis of the integral cycle
    lattice.  Sufficiency: with [R_1] = [R_2] pick integral S with
    delta S = R_2 - R_1; then a_2 - a_1 + S is a rational cocycle with
    integer periods, hence an integral cocycle plus a rational
    coboundary, which is exactly the allowed shift.
    """
    if s1.degree != s2.degree:
        return False
    k = s1.degree
    if curvature(K, s1) != curvature(K, s2):
        return False
    if d2_class(K, s1) != d2_class(K, s2):
        return False
    diff = s1.a - s2.a
    for z in cycle_lattice_basis(K, k):
        period = sum(c * v for c, v in zip(diff.values, z) if v)
        if not is_integer(period):
            return False
    return True


def holonomy(K: SimplicialComplex, s: Spark, z: Chain) -> Fraction:
    """Value of the character on an integral cycle, in [0, 1)."""
    if z.degree != s.degree:
        raise SparkError("cycle degree must match spark degree")
    if not z.is_integral():
        raise SparkError("holonomy needs an integral cycle")
    if not K.boundary(z).is_zero():
        raise SparkError("holonomy needs a cycle, boundary is nonzero")
    return mod1(K.evaluate(s.a, z))


def pullback_spark(
    src: SimplicialComplex, tgt: SimplicialComplex, vertex_map, s: Spark
) -> Spark:
    """Pull a spark on ``tgt`` back along a simplicial vertex map.

    Both components pull back as cochains, so curvature, evaluation on
    pushed cycles and the integral class all transform contravariantly,
    and the operation is functorial: pulling back along a composite map
    equals pulling back twice, exactly.  Degenerate image simplices
    contribute zero, which is what collapses everything for a constant
    map.
    """
    maps = simplicial_chain_maps(src, tgt, vertex_map)
    k = s.degree
    if k == -1:
        a = s.a
    else:
        a = pull_cochain(maps, s.a, src.n_simplices(k))
    R = pull_cochain(maps, s.R, src.n_simplices(k + 1))
    R = Cochain(R.degree, tuple(int(v) for v in R.values))
    out = Spark(a, R)
    validate_spark(src, out)
    return out


# ---------------------------------------------------------------------------
# products


def star(K: SimplicialComplex, s1, s2) -> Spark:
    """Star product of sparks; integers act as the degree -1 units.

    For sparks of degrees k and l the result has degree k + l + 1 with
    a* = a_1 cup phi_2 + (-1)^{k+1} R_1 cup a_2 and R* = R_1 cup R_2.
    """
    if isinstance(s1, int):
        return Spark(s2.a.scale(s1), s2.R.scale(s1))
    if isinstance(s2, int):
        return Spark(s1.a.scale(s2), s1.R.scale(s2))
    k = s1.degree
    phi2 = curvature(K, s2)
    a_star = K.cup(s1.a, phi2) + K.cup(s1.R, s2.a).scale((-1) ** (k + 1))
    R_star = K.cup(s1.R, s2.R)
    return Spark(a_star, R_star)


def star_alternate(K: SimplicialComplex, s1: Spark, s2: Spark) -> Spark:
    """The other distribution of the star product.

    a~ = a_1 cup R_2 + (-1)^{k+1} phi_1 cup a_2, same R component.
    Differs from star() by the coboundary of (-1)^k a_1 cup a_2, so the
    two results are equivalent sparks.
    """
    k = s1.degree
    phi1 = curvature(K, s1)
    a_alt = K.cup(s1.a, s2.R) + K.cup(phi1, s2.a).scale((-1) ** (k + 1))
    R_star = K.cup(s1.R, s2.R)
    return Spark(a_alt, R_star)


def duality_pair(K: SimplicialComplex, s1: Spark, s2: Spark) -> Fraction:
    """Character pairing: holonomy of the star product on [X].

    Needs degrees k + l = n - 1 on a closed oriented complex.
    """
    fc = K.fundamental_cycle()
    if fc is None:
        raise SparkError("duality pairing needs a fundamental cycle")
    if s1.degree + s2.degree != K.dimension - 1:
        raise SparkError(
            f"degrees {s1.degree} + {s2.degree} must add to {K.dimension - 1}"
        )
    return holonomy(K, star(K, s1, s2), fc)


# ---------------------------------------------------------------------------
# torsion linking


def linking_number(K: SimplicialComplex, torsion_u, gen_v: Cochain) -> Fraction:
    """Linking pairing of torsion classes via a division witness.

    ``torsion_u`` is (order m, generator T_u, witness S) with
    delta S = m * T_u.  Returns (1/m) <S cup T_v, [X]> mod 1, which is
    independent of the chosen witness because the ambiguity is an
    integral cocycle paired against a torsion class.
    """
    fc = K.fundamental_cycle()
    if fc is None:
        raise SparkError("linking needs a fundamental cycle")
    m, _gen_u, witness = torsion_u
    val = K.evaluate(K.cup(witness, gen_v), fc)
    return mod1(Fraction(val, m))


def torsion_linking_matrix(K: SimplicialComplex, p, q):
    """All pairwise linkings of torsion generators of H^p and H^q."""
    if p + q != K.dimension + 1:
        raise SparkError("linking degrees must add to dimension + 1")
    _, tor_p = cohomology_generators(K, p)
    _, tor_q = cohomology_generators(K, q)
    return [
        [linking_number(K, (m, g, w), g2) for _, g2, _ in tor_q]
        for m, g, w in tor_p
    ]


# ---------------------------------------------------------------------------
# randomized material for identity checking


def random_spark(K: SimplicialComplex, k, rng: random.Random, denom=6) -> Spark:
    """Random spark of degree k with mixed exact and topological charge."""
    n_k = K.n_simplices(k)
    a = K.cochain(
        k,
        tuple(
            Fraction(rng.randint(-6, 6), rng.randint(1, denom))
            for _ in range(n_k)
        ),
    )
    # R: an exact part plus a random generator combination
    chi = K.cochain(
        k + 1, tuple(0 for _ in range(K.n_simplices(k + 1)))
    )
    if k + 1 <= K.dimension:
        chi = chi + K.delta(
            K.cochain(k, tuple(rng.randint(-2, 2) for _ in range(n_k)))
        )
        free, tor = cohomology_generators(K, k + 1)
        for g in free:
            c = rng.randint(-2, 2)
            if c:
                chi = chi + g.scale(c)
        for _, g, _ in tor:
            c = rng.randint(-1, 1)
            if c:
                chi = chi + g.scale(c)
    return Spark(a, chi)


def random_equivalent_shift(K: SimplicialComplex, s: Spark, rng: random.Random) -> Spark:
    """Equivalent spark via a random allowed shift (delta b - S, delta S)."""
    k = s.degree
    S = K.cochain(
        k, tuple(rng.randint(-3, 3) for _ in range(K.n_simplices(k)))
    )
    a_new = s.a - S
    if k >= 1:
        b = K.cochain(
            k - 1,
            tuple(
                Fraction(rng.randint(-4, 4), rng.randint(1, 5))
                for _ in range(K.n_simplices(k - 1))
            ),
        )
        a_new = a_new + K.delta(b)
    return Spark(a_new, s.R + K.delta(S))


# ---------------------------------------------------------------------------
# serialization


def spark_to_json(s: Spark):
    from .complexes import scalar_str

    return {
        "degree": s.degree,
        "a": {
            "degree": s.a.degree,
            "ring": s.a.ring(),
            "values": [scalar_str(v) for v in s.a.values],
        },
        "R": {
            "degree": s.R.degree,
            "ring": "INT",
            "values": [scalar_str(v) for v in s.R.values],
        },
    }


def spark_from_json(K: SimplicialComplex, data) -> Spark:
    from .complexes import parse_scalar

    a = K.cochain(
        int(data["a"]["degree"]),
        tuple(parse_scalar(v) for v in data["a"]["values"]),
    )
    R = K.cochain(
        int(data["R"]["degree"]),
        tuple(parse_scalar(v) for v in data["R"]["values"]),
    )
    s = Spark(a, R)
    validate_spark(K, s)
    return s
