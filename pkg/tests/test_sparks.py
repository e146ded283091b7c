"""Spark calculus: products, equivalence, holonomy, linking."""

import random
from fractions import Fraction

import pytest

from diffchar.builders import (
    circle,
    lens_space,
    moebius_kuehnel_torus,
    rp3,
    sphere,
    surface_of_genus,
)
from diffchar.cohomology import cohomology_generators, cycle_lattice_basis
from diffchar.complexes import (
    Chain,
    Cochain,
    ComplexError,
    apply_chain_map,
    simplicial_chain_maps,
)
from diffchar.sparks import (
    Spark,
    SparkError,
    curvature,
    d2_class,
    duality_pair,
    flat_spark_from_torsion,
    holonomy,
    linking_number,
    pullback_spark,
    random_equivalent_shift,
    random_spark,
    spark_from_cocycle,
    spark_from_json,
    spark_to_json,
    star,
    star_alternate,
    torsion_linking_matrix,
    validate_spark,
)


class TestBasics:
    def test_validate_catches_rational_R(self):
        K = sphere(2)
        s = Spark(K.zero_cochain(0), K.cochain(1, (Fraction(1, 2),) + (0,) * 5))
        with pytest.raises(SparkError, match="integral"):
            validate_spark(K, s)

    def test_validate_catches_non_cocycle(self):
        K = sphere(2)
        R = K.elementary_cochain((0, 1))
        with pytest.raises(SparkError, match="cocycle"):
            validate_spark(K, Spark(K.zero_cochain(0), R))

    def test_curvature_periods_integral(self):
        rng = random.Random(0)
        K = moebius_kuehnel_torus()
        for _ in range(20):
            s = random_spark(K, 1, rng)
            phi = curvature(K, s)
            assert K.delta(phi).is_zero()
            for z in cycle_lattice_basis(K, 2):
                period = sum(c * v for c, v in zip(phi.values, z))
                assert Fraction(period).denominator == 1

    def test_group_operations(self):
        rng = random.Random(1)
        K = sphere(2)
        s, t = random_spark(K, 1, rng), random_spark(K, 1, rng)
        assert (s + t) - t == s
        assert (-s).a == -s.a


class TestConstructors:
    def test_spark_from_cocycle_normal_equations(self):
        # the curvature is orthogonal to every coboundary
        K = moebius_kuehnel_torus()
        free, _ = cohomology_generators(K, 2)
        R = free[0]
        s = spark_from_cocycle(K, R)
        phi = curvature(K, s)
        D = K.delta_rows(1)
        for col in range(K.n_simplices(1)):
            val = sum(
                row.get(col, 0) * phi.values[i] for i, row in enumerate(D)
            )
            assert val == 0

    def test_spark_from_cocycle_deterministic(self):
        K = sphere(2)
        R = K.delta(K.cochain(1, tuple(range(6))))
        assert spark_from_cocycle(K, R) == spark_from_cocycle(K, R)

    def test_spark_from_cocycle_rejects_non_cocycle(self):
        K = sphere(2)
        with pytest.raises(SparkError):
            spark_from_cocycle(K, K.elementary_cochain((0, 1)))

    def test_flat_spark_is_flat(self):
        K = rp3()
        _, tor = cohomology_generators(K, 2)
        d, g, w = tor[0]
        s = flat_spark_from_torsion(K, d, g, w)
        assert curvature(K, s).is_zero()
        free, torsion = d2_class(K, s)
        assert not any(free)
        assert torsion == (1,)  # -1 == +1 mod 2

    def test_flat_spark_full_order_is_trivial(self):
        from diffchar.sparks import spark_equivalent

        K = rp3()
        _, tor = cohomology_generators(K, 2)
        d, g, w = tor[0]
        s = flat_spark_from_torsion(K, d, g, w, j=d)
        zero = Spark(K.zero_cochain(1), K.zero_cochain(2))
        assert spark_equivalent(K, s, zero)


class TestEquivalence:
    def test_random_shifts_equivalent(self):
        from diffchar.sparks import spark_equivalent

        rng = random.Random(2)
        for K, k in ((sphere(2), 0), (moebius_kuehnel_torus(), 1), (rp3(), 1)):
            for _ in range(15):
                s = random_spark(K, k, rng)
                assert spark_equivalent(K, s, random_equivalent_shift(K, s, rng))

    def test_distinct_classes_not_equivalent(self):
        from diffchar.sparks import spark_equivalent

        K = rp3()
        _, tor = cohomology_generators(K, 2)
        d, g, w = tor[0]
        flat = flat_spark_from_torsion(K, d, g, w)
        zero = Spark(K.zero_cochain(1), K.zero_cochain(2))
        assert not spark_equivalent(K, flat, zero)

    def test_curvature_mismatch_not_equivalent(self):
        from diffchar.sparks import spark_equivalent

        K = sphere(2)
        rng = random.Random(3)
        s = random_spark(K, 1, rng)
        bumped = Spark(s.a + K.cochain(1, (Fraction(1, 7),) + (0,) * 5), s.R)
        assert not spark_equivalent(K, s, bumped)

    def test_fractional_period_shift_not_equivalent(self):
        from diffchar.sparks import spark_equivalent

        K = moebius_kuehnel_torus()
        free, _ = cohomology_generators(K, 1)
        u = free[0]
        s = Spark(K.zero_cochain(1), K.zero_cochain(2))
        t = Spark(u.scale(Fraction(1, 3)), K.zero_cochain(2))
        # same curvature (both flat), same R, but periods differ by 1/3
        assert not spark_equivalent(K, s, t)


class TestHolonomy:
    def test_invariance_under_shifts(self):
        rng = random.Random(4)
        K = surface_of_genus(2)
        cycles = [Chain(1, tuple(z)) for z in cycle_lattice_basis(K, 1)[:5]]
        for _ in range(10):
            s = random_spark(K, 1, rng)
            s2 = random_equivalent_shift(K, s, rng)
            for z in cycles:
                assert holonomy(K, s, z) == holonomy(K, s2, z)

    def test_range_and_additivity(self):
        rng = random.Random(5)
        K = moebius_kuehnel_torus()
        z = Chain(1, tuple(cycle_lattice_basis(K, 1)[0]))
        s, t = random_spark(K, 1, rng), random_spark(K, 1, rng)
        hs, ht = holonomy(K, s, z), holonomy(K, t, z)
        assert 0 <= hs < 1
        assert holonomy(K, s + t, z) == (hs + ht) % 1

    def test_rejects_non_cycle(self):
        K = sphere(2)
        s = Spark(K.zero_cochain(1), K.zero_cochain(2))
        nz = Chain(1, (1,) + (0,) * 5)
        with pytest.raises(SparkError, match="cycle"):
            holonomy(K, s, nz)


class TestStar:
    @pytest.mark.parametrize(
        "space,kpairs",
        [
            (sphere(2), [(0, 0), (0, 1), (1, 0)]),
            (moebius_kuehnel_torus(), [(0, 0), (0, 1), (1, 1)]),
            (sphere(3), [(1, 1), (0, 2)]),
        ],
    )
    def test_leibniz_identity(self, space, kpairs):
        rng = random.Random(6)
        K = space
        for k1, k2 in kpairs:
            for _ in range(15):
                s1, s2 = random_spark(K, k1, rng), random_spark(K, k2, rng)
                st = star(K, s1, s2)
                lhs = K.delta(st.a)
                rhs = K.cup(curvature(K, s1), curvature(K, s2)) - K.cup(
                    s1.R, s2.R
                )
                assert lhs == rhs

    def test_star_curvature_multiplicative(self):
        rng = random.Random(7)
        K = sphere(3)
        s1, s2 = random_spark(K, 1, rng), random_spark(K, 0, rng)
        st = star(K, s1, s2)
        assert curvature(K, st) == K.cup(curvature(K, s1), curvature(K, s2))

    def test_star_alternate_equivalent(self):
        from diffchar.sparks import spark_equivalent

        rng = random.Random(8)
        K = moebius_kuehnel_torus()
        for k1, k2 in ((0, 0), (0, 1)):
            for _ in range(10):
                s1, s2 = random_spark(K, k1, rng), random_spark(K, k2, rng)
                assert spark_equivalent(
                    K, star(K, s1, s2), star_alternate(K, s1, s2)
                )

    def test_star_well_defined_both_slots(self):
        from diffchar.sparks import spark_equivalent

        rng = random.Random(9)
        K = moebius_kuehnel_torus()
        for _ in range(10):
            s1, s2 = random_spark(K, 0, rng), random_spark(K, 1, rng)
            st = star(K, s1, s2)
            assert spark_equivalent(
                K, st, star(K, random_equivalent_shift(K, s1, rng), s2)
            )
            assert spark_equivalent(
                K, st, star(K, s1, random_equivalent_shift(K, s2, rng))
            )

    def test_integer_unit_action(self):
        rng = random.Random(10)
        K = sphere(2)
        s = random_spark(K, 1, rng)
        assert star(K, 1, s) == s
        assert star(K, -2, s) == Spark(s.a.scale(-2), s.R.scale(-2))
        assert star(K, s, 3) == Spark(s.a.scale(3), s.R.scale(3))

    def test_d2_multiplicative_on_classes(self):
        # the degree-two class of a star product only depends on classes
        rng = random.Random(11)
        K = sphere(3)
        for _ in range(10):
            s1, s2 = random_spark(K, 1, rng), random_spark(K, 1, rng)
            shifted = random_equivalent_shift(K, s1, rng)
            a = d2_class(K, star(K, s1, s2))
            b = d2_class(K, star(K, shifted, s2))
            assert a == b


class TestDualityPair:
    def test_invariance_under_equivalence(self):
        rng = random.Random(12)
        K = moebius_kuehnel_torus()
        for _ in range(15):
            s0, s1 = random_spark(K, 0, rng), random_spark(K, 1, rng)
            p = duality_pair(K, s0, s1)
            assert p == duality_pair(K, random_equivalent_shift(K, s0, rng), s1)
            assert p == duality_pair(K, s0, random_equivalent_shift(K, s1, rng))

    def test_bilinearity(self):
        rng = random.Random(13)
        K = moebius_kuehnel_torus()
        for _ in range(15):
            s0, s0b = random_spark(K, 0, rng), random_spark(K, 0, rng)
            s1 = random_spark(K, 1, rng)
            assert duality_pair(K, s0 + s0b, s1) == (
                duality_pair(K, s0, s1) + duality_pair(K, s0b, s1)
            ) % 1

    def test_degree_mismatch_rejected(self):
        K = sphere(2)
        s = Spark(K.zero_cochain(0), K.zero_cochain(1))
        with pytest.raises(SparkError, match="degrees"):
            duality_pair(K, s, s)


class TestLinking:
    def test_rp3_half(self):
        assert torsion_linking_matrix(rp3(), 2, 2) == [[Fraction(1, 2)]]

    def test_lens3_nondegenerate(self):
        M = torsion_linking_matrix(lens_space(3, 1), 2, 2)
        assert M[0][0] in (Fraction(1, 3), Fraction(2, 3))

    def test_witness_independence(self):
        K = rp3()
        _, tor = cohomology_generators(K, 2)
        d, g, w = tor[0]
        base = linking_number(K, (d, g, w), g)
        # witness shifted by an integral cocycle (here a coboundary)
        c = K.delta(K.cochain(0, tuple(range(K.n_simplices(0)))))
        assert linking_number(K, (d, g, w + c), g) == base
        # generator representative shifted: (g + delta e, w + d*e)
        e = K.cochain(1, tuple((i * 7) % 3 - 1 for i in range(K.n_simplices(1))))
        g2 = g + K.delta(e)
        w2 = w + e.scale(d)
        assert K.delta(w2) == g2.scale(d)
        assert linking_number(K, (d, g2, w2), g) == base


class TestPullback:
    def winding_spark(self, K):
        # vertex phases 0, 1/3, 2/3 around the triangle circle; the
        # integer correction carries one full turn
        a = K.cochain(0, (0, Fraction(1, 3), Fraction(2, 3)))
        step = K.delta(a)
        R = Cochain(1, tuple(-1 if v == Fraction(2, 3) else 0 for v in step.values))
        s = Spark(a, R)
        validate_spark(K, s)
        return s

    def test_identity_map(self):
        rng = random.Random(31)
        K = moebius_kuehnel_torus()
        s = random_spark(K, 1, rng)
        assert pullback_spark(K, K, list(range(K.n_vertices)), s) == s

    def test_double_cover_doubles_the_class(self):
        K3, K6 = circle(3), circle(6)
        s = self.winding_spark(K3)
        assert K3.evaluate(s.R, K3.fundamental_cycle()) == 1
        pulled = pullback_spark(K6, K3, [i % 3 for i in range(6)], s)
        z6 = K6.fundamental_cycle()
        assert K6.evaluate(pulled.R, z6) == 2
        assert K6.evaluate(curvature(K6, pulled), z6) == 2
        # evaluation against the pushed cycle says the same thing
        maps = simplicial_chain_maps(K6, K3, [i % 3 for i in range(6)])
        assert apply_chain_map(maps, z6) == Chain(
            1, tuple(2 * v for v in K3.fundamental_cycle().values)
        )

    def test_functorial(self):
        K3, K6, K12 = circle(3), circle(6), circle(12)
        s = self.winding_spark(K3)
        f = [i % 6 for i in range(12)]
        g = [i % 3 for i in range(6)]
        composite = [g[f[i]] for i in range(12)]
        twice = pullback_spark(K12, K6, f, pullback_spark(K6, K3, g, s))
        assert twice == pullback_spark(K12, K3, composite, s)

    def test_constant_map_flattens(self):
        rng = random.Random(33)
        K = sphere(2)
        C = circle(4)
        s = random_spark(K, 0, rng)
        pulled = pullback_spark(C, K, [2] * C.n_vertices, s)
        assert pulled.R.is_zero()
        assert curvature(C, pulled).is_zero()
        assert len(set(pulled.a.values)) == 1

    def test_non_simplicial_map_rejected(self):
        C = circle(4)
        s = Spark(C.zero_cochain(0), C.zero_cochain(1))
        with pytest.raises(ComplexError):
            pullback_spark(C, C, [0, 2, 0, 2], s)


class TestSerialization:
    def test_round_trip(self):
        rng = random.Random(14)
        K = moebius_kuehnel_torus()
        s = random_spark(K, 1, rng)
        data = spark_to_json(s)
        s2 = spark_from_json(K, data)
        assert s2 == s

    def test_bad_data_rejected(self):
        K = sphere(2)
        s = Spark(K.zero_cochain(0), K.elementary_cochain((0, 1)))
        data = spark_to_json(s)
        with pytest.raises(SparkError):
            spark_from_json(K, data)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
