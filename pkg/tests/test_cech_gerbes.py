"""Gerbes presented in layers over a patch cover.

The window cover used below cuts the 4x4 grid torus into four 3x3
blocks of vertices.  Its double overlaps are disjoint unions of
contractible strips and its triple and quadruple overlaps are isolated
points, so every gauge solve the machinery attempts succeeds; the
acyclicity flags it raises are all about disconnectedness, degree 0.
"""

import random
from fractions import Fraction

import pytest

from diffchar.builders import circle, moebius_kuehnel_torus, sphere, torus_grid
from diffchar.cohomology import cycle_lattice_basis
from diffchar.complexes import Chain, Cochain
from diffchar.lowdegree import (
    GerbeError,
    cech_gauge,
    cech_gerbe,
    constant_triple_class_trivial,
    gerbe_flat_normal_form,
    gerbe_from_global,
    gerbe_gauge_equivalent,
    gerbe_holonomy,
    gerbe_surface_holonomy,
    gerbe_total_differential,
    patch_cover,
    star_cover,
    _component_reps,
)

F = Fraction
M = 4


def grid_window_cover():
    K = torus_grid(M)

    def vid(i, j):
        return (i % M) + M * (j % M)

    def window(rows, cols):
        verts = {vid(i, j) for i in cols for j in rows}
        return [
            t
            for k in range(K.dimension + 1)
            for t in K.simplices[k]
            if all(v in verts for v in t)
        ]

    cov = patch_cover(
        K,
        [
            window((0, 1, 2), (0, 1, 2)),
            window((0, 1, 2), (2, 3, 0)),
            window((2, 3, 0), (0, 1, 2)),
            window((2, 3, 0), (2, 3, 0)),
        ],
    )
    return K, cov


@pytest.fixture(scope="module")
def windows():
    return grid_window_cover()


@pytest.fixture(scope="module")
def third_gerbe(windows):
    K, cov = windows
    t = Cochain(
        2, tuple(F(1, 3) if i == 0 else F(0) for i in range(K.n_simplices(2)))
    )
    return t, gerbe_from_global(cov, t)


def random_gauge(K, cov, rng):
    """A patch, pair and shift move with small random rationals."""
    patch = {}
    for i, emb in enumerate(cov.embeddings):
        vals = [F(0)] * K.n_simplices(1)
        for p in emb.simplex_to_parent[1]:
            vals[p] = F(rng.randrange(-6, 7), rng.choice((1, 2, 3, 4)))
        patch[i] = Cochain(1, tuple(vals))
    pair = {}
    for key, emb in cov.doubles.items():
        vals = [F(0)] * K.n_simplices(0)
        for p in emb.simplex_to_parent[0]:
            vals[p] = F(rng.randrange(-6, 7), rng.choice((1, 2, 3)))
        pair[key] = Cochain(0, tuple(vals))
    shift = {}
    for key, emb in cov.triples.items():
        reps, labels = _component_reps(emb)
        per_rep = {r: rng.randrange(-3, 4) for r in reps}
        vals = [0] * K.n_simplices(0)
        for p in emb.simplex_to_parent[0]:
            vals[p] = per_rep[labels[p]]
        shift[key] = Cochain(0, tuple(vals))
    return patch, pair, shift


# ---------------------------------------------------------------------------
# covers


def test_window_cover_shape(windows):
    K, cov = windows
    assert cov.n_patches == 4
    assert len(cov.doubles) == 6
    assert len(cov.triples) == 4
    assert len(cov.quads) == 1
    # strips and corner points disconnect, but nothing is flagged in
    # the degrees the gauge solves run over
    assert all(flag[2] == 0 for flag in cov.acyclicity_flags)


def test_star_cover_flags_sphere_doubles():
    cov = star_cover(sphere(2))
    assert cov.n_patches == 4 and len(cov.quads) == 1
    kinds = {(kind, deg) for kind, key, deg, rank in cov.acyclicity_flags}
    assert ("double", 1) in kinds


def test_cover_must_cover_everything():
    K = torus_grid(3)
    with pytest.raises(GerbeError, match="misses"):
        patch_cover(K, [[K.simplices[2][0]]])


def test_patch_of_prefers_lowest_index(windows):
    K, cov = windows
    for simp in K.simplices[2]:
        i = cov.patch_of(simp)
        assert simp in cov.simplex_sets[i]
        assert all(simp not in cov.simplex_sets[j] for j in range(i))


# ---------------------------------------------------------------------------
# total differential


def test_trivial_gerbe_differential(windows):
    K, cov = windows
    phi, R = gerbe_total_differential(cech_gerbe(cov))
    assert phi.is_zero()
    assert all(v.is_zero() for v in R.values())


def test_global_restriction_is_flat(windows, third_gerbe):
    K, cov = windows
    t, g = third_gerbe
    assert g.pair_part == {} and g.triple_part == {}
    phi, R = gerbe_total_differential(g)
    assert phi.is_zero()
    z = K.fundamental_cycle()
    assert gerbe_holonomy(g, z) == F(1, 3)
    assert gerbe_holonomy(g, z) == gerbe_surface_holonomy(K, t, z)


def test_global_restriction_matches_single_chart_on_star_cover():
    K = moebius_kuehnel_torus()
    cov = star_cover(K)
    z = K.fundamental_cycle()
    rng = random.Random(5)
    for _ in range(3):
        t = Cochain(
            2,
            tuple(F(rng.randrange(-4, 5), 3) for _ in range(K.n_simplices(2))),
        )
        g = gerbe_from_global(cov, t)
        assert gerbe_holonomy(g, z) == gerbe_surface_holonomy(K, t, z)


def test_curved_gerbe_on_three_sphere():
    K = sphere(3)
    cov = star_cover(K)
    t = Cochain(2, tuple(F(1, 4) if i == 0 else F(0) for i in range(K.n_simplices(2))))
    g = gerbe_from_global(cov, t)
    phi, R = gerbe_total_differential(g)
    assert phi == K.delta(t) and not phi.is_zero()
    assert all(v.is_zero() for v in R.values())
    with pytest.raises(GerbeError, match="vanishing curvature"):
        gerbe_flat_normal_form(g)


def test_inconsistent_patch_layers_rejected():
    K = sphere(2)
    cov = star_cover(K)
    bump = Cochain(2, tuple(F(1, 2) if i == 0 else F(0) for i in range(4)))
    parts = [bump if i == 1 else K.zero_cochain(2) for i in range(cov.n_patches)]
    g = cech_gerbe(cov, parts)
    with pytest.raises(GerbeError, match="inconsistent"):
        gerbe_total_differential(g)


def test_single_third_triple_without_quads_is_flat():
    # three closed stars cover the triangle circle and meet pairwise,
    # yet no quadruple overlap exists, so a lone 1/3 on the one triple
    # overlap is consistent and is its own normal form
    K = circle(3)
    cov = star_cover(K)
    assert len(cov.triples) == 1 and len(cov.quads) == 0
    a0 = Cochain(0, (F(1, 3), 0, 0))
    g = cech_gerbe(cov, triple_part={(0, 1, 2): a0})
    phi, R = gerbe_total_differential(g)
    assert phi.is_zero() and R == {}
    T = gerbe_flat_normal_form(g)
    assert T[(0, 1, 2)] == a0
    # every gerbe on a circle is trivial, and the decision agrees
    assert gerbe_gauge_equivalent(cech_gerbe(cov), g)


def test_single_third_triple_with_quads_rejected():
    K = sphere(2)
    cov = star_cover(K)
    a0 = Cochain(0, (F(1, 3),) * 4)
    g = cech_gerbe(cov, triple_part={(0, 1, 2): a0})
    with pytest.raises(GerbeError, match="non-integral"):
        gerbe_total_differential(g)


# ---------------------------------------------------------------------------
# holonomy


def test_holonomy_needs_closed_integral_surface(windows, third_gerbe):
    K, cov = windows
    _, g = third_gerbe
    open_chain = Chain(2, tuple(1 if i == 0 else 0 for i in range(K.n_simplices(2))))
    with pytest.raises(GerbeError, match="closed"):
        gerbe_holonomy(g, open_chain)
    z = K.fundamental_cycle()
    with pytest.raises(GerbeError, match="integral"):
        gerbe_holonomy(g, Chain(2, tuple(F(v, 2) for v in z.values)))


def test_holonomy_rejects_non_subordinate_assignment(windows, third_gerbe):
    K, cov = windows
    _, g = third_gerbe
    z = K.fundamental_cycle()
    simp = K.simplices[2][0]
    outside = next(
        i for i in range(cov.n_patches) if simp not in cov.simplex_sets[i]
    )
    faces = [cov.patch_of(s) for s in K.simplices[2]]
    faces[0] = outside
    with pytest.raises(GerbeError, match="subordinate"):
        gerbe_holonomy(g, z, face_patches=faces)


def test_holonomy_gauge_invariant(windows, third_gerbe):
    K, cov = windows
    _, g = third_gerbe
    z = K.fundamental_cycle()
    rng = random.Random(11)
    cur = g
    for _ in range(8):
        cur = cech_gauge(cur, *random_gauge(K, cov, rng))
        phi, R = gerbe_total_differential(cur)
        assert phi.is_zero()
        assert all(v.is_integral() for v in R.values())
        assert gerbe_holonomy(cur, z) == F(1, 3)


def test_holonomy_assignment_independent(windows, third_gerbe):
    K, cov = windows
    _, g = third_gerbe
    rng = random.Random(13)
    cur = cech_gauge(g, *random_gauge(K, cov, rng))
    z = K.fundamental_cycle()

    def rand_assign(k):
        out = []
        for simp in K.simplices[k]:
            opts = [i for i, s in enumerate(cov.simplex_sets) if simp in s]
            out.append(rng.choice(opts))
        return out

    values = {
        gerbe_holonomy(cur, z, rand_assign(2), rand_assign(1), rand_assign(0))
        for _ in range(10)
    }
    assert values == {F(1, 3)}


def test_holonomy_additive_in_the_cycle(windows, third_gerbe):
    K, cov = windows
    _, g = third_gerbe
    rng = random.Random(17)
    cur = cech_gauge(g, *random_gauge(K, cov, rng))
    z = K.fundamental_cycle()
    for vec in cycle_lattice_basis(K, 2)[:3]:
        za = Chain(2, tuple(vec))
        zsum = Chain(2, tuple(a + b for a, b in zip(za.values, z.values)))
        total = gerbe_holonomy(cur, za) + gerbe_holonomy(cur, z)
        assert gerbe_holonomy(cur, zsum) == total % 1


# ---------------------------------------------------------------------------
# normal form and gauge equivalence


def test_flat_normal_form_of_third_gerbe(windows, third_gerbe):
    K, cov = windows
    _, g = third_gerbe
    T = gerbe_flat_normal_form(g)
    denoms = {Fraction(v).denominator for u in T.values() for v in u.values}
    assert denoms <= {1, 3} and 3 in denoms
    gT = cech_gerbe(cov, triple_part=T)
    phi, R = gerbe_total_differential(gT)
    assert phi.is_zero()
    assert all(v.is_zero() for v in R.values())
    assert gerbe_holonomy(gT, K.fundamental_cycle()) == F(1, 3)


def test_trivial_normal_form_is_zero(windows):
    K, cov = windows
    T = gerbe_flat_normal_form(cech_gerbe(cov))
    assert all(u.is_zero() for u in T.values())


def test_normal_form_unique_up_to_constants(windows, third_gerbe):
    K, cov = windows
    _, g = third_gerbe
    rng = random.Random(19)
    T1 = gerbe_flat_normal_form(g)
    T2 = gerbe_flat_normal_form(cech_gauge(g, *random_gauge(K, cov, rng)))
    diff = {key: T1[key] - T2[key] for key in T1}
    assert constant_triple_class_trivial(cov, diff)


def test_gauge_equivalence_decision(windows, third_gerbe):
    K, cov = windows
    _, g = third_gerbe
    triv = cech_gerbe(cov)
    rng = random.Random(23)
    moved = cech_gauge(triv, *random_gauge(K, cov, rng))
    assert gerbe_gauge_equivalent(triv, moved)
    assert gerbe_gauge_equivalent(g, cech_gauge(g, *random_gauge(K, cov, rng)))
    assert not gerbe_gauge_equivalent(triv, g)
    assert gerbe_gauge_equivalent(
        g, cech_gerbe(cov, triple_part=gerbe_flat_normal_form(g))
    )


def test_gauge_equivalence_needs_common_cover(windows, third_gerbe):
    K, cov = windows
    _, g = third_gerbe
    other = star_cover(circle(3))
    with pytest.raises(GerbeError, match="common cover"):
        gerbe_gauge_equivalent(g, cech_gerbe(other))


def test_distinct_flat_classes_not_equivalent(windows, third_gerbe):
    K, cov = windows
    t, g = third_gerbe
    doubled = gerbe_from_global(cov, t + t)
    assert gerbe_total_differential(doubled)[0].is_zero()
    assert not gerbe_gauge_equivalent(g, doubled)


# ---------------------------------------------------------------------------
# layer validation


def test_layers_validate_support(windows):
    K, cov = windows
    stray = Cochain(1, tuple(F(1) for _ in range(K.n_simplices(1))))
    with pytest.raises(GerbeError, match="support"):
        cech_gerbe(cov, pair_part={(0, 1): stray})


def test_shift_must_be_integral_and_constant(windows, third_gerbe):
    K, cov = windows
    _, g = third_gerbe
    key = min(cov.triples)
    emb = cov.triples[key]
    vals = [F(0)] * K.n_simplices(0)
    vals[emb.simplex_to_parent[0][0]] = F(1, 2)
    with pytest.raises(GerbeError, match="integral"):
        cech_gauge(g, shift={key: Cochain(0, tuple(vals))})
    # non-constant integers fail too, on a cover whose triple overlap
    # is connected (the sphere star-cover one contains a whole face)
    K2 = sphere(2)
    cov2 = star_cover(K2)
    emb2 = cov2.triples[(0, 1, 2)]
    vals2 = [0] * K2.n_simplices(0)
    vals2[emb2.simplex_to_parent[0][0]] = 1
    with pytest.raises(GerbeError, match="locally constant"):
        cech_gauge(
            cech_gerbe(cov2), shift={(0, 1, 2): Cochain(0, tuple(vals2))}
        )


def test_pair_keys_must_be_overlaps(windows):
    K, cov = windows
    with pytest.raises(GerbeError, match="double overlap"):
        cech_gerbe(cov, pair_part={(1, 0): K.zero_cochain(1)})
