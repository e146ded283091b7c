"""Circle-valued functions, lattice circle connections, and gerbes.

Degree 0: rational vertex phases turn into a degree-0 spark whose
curvature is the principal-value phase step along edges.  Degree 1:
edge phases give loop holonomies, a principal-value field strength
with integer total flux on a closed oriented surface, and a degree-1
spark, all gauge-covariantly.  Degree 2: triangle phases form a gerbe
with circle-valued surface holonomy; flat ones trivialize on every
closed vertex star through an explicit cone primitive.

Gerbes also come in glued form: a PatchCover carries triangle phases
per patch, edge gluing data per double overlap, and vertex data per
triple overlap.  The total differential returns the glued curvature
together with the integer obstruction on quadruple overlaps, surface
holonomy is computed by a zig-zag through the layers, and flat gerbes
reduce to locally constant triple data whose class decides gauge
equivalence.

Principal values live in (-1/2, 1/2]; a value landing exactly on 1/2
where a branch has to be chosen raises PhaseError rather than picking
a side silently.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .cohomology import cohomology_structure
from .complexes import (
    Chain,
    Cochain,
    ComplexEmbedding,
    SimplicialComplex,
    closed_star,
    induced_subcomplex,
)
from .exact import rat_solve, smith_normal_form
from .sparks import Spark, mod1


class GerbeError(ValueError):
    """Cover or layer data that does not fit together."""


class PhaseError(Exception):
    pass


def principal_value(x) -> Fraction:
    """Representative of x mod 1 in (-1/2, 1/2]."""
    f = mod1(Fraction(x))
    return f if f <= Fraction(1, 2) else f - 1


def _principal_cochain(u: Cochain, what) -> Cochain:
    vals = []
    for x in u.values:
        f = mod1(Fraction(x))
        if f == Fraction(1, 2):
            raise PhaseError(f"{what} of one half sits on the branch cut")
        vals.append(f if f < Fraction(1, 2) else f - 1)
    return Cochain(u.degree, tuple(vals))


def _canonical_phases(u: Cochain) -> Cochain:
    return Cochain(u.degree, tuple(mod1(Fraction(x)) for x in u.values))


# ---------------------------------------------------------------------------
# degree 0: circle-valued vertex functions


def circle_function_spark(K: SimplicialComplex, values) -> Spark:
    """Degree-0 spark of a circle-valued vertex function.

    values are rational phases, read mod 1.  The curvature is the
    principal-value phase step along each edge; if those steps fail to
    close up around some face the phase winds and no spark exists.
    """
    theta = _canonical_phases(K.cochain(0, [Fraction(v) for v in values]))
    step = _principal_cochain(K.delta(theta), "phase step")
    R = step - K.delta(theta)
    if not R.is_integral():
        raise AssertionError("integer correction must be integral")
    R = Cochain(1, tuple(int(v) for v in R.values))
    if not K.delta(R).is_zero():
        raise PhaseError("phase winds around a face")
    return Spark(theta, R)


def spark_circle_function(K: SimplicialComplex, s: Spark):
    """Vertex phases in [0, 1) of a degree-0 spark."""
    if s.degree != 0:
        raise ValueError("need a degree-0 spark")
    return tuple(mod1(Fraction(v)) for v in s.a.values)


# ---------------------------------------------------------------------------
# degree 1: lattice circle connections


def field_strength(K: SimplicialComplex, theta: Cochain) -> Cochain:
    """Principal-value flux of an edge-phase connection, one per triangle."""
    if theta.degree != 1:
        raise ValueError("connection phases live on edges")
    return _principal_cochain(K.delta(theta), "flux")


def chern_cocycle(K: SimplicialComplex, theta: Cochain):
    """Field strength of a connection together with its integer part.

    Returns (F, N) with delta(theta) = F + N: F is the principal-value
    flux per triangle and N is integral.  Against a closed surface
    cycle the F-total equals minus the N-total, so it is an integer,
    the Chern number; F itself is invariant under gauge moves by vertex
    phases since those telescope inside delta.
    """
    F = field_strength(K, theta)
    N = K.delta(theta) - F
    if not N.is_integral():
        raise AssertionError("integer correction must be integral")
    return F, Cochain(2, tuple(int(v) for v in N.values))


def connection_holonomy(K: SimplicialComplex, theta: Cochain, loop: Chain):
    """Phase mod 1 picked up around a closed edge loop."""
    if not K.boundary(loop).is_zero():
        raise ValueError("holonomy needs a closed loop")
    return mod1(Fraction(K.evaluate(theta, loop)))


def total_flux(K: SimplicialComplex, theta: Cochain):
    """Integer total flux through a closed oriented surface."""
    z = K.fundamental_cycle()
    if z is None or K.dimension != 2:
        raise PhaseError("total flux needs a closed oriented surface")
    flux = K.evaluate(field_strength(K, theta), z)
    if flux != int(flux):
        raise AssertionError("total flux must be an integer")
    return int(flux)


def spark_of_connection(K: SimplicialComplex, theta: Cochain) -> Spark:
    """Degree-1 spark whose curvature is the principal-value flux."""
    F = field_strength(K, theta)
    a = _canonical_phases(theta)
    R = F - K.delta(a)
    if not R.is_integral():
        raise AssertionError("integer correction must be integral")
    R = Cochain(2, tuple(int(v) for v in R.values))
    if not K.delta(R).is_zero():
        raise PhaseError("flux winds around a 3-face")
    return Spark(a, R)


def connection_of_spark(K: SimplicialComplex, s: Spark) -> Cochain:
    """Edge phases in [0, 1) of a degree-1 spark."""
    if s.degree != 1:
        raise ValueError("need a degree-1 spark")
    return _canonical_phases(s.a)


def gauge_transform(K: SimplicialComplex, theta: Cochain, lam: Cochain, shift=None):
    """theta plus the differential of vertex phases plus an integer shift."""
    out = theta + K.delta(lam)
    if shift is not None:
        if not shift.is_integral():
            raise ValueError("shift must be integral")
        out = out + shift
    return out


# ---------------------------------------------------------------------------
# degree 2: gerbes


def gerbe_curvature(K: SimplicialComplex, t: Cochain) -> Cochain:
    """Principal-value curvature of triangle phases, one per 3-simplex."""
    if t.degree != 2:
        raise ValueError("gerbe phases live on triangles")
    return _principal_cochain(K.delta(t), "gerbe curvature")


def gerbe_is_flat(K: SimplicialComplex, t: Cochain) -> bool:
    return gerbe_curvature(K, t).is_zero()


def gerbe_surface_holonomy(K: SimplicialComplex, t: Cochain, z: Chain):
    """Phase mod 1 of a gerbe over a closed surface chain.

    Invariant under gauge moves t -> t + delta(edge phases) + integers.
    """
    if t.degree != 2 or z.degree != 2:
        raise ValueError("surface holonomy pairs triangle phases with a 2-chain")
    if not K.boundary(z).is_zero():
        raise ValueError("holonomy needs a closed surface chain")
    return mod1(Fraction(K.evaluate(t, z)))


def gerbe_gauge(K: SimplicialComplex, t: Cochain, alpha: Cochain, shift=None):
    """t plus the differential of edge phases plus an integer shift."""
    out = t + K.delta(alpha)
    if shift is not None:
        if not shift.is_integral():
            raise ValueError("shift must be integral")
        out = out + shift
    return out


def star_trivialization(K: SimplicialComplex, t: Cochain, v):
    """Cone primitive of a gerbe on the closed star of vertex v.

    Returns {edge: phase} on the star's edges; edges through v carry 0
    and every other edge e receives the phase of the cone triangle on
    v and e, signed by the position of v in the sorted triangle.  For a
    flat gerbe the mod-1 differential of this primitive reproduces t on
    every triangle of the closed star.
    """
    if t.degree != 2:
        raise ValueError("gerbe phases live on triangles")
    alpha = {}
    edges = set()
    for simp in closed_star(K, v):
        if len(simp) >= 2:
            for i in range(len(simp)):
                for j in range(i + 1, len(simp)):
                    edges.add((simp[i], simp[j]))
    tri_index = K.index[2]
    for e in sorted(edges):
        if v in e:
            alpha[e] = Fraction(0)
            continue
        cone = tuple(sorted((v,) + e))
        pos = cone.index(v)
        alpha[e] = Fraction((-1) ** pos) * Fraction(t.values[tri_index[cone]])
    return alpha


def check_star_trivialization(K: SimplicialComplex, t: Cochain, v) -> bool:
    """Does the cone primitive reproduce t mod 1 on the whole closed star?"""
    alpha = star_trivialization(K, t, v)
    tri_index = K.index[2]
    tris = set()
    for simp in closed_star(K, v):
        if len(simp) == 3:
            tris.add(simp)
        elif len(simp) > 3:
            for i in range(len(simp)):
                for j in range(i + 1, len(simp)):
                    for l in range(j + 1, len(simp)):
                        tris.add((simp[i], simp[j], simp[l]))
    for tri in sorted(tris):
        a, b, c = tri
        d_alpha = alpha[(b, c)] - alpha[(a, c)] + alpha[(a, b)]
        if mod1(d_alpha - Fraction(t.values[tri_index[tri]])) != 0:
            return False
    return True


# ---------------------------------------------------------------------------
# gerbes over a patch cover
#
# A gerbe can also be presented in pieces: a rational 2-cochain per
# patch of a cover, a 1-cochain per double overlap and a 0-cochain per
# triple overlap, antisymmetric in the patch indices.  The layers are
# stored as ambient cochains supported on their overlap, which keeps
# restriction maps trivial.  The total differential of such a package
# splits into a glued curvature 3-cochain and an integral obstruction
# on quadruple overlaps; gauge moves shift the layers by a 1-cochain
# per patch and a 0-cochain per double overlap plus integer constants.


def _perm_sign(seq):
    sign = 1
    arr = list(seq)
    for i in range(len(arr)):
        m = min(range(i, len(arr)), key=arr.__getitem__)
        if m != i:
            arr[i], arr[m] = arr[m], arr[i]
            sign = -sign
    return sign


@dataclass(frozen=True)
class PatchCover:
    """Cover of a complex by face-closed patches, with its overlaps.

    ``embeddings[i]`` is the i-th patch as a ComplexEmbedding; the
    double, triple and quadruple overlap dictionaries are keyed by
    sorted index tuples and hold only the nonempty intersections.
    ``acyclicity_flags`` records every overlap whose reduced rational
    cohomology fails to vanish in the degrees the gerbe machinery
    solves over (0 through 2); flagged covers are still accepted, but
    the gauge solves may then report unsolvable systems.
    """

    K: SimplicialComplex
    embeddings: tuple
    simplex_sets: tuple
    doubles: dict
    triples: dict
    quads: dict
    acyclicity_flags: tuple

    @property
    def n_patches(self):
        return len(self.embeddings)

    def patch_of(self, simp):
        """Lowest patch index containing the simplex, or None."""
        for i, s in enumerate(self.simplex_sets):
            if simp in s:
                return i
        return None


def _embedding_simplices(emb: ComplexEmbedding):
    out = set()
    for k, table in emb.simplex_to_parent.items():
        for p in table:
            out.add(emb.parent.simplices[k][p])
    return frozenset(out)


def _reduced_flags(kind, key, sub: SimplicialComplex):
    flags = []
    for k in range(0, min(sub.dimension, 2) + 1):
        rank = cohomology_structure(sub, k).free_rank
        reduced = rank - 1 if k == 0 else rank
        if reduced:
            flags.append((kind, key, k, reduced))
    return flags


def patch_cover(K: SimplicialComplex, patch_simplices) -> PatchCover:
    """Build a cover from lists of simplices, one list per patch.

    Each patch is replaced by its face closure.  The patches must
    jointly contain every simplex of the complex, else the glued
    curvature of a gerbe would have holes.
    """
    if not patch_simplices:
        raise GerbeError("a cover needs at least one patch")
    embeddings = []
    sets = []
    for simps in patch_simplices:
        emb = induced_subcomplex(K, simps)
        embeddings.append(emb)
        sets.append(_embedding_simplices(emb))
    covered = frozenset().union(*sets)
    for k in range(K.dimension + 1):
        for t in K.simplices[k]:
            if t not in covered:
                raise GerbeError(f"cover misses simplex {t}")
    flags = []
    for i, emb in enumerate(embeddings):
        flags.extend(_reduced_flags("patch", (i,), emb.sub))
    doubles = {}
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            inter = sets[i] & sets[j]
            if inter:
                emb = induced_subcomplex(K, inter)
                doubles[(i, j)] = emb
                flags.extend(_reduced_flags("double", (i, j), emb.sub))
    triples = {}
    for (i, j) in sorted(doubles):
        for k in range(j + 1, len(sets)):
            if (i, k) not in doubles or (j, k) not in doubles:
                continue
            inter = sets[i] & sets[j] & sets[k]
            if inter:
                emb = induced_subcomplex(K, inter)
                triples[(i, j, k)] = emb
                flags.extend(_reduced_flags("triple", (i, j, k), emb.sub))
    quads = {}
    for (i, j, k) in sorted(triples):
        for l in range(k + 1, len(sets)):
            if (i, j, l) in triples and (i, k, l) in triples and (j, k, l) in triples:
                inter = sets[i] & sets[j] & sets[k] & sets[l]
                if inter:
                    quads[(i, j, k, l)] = induced_subcomplex(K, inter)
    return PatchCover(
        K=K,
        embeddings=tuple(embeddings),
        simplex_sets=tuple(sets),
        doubles=doubles,
        triples=triples,
        quads=quads,
        acyclicity_flags=tuple(flags),
    )


def star_cover(K: SimplicialComplex) -> PatchCover:
    """The default cover: one closed vertex star per vertex."""
    return patch_cover(K, [closed_star(K, v) for v in range(K.n_vertices)])


def same_cover(c1: PatchCover, c2: PatchCover) -> bool:
    return c1.K is c2.K and c1.simplex_sets == c2.simplex_sets


@dataclass(frozen=True)
class CechGerbe:
    """Three-layer gerbe data over a PatchCover.

    ``patch_part[i]`` is an ambient 2-cochain supported on patch i,
    ``pair_part[(i, j)]`` an ambient 1-cochain supported on the double
    overlap, ``triple_part[(i, j, k)]`` an ambient 0-cochain supported
    on the triple overlap; keys are sorted and unsorted index requests
    are resolved through the antisymmetry sign.
    """

    cover: PatchCover
    patch_part: tuple
    pair_part: dict
    triple_part: dict


def _parent_indices(emb: ComplexEmbedding, k):
    return emb.simplex_to_parent.get(k, [])


def _support_ok(emb: ComplexEmbedding, u: Cochain) -> bool:
    inside = set(_parent_indices(emb, u.degree))
    return all(not v for idx, v in enumerate(u.values) if idx not in inside)


def _masked(emb: ComplexEmbedding, u: Cochain) -> Cochain:
    inside = set(_parent_indices(emb, u.degree))
    vals = tuple(v if idx in inside else 0 for idx, v in enumerate(u.values))
    return Cochain(u.degree, vals)


def cech_gerbe(cover: PatchCover, patch_part=None, pair_part=None, triple_part=None):
    """Assemble and validate gerbe layer data over a cover.

    Missing layers default to zero.  Every supplied cochain has to be
    supported on its overlap and carry the right degree.
    """
    K = cover.K
    patches = list(patch_part) if patch_part is not None else []
    while len(patches) < cover.n_patches:
        patches.append(K.zero_cochain(2))
    if len(patches) != cover.n_patches:
        raise GerbeError("one patch cochain per patch, in order")
    for i, u in enumerate(patches):
        if u.degree != 2 or len(u.values) != K.n_simplices(2):
            raise GerbeError("patch layer entries are ambient 2-cochains")
        if not _support_ok(cover.embeddings[i], u):
            raise GerbeError(f"patch cochain {i} has support outside its patch")
    pairs = {}
    for key in sorted(pair_part or {}):
        u = (pair_part or {})[key]
        if tuple(key) != tuple(sorted(key)) or tuple(key) not in cover.doubles:
            raise GerbeError(f"{key} is not a sorted double overlap of the cover")
        if u.degree != 1 or len(u.values) != K.n_simplices(1):
            raise GerbeError("pair layer entries are ambient 1-cochains")
        if not _support_ok(cover.doubles[tuple(key)], u):
            raise GerbeError(f"pair cochain {key} has support outside its overlap")
        pairs[tuple(key)] = u
    triples = {}
    for key in sorted(triple_part or {}):
        u = (triple_part or {})[key]
        if tuple(key) != tuple(sorted(key)) or tuple(key) not in cover.triples:
            raise GerbeError(f"{key} is not a sorted triple overlap of the cover")
        if u.degree != 0 or len(u.values) != K.n_simplices(0):
            raise GerbeError("triple layer entries are ambient 0-cochains")
        if not _support_ok(cover.triples[tuple(key)], u):
            raise GerbeError(f"triple cochain {key} has support outside its overlap")
        triples[tuple(key)] = u
    return CechGerbe(cover, tuple(patches), pairs, triples)


def gerbe_from_global(cover: PatchCover, t: Cochain) -> CechGerbe:
    """Single-chart gerbe seen over a cover: restrict t to each patch.

    The pair and triple layers vanish because the restrictions agree on
    every overlap.
    """
    if t.degree != 2:
        raise GerbeError("gerbe phases live on triangles")
    parts = [_masked(emb, t) for emb in cover.embeddings]
    return cech_gerbe(cover, parts)


def _pair_at(g: CechGerbe, i, j) -> Cochain:
    if i == j:
        return g.cover.K.zero_cochain(1)
    key = tuple(sorted((i, j)))
    u = g.pair_part.get(key)
    if u is None:
        return g.cover.K.zero_cochain(1)
    return u if (i, j) == key else -u


def _triple_at(g: CechGerbe, i, j, k) -> Cochain:
    if len({i, j, k}) < 3:
        return g.cover.K.zero_cochain(0)
    key = tuple(sorted((i, j, k)))
    u = g.triple_part.get(key)
    if u is None:
        return g.cover.K.zero_cochain(0)
    sign = _perm_sign((i, j, k))
    return u if sign == 1 else -u


def gerbe_total_differential(g: CechGerbe):
    """Split the total differential into curvature and obstruction.

    Returns (phi, R): phi is the glued ambient 3-cochain of patchwise
    coboundaries, R maps each quadruple overlap to its integral
    0-cochain of alternating triple sums.  Raises GerbeError when the
    patchwise curvatures disagree on an overlap, when a middle layer of
    the total differential fails to vanish, or when R is not integral.
    """
    cover = g.cover
    K = cover.K
    for (i, j), emb in sorted(cover.doubles.items()):
        mism = g.patch_part[j] - g.patch_part[i] + K.delta(_pair_at(g, i, j))
        for idx in _parent_indices(emb, 2):
            if mism.values[idx]:
                raise GerbeError(
                    f"patch and pair layers inconsistent on overlap ({i}, {j})"
                )
    for (i, j, k), emb in sorted(cover.triples.items()):
        cech = _pair_at(g, j, k) - _pair_at(g, i, k) + _pair_at(g, i, j)
        mism = K.delta(_triple_at(g, i, j, k)) - cech
        for idx in _parent_indices(emb, 1):
            if mism.values[idx]:
                raise GerbeError(
                    f"pair and triple layers inconsistent on overlap ({i}, {j}, {k})"
                )
    n3 = K.n_simplices(3)
    phi_vals = [None] * n3
    for i, emb in enumerate(cover.embeddings):
        local_phi = K.delta(g.patch_part[i])
        for idx in _parent_indices(emb, 3):
            v = local_phi.values[idx]
            if phi_vals[idx] is None:
                phi_vals[idx] = v
            elif phi_vals[idx] != v:
                raise GerbeError("curvature mismatch between patches")
    phi = Cochain(3, tuple(v if v is not None else 0 for v in phi_vals))
    R = {}
    for (i, j, k, l), emb in sorted(cover.quads.items()):
        r = (
            _triple_at(g, j, k, l)
            - _triple_at(g, i, k, l)
            + _triple_at(g, i, j, l)
            - _triple_at(g, i, j, k)
        )
        vals = [0] * K.n_simplices(0)
        for idx in _parent_indices(emb, 0):
            v = r.values[idx]
            if v != int(v):
                raise GerbeError(
                    f"non-integral obstruction on overlap ({i}, {j}, {k}, {l})"
                )
            vals[idx] = int(v)
        R[(i, j, k, l)] = Cochain(0, tuple(vals))
    return phi, R


def _locally_constant_on(K, emb, u: Cochain) -> bool:
    du = K.delta(u)
    return all(not du.values[idx] for idx in _parent_indices(emb, 1))


def cech_gauge(g: CechGerbe, patch_gauge=None, pair_gauge=None, shift=None):
    """Apply a gauge move to gerbe layers.

    patch_gauge maps patch index -> ambient 1-cochain on the patch,
    pair_gauge maps sorted double key -> ambient 0-cochain on the
    overlap, shift maps sorted triple key -> integral locally constant
    0-cochain on the overlap.  The glued curvature is unchanged; the
    quadruple obstruction moves only by alternating sums of the shift,
    so it stays integral, and surface holonomy does not move at all.
    """
    cover = g.cover
    K = cover.K
    b1 = {}
    for i, u in (patch_gauge or {}).items():
        if u.degree != 1:
            raise GerbeError("patch gauges are 1-cochains")
        if not _support_ok(cover.embeddings[i], u):
            raise GerbeError(f"patch gauge {i} has support outside its patch")
        b1[i] = u
    b0 = {}
    for key, u in (pair_gauge or {}).items():
        key = tuple(key)
        if key != tuple(sorted(key)) or key not in cover.doubles:
            raise GerbeError(f"{key} is not a sorted double overlap of the cover")
        if u.degree != 0 or not _support_ok(cover.doubles[key], u):
            raise GerbeError(f"pair gauge {key} does not live on its overlap")
        b0[key] = u
    s0 = {}
    for key, u in (shift or {}).items():
        key = tuple(key)
        if key != tuple(sorted(key)) or key not in cover.triples:
            raise GerbeError(f"{key} is not a sorted triple overlap of the cover")
        if u.degree != 0 or not _support_ok(cover.triples[key], u):
            raise GerbeError(f"shift {key} does not live on its overlap")
        if not u.is_integral():
            raise GerbeError("shifts must be integral")
        if not _locally_constant_on(K, cover.triples[key], u):
            raise GerbeError("shifts must be locally constant on their overlap")
        s0[key] = u

    def b1_at(i):
        return b1.get(i, K.zero_cochain(1))

    def b0_at(i, j):
        if i == j:
            return K.zero_cochain(0)
        key = tuple(sorted((i, j)))
        u = b0.get(key)
        if u is None:
            return K.zero_cochain(0)
        return u if (i, j) == key else -u

    new_patch = [
        g.patch_part[i] + _masked(emb, K.delta(b1_at(i)))
        for i, emb in enumerate(cover.embeddings)
    ]
    new_pair = {}
    for key, emb in cover.doubles.items():
        i, j = key
        move = K.delta(b0_at(i, j)) - (b1_at(j) - b1_at(i))
        u = _pair_at(g, i, j) + _masked(emb, move)
        if not u.is_zero():
            new_pair[key] = u
    new_triple = {}
    for key, emb in cover.triples.items():
        i, j, k = key
        move = b0_at(j, k) - b0_at(i, k) + b0_at(i, j)
        u = _triple_at(g, i, j, k) + _masked(emb, move)
        if key in s0:
            u = u + s0[key]
        if not u.is_zero():
            new_triple[key] = u
    return cech_gerbe(cover, new_patch, new_pair, new_triple)


def _assignment(cover: PatchCover, k, given):
    """Per-simplex patch indices for degree k, validated subordinate."""
    K = cover.K
    n = K.n_simplices(k)
    if given is None:
        out = []
        for simp in K.simplices.get(k, []):
            i = cover.patch_of(simp)
            if i is None:
                raise GerbeError(f"no patch contains {simp}")
            out.append(i)
        return out
    out = [given[idx] for idx in range(n)]
    for idx, i in enumerate(out):
        simp = K.simplices[k][idx]
        if not 0 <= i < cover.n_patches or simp not in cover.simplex_sets[i]:
            raise GerbeError(f"assignment of {simp} to patch {i} is not subordinate")
    return out


def gerbe_holonomy(
    g: CechGerbe,
    z: Chain,
    face_patches=None,
    edge_patches=None,
    vertex_patches=None,
) -> Fraction:
    """Phase mod 1 of a three-layer gerbe over a closed surface cycle.

    The cycle is cut into per-patch pieces by the face assignment; the
    patch layer pairs with the pieces, the pair layer with the boundary
    seams between differently assigned pieces, and the triple layer
    with the corner points of those seams.  The result is independent
    of the assignments and of gauge moves, and additive in the cycle.
    """
    cover = g.cover
    K = cover.K
    if z.degree != 2:
        raise GerbeError("surface holonomy needs a 2-chain")
    if not z.is_integral():
        raise GerbeError("surface holonomy needs an integral cycle")
    if not K.boundary(z).is_zero():
        raise GerbeError("surface holonomy needs a closed cycle")
    rho2 = _assignment(cover, 2, face_patches)
    rho1 = _assignment(cover, 1, edge_patches)
    rho0 = _assignment(cover, 0, vertex_patches)
    pieces = {}
    for idx, c in enumerate(z.values):
        if c:
            pieces.setdefault(rho2[idx], [0] * K.n_simplices(2))[idx] = c
    total = Fraction(0)
    seams = {}
    for i, vals in sorted(pieces.items()):
        z_i = Chain(2, tuple(vals))
        total += Fraction(K.evaluate(g.patch_part[i], z_i))
        w_i = K.boundary(z_i)
        for idx, c in enumerate(w_i.values):
            if c:
                j = rho1[idx]
                seams.setdefault((j, i), [0] * K.n_simplices(1))[idx] = c
    for (j, i), vals in sorted(seams.items()):
        w_ji = Chain(1, tuple(vals))
        if j != i:
            total += Fraction(K.evaluate(_pair_at(g, j, i), w_ji))
        corners = K.boundary(w_ji)
        for idx, c in enumerate(corners.values):
            if c:
                a0 = _triple_at(g, rho0[idx], j, i)
                total -= c * Fraction(a0.values[idx])
    return mod1(total)


def _solve_on_overlap(emb: ComplexEmbedding, target: Cochain, what):
    """Exact primitive of a cochain on an overlap, scattered ambiently."""
    K = emb.parent
    k = target.degree
    local = emb.restrict_cochain(target)
    rows = emb.sub.delta_rows(k - 1)
    x = rat_solve(rows, emb.sub.n_simplices(k - 1), list(local.values))
    if x is None:
        raise GerbeError(
            f"no primitive for the {what} layer on an overlap; "
            "the cover fails acyclicity there (see acyclicity_flags)"
        )
    vals = [0] * K.n_simplices(k - 1)
    for loc, parent in enumerate(_parent_indices(emb, k - 1)):
        vals[parent] = x[loc]
    return Cochain(k - 1, tuple(vals))


def gerbe_flat_normal_form(g: CechGerbe):
    """Gauge a flat three-layer gerbe into pure triple-layer constants.

    Returns {triple key: ambient 0-cochain}, locally constant on each
    overlap, whose alternating sums over quadruple overlaps are the
    integers of the obstruction layer.  The patch and pair layers are
    removed by exact primitives patch by patch, which needs the flagged
    acyclicity; a nonzero glued curvature is refused.
    """
    phi, _ = gerbe_total_differential(g)
    if not phi.is_zero():
        raise GerbeError("flat normal form needs vanishing curvature")
    cover = g.cover
    K = cover.K
    patch_gauge = {}
    for i, emb in enumerate(cover.embeddings):
        if g.patch_part[i].is_zero():
            continue
        patch_gauge[i] = -_solve_on_overlap(emb, g.patch_part[i], "patch")
    g1 = cech_gauge(g, patch_gauge=patch_gauge)
    pair_gauge = {}
    for key, emb in sorted(cover.doubles.items()):
        u = g1.pair_part.get(key)
        if u is None:
            continue
        pair_gauge[key] = -_solve_on_overlap(emb, u, "pair")
    g2 = cech_gauge(g1, pair_gauge=pair_gauge)
    for i in range(cover.n_patches):
        if not g2.patch_part[i].is_zero():
            raise AssertionError("patch layer must vanish after gauging")
    if g2.pair_part:
        raise AssertionError("pair layer must vanish after gauging")
    out = {}
    for key, emb in sorted(cover.triples.items()):
        u = g2.triple_part.get(key, K.zero_cochain(0))
        if not _locally_constant_on(K, emb, u):
            raise AssertionError("triple layer must be locally constant")
        out[key] = u
    return out


def _component_reps(emb: ComplexEmbedding):
    """Parent vertex representative per connected component, sorted."""
    comps = emb.sub.vertex_components()
    reps = {}
    for local, label in enumerate(comps):
        parent = emb.vertex_to_parent[local]
        if label not in reps or parent < reps[label]:
            reps[label] = parent
    labels = {}
    for local, label in enumerate(comps):
        labels[emb.vertex_to_parent[local]] = reps[label]
    return sorted(set(reps.values())), labels


def constant_triple_class_trivial(cover: PatchCover, T) -> bool:
    """Can locally constant triple data be gauged into the integers?

    Decides whether T differs from an alternating sum of locally
    constant rational pair data by integers, one linear diophantine
    question answered through a Smith form: the change of basis must
    turn the target integral beyond the rank.
    """
    rows = []
    rhs = []
    var_index = {}
    double_labels = {}
    for key, emb in sorted(cover.doubles.items()):
        reps, labels = _component_reps(emb)
        double_labels[key] = labels
        for rep in reps:
            var_index[(key, rep)] = len(var_index)
    for key, emb in sorted(cover.triples.items()):
        i, j, k = key
        u = T.get(key, cover.K.zero_cochain(0))
        if not _locally_constant_on(cover.K, emb, u):
            raise GerbeError("triple data must be locally constant")
        reps, _ = _component_reps(emb)
        for rep in reps:
            row = {}
            for pair, sgn in (((j, k), 1), ((i, k), -1), ((i, j), 1)):
                col = var_index[(pair, double_labels[pair][rep])]
                row[col] = row.get(col, 0) + sgn
            rows.append(row)
            rhs.append(Fraction(u.values[rep]))
    if not rows:
        return True
    dec = smith_normal_form(rows, ncols=max(len(var_index), 1))
    y = dec.U_times(rhs)
    return all(
        Fraction(y[i]).denominator == 1 for i in range(dec.rank, len(y))
    )


def gerbe_gauge_equivalent(g1: CechGerbe, g2: CechGerbe) -> bool:
    """Do two three-layer gerbes differ by a gauge move and integers?

    The glued curvatures must match exactly; the difference is then
    flat, its normal form is computed, and the remaining constants must
    be expressible as an alternating pair sum plus integers.
    """
    if not same_cover(g1.cover, g2.cover):
        raise GerbeError("gauge comparison needs a common cover")
    phi1, _ = gerbe_total_differential(g1)
    phi2, _ = gerbe_total_differential(g2)
    if phi1 != phi2:
        return False
    cover = g1.cover
    diff = cech_gerbe(
        cover,
        [g1.patch_part[i] - g2.patch_part[i] for i in range(cover.n_patches)],
        {
            key: _pair_at(g1, *key) - _pair_at(g2, *key)
            for key in cover.doubles
            if key in g1.pair_part or key in g2.pair_part
        },
        {
            key: _triple_at(g1, *key) - _triple_at(g2, *key)
            for key in cover.triples
            if key in g1.triple_part or key in g2.triple_part
        },
    )
    T = gerbe_flat_normal_form(diff)
    return constant_triple_class_trivial(cover, T)
