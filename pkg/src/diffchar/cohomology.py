"""Integer (co)homology with explicit generators and witnesses.

Groups are computed as lattice quotients ker(A)/im(B) inside Z^n using
two Smith decompositions: one of A to get coordinates on the kernel,
one of the relation matrix to split the quotient into free and cyclic
parts.  Every torsion generator comes with a witness x satisfying
B x = d * generator, which is what the torsion linking form and the
flat-spark constructions consume downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .complexes import Chain, Cochain, SimplicialComplex
from .exact import (
    invariant_factors,
    mat_vec,
    smith_normal_form,
    transpose_rows,
)


@dataclass(frozen=True)
class AbelianGroupStructure:
    """Isomorphism type of a finitely generated abelian group.

    ``torsion`` is the invariant-factor chain d_1 | d_2 | ..., each > 1.
    """

    free_rank: int
    torsion: tuple = ()

    def is_trivial(self):
        return self.free_rank == 0 and not self.torsion

    def torsion_order(self):
        out = 1
        for d in self.torsion:
            out *= d
        return out

    def format(self):
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        parts.extend(f"Z_{d}" for d in self.torsion)
        return " + ".join(parts) if parts else "0"

    def to_json_dict(self):
        return {"free_rank": self.free_rank, "torsion": list(self.torsion)}


TRIVIAL_GROUP = AbelianGroupStructure(0, ())


@dataclass(frozen=True)
class CircleGroupStructure:
    """A product (S^1)^r x finite group, as for circle-coefficient groups."""

    circle_rank: int
    torsion: tuple = ()

    def format(self):
        parts = []
        if self.circle_rank == 1:
            parts.append("S1")
        elif self.circle_rank > 1:
            parts.append(f"(S1)^{self.circle_rank}")
        parts.extend(f"Z_{d}" for d in self.torsion)
        return " x ".join(parts) if parts else "0"

    def to_json_dict(self):
        return {"circle_rank": self.circle_rank, "torsion": list(self.torsion)}


class LatticeQuotient:
    """The group ker(A) / im(B) of integer vectors in Z^ncols.

    A and B are sparse integer matrices (lists of row dicts); the rows
    of B are indexed by the same Z^ncols coordinates, with B_cols
    columns.  Columns of B must lie in ker A.
    """

    def __init__(self, A_rows, ncols, B_rows, B_cols):
        self.ncols = ncols
        self.B_cols = B_cols
        self._A_rows = [dict(r) for r in A_rows]
        self._B_rows = [dict(r) for r in B_rows]
        self.snfA = smith_normal_form(
            [dict(r) for r in A_rows], nrows=len(A_rows), ncols=ncols
        )
        r = self.snfA.rank
        self.kernel_dim = ncols - r
        # relation matrix: im(B) written in kernel coordinates
        W = []
        for t in range(self.kernel_dim):
            acc = {}
            for j, c in self.snfA.Vinv_rows[r + t].items():
                for col, v in self._B_rows[j].items():
                    w = acc.get(col, 0) + c * v
                    if w:
                        acc[col] = w
                    else:
                        acc.pop(col, None)
            W.append(acc)
        self.snfW = smith_normal_form(W, nrows=self.kernel_dim, ncols=B_cols)
        # guard misuse: every column of B must lie in ker A
        for arow in self._A_rows:
            acc = {}
            for j, c in arow.items():
                for col, v in self._B_rows[j].items():
                    w = acc.get(col, 0) + c * v
                    if w:
                        acc[col] = w
                    else:
                        acc.pop(col, None)
            if acc:
                raise ValueError("columns of B do not lie in ker A")
        self._torsion_idx = [
            i for i, d in enumerate(self.snfW.diag) if d > 1
        ]

    # -- structure -------------------------------------------------------
    def structure(self) -> AbelianGroupStructure:
        free = self.kernel_dim - self.snfW.rank
        torsion = tuple(d for d in self.snfW.diag if d > 1)
        return AbelianGroupStructure(free, torsion)

    # -- generators ------------------------------------------------------
    def _from_kernel_coords(self, y):
        padded = [0] * self.snfA.rank + list(y)
        return self.snfA.V_times(padded)

    def _uinv_column(self, i):
        y = [0] * self.kernel_dim
        for j, v in self.snfW.UinvT_rows[i].items():
            y[j] = v
        return y

    def free_generator_vectors(self):
        out = []
        for i in range(self.snfW.rank, self.kernel_dim):
            out.append(self._from_kernel_coords(self._uinv_column(i)))
        return out

    def torsion_generator_vectors(self):
        """List of (order, generator, witness): B @ witness = order * gen."""
        out = []
        for i in self._torsion_idx:
            d = self.snfW.diag[i]
            gen = self._from_kernel_coords(self._uinv_column(i))
            witness = [0] * self.B_cols
            for j, v in self.snfW.VT_rows[i].items():
                witness[j] = v
            out.append((d, gen, witness))
        return out

    def generator_vectors(self):
        """Free generators then torsion generators, coordinate order."""
        return self.free_generator_vectors() + [
            g for _, g, _ in self.torsion_generator_vectors()
        ]

    # -- coordinates -----------------------------------------------------
    def _kernel_coords(self, v, rational=False):
        full = self.snfA.Vinv_times(list(v))
        r = self.snfA.rank
        for j in range(r):
            if full[j]:
                raise ValueError("vector is not in the kernel of A")
        if not rational:
            return full[r:]
        return [Fraction(x) for x in full[r:]]

    def coords(self, v):
        """(free coords, torsion coords mod d) of an integral kernel vector."""
        y = self._kernel_coords(v)
        full = mat_vec(self.snfW.U_rows, y)
        free = tuple(full[self.snfW.rank:])
        torsion = tuple(
            full[i] % self.snfW.diag[i] for i in self._torsion_idx
        )
        return free, torsion

    def coords_rat(self, v):
        """Free-part coordinates of a rational kernel vector."""
        y = self._kernel_coords(v, rational=True)
        full = mat_vec(self.snfW.U_rows, y)
        return tuple(Fraction(x) for x in full[self.snfW.rank:])

    def is_zero_class(self, v):
        free, torsion = self.coords(v)
        return not any(free) and not any(torsion)

    def preimage_int(self, v):
        """Integer x with B x = v, or None."""
        y = self._kernel_coords(v)
        full = mat_vec(self.snfW.U_rows, y)
        s = [0] * self.B_cols
        for i in range(self.kernel_dim):
            if i < self.snfW.rank:
                d = self.snfW.diag[i]
                if full[i] % d:
                    return None
                s[i] = full[i] // d
            elif full[i]:
                return None
        out = [0] * self.B_cols
        for i in range(min(self.B_cols, self.kernel_dim)):
            if i < self.snfW.rank and s[i]:
                for j, v2 in self.snfW.VT_rows[i].items():
                    out[j] += s[i] * v2
        return out

    def preimage_rat(self, v):
        """Rational x with B x = v, or None (v rational allowed)."""
        y = self._kernel_coords(v, rational=True)
        full = mat_vec(self.snfW.U_rows, y)
        out = [Fraction(0)] * self.B_cols
        for i in range(self.kernel_dim):
            if i < self.snfW.rank:
                c = Fraction(full[i], self.snfW.diag[i])
                if c:
                    for j, v2 in self.snfW.VT_rows[i].items():
                        out[j] += c * v2
            elif full[i]:
                return None
        return out


# ---------------------------------------------------------------------------
# complex-facing wrappers


def integer_cohomology(K: SimplicialComplex, k) -> LatticeQuotient:
    """H^k(K; Z) = ker(delta_k) / im(delta_{k-1}), cached on K."""
    key = ("H_int", k)
    if key not in K._cache:
        n_k = K.n_simplices(k)
        A = K.delta_rows(k) if 0 <= k <= K.dimension else []
        if 0 < k <= K.dimension:
            B = K.delta_rows(k - 1)
            B_cols = K.n_simplices(k - 1)
        else:
            B = [dict() for _ in range(n_k)]
            B_cols = 0
        K._cache[key] = LatticeQuotient(A, n_k, B, B_cols)
    return K._cache[key]


def integer_homology(K: SimplicialComplex, k) -> LatticeQuotient:
    """H_k(K; Z) = ker(boundary_k) / im(boundary_{k+1}), cached on K."""
    key = ("H_int_chain", k)
    if key not in K._cache:
        n_k = K.n_simplices(k)
        A = K.boundary_rows(k) if 0 <= k <= K.dimension else []
        B = K.boundary_rows(k + 1) if 0 <= k < K.dimension else [
            dict() for _ in range(n_k)
        ]
        B_cols = K.n_simplices(k + 1)
        K._cache[key] = LatticeQuotient(A, n_k, B, B_cols)
    return K._cache[key]


def cohomology_structure(K, k) -> AbelianGroupStructure:
    if k < 0 or k > K.dimension:
        return TRIVIAL_GROUP
    return integer_cohomology(K, k).structure()


def homology_structure(K, k) -> AbelianGroupStructure:
    if k < 0 or k > K.dimension:
        return TRIVIAL_GROUP
    return integer_homology(K, k).structure()


def betti_numbers(K):
    return tuple(
        cohomology_structure(K, k).free_rank for k in range(K.dimension + 1)
    )


def circle_cohomology_structure(K, k) -> CircleGroupStructure:
    """H^k(K; S^1) = (S^1)^{b_k} x tor H^{k+1}(K; Z)."""
    b_k = cohomology_structure(K, k).free_rank
    tor = cohomology_structure(K, k + 1).torsion
    return CircleGroupStructure(b_k, tor)


def cycle_lattice_basis(K, k):
    """Primitive basis of integral k-cycles (kernel of boundary_k)."""
    return integer_homology(K, k).snfA.kernel_basis()


def cohomology_generators(K, k):
    """Integral cocycle generators of H^k: free ones, then torsion.

    Returns (free: [Cochain], torsion: [(order, Cochain, witness Cochain)])
    with delta(witness) = order * generator.
    """
    Q = integer_cohomology(K, k)
    free = [K.cochain(k, vec) for vec in Q.free_generator_vectors()]
    torsion = [
        (d, K.cochain(k, g), K.cochain(k - 1, w) if k >= 1 else K.cochain(0, w))
        for d, g, w in Q.torsion_generator_vectors()
    ]
    return free, torsion


# ---------------------------------------------------------------------------
# Kunneth arithmetic


def _tensor(a: AbelianGroupStructure, b: AbelianGroupStructure):
    """(free rank, cyclic orders) of the tensor product."""
    free = a.free_rank * b.free_rank
    cyclic = []
    cyclic.extend(d for d in b.torsion for _ in range(a.free_rank))
    cyclic.extend(d for d in a.torsion for _ in range(b.free_rank))
    for d1 in a.torsion:
        for d2 in b.torsion:
            g = _gcd(d1, d2)
            if g > 1:
                cyclic.append(g)
    return free, cyclic


def _tor_product(a: AbelianGroupStructure, b: AbelianGroupStructure):
    cyclic = []
    for d1 in a.torsion:
        for d2 in b.torsion:
            g = _gcd(d1, d2)
            if g > 1:
                cyclic.append(g)
    return cyclic


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def kunneth_structure(factors_a, factors_b, k) -> AbelianGroupStructure:
    """H^k of a product space from the cohomology of its factors.

    ``factors_a`` and ``factors_b`` map degree to
    :class:`AbelianGroupStructure` (dict or list indexed by degree;
    missing degrees are trivial).  Uses the split short exact sequence
    for products of finite complexes: a tensor part in degree k and a
    torsion-product part in degree k+1.
    """

    def get(factors, i):
        if isinstance(factors, dict):
            return factors.get(i, TRIVIAL_GROUP)
        if 0 <= i < len(factors):
            return factors[i]
        return TRIVIAL_GROUP

    free = 0
    cyclic = []
    for i in range(0, k + 1):
        f, c = _tensor(get(factors_a, i), get(factors_b, k - i))
        free += f
        cyclic.extend(c)
    for i in range(0, k + 2):
        cyclic.extend(_tor_product(get(factors_a, i), get(factors_b, k + 1 - i)))
    return AbelianGroupStructure(free, tuple(invariant_factors(cyclic)))


def cohomology_structures(K):
    """All degrees of K as a dict degree -> structure."""
    return {k: cohomology_structure(K, k) for k in range(K.dimension + 1)}


# ---------------------------------------------------------------------------
# Poincare duality


def poincare_dual(K: SimplicialComplex, z: Chain):
    """Integral cocycle u with [X] cap u homologous to z, or None.

    K must carry a fundamental cycle.  ``z`` is an integral cycle of
    degree n-k; the result has degree k.  Solves an integer linear
    system in homology coordinates, torsion slots handled modulo their
    orders.
    """
    fc = K.fundamental_cycle()
    if fc is None:
        raise ValueError("space has no fundamental cycle")
    n = K.dimension
    k = n - z.degree
    if not (0 <= k <= n):
        raise ValueError("degree out of range")
    H_target = integer_homology(K, z.degree)
    fz, tz = H_target.coords(list(z.values))

    free_gens, tor_gens = cohomology_generators(K, k)
    gens = free_gens + [g for _, g, _ in tor_gens]
    cap_coords = []
    for g in gens:
        capped = K.cap(fc, g)
        cap_coords.append(H_target.coords(list(capped.values)))

    n_gens = len(gens)
    tor_orders = [
        H_target.snfW.diag[i] for i in H_target._torsion_idx
    ]
    n_free, n_tor = len(fz), len(tz)
    rows = []
    rhs = []
    for i in range(n_free):
        rows.append(
            [cap_coords[j][0][i] for j in range(n_gens)] + [0] * n_tor
        )
        rhs.append(fz[i])
    for i in range(n_tor):
        slack = [0] * n_tor
        slack[i] = tor_orders[i]
        rows.append(
            [cap_coords[j][1][i] for j in range(n_gens)] + slack
        )
        rhs.append(tz[i])
    if not rows:
        return K.zero_cochain(k)
    sol = smith_normal_form(rows).solve_int(rhs)
    if sol is None:
        return None
    u = K.zero_cochain(k)
    for j, g in enumerate(gens):
        if sol[j]:
            u = u + g.scale(sol[j])
    return u
