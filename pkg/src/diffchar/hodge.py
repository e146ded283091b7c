"""Weighted combinatorial Hodge theory and canonical spark potentials.

Inner products on cochains are diagonal: one positive weight per
simplex.  On top of the resulting coboundary adjoint sit the Laplacian,
harmonic projection and Green operator, solved either exactly over the
rationals or by conjugate gradients in floating point.  These give
canonical spark representatives (coexact potential, harmonic curvature)
and Abel-Jacobi values of bounding cycles.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .cohomology import cohomology_generators, integer_homology
from .complexes import Chain, Cochain, SimplicialComplex
from .exact import RatElim, rat_nullspace
from .sparks import Spark, SparkError, mod1

EXACT_SIZE_LIMIT = 2000


class HodgeError(Exception):
    pass


def uniform_weights(K: SimplicialComplex):
    return {
        k: (Fraction(1),) * K.n_simplices(k) for k in range(K.dimension + 1)
    }


def varied_weights(K: SimplicialComplex, rng, choices=None):
    """Deterministic-for-a-seed positive rational weight profile."""
    if choices is None:
        choices = (Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(5, 2))
    return {
        k: tuple(rng.choice(choices) for _ in range(K.n_simplices(k)))
        for k in range(K.dimension + 1)
    }


class HodgeContext:
    """Hodge-theoretic operators for one complex and weight profile.

    method is "exact" (rational arithmetic), "cg" (float conjugate
    gradients) or "auto", which picks exact below EXACT_SIZE_LIMIT total
    simplices.  Spark-producing operations require the exact method.
    """

    def __init__(self, K: SimplicialComplex, weights=None, method="auto",
                 tol=1e-10, max_iter=None):
        self.K = K
        given = weights or {}
        self.weights = {}
        for k in range(K.dimension + 1):
            w = tuple(given.get(k, (Fraction(1),) * K.n_simplices(k)))
            if len(w) != K.n_simplices(k):
                raise HodgeError(f"need {K.n_simplices(k)} weights in degree {k}")
            if any(x <= 0 for x in w):
                raise HodgeError("weights must be positive")
            self.weights[k] = w
        if method == "auto":
            method = "exact" if K.total_simplices() <= EXACT_SIZE_LIMIT else "cg"
        if method not in ("exact", "cg"):
            raise ValueError(f"unknown method {method!r}")
        self.method = method
        self.tol = tol
        self.max_iter = max_iter
        self._cache = {}

    @property
    def exact(self):
        return self.method == "exact"

    def weight(self, k):
        return self.weights.get(k, ())

    def _one(self, x):
        return Fraction(x) if self.exact else float(x)

    # -- basic operators -------------------------------------------------
    def adjoint_delta(self, u: Cochain) -> Cochain:
        """Adjoint of the coboundary; maps degree k+1 down to k."""
        K = self.K
        k = u.degree - 1
        n_k = K.n_simplices(k)
        rows = K.delta_rows(k)
        w_hi = self.weight(u.degree)
        w_lo = self.weight(k)
        acc = [0] * n_k
        for j, row in enumerate(rows):
            c = u.values[j]
            if c:
                c = c * w_hi[j]
                for i, v in row.items():
                    acc[i] += v * c
        out = tuple(self._one(acc[i]) / w_lo[i] for i in range(n_k))
        return Cochain(k, out)

    def laplacian(self, u: Cochain) -> Cochain:
        K = self.K
        up = self.adjoint_delta(K.delta(u))
        down = K.delta(self.adjoint_delta(u))
        return up + down

    def inner(self, u: Cochain, v: Cochain):
        if u.degree != v.degree:
            raise ValueError("inner product needs matching degrees")
        w = self.weight(u.degree)
        return sum(wi * a * b for wi, a, b in zip(w, u.values, v.values))

    # -- exact machinery -------------------------------------------------
    def _laplacian_rows(self, k):
        """Sparse rational rows of the degree-k Laplacian (exact mode)."""
        key = ("laplacian", k)
        if key in self._cache:
            return self._cache[key]
        K = self.K
        n_k = K.n_simplices(k)
        rows = [dict() for _ in range(n_k)]
        w_k = self.weight(k)
        # up part: (1/w_i) sum_j d_{ji} w_j d_{ji'}
        w_up = self.weight(k + 1)
        for j, row in enumerate(K.delta_rows(k)):
            items = list(row.items())
            for i, vi in items:
                ri = rows[i]
                for i2, vi2 in items:
                    ri[i2] = ri.get(i2, 0) + Fraction(vi * vi2 * w_up[j], w_k[i])
        # down part: sum_j d_{ij} (1/w_j) d_{i'j} w_{i'}
        if k >= 1:
            w_dn = self.weight(k - 1)
            cols = [dict() for _ in range(K.n_simplices(k - 1))]
            for i, row in enumerate(K.delta_rows(k - 1)):
                for j, v in row.items():
                    cols[j][i] = v
            for j, col in enumerate(cols):
                items = list(col.items())
                for i, vi in items:
                    ri = rows[i]
                    for i2, vi2 in items:
                        ri[i2] = ri.get(i2, 0) + Fraction(vi * vi2 * w_k[i2], w_dn[j])
        for r in rows:
            for i2 in [i2 for i2, v in r.items() if v == 0]:
                del r[i2]
        self._cache[key] = rows
        return rows

    def _harmonic_vectors(self, k):
        key = ("harmonics", k)
        if key not in self._cache:
            rows = self._laplacian_rows(k)
            basis = rat_nullspace([dict(r) for r in rows], self.K.n_simplices(k))
            self._cache[key] = [tuple(b) for b in basis]
        return self._cache[key]

    def harmonic_basis(self, k):
        if not self.exact:
            raise HodgeError("harmonic basis needs the exact method")
        return [Cochain(k, b) for b in self._harmonic_vectors(k)]

    def _project_harmonic_exact(self, u: Cochain) -> Cochain:
        basis = self._harmonic_vectors(u.degree)
        if not basis:
            return self.K.zero_cochain(u.degree)
        w = self.weight(u.degree)
        m = len(basis)
        gram = [
            {
                s: sum(wi * a * b for wi, a, b in zip(w, basis[r], basis[s]))
                for s in range(m)
            }
            for r in range(m)
        ]
        rhs = [
            sum(wi * a * b for wi, a, b in zip(w, basis[r], u.values))
            for r in range(m)
        ]
        coeffs = RatElim(gram, m, rhs=[rhs]).solution()
        if coeffs is None:
            raise AssertionError("Gram system must be solvable")
        out = [Fraction(0)] * self.K.n_simplices(u.degree)
        for c, b in zip(coeffs, basis):
            if c:
                for i, x in enumerate(b):
                    out[i] += c * x
        return Cochain(u.degree, tuple(out))

    def harmonic_projection(self, u: Cochain) -> Cochain:
        if self.exact:
            return self._project_harmonic_exact(u)
        return self.decompose(u).harmonic

    def green(self, u: Cochain) -> Cochain:
        """Green operator: Laplacian(G u) = u - H(u) and H(G u) = 0."""
        v = u - self.harmonic_projection(u)
        if self.exact:
            rows = self._laplacian_rows(u.degree)
            g0 = RatElim(
                [dict(r) for r in rows],
                self.K.n_simplices(u.degree),
                rhs=[list(v.values)],
            ).solution()
            if g0 is None:
                raise AssertionError("Green system must be solvable")
            g0 = Cochain(u.degree, tuple(g0))
            return g0 - self._project_harmonic_exact(g0)
        return self._cg(self.laplacian, u.degree, v)

    # -- conjugate gradients ---------------------------------------------
    def _cg(self, op, degree, rhs: Cochain) -> Cochain:
        w = [float(x) for x in self.weight(degree)]
        b = [float(x) for x in rhs.values]
        n = len(b)
        if n == 0:
            return Cochain(degree, ())

        def dot(x, y):
            return sum(wi * a * c for wi, a, c in zip(w, x, y))

        x = [0.0] * n
        r = list(b)
        p = list(r)
        rr = dot(r, r)
        target = (self.tol * max(1.0, rr ** 0.5)) ** 2
        limit = self.max_iter or (5 * n + 100)
        steps = 0
        while rr > target:
            if steps >= limit:
                raise HodgeError("conjugate gradients did not converge")
            ap = [float(v) for v in op(Cochain(degree, tuple(p))).values]
            denom = dot(p, ap)
            if denom <= 0:
                raise HodgeError("operator lost positivity in conjugate gradients")
            alpha = rr / denom
            x = [xi + alpha * pi for xi, pi in zip(x, p)]
            r = [ri - alpha * ai for ri, ai in zip(r, ap)]
            rr_new = dot(r, r)
            beta = rr_new / rr
            p = [ri + beta * pi for ri, pi in zip(r, p)]
            rr = rr_new
            steps += 1
        return Cochain(degree, tuple(x))

    # -- decomposition ---------------------------------------------------
    def decompose(self, u: Cochain) -> "HodgeDecomposition":
        """Split u into harmonic + coboundary + adjoint-coboundary parts."""
        K = self.K
        if self.exact:
            g = self.green(u)
            h = u - self.adjoint_delta(K.delta(g)) - K.delta(self.adjoint_delta(g))
            return HodgeDecomposition(
                harmonic=h,
                primitive=self.adjoint_delta(g),
                coprimitive=K.delta(g),
            )
        k = u.degree
        b = self._cg(
            lambda x: self.adjoint_delta(K.delta(x)),
            k - 1,
            self.adjoint_delta(u),
        )
        c = self._cg(
            lambda y: K.delta(self.adjoint_delta(y)),
            k + 1,
            K.delta(u),
        )
        h = u - K.delta(b) - self.adjoint_delta(c)
        return HodgeDecomposition(harmonic=h, primitive=b, coprimitive=c)

    def decomposition_residuals(self, u: Cochain, dec: "HodgeDecomposition"):
        """Reconstruction and (co)closedness defects of a decomposition."""
        K = self.K
        recon = u - dec.harmonic - K.delta(dec.primitive) - self.adjoint_delta(dec.coprimitive)
        return {
            "reconstruction": max((abs(x) for x in recon.values), default=0),
            "closed": max((abs(x) for x in K.delta(dec.harmonic).values), default=0),
            "coclosed": max(
                (abs(x) for x in self.adjoint_delta(dec.harmonic).values), default=0
            ),
        }

    # -- spark potentials ------------------------------------------------
    def _require_exact(self, what):
        if not self.exact:
            raise HodgeError(f"{what} needs the exact method")

    def sigma(self, R: Cochain) -> Cochain:
        """Canonical potential: minus the adjoint coboundary of Green."""
        self._require_exact("spark potential")
        return -self.adjoint_delta(self.green(R))

    def hodge_spark(self, R: Cochain) -> Spark:
        """The spark with charge R and harmonic curvature."""
        self._require_exact("spark construction")
        if not R.is_integral():
            raise SparkError("charge must be integral")
        if not self.K.delta(R).is_zero():
            raise SparkError("charge must be a cocycle")
        return Spark(self.sigma(R), R)

    def spark_normal_form(self, s: Spark) -> Spark:
        """Equivalent spark whose potential has no coboundary component."""
        self._require_exact("spark normal form")
        a = s.a
        na = self._project_harmonic_exact(a) + self.adjoint_delta(
            self.green(self.K.delta(a))
        )
        return Spark(na, s.R)

    def integral_harmonic_basis(self, k):
        """Harmonic representatives of the free integral classes."""
        self._require_exact("integral harmonic basis")
        free, _ = cohomology_generators(self.K, k)
        return [self._project_harmonic_exact(g) for g in free]


@dataclass(frozen=True)
class HodgeDecomposition:
    harmonic: Cochain
    primitive: Cochain
    coprimitive: Cochain


# ---------------------------------------------------------------------------
# Abel-Jacobi values


def abel_jacobi(ctx: HodgeContext, z: Chain, basis=None):
    """Circle-valued periods of a bounding integral cycle.

    The degree-q cycle z must bound; the returned tuple holds, mod 1,
    the integrals over a bounding chain of the harmonic representatives
    of the given degree-(q+1) integral cocycles (by default the free
    cohomology generators).  Changing the bounding chain moves the
    integrals by whole numbers, so the values are well defined.
    """
    ctx._require_exact("Abel-Jacobi values")
    K = ctx.K
    if not all(x == int(x) for x in z.values):
        raise HodgeError("cycle must be integral")
    q = z.degree
    Hq = integer_homology(K, q)
    c = Hq.preimage_int([int(x) for x in z.values])
    if c is None:
        raise HodgeError("cycle does not bound")
    chain = K.chain(q + 1, c)
    if basis is None:
        basis, _ = cohomology_generators(K, q + 1)
    vals = []
    for g in basis:
        if not g.is_integral() or not K.delta(g).is_zero():
            raise HodgeError("basis entries must be integral cocycles")
        h = ctx.harmonic_projection(g)
        vals.append(mod1(Fraction(K.evaluate(h, chain))))
    return tuple(vals)


def is_principal(ctx: HodgeContext, z: Chain, basis=None) -> bool:
    """Whether a bounding cycle is trivial in the circle-valued sense.

    True exactly when every Abel-Jacobi component of z vanishes mod 1,
    that is when some bounding chain has integer periods against the
    harmonic representatives of the chosen integral cocycle basis.  The
    comparison is exact rational, no tolerance involved.
    """
    return all(v == 0 for v in abel_jacobi(ctx, z, basis))


def path_chain(K: SimplicialComplex, vertices) -> Chain:
    """1-chain of a vertex path, oriented along the direction of travel."""
    values = [0] * K.n_simplices(1)
    idx = K.index[1]
    for a, b in zip(vertices, vertices[1:]):
        if a == b:
            continue
        edge = (a, b) if a < b else (b, a)
        if edge not in idx:
            raise HodgeError(f"no edge {edge}")
        values[idx[edge]] += 1 if a < b else -1
    return Chain(1, tuple(values))


def point_abel_jacobi(ctx: HodgeContext, src, dst, path=None, basis=None):
    """Abel-Jacobi value of the 0-cycle dst - src.

    path, when given, is either a vertex list or an integral 1-chain
    whose boundary is dst - src; by default the lexicographic shortest
    edge path is used.  The result does not depend on that choice.
    """
    K = ctx.K
    z_vals = [0] * K.n_simplices(0)
    z_vals[dst] += 1
    z_vals[src] -= 1
    z = Chain(0, tuple(z_vals))
    if path is None:
        verts = K.bfs_path(src, dst)
        if verts is None:
            raise HodgeError("vertices lie in different components")
        chain = path_chain(K, verts)
    elif isinstance(path, Chain):
        chain = path
    else:
        chain = path_chain(K, list(path))
    if K.boundary(chain) != z:
        raise HodgeError("path does not run from src to dst")
    if basis is None:
        basis, _ = cohomology_generators(K, 1)
    vals = []
    for g in basis:
        h = ctx.harmonic_projection(g)
        vals.append(mod1(Fraction(K.evaluate(h, chain))))
    return tuple(vals)
