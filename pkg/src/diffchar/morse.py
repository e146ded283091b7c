"""Discrete Morse flows on chains and cochains.

A matching pairs each non-critical cell with a cell one dimension up.
The associated flow operator stabilizes after finitely many steps to a
projection P, with an explicit homotopy T satisfying, exactly over the
integers, boundary T + T boundary = 1 - P.  Restricting P-stable chains
to the critical cells yields a small complex computing the same
homology, and transposing everything gives cochain versions that
compress a closed cochain into potential plus critical charge.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cohomology import AbelianGroupStructure, LatticeQuotient
from .complexes import Chain, Cochain, SimplicialComplex
from .exact import identity_rows, mat_vec
from .sparks import Spark, SparkError


class MorseError(Exception):
    pass


# ---------------------------------------------------------------------------
# sparse row helpers (all rows kept free of explicit zeros)


def _mul_rows(A, B):
    out = []
    for row in A:
        acc = {}
        for m, v in row.items():
            for c, w in B[m].items():
                val = acc.get(c, 0) + v * w
                if val:
                    acc[c] = val
                else:
                    acc.pop(c, None)
        out.append(acc)
    return out


def _add_rows(A, B):
    out = []
    for ra, rb in zip(A, B):
        acc = dict(ra)
        for c, w in rb.items():
            val = acc.get(c, 0) + w
            if val:
                acc[c] = val
            else:
                acc.pop(c, None)
        out.append(acc)
    return out


def _transpose_apply(rows, vec, ncols):
    out = [0] * ncols
    for r, row in enumerate(rows):
        x = vec[r]
        if x:
            for c, v in row.items():
                out[c] += v * x
    return out


# ---------------------------------------------------------------------------
# matchings


@dataclass(frozen=True)
class Matching:
    """Pairs (k, i, j): k-simplex number i with (k+1)-simplex number j."""

    pairs: tuple

    def up_map(self, k):
        return {i: j for kk, i, j in self.pairs if kk == k}

    def down_map(self, k):
        """Map from a matched (k+1)-simplex down to its partner."""
        return {j: i for kk, i, j in self.pairs if kk == k}

    def cells(self):
        out = set()
        for k, i, j in self.pairs:
            out.add((k, i))
            out.add((k + 1, j))
        return out


def critical_cells(K: SimplicialComplex, matching: Matching):
    used = matching.cells()
    return {
        k: tuple(
            i for i in range(K.n_simplices(k)) if (k, i) not in used
        )
        for k in range(K.dimension + 1)
    }


def _cofacet_lists(K, k):
    # boundary_rows(k+1) is indexed by k-simplices, columns by cofacets
    cof = [sorted(row) for row in K.boundary_rows(k + 1)]
    return cof


def validate_matching(K: SimplicialComplex, matching: Matching):
    """Check facet incidence, disjointness, and acyclicity of V-paths."""
    seen = set()
    for k, i, j in matching.pairs:
        if not (0 <= k < K.dimension):
            raise MorseError(f"bad degree {k} in matching")
        if not (0 <= i < K.n_simplices(k) and 0 <= j < K.n_simplices(k + 1)):
            raise MorseError("matching index out of range")
        if K.boundary_rows(k + 1)[i].get(j, 0) == 0:
            raise MorseError(
                f"pair ({k}, {i}, {j}) is not a facet incidence"
            )
        for cell in ((k, i), (k + 1, j)):
            if cell in seen:
                raise MorseError(f"cell {cell} matched twice")
            seen.add(cell)
    # V-paths in degree k step from a matched k-cell through its partner
    # to another matched facet of that partner; they must not cycle
    for k in range(K.dimension):
        up = matching.up_map(k)
        succ = {}
        for i, j in up.items():
            succ[i] = [
                i2
                for i2, row in enumerate(K.boundary_rows(k + 1))
                if j in row and i2 != i and i2 in up
            ]
        state = {}

        def visit(node):
            stack = [(node, iter(succ[node]))]
            state[node] = 1
            while stack:
                cur, it = stack[-1]
                advanced = False
                for nxt in it:
                    if state.get(nxt) == 1:
                        raise MorseError(f"matching has a V-path cycle in degree {k}")
                    if nxt not in state:
                        state[nxt] = 1
                        stack.append((nxt, iter(succ[nxt])))
                        advanced = True
                        break
                if not advanced:
                    state[cur] = 2
                    stack.pop()

        for node in succ:
            if node not in state:
                visit(node)


def greedy_matching(K: SimplicialComplex) -> Matching:
    """Deterministic collapse-based acyclic matching.

    Repeatedly matches the lexicographically first cell that has exactly
    one unassigned cofacet; when stuck, the first unassigned cell of the
    highest remaining dimension becomes critical.  Free-face collapses
    can never create a V-path cycle.
    """
    assigned = set()
    pairs = []
    cof = {k: _cofacet_lists(K, k) for k in range(K.dimension)}
    while True:
        progress = True
        while progress:
            progress = False
            for k in range(K.dimension):
                for i in range(K.n_simplices(k)):
                    if (k, i) in assigned:
                        continue
                    free = [
                        j for j in cof[k][i] if (k + 1, j) not in assigned
                    ]
                    if len(free) == 1:
                        j = free[0]
                        pairs.append((k, i, j))
                        assigned.add((k, i))
                        assigned.add((k + 1, j))
                        progress = True
        remaining = None
        for k in range(K.dimension, -1, -1):
            for i in range(K.n_simplices(k)):
                if (k, i) not in assigned:
                    remaining = (k, i)
                    break
            if remaining:
                break
        if remaining is None:
            break
        assigned.add(remaining)
    return Matching(tuple(sorted(pairs)))


# ---------------------------------------------------------------------------
# the flow


class MorseFlow:
    """Stabilized flow, homotopy and critical complex of a matching."""

    def __init__(self, K: SimplicialComplex, matching: Matching, validate=True):
        if validate:
            validate_matching(K, matching)
        self.K = K
        self.matching = matching
        self.critical = critical_cells(K, matching)
        n = K.dimension
        # V_k: C_k -> C_{k+1}, rows indexed by (k+1)-simplices;
        # V(sigma) = -(incidence)^{-1} partner, so the flow cancels sigma
        self._V = {}
        for k in range(-1, n + 1):
            rows = [dict() for _ in range(K.n_simplices(k + 1))]
            if 0 <= k < n:
                for i, j in matching.up_map(k).items():
                    sign = K.boundary_rows(k + 1)[i][j]
                    rows[j][i] = -sign
            self._V[k] = rows
        # flow in each degree
        self._phi = {}
        for k in range(n + 1):
            phi = identity_rows(K.n_simplices(k))
            phi = _add_rows(phi, _mul_rows(K.boundary_rows(k + 1), self._V[k]))
            phi = _add_rows(phi, _mul_rows(self._V[k - 1], K.boundary_rows(k)))
            self._phi[k] = phi
        # stabilize globally
        self._P = {}
        N = 0
        for k in range(n + 1):
            prev = self._phi[k]
            steps = 0
            while True:
                cur = _mul_rows(prev, self._phi[k])
                if cur == prev:
                    break
                prev = cur
                steps += 1
            self._P[k] = prev
            N = max(N, steps + 1)
        self.stabilization_exponent = N
        # homotopy T_k = -(sum of flow powers below N) V_k
        self._T = {}
        for k in range(-1, n + 1):
            deg = k + 1
            phi_deg = self._phi.get(deg, [])
            acc = identity_rows(K.n_simplices(deg))
            power = identity_rows(K.n_simplices(deg))
            for _ in range(N - 1):
                power = _mul_rows(power, phi_deg)
                acc = _add_rows(acc, power)
            prod = _mul_rows(acc, self._V[k])
            self._T[k] = [{c: -v for c, v in row.items()} for row in prod]

    # -- chain operators -------------------------------------------------
    def flow_once(self, z: Chain) -> Chain:
        return Chain(z.degree, tuple(mat_vec(self._phi[z.degree], list(z.values))))

    def project(self, z: Chain) -> Chain:
        return Chain(z.degree, tuple(mat_vec(self._P[z.degree], list(z.values))))

    def homotopy(self, z: Chain) -> Chain:
        """Degree-raising map T with boundary T + T boundary = 1 - P."""
        return Chain(
            z.degree + 1, tuple(mat_vec(self._T[z.degree], list(z.values)))
        )

    # -- cochain operators (transposes) ----------------------------------
    def project_cochain(self, u: Cochain) -> Cochain:
        n = self.K.n_simplices(u.degree)
        return Cochain(
            u.degree, tuple(_transpose_apply(self._P[u.degree], list(u.values), n))
        )

    def homotopy_cochain(self, u: Cochain) -> Cochain:
        """Degree-lowering transpose of T; pairs with delta like 1 - P."""
        k = u.degree - 1
        n = self.K.n_simplices(k)
        return Cochain(k, tuple(_transpose_apply(self._T[k], list(u.values), n)))

    # -- critical complex ------------------------------------------------
    def morse_boundary_rows(self, k):
        """Boundary of the critical complex, M_k -> M_{k-1}."""
        crit_k = self.critical.get(k, ())
        crit_low = self.critical.get(k - 1, ())
        low_pos = {idx: p for p, idx in enumerate(crit_low)}
        rows = [dict() for _ in range(len(crit_low))]
        brows = self.K.boundary_rows(k)
        for col, idx in enumerate(crit_k):
            e = [0] * self.K.n_simplices(k)
            e[idx] = 1
            stable = mat_vec(self._P[k], e)
            bnd = mat_vec(brows, stable)
            for i, val in enumerate(bnd):
                if val and i in low_pos:
                    rows[low_pos[i]][col] = val
        return rows

    def morse_homology(self, k) -> AbelianGroupStructure:
        crit_k = self.critical.get(k, ())
        A = self.morse_boundary_rows(k)
        B = self.morse_boundary_rows(k + 1)
        return LatticeQuotient(A, len(crit_k), B, len(self.critical.get(k + 1, ()))).structure()


def morse_spark(K: SimplicialComplex, flow: MorseFlow, phi: Cochain) -> Spark:
    """Spark with curvature phi from the cochain flow.

    The potential is the cochain homotopy applied to phi and the charge
    is its stable projection, which lives on critical cells; the charge
    must come out integral, otherwise phi admits no spark through this
    matching and a SparkError is raised.
    """
    if not K.delta(phi).is_zero():
        raise SparkError("curvature must be closed")
    a = flow.homotopy_cochain(phi)
    R = flow.project_cochain(phi)
    if not R.is_integral():
        raise SparkError("stable projection of the curvature is not integral")
    R = Cochain(R.degree, tuple(int(v) for v in R.values))
    return Spark(a, R)
