"""Finite simplicial complexes with exact chain/cochain calculus.

A complex stores its k-simplices as lexicographically sorted tuples of
vertex ids 0..N-1.  Boundary and coboundary operators are sparse integer
matrices; chains and cochains are plain coefficient vectors (int or
Fraction entries) tagged with a degree.  Products use the standard
front-face/back-face (Alexander-Whitney) formulas, which satisfy the
Leibniz rule on the nose; that exactness is what the spark calculus
downstream leans on.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exact import RatElim, mat_vec, transpose_rows


class ComplexError(ValueError):
    """Malformed simplicial data (closure violations, bad ids, ...)."""


# ---------------------------------------------------------------------------
# scalars


def parse_scalar(text):
    """Parse "p/q" or "p" into Fraction or int (integers stay int)."""
    if isinstance(text, int):
        return text
    f = Fraction(str(text))
    return int(f) if f.denominator == 1 else f


def scalar_str(x):
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def is_integer(x):
    if isinstance(x, int):
        return True
    return Fraction(x).denominator == 1


# ---------------------------------------------------------------------------
# chains and cochains


@dataclass(frozen=True)
class Chain:
    """Formal sum of k-simplices; values indexed like K.simplices[k]."""

    degree: int
    values: tuple

    def __add__(self, other):
        _check_same(self, other)
        return Chain(self.degree, tuple(a + b for a, b in zip(self.values, other.values)))

    def __sub__(self, other):
        _check_same(self, other)
        return Chain(self.degree, tuple(a - b for a, b in zip(self.values, other.values)))

    def __neg__(self):
        return Chain(self.degree, tuple(-a for a in self.values))

    def scale(self, c):
        return Chain(self.degree, tuple(c * a for a in self.values))

    def is_zero(self):
        return not any(self.values)

    def is_integral(self):
        return all(is_integer(v) for v in self.values)


@dataclass(frozen=True)
class Cochain:
    """Function on k-simplices; values indexed like K.simplices[k]."""

    degree: int
    values: tuple

    def __add__(self, other):
        _check_same(self, other)
        return Cochain(self.degree, tuple(a + b for a, b in zip(self.values, other.values)))

    def __sub__(self, other):
        _check_same(self, other)
        return Cochain(self.degree, tuple(a - b for a, b in zip(self.values, other.values)))

    def __neg__(self):
        return Cochain(self.degree, tuple(-a for a in self.values))

    def scale(self, c):
        return Cochain(self.degree, tuple(c * a for a in self.values))

    def is_zero(self):
        return not any(self.values)

    def is_integral(self):
        return all(is_integer(v) for v in self.values)

    def ring(self):
        return "INT" if self.is_integral() else "RAT"


def _check_same(a, b):
    if a.degree != b.degree or len(a.values) != len(b.values):
        raise ValueError("degree/length mismatch")


def as_int_values(values):
    """Coerce exact-integer Fractions to int; error on true fractions."""
    out = []
    for v in values:
        f = Fraction(v)
        if f.denominator != 1:
            raise ValueError(f"non-integral value {v}")
        out.append(f.numerator)
    return tuple(out)


# ---------------------------------------------------------------------------
# the complex


class SimplicialComplex:
    """Finite abstract simplicial complex on vertices 0..N-1.

    ``simplices[k]`` is the sorted list of k-simplices (sorted vertex
    tuples).  Build from any generating set of simplices; faces are
    filled in when ``auto_close`` is true, otherwise missing faces raise
    :class:`ComplexError`.
    """

    def __init__(self, simplices, n_vertices=None, auto_close=True):
        gen = []
        for s in simplices:
            t = tuple(s)
            if len(set(t)) != len(t):
                raise ComplexError(f"degenerate simplex {t}")
            if any(not isinstance(v, int) or v < 0 for v in t):
                raise ComplexError(f"bad vertex id in {t}")
            gen.append(tuple(sorted(t)))
        present = set(gen)
        if n_vertices is not None:
            present.update((i,) for i in range(n_vertices))
        closure = set()
        for t in present:
            for face in _all_faces(t):
                closure.add(face)
        if not auto_close:
            missing = sorted(closure - present)
            if missing:
                raise ComplexError(f"closure violated: missing face {missing[0]}")
        vertices = sorted(v for (v,) in (t for t in closure if len(t) == 1))
        n = (vertices[-1] + 1) if vertices else 0
        if vertices != list(range(n)):
            gap = next(i for i in range(n) if i not in set(vertices))
            raise ComplexError(f"vertex ids must be contiguous from 0; missing {gap}")
        self.n_vertices = n
        self.dimension = max((len(t) - 1 for t in closure), default=-1)
        self.simplices = {
            k: sorted(t for t in closure if len(t) == k + 1)
            for k in range(self.dimension + 1)
        }
        self.index = {
            k: {t: i for i, t in enumerate(lst)} for k, lst in self.simplices.items()
        }
        self._cache = {}

    # -- bookkeeping -----------------------------------------------------
    def n_simplices(self, k):
        return len(self.simplices.get(k, []))

    def total_simplices(self):
        return sum(len(v) for v in self.simplices.values())

    def f_vector(self):
        return tuple(self.n_simplices(k) for k in range(self.dimension + 1))

    def euler_characteristic(self):
        return sum((-1) ** k * self.n_simplices(k) for k in range(self.dimension + 1))

    # -- operators -------------------------------------------------------
    def boundary_rows(self, k):
        """Sparse rows of the boundary matrix C_k -> C_{k-1}.

        Row index runs over (k-1)-simplices, column over k-simplices.
        """
        key = ("boundary", k)
        if key not in self._cache:
            rows = [dict() for _ in range(self.n_simplices(k - 1))]
            if 1 <= k <= self.dimension:
                idx = self.index[k - 1]
                for j, simp in enumerate(self.simplices[k]):
                    for i in range(len(simp)):
                        face = simp[:i] + simp[i + 1:]
                        rows[idx[face]][j] = (-1) ** i
            self._cache[key] = rows
        return self._cache[key]

    def delta_rows(self, k):
        """Sparse rows of the coboundary matrix C^k -> C^{k+1}.

        Row index runs over (k+1)-simplices; it is the transpose of
        ``boundary_rows(k+1)``.
        """
        key = ("delta", k)
        if key not in self._cache:
            self._cache[key] = transpose_rows(
                self.boundary_rows(k + 1), self.n_simplices(k + 1)
            )
        return self._cache[key]

    def boundary(self, z: Chain) -> Chain:
        rows = self.boundary_rows(z.degree)
        return Chain(z.degree - 1, tuple(mat_vec(rows, list(z.values))))

    def delta(self, u: Cochain) -> Cochain:
        rows = self.delta_rows(u.degree)
        return Cochain(u.degree + 1, tuple(mat_vec(rows, list(u.values))))

    # -- constructors ----------------------------------------------------
    def zero_cochain(self, k) -> Cochain:
        return Cochain(k, (0,) * self.n_simplices(k))

    def zero_chain(self, k) -> Chain:
        return Chain(k, (0,) * self.n_simplices(k))

    def cochain(self, k, values) -> Cochain:
        values = tuple(values)
        if len(values) != self.n_simplices(k):
            raise ValueError(
                f"expected {self.n_simplices(k)} values in degree {k}, got {len(values)}"
            )
        return Cochain(k, values)

    def chain(self, k, values) -> Chain:
        values = tuple(values)
        if len(values) != self.n_simplices(k):
            raise ValueError(
                f"expected {self.n_simplices(k)} values in degree {k}, got {len(values)}"
            )
        return Chain(k, values)

    def chain_of(self, k, coeffs: dict) -> Chain:
        """Chain from {simplex tuple: coefficient}."""
        vec = [0] * self.n_simplices(k)
        for simp, c in coeffs.items():
            vec[self.index[k][tuple(sorted(simp))]] += c
        return Chain(k, tuple(vec))

    def elementary_cochain(self, simp) -> Cochain:
        simp = tuple(sorted(simp))
        k = len(simp) - 1
        vec = [0] * self.n_simplices(k)
        vec[self.index[k][simp]] = 1
        return Cochain(k, tuple(vec))

    # -- pairings and products ------------------------------------------
    def evaluate(self, u: Cochain, z: Chain):
        if u.degree != z.degree:
            raise ValueError("evaluate needs matching degrees")
        return sum(a * b for a, b in zip(u.values, z.values))

    def cup(self, u: Cochain, v: Cochain) -> Cochain:
        """Front-face/back-face product C^p x C^q -> C^{p+q}."""
        p, q = u.degree, v.degree
        k = p + q
        if k > self.dimension:
            return self.zero_cochain(k)
        out = []
        idx_p, idx_q = self.index[p], self.index[q]
        uv, vv = u.values, v.values
        for simp in self.simplices[k]:
            a = uv[idx_p[simp[: p + 1]]]
            if a:
                out.append(a * vv[idx_q[simp[p:]]])
            else:
                out.append(0)
        return Cochain(k, tuple(out))

    def cap(self, z: Chain, u: Cochain) -> Chain:
        """Cap product C_m x C^p -> C_{m-p}, front face eaten by u.

        Adjoint to cup: <u cup w, z> == <w, cap(z, u)> for all w.
        """
        m, p = z.degree, u.degree
        if p > m:
            raise ValueError("cap needs deg(cochain) <= deg(chain)")
        q = m - p
        vec = [0] * self.n_simplices(q)
        idx_p, idx_q = self.index[p], self.index[q]
        for simp, c in zip(self.simplices[m], z.values):
            if not c:
                continue
            a = u.values[idx_p[simp[: p + 1]]]
            if a:
                vec[idx_q[simp[p:]]] += c * a
        return Chain(q, tuple(vec))

    # -- fundamental cycle ----------------------------------------------
    def fundamental_cycle(self):
        """Top-degree cycle with all coefficients +-1, or None.

        Exists (up to global sign, fixed by making the first coefficient
        +1) exactly when the complex is a closed orientable pseudomanifold
        in its top dimension.  Found as the rational kernel of the top
        boundary matrix.
        """
        if "fundamental" in self._cache:
            return self._cache["fundamental"]
        result = None
        n = self.dimension
        if n >= 1 and self.n_simplices(n) > 0:
            rows = self.boundary_rows(n)
            kernel = RatElim([dict(r) for r in rows], self.n_simplices(n)).nullspace()
            if len(kernel) == 1:
                vec = kernel[0]
                nz = [v for v in vec if v]
                if len(nz) == len(vec):
                    scaled = [v / nz[0] for v in vec]
                    if all(abs(v) == 1 for v in scaled):
                        ints = [int(v) for v in scaled]
                        if ints[0] < 0:
                            ints = [-v for v in ints]
                        cand = Chain(n, tuple(ints))
                        if self.boundary(cand).is_zero():
                            result = cand
        elif n == 0 and self.n_simplices(0) == 1:
            result = Chain(0, (1,))
        self._cache["fundamental"] = result
        return result

    def is_orientable_closed(self):
        return self.fundamental_cycle() is not None

    # -- graph structure -------------------------------------------------
    def vertex_components(self):
        """Component label per vertex (labels are minimal member ids)."""
        parent = list(range(self.n_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in self.simplices.get(1, []):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
        return [find(v) for v in range(self.n_vertices)]

    def bfs_path(self, src, dst):
        """Deterministic shortest vertex path along edges, or None."""
        if src == dst:
            return [src]
        adj = {v: [] for v in range(self.n_vertices)}
        for a, b in self.simplices.get(1, []):
            adj[a].append(b)
            adj[b].append(a)
        for v in adj:
            adj[v].sort()
        prev = {src: None}
        frontier = [src]
        while frontier:
            nxt = []
            for v in frontier:
                for w in adj[v]:
                    if w not in prev:
                        prev[w] = v
                        if w == dst:
                            path = [w]
                            while path[-1] is not None:
                                path.append(prev[path[-1]])
                            path.pop()
                            return path[::-1]
                        nxt.append(w)
            frontier = nxt
        return None

    # -- serialization ---------------------------------------------------
    def to_json_dict(self):
        out = {
            "dimension": self.dimension,
            "vertices": self.n_vertices,
            "simplices": {
                str(k): [list(t) for t in self.simplices[k]]
                for k in range(1, self.dimension + 1)
            },
        }
        fc = self.fundamental_cycle()
        if fc is not None:
            out["fundamental_cycle"] = [
                {"simplex": list(s), "coeff": c}
                for s, c in zip(self.simplices[self.dimension], fc.values)
                if c
            ]
        return out

    @classmethod
    def from_json_dict(cls, data, auto_close=False):
        try:
            n = int(data["vertices"])
            simps = []
            for lst in data.get("simplices", {}).values():
                for t in lst:
                    simps.append(tuple(int(v) for v in t))
        except (KeyError, TypeError, ValueError) as exc:
            raise ComplexError(f"malformed complex JSON: {exc}") from exc
        K = cls(simps, n_vertices=n, auto_close=auto_close)
        if "dimension" in data and int(data["dimension"]) != K.dimension:
            raise ComplexError(
                f"declared dimension {data['dimension']} but found {K.dimension}"
            )
        return K


def _all_faces(simp):
    """All nonempty subtuples of a sorted tuple (including itself)."""
    n = len(simp)
    for mask in range(1, 1 << n):
        yield tuple(simp[i] for i in range(n) if mask >> i & 1)


# ---------------------------------------------------------------------------
# subcomplexes


@dataclass
class ComplexEmbedding:
    """A face-closed subset of a complex, repackaged as a complex.

    ``vertex_to_parent[i]`` is the parent id of local vertex i and
    ``simplex_to_parent[k][j]`` the parent index of local k-simplex j.
    """

    sub: SimplicialComplex
    parent: SimplicialComplex
    vertex_to_parent: tuple
    simplex_to_parent: dict

    def restrict_cochain(self, u: Cochain) -> Cochain:
        k = u.degree
        local_n = self.sub.n_simplices(k)
        vals = tuple(
            u.values[self.simplex_to_parent[k][j]] for j in range(local_n)
        )
        return Cochain(k, vals)

    def push_chain(self, z: Chain) -> Chain:
        k = z.degree
        vec = [0] * self.parent.n_simplices(k)
        for j, c in enumerate(z.values):
            if c:
                vec[self.simplex_to_parent[k][j]] += c
        return Chain(k, tuple(vec))


def induced_subcomplex(K: SimplicialComplex, simplices) -> ComplexEmbedding:
    """Embedding of the face closure of ``simplices`` inside K."""
    closure = set()
    for s in simplices:
        t = tuple(sorted(s))
        if t not in K.index[len(t) - 1]:
            raise ComplexError(f"simplex {t} not in complex")
        for f in _all_faces(t):
            closure.add(f)
    vertices = sorted(v for (v,) in (t for t in closure if len(t) == 1))
    to_local = {v: i for i, v in enumerate(vertices)}
    local_simps = [tuple(to_local[v] for v in t) for t in closure]
    sub = SimplicialComplex(local_simps, n_vertices=len(vertices))
    simplex_to_parent = {}
    for k in range(sub.dimension + 1):
        table = []
        for t in sub.simplices[k]:
            parent_t = tuple(vertices[v] for v in t)
            table.append(K.index[k][parent_t])
        simplex_to_parent[k] = table
    for k in range(sub.dimension + 1, K.dimension + 1):
        simplex_to_parent.setdefault(k, [])
    return ComplexEmbedding(
        sub=sub,
        parent=K,
        vertex_to_parent=tuple(vertices),
        simplex_to_parent=simplex_to_parent,
    )


def closed_star(K: SimplicialComplex, v) -> list:
    """Simplices containing vertex v; their closure is the closed star."""
    out = []
    for k in range(K.dimension + 1):
        for t in K.simplices[k]:
            if v in t:
                out.append(t)
    return out


# ---------------------------------------------------------------------------
# simplicial maps


def simplicial_chain_maps(src: SimplicialComplex, tgt: SimplicialComplex, vertex_map):
    """Chain-map matrices of a simplicial map, one per degree.

    ``vertex_map[v]`` is the target vertex of source vertex v.  Degenerate
    images (repeated vertices) map to zero; otherwise the image simplex is
    sorted and picks up the sign of the sorting permutation.  Returns
    {k: sparse rows indexed by target k-simplices}.
    """
    for v in range(src.n_vertices):
        w = vertex_map[v]
        if (w,) not in tgt.index.get(0, {}):
            raise ComplexError(f"vertex {v} maps to missing target vertex {w}")
    maps = {}
    for k in range(src.dimension + 1):
        rows = [dict() for _ in range(tgt.n_simplices(k))]
        for j, simp in enumerate(src.simplices[k]):
            image = [vertex_map[v] for v in simp]
            if len(set(image)) != len(image):
                continue
            sign = _sort_sign(image)
            key = tuple(sorted(image))
            if key not in tgt.index[k]:
                raise ComplexError(
                    f"image simplex {key} of {simp} missing from target"
                )
            row = rows[tgt.index[k][key]]
            row[j] = row.get(j, 0) + sign
            if row[j] == 0:
                del row[j]
        maps[k] = rows
    return maps


def _sort_sign(seq):
    """Sign of the permutation sorting ``seq`` (distinct entries)."""
    sign = 1
    arr = list(seq)
    for i in range(len(arr)):
        m = min(range(i, len(arr)), key=arr.__getitem__)
        if m != i:
            arr[i], arr[m] = arr[m], arr[i]
            sign = -sign
    return sign


def apply_chain_map(maps, z: Chain) -> Chain:
    rows = maps[z.degree]
    return Chain(z.degree, tuple(mat_vec(rows, list(z.values))))


def pull_cochain(maps, u: Cochain, src_size) -> Cochain:
    """Cochain pullback along a chain map: transpose application."""
    rows = maps[u.degree]
    out = [0] * src_size
    for i, row in enumerate(rows):
        a = u.values[i]
        if a:
            for j, s in row.items():
                out[j] += s * a
    return Cochain(u.degree, tuple(out))


# ---------------------------------------------------------------------------
# barycentric subdivision


@dataclass
class ChainTransfer:
    """Chain/cochain traffic between a complex and its subdivision.

    ``subdivide[k]``: C_k(K) -> C_k(sd K) (rows over sd simplices);
    ``coarsen[k]``: C_k(sd K) -> C_k(K), the last-vertex projection.
    coarsen o subdivide is the identity on chains.
    """

    source: SimplicialComplex
    subdivided: SimplicialComplex
    vertex_of_simplex: dict
    subdivide: dict
    coarsen: dict

    def subdivide_chain(self, z: Chain) -> Chain:
        return Chain(z.degree, tuple(mat_vec(self.subdivide[z.degree], list(z.values))))

    def coarsen_chain(self, z: Chain) -> Chain:
        return Chain(z.degree, tuple(mat_vec(self.coarsen[z.degree], list(z.values))))

    def refine_cochain(self, u: Cochain) -> Cochain:
        """Pull a cochain on K back to sd K along the last-vertex map."""
        return pull_cochain(self.coarsen, u, self.subdivided.n_simplices(u.degree))

    def restrict_cochain(self, u: Cochain) -> Cochain:
        """Pull a cochain on sd K back to K along subdivision."""
        return pull_cochain(self.subdivide, u, self.source.n_simplices(u.degree))


def barycentric_subdivision(K: SimplicialComplex):
    """(sd K, ChainTransfer).  Vertices of sd K are simplices of K.

    sd-vertex ids are assigned dimension-major, so flags (chains in the
    face poset) are automatically sorted tuples.
    """
    vertex_of = {}
    counter = 0
    for k in range(K.dimension + 1):
        for t in K.simplices[k]:
            vertex_of[t] = counter
            counter += 1

    # enumerate flags: chains sigma_0 < sigma_1 < ... ordered by inclusion
    flags = set()
    all_simps = [t for k in range(K.dimension + 1) for t in K.simplices[k]]
    faces_of = {
        t: [f for f in _all_faces(t) if len(f) < len(t)] for t in all_simps
    }

    chains_ending_at = {}
    for t in sorted(all_simps, key=len):
        own = [(t,)]
        for f in sorted(faces_of[t], key=len):
            for c in chains_ending_at[f]:
                own.append(c + (t,))
        chains_ending_at[t] = own
        for c in own:
            flags.add(tuple(vertex_of[s] for s in c))

    sdK = SimplicialComplex(sorted(flags), n_vertices=counter)

    # subdivision chain map by cone recursion
    sd_of = {}

    def sd_chain(t):
        if t in sd_of:
            return sd_of[t]
        k = len(t) - 1
        if k == 0:
            result = {(vertex_of[t],): 1}
        else:
            bdry = {}
            for i in range(len(t)):
                face = t[:i] + t[i + 1:]
                s = (-1) ** i
                for flag, c in sd_chain(face).items():
                    bdry[flag] = bdry.get(flag, 0) + s * c
            apex = vertex_of[t]
            sign = (-1) ** k
            result = {
                flag + (apex,): sign * c for flag, c in bdry.items() if c
            }
        sd_of[t] = result
        return result

    subdivide = {}
    for k in range(K.dimension + 1):
        rows = [dict() for _ in range(sdK.n_simplices(k))]
        for j, t in enumerate(K.simplices[k]):
            for flag, c in sd_chain(t).items():
                rows[sdK.index[k][flag]][j] = c
        subdivide[k] = rows
    for k in range(K.dimension + 1, sdK.dimension + 1):
        subdivide[k] = [dict() for _ in range(sdK.n_simplices(k))]

    # last-vertex projection sd K -> K
    sd_vertex_to_simplex = {v: t for t, v in vertex_of.items()}
    last_vertex = [max(sd_vertex_to_simplex[v]) for v in range(counter)]
    coarsen = simplicial_chain_maps(sdK, K, last_vertex)

    return sdK, ChainTransfer(
        source=K,
        subdivided=sdK,
        vertex_of_simplex=vertex_of,
        subdivide=subdivide,
        coarsen=coarsen,
    )
