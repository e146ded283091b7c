"""Exact integer and rational linear algebra kernels.

Pure Python over arbitrary-precision ``int`` and ``fractions.Fraction``.
Matrices live in two shapes:

* dense: list of row lists,
* sparse: list of row dicts ``{col: value}`` with zero entries absent.

The two workhorses are :func:`smith_normal_form`, which tracks all four
unimodular transforms (needed downstream for kernels, integer solves,
quotient-group coordinates and torsion witnesses), and :class:`RatElim`,
a sparse fraction Gauss-Jordan used for rational solves, nullspaces and
ranks.  Pivoting is Markowitz-style (least fill among entries of minimal
magnitude) with deterministic tie-breaks, so identical inputs give
identical outputs everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd


# ---------------------------------------------------------------------------
# shape helpers

def dense_to_rows(mat):
    """Dense list-of-lists -> sparse list of {col: value} rows."""
    return [{j: v for j, v in enumerate(row) if v} for row in mat]


def rows_to_dense(rows, ncols):
    out = []
    for row in rows:
        dense = [0] * ncols
        for j, v in row.items():
            dense[j] = v
        out.append(dense)
    return out


def transpose_rows(rows, ncols):
    out = [dict() for _ in range(ncols)]
    for i, row in enumerate(rows):
        for j, v in row.items():
            out[j][i] = v
    return out


def mat_vec(rows, vec):
    """Sparse rows times dense vector."""
    out = []
    for row in rows:
        acc = 0
        for j, v in row.items():
            x = vec[j]
            if x:
                acc += v * x
        out.append(acc)
    return out


def identity_rows(n):
    return [{i: 1} for i in range(n)]


def _row_axpy(target, source, c):
    """target += c * source, both sparse dicts."""
    for j, v in source.items():
        w = target.get(j, 0) + c * v
        if w:
            target[j] = w
        else:
            target.pop(j, None)


# ---------------------------------------------------------------------------
# Smith normal form


@dataclass
class SmithDecomposition:
    """U @ A @ V == D with U, V unimodular and D = diag(invariant factors).

    ``diag`` holds the nonzero invariant factors d_1 | d_2 | ... | d_r,
    all positive; ``rank`` is r.  The transforms are kept sparse:
    ``U_rows`` are rows of U, ``UinvT_rows`` rows of U^{-1} transposed,
    ``VT_rows`` rows of V transposed (i.e. columns of V), ``Vinv_rows``
    rows of V^{-1}.
    """

    nrows: int
    ncols: int
    rank: int
    diag: list
    U_rows: list
    UinvT_rows: list
    VT_rows: list
    Vinv_rows: list

    # -- materialized views (tests, small matrices) ---------------------
    def U(self):
        return rows_to_dense(self.U_rows, self.nrows)

    def Uinv(self):
        return rows_to_dense(transpose_rows(self.UinvT_rows, self.nrows), self.nrows)

    def V(self):
        return rows_to_dense(transpose_rows(self.VT_rows, self.ncols), self.ncols)

    def Vinv(self):
        return rows_to_dense(self.Vinv_rows, self.ncols)

    def D(self):
        out = [[0] * self.ncols for _ in range(self.nrows)]
        for i, d in enumerate(self.diag):
            out[i][i] = d
        return out

    # -- applications ----------------------------------------------------
    def U_times(self, vec):
        return mat_vec(self.U_rows, vec)

    def V_times(self, vec):
        """V @ vec, using V columns = VT rows."""
        out = [0] * self.ncols
        for j, x in enumerate(vec):
            if x:
                for i, v in self.VT_rows[j].items():
                    out[i] += x * v
        return out

    def Vinv_times(self, vec):
        return mat_vec(self.Vinv_rows, vec)

    def Uinv_times(self, vec):
        out = [0] * self.nrows
        for j, x in enumerate(vec):
            if x:
                for i, v in self.UinvT_rows[j].items():
                    out[i] += x * v
        return out

    def kernel_basis(self):
        """Basis of the integer kernel of A: V columns past the rank.

        The basis is primitive (spans the full kernel lattice).  Returned
        as a list of dense length-``ncols`` integer vectors.
        """
        out = []
        for j in range(self.rank, self.ncols):
            row = self.VT_rows[j]
            vec = [0] * self.ncols
            for i, v in row.items():
                vec[i] = v
            out.append(vec)
        return out

    def solve_int(self, b):
        """Integer solution x of A x = b, or None."""
        y = self.U_times(b)
        coeff = [0] * self.ncols
        for i, val in enumerate(y):
            if i < self.rank:
                d = self.diag[i]
                if val % d:
                    return None
                coeff[i] = val // d
            elif val:
                return None
        return self.V_times(coeff)

    def solve_rat(self, b):
        """Rational solution x of A x = b, or None (b may be rational)."""
        y = self.U_times(b)
        coeff = [0] * self.ncols
        for i, val in enumerate(y):
            if i < self.rank:
                coeff[i] = Fraction(val, 1) / self.diag[i]
            elif val:
                return None
        return self.V_times(coeff)


class _SnfWorker:
    def __init__(self, rows, nrows, ncols):
        self.rows = rows
        self.nrows = nrows
        self.ncols = ncols
        self.cols = [set() for _ in range(ncols)]
        for i, row in enumerate(rows):
            for j in row:
                self.cols[j].add(i)
        self.U = identity_rows(nrows)
        self.UinvT = identity_rows(nrows)
        self.VT = identity_rows(ncols)
        self.Vinv = identity_rows(ncols)

    # elementary operations, mirrored into the transforms ---------------
    def row_axpy(self, i, j, c):
        """row i += c * row j."""
        row_j = self.rows[j]
        row_i = self.rows[i]
        for col, v in row_j.items():
            w = row_i.get(col, 0) + c * v
            if w:
                row_i[col] = w
                self.cols[col].add(i)
            else:
                row_i.pop(col, None)
                self.cols[col].discard(i)
        _row_axpy(self.U[i], self.U[j], c)
        _row_axpy(self.UinvT[j], self.UinvT[i], -c)

    def col_axpy(self, i, j, c):
        """col i += c * col j."""
        for r in list(self.cols[j]):
            row = self.rows[r]
            w = row.get(i, 0) + c * row[j]
            if w:
                row[i] = w
                self.cols[i].add(r)
            else:
                row.pop(i, None)
                self.cols[i].discard(r)
        _row_axpy(self.VT[i], self.VT[j], c)
        _row_axpy(self.Vinv[j], self.Vinv[i], -c)

    def row_swap(self, i, j):
        if i == j:
            return
        self.rows[i], self.rows[j] = self.rows[j], self.rows[i]
        for col in set(self.rows[i]) | set(self.rows[j]):
            members = self.cols[col]
            has_i = col in self.rows[i]
            has_j = col in self.rows[j]
            if has_i:
                members.add(i)
            else:
                members.discard(i)
            if has_j:
                members.add(j)
            else:
                members.discard(j)
        self.U[i], self.U[j] = self.U[j], self.U[i]
        self.UinvT[i], self.UinvT[j] = self.UinvT[j], self.UinvT[i]

    def col_swap(self, i, j):
        if i == j:
            return
        for r in self.cols[i] | self.cols[j]:
            row = self.rows[r]
            vi = row.pop(i, None)
            vj = row.pop(j, None)
            if vj is not None:
                row[i] = vj
            if vi is not None:
                row[j] = vi
        self.cols[i], self.cols[j] = self.cols[j], self.cols[i]
        self.VT[i], self.VT[j] = self.VT[j], self.VT[i]
        self.Vinv[i], self.Vinv[j] = self.Vinv[j], self.Vinv[i]

    def row_negate(self, i):
        row = self.rows[i]
        for col in row:
            row[col] = -row[col]
        for d in (self.U[i], self.UinvT[i]):
            for col in d:
                d[col] = -d[col]

    # pivot machinery ----------------------------------------------------
    def _find_pivot(self, t):
        """Best pivot in the active submatrix (rows/cols >= t)."""
        best = None
        best_unit = None
        for i in range(t, self.nrows):
            for j, v in self.rows[i].items():
                if j < t:
                    continue
                cost = (len(self.rows[i]) - 1) * (len(self.cols[j]) - 1)
                key = (cost, j, i)
                if v == 1 or v == -1:
                    if best_unit is None or key < best_unit[0]:
                        best_unit = (key, i, j)
                else:
                    mag = abs(v)
                    mkey = (mag, cost, j, i)
                    if best is None or mkey < best[0]:
                        best = (mkey, i, j)
        if best_unit is not None:
            return best_unit[1], best_unit[2]
        if best is not None:
            return best[1], best[2]
        return None

    def _clear_pivot(self, t):
        """Make (t,t) the only nonzero of row t and column t via gcd steps."""
        while True:
            piv = self.rows[t][t]
            # column sweep
            again = False
            for r in sorted(self.cols[t]):
                if r == t:
                    continue
                a = self.rows[r][t]
                q = _nearest_div(a, piv)
                if q:
                    self.row_axpy(r, t, -q)
            for r in sorted(self.cols[t]):
                if r != t:
                    # remainder survived: strictly smaller pivot available
                    self.row_swap(t, r)
                    again = True
                    break
            if again:
                continue
            # row sweep
            piv = self.rows[t][t]
            for c in sorted(self.rows[t]):
                if c == t:
                    continue
                a = self.rows[t][c]
                q = _nearest_div(a, piv)
                if q:
                    self.col_axpy(c, t, -q)
            leftover = [c for c in self.rows[t] if c != t]
            if leftover:
                self.col_swap(t, leftover[0])
                continue
            if len(self.cols[t]) > 1:
                continue
            return

    def run(self):
        t = 0
        limit = min(self.nrows, self.ncols)
        while t < limit:
            found = self._find_pivot(t)
            if found is None:
                break
            i, j = found
            self.row_swap(t, i)
            self.col_swap(t, j)
            self._clear_pivot(t)
            t += 1
        rank = t
        # positive diagonal
        for i in range(rank):
            if self.rows[i][i] < 0:
                self.row_negate(i)
        # divisibility chain
        changed = True
        while changed:
            changed = False
            for i in range(rank - 1):
                di = self.rows[i][i]
                dj = self.rows[i + 1][i + 1]
                if dj % di:
                    self.col_axpy(i, i + 1, 1)
                    self._clear_pivot(i)
                    if self.rows[i][i] < 0:
                        self.row_negate(i)
                    if self.rows[i + 1][i + 1] < 0:
                        self.row_negate(i + 1)
                    changed = True
        diag = [self.rows[i][i] for i in range(rank)]
        return SmithDecomposition(
            nrows=self.nrows,
            ncols=self.ncols,
            rank=rank,
            diag=diag,
            U_rows=self.U,
            UinvT_rows=self.UinvT,
            VT_rows=self.VT,
            Vinv_rows=self.Vinv,
        )


def _nearest_div(a, b):
    """Quotient q minimizing |a - q b| (ties toward floor)."""
    q, r = divmod(a, b)
    if 2 * abs(r) > abs(b):
        q += 1
    return q


def smith_normal_form(mat, nrows=None, ncols=None):
    """Smith normal form with transforms.

    ``mat`` is dense (list of row lists) or sparse (list of row dicts,
    in which case ``ncols`` is required).
    """
    if mat and isinstance(mat[0], dict):
        rows = [dict(r) for r in mat]
        if ncols is None:
            raise ValueError("ncols required for sparse input")
        nrows = len(rows) if nrows is None else nrows
    else:
        rows = dense_to_rows(mat)
        nrows = len(mat)
        ncols = len(mat[0]) if mat else (ncols or 0)
    worker = _SnfWorker(rows, nrows, ncols)
    return worker.run()


# ---------------------------------------------------------------------------
# Hermite form (row style), for canonical lattice bases


def row_hermite_form(mat):
    """(H, C) with C @ mat == H, C unimodular.

    H is in row Hermite form: pivots positive, strictly to the right as
    rows descend, entries above each pivot reduced into [0, pivot), zero
    rows last.  Canonical for the row lattice of ``mat``.
    """
    H = [list(row) for row in mat]
    n = len(H)
    m = len(H[0]) if H else 0
    C = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def raxpy(i, j, c):
        H[i] = [a + c * b for a, b in zip(H[i], H[j])]
        C[i] = [a + c * b for a, b in zip(C[i], C[j])]

    def rswap(i, j):
        H[i], H[j] = H[j], H[i]
        C[i], C[j] = C[j], C[i]

    def rneg(i):
        H[i] = [-a for a in H[i]]
        C[i] = [-a for a in C[i]]

    top = 0
    for col in range(m):
        # gcd-reduce column entries at rows >= top into one pivot
        while True:
            live = [i for i in range(top, n) if H[i][col]]
            if len(live) <= 1:
                break
            live.sort(key=lambda i: (abs(H[i][col]), i))
            p = live[0]
            for i in live[1:]:
                q = _nearest_div(H[i][col], H[p][col])
                raxpy(i, p, -q)
        live = [i for i in range(top, n) if H[i][col]]
        if not live:
            continue
        p = live[0]
        rswap(top, p)
        if H[top][col] < 0:
            rneg(top)
        piv = H[top][col]
        for i in range(top):
            q = H[i][col] // piv  # floor: entries land in [0, piv)
            if q:
                raxpy(i, top, -q)
        top += 1
    return H, C


# ---------------------------------------------------------------------------
# sparse rational elimination


class RatElim:
    """Sparse Gauss-Jordan over Q.

    ``rows`` is a list of {col: value} dicts (int or Fraction values);
    ``rhs`` an optional list of dense right-hand-side vectors (one entry
    per row each).  After ``run()``:

    * ``pivots``  -- list of (row, col) in elimination order,
    * ``rank``    -- len(pivots),
    * ``solution(which)`` -- particular solution with free vars 0, or
      None if that rhs is inconsistent,
    * ``nullspace()``     -- basis of the kernel.
    """

    def __init__(self, rows, ncols, rhs=None):
        self.rows = [dict(r) for r in rows]
        self.ncols = ncols
        self.nrhs = len(rhs) if rhs else 0
        self.rhs = [list(map(Fraction, vec)) for vec in (rhs or [])]
        self.cols = [set() for _ in range(ncols)]
        for i, row in enumerate(self.rows):
            for j in row:
                self.cols[j].add(i)
        self.pivots = []
        self._ran = False

    def _pick(self, active_rows):
        best = None
        for i in active_rows:
            row = self.rows[i]
            if not row:
                continue
            rlen = len(row)
            for j in row:
                key = ((rlen - 1) * (len(self.cols[j]) - 1), j, i)
                if best is None or key < best:
                    best = key
        if best is None:
            return None
        return best[2], best[1]

    def run(self):
        if self._ran:
            return self
        self._ran = True
        active = set(range(len(self.rows)))
        while True:
            picked = self._pick(active)
            if picked is None:
                break
            pr, pc = picked
            active.discard(pr)
            self.pivots.append((pr, pc))
            piv = Fraction(self.rows[pr][pc])
            if piv != 1:
                inv = 1 / piv
                self.rows[pr] = {j: v * inv for j, v in self.rows[pr].items()}
                for k in range(self.nrhs):
                    self.rhs[k][pr] *= inv
            prow = self.rows[pr]
            for r in sorted(self.cols[pc]):
                if r == pr:
                    continue
                c = self.rows[r][pc]
                row = self.rows[r]
                for j, v in prow.items():
                    w = row.get(j, 0) - c * v
                    if w:
                        row[j] = w
                        self.cols[j].add(r)
                    else:
                        row.pop(j, None)
                        self.cols[j].discard(r)
                for k in range(self.nrhs):
                    self.rhs[k][r] -= c * self.rhs[k][pr]
        return self

    @property
    def rank(self):
        self.run()
        return len(self.pivots)

    def consistent(self, which=0):
        self.run()
        pivot_rows = {r for r, _ in self.pivots}
        return all(
            not self.rhs[which][i]
            for i in range(len(self.rows))
            if i not in pivot_rows
        )

    def solution(self, which=0):
        self.run()
        if not self.consistent(which):
            return None
        x = [Fraction(0)] * self.ncols
        for r, c in self.pivots:
            x[c] = self.rhs[which][r]
        return x

    def nullspace(self):
        self.run()
        pivot_cols = {c: r for r, c in self.pivots}
        free = [j for j in range(self.ncols) if j not in pivot_cols]
        basis = []
        for f in free:
            vec = [Fraction(0)] * self.ncols
            vec[f] = Fraction(1)
            for c, r in pivot_cols.items():
                v = self.rows[r].get(f)
                if v:
                    vec[c] = -Fraction(v)
            basis.append(vec)
        return basis


def rat_solve(rows, ncols, b):
    """Particular rational solution of (sparse rows) x = b, or None."""
    elim = RatElim(rows, ncols, rhs=[b])
    return elim.solution()


def rat_nullspace(rows, ncols):
    return RatElim(rows, ncols).nullspace()


def rat_rank(rows, ncols):
    return RatElim(rows, ncols).rank


# ---------------------------------------------------------------------------
# finitely generated abelian group bookkeeping


def invariant_factors(cyclic_orders):
    """Invariant-factor chain for a direct sum of cyclic groups.

    ``cyclic_orders`` lists the orders (>1) of cyclic summands in any
    order; the result d_1 | d_2 | ... is the canonical chain, largest
    last.  Plain trial-division factoring; torsion orders here are tiny.
    """
    primes = {}
    for n in cyclic_orders:
        if n <= 1:
            continue
        for p, e in _factor(n).items():
            primes.setdefault(p, []).append(e)
    if not primes:
        return []
    depth = max(len(v) for v in primes.values())
    chain = []
    for slot in range(depth):
        d = 1
        for p, exps in primes.items():
            exps_sorted = sorted(exps, reverse=True)
            if slot < len(exps_sorted):
                d *= p ** exps_sorted[slot]
        chain.append(d)
    return sorted(chain)


def _factor(n):
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def gcd_pair(a, b):
    return gcd(a, b)
