"""Sparse exact integer / modular linear algebra.

Everything here is exact: Smith normal form over Z (optionally with unimodular
transforms, self-verified by recomputation), sparse rank over F_p, and linear
solving over Z/m through the SNF transforms. Acyclicity verdicts over Z always
come from integer SNF; mod-p ranks are used as labeled screens only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidInput, InternalConsistencyError


class SparseIntMatrix:
    """Coordinate-format integer matrix; no stored zeros, no duplicates."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries=None):
        if rows < 0 or cols < 0:
            raise InvalidInput("matrix dimensions must be non-negative")
        self.rows = rows
        self.cols = cols
        self.entries: dict = {}
        if entries:
            for i, j, v in entries:
                if v == 0:
                    continue
                if not (0 <= i < rows and 0 <= j < cols):
                    raise InvalidInput(f"entry ({i},{j}) out of range")
                if (i, j) in self.entries:
                    raise InvalidInput(f"duplicate coordinate ({i},{j})")
                self.entries[(i, j)] = int(v)

    @classmethod
    def from_dense(cls, dense) -> "SparseIntMatrix":
        rows = len(dense)
        cols = len(dense[0]) if rows else 0
        m = cls(rows, cols)
        for i, r in enumerate(dense):
            for j, v in enumerate(r):
                if v:
                    m.entries[(i, j)] = int(v)
        return m

    def to_dense(self):
        d = [[0] * self.cols for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            d[i][j] = v
        return d

    @classmethod
    def identity(cls, n: int) -> "SparseIntMatrix":
        m = cls(n, n)
        for i in range(n):
            m.entries[(i, i)] = 1
        return m

    def transpose(self) -> "SparseIntMatrix":
        t = SparseIntMatrix(self.cols, self.rows)
        t.entries = {(j, i): v for (i, j), v in self.entries.items()}
        return t

    def nnz(self) -> int:
        return len(self.entries)

    def row_dicts(self) -> dict:
        rows: dict = {}
        for (i, j), v in self.entries.items():
            rows.setdefault(i, {})[j] = v
        return rows

    def col_dicts(self) -> dict:
        cols: dict = {}
        for (i, j), v in self.entries.items():
            cols.setdefault(j, {})[i] = v
        return cols

    def matvec(self, x) -> list:
        out = [0] * self.rows
        for (i, j), v in self.entries.items():
            if x[j]:
                out[i] += v * x[j]
        return out

    def matmul(self, other: "SparseIntMatrix") -> "SparseIntMatrix":
        if self.cols != other.rows:
            raise InvalidInput("shape mismatch in matmul")
        rows_b = other.row_dicts()
        acc: dict = {}
        for (i, k), v in self.entries.items():
            rb = rows_b.get(k)
            if not rb:
                continue
            for j, w in rb.items():
                key = (i, j)
                s = acc.get(key, 0) + v * w
                if s:
                    acc[key] = s
                else:
                    acc.pop(key, None)
        out = SparseIntMatrix(self.rows, other.cols)
        out.entries = acc
        return out

    def __eq__(self, other):
        return (isinstance(other, SparseIntMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.entries == other.entries)

    def __repr__(self):
        return f"SparseIntMatrix({self.rows}x{self.cols}, nnz={len(self.entries)})"

    def to_coordinate_text(self) -> str:
        lines = [f"{self.rows} {self.cols} {len(self.entries)}"]
        for (i, j) in sorted(self.entries):
            lines.append(f"{i} {j} {self.entries[(i, j)]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_coordinate_text(cls, text: str) -> "SparseIntMatrix":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines:
            raise InvalidInput("empty coordinate text")
        rows, cols, nnz = (int(x) for x in lines[0].split())
        mat = cls(rows, cols,
                  entries=(tuple(int(x) for x in ln.split()) for ln in lines[1:]))
        if mat.nnz() != nnz:
            raise InvalidInput("nnz header disagrees with entry count")
        return mat


@dataclass
class SmithDecomposition:
    diagonal: list
    rank: int
    transforms: tuple | None = None   # (U, V) as SparseIntMatrix, U*A*V = diag

    def __post_init__(self):
        for a, b in zip(self.diagonal, self.diagonal[1:]):
            if a == 0 or b % a != 0:
                raise InternalConsistencyError("invariant factor chain broken")


@dataclass
class AbelianGroup:
    """Finitely generated abelian group as free rank + invariant factors."""

    free_rank: int
    torsion: list = field(default_factory=list)

    def __post_init__(self):
        for t in self.torsion:
            if t <= 1:
                raise InvalidInput("torsion coefficients must be > 1")
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a != 0:
                raise InvalidInput("torsion list must be a divisibility chain")

    @property
    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def __eq__(self, other):
        return (isinstance(other, AbelianGroup) and self.free_rank == other.free_rank
                and self.torsion == other.torsion)

    def __hash__(self):
        return hash((self.free_rank, tuple(self.torsion)))

    def __repr__(self):
        parts = []
        if self.free_rank:
            parts.append(f"Z^{self.free_rank}" if self.free_rank > 1 else "Z")
        parts.extend(f"Z/{t}" for t in self.torsion)
        return " + ".join(parts) if parts else "0"

    def as_dict(self) -> dict:
        return {"free_rank": self.free_rank, "torsion": list(self.torsion)}


def quotient_group(n_generators: int, relation_diagonal) -> AbelianGroup:
    """Z^n modulo a relation lattice with the given SNF diagonal."""
    torsion = sorted(d for d in relation_diagonal if d > 1)
    rank = sum(1 for d in relation_diagonal if d != 0)
    return AbelianGroup(n_generators - rank, torsion)


# --- Smith normal form -------------------------------------------------------

def smith_normal_form(a: SparseIntMatrix, with_transforms: bool = False) -> SmithDecomposition:
    """SNF over Z. Pivoting: smallest magnitude, then sparsest row/col, then ids.

    With transforms, returns unimodular U (rows x rows) and V (cols x cols)
    with U*A*V = diag(d_1..d_r), verified by sparse recomputation.
    """
    row = a.row_dicts()
    col = a.col_dicts()
    urow = {i: {i: 1} for i in range(a.rows)} if with_transforms else None
    vcol = {j: {j: 1} for j in range(a.cols)} if with_transforms else None
    pivots = _snf_eliminate(row, col, urow, vcol)
    diagonal = [abs(v) for (_, _, v) in pivots]
    result = SmithDecomposition(diagonal, len(diagonal), None)
    if with_transforms:
        u, v = _assemble_transforms(a, pivots, urow, vcol)
        _verify_snf(a, diagonal, u, v)
        result.transforms = (u, v)
    return result


def _row_add(row, col, dst, src, c, urow):
    """row[dst] += c * row[src], mirrored into U."""
    for j, val in list(row.get(src, {}).items()):
        rd = row.setdefault(dst, {})
        new = rd.get(j, 0) + c * val
        if new:
            rd[j] = new
            col.setdefault(j, {})[dst] = new
        else:
            rd.pop(j, None)
            col[j].pop(dst, None)
    if urow is not None:
        ud = urow.setdefault(dst, {})
        for j, val in urow.get(src, {}).items():
            s = ud.get(j, 0) + c * val
            if s:
                ud[j] = s
            else:
                ud.pop(j, None)


def _col_add(row, col, dst, src, c, vcol):
    """col[dst] += c * col[src], mirrored into V."""
    for i, val in list(col.get(src, {}).items()):
        cd = col.setdefault(dst, {})
        new = cd.get(i, 0) + c * val
        if new:
            cd[i] = new
            row.setdefault(i, {})[dst] = new
        else:
            cd.pop(i, None)
            row[i].pop(dst, None)
    if vcol is not None:
        vd = vcol.setdefault(dst, {})
        for i, val in vcol.get(src, {}).items():
            s = vd.get(i, 0) + c * val
            if s:
                vd[i] = s
            else:
                vd.pop(i, None)


def _snf_eliminate(row, col, urow, vcol) -> list:
    """Diagonalize in place; returns [(pivot_row, pivot_col, value)] in order.

    Each recorded pivot divides everything recorded after it (the offender
    step enforces divisibility before a pivot is retired).
    """
    pivots = []
    while True:
        best, pivot = None, None
        for i in row:
            ri = row[i]
            for j, val in ri.items():
                key = (abs(val), (len(ri) - 1) * (len(col[j]) - 1), i, j)
                if best is None or key < best:
                    best, pivot = key, (i, j)
        if pivot is None:
            break
        pi, pj = pivot
        while True:
            pval = row[pi][pj]
            moved = False
            for i in sorted(col[pj]):
                if i == pi:
                    continue
                q = col[pj][i] // pval
                if q:
                    _row_add(row, col, i, pi, -q, urow)
                if row.get(i, {}).get(pj):
                    pi = i        # nonzero remainder is strictly smaller
                    moved = True
                    break
            if moved:
                continue
            pval = row[pi][pj]
            for j in sorted(row[pi]):
                if j == pj:
                    continue
                q = row[pi][j] // pval
                if q:
                    _col_add(row, col, j, pj, -q, vcol)
                if col.get(j, {}).get(pi):
                    pj = j
                    moved = True
                    break
            if moved:
                continue
            if len(col[pj]) > 1 or len(row[pi]) > 1:
                continue
            pval = row[pi][pj]
            offender = None
            for i in row:
                if i == pi:
                    continue
                for val in row[i].values():
                    if val % pval != 0:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            _row_add(row, col, pi, offender, 1, urow)
        pval = row[pi].pop(pj)
        col[pj].pop(pi)
        if not row[pi]:
            del row[pi]
        if not col[pj]:
            del col[pj]
        if pval < 0 and urow is not None:
            urow[pi] = {j: -v for j, v in urow.get(pi, {}).items()}
        pivots.append((pi, pj, pval))
        for d in (row, col):
            for k in [k for k, vals in d.items() if not vals]:
                del d[k]
    return pivots


def _assemble_transforms(a: SparseIntMatrix, pivots, urow, vcol):
    """Permute accumulated transforms so pivot t lands at diagonal slot t."""
    row_order = [pi for (pi, _, _) in pivots]
    row_order += sorted(set(range(a.rows)) - set(row_order))
    col_order = [pj for (_, pj, _) in pivots]
    col_order += sorted(set(range(a.cols)) - set(col_order))
    u = SparseIntMatrix(a.rows, a.rows)
    for t, pi in enumerate(row_order):
        for j, val in urow.get(pi, {}).items():
            u.entries[(t, j)] = val
    v = SparseIntMatrix(a.cols, a.cols)
    for t, pj in enumerate(col_order):
        for i, val in vcol.get(pj, {}).items():
            v.entries[(i, t)] = val
    return u, v


def _verify_snf(a: SparseIntMatrix, diagonal, u, v):
    prod = u.matmul(a).matmul(v)
    expected = {(t, t): d for t, d in enumerate(diagonal)}
    if prod.entries != expected:
        raise InternalConsistencyError("U*A*V does not match the Smith diagonal")


# --- mod-p rank and right invertibility --------------------------------------

def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def rank_mod_prime(a: SparseIntMatrix, p: int) -> int:
    """Rank of A over F_p by sparse elimination."""
    if not _is_prime(p):
        raise InvalidInput(f"{p} is not prime")
    return rank_mod_prime_rows(a.row_dicts().values(), p)


def rank_mod_prime_rows(rows_iter, p: int) -> int:
    """Rank over F_p of rows given as {col: value} dicts (consumed lazily)."""
    pivots: dict = {}   # col -> reduced row with 1 at col
    rank = 0
    for r in rows_iter:
        r = {j: v % p for j, v in r.items() if v % p}
        while r:
            j = min(r)
            piv = pivots.get(j)
            if piv is None:
                inv = pow(r[j], -1, p)
                pivots[j] = {jj: (vv * inv) % p for jj, vv in r.items()}
                rank += 1
                break
            c = r[j]
            for jj, vv in piv.items():
                nv = (r.get(jj, 0) - c * vv) % p
                if nv:
                    r[jj] = nv
                else:
                    r.pop(jj, None)
    return rank


def has_right_inverse_mod_m(a: SparseIntMatrix, ring) -> bool:
    """A (k x n, k <= n) is unimodular over Z/m iff rank_p(A) = k for all p | m."""
    if a.rows > a.cols:
        raise InvalidInput("right inverse requires rows <= cols")
    if a.rows == 0:
        return True
    return all(rank_mod_prime(a, p) == a.rows for p in ring.primes)


# --- solving over Z/m via SNF transforms -------------------------------------

def solve_mod(a_dense, b, m: int):
    """One solution x of A x = b (mod m) with x reduced mod m, or None."""
    a = SparseIntMatrix.from_dense(a_dense)
    snf = smith_normal_form(a, with_transforms=True)
    u, v = snf.transforms
    d = snf.diagonal
    c = [x % m for x in u.matvec(list(b))]
    y = [0] * a.cols
    for i in range(a.rows):
        di = d[i] if i < len(d) else 0
        ci = c[i]
        if di == 0:
            if ci % m != 0:
                return None
            continue
        g = math.gcd(di, m)
        if ci % g != 0:
            return None
        mm = m // g
        y[i] = ((ci // g) * pow((di // g) % mm, -1, mm)) % mm if mm > 1 else 0
    return [x % m for x in v.matvec(y)]


def kernel_mod(a_dense, m: int) -> list:
    """Generating set of {x : A x = 0 (mod m)}, vectors reduced mod m."""
    a = SparseIntMatrix.from_dense(a_dense)
    n = a.cols
    if n == 0:
        return []
    snf = smith_normal_form(a, with_transforms=True)
    _, v = snf.transforms
    vrows = v.row_dicts()
    d = snf.diagonal
    gens, seen = [], set()
    for i in range(n):
        di = d[i] if i < len(d) else 0
        scale = m // math.gcd(di, m) if di else 1
        if scale % m == 0:
            continue
        g = tuple((vrows.get(r, {}).get(i, 0) * scale) % m for r in range(n))
        if any(g) and g not in seen:
            seen.add(g)
            gens.append(list(g))
    return gens


def dense_mul(a, b):
    """Product of small dense integer matrices (lists of rows)."""
    n, k = len(a), len(b)
    m = len(b[0]) if k else 0
    out = [[0] * m for _ in range(n)]
    for i in range(n):
        ai, oi = a[i], out[i]
        for t in range(k):
            v = ai[t]
            if v:
                bt = b[t]
                for j in range(m):
                    if bt[j]:
                        oi[j] += v * bt[j]
    return out


def dense_identity(n: int):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def det_int(mat) -> int:
    """Fraction-free (Bareiss) determinant of a small dense integer matrix."""
    n = len(mat)
    if n == 0:
        return 1
    a = [list(r) for r in mat]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def inverse_mod(a_dense, m: int):
    """Inverse of a square matrix mod m, or None if not invertible."""
    n = len(a_dense)
    cols = []
    for j in range(n):
        e = [int(i == j) for i in range(n)]
        x = solve_mod(a_dense, e, m)
        if x is None:
            return None
        cols.append(x)
    inv = [[cols[j][i] for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(n):
            if sum(a_dense[i][t] * inv[t][j] for t in range(n)) % m != (i == j):
                return None
    return inv
