"""Exact arithmetic over prime fields GF(q) and the matrix/vector algebra
used to realize linear hash maps on symbol blocks.

Everything here is plain modular integer arithmetic on numpy int64 arrays.
Vectors of length n over GF(q) double as blocks of n source symbols, and are
interchangeably referred to by their integer index in [0, q**n) using the
big-endian digit convention (symbol 0 is the most significant digit).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31)


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    d = 2
    while d * d <= q:
        if q % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class FieldSpec:
    """A prime field GF(q); element values live in [0, q)."""

    q: int = 2

    def __post_init__(self):
        if not is_prime(self.q):
            raise ValueError(f"field modulus must be prime, got {self.q}")


@dataclass(frozen=True)
class FieldVector:
    q: int
    elems: tuple

    def __post_init__(self):
        if any(e < 0 or e >= self.q for e in self.elems):
            raise ValueError("vector element out of field range")

    def __len__(self):
        return len(self.elems)

    def as_array(self) -> np.ndarray:
        return np.array(self.elems, dtype=np.int64)


def field_ops(q, a, b):
    """Return (a+b, a*b, a^{-1}) over GF(q).

    The inverse is of the first argument; asking for the inverse of zero
    raises ZeroDivisionError("no inverse").
    """
    if not is_prime(q):
        raise ValueError(f"field modulus must be prime, got {q}")
    for v in (a, b):
        if v < 0 or v >= q:
            raise ValueError(f"element {v} outside [0, {q})")
    s = (a + b) % q
    p = (a * b) % q
    if a == 0:
        raise ZeroDivisionError("no inverse")
    inv = pow(a, q - 2, q)
    return s, p, inv


def inverse_table(q: int) -> np.ndarray:
    """Multiplicative inverses for all nonzero elements; index 0 is unused (0)."""
    t = np.zeros(q, dtype=np.int64)
    for a in range(1, q):
        t[a] = pow(a, q - 2, q)
    return t


@dataclass
class SparseMatrix:
    """Matrix over GF(q) stored as (row, col, value) triples.

    Values are nonzero field elements and each (row, col) pair appears at
    most once.  Applied densely; n is small throughout this package.
    """

    q: int
    rows: int
    cols: int
    entries: list = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for (r, c, v) in self.entries:
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise ValueError(f"entry ({r},{c}) out of bounds")
            if not (1 <= v < self.q):
                raise ValueError(f"entry value {v} not a nonzero element of GF({self.q})")
            if (r, c) in seen:
                raise ValueError(f"duplicate entry at ({r},{c})")
            seen.add((r, c))

    def dense(self) -> np.ndarray:
        m = np.zeros((self.rows, self.cols), dtype=np.int64)
        for (r, c, v) in self.entries:
            m[r, c] = v
        return m

    @classmethod
    def from_dense(cls, a: np.ndarray, q: int) -> "SparseMatrix":
        a = np.asarray(a, dtype=np.int64) % q
        entries = [(int(r), int(c), int(a[r, c]))
                   for r in range(a.shape[0]) for c in range(a.shape[1])
                   if a[r, c] != 0]
        return cls(q=q, rows=a.shape[0], cols=a.shape[1], entries=entries)

    def to_text(self) -> str:
        lines = [f"{self.q} {self.rows} {self.cols}"]
        for (r, c, v) in sorted(self.entries):
            lines.append(f"{r} {c} {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SparseMatrix":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        q, rows, cols = (int(t) for t in lines[0].split())
        entries = []
        for ln in lines[1:]:
            r, c, v = (int(t) for t in ln.split())
            entries.append((r, c, v))
        return cls(q=q, rows=rows, cols=cols, entries=entries)


def matvec(m: SparseMatrix, v) -> np.ndarray:
    """Exact product M v over GF(q)."""
    varr = v.as_array() if isinstance(v, FieldVector) else np.asarray(v, dtype=np.int64)
    if isinstance(v, FieldVector) and v.q != m.q:
        raise ValueError("field mismatch between matrix and vector")
    if varr.shape[-1] != m.cols:
        raise ValueError(f"dimension mismatch: matrix has {m.cols} cols, vector length {varr.shape[-1]}")
    out = np.zeros(m.rows, dtype=np.int64)
    for (r, c, val) in m.entries:
        out[r] += val * varr[c]
    return out % m.q


def matmul_blocks(dense: np.ndarray, blocks: np.ndarray, q: int) -> np.ndarray:
    """Apply a dense GF(q) matrix to many column vectors at once.

    blocks has shape (count, cols); returns shape (count, rows).
    """
    return (blocks.astype(np.int64) @ dense.T) % q


def sample_sparse_matrix(rows, cols, column_degree, q, seed) -> SparseMatrix:
    """Sample a sparse matrix with exactly column_degree nonzeros per column.

    Nonzero positions are uniform distinct rows per column, values uniform
    over the nonzero field elements.  Deterministic in seed.
    """
    if column_degree > rows:
        raise ValueError(f"column_degree {column_degree} exceeds row count {rows}")
    rng = np.random.default_rng(seed)
    entries = []
    for c in range(cols):
        support = rng.choice(rows, size=column_degree, replace=False)
        if q == 2:
            vals = np.ones(column_degree, dtype=np.int64)
        else:
            vals = rng.integers(1, q, size=column_degree)
        entries.extend((int(r), c, int(v)) for r, v in zip(support, vals))
    return SparseMatrix(q=q, rows=rows, cols=cols, entries=entries)


def default_column_degree(cols: int) -> int:
    return max(2, int(np.ceil(np.log2(max(cols, 2)))))


# ---------------------------------------------------------------------------
# Linear solving over GF(q): used to enumerate hash-constraint cosets.
# ---------------------------------------------------------------------------

class AffineSolver:
    """Row-reduces A once, then solves A x = b for many right-hand sides.

    Solutions of A x = b form either the empty set or an affine subspace
    x0 + span(null basis); enumerate() lists all of them, which is how the
    constraint sets (cosets) of linear hash maps are traversed.
    """

    def __init__(self, dense: np.ndarray, q: int):
        self.q = q
        a = np.asarray(dense, dtype=np.int64) % q
        self.rows, self.cols = a.shape
        inv = inverse_table(q)
        # Gauss-Jordan over GF(q), tracking the row operations so that the
        # same reduction can be replayed on any right-hand side later.
        red = a.copy()
        ops = np.eye(self.rows, dtype=np.int64)
        pivots = []
        r = 0
        for c in range(self.cols):
            if r >= self.rows:
                break
            pr = None
            for rr in range(r, self.rows):
                if red[rr, c] != 0:
                    pr = rr
                    break
            if pr is None:
                continue
            if pr != r:
                red[[r, pr]] = red[[pr, r]]
                ops[[r, pr]] = ops[[pr, r]]
            scale = inv[red[r, c]]
            red[r] = (red[r] * scale) % q
            ops[r] = (ops[r] * scale) % q
            for rr in range(self.rows):
                if rr != r and red[rr, c] != 0:
                    f = red[rr, c]
                    red[rr] = (red[rr] - f * red[r]) % q
                    ops[rr] = (ops[rr] - f * ops[r]) % q
            pivots.append(c)
            r += 1
        self.rank = r
        self.red = red
        self.ops = ops
        self.pivots = pivots
        free = [c for c in range(self.cols) if c not in pivots]
        self.free_cols = free
        # Null-space basis: one vector per free column.
        basis = np.zeros((len(free), self.cols), dtype=np.int64)
        for k, fc in enumerate(free):
            basis[k, fc] = 1
            for pi, pc in enumerate(pivots):
                basis[k, pc] = (-red[pi, fc]) % q
        self.null_basis = basis

    def particular(self, b) -> np.ndarray | None:
        """One solution of A x = b, or None when the system is inconsistent."""
        b = np.asarray(b, dtype=np.int64) % self.q
        rb = (self.ops @ b) % self.q
        if np.any(rb[self.rank:] != 0):
            return None
        x = np.zeros(self.cols, dtype=np.int64)
        for pi, pc in enumerate(self.pivots):
            x[pc] = rb[pi]
        return x

    def nullity(self) -> int:
        return len(self.free_cols)

    def enumerate(self, b) -> np.ndarray | None:
        """All solutions of A x = b as an array (q**nullity, cols)."""
        x0 = self.particular(b)
        if x0 is None:
            return None
        k = self.nullity()
        if k == 0:
            return x0[None, :]
        q = self.q
        coeffs = np.indices((q,) * k).reshape(k, -1).T
        combos = (coeffs @ self.null_basis) % q
        return (combos + x0) % q
