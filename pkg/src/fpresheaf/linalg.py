"""Exact linear algebra over the prime field GF(p).

Matrices are plain numpy integer arrays with entries in ``[0, p)``.  A map
in ``hom(F^a, F^b)`` is a ``b x a`` matrix acting on column vectors.  Over
GF(2) row reduction runs on bit-packed rows (64 columns per word); other
primes use vectorised modular row operations.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product

import numpy as np

SUPPORTED_PRIMES = (2, 3, 5)
DEFAULT_CAP = 2**20


class CapExceeded(RuntimeError):
    """An enumeration would exceed the configured element cap."""

    def __init__(self, what: str, size: int, cap: int):
        super().__init__(f"{what}: {size} elements exceeds cap {cap}")
        self.what = what
        self.size = size
        self.cap = cap


def check_prime(p: int) -> int:
    if p not in SUPPORTED_PRIMES:
        raise ValueError(f"unsupported prime {p}; expected one of {SUPPORTED_PRIMES}")
    return p


def as_fp(M, p: int) -> np.ndarray:
    return np.asarray(M, dtype=np.int64) % p


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.int64)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def matmul(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    """Product mod p.  Float BLAS is exact while partial sums stay below 2**53."""
    if A.shape[1] == 0 or A.shape[0] == 0 or B.shape[1] == 0:
        return np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    if A.shape[1] * (p - 1) ** 2 < 2**52:
        C = A.astype(np.float64) @ B.astype(np.float64)
        return np.fmod(C, p).astype(np.int64)
    return (A @ B) % p


@lru_cache(maxsize=None)
def inverse_table(p: int) -> tuple[int, ...]:
    return (0,) + tuple(pow(x, p - 2, p) for x in range(1, p))


@lru_cache(maxsize=None)
def primitive_root(p: int) -> int:
    for g in range(1, p):
        if len({pow(g, k, p) for k in range(1, p)}) == p - 1:
            return g
    raise ValueError(p)


# ---------------------------------------------------------------------------
# row reduction


def _rref_gf2(M: np.ndarray) -> tuple[np.ndarray, list[int]]:
    m, n = M.shape
    nbytes = (n + 63) // 64 * 8
    packed = np.packbits(M.astype(np.uint8), axis=1, bitorder="little")
    if packed.shape[1] < nbytes:
        packed = np.pad(packed, ((0, 0), (0, nbytes - packed.shape[1])))
    P = np.ascontiguousarray(packed).view(np.uint64)
    pivots: list[int] = []
    r = 0
    one = np.uint64(1)
    for c in range(n):
        if r == m:
            break
        w = c >> 6
        bit = one << np.uint64(c & 63)
        colbits = (P[r:, w] & bit) != 0
        if not colbits.any():
            continue
        k = r + int(np.argmax(colbits))
        if k != r:
            P[[r, k]] = P[[k, r]]
        hits = np.flatnonzero(P[:, w] & bit)
        hits = hits[hits != r]
        if hits.size:
            P[hits] ^= P[r]
        pivots.append(c)
        r += 1
    out = np.unpackbits(P.view(np.uint8), axis=1, bitorder="little", count=n)
    return out.astype(np.int64), pivots


def _rref_modp(M: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    R = M.copy()
    m, n = R.shape
    inv = np.array(inverse_table(p), dtype=np.int64)
    pivots: list[int] = []
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            R[[r, k]] = R[[k, r]]
        R[r] = (R[r] * inv[R[r, c]]) % p
        hits = np.flatnonzero(R[:, c])
        hits = hits[hits != r]
        if hits.size:
            R[hits] = (R[hits] - np.outer(R[hits, c], R[r])) % p
        pivots.append(c)
        r += 1
    return R, pivots


def rref(M, p: int) -> tuple[np.ndarray, int]:
    """Reduced row-echelon form and rank.

    Pivoting is deterministic: leftmost column first, then the smallest row
    index holding a nonzero entry in that column.
    """
    R, pivots = rref_pivots(M, p)
    return R, len(pivots)


def rref_pivots(M, p: int) -> tuple[np.ndarray, list[int]]:
    A = as_fp(M, p)
    if A.ndim != 2:
        raise ValueError("rref expects a 2-d matrix")
    if A.size == 0:
        return A.copy(), []
    if p == 2:
        return _rref_gf2(A)
    return _rref_modp(A, p)


def rank(M, p: int) -> int:
    return rref(M, p)[1]


def row_basis(M, p: int) -> tuple[np.ndarray, list[int]]:
    """RREF basis (nonzero rows only) of the row space of M, with pivots."""
    R, pivots = rref_pivots(M, p)
    return R[: len(pivots)].copy(), pivots


def kernel_basis(M, p: int) -> np.ndarray:
    """Basis of {x : M x = 0} as the rows of a ``k x cols`` matrix."""
    A = as_fp(M, p)
    if A.ndim != 2:
        raise ValueError("kernel_basis expects a 2-d matrix")
    cols = A.shape[1]
    if A.shape[0] == 0:
        return identity(cols)
    R, pivots = rref_pivots(A, p)
    free = [c for c in range(cols) if c not in set(pivots)]
    K = zeros(len(free), cols)
    for i, f in enumerate(free):
        K[i, f] = 1
        for r, pc in enumerate(pivots):
            K[i, pc] = (-R[r, f]) % p
    return K


def image_basis(M, p: int) -> np.ndarray:
    """Basis of the column space of M, returned as rows."""
    A = as_fp(M, p)
    return row_basis(A.T, p)[0]


def solve(M, b, p: int):
    """Some x with ``M x = b``, or ``None`` when the system is inconsistent."""
    A = as_fp(M, p)
    v = as_fp(b, p).reshape(-1)
    if A.shape[0] != v.shape[0]:
        raise ValueError(f"dimension mismatch: {A.shape} vs {v.shape}")
    aug = np.concatenate([A, v[:, None]], axis=1)
    R, pivots = rref_pivots(aug, p)
    n = A.shape[1]
    if n in pivots:
        return None
    x = np.zeros(n, dtype=np.int64)
    for r, pc in enumerate(pivots):
        x[pc] = R[r, n]
    return x


def inverse(M, p: int) -> np.ndarray:
    A = as_fp(M, p)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("inverse of a non-square matrix")
    R, pivots = rref_pivots(np.concatenate([A, identity(n)], axis=1), p)
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return R[:, n:].copy()


def reduce_mod(vectors: np.ndarray, basis: np.ndarray, pivots: list[int], p: int) -> np.ndarray:
    """Normal form of row vectors modulo the span of an RREF basis."""
    V = as_fp(vectors, p)
    if not pivots:
        return V
    return (V - matmul(V[:, pivots], basis, p)) % p


def _rows(vectors, width: int, p: int) -> np.ndarray:
    V = as_fp(vectors, p)
    if width == 0:
        return zeros(0, 0)
    return V.reshape(-1, width)


@dataclass(frozen=True)
class Subspace:
    """A subspace of F_p^n given by an RREF basis of row vectors."""

    ambient_dim: int
    basis: np.ndarray
    pivots: tuple[int, ...]
    p: int

    @classmethod
    def span(cls, vectors, ambient_dim: int, p: int) -> "Subspace":
        V = _rows(vectors, ambient_dim, p)
        B, piv = row_basis(V, p) if V.size else (zeros(0, ambient_dim), [])
        return cls(ambient_dim, B, tuple(piv), p)

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def normal_form(self, vectors) -> np.ndarray:
        return reduce_mod(vectors, self.basis, list(self.pivots), self.p)

    def contains(self, vectors) -> bool:
        V = _rows(vectors, self.ambient_dim, self.p)
        return not self.normal_form(V).any()

    def join(self, vectors) -> "Subspace":
        V = _rows(vectors, self.ambient_dim, self.p)
        if V.size == 0:
            return self
        return Subspace.span(np.concatenate([self.basis, V]), self.ambient_dim, self.p)

    def complement_columns(self) -> list[int]:
        piv = set(self.pivots)
        return [c for c in range(self.ambient_dim) if c not in piv]

    def quotient_matrix(self) -> np.ndarray:
        """Matrix of the projection F^n -> F^n / self in the non-pivot coordinates."""
        free = self.complement_columns()
        Q = zeros(len(free), self.ambient_dim)
        pos = {c: i for i, c in enumerate(free)}
        for c in free:
            Q[pos[c], c] = 1
        for r, pc in enumerate(self.pivots):
            # e_pc is congruent to e_pc - row_r, which has support on free columns
            Q[:, pc] = (-self.basis[r, free]) % self.p
        return Q

    def lift_matrix(self) -> np.ndarray:
        """Section of the projection: quotient coordinates -> standard vectors."""
        free = self.complement_columns()
        L = zeros(self.ambient_dim, len(free))
        for i, c in enumerate(free):
            L[c, i] = 1
        return L


# ---------------------------------------------------------------------------
# enumeration


def hom_count(a: int, b: int, p: int) -> int:
    return p ** (a * b)


def enumerate_hom(a: int, b: int, p: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """All ``b x a`` matrices, lexicographic in the row-major entry sequence."""
    n = hom_count(a, b, p)
    if n > cap:
        raise CapExceeded(f"hom(F^{a}, F^{b})", n, cap)
    k = a * b
    if k == 0:
        return np.zeros((1, b, a), dtype=np.int64)
    idx = np.arange(n, dtype=np.int64)
    digits = np.empty((n, k), dtype=np.int64)
    for pos in range(k - 1, -1, -1):
        digits[:, pos] = idx % p
        idx //= p
    return digits.reshape(n, b, a)


def hom_index(f: np.ndarray, p: int) -> int:
    """Position of f in the canonical order of :func:`enumerate_hom`."""
    out = 0
    for x in np.asarray(f, dtype=np.int64).reshape(-1):
        out = out * p + int(x)
    return out


def hom_indices(fs: np.ndarray, p: int) -> np.ndarray:
    """Vectorised :func:`hom_index` over a stack of matrices."""
    flat = np.asarray(fs, dtype=np.int64).reshape(fs.shape[0], -1)
    k = flat.shape[1]
    weights = p ** np.arange(k - 1, -1, -1, dtype=np.int64)
    return flat @ weights


def enumerate_surjections(a: int, n: int, p: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """All full-rank ``n x a`` matrices (surjections F^a -> F^n), canonical order."""
    if a < n:
        return np.zeros((0, n, a), dtype=np.int64)
    homs = enumerate_hom(a, n, p, cap)
    keep = [i for i in range(homs.shape[0]) if rank(homs[i], p) == n]
    return homs[keep]


def surjection_count(a: int, n: int, p: int) -> int:
    if a < n:
        return 0
    out = 1
    for i in range(n):
        out *= p**a - p**i
    return out


def gaussian_binomial(m: int, k: int, p: int) -> int:
    """Number of k-dimensional subspaces of F_p^m."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > m:
        return 0
    num = den = 1
    for i in range(k):
        num *= p ** (m - i) - 1
        den *= p ** (i + 1) - 1
    return num // den


def all_vectors(n: int, p: int) -> np.ndarray:
    """All vectors of F_p^n; row i has little-endian base-p digits of i."""
    count = p**n
    idx = np.arange(count, dtype=np.int64)
    out = np.empty((count, n), dtype=np.int64)
    for j in range(n):
        out[:, j] = idx % p
        idx //= p
    return out


def vector_indices(V: np.ndarray, p: int) -> np.ndarray:
    """Inverse of :func:`all_vectors` for a stack of row vectors."""
    n = V.shape[1]
    weights = p ** np.arange(n, dtype=np.int64)
    return V @ weights


def enumerate_rref(k: int, m: int, p: int) -> list[np.ndarray]:
    """All k x m matrices in RREF of rank k, i.e. the k-dimensional subspaces of F_p^m.

    Ordered by pivot set (lexicographic), then by free entries in canonical order.
    """
    out: list[np.ndarray] = []
    if k > m:
        return out
    for piv in combinations(range(m), k):
        slots = [(i, j) for i in range(k) for j in range(piv[i] + 1, m) if j not in piv]
        for vals in product(range(p), repeat=len(slots)):
            R = zeros(k, m)
            for i, c in enumerate(piv):
                R[i, c] = 1
            for (i, j), v in zip(slots, vals):
                R[i, j] = v
            out.append(R)
    return out


def subspace_key(R: np.ndarray) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(x) for x in row) for row in R)
