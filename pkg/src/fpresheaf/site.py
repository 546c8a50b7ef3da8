"""The truncated category of spaces F_p^d, 0 <= d <= N, and its generators.

Generator keys:

* ``("t", d, i, j)``: the transvection ``I + e_ij`` on F^d (i != j);
* ``("s", d)``: the scaling ``diag(g, 1, ..., 1)`` on F^d, g a primitive root (p > 2);
* ``("i", d)``: the inclusion F^d -> F^{d+1}, matrix ``[I; 0]``;
* ``("p", d)``: the projection F^{d+1} -> F^d, matrix ``[I 0]``.

A word ``(k1, ..., km)`` stands for the composite ``g(k1) o ... o g(km)``.
Contravariant objects therefore apply ``X(k1)`` first.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Any, Protocol

import numpy as np

from . import linalg as la

Key = tuple


class WindowExceeded(ValueError):
    """A requested dimension lies outside the truncation window."""


class FunctorLike(Protocol):
    site: "TruncatedSite"

    def generator_action(self, key: Key) -> Any: ...

    def identity_action(self, d: int) -> Any: ...

    def compose_actions(self, first: Any, then: Any) -> Any: ...


@dataclass(frozen=True)
class Generator:
    key: Key
    src: int
    tgt: int
    matrix: np.ndarray


@dataclass(frozen=True)
class CanonicalFactorization:
    """``f = tau o incl o proj o sigma`` for a map of rank r."""

    src: int
    tgt: int
    rank: int
    sigma: tuple[Key, ...]
    proj: tuple[Key, ...]
    incl: tuple[Key, ...]
    tau: tuple[Key, ...]

    @property
    def word(self) -> tuple[Key, ...]:
        return self.tau + self.incl + self.proj + self.sigma


class TruncatedSite:
    def __init__(self, p: int = 2, N: int = 4, cap: int = la.DEFAULT_CAP):
        la.check_prime(p)
        if not 0 <= N <= 5:
            raise ValueError(f"window must lie in 0..5, got {N}")
        self.p = p
        self.N = N
        self.cap = cap
        self.g = la.primitive_root(p)
        self.generators: dict[Key, Generator] = {}
        for d in range(N + 1):
            for i in range(d):
                for j in range(d):
                    if i != j:
                        M = la.identity(d)
                        M[i, j] = 1
                        self._add(("t", d, i, j), d, d, M)
            if p > 2 and d >= 1:
                M = la.identity(d)
                M[0, 0] = self.g
                self._add(("s", d), d, d, M)
            if d < N:
                self._add(("i", d), d, d + 1, self.inclusion(d, d + 1))
                self._add(("p", d), d + 1, d, self.projection(d + 1, d))
        self._factor_cache: dict[tuple[int, int, int], CanonicalFactorization] = {}
        self._lock = threading.Lock()

    def _add(self, key: Key, src: int, tgt: int, M: np.ndarray) -> None:
        self.generators[key] = Generator(key, src, tgt, M)

    def __repr__(self) -> str:
        return f"TruncatedSite(p={self.p}, N={self.N})"

    def check_dim(self, *dims: int) -> None:
        for d in dims:
            if not 0 <= d <= self.N:
                raise WindowExceeded(f"dimension {d} outside window 0..{self.N}")

    @staticmethod
    def inclusion(a: int, b: int) -> np.ndarray:
        """Standard map F^a -> F^b onto the first a coordinates (a <= b)."""
        M = la.zeros(b, a)
        M[np.arange(a), np.arange(a)] = 1
        return M

    @staticmethod
    def projection(a: int, b: int) -> np.ndarray:
        """Standard map F^a -> F^b keeping the first b coordinates (b <= a)."""
        M = la.zeros(b, a)
        M[np.arange(b), np.arange(b)] = 1
        return M

    def hom(self, a: int, b: int) -> np.ndarray:
        self.check_dim(a, b)
        return la.enumerate_hom(a, b, self.p, self.cap)

    # -- factorization ------------------------------------------------------

    def _transvection_power(self, d: int, i: int, j: int, c: int) -> list[Key]:
        return [("t", d, i, j)] * (c % self.p)

    def _whitehead(self, d: int, i: int, j: int, u: int) -> list[Key]:
        """Word for ``E_ij(u) E_ji(-1/u) E_ij(u)``."""
        p = self.p
        uinv = la.inverse_table(p)[u % p]
        return (
            self._transvection_power(d, i, j, u)
            + self._transvection_power(d, j, i, -uinv)
            + self._transvection_power(d, i, j, u)
        )

    def invertible_word(self, M: np.ndarray) -> list[Key]:
        """Generator word for an invertible d x d matrix."""
        p = self.p
        inv = la.inverse_table(p)
        A = la.as_fp(M, p).copy()
        d = A.shape[0]
        left: list[Key] = []  # word for L_1^{-1} ... L_k^{-1}
        for c in range(d):
            if A[c, c] == 0:
                r = c + 1 + int(np.flatnonzero(A[c + 1 :, c])[0])
                A[c] = (A[c] + A[r]) % p
                left += self._transvection_power(d, c, r, -1)
            piv = inv[A[c, c]]
            for r in range(d):
                if r != c and A[r, c]:
                    coef = (A[r, c] * piv) % p
                    A[r] = (A[r] - coef * A[c]) % p
                    left += self._transvection_power(d, r, c, coef)
        diag = [int(x) for x in np.diag(A)]
        tail: list[Key] = []
        for i in range(d - 1, 0, -1):
            u = diag[i]
            if u == 1:
                continue
            v = inv[u]
            # diag(v, 1/v) on coordinates (i-1, i) via two Whitehead words
            tail += self._whitehead(d, i - 1, i, v) + self._whitehead(d, i - 1, i, -1)
            diag[i - 1] = (diag[i - 1] * u) % p
            diag[i] = 1
        head: list[Key] = []
        if d and diag[0] != 1:
            k = next(k for k in range(p - 1) if pow(self.g, k, p) == diag[0])
            head = [("s", d)] * k
        return left + head + tail

    def factor(self, f) -> CanonicalFactorization:
        p = self.p
        F = la.as_fp(f, p)
        b, a = F.shape
        self.check_dim(a, b)
        ck = (a, b, la.hom_index(F, p))
        hit = self._factor_cache.get(ck)
        if hit is not None:
            return hit
        aug = np.concatenate([F, la.identity(b)], axis=1)
        RE, _ = la.rref_pivots(aug, p)
        R, E = RE[:, :a], RE[:, a:]
        _, pivots = la.rref_pivots(F, p)
        r = len(pivots)
        free = [j for j in range(a) if j not in set(pivots)]
        sigma = la.zeros(a, a)
        sigma[:r] = R[:r]
        for k, j in enumerate(free):
            sigma[r + k, j] = 1
        tau = la.inverse(E, p)
        fac = CanonicalFactorization(
            src=a,
            tgt=b,
            rank=r,
            sigma=tuple(self.invertible_word(sigma)),
            proj=tuple(("p", d) for d in range(r, a)),
            incl=tuple(("i", d) for d in range(b - 1, r - 1, -1)),
            tau=tuple(self.invertible_word(tau)),
        )
        with self._lock:
            self._factor_cache[ck] = fac
        return fac

    def word(self, f) -> tuple[Key, ...]:
        return self.factor(f).word

    def recompose(self, word, src: int) -> np.ndarray:
        """Matrix of ``g(k1) o ... o g(km)``; ``src`` is needed for empty words."""
        M = la.identity(src)
        for key in reversed(tuple(word)):
            g = self.generators[key]
            if g.src != M.shape[0]:
                raise ValueError(f"word is not composable at {key}")
            M = la.matmul(g.matrix, M, self.p)
        return M

    # -- contravariant actions ---------------------------------------------

    def act_through(self, X: FunctorLike, f) -> Any:
        """``X(f)`` obtained by composing generator actions along ``factor(f)``."""
        F = la.as_fp(f, self.p)
        b, a = F.shape
        cache = _action_cache(X)
        ck = (a, b, la.hom_index(F, self.p))
        hit = cache.get(ck)
        if hit is not None:
            return hit
        out = X.identity_action(b)
        for key in self.word(F):
            out = X.compose_actions(out, X.generator_action(key))
        with self._lock:
            cache[ck] = out
        return out

    def action_table(self, X: FunctorLike, a: int, b: int) -> list:
        return [self.act_through(X, f) for f in self.hom(a, b)]

    # -- monoid generators of End(F^d) -------------------------------------

    def monoid_generators(self, d: int) -> list[tuple[str, np.ndarray]]:
        """A generating set of End(F^d) as a monoid.

        A transvection and the cyclic permutation generate SL_d; the scaling
        adds GL_d when p > 2, and one corank-one idempotent reaches every rank.
        """
        out: list[tuple[str, np.ndarray]] = []
        if d == 0:
            return out
        if d >= 2:
            E = la.identity(d)
            E[0, 1] = 1
            out.append(("E01", E))
            C = la.zeros(d, d)
            C[(np.arange(d) + 1) % d, np.arange(d)] = 1
            out.append(("cycle", C))
        if self.p > 2:
            D = la.identity(d)
            D[0, 0] = self.g
            out.append(("scale", D))
        P = la.identity(d)
        P[d - 1, d - 1] = 0
        out.append(("idem", P))
        return out

    def monoid_actions(self, X: FunctorLike, d: int | None = None) -> list[Any]:
        d = self.N if d is None else d
        return [self.act_through(X, M) for _, M in self.monoid_generators(d)]

    def generators_between(self, src: int | None = None, tgt: int | None = None) -> list[Generator]:
        return [
            g
            for g in self.generators.values()
            if (src is None or g.src == src) and (tgt is None or g.tgt == tgt)
        ]


def _action_cache(X) -> dict:
    cache = getattr(X, "_act_cache", None)
    if cache is None:
        cache = {}
        try:
            object.__setattr__(X, "_act_cache", cache)
        except AttributeError:
            pass
    return cache


# ---------------------------------------------------------------------------
# functoriality schedule


@dataclass(frozen=True)
class Violation:
    """A composable pair (f: F^a -> F^b, g: F^b -> F^c) with X(g o f) != X(f) o X(g)."""

    f: np.ndarray
    g: np.ndarray

    def __str__(self) -> str:
        return f"f={self.f.tolist()} g={self.g.tolist()}"


def _action_cost(X, d: int) -> int:
    sizes = getattr(X, "sizes", None)
    if sizes is not None:
        return max(int(sizes[d]), 1)
    return max(int(X.dims[d]), 1) ** 2


def check_functoriality(
    X: FunctorLike,
    seed: int = 0,
    exhaustive_dim: int = 3,
    samples: int = 150,
    budget: int = 60_000_000,
) -> Violation | None:
    """Return the first composable pair violating functoriality, or None.

    All composable pairs among dimensions <= ``exhaustive_dim`` are checked
    when p = 2 and the work fits ``budget``; otherwise those dimensions are
    sampled.  Seeded random pairs over the whole window are always added.
    """
    site = X.site
    p = site.p
    top = min(exhaustive_dim, site.N)
    dims = range(top + 1)
    cost = sum(
        la.hom_count(a, b, p) * la.hom_count(b, c, p) * _action_cost(X, c) * _action_cost(X, a)
        for a in dims
        for b in dims
        for c in dims
    )
    if p == 2 and cost <= budget:
        tables = {(a, b): site.action_table(X, a, b) for a in dims for b in dims}
        for a in dims:
            for b in dims:
                homs_ab = site.hom(a, b)
                for c in dims:
                    homs_bc = site.hom(b, c)
                    stack_g = np.stack(tables[(b, c)])
                    for fi, f in enumerate(homs_ab):
                        gf = np.einsum("kcb,ba->kca", homs_bc, f) % p
                        idx = la.hom_indices(gf, p)
                        want = np.stack([tables[(a, c)][i] for i in idx])
                        got = X.compose_actions(stack_g, tables[(a, b)][fi])
                        bad = np.flatnonzero(
                            (got != want).reshape(len(idx), -1).any(axis=1)
                        )
                        if bad.size:
                            return Violation(f.copy(), homs_bc[bad[0]].copy())
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        a, b, c = (int(x) for x in rng.integers(0, site.N + 1, size=3))
        f = rng.integers(0, p, size=(b, a))
        g = rng.integers(0, p, size=(c, b))
        lhs = site.act_through(X, la.matmul(g, f, p) if b else la.zeros(c, a))
        rhs = X.compose_actions(site.act_through(X, g), site.act_through(X, f))
        if not np.array_equal(lhs, rhs):
            return Violation(f, g)
    return None
