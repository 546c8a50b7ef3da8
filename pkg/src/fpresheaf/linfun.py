"""Contravariant functors from the truncated site to finite-dimensional F_p-spaces.

For a generator ``g: F^a -> F^b`` a :class:`LinFunctor` stores the matrix of
``F(g): F(F^b) -> F(F^a)``, shaped ``dims[a] x dims[b]``.  Functors built as
quotients of a linearization ``F[X]`` remember that presentation, which lets
natural-transformation spaces be solved on the elements of X directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement, product
from typing import Sequence

import numpy as np

from . import linalg as la
from . import presheaf as ps
from .presheaf import SetMap, SetPresheaf
from .site import Key, TruncatedSite, WindowExceeded


class _Verdict:
    def __init__(self, name: str):
        self.name = name

    def __repr__(self) -> str:
        return self.name

    def __reduce__(self):
        return self.name


ExceedsWindow = _Verdict("ExceedsWindow")
NotDetectedInWindow = _Verdict("NotDetectedInWindow")


@dataclass
class Presentation:
    """F = F[X] / ker(P), with ``proj[d]`` the surjection F[X](F^d) -> F(F^d)."""

    X: SetPresheaf
    proj: list[np.ndarray]

    def section(self, d: int, p: int) -> np.ndarray:
        """A right inverse of ``proj[d]``: unit vectors on pivot columns."""
        P = self.proj[d]
        R, piv = la.rref_pivots(P, p) if P.size else (P, [])
        # P restricted to the pivot columns is invertible
        sub = P[:, piv]
        L = la.zeros(P.shape[1], P.shape[0])
        if piv:
            L[piv] = la.inverse(sub, p)
        return L


class LinFunctor:
    def __init__(
        self,
        site: TruncatedSite,
        dims: Sequence[int],
        actions: dict[Key, np.ndarray],
        name: str = "F",
        labels: Sequence[Sequence] | None = None,
        presentation: Presentation | None = None,
    ):
        if len(dims) != site.N + 1:
            raise ValueError("one dimension per level is required")
        self.site = site
        self.dims = tuple(int(d) for d in dims)
        self.actions = {k: la.as_fp(v, site.p) for k, v in actions.items()}
        self.name = name
        self.labels = labels
        self.presentation = presentation
        self._act_cache: dict = {}
        for key, g in site.generators.items():
            M = self.actions.get(key)
            if M is None or M.shape != (self.dims[g.src], self.dims[g.tgt]):
                raise ValueError(f"{name}: missing or misshapen matrix for {key}")

    def __repr__(self) -> str:
        return f"LinFunctor({self.name}, dims={self.dims})"

    @property
    def p(self) -> int:
        return self.site.p

    def generator_action(self, key: Key) -> np.ndarray:
        return self.actions[key]

    def identity_action(self, d: int) -> np.ndarray:
        return la.identity(self.dims[d])

    def compose_actions(self, first: np.ndarray, then: np.ndarray) -> np.ndarray:
        return np.matmul(then, first) % self.site.p

    def act(self, f) -> np.ndarray:
        return self.site.act_through(self, f)

    @classmethod
    def from_maps(cls, site: TruncatedSite, dims, matrix_of, name: str, labels=None) -> "LinFunctor":
        """``matrix_of(f, a, b)`` gives F(f) for a generator f: F^a -> F^b."""
        actions = {key: matrix_of(g.matrix, g.src, g.tgt) for key, g in site.generators.items()}
        return cls(site, dims, actions, name, labels)


@dataclass
class NatTransform:
    source: LinFunctor
    target: LinFunctor
    components: list[np.ndarray]  # components[d]: target.dims[d] x source.dims[d]

    def naturality_witness(self) -> Key | None:
        p = self.source.p
        for key, g in self.source.site.generators.items():
            lhs = la.matmul(self.components[g.src], self.source.actions[key], p)
            rhs = la.matmul(self.target.actions[key], self.components[g.tgt], p)
            if not np.array_equal(lhs, rhs):
                return key
        return None

    def is_natural(self) -> bool:
        return self.naturality_witness() is None

    def is_isomorphism(self) -> bool:
        p = self.source.p
        for C in self.components:
            if C.shape[0] != C.shape[1] or la.rank(C, p) != C.shape[0]:
                return False
        return True

    def __add__(self, other: "NatTransform") -> "NatTransform":
        p = self.source.p
        return NatTransform(
            self.source, self.target, [(a + b) % p for a, b in zip(self.components, other.components)]
        )

    def scale(self, c: int) -> "NatTransform":
        p = self.source.p
        return NatTransform(self.source, self.target, [(c * a) % p for a in self.components])


# ---------------------------------------------------------------------------
# catalog


def _monomials(nvars: int, k: int) -> list[tuple[int, ...]]:
    out = []
    for combo in combinations_with_replacement(range(nvars), k):
        e = [0] * nvars
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return sorted(out, reverse=True)


def _poly_pull(exps: tuple[int, ...], f: np.ndarray, p: int) -> dict[tuple[int, ...], int]:
    """Expand prod_i (sum_j f_ij x_j)^{e_i} as a dict of monomials."""
    a = f.shape[1]
    poly = {(0,) * a: 1}
    for i, e in enumerate(exps):
        lin = {}
        for j in range(a):
            if f[i, j]:
                m = [0] * a
                m[j] = 1
                lin[tuple(m)] = int(f[i, j])
        for _ in range(e):
            nxt: dict[tuple[int, ...], int] = {}
            for m1, c1 in poly.items():
                for m2, c2 in lin.items():
                    m = tuple(x + y for x, y in zip(m1, m2))
                    nxt[m] = (nxt.get(m, 0) + c1 * c2) % p
            poly = {m: c for m, c in nxt.items() if c}
    return poly


def sym(site: TruncatedSite, k: int) -> LinFunctor:
    """S^k: degree-k polynomials in the coordinate forms, pulled back by substitution."""
    p = site.p
    bases = [_monomials(d, k) for d in range(site.N + 1)]
    pos = [{m: i for i, m in enumerate(b)} for b in bases]

    def matrix_of(f, a, b):
        M = la.zeros(len(bases[a]), len(bases[b]))
        for col, exps in enumerate(bases[b]):
            for m, c in _poly_pull(exps, f, p).items():
                M[pos[a][m], col] = c
        return M

    return LinFunctor.from_maps(site, [len(b) for b in bases], matrix_of, f"S^{k}", bases)


def _det(M: np.ndarray, p: int) -> int:
    n = M.shape[0]
    if n == 0:
        return 1
    A = M.copy() % p
    inv = la.inverse_table(p)
    det = 1
    for c in range(n):
        nz = np.flatnonzero(A[c:, c])
        if nz.size == 0:
            return 0
        r = c + int(nz[0])
        if r != c:
            A[[c, r]] = A[[r, c]]
            det = -det
        det = det * int(A[c, c]) % p
        piv = inv[A[c, c]]
        for rr in range(c + 1, n):
            if A[rr, c]:
                A[rr] = (A[rr] - A[rr, c] * piv * A[c]) % p
    return det % p


def ext(site: TruncatedSite, k: int) -> LinFunctor:
    """Lambda^k, acting by k x k minors."""
    p = site.p
    bases = [list(combinations(range(d), k)) for d in range(site.N + 1)]

    def matrix_of(f, a, b):
        M = la.zeros(len(bases[a]), len(bases[b]))
        for col, I in enumerate(bases[b]):
            for row, J in enumerate(bases[a]):
                M[row, col] = _det(f[np.ix_(I, J)], p)
        return M

    return LinFunctor.from_maps(site, [len(b) for b in bases], matrix_of, f"L^{k}", bases)


def ibar(site: TruncatedSite) -> LinFunctor:
    """Functions on V vanishing at 0; basis the point masses at nonzero vectors."""
    p = site.p
    vecs = [la.all_vectors(d, p) for d in range(site.N + 1)]

    def matrix_of(f, a, b):
        M = la.zeros(p**a - 1, p**b - 1)
        img = la.vector_indices(la.matmul(vecs[a], f.T, p), p) if b else np.zeros(p**a, dtype=np.int64)
        u = np.arange(1, p**a)
        v = img[1:]
        hit = v != 0
        M[u[hit] - 1, v[hit] - 1] = 1
        return M

    labels = [[tuple(int(x) for x in v) for v in vecs[d][1:]] for d in range(site.N + 1)]
    return LinFunctor.from_maps(site, [p**d - 1 for d in range(site.N + 1)], matrix_of, "Ibar", labels)


def constant_linear(site: TruncatedSite, k: int = 1) -> LinFunctor:
    return LinFunctor.from_maps(site, [k] * (site.N + 1), lambda f, a, b: la.identity(k), f"const^{k}")


def zero_functor(site: TruncatedSite) -> LinFunctor:
    return constant_linear(site, 0)


def direct_sum(F: LinFunctor, G: LinFunctor, name: str | None = None) -> LinFunctor:
    actions = {}
    for key, g in F.site.generators.items():
        A, B = F.actions[key], G.actions[key]
        M = la.zeros(A.shape[0] + B.shape[0], A.shape[1] + B.shape[1])
        M[: A.shape[0], : A.shape[1]] = A
        M[A.shape[0] :, A.shape[1] :] = B
        actions[key] = M
    dims = [a + b for a, b in zip(F.dims, G.dims)]
    return LinFunctor(F.site, dims, actions, name or f"({F.name}+{G.name})")


def tensor(F: LinFunctor, G: LinFunctor, name: str | None = None) -> LinFunctor:
    p = F.p
    actions = {key: np.kron(F.actions[key], G.actions[key]) % p for key in F.site.generators}
    dims = [a * b for a, b in zip(F.dims, G.dims)]
    return LinFunctor(F.site, dims, actions, name or f"({F.name}*{G.name})")


def linearize(X: SetPresheaf, name: str | None = None) -> LinFunctor:
    """F[X]: the free vector space on each X(F^d), permutation-induced actions."""
    actions = {}
    for key, g in X.site.generators.items():
        A = X.actions[key]
        M = la.zeros(X.sizes[g.src], X.sizes[g.tgt])
        M[A, np.arange(A.size)] = 1
        actions[key] = M
    pres = Presentation(X, [la.identity(s) for s in X.sizes])
    labels = X.labels
    return LinFunctor(X.site, X.sizes, actions, name or f"F[{X.name}]", labels, pres)


def freehom(site: TruncatedSite, n: int) -> LinFunctor:
    return linearize(ps.homset(site, n), f"F[hom(-,F^{n})]")


def unit_map(X: SetPresheaf, F: LinFunctor) -> list[np.ndarray]:
    """Images of the basis elements of F[X] in F, for F presented over X (columns)."""
    if F.presentation is None or F.presentation.X is not X:
        raise ValueError("functor is not presented over this presheaf")
    return F.presentation.proj


# ---------------------------------------------------------------------------
# sub- and quotient functors


def _closure(F: LinFunctor, spaces: list[la.Subspace]) -> list[la.Subspace]:
    """Smallest subfunctor containing the given per-level subspaces."""
    p = F.p
    spaces = list(spaces)
    gens = list(F.site.generators.values())
    dirty = {d for d, S in enumerate(spaces) if S.dim}
    while dirty:
        b = min(dirty)
        dirty.discard(b)
        B = spaces[b].basis
        for g in gens:
            if g.tgt != b or not spaces[b].dim or F.dims[g.src] == 0:
                continue
            img = la.matmul(F.actions[g.key], B.T, p).T
            nf = spaces[g.src].normal_form(img)
            if nf.any():
                spaces[g.src] = spaces[g.src].join(nf)
                dirty.add(g.src)
    return spaces


def subfunctor(F: LinFunctor, spaces: list[la.Subspace], name: str) -> LinFunctor:
    """Restriction to a subfunctor given by RREF bases (checked closed)."""
    p = F.p
    actions = {}
    for key, g in F.site.generators.items():
        Sa, Sb = spaces[g.src], spaces[g.tgt]
        img = la.matmul(F.actions[key], Sb.basis.T, p) if Sb.dim else la.zeros(F.dims[g.src], 0)
        if Sb.dim and not Sa.contains(img.T):
            raise ValueError(f"not a subfunctor at {key}")
        actions[key] = img[list(Sa.pivots)] if Sb.dim else la.zeros(Sa.dim, 0)
    return LinFunctor(F.site, [S.dim for S in spaces], actions, name)


@dataclass
class Quotient:
    functor: LinFunctor
    projection: NatTransform
    kernel: list[la.Subspace]
    partial_dims: list[int] = field(default_factory=list)

    @property
    def partial(self) -> bool:
        return bool(self.partial_dims)


def quotient(F: LinFunctor, spaces: list[la.Subspace], name: str) -> Quotient:
    """F / D for a subfunctor D; coordinates are the non-pivot positions of D."""
    p = F.p
    Q = [S.quotient_matrix() for S in spaces]
    L = [S.lift_matrix() for S in spaces]
    actions = {}
    for key, g in F.site.generators.items():
        actions[key] = la.matmul(la.matmul(Q[g.src], F.actions[key], p), L[g.tgt], p)
    pres = None
    if F.presentation is not None:
        pres = Presentation(
            F.presentation.X, [la.matmul(Q[d], F.presentation.proj[d], p) for d in range(F.site.N + 1)]
        )
    labels = None
    if F.labels is not None:
        labels = [[F.labels[d][c] for c in S.complement_columns()] for d, S in enumerate(spaces)]
    G = LinFunctor(F.site, [q.shape[0] for q in Q], actions, name, labels, pres)
    return Quotient(G, NatTransform(F, G, Q), spaces)


def split_constant(F: LinFunctor) -> tuple[LinFunctor, LinFunctor]:
    """(constant part, constant-free part): image and kernel of the idempotent F(V -> 0 -> V)."""
    p = F.p
    N = F.site.N
    const, free = [], []
    for d in range(N + 1):
        to0 = F.act(la.zeros(d, 0))  # F(F^d) -> F(0), induced by 0 -> F^d
        from0 = F.act(la.zeros(0, d))  # F(0) -> F(F^d)
        e = la.matmul(from0, to0, p)
        const.append(la.Subspace.span(la.image_basis(e, p), F.dims[d], p))
        free.append(la.Subspace.span(la.kernel_basis(to0, p), F.dims[d], p))
    return subfunctor(F, const, f"{F.name}(0)"), subfunctor(F, free, f"{F.name}bar")


# ---------------------------------------------------------------------------
# cross-effects and degree


@dataclass
class CrossEffectSlot:
    args: tuple[int, ...]
    space: la.Subspace

    @property
    def dim(self) -> int:
        return self.space.dim


def _omit_block(args: Sequence[int], i: int) -> np.ndarray:
    """Inclusion of the blocks other than block i into F^{sum(args)}."""
    total = sum(args)
    starts = np.cumsum([0, *args])
    keep = [c for j in range(len(args)) if j != i for c in range(starts[j], starts[j + 1])]
    M = la.zeros(total, len(keep))
    M[keep, np.arange(len(keep))] = 1
    return M


def cross_effect(F: LinFunctor, args: Sequence[int]) -> CrossEffectSlot:
    args = tuple(int(a) for a in args)
    total = sum(args)
    if total > F.site.N:
        raise WindowExceeded(f"cross-effect at {args} needs dimension {total} > {F.site.N}")
    if not args:
        raise ValueError("cross-effect arity must be positive")
    p = F.p
    blocks = [F.act(_omit_block(args, i)) for i in range(len(args))]
    stacked = np.concatenate(blocks, axis=0) if blocks else la.zeros(0, F.dims[total])
    K = la.kernel_basis(stacked, p) if F.dims[total] else la.zeros(0, 0)
    return CrossEffectSlot(args, la.Subspace.span(K, F.dims[total], p))


def window_tuples(arity: int, N: int) -> list[tuple[int, ...]]:
    """Nondecreasing tuples of positive dimensions of the given arity with sum <= N."""
    out = []

    def rec(prefix, lo, room):
        if len(prefix) == arity:
            out.append(tuple(prefix))
            return
        left = arity - len(prefix) - 1
        for d in range(lo, room - left + 1):
            rec(prefix + [d], d, room - d)

    if arity <= N:
        rec([], 1, N)
    return out


def vanishes_at_arity(F: LinFunctor, arity: int) -> bool | None:
    """None when no tuple of that arity fits the window."""
    tuples = window_tuples(arity, F.site.N)
    if not tuples:
        return None
    return all(cross_effect(F, t).dim == 0 for t in tuples)


def poly_degree(F: LinFunctor):
    """Least n with cr_{n+1} F zero at every in-window argument tuple."""
    for n in range(F.site.N):
        if vanishes_at_arity(F, n + 1):
            return n
    return ExceedsWindow


def q_n(F: LinFunctor, n: int) -> Quotient:
    """Universal quotient of window degree <= n.

    The kernel is the subfunctor generated by every cross-effect
    cr_{n+1} F(F^{d_1}, ..., F^{d_{n+1}}) that fits in the window.
    """
    p = F.p
    N = F.site.N
    spaces = [la.Subspace.span(la.zeros(0, F.dims[d]), F.dims[d], p) for d in range(N + 1)]
    for t in window_tuples(n + 1, N):
        slot = cross_effect(F, t)
        if slot.dim:
            total = sum(t)
            spaces[total] = spaces[total].join(slot.space.basis)
    spaces = _closure(F, spaces)
    partial = [d for d in range(1, N + 1) if (n + 1) * d > N and n + 1 <= N]
    Qt = quotient(F, spaces, f"q{n}{F.name}")
    Qt.partial_dims = partial
    return Qt


# ---------------------------------------------------------------------------
# natural transformations


def _lower_components(F: LinFunctor, G: LinFunctor, top: np.ndarray) -> list[np.ndarray]:
    """eta_d = G(i) eta_N F(r) for the standard retraction F^d -> F^N -> F^d."""
    site = F.site
    N = site.N
    p = F.p
    out = []
    for d in range(N + 1):
        Gi = G.act(TruncatedSite.inclusion(d, N))  # G(F^N) -> G(F^d)
        Fr = F.act(TruncatedSite.projection(N, d))  # F(F^d) -> F(F^N)
        out.append(la.matmul(la.matmul(Gi, top, p), Fr, p))
    return out


def _nat_hom_generic(F: LinFunctor, G: LinFunctor) -> list[np.ndarray]:
    p = F.p
    N = F.site.N
    n, m = F.dims[N], G.dims[N]
    if n * m == 0:
        return []
    rows = []
    for _, e in F.site.monoid_generators(N):
        Fe, Ge = F.act(e), G.act(e)
        rows.append((np.kron(la.identity(m), Fe.T) - np.kron(Ge, la.identity(n))) % p)
    A = np.concatenate(rows) if rows else la.zeros(0, n * m)
    K = la.kernel_basis(A, p)
    return [k.reshape(m, n) for k in K]


def _nat_hom_presented(F: LinFunctor, G: LinFunctor) -> list[np.ndarray]:
    p = F.p
    N = F.site.N
    X = F.presentation.X
    P = F.presentation.proj[N]
    nx, m = X.sizes[N], G.dims[N]
    if F.dims[N] * m == 0:
        return []
    ax = F.site.monoid_actions(X)
    ge = [G.act(e) for _, e in F.site.monoid_generators(N)]
    roots = ps._reach_roots(ax, nx)
    U = len(roots) * m
    expr = np.full((nx, m, U), -1, dtype=np.int64)
    seen = np.zeros(nx, dtype=bool)
    blocks: list[np.ndarray] = []
    for r_i, r in enumerate(roots):
        if seen[r]:
            continue
        expr[r] = 0
        expr[r][:, r_i * m : (r_i + 1) * m] = la.identity(m)
        seen[r] = True
        queue = [r]
        while queue:
            y = queue.pop()
            for A, Ge in zip(ax, ge):
                y2 = A[y]
                val = la.matmul(Ge, expr[y], p)
                if not seen[y2]:
                    expr[y2] = val
                    seen[y2] = True
                    queue.append(y2)
                else:
                    diff = (expr[y2] - val) % p
                    if diff.any():
                        blocks.append(diff)
    if not seen.all():
        raise AssertionError("root selection failed to reach every element")
    K = la.kernel_basis(P, p)
    if K.shape[0]:
        flat = expr.reshape(nx, m * U)
        rel = la.matmul(K, flat, p).reshape(K.shape[0] * m, U)
        blocks.append(rel)
    if blocks:
        A = np.concatenate(blocks)
        B, _ = la.row_basis(A, p)
        sol = la.kernel_basis(B, p) if B.shape[0] else la.identity(U)
    else:
        sol = la.identity(U)
    L = F.presentation.section(N, p)
    out = []
    for u in sol:
        M = np.einsum("ymu,u->my", expr, u) % p  # m x nx
        out.append(la.matmul(M, L, p))
    return out


def nat_hom(F: LinFunctor, G: LinFunctor, cross_check: bool = False) -> list[NatTransform]:
    """Basis of the space of natural transformations F -> G on the window.

    Every F^d is a retract of F^N, so naturality reduces to equivariance of the
    top component under a monoid generating set of End(F^N).
    """
    if F.site is not G.site:
        raise ValueError("functors live on different sites")
    N = F.site.N
    use_presented = False
    if F.presentation is not None:
        nroots = len(ps._reach_roots(F.site.monoid_actions(F.presentation.X), F.presentation.X.sizes[N]))
        use_presented = nroots * G.dims[N] < F.dims[N] * G.dims[N] or F.dims[N] > 64
    tops = _nat_hom_presented(F, G) if use_presented else _nat_hom_generic(F, G)
    basis = [NatTransform(F, G, _lower_components(F, G, t)) for t in tops]
    if cross_check:
        for eta in basis:
            if not eta.is_natural():
                raise AssertionError("solver produced a non-natural transformation")
    return basis


def nat_hom_dim(F: LinFunctor, G: LinFunctor) -> int:
    return len(nat_hom(F, G))


def find_isomorphism(F: LinFunctor, G: LinFunctor, max_combos: int = 4096) -> NatTransform | None:
    if F.dims != G.dims:
        return None
    basis = nat_hom(F, G)
    p = F.p
    if not basis or p ** len(basis) > max_combos:
        return None
    for coeffs in product(range(p), repeat=len(basis)):
        if not any(coeffs):
            continue
        comps = [
            sum((c * b.components[d] for c, b in zip(coeffs, basis)), la.zeros(G.dims[d], F.dims[d])) % p
            for d in range(F.site.N + 1)
        ]
        eta = NatTransform(F, G, comps)
        if eta.is_isomorphism():
            return eta
    return None


# ---------------------------------------------------------------------------
# set-level homs and finiteness


def set_hom_linear_dim(X: SetPresheaf, G: LinFunctor) -> int:
    """dim hom(F[X], G); the set of maps X -> G has p to this power elements."""
    return nat_hom_dim(linearize(X), G)


def set_hom(X: SetPresheaf, Y, limit: int | None = None) -> list[SetMap]:
    """Natural maps X -> Y for a set presheaf Y, or X -> sets(G) for a linear G."""
    if isinstance(Y, LinFunctor):
        Y = ps.underlying_sets(Y)
    return ps.set_maps(X, Y, limit)


def set_end(X: SetPresheaf) -> list[SetMap]:
    return ps.set_maps(X, X)


def class_image(X: SetPresheaf, F: LinFunctor, name: str) -> tuple[SetPresheaf, SetMap]:
    """Image of X -> F for F presented over X, as a quotient presheaf of X."""
    if F.presentation is None or F.presentation.X is not X:
        raise ValueError("functor is not presented over this presheaf")
    N = X.site.N
    cls = []
    labels = []
    for d in range(N + 1):
        cols = F.presentation.proj[d].T
        if X.sizes[d] == 0:
            cls.append(np.zeros(0, dtype=np.int64))
            labels.append([])
            continue
        uniq, inv, = np.unique(cols, axis=0, return_inverse=True)[:2]
        # number classes in order of first appearance for stability
        first = np.full(uniq.shape[0], X.sizes[d], dtype=np.int64)
        np.minimum.at(first, inv.reshape(-1), np.arange(X.sizes[d]))
        order = np.argsort(first)
        relabel = np.empty_like(order)
        relabel[order] = np.arange(order.size)
        cls.append(relabel[inv.reshape(-1)])
        labels.append([tuple(int(v) for v in uniq[k]) for k in order])
    reps = []
    for c in cls:
        r = np.zeros(int(c.max()) + 1 if c.size else 0, dtype=np.int64)
        r[c[::-1]] = np.arange(c.size)[::-1]
        reps.append(r)
    actions = {}
    for key, g in X.site.generators.items():
        actions[key] = cls[g.src][X.actions[key][reps[g.tgt]]] if reps[g.tgt].size else np.zeros(0, dtype=np.int64)
    Y = SetPresheaf(X.site, [r.size for r in reps], actions, name, labels)
    return Y, SetMap(X, Y, cls)


@dataclass
class TowerStage:
    n: int
    quotient: Quotient
    image: SetPresheaf
    unit: SetMap
    injective: bool


@dataclass
class FinitenessResult:
    degree: object  # int or NotDetectedInWindow
    tower: list[TowerStage]

    @property
    def detected(self) -> bool:
        return self.degree is not NotDetectedInWindow


def finiteness_degree(X: SetPresheaf, stop_early: bool = True) -> FinitenessResult:
    """Least n with X -> q_n F[X] injective on the window."""
    FX = linearize(X)
    tower = []
    degree = NotDetectedInWindow
    for n in range(X.site.N):
        Qn = q_n(FX, n)
        img, unit = class_image(X, Qn.functor, f"{X.name}_{n}")
        inj = ps.mono_test(unit)
        if inj != unit.is_levelwise_injective():
            raise AssertionError("rank-filtration criterion disagrees with levelwise injectivity")
        tower.append(TowerStage(n, Qn, img, unit, inj))
        if inj and degree is NotDetectedInWindow:
            degree = n
            if stop_early:
                break
    return FinitenessResult(degree, tower)


# ---------------------------------------------------------------------------
# induced linear functors


@dataclass
class InducedLinear:
    functor: LinFunctor
    xz: ps.InducedPresheaf
    unit: list[np.ndarray]  # columns: images of X_Z elements in G_Z
    degree: object
    tower: list[tuple[int, bool]]


RELATION_CHECK_LIMIT = 1024


def _relation_quotient(Z: ps.EndSetTable, site: TruncatedSite) -> LinFunctor:
    """F[Z x hom(-, F^n)] modulo (z e, g) - (z, e g), by explicit elimination."""
    p = site.p
    P = ps.product(ps.constant(site, Z.size), ps.homset(site, Z.n), "Zxhom")
    FP = linearize(P)
    gens = [M for _, M in site.monoid_generators(Z.n)]
    rel = []
    for a in range(site.N + 1):
        homs = la.enumerate_hom(a, Z.n, p, site.cap)
        H = len(homs)
        zs = np.arange(Z.size)
        rows = []
        for e in gens:
            ze = Z.action[la.hom_index(e, p)]
            eg = la.hom_indices(np.einsum("ij,kjl->kil", e, homs) % p, p)
            s = (ze[:, None] * H + np.arange(H)[None, :]).reshape(-1)
            t = (zs[:, None] * H + eg[None, :]).reshape(-1)
            R = la.zeros(s.size, Z.size * H)
            R[np.arange(s.size), s] += 1
            R[np.arange(s.size), t] -= 1
            rows.append(R % p)
        R = np.concatenate(rows) if rows else la.zeros(0, Z.size * H)
        rel.append(la.Subspace.span(R, Z.size * H, p))
    return quotient(FP, _closure(FP, rel), f"G_Z(n={Z.n})").functor


def induced_linear(Z: ps.EndSetTable, site: TruncatedSite) -> InducedLinear:
    """G_Z = F[Z x hom(-, F^n)] / ((z e, g) - (z, e g)) together with the map from X_Z.

    The relations only identify basis elements, so G_Z is the linearization
    of X_Z; the explicit quotient is built as a cross-check when small.
    """
    p = site.p
    N = site.N
    xz = ps.induced(Z, site)
    GZ = linearize(xz.presheaf, f"G_Z(n={Z.n})")
    if Z.size * la.hom_count(N, Z.n, p) <= RELATION_CHECK_LIMIT:
        alt = _relation_quotient(Z, site)
        if alt.dims != GZ.dims:
            raise AssertionError("explicit relation quotient disagrees with F[X_Z]")
    unit = [la.identity(s) for s in xz.presheaf.sizes]
    degree = NotDetectedInWindow
    tower = []
    for t in range(N):
        Qt = q_n(GZ, t)
        ok = True
        for a in range(N + 1):
            img = la.matmul(Qt.projection.components[a], unit[a], p)
            if np.unique(img.T, axis=0).shape[0] != img.shape[1]:
                ok = False
        tower.append((t, ok))
        if ok:
            degree = t
            break
    return InducedLinear(GZ, xz, unit, degree, tower)
