"""Finite-set-valued presheaves on the truncated site.

A :class:`SetPresheaf` stores, for each dimension d, the size of ``X(F^d)``
and, for each site generator ``g: F^a -> F^b``, the pulled-back map
``X(g): X(F^b) -> X(F^a)`` as an integer array indexed by elements of X(F^b).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Hashable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import linalg as la
from .site import Key, TruncatedSite, Violation, WindowExceeded, check_functoriality


class NaturalityViolation(ValueError):
    def __init__(self, key: Key, element: int):
        super().__init__(f"map is not natural for generator {key} at element {element}")
        self.key = key
        self.element = element


class SetPresheaf:
    def __init__(
        self,
        site: TruncatedSite,
        sizes: Sequence[int],
        actions: dict[Key, np.ndarray],
        name: str = "X",
        labels: Sequence[Sequence[Hashable]] | None = None,
    ):
        if len(sizes) != site.N + 1:
            raise ValueError("one size per dimension is required")
        self.site = site
        self.sizes = tuple(int(s) for s in sizes)
        self.actions = {k: np.asarray(v, dtype=np.int64) for k, v in actions.items()}
        self.name = name
        self.labels = labels
        self._act_cache: dict = {}
        for key, gen in site.generators.items():
            A = self.actions.get(key)
            if A is None or A.shape != (self.sizes[gen.tgt],):
                raise ValueError(f"{name}: missing or misshapen action for {key}")
            if A.size and (A.min() < 0 or A.max() >= self.sizes[gen.src]):
                raise ValueError(f"{name}: action for {key} leaves the section set")

    def __repr__(self) -> str:
        return f"SetPresheaf({self.name}, sizes={self.sizes})"

    # FunctorLike protocol
    def generator_action(self, key: Key) -> np.ndarray:
        return self.actions[key]

    def identity_action(self, d: int) -> np.ndarray:
        return np.arange(self.sizes[d], dtype=np.int64)

    def compose_actions(self, first: np.ndarray, then: np.ndarray) -> np.ndarray:
        return then[first]

    def act(self, f) -> np.ndarray:
        return self.site.act_through(self, f)

    def label(self, d: int, x: int) -> Hashable:
        return self.labels[d][x] if self.labels is not None else x

    @property
    def is_empty(self) -> bool:
        return not any(self.sizes)

    @property
    def is_connected(self) -> bool:
        return self.sizes[0] == 1

    def basepoints(self) -> list[int]:
        """Image of the unique element of X(0) in every X(F^d); needs connectivity."""
        if not self.is_connected:
            raise ValueError(f"{self.name} is not connected")
        return [int(self.act(la.zeros(0, d))[0]) for d in range(self.site.N + 1)]

    @classmethod
    def from_labels(
        cls,
        site: TruncatedSite,
        labels: Sequence[Sequence[Hashable]],
        pull: Callable[[Hashable, np.ndarray, int], Hashable],
        name: str = "X",
    ) -> "SetPresheaf":
        """Build from explicit section labels and a pullback ``pull(label, f, a)``.

        ``f`` is the ``b x a`` matrix of a generator and ``label`` lies in level b.
        """
        index = [{lab: i for i, lab in enumerate(level)} for level in labels]
        actions = {}
        for key, g in site.generators.items():
            actions[key] = np.array(
                [index[g.src][pull(lab, g.matrix, g.src)] for lab in labels[g.tgt]],
                dtype=np.int64,
            )
        return cls(site, [len(level) for level in labels], actions, name, labels)


@dataclass
class ValidationReport:
    ok: bool
    witness: Violation | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate(X, seed: int = 0) -> ValidationReport:
    """Functoriality on the exhaustive plus randomized schedule."""
    w = check_functoriality(X, seed=seed)
    return ValidationReport(w is None, w)


# ---------------------------------------------------------------------------
# maps of presheaves


@dataclass
class SetMap:
    source: SetPresheaf
    target: SetPresheaf
    components: list[np.ndarray]

    def naturality_witness(self) -> tuple[Key, int] | None:
        for key, g in self.source.site.generators.items():
            lhs = self.components[g.src][self.source.actions[key]]
            rhs = self.target.actions[key][self.components[g.tgt]]
            bad = np.flatnonzero(lhs != rhs)
            if bad.size:
                return key, int(bad[0])
        return None

    def check_natural(self) -> None:
        w = self.naturality_witness()
        if w is not None:
            raise NaturalityViolation(*w)

    def is_levelwise_injective(self) -> bool:
        return all(np.unique(c).size == c.size for c in self.components)

    def image(self, name: str | None = None) -> SetPresheaf:
        """Image sub-presheaf of the target, with elements in target order."""
        keep = [np.unique(c) for c in self.components]
        return restrict(self.target, keep, name or f"im({self.source.name})")


def identity_map(X: SetPresheaf) -> SetMap:
    return SetMap(X, X, [np.arange(s, dtype=np.int64) for s in X.sizes])


def restrict(X: SetPresheaf, subsets: Sequence[np.ndarray], name: str) -> SetPresheaf:
    """Sub-presheaf on the given per-level subsets (which must be closed)."""
    pos = []
    for d, keep in enumerate(subsets):
        m = np.full(X.sizes[d], -1, dtype=np.int64)
        m[keep] = np.arange(len(keep))
        pos.append(m)
    actions = {}
    for key, g in X.site.generators.items():
        A = pos[g.src][X.actions[key][subsets[g.tgt]]]
        if (A < 0).any():
            raise ValueError(f"subsets are not closed under {key}")
        actions[key] = A
    labels = [[X.label(d, int(x)) for x in keep] for d, keep in enumerate(subsets)]
    return SetPresheaf(X.site, [len(k) for k in subsets], actions, name, labels)


def closure(X: SetPresheaf, seeds: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Smallest sub-presheaf containing the seed elements, as boolean masks."""
    masks = [np.zeros(s, dtype=bool) for s in X.sizes]
    for d, seed in enumerate(seeds):
        masks[d][np.asarray(seed, dtype=np.int64)] = True
    gens = list(X.site.generators.values())
    changed = True
    while changed:
        changed = False
        for g in gens:
            src = masks[g.tgt]
            if not src.any():
                continue
            hit = X.actions[g.key][src]
            if not masks[g.src][hit].all():
                masks[g.src][hit] = True
                changed = True
    return masks


# ---------------------------------------------------------------------------
# constructions


def product(X: SetPresheaf, Y: SetPresheaf, name: str | None = None) -> SetPresheaf:
    actions = {}
    for key in X.site.generators:
        g = X.site.generators[key]
        ax, ay = X.actions[key], Y.actions[key]
        # element (x, y) of level b has index x * |Y(b)| + y
        actions[key] = (ax[:, None] * Y.sizes[g.src] + ay[None, :]).reshape(-1)
    labels = [
        [(X.label(d, x), Y.label(d, y)) for x in range(X.sizes[d]) for y in range(Y.sizes[d])]
        for d in range(X.site.N + 1)
    ]
    sizes = [a * b for a, b in zip(X.sizes, Y.sizes)]
    return SetPresheaf(X.site, sizes, actions, name or f"{X.name}x{Y.name}", labels)


def coproduct(X: SetPresheaf, Y: SetPresheaf, name: str | None = None) -> SetPresheaf:
    actions = {}
    for key, g in X.site.generators.items():
        actions[key] = np.concatenate([X.actions[key], Y.actions[key] + X.sizes[g.src]])
    labels = [
        [(0, X.label(d, x)) for x in range(X.sizes[d])] + [(1, Y.label(d, y)) for y in range(Y.sizes[d])]
        for d in range(X.site.N + 1)
    ]
    sizes = [a + b for a, b in zip(X.sizes, Y.sizes)]
    return SetPresheaf(X.site, sizes, actions, name or f"{X.name}+{Y.name}", labels)


def wedge(X: SetPresheaf, Y: SetPresheaf, name: str | None = None) -> SetPresheaf:
    """One-point union inside the product; both inputs must be connected."""
    if not (X.is_connected and Y.is_connected):
        raise ValueError("wedge requires connected presheaves")
    P = product(X, Y)
    bx, by = X.basepoints(), Y.basepoints()
    keep = []
    for d in range(X.site.N + 1):
        xs = np.arange(X.sizes[d])
        ys = np.arange(Y.sizes[d])
        ids = np.union1d(xs * Y.sizes[d] + by[d], bx[d] * Y.sizes[d] + ys)
        keep.append(ids)
    return restrict(P, keep, name or f"{X.name}v{Y.name}")


def constant(site: TruncatedSite, k: int, name: str | None = None) -> SetPresheaf:
    labels = [list(range(k)) for _ in range(site.N + 1)]
    return SetPresheaf.from_labels(site, labels, lambda lab, f, a: lab, name or f"const{k}")


def point(site: TruncatedSite) -> SetPresheaf:
    return constant(site, 1, "pt")


def empty(site: TruncatedSite) -> SetPresheaf:
    return constant(site, 0, "empty")


@dataclass
class ConnectedComponent:
    basepoint: int
    fibers: list[np.ndarray]


def components(X: SetPresheaf) -> list[ConnectedComponent]:
    """Fibers of X(V) -> X(0), the map induced by the inclusion of 0 into V."""
    to0 = [X.act(la.zeros(d, 0)) for d in range(X.site.N + 1)]
    return [
        ConnectedComponent(x, [np.flatnonzero(t == x) for t in to0]) for x in range(X.sizes[0])
    ]


# ---------------------------------------------------------------------------
# rank filtration


@dataclass
class RankFiltration:
    presheaf: SetPresheaf
    masks: list[list[np.ndarray]]  # masks[n][d]: membership in X_{<=n}(F^d)

    @property
    def N(self) -> int:
        return self.presheaf.site.N

    def level(self, n: int, d: int) -> np.ndarray:
        return np.flatnonzero(self.masks[n][d])

    def regular(self, n: int) -> np.ndarray:
        if n == 0:
            return np.arange(self.presheaf.sizes[0])
        return np.flatnonzero(~self.masks[n - 1][n])

    def regular_counts(self) -> list[int]:
        return [int(self.regular(n).size) for n in range(self.N + 1)]

    def new_elements(self, n: int, d: int) -> np.ndarray:
        if n == 0:
            return self.level(0, d)
        return np.flatnonzero(self.masks[n][d] & ~self.masks[n - 1][d])

    def generated_by(self) -> int:
        """Least m with X = X_{<=m} on the window."""
        for n in range(self.N + 1):
            if all(m.all() for m in self.masks[n]):
                return n
        return self.N

    def stratum(self, d: int) -> np.ndarray:
        """For each element of X(F^d), the least n with membership in X_{<=n}."""
        out = np.full(self.presheaf.sizes[d], self.N, dtype=np.int64)
        for n in range(self.N, -1, -1):
            out[self.masks[n][d]] = n
        return out


def rank_filtration(X: SetPresheaf) -> RankFiltration:
    N = X.site.N
    masks = []
    for n in range(N + 1):
        seeds = [np.arange(X.sizes[n]) if d == n else np.zeros(0, dtype=np.int64) for d in range(N + 1)]
        masks.append(closure(X, seeds))
    for n in range(1, N + 1):
        for d in range(N + 1):
            masks[n][d] |= masks[n - 1][d]
    return RankFiltration(X, masks)


def is_regular(X: SetPresheaf, k: int, x: int) -> bool:
    """x in X(F^k) is regular iff no corank-one idempotent fixes it."""
    return not any(X.act(e)[x] == x for e in _corank_one_idempotents(k, X.site.p, X.site.cap))


def _corank_one_idempotents(k: int, p: int, cap: int) -> list[np.ndarray]:
    out = []
    for e in la.enumerate_hom(k, k, p, cap):
        if la.rank(e, p) == k - 1 and np.array_equal(la.matmul(e, e, p), e):
            out.append(e)
    return out


def subquotient_count_check(X: SetPresheaf, n: int, d: int, filt: RankFiltration | None = None) -> tuple[bool, int, int]:
    """Compare |X_{<=n}(F^d) - X_{<=n-1}(F^d)| with |X_reg(n)| times the subspace count."""
    filt = filt or rank_filtration(X)
    if n > d:
        lhs = 0 if n > 0 else int(filt.new_elements(0, d).size)
        return lhs == 0, lhs, 0
    lhs = int(filt.new_elements(n, d).size)
    rhs = int(filt.regular(n).size) * la.gaussian_binomial(d, d - n, X.site.p)
    return lhs == rhs, lhs, rhs


def mono_test(f: SetMap) -> bool:
    """Injectivity of a natural map via the rank filtration of its source."""
    f.check_natural()
    X, Y = f.source, f.target
    fx = rank_filtration(X)
    m = fx.generated_by()
    comp = f.components
    if m < X.site.N:
        c = comp[m]
        return np.unique(c).size == c.size
    fy = rank_filtration(Y)
    for k in range(X.site.N + 1):
        reg_x = fx.regular(k)
        img = comp[k][reg_x]
        reg_y = np.zeros(Y.sizes[k], dtype=bool)
        reg_y[fy.regular(k)] = True
        if not reg_y[img].all() or np.unique(img).size != img.size:
            return False
    return True


# ---------------------------------------------------------------------------
# equivariant set maps


def _reach_roots(actions: list[np.ndarray], size: int) -> list[int]:
    """One element from each source strongly connected component."""
    if size == 0:
        return []
    src = np.concatenate([np.arange(size)] * len(actions)) if actions else np.zeros(0, dtype=np.int64)
    dst = np.concatenate(actions) if actions else np.zeros(0, dtype=np.int64)
    G = coo_matrix((np.ones(src.size, dtype=np.int8), (src, dst)), shape=(size, size)).tocsr()
    _, lab = connected_components(G, directed=True, connection="strong")
    has_in = np.zeros(lab.max() + 1, dtype=bool)
    cross = lab[src] != lab[dst]
    has_in[lab[dst[cross]]] = True
    roots = []
    for c in np.flatnonzero(~has_in):
        roots.append(int(np.flatnonzero(lab == c)[0]))
    return roots


def set_maps(X: SetPresheaf, Y: SetPresheaf, limit: int | None = None) -> list[SetMap]:
    """All natural maps X -> Y, found as End(F^N)-equivariant maps at the top level.

    Every F^d is a retract of F^N, so a natural map is determined by its top
    component, and every equivariant top component extends.
    """
    site = X.site
    N = site.N
    ax = site.monoid_actions(X)
    ay = site.monoid_actions(Y)
    nx, ny = X.sizes[N], Y.sizes[N]
    roots = _reach_roots(ax, nx)
    phi = np.full(nx, -1, dtype=np.int64)
    found: list[np.ndarray] = []

    def assign(root: int, y: int) -> list[int] | None:
        touched = [root]
        phi[root] = y
        stack = [root]
        while stack:
            x = stack.pop()
            for A, B in zip(ax, ay):
                x2, y2 = A[x], B[phi[x]]
                if phi[x2] < 0:
                    phi[x2] = y2
                    touched.append(x2)
                    stack.append(x2)
                elif phi[x2] != y2:
                    phi[touched] = -1
                    return None
        return touched

    def search(i: int) -> bool:
        if i == len(roots):
            found.append(phi.copy())
            return limit is not None and len(found) >= limit
        r = roots[i]
        if phi[r] >= 0:
            return search(i + 1)
        for y in range(ny):
            touched = assign(r, y)
            if touched is None:
                continue
            stop = search(i + 1)
            phi[touched] = -1
            if stop:
                return True
        return False

    if nx == 0:
        found.append(phi.copy())
    else:
        search(0)
    out = []
    for top in found:
        comps = []
        for d in range(N + 1):
            up = X.act(TruncatedSite.projection(N, d))
            down = Y.act(TruncatedSite.inclusion(d, N))
            comps.append(down[top[up]] if X.sizes[d] else np.zeros(0, dtype=np.int64))
        out.append(SetMap(X, Y, comps))
    return out


def set_end(X: SetPresheaf) -> list[SetMap]:
    return set_maps(X, X)


# ---------------------------------------------------------------------------
# catalog


def _row_space(R: np.ndarray, p: int) -> tuple:
    if R.shape[0] == 0:
        return ()
    B, _ = la.row_basis(R, p)
    return la.subspace_key(B)


def _subspace_labels(d: int, ks: Sequence[int], p: int) -> list[tuple]:
    return [la.subspace_key(R) for k in ks for R in la.enumerate_rref(k, d, p)]


def _pull_rows(lab: tuple, f: np.ndarray, a: int, p: int) -> tuple:
    if not lab:
        return ()
    R = np.array(lab, dtype=np.int64)
    return _row_space(la.matmul(R, f, p), p)


def gr_le(site: TruncatedSite, n: int) -> SetPresheaf:
    """V -> GL_n \\ hom(V, F^n), i.e. subspaces of the dual of V of dimension <= n."""
    p = site.p
    labels = [_subspace_labels(d, range(min(n, d) + 1), p) for d in range(site.N + 1)]
    return SetPresheaf.from_labels(
        site, labels, lambda lab, f, a: _pull_rows(lab, f, a, p), f"gr_le({n})"
    )


def gr(site: TruncatedSite, n: int) -> SetPresheaf:
    """Top subquotient of gr_le(n): a basepoint plus the n-dimensional row spaces."""
    p = site.p

    def pull(lab, f, a):
        if lab == "*":
            return "*"
        out = _pull_rows(lab, f, a, p)
        return out if len(out) == n else "*"

    labels = [["*"] + (_subspace_labels(d, [n], p) if n <= d else []) for d in range(site.N + 1)]
    if n == 0:
        labels = [["*", ()] for _ in range(site.N + 1)]
    return SetPresheaf.from_labels(site, labels, pull, f"gr({n})")


def homset(site: TruncatedSite, n: int) -> SetPresheaf:
    """The representable presheaf hom(-, F^n), in canonical hom order."""
    p = site.p
    sizes = [la.hom_count(d, n, p) for d in range(site.N + 1)]
    if max(sizes) > site.cap:
        raise la.CapExceeded(f"homset({n})", max(sizes), site.cap)
    actions = {}
    for key, g in site.generators.items():
        homs = la.enumerate_hom(g.tgt, n, p, site.cap)
        actions[key] = la.hom_indices(np.einsum("knb,ba->kna", homs, g.matrix) % p, p)
    return SetPresheaf(site, sizes, actions, f"homset({n})")


def underlying_sets(L, name: str | None = None) -> SetPresheaf:
    """Forget the linear structure; vectors index as little-endian base-p numbers."""
    site = L.site
    p = site.p
    sizes = [p ** int(n) for n in L.dims]
    if max(sizes) > site.cap:
        raise la.CapExceeded(f"sets({L.name})", max(sizes), site.cap)
    vecs = [la.all_vectors(int(n), p) for n in L.dims]
    actions = {}
    for key, g in site.generators.items():
        M = L.generator_action(key)
        img = la.matmul(vecs[g.tgt], M.T, p) if M.size else la.zeros(sizes[g.tgt], M.shape[0])
        actions[key] = la.vector_indices(img, p) if M.shape[0] else np.zeros(sizes[g.tgt], dtype=np.int64)
    return SetPresheaf(site, sizes, actions, name or f"sets({L.name})")


def rank_subquotient(X: SetPresheaf, n: int, filt: RankFiltration | None = None) -> SetPresheaf:
    """X_{<=n} / X_{<=n-1}: a basepoint plus the elements new at stage n."""
    filt = filt or rank_filtration(X)
    site = X.site
    keep = [filt.new_elements(n, d) for d in range(site.N + 1)]
    pos = []
    for d in range(site.N + 1):
        m = np.full(X.sizes[d], 0, dtype=np.int64)
        m[keep[d]] = np.arange(1, keep[d].size + 1)
        pos.append(m)
    actions = {}
    for key, g in site.generators.items():
        body = pos[g.src][X.actions[key][keep[g.tgt]]]
        actions[key] = np.concatenate([[0], body]).astype(np.int64)
    labels = [["*"] + [X.label(d, int(x)) for x in keep[d]] for d in range(site.N + 1)]
    return SetPresheaf(site, [k.size + 1 for k in keep], actions, f"F_{n}({X.name})", labels)


def splitrank(L, name: str | None = None) -> SetPresheaf:
    """Wedge of the rank subquotients of sets(L), realised on the sections of L.

    An element keeps its image under a map when the image stays in the same
    rank stratum and otherwise falls to the zero vector.
    """
    if int(L.dims[0]) != 0:
        raise ValueError("splitrank needs a linear functor vanishing at 0")
    X = underlying_sets(L)
    filt = rank_filtration(X)
    strata = [filt.stratum(d) for d in range(X.site.N + 1)]
    actions = {}
    for key, g in X.site.generators.items():
        A = X.actions[key]
        same = strata[g.src][A] == strata[g.tgt]
        actions[key] = np.where(same, A, 0)
    return SetPresheaf(X.site, X.sizes, actions, name or f"splitrank({L.name})")


# ---------------------------------------------------------------------------
# induced presheaves


@dataclass
class EndSetTable:
    """A finite right End(F^n)-set; ``action[k, z]`` is z acted on by the k-th map."""

    n: int
    size: int
    action: np.ndarray
    p: int = 2

    def __post_init__(self):
        self.action = np.asarray(self.action, dtype=np.int64)
        want = (la.hom_count(self.n, self.n, self.p), self.size)
        if self.action.shape != want:
            raise ValueError(f"table shape {self.action.shape}, expected {want}")
        if self.action.size and (self.action.min() < 0 or self.action.max() >= self.size):
            raise ValueError("table entries must lie in [0, size)")

    def act(self, z, k):
        return self.action[k, z]

    def law_violation(self) -> tuple[int, int] | None:
        """First (f, g) index pair with (z f) g != z (f g), or identity failure (k, -1)."""
        homs = la.enumerate_hom(self.n, self.n, self.p)
        ident = la.hom_index(la.identity(self.n), self.p)
        if not np.array_equal(self.action[ident], np.arange(self.size)):
            return ident, -1
        for fi, f in enumerate(homs):
            fg = la.hom_indices(np.einsum("ij,kjl->kil", f, homs) % self.p, self.p)
            lhs = self.action[:, self.action[fi]]  # row g: (z f) g
            rhs = self.action[fg]
            bad = np.flatnonzero((lhs != rhs).any(axis=1))
            if bad.size:
                return fi, int(bad[0])
        return None

    def to_text(self) -> str:
        lines = [f"n={self.n} size={self.size}"]
        lines += [" ".join(str(int(v)) for v in row) for row in self.action]
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str, p: int) -> "EndSetTable":
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if not lines:
            raise ValueError("empty table")
        head = dict(tok.split("=", 1) for tok in lines[0].split())
        try:
            n, size = int(head["n"]), int(head["size"])
        except (KeyError, ValueError) as exc:
            raise ValueError("header must read 'n=<int> size=<int>'") from exc
        rows = lines[1:]
        want = la.hom_count(n, n, p)
        if len(rows) != want:
            raise ValueError(f"expected {want} action lines, found {len(rows)}")
        data = [[int(v) for v in row.split()] for row in rows]
        if any(len(r) != size for r in data):
            raise ValueError(f"every action line needs {size} entries")
        return cls(n, size, np.array(data, dtype=np.int64).reshape(want, size), p)

    @classmethod
    def load(cls, path: str | Path, p: int) -> "EndSetTable":
        return cls.parse(Path(path).read_text(encoding="utf-8"), p)


def grassmannian_table(n: int, p: int) -> EndSetTable:
    """Pointed set {*_0, *_n}: invertible maps fix *_n, all others send it to *_0."""
    homs = la.enumerate_hom(n, n, p)
    act = np.zeros((len(homs), 2), dtype=np.int64)
    for k, f in enumerate(homs):
        act[k, 1] = 1 if la.rank(f, p) == n else 0
    return EndSetTable(n, 2, act, p)


def orbit_table(n: int, p: int) -> EndSetTable:
    """GL_n \\ End(F^n) with the right action by composition."""
    homs = la.enumerate_hom(n, n, p)
    keys = [_row_space(f, p) for f in homs]
    orbits = sorted(set(keys), key=lambda k: (len(k), k))
    pos = {k: i for i, k in enumerate(orbits)}
    reps = [homs[keys.index(o)] for o in orbits]
    act = np.zeros((len(homs), len(orbits)), dtype=np.int64)
    for k, f in enumerate(homs):
        for z, r in enumerate(reps):
            act[k, z] = pos[_row_space(la.matmul(r, f, p), p)]
    return EndSetTable(n, len(orbits), act, p)


def regular_table(n: int, p: int) -> EndSetTable:
    homs = la.enumerate_hom(n, n, p)
    act = np.zeros((len(homs), len(homs)), dtype=np.int64)
    for k, f in enumerate(homs):
        act[k] = la.hom_indices(np.einsum("kij,jl->kil", homs, f) % p, p)
    return EndSetTable(n, len(homs), act, p)


def trivial_table(n: int, p: int) -> EndSetTable:
    return EndSetTable(n, 1, np.zeros((la.hom_count(n, n, p), 1), dtype=np.int64), p)


def _induced_classes(Z: EndSetTable, a: int, p: int, cap: int, monoid: list[np.ndarray]) -> np.ndarray:
    homs = la.enumerate_hom(a, Z.n, p, cap)
    H = len(homs)
    total = Z.size * H
    if total > cap:
        raise la.CapExceeded(f"Z x hom(F^{a}, F^{Z.n})", total, cap)
    src, dst = [], []
    zs = np.arange(Z.size)
    for e in monoid:
        k = la.hom_index(e, p)
        ze = Z.action[k]  # z . e
        eg = la.hom_indices(np.einsum("ij,kjl->kil", e, homs) % p, p) if H else np.zeros(0, dtype=np.int64)
        # (z.e, g) ~ (z, e g)
        src.append((ze[:, None] * H + np.arange(H)[None, :]).reshape(-1))
        dst.append((zs[:, None] * H + eg[None, :]).reshape(-1))
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    s = np.concatenate(src) if src else np.zeros(0, dtype=np.int64)
    t = np.concatenate(dst) if dst else np.zeros(0, dtype=np.int64)
    G = coo_matrix((np.ones(s.size, dtype=np.int8), (s, t)), shape=(total, total))
    _, lab = connected_components(G, directed=False)
    # renumber classes by their smallest member
    first = np.full(lab.max() + 1, total, dtype=np.int64)
    np.minimum.at(first, lab, np.arange(total))
    order = np.argsort(first)
    rank_of = np.empty_like(order)
    rank_of[order] = np.arange(order.size)
    return rank_of[lab]


@dataclass
class InducedPresheaf:
    presheaf: SetPresheaf
    table: EndSetTable
    classes: list[np.ndarray] = field(repr=False)  # classes[d][z * |hom| + g]
    representatives: list[np.ndarray] = field(repr=False)


def induced(Z: EndSetTable, site: TruncatedSite, cross_check: bool = True) -> InducedPresheaf:
    """X_Z(V) = (Z x hom(V, F^n)) / ((z e, g) ~ (z, e g)), actions by precomposition."""
    p = site.p
    if Z.p != p:
        raise ValueError("table prime differs from the site prime")
    site.check_dim(Z.n)
    gens = [M for _, M in site.monoid_generators(Z.n)]
    classes = [_induced_classes(Z, a, p, site.cap, gens) for a in range(site.N + 1)]
    if cross_check:
        full = la.enumerate_hom(Z.n, Z.n, p, site.cap)
        for a in range(site.N + 1):
            work = len(full) * Z.size * la.hom_count(a, Z.n, p)
            if work <= site.cap:
                alt = _induced_classes(Z, a, p, site.cap, list(full))
                if not np.array_equal(alt, classes[a]):
                    raise AssertionError("generator relations disagree with the full monoid")
    reps = []
    for c in classes:
        r = np.full(c.max() + 1 if c.size else 0, -1, dtype=np.int64)
        r[c[::-1]] = np.arange(c.size)[::-1]
        reps.append(r)
    actions = {}
    for key, g in site.generators.items():
        Hb = la.hom_count(g.tgt, Z.n, p)
        Ha = la.hom_count(g.src, Z.n, p)
        homs_b = la.enumerate_hom(g.tgt, Z.n, p, site.cap)
        gf = la.hom_indices(np.einsum("knb,ba->kna", homs_b, g.matrix) % p, p) if Hb else np.zeros(0, dtype=np.int64)
        r = reps[g.tgt]
        z, h = np.divmod(r, Hb) if Hb else (r, r)
        actions[key] = classes[g.src][z * Ha + gf[h]] if r.size else np.zeros(0, dtype=np.int64)
    sizes = [r.size for r in reps]
    X = SetPresheaf(site, sizes, actions, f"X_Z(n={Z.n},|Z|={Z.size})")
    return InducedPresheaf(X, Z, classes, reps)
