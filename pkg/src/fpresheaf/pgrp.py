"""Presheaves of finite p-groups, Frattini series and group-ring filtrations.

Groups are accessed only through :class:`FiniteGroup` (elements, multiply,
invert, identity).  Catalog groups use structured tuple elements.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, Sequence

import numpy as np

from . import growth
from . import linalg as la
from . import linfun as lf
from .linfun import ExceedsWindow, LinFunctor, NotDetectedInWindow
from .presheaf import SetPresheaf, validate
from .site import Key, TruncatedSite, WindowExceeded

Element = Hashable
SUBGROUP_CAP = 2**16


class NotAPGroup(ValueError):
    pass


class NotExact(ValueError):
    def __init__(self, reason: str, dim: int):
        super().__init__(f"sequence is not exact at dimension {dim}: {reason}")
        self.dim = dim


class FiniteGroup:
    def __init__(
        self,
        elements: Sequence[Element],
        mul: Callable[[Element, Element], Element],
        inv: Callable[[Element], Element],
        identity: Element,
        name: str = "G",
    ):
        self._elements = list(elements)
        self.mul = mul
        self.inv = inv
        self.identity = identity
        self.name = name
        self._index = {x: i for i, x in enumerate(self._elements)}
        self._left: dict[Element, np.ndarray] = {}
        self._right: dict[Element, np.ndarray] = {}
        self._gens: list[Element] | None = None

    def elements(self) -> list[Element]:
        return self._elements

    @property
    def order(self) -> int:
        return len(self._elements)

    def index(self, x: Element) -> int:
        return self._index[x]

    def __contains__(self, x: Element) -> bool:
        return x in self._index

    def left_perm(self, x: Element) -> np.ndarray:
        """Indices of x*y over all y."""
        P = self._left.get(x)
        if P is None:
            P = np.array([self._index[self.mul(x, y)] for y in self._elements], dtype=np.int64)
            self._left[x] = P
        return P

    def right_perm(self, x: Element) -> np.ndarray:
        """Indices of y*x over all y."""
        P = self._right.get(x)
        if P is None:
            P = np.array([self._index[self.mul(y, x)] for y in self._elements], dtype=np.int64)
            self._right[x] = P
        return P

    def mask_of(self, S) -> np.ndarray:
        m = np.zeros(self.order, dtype=bool)
        m[[self._index[x] for x in S]] = True
        return m

    def subset(self, mask: np.ndarray) -> set:
        return {self._elements[i] for i in np.flatnonzero(mask)}

    def power(self, x: Element, k: int) -> Element:
        out = self.identity
        for _ in range(k):
            out = self.mul(out, x)
        return out

    def commutator(self, x: Element, y: Element) -> Element:
        return self.mul(self.mul(self.inv(x), self.inv(y)), self.mul(x, y))

    def axiom_violation(self, rng: np.random.Generator | None = None, samples: int = 2000):
        """First failing group axiom; exhaustive up to order 512, sampled above."""
        els = self._elements
        if self.order <= 512:
            triples = ((x, y, z) for x in els for y in els for z in els[:8])
        else:
            rng = rng or np.random.default_rng(0)
            idx = rng.integers(0, self.order, size=(samples, 3))
            triples = ((els[i], els[j], els[k]) for i, j, k in idx)
        for x, y, z in triples:
            if self.mul(self.mul(x, y), z) != self.mul(x, self.mul(y, z)):
                return ("associativity", x, y, z)
        for x in els:
            if self.mul(x, self.identity) != x or self.mul(x, self.inv(x)) != self.identity:
                return ("identity/inverse", x)
            if self.mul(x, els[-1]) not in self._index:
                return ("closure", x)
        return None


def _p_exponent(n: int, p: int) -> int | None:
    e = 0
    while n > 1 and n % p == 0:
        n //= p
        e += 1
    return e if n == 1 else None


def check_p_group(G: FiniteGroup, p: int) -> int:
    e = _p_exponent(G.order, p)
    if e is None:
        raise NotAPGroup(f"{G.name}: order {G.order} is not a power of {p}")
    return e


# ---------------------------------------------------------------------------
# catalog groups


def abelian_group(moduli: Sequence[int], name: str = "A") -> FiniteGroup:
    moduli = tuple(moduli)
    els = [tuple(int(v) for v in x) for x in np.ndindex(*moduli)] if moduli else [()]
    return FiniteGroup(
        els,
        lambda x, y: tuple((a + b) % m for a, b, m in zip(x, y, moduli)),
        lambda x: tuple((-a) % m for a, m in zip(x, moduli)),
        tuple(0 for _ in moduli),
        name,
    )


def elementary_abelian_group(k: int, p: int) -> FiniteGroup:
    return abelian_group([p] * k, f"(Z/{p})^{k}")


def cyclic_group(m: int) -> FiniteGroup:
    return abelian_group([m], f"Z/{m}")


def _wedge_pairs(d: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(d) for j in range(i + 1, d)]


def heisenberg_group(d: int, p: int) -> FiniteGroup:
    """Elements (a, b, c), a, b in F^d, c in Lambda^2; (a,b,c)(a',b',c') = (a+a', b+b', c+c'+a^b')."""
    pairs = _wedge_pairs(d)
    k = len(pairs)

    def wedge(a, b):
        return tuple((a[i] * b[j] - a[j] * b[i]) % p for i, j in pairs)

    def mul(x, y):
        a, b, c = x[:d], x[d : 2 * d], x[2 * d :]
        a2, b2, c2 = y[:d], y[d : 2 * d], y[2 * d :]
        w = wedge(a, b2)
        return (
            tuple((u + v) % p for u, v in zip(a, a2))
            + tuple((u + v) % p for u, v in zip(b, b2))
            + tuple((u + v + t) % p for u, v, t in zip(c, c2, w))
        )

    def inv(x):
        a, b, c = x[:d], x[d : 2 * d], x[2 * d :]
        na = tuple((-u) % p for u in a)
        nb = tuple((-u) % p for u in b)
        # (a,b,c)(-a,-b,c') = (0,0,c+c'-a^b) forces c' = a^b - c
        w = wedge(a, b)
        return na + nb + tuple((t - u) % p for t, u in zip(w, c))

    els = [tuple(int(v) for v in x) for x in np.ndindex(*([p] * (2 * d + k)))] if 2 * d + k else [()]
    return FiniteGroup(els, mul, inv, (0,) * (2 * d + k), f"Heis({d})")


# ---------------------------------------------------------------------------
# subgroups


def _generate_mask(G: FiniteGroup, gens: Sequence[Element], cap: int = SUBGROUP_CAP) -> np.ndarray:
    perms = [G.right_perm(g) for g in gens if g != G.identity]
    mask = np.zeros(G.order, dtype=bool)
    frontier = np.array([G.index(G.identity)], dtype=np.int64)
    mask[frontier] = True
    while frontier.size and perms:
        cand = np.unique(np.concatenate([P[frontier] for P in perms]))
        frontier = cand[~mask[cand]]
        mask[frontier] = True
        if mask.sum() > cap:
            raise la.CapExceeded("subgroup closure", int(mask.sum()), cap)
    return mask


def generate(G: FiniteGroup, gens: Sequence[Element], base: set | None = None, cap: int = SUBGROUP_CAP) -> set:
    """Subgroup generated by ``gens`` and the elements of ``base``."""
    extra = generating_set(G, sorted(base, key=G.index)) if base else []
    return G.subset(_generate_mask(G, list(gens) + extra, cap))


def _greedy_gens(G: FiniteGroup, pool: Sequence[Element]) -> list[Element]:
    target = len(pool)
    gens: list[Element] = []
    span = G.mask_of([G.identity])
    for x in pool:
        if span.sum() == target:
            break
        if not span[G.index(x)]:
            gens.append(x)
            span = _generate_mask(G, gens)
    return gens


def generating_set(G: FiniteGroup, within: Sequence[Element] | None = None) -> list[Element]:
    """Greedy generating set of G, or of the subgroup with the given elements."""
    if within is not None:
        return _greedy_gens(G, list(within))
    if G._gens is None:
        G._gens = _greedy_gens(G, G.elements())
    return list(G._gens)


def normal_closure(G: FiniteGroup, S: Sequence[Element], ambient_gens: Sequence[Element]) -> set:
    gens = list(S)
    H = _generate_mask(G, gens)
    conj = [G.right_perm(g)[G.left_perm(G.inv(g))] for g in ambient_gens]
    while True:
        idx = np.flatnonzero(H)
        new = np.unique(np.concatenate([C[idx] for C in conj])) if conj else idx[:0]
        new = new[~H[new]]
        if not new.size:
            return G.subset(H)
        gens += [G.elements()[i] for i in new]
        H = _generate_mask(G, gens)


def frattini_of(G: FiniteGroup, elements: Sequence[Element], p: int) -> set:
    """Frattini subgroup [H,H]H^p of the subgroup H with the given elements."""
    e = _p_exponent(len(elements), p)
    if e is None:
        raise NotAPGroup(f"subgroup of order {len(elements)} is not a {p}-group")
    S = generating_set(G, elements)
    rel = [G.power(s, p) for s in S]
    rel += [G.commutator(s, t) for i, s in enumerate(S) for t in S[i + 1 :]]
    return normal_closure(G, rel, S)


def frattini(G: FiniteGroup, p: int) -> set:
    check_p_group(G, p)
    return frattini_of(G, G.elements(), p)


def frattini_series_of(G: FiniteGroup, p: int) -> list[set]:
    chain = [set(G.elements())]
    while len(chain[-1]) > 1:
        chain.append(frattini_of(G, sorted(chain[-1], key=G.index), p))
    return chain


def quotient_coordinates(G: FiniteGroup, H: set, K: set, p: int) -> tuple[list[Element], dict]:
    """Basis of the elementary abelian H/K and F_p coordinates of every element of H."""
    basis: list[Element] = []
    kgens = generating_set(G, sorted(K, key=G.index))
    span = G.mask_of(K)
    for x in sorted(H, key=G.index):
        if not span[G.index(x)]:
            basis.append(x)
            span = _generate_mask(G, basis + kgens)
    coords: dict[Element, tuple[int, ...]] = {}
    Kl = sorted(K, key=G.index)
    for c in np.ndindex(*([p] * len(basis))) if basis else [()]:
        P = G.identity
        for h, ci in zip(basis, c):
            P = G.mul(P, G.power(h, int(ci)))
        for k in Kl:
            coords[G.mul(P, k)] = tuple(int(v) for v in c)
    if len(coords) != len(H):
        raise NotAPGroup("quotient is not elementary abelian")
    return basis, coords


# ---------------------------------------------------------------------------
# presheaves of groups


class PGroupPresheaf:
    """Per-level groups with natural homomorphisms, stored on element indices."""

    def __init__(self, site: TruncatedSite, groups: Sequence[FiniteGroup], underlying: SetPresheaf, name: str):
        self.site = site
        self.groups = list(groups)
        self.underlying = underlying
        self.name = name

    def __repr__(self) -> str:
        return f"PGroupPresheaf({self.name}, orders={[G.order for G in self.groups]})"

    @property
    def p(self) -> int:
        return self.site.p

    @classmethod
    def from_actions(
        cls,
        site: TruncatedSite,
        groups: Sequence[FiniteGroup],
        act: Callable[[Key, np.ndarray, int, int, Element], Element],
        name: str,
    ) -> "PGroupPresheaf":
        """``act(key, matrix, a, b, x)`` pulls x in G(F^b) back to G(F^a)."""
        labels = [G.elements() for G in groups]
        actions = {}
        for key, g in site.generators.items():
            Ga, Gb = groups[g.src], groups[g.tgt]
            actions[key] = np.array(
                [Ga.index(act(key, g.matrix, g.src, g.tgt, x)) for x in Gb.elements()], dtype=np.int64
            )
        X = SetPresheaf(site, [G.order for G in groups], actions, name, labels)
        return cls(site, groups, X, name)

    def map_of(self, f) -> Callable[[Element], Element]:
        f = la.as_fp(f, self.p)
        arr = self.underlying.act(f)
        Gb, Ga = self.groups[f.shape[0]], self.groups[f.shape[1]]
        return lambda x: Ga.elements()[arr[Gb.index(x)]]

    def homomorphism_violation(self) -> tuple[Key, Element, Element] | None:
        for key, g in self.site.generators.items():
            Gb, Ga = self.groups[g.tgt], self.groups[g.src]
            arr = self.underlying.actions[key]
            els_a, els_b = Ga.elements(), Gb.elements()
            for s in generating_set(Gb):
                fs = els_a[arr[Gb.index(s)]]
                bad = np.flatnonzero(arr[Gb.left_perm(s)] != Ga.left_perm(fs)[arr])
                if bad.size:
                    return key, s, els_b[bad[0]]
        return None

    def validate(self, seed: int = 0) -> tuple[bool, str]:
        for G in self.groups:
            if _p_exponent(G.order, self.p) is None:
                return False, f"{G.name} has order {G.order}"
        w = self.homomorphism_violation()
        if w is not None:
            return False, f"generator {w[0]} is not a homomorphism"
        rep = validate(self.underlying, seed)
        if not rep.ok:
            return False, f"not functorial: {rep.witness}"
        return True, "ok"


def underlying_presheaf(G: PGroupPresheaf) -> SetPresheaf:
    return G.underlying


def _apply(T: np.ndarray, v: Sequence[int], p: int) -> tuple[int, ...]:
    col = np.array(v, dtype=np.int64).reshape(-1, 1)
    return tuple(int(u) for u in la.matmul(T, col, p).reshape(-1))


def elemab(L: LinFunctor, name: str | None = None) -> PGroupPresheaf:
    """A linear functor viewed as a presheaf of elementary abelian groups."""
    p = L.p
    groups = [elementary_abelian_group(n, p) for n in L.dims]

    def act(key, M, a, b, x):
        return _apply(L.actions[key], x, p)

    return PGroupPresheaf.from_actions(L.site, groups, act, name or f"elemab({L.name})")


def heisenberg(site: TruncatedSite) -> PGroupPresheaf:
    p = site.p
    V = lf.sym(site, 1)
    W = lf.ext(site, 2)
    groups = [heisenberg_group(d, p) for d in range(site.N + 1)]

    def act(key, M, a, b, x):
        A, B, C = x[:b], x[b : 2 * b], x[2 * b :]
        Va, Wa = V.actions[key], W.actions[key]

        return _apply(Va, A, p) + _apply(Va, B, p) + _apply(Wa, C, p)

    return PGroupPresheaf.from_actions(site, groups, act, "Heis")


def zmod(site: TruncatedSite, modulus: int) -> PGroupPresheaf:
    """The constant presheaf with value Z/modulus."""
    G = cyclic_group(modulus)
    return PGroupPresheaf.from_actions(site, [G] * (site.N + 1), lambda k, M, a, b, x: x, f"Z/{modulus}")


def lifted_zmod_power(site: TruncatedSite, e: int) -> PGroupPresheaf:
    """V -> (Z/p^e)^{dim V}, acting by integer lifts of the transposed matrices.

    Lifts do not compose, so this family is not a presheaf for e >= 2; it is
    kept as a planted non-functorial input.
    """
    p = site.p
    m = p**e
    groups = [abelian_group([m] * d, f"(Z/{m})^{d}") for d in range(site.N + 1)]

    def act(key, M, a, b, x):
        if not a:
            return ()
        v = (M.T.astype(np.int64) @ np.array(x, dtype=np.int64).reshape(-1, 1)) % m if b else np.zeros((a, 1), dtype=np.int64)
        return tuple(int(u) for u in v.reshape(-1))

    return PGroupPresheaf.from_actions(site, groups, act, f"(Z/{m})^V")


# ---------------------------------------------------------------------------
# Frattini series


@dataclass
class FrattiniSeries:
    presheaf: PGroupPresheaf
    levels: list[list[set]]  # levels[d][i] = Phi_i G(F^d)
    graded: list[LinFunctor]

    @property
    def length(self) -> int:
        return len(self.graded)


def p_derived_series(G: PGroupPresheaf) -> FrattiniSeries:
    site = G.site
    p = G.p
    N = site.N
    chains = [frattini_series_of(H, p) for H in G.groups]
    L = max(len(c) for c in chains) - 1
    for c in chains:
        while len(c) < L + 1:
            c.append(set(c[-1]))
    graded = []
    for i in range(L):
        bases, coords = [], []
        for d in range(N + 1):
            H = G.groups[d]
            B, C = quotient_coordinates(H, chains[d][i], chains[d][i + 1], p)
            bases.append(B)
            coords.append(C)
        actions = {}
        for key, g in site.generators.items():
            Gb, Ga = G.groups[g.tgt], G.groups[g.src]
            arr = G.underlying.actions[key]
            M = la.zeros(len(bases[g.src]), len(bases[g.tgt]))
            for j, h in enumerate(bases[g.tgt]):
                img = Ga.elements()[arr[Gb.index(h)]]
                if img not in coords[g.src]:
                    raise AssertionError(f"Phi_{i} is not preserved by {key}")
                M[:, j] = coords[g.src][img]
            actions[key] = M
        graded.append(LinFunctor(site, [len(b) for b in bases], actions, f"gr{i}({G.name})"))
    return FrattiniSeries(G, chains, graded)


def frattini_naturality_violation(S: FrattiniSeries) -> tuple[Key, int] | None:
    G = S.presheaf
    for key, g in G.site.generators.items():
        arr = G.underlying.actions[key]
        Gb, Ga = G.groups[g.tgt], G.groups[g.src]
        for i, (Pb, Pa) in enumerate(zip(S.levels[g.tgt], S.levels[g.src])):
            for x in Pb:
                if Ga.elements()[arr[Gb.index(x)]] not in Pa:
                    return key, i
    return None


@dataclass
class PFiniteResult:
    verdict: str  # "PFinite" or "NotDetectedInWindow"
    total: LinFunctor
    degree: object
    gamma_degree: object
    uniform_length: bool
    pieces_finite: bool

    @property
    def p_finite(self) -> bool:
        return self.verdict == "PFinite"


def p_finite_test(G: PGroupPresheaf) -> PFiniteResult:
    if G.groups[0].order != 1:
        raise ValueError("p-finiteness is tested on presheaves with trivial value at 0")
    S = p_derived_series(G)
    total = S.graded[0] if S.graded else lf.zero_functor(G.site)
    for piece in S.graded[1:]:
        total = lf.direct_sum(total, piece)
    total.name = f"gr({G.name})"
    deg = lf.poly_degree(total)
    gdeg = growth.degree_fit(growth.profile(G)).degree
    pieces = all(lf.poly_degree(piece) is not ExceedsWindow for piece in S.graded)
    ok = deg is not ExceedsWindow
    return PFiniteResult("PFinite" if ok else "NotDetectedInWindow", total, deg, gdeg, True, pieces)


# ---------------------------------------------------------------------------
# cross-effects for groups


def _identity_index(G: PGroupPresheaf, d: int) -> int:
    H = G.groups[d]
    return H.index(H.identity)


def group_cross_effect(G: PGroupPresheaf, args: Sequence[int]) -> set:
    args = tuple(int(a) for a in args)
    total = sum(args)
    if total > G.site.N:
        raise WindowExceeded(f"cross-effect at {args} exceeds the window")
    if G.groups[0].order != 1:
        raise ValueError("group cross-effects need a trivial value at 0")
    keep = np.ones(G.groups[total].order, dtype=bool)
    for i in range(len(args)):
        incl = lf._omit_block(args, i)
        arr = G.underlying.act(incl)
        keep &= arr == _identity_index(G, total - args[i])
    els = G.groups[total].elements()
    return {els[k] for k in np.flatnonzero(keep)}


def group_poly_degree(G: PGroupPresheaf):
    for n in range(G.site.N):
        tuples = lf.window_tuples(n + 1, G.site.N)
        if tuples and all(len(group_cross_effect(G, t)) == 1 for t in tuples):
            return n
    return ExceedsWindow


@dataclass
class ShortExact:
    K: PGroupPresheaf
    G: PGroupPresheaf
    Q: PGroupPresheaf
    inc: list[np.ndarray]  # element indices K(F^d) -> G(F^d)
    proj: list[np.ndarray]  # element indices G(F^d) -> Q(F^d)

    def check(self) -> None:
        """Raise NotExact unless every level is a short exact sequence of natural maps."""
        site = self.G.site
        for d in range(site.N + 1):
            i, q = self.inc[d], self.proj[d]
            if np.unique(i).size != i.size:
                raise NotExact("inclusion is not injective", d)
            if np.unique(q).size != self.Q.groups[d].order:
                raise NotExact("projection is not surjective", d)
            e = _identity_index(self.Q, d)
            ker = set(np.flatnonzero(q == e).tolist())
            if ker != set(i.tolist()):
                raise NotExact("image of the inclusion differs from the kernel", d)
        for key, g in site.generators.items():
            for A, B, f in ((self.K, self.G, self.inc), (self.G, self.Q, self.proj)):
                lhs = f[g.src][A.underlying.actions[key]]
                rhs = B.underlying.actions[key][f[g.tgt]]
                if not np.array_equal(lhs, rhs):
                    raise NotExact(f"map is not natural for {key}", g.tgt)


def cross_effect_exactness_check(ses: ShortExact, n: int) -> bool:
    """cr_n K -> cr_n G -> cr_n Q short exact at every in-window tuple of arity n."""
    ses.check()
    for t in lf.window_tuples(n, ses.G.site.N):
        d = sum(t)
        idx = {}
        for name, P in (("K", ses.K), ("G", ses.G), ("Q", ses.Q)):
            H = P.groups[d]
            idx[name] = {H.index(x) for x in group_cross_effect(P, t)}
        img_k = {int(ses.inc[d][k]) for k in idx["K"]}
        if not img_k <= idx["G"]:
            return False
        img_g = {int(ses.proj[d][x]) for x in idx["G"]}
        if img_g != idx["Q"]:
            return False
        e = _identity_index(ses.Q, d)
        ker = {x for x in idx["G"] if ses.proj[d][x] == e}
        if ker != img_k:
            return False
    return True


def heisenberg_sequence(site: TruncatedSite) -> ShortExact:
    """Lambda^2 -> Heis -> V + V."""
    H = heisenberg(site)
    K = elemab(lf.ext(site, 2), "L^2")
    V = lf.sym(site, 1)
    Q = elemab(lf.direct_sum(V, V), "V+V")
    inc, proj = [], []
    for d in range(site.N + 1):
        Gd = H.groups[d]
        inc.append(np.array([Gd.index((0,) * (2 * d) + x) for x in K.groups[d].elements()], dtype=np.int64))
        proj.append(np.array([Q.groups[d].index(x[: 2 * d]) for x in Gd.elements()], dtype=np.int64))
    return ShortExact(K, H, Q, inc, proj)


# ---------------------------------------------------------------------------
# augmentation ideal


@dataclass
class AugmentationResult:
    dims: list[int]  # dim I^k for k = 1, 2, ... up to the first zero
    nilpotency: int | None  # least k with I^k = 0
    frattini_quotient_dim: int

    @property
    def indecomposables(self) -> int:
        return self.dims[0] - (self.dims[1] if len(self.dims) > 1 else 0)

    @property
    def agrees(self) -> bool:
        return self.indecomposables == self.frattini_quotient_dim


def augmentation_filtration(G: FiniteGroup, p: int, k_max: int = 64, cap: int = 1024) -> AugmentationResult:
    """Powers of the augmentation ideal of F_p[G], as right ideals generated stepwise."""
    if G.order > cap:
        raise la.CapExceeded(f"group algebra of {G.name}", G.order, cap)
    e = check_p_group(G, p)
    n = G.order
    els = G.elements()
    ident = G.index(G.identity)
    S = generating_set(G)
    right = [np.array([G.index(G.mul(x, s)) for x in els], dtype=np.int64) for s in S]

    def times(V: np.ndarray, perm: np.ndarray) -> np.ndarray:
        out = np.zeros_like(V)
        out[:, perm] = V
        return out

    I_basis = la.zeros(n - 1, n)
    others = [i for i in range(n) if i != ident]
    I_basis[np.arange(n - 1), others] = 1
    I_basis[:, ident] = p - 1
    cur, _ = la.row_basis(I_basis, p) if n > 1 else (la.zeros(0, n), [])
    dims = [cur.shape[0]]
    while dims[-1] and len(dims) < k_max:
        gens = [(times(cur, r) - cur) % p for r in right]
        J = la.Subspace.span(np.concatenate(gens) if gens else la.zeros(0, n), n, p)
        while True:
            nxt = J
            for r in right:
                nxt = nxt.join(times(nxt.basis, r)) if nxt.dim else nxt
            if nxt.dim == J.dim:
                break
            J = nxt
        cur = J.basis
        dims.append(J.dim)
    phi = frattini(G, p)
    fq = e - _p_exponent(len(phi), p)
    nil = len(dims) if dims[-1] == 0 else None
    return AugmentationResult(dims, nil, fq)
