import itertools
from math import comb

import numpy as np
import pytest

from fpresheaf import linalg as la
from fpresheaf import linfun as lf
from fpresheaf import presheaf as ps
from fpresheaf.site import TruncatedSite


def test_catalog_dimensions(site):
    assert lf.sym(site, 2).dims == tuple(comb(t + 1, 2) for t in range(5))
    assert lf.sym(site, 3).dims == tuple(comb(t + 2, 3) for t in range(5))
    assert lf.ext(site, 2).dims == tuple(comb(t, 2) for t in range(5))
    assert lf.ibar(site).dims == tuple(2**t - 1 for t in range(5))
    assert lf.freehom(site, 1).dims == tuple(2**t for t in range(5))
    assert lf.tensor(lf.sym(site, 1), lf.sym(site, 1)).dims == tuple(t * t for t in range(5))


def test_linearize_point_is_constant(site):
    F = lf.linearize(ps.point(site))
    assert F.dims == (1,) * 5
    assert lf.find_isomorphism(F, lf.constant_linear(site)) is not None


def test_split_constant(site):
    c, f = lf.split_constant(lf.ext(site, 2))
    assert c.dims == (0,) * 5 and f.dims == lf.ext(site, 2).dims
    c, f = lf.split_constant(lf.linearize(ps.point(site)))
    assert c.dims == (1,) * 5 and f.dims == (0,) * 5
    c, f = lf.split_constant(lf.linearize(ps.gr(site, 2)))
    assert c.dims == (1,) * 5 and f.dims == (0, 0, 1, 7, 35)


def _incl_excl_dim(F, args):
    n = len(args)
    total = 0
    for r in range(n + 1):
        for S in itertools.combinations(range(n), r):
            total += (-1) ** (n - r) * F.dims[sum(args[i] for i in S)]
    return total


@pytest.mark.parametrize("name,k", [("ext", 2), ("ext", 3), ("sym", 2), ("sym", 3), ("ibar", 0)])
def test_cross_effect_dims_against_inclusion_exclusion(site, name, k):
    F = lf.ibar(site) if name == "ibar" else getattr(lf, name)(site, k)
    for arity in range(1, 5):
        for t in lf.window_tuples(arity, 4):
            assert lf.cross_effect(F, t).dim == _incl_excl_dim(F, t)


def test_cross_effect_examples(site):
    L = lf.ext(site, 2)
    assert lf.cross_effect(L, (1, 1)).dim == 1
    assert lf.cross_effect(L, (1, 1, 1)).dim == 0
    assert lf.cross_effect(lf.constant_linear(site), (1, 1)).dim == 0


def test_poly_degree(site):
    assert lf.poly_degree(lf.ext(site, 2)) == 2
    assert lf.poly_degree(lf.sym(site, 3)) == 3
    assert lf.poly_degree(lf.sym(site, 1)) == 1
    assert lf.poly_degree(lf.constant_linear(site)) == 0
    assert lf.poly_degree(lf.ibar(site)) is lf.ExceedsWindow
    assert lf.poly_degree(lf.ext(TruncatedSite(2, 3), 3)) is lf.ExceedsWindow


def test_q2_of_grassmannian(site):
    Q = lf.q_n(lf.linearize(ps.gr(site, 2)), 2)
    assert Q.functor.dims == (1, 1, 2, 4, 7)
    assert Q.partial_dims == [2, 3, 4]
    target = lf.direct_sum(lf.ext(site, 2), lf.constant_linear(site))
    eta = lf.find_isomorphism(Q.functor, target)
    assert eta is not None and eta.is_natural() and eta.is_isomorphism()


def test_q_n_of_polynomial_functor_is_identity(site):
    L = lf.ext(site, 2)
    assert lf.q_n(L, 2).functor.dims == L.dims
    assert lf.q_n(L, 1).functor.dims == (0,) * 5


def _equivariant_count(F, G, d):
    """Count matrices G(d) x F(d) commuting with the whole monoid End(F^d)."""
    site = F.site
    p = site.p
    m, n = G.dims[d], F.dims[d]
    idx = np.arange(p ** (m * n), dtype=np.int64)
    cands = np.stack([(idx // p**k) % p for k in range(m * n)], axis=1).reshape(-1, m, n)
    for e in site.hom(d, d):
        Fe, Ge = site.act_through(F, e), site.act_through(G, e)
        lhs = np.einsum("kij,jl->kil", cands, Fe) % p
        rhs = np.einsum("ij,kjl->kil", Ge, cands) % p
        cands = cands[(lhs == rhs).reshape(len(cands), -1).all(axis=1)]
    return len(cands)


def test_nat_hom_against_exhaustive_search(site3):
    cases = [(lf.ext(site3, 2), lf.ext(site3, 2)), (lf.sym(site3, 2), lf.ext(site3, 2)),
             (lf.sym(site3, 1), lf.sym(site3, 1)), (lf.ext(site3, 2), lf.sym(site3, 2))]
    for F, G in cases:
        basis = lf.nat_hom(F, G, cross_check=True)
        assert 2 ** len(basis) == _equivariant_count(F, G, 3)


def test_nat_hom_examples(site):
    assert lf.nat_hom_dim(lf.ext(site, 2), lf.ext(site, 2)) == 1
    assert lf.nat_hom_dim(lf.sym(site, 2), lf.zero_functor(site)) == 0
    (eta,) = lf.nat_hom(lf.sym(site, 2), lf.ext(site, 2), cross_check=True)
    S2, L2 = lf.sym(site, 2), lf.ext(site, 2)
    C = eta.components[2]
    # the nonzero map kills squares and sends x0 x1 to the generator of Lambda^2
    assert C[:, S2.labels[2].index((1, 1))].tolist() == [1]
    assert not C[:, S2.labels[2].index((2, 0))].any()
    assert not C[:, S2.labels[2].index((0, 2))].any()


def test_generic_and_presented_solvers_agree(site):
    X = ps.gr_le(site, 2)
    FX = lf.linearize(X)
    G = lf.ext(site, 2)
    presented = lf._nat_hom_presented(FX, G)
    generic = lf._nat_hom_generic(FX, G)
    assert len(presented) == len(generic)


@pytest.mark.parametrize(
    "build,degree",
    [
        (lambda s: ps.gr(s, 2), 2),
        (lambda s: ps.underlying_sets(lf.ext(s, 2)), 2),
        (lambda s: ps.point(s), 0),
        (lambda s: ps.underlying_sets(lf.sym(s, 1)), 1),
    ],
)
def test_finiteness_degree(site, build, degree):
    assert lf.finiteness_degree(build(site)).degree == degree


def test_finiteness_tower_of_grassmannian(site):
    res = lf.finiteness_degree(ps.gr(site, 2), stop_early=False)
    assert [st.injective for st in res.tower] == [False, False, True, True]


def test_splitrank_not_detected(site):
    res = lf.finiteness_degree(ps.splitrank(lf.ext(site, 2)), stop_early=False)
    assert res.degree is lf.NotDetectedInWindow
    assert not any(st.injective for st in res.tower)


def test_induced_linear(site):
    assert lf.induced_linear(ps.grassmannian_table(2, 2), site).degree == 2
    triv = lf.induced_linear(ps.trivial_table(2, 2), site)
    assert triv.degree == 0 and triv.functor.dims == (1,) * 5
    free = lf.induced_linear(ps.regular_table(2, 2), site)
    V2 = ps.underlying_sets(lf.direct_sum(lf.sym(site, 1), lf.sym(site, 1)))
    assert free.degree == lf.finiteness_degree(V2).degree == 1


def test_relation_quotient_cross_check(site3):
    Z = ps.orbit_table(2, 2)
    assert lf._relation_quotient(Z, site3).dims == lf.linearize(ps.induced(Z, site3).presheaf).dims


def test_odd_prime_functors(site_p3):
    S = site_p3
    assert lf.ext(S, 2).dims == (0, 0, 1, 3)
    assert lf.poly_degree(lf.sym(S, 2)) == 2
    assert lf.nat_hom_dim(lf.sym(S, 1), lf.sym(S, 1)) == 1
