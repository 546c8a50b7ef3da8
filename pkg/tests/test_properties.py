"""Seed-fixed randomized checks of algebraic invariants."""

from functools import lru_cache

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fpresheaf import growth as gr
from fpresheaf import kappa as ka
from fpresheaf import linalg as la
from fpresheaf import linfun as lf
from fpresheaf import pgrp as pg
from fpresheaf import presheaf as ps
from fpresheaf.site import TruncatedSite

FAST = settings(max_examples=40, deadline=None, derandomize=True,
                suppress_health_check=[HealthCheck.function_scoped_fixture])
SLOW = settings(max_examples=12, deadline=None, derandomize=True,
                suppress_health_check=[HealthCheck.function_scoped_fixture])


@lru_cache(maxsize=None)
def _site(p, N):
    return TruncatedSite(p, N)


@st.composite
def matrices(draw, p=None, max_dim=4):
    p = draw(st.sampled_from([2, 3, 5])) if p is None else p
    r = draw(st.integers(0, max_dim))
    c = draw(st.integers(0, max_dim))
    M = draw(arrays(np.int64, (r, c), elements=st.integers(0, p - 1)))
    return p, M


# -- linear algebra ----------------------------------------------------------


@FAST
@given(matrices(max_dim=6))
def test_rank_nullity_and_transpose(pm):
    p, M = pm
    r = la.rank(M, p)
    assert r == la.rank(M.T, p)
    K = la.kernel_basis(M, p)
    assert r + K.shape[0] == M.shape[1]
    if K.size and M.size:
        assert not la.matmul(M, K.T, p).any()


@FAST
@given(matrices(max_dim=5), st.data())
def test_solve_is_consistent(pm, data):
    p, M = pm
    x = data.draw(arrays(np.int64, (M.shape[1],), elements=st.integers(0, p - 1)))
    b = la.matmul(M, x.reshape(-1, 1), p).reshape(-1) if M.shape[0] else np.zeros(0, dtype=np.int64)
    y = la.solve(M, b, p)
    assert y is not None
    assert np.array_equal(la.matmul(M, y.reshape(-1, 1), p).reshape(-1) if M.shape[0] else b, b)


@FAST
@given(matrices(max_dim=5), matrices(max_dim=5))
def test_subspace_join_bounds(a, b):
    p, A = a
    _, B = b
    n = 5
    A = np.pad(A % p, ((0, 0), (0, n - A.shape[1])))
    B = np.pad(B % p, ((0, 0), (0, n - B.shape[1])))
    SA = la.Subspace.span(A, n, p)
    J = SA.join(B)
    SB = la.Subspace.span(B, n, p)
    assert max(SA.dim, SB.dim) <= J.dim <= min(n, SA.dim + SB.dim)
    assert J.contains(A) and J.contains(B)


# -- site ----------------------------------------------------------------------


@FAST
@given(matrices())
def test_factorization_recomposes(pm):
    p, M = pm
    S = _site(p, 4)
    assert np.array_equal(S.recompose(S.word(M), M.shape[1]), M % p)


CATALOG = {
    "gr2": lambda s: ps.gr(s, 2),
    "grle2": lambda s: ps.gr_le(s, 2),
    "grle1": lambda s: ps.gr_le(s, 1),
    "hom1": lambda s: ps.homset(s, 1),
    "L2": lambda s: ps.underlying_sets(lf.ext(s, 2)),
    "S1": lambda s: ps.underlying_sets(lf.sym(s, 1)),
    "pt": lambda s: ps.point(s),
}


@lru_cache(maxsize=None)
def _obj(name, p=2, N=4):
    return CATALOG[name](_site(p, N))


@FAST
@given(st.sampled_from(sorted(CATALOG)), st.data())
def test_action_is_contravariant(name, data):
    X = _obj(name)
    S = X.site
    a, b, c = (data.draw(st.integers(0, 4)) for _ in range(3))
    f = data.draw(arrays(np.int64, (b, a), elements=st.integers(0, 1)))
    g = data.draw(arrays(np.int64, (c, b), elements=st.integers(0, 1)))
    gf = la.matmul(g, f, 2) if b else la.zeros(c, a)
    assert np.array_equal(S.act_through(X, gf), S.act_through(X, f)[S.act_through(X, g)])


# -- presheaves and growth -------------------------------------------------------


@FAST
@given(st.sampled_from(sorted(CATALOG)), st.sampled_from(sorted(CATALOG)))
def test_growth_additive_under_product(x, y):
    X, Y = _obj(x, 2, 3), _obj(y, 2, 3)
    P = ps.product(X, Y)
    gx, gy, gp = (gr.profile(Z).values for Z in (X, Y, P))
    assert all(abs(a + b - c) < 1e-12 for a, b, c in zip(gx, gy, gp))
    assert ps.coproduct(X, Y).sizes == tuple(a + b for a, b in zip(X.sizes, Y.sizes))


@FAST
@given(st.lists(st.integers(0, 3), min_size=1, max_size=4))
def test_integer_polynomial_growth_degree(coeffs):
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs = coeffs[:-1]
    vals = [sum(c * t**k for k, c in enumerate(coeffs)) for t in range(5)]
    fit = gr.degree_fit(gr.GrowthProfile(2, tuple(2**v for v in vals)))
    assert fit.exact and fit.degree == len(coeffs) - 1


@FAST
@given(st.sampled_from(["gr2", "grle2", "L2"]), st.integers(0, 4), st.integers(0, 4))
def test_rank_filtration_counting(name, n, d):
    X = _obj(name)
    ok, lhs, rhs = ps.subquotient_count_check(X, n, d)
    assert ok and lhs == rhs


# -- linear functors ---------------------------------------------------------------


LINEAR = {
    "S1": lambda s: lf.sym(s, 1),
    "S2": lambda s: lf.sym(s, 2),
    "S3": lambda s: lf.sym(s, 3),
    "L2": lambda s: lf.ext(s, 2),
    "L3": lambda s: lf.ext(s, 3),
    "Ibar": lambda s: lf.ibar(s),
    "F[gr2]": lambda s: lf.linearize(ps.gr(s, 2)),
    "F[grle1]": lambda s: lf.linearize(ps.gr_le(s, 1)),
    "S1+L2": lambda s: lf.direct_sum(lf.sym(s, 1), lf.ext(s, 2)),
    "S1xS1": lambda s: lf.tensor(lf.sym(s, 1), lf.sym(s, 1)),
}


@lru_cache(maxsize=None)
def _lin(name, p=2, N=4):
    return LINEAR[name](_site(p, N))


@SLOW
@given(st.sampled_from(sorted(LINEAR)), st.integers(0, 3))
def test_q_n_idempotent_and_bounded(name, n):
    F = _lin(name)
    Q = lf.q_n(F, n).functor
    assert lf.q_n(Q, n).functor.dims == Q.dims
    deg = lf.poly_degree(Q)
    assert deg is not lf.ExceedsWindow and deg <= n


ADJOINT_PAIRS = [
    ("pt", "S1"), ("gr2", "L2"), ("grle1", "S1"), ("gr2", "S2"), ("S1", "S1"),
    ("grle2", "L2"), ("hom1", "S1"), ("L2", "L2"), ("grle1", "L2"), ("pt", "L2"),
]


@SLOW
@given(st.sampled_from(ADJOINT_PAIRS))
def test_adjunction_cardinality(pair):
    x, g = pair
    X, G = _obj(x, 2, 3), _lin(g, 2, 3)
    count = len(lf.set_hom(X, G))
    assert count == 2 ** lf.nat_hom_dim(lf.linearize(X), G)


# -- kappa -----------------------------------------------------------------------


@SLOW
@given(st.sampled_from(["pt", "S1", "grle1", "gr2"]), st.sampled_from(["pt", "S1", "grle1"]), st.integers(0, 3))
def test_kappa_product_formula(x, y, n):
    X, Y = _obj(x, 2, 3), _obj(y, 2, 3)
    lhs = ka.kappa_degree(ps.product(X, Y), n)
    rhs = sum(ka.kappa_degree(X, i) * ka.kappa_degree(Y, n - i) for i in range(n + 1))
    assert lhs == rhs


@SLOW
@given(st.integers(0, 3))
def test_kappa_monotone_under_surjection(n):
    S = _site(2, 3)
    # hom(-, F^2) -> GL_2 \ hom(-, F^2) is onto, so degree-n spaces inject
    assert ka.kappa_degree(ps.gr_le(S, 2), n) <= ka.kappa_degree(ps.homset(S, 2), n)
    assert ka.kappa_degree(ps.point(S), n) <= ka.kappa_degree(ps.gr(S, 2), n)


# -- groups ------------------------------------------------------------------------


@FAST
@given(st.lists(st.sampled_from([2, 4, 8]), min_size=1, max_size=3))
def test_augmentation_indecomposables_match_frattini(mods):
    G = pg.abelian_group(mods)
    r = pg.augmentation_filtration(G, 2)
    assert r.agrees
    assert r.frattini_quotient_dim == len(mods)
    basis, coords = pg.quotient_coordinates(G, set(G.elements()), pg.frattini(G, 2), 2)
    assert len(basis) == len(mods) and len(coords) == G.order


@FAST
@given(st.integers(1, 3), st.integers(1, 2))
def test_frattini_series_is_natural(d, e):
    S = _site(2, 3)
    G = pg.elemab(lf.sym(S, d)) if e == 1 else pg.zmod(S, 2**d)
    series = pg.p_derived_series(G)
    assert pg.frattini_naturality_violation(series) is None


# -- tables ------------------------------------------------------------------------


@FAST
@given(st.integers(1, 2), st.integers(1, 5), st.data())
def test_end_set_table_round_trip(n, size, data):
    rows = la.hom_count(n, n, 2)
    A = data.draw(arrays(np.int64, (rows, size), elements=st.integers(0, size - 1)))
    Z = ps.EndSetTable(n, size, A, 2)
    W = ps.EndSetTable.parse(Z.to_text(), 2)
    assert np.array_equal(W.action, Z.action)
