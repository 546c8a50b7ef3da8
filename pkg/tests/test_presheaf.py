import itertools

import numpy as np
import pytest

from fpresheaf import linalg as la
from fpresheaf import linfun as lf
from fpresheaf import presheaf as ps
from fpresheaf.site import TruncatedSite

from conftest import brute_subspaces


def _subspace_counts(t, p=2):
    spaces = brute_subspaces(t, p)
    return {k: sum(1 for S in spaces if len(S) == p**k) for k in range(t + 1)}


def test_grassmannian_sizes_against_subspace_oracle(site):
    counts = [_subspace_counts(t) for t in range(5)]
    want_le = tuple(sum(c.get(k, 0) for k in range(3)) for c in counts)
    want_gr = tuple(1 + c.get(2, 0) for c in counts)
    assert ps.gr_le(site, 2).sizes == want_le == (1, 2, 5, 15, 51)
    assert ps.gr(site, 2).sizes == want_gr == (1, 1, 2, 8, 36)


def test_homset_and_sets_sizes(site):
    assert ps.homset(site, 2).sizes == tuple(2 ** (2 * t) for t in range(5))
    assert ps.underlying_sets(lf.ext(site, 2)).sizes == tuple(2 ** (t * (t - 1) // 2) for t in range(5))


@pytest.mark.parametrize(
    "build",
    [
        lambda s: ps.gr(s, 2),
        lambda s: ps.gr_le(s, 2),
        lambda s: ps.homset(s, 1),
        lambda s: ps.underlying_sets(lf.ext(s, 2)),
        lambda s: ps.empty(s),
        lambda s: ps.point(s),
    ],
)
def test_catalog_validates(site, build):
    assert ps.validate(build(site), seed=3)


def test_products_and_wedges(site):
    g = ps.gr(site, 2)
    P = ps.product(g, g)
    assert P.sizes[3] == 64
    assert ps.wedge(g, g).sizes[3] == 15
    assert ps.coproduct(g, g).sizes == tuple(2 * s for s in g.sizes)
    assert ps.validate(P, seed=0)


def test_components(site):
    g = ps.gr(site, 2)
    assert g.is_connected
    assert len(ps.components(g)) == 1
    C = ps.components(ps.coproduct(g, ps.gr_le(site, 1)))
    assert len(C) == 2
    assert [len(f) for f in C[0].fibers] == list(g.sizes)
    assert len(ps.components(ps.underlying_sets(lf.ext(site, 2)))) == 1


def test_constant_rank_filtration(site):
    f = ps.rank_filtration(ps.constant(site, 3))
    assert f.regular_counts() == [3, 0, 0, 0, 0]
    assert f.generated_by() == 0


def test_exterior_square_rank_filtration(site):
    X = ps.underlying_sets(lf.ext(site, 2))
    f = ps.rank_filtration(X)
    assert f.regular_counts()[2:] == [1, 0, 28]
    assert int(f.new_elements(2, 4).size) == 35
    assert ps.subquotient_count_check(X, 2, 4, f) == (True, 35, 35)
    assert ps.subquotient_count_check(X, 3, 2, f)[0]


def test_grassmannian_subquotient(site):
    assert ps.subquotient_count_check(ps.gr(site, 2), 2, 3) == (True, 7, 7)


def test_regular_elements_match_idempotent_criterion(site):
    X = ps.gr_le(site, 2)
    f = ps.rank_filtration(X)
    for k in range(4):
        reg = set(f.regular(k).tolist())
        assert reg == {x for x in range(X.sizes[k]) if ps.is_regular(X, k, x)}


def _brute_natural_maps(X, Y):
    """Every levelwise function checked against every map in the window."""
    site = X.site
    N = site.N
    found = 0
    choices = [itertools.product(range(Y.sizes[d]), repeat=X.sizes[d]) for d in range(N + 1)]
    for comp in itertools.product(*choices):
        comp = [np.array(c, dtype=np.int64) for c in comp]
        ok = True
        for a in range(N + 1):
            for b in range(N + 1):
                for f in site.hom(a, b):
                    if not np.array_equal(comp[a][site.act_through(X, f)], site.act_through(Y, f)[comp[b]]):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        found += ok
    return found


def test_set_maps_against_brute_force():
    S = TruncatedSite(2, 2)
    g, gl = ps.gr(S, 2), ps.gr_le(S, 1)
    for X, Y in [(g, g), (gl, gl), (g, gl), (gl, ps.underlying_sets(lf.sym(S, 1)))]:
        assert len(ps.set_maps(X, Y)) == _brute_natural_maps(X, Y)


def test_endomorphisms_of_grassmannian(site):
    assert len(ps.set_end(ps.gr(site, 2))) == 2


def test_mono_test(site):
    g = ps.gr(site, 2)
    assert ps.mono_test(ps.identity_map(g))
    collapse = ps.SetMap(g, ps.point(site), [np.zeros(s, dtype=np.int64) for s in g.sizes])
    assert not ps.mono_test(collapse)
    assert not collapse.components[2].size == np.unique(collapse.components[2]).size


def test_unnatural_map_rejected(site):
    g = ps.gr_le(site, 1)
    comps = [np.arange(s, dtype=np.int64) for s in g.sizes]
    comps[1] = comps[1][::-1].copy()
    with pytest.raises(ps.NaturalityViolation):
        ps.SetMap(g, g, comps).check_natural()


@pytest.mark.parametrize(
    "table,expected",
    [
        (lambda: ps.grassmannian_table(2, 2), (1, 1, 2, 8, 36)),
        (lambda: ps.orbit_table(2, 2), (1, 2, 5, 15, 51)),
        (lambda: ps.regular_table(2, 2), (1, 4, 16, 64, 256)),
        (lambda: ps.trivial_table(2, 2), (1, 1, 1, 1, 1)),
    ],
)
def test_induced_presheaves(site, table, expected):
    Z = table()
    assert Z.law_violation() is None
    X = ps.induced(Z, site).presheaf
    assert X.sizes == expected
    assert ps.validate(X, seed=0)


def test_orbit_table_grassmannian_count_at_three(site):
    counts = _subspace_counts(3)
    assert ps.induced(ps.orbit_table(2, 2), site).presheaf.sizes[3] == counts[0] + counts[1] + counts[2]


def test_table_text_round_trip(tmp_path):
    Z = ps.grassmannian_table(2, 2)
    text = Z.to_text()
    assert text.startswith("n=2 size=2\n") and not text.endswith("\n\n")
    assert len(text.splitlines()) == 1 + 16
    path = tmp_path / "z.txt"
    path.write_text(text)
    W = ps.EndSetTable.load(path, 2)
    assert np.array_equal(W.action, Z.action)


def test_table_errors():
    with pytest.raises(ValueError):
        ps.EndSetTable.parse("n=1 size=2\n0 0\n", 2)
    with pytest.raises(ValueError):
        ps.EndSetTable.parse("n=1 size=2\n0 0\n0 5\n", 2)
    bad = ps.EndSetTable(1, 2, np.array([[1, 0], [1, 0]]), 2)
    assert bad.law_violation() is not None


def test_splitrank_has_same_sizes(site):
    L = lf.ext(site, 2)
    X = ps.splitrank(L)
    assert X.sizes == ps.underlying_sets(L).sizes
    assert ps.validate(X, seed=0)
