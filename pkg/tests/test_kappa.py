import pytest

from fpresheaf import kappa as ka
from fpresheaf import linfun as lf
from fpresheaf import presheaf as ps
from fpresheaf.site import TruncatedSite, WindowExceeded

from conftest import dickson_count


def test_dickson_oracle():
    assert [ka.dickson_dim(2, m) for m in range(12)] == [dickson_count(m) for m in range(12)]
    assert ka.dickson_dim(2, 6) == 2
    assert ka.dickson_dim(2, 1) == 0
    assert all(ka.dickson_dim(1, m) == 1 for m in range(10))
    with pytest.raises(ka.Unsupported):
        ka.dickson_dim(3, 4)


def test_kappa_grassmannians(site):
    assert ka.poincare(ps.gr_le(site, 2), 4).dims == tuple(dickson_count(m) for m in range(5))
    assert ka.poincare(ps.gr(site, 2), 4).dims == (1, 0, 0, 1, 0)
    assert ka.poincare(ps.gr(site, 2), 4).dims == tuple(ka.grassmannian_kappa_dim(2, m) for m in range(5))
    assert ka.poincare(ps.gr_le(site, 1), 4).dims == (1,) * 5


def test_kappa_sphere_and_point(site):
    assert ka.poincare(ps.underlying_sets(lf.sym(site, 1)), 4).dims == (1,) * 5
    assert ka.poincare(ps.point(site), 4).dims == (1, 0, 0, 0, 0)


def test_kappa_exterior_square(site):
    dims = ka.poincare(ps.underlying_sets(lf.ext(site, 2)), 4).dims
    assert dims == (1, 0, 0, 1, 0)


def test_product_with_point(site):
    X = ps.gr(site, 2)
    assert ka.poincare(ps.product(X, ps.point(site)), 4).dims == ka.poincare(X, 4).dims


def test_direct_count_agrees(site3):
    for X in (ps.gr(site3, 2), ps.gr_le(site3, 1), ps.underlying_sets(lf.sym(site3, 1))):
        for n in range(4):
            assert ka.kappa_degree(X, n) == ka.kappa_direct(X, n)


def test_guards(site, site_p3):
    with pytest.raises(ka.RequiresP2):
        ka.kappa_degree(ps.point(site_p3), 1)
    with pytest.raises(WindowExceeded):
        ka.kappa_degree(ps.point(site), 5)


def test_csv(site):
    text = ka.poincare(ps.point(site), 2).to_csv()
    assert text == "n,dim\n0,1\n1,0\n2,0\n"
