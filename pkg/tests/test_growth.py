import math

import pytest

from fpresheaf import growth as gr
from fpresheaf import linfun as lf
from fpresheaf import presheaf as ps


def test_profiles(site):
    assert gr.profile(lf.ext(site, 2)).exponents == (0, 0, 1, 3, 6)
    P = gr.profile(ps.gr(site, 2))
    assert P.cardinalities == (1, 1, 2, 8, 36)
    assert P.values[:4] == (0.0, 0.0, 1.0, 3.0)
    assert P.values[4] == pytest.approx(math.log2(36), abs=1e-12)
    assert gr.profile(ps.point(site)).values == (0.0,) * 5


def test_csv(site):
    text = gr.profile(ps.gr(site, 2)).to_csv()
    lines = text.split("\n")
    assert lines[0] == "t,cardinality,log_p"
    assert lines[1:5] == ["0,1,0.0", "1,1,0.0", "2,2,1.0", "3,8,3.0"]
    t, c, v = lines[5].split(",")
    assert (t, c) == ("4", "36") and float(v) == pytest.approx(5.1699, abs=1e-4)
    assert "\r" not in text


def test_degree_fits(site):
    assert gr.degree_fit(gr.profile(lf.sym(site, 3))).degree == 3
    assert gr.degree_fit(gr.profile(lf.ibar(site))).degree is gr.NonPolynomialOnWindow
    assert gr.degree_fit(gr.profile(ps.point(site))).degree == 0
    g = gr.degree_fit(gr.profile(ps.gr(site, 2)))
    assert g.degree == 2 and not g.exact
    assert g.describe() == "consistent-with-degree-2"


def test_least_squares_branch():
    # non-integer exact line 0.5 t hidden behind cardinalities that are not powers of p
    P = gr.GrowthProfile(3, (1, 2, 4, 8, 16))
    fit = gr.degree_fit(P)
    assert fit.method == "least-squares" and fit.degree == 1


def test_group_profile(site3):
    from fpresheaf import pgrp as pg

    P = gr.profile(pg.heisenberg(site3))
    assert P.exponents == (0, 2, 5, 9)
    assert gr.degree_fit(P).degree == 2
