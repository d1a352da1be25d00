from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from newton_strata import _kernels
from newton_strata.coweights import RationalCoweight, dominance_leq, orbit_average
from newton_strata.isocrystal import NewtonPolygon, slope_polygon
from newton_strata.newton import (
    ResourceBoundError,
    admissible_check,
    construct_basic_element,
    is_basic,
    kottwitz_class,
    kottwitz_free_part,
    minus_mu_bar,
    newton_point,
    newton_polygon_of,
    parabolic_profile,
    point_is_basic,
    strata,
)
from newton_strata.coweights import Functional
from newton_strata.rootdata import (
    MinusculeSpec,
    WeylElement,
    act_on_coweight,
    all_roots,
    decode_factor_element,
    enumerate_weyl,
    make_group_datum,
    weyl_to_monomial,
)

P = NewtonPolygon.from_multiset
C = RationalCoweight.of


def b(r, n=1):
    d = make_group_datum("B", r, n)
    return d, MinusculeSpec.from_l(d, 1)


def test_newton_point_examples():
    d, mu = b(2)
    assert newton_point(d, mu, WeylElement.identity(d)) == C((1, 0))
    for r in (2, 3, 4, 5):
        d, mu = b(r)
        cyc = WeylElement.from_one_line(list(range(2, r + 1)) + [1])
        assert newton_point(d, mu, cyc) == C((F(1, r),) * r)
        flip = WeylElement.from_one_line([-2] + list(range(3, r + 1)) + [1])
        assert newton_point(d, mu, flip) == C((0,) * r)


def test_newton_polygon_examples():
    d, mu = b(2)
    assert newton_polygon_of(d, mu, WeylElement.identity(d)) == P([-1, 0, 0, 0, 1])
    half = F(1, 2)
    assert newton_polygon_of(d, mu, WeylElement.from_one_line([2, 1])) == P([-half, -half, 0, half, half])
    g = make_group_datum("GSp", 2)
    assert newton_polygon_of(g, MinusculeSpec.siegel(g), WeylElement.identity(g)) == P([0, 0, 1, 1])


def test_is_basic_examples():
    d, mu = b(3)
    assert point_is_basic(d, C((0, 0, 0)))
    assert is_basic(d, mu, WeylElement.from_one_line([-1, -2, -3]))
    d2, mu2 = b(2)
    assert not is_basic(d2, mu2, WeylElement.identity(d2))


@pytest.mark.parametrize("fam,r,n,twist", [
    ("B", 3, 1, 1), ("GL", 4, 1, 1), ("D", 3, 1, 1), ("A", 3, 1, 1), ("A", 3, 1, 2), ("A", 2, 2, 2),
    ("C", 3, 2, 1), ("GSp", 2, 1, 1), ("D", 4, 1, 1), ("D", 5, 1, 1), ("D", 4, 1, 2), ("D", 3, 2, 2),
])
def test_construct_basic(fam, r, n, twist):
    d = make_group_datum(fam, r, n, twist)
    w = construct_basic_element(d)
    assert is_basic(d, MinusculeSpec.from_l(d, 1), w)


def test_construct_basic_shapes():
    d = make_group_datum("B", 3)
    assert construct_basic_element(d).one_line() == "-1:-2:-3"
    assert construct_basic_element(make_group_datum("GL", 4)).one_line() == "2:3:4:1"


def test_strata_examples():
    for n in (1, 2, 3):
        d, mu = b(2, n)
        res = strata(d, mu)
        assert res.count == 3
        nus = {s.nu.factors[0] for s in res}
        assert nus == {(F(1, n), 0), (F(1, 2 * n), F(1, 2 * n)), (0, 0)}
    g = make_group_datum("GSp", 2)
    polys = [s.polygon for s in strata(g, MinusculeSpec.siegel(g))]
    half = F(1, 2)
    assert sorted(map(str, polys)) == sorted(map(str, [P([half] * 4), P([0, half, half, 1]), P([0, 0, 1, 1])]))


def test_strata_two_weights_examples():
    d = make_group_datum("B", 3, 2)
    assert strata(d, MinusculeSpec.from_l(d, 2)).count == 7


def test_strata_counts_and_order():
    d, mu = b(3, 2)
    res = strata(d, mu)
    assert sum(s.count for s in res) == res.scanned
    keys = [tuple(s.nu.flat()) for s in res]
    assert keys == sorted(keys)
    assert res.count <= res.scanned


@pytest.mark.parametrize("fam,r,n,twist", [
    ("B", 3, 2, 1), ("C", 3, 1, 1), ("D", 4, 1, 2), ("A", 3, 2, 2), ("GL", 4, 1, 1), ("GSp", 3, 1, 1),
])
def test_backends_agree(fam, r, n, twist):
    d = make_group_datum(fam, r, n, twist)
    mu = MinusculeSpec.siegel(d) if fam == "GSp" else MinusculeSpec.from_l(d, 1)
    ref = strata(d, mu, backend="python")
    key = lambda res: [(s.nu, s.count) for s in res]
    assert key(strata(d, mu, backend="numpy")) == key(ref)
    if _kernels.HAVE_NUMBA:
        assert key(strata(d, mu, backend="numba")) == key(ref)
        assert key(strata(d, mu, backend="numba", threads=2)) == key(ref)


def test_resource_bound(monkeypatch):
    monkeypatch.setenv("NEWTON_STRATA_MAX_ELEMENTS", "10")
    d, mu = b(3)
    with pytest.raises(ResourceBoundError):
        strata(d, mu)


@pytest.mark.parametrize("fam,r,n,twist", [
    ("B", 2, 1, 1), ("B", 4, 2, 1), ("C", 3, 1, 1), ("D", 3, 1, 1), ("D", 4, 2, 2), ("A", 3, 1, 2),
    ("GL", 3, 2, 1), ("GSp", 3, 1, 1),
])
def test_basic_stratum_unique(fam, r, n, twist):
    d = make_group_datum(fam, r, n, twist)
    mu = MinusculeSpec.siegel(d) if fam == "GSp" else MinusculeSpec.from_l(d, 1)
    basic = [s for s in strata(d, mu) if point_is_basic(d, s.nu)]
    assert len(basic) == 1


def test_kottwitz_examples():
    d = make_group_datum("B", 2)
    assert kottwitz_class(d, C((0, 0))).is_identity()
    k = kottwitz_class(d, MinusculeSpec.from_l(d, 1))
    assert k.torsion == ((1, 2),) and k.free == ()
    assert str(k) == "[1mod2|]"
    gl = make_group_datum("GL", 3)
    assert kottwitz_class(gl, MinusculeSpec.from_l(gl, 1)).free == (-1,)
    assert kottwitz_class(gl, C((1, 1, 0))).free == (-2,)
    g = make_group_datum("GSp", 2)
    assert str(kottwitz_class(g, MinusculeSpec.siegel(g))) == "[|1]"
    c2 = make_group_datum("C", 2)
    assert kottwitz_class(c2, MinusculeSpec.from_l(c2, 1)).is_identity()


def test_kottwitz_twisted_sum():
    # two factors of GL collapse to one free coordinate under the shift
    d = make_group_datum("GL", 2, 2)
    a = kottwitz_class(d, RationalCoweight(((1, 0), (0, 0))))
    b_ = kottwitz_class(d, RationalCoweight(((0, 0), (1, 0))))
    assert a == b_ and len(a.free) == 1


def test_minus_mu_bar_and_identity_equality():
    d, mu = b(3)
    assert newton_point(d, mu, WeylElement.identity(d)) == minus_mu_bar(d, mu)
    assert admissible_check(d, mu, WeylElement.identity(d))
    d2, mu2 = b(2, 2)
    assert minus_mu_bar(d2, mu2) == RationalCoweight(((F(1, 2), 0), (F(1, 2), 0)))


@pytest.mark.parametrize("r", [2, 3, 4])
def test_basic_point_is_minimal(r):
    d, mu = b(r)
    res = strata(d, mu)
    zero = next(s.nu for s in res if point_is_basic(d, s.nu))
    assert all(dominance_leq(zero, s.nu, d.ctx) for s in res)


@pytest.mark.parametrize("r,n,l", [(1, 1, 1), (2, 1, 1), (3, 1, 1), (2, 2, 1), (2, 2, 2), (3, 2, 2)])
def test_admissibility_per_element(r, n, l):
    d = make_group_datum("B", r, n)
    mu = MinusculeSpec.from_l(d, l)
    assert all(admissible_check(d, mu, w) for w in enumerate_weyl(d))


def test_parabolic_examples():
    d, mu = b(2)
    prof = parabolic_profile(d, mu, WeylElement.identity(d))
    e = lambda *v: Functional((tuple(v),))
    assert set(prof.zero) == {e(0, 1), e(0, -1)}
    assert set(prof.positive) == {e(1, -1), e(1, 1), e(1, 0)}
    half = parabolic_profile(d, mu, WeylElement.from_one_line([2, 1]))
    assert set(half.zero) == {e(1, -1), e(-1, 1)}
    basic = parabolic_profile(d, mu, WeylElement.from_one_line([-1, -2]))
    assert len(basic.zero) == len(all_roots(d)) and not basic.positive
    assert set(prof.p_plus) | set(prof.p_minus) == set(all_roots(d))


FAMS = ("A", "GL", "B", "C", "D", "GSp")


@st.composite
def problems(draw, max_r=4, max_n=3):
    fam = draw(st.sampled_from(FAMS))
    r = draw(st.integers(2 if fam == "D" else 1, max_r))
    n = draw(st.integers(1, max_n))
    twist = draw(st.sampled_from((1, 2))) if (fam == "D" or (fam == "A" and r >= 2)) else 1
    d = make_group_datum(fam, r, n, twist)
    if fam == "GSp" and draw(st.booleans()):
        mu = MinusculeSpec.siegel(d)
    else:
        mu = MinusculeSpec.from_l(d, draw(st.integers(0, n)))
    w = WeylElement(tuple(decode_factor_element(draw(st.integers(0, d.weyl_factor_order - 1)), d.dim, d.sign_mode)
                          for _ in range(n)))
    return d, mu, w


@settings(max_examples=300, deadline=None)
@given(problems())
def test_dual_oracle(p):
    d, mu, w = p
    assert newton_polygon_of(d, mu, w) == slope_polygon(weyl_to_monomial(d, w, mu))


@settings(max_examples=200, deadline=None)
@given(problems())
def test_average_fixed_by_action(p):
    d, mu, w = p
    avg, _ = orbit_average(mu.weights, lambda v: act_on_coweight(d, w, v))
    assert act_on_coweight(d, w, avg) == avg


@settings(max_examples=200, deadline=None)
@given(problems())
def test_admissible_everywhere(p):
    d, mu, w = p
    assert admissible_check(d, mu, w)


@settings(max_examples=200, deadline=None)
@given(problems())
def test_free_part_matches_kottwitz(p):
    d, mu, w = p
    assert kottwitz_free_part(d, newton_point(d, mu, w)) == tuple(F(x) for x in kottwitz_class(d, mu).free)


@settings(max_examples=100, deadline=None)
@given(problems(max_r=3, max_n=2))
def test_strata_bounded_by_enumeration(p):
    d, mu, _ = p
    res = strata(d, mu, backend="python")
    assert 1 <= res.count <= res.scanned
