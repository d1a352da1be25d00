from fractions import Fraction as F
from math import factorial

import pytest
from hypothesis import given, settings, strategies as st

from newton_strata.coweights import DimensionError, RationalCoweight, pair
from newton_strata.newton import strata
from newton_strata.rootdata import (
    MinusculeSpec,
    WeylElement,
    act_on_coweight,
    adjoint_depth,
    all_roots,
    compose,
    decode_factor_element,
    enumerate_weyl,
    enumeration_size,
    identity_perm,
    inverse,
    make_group_datum,
    pairing_involution,
    positive_roots,
    standard_weights,
    weyl_to_monomial,
)

FAMS = ("A", "GL", "B", "C", "D", "GSp")


def test_make_group_datum_examples():
    assert make_group_datum("B", 2, 1, 1).std_dim == 5
    d = make_group_datum("D", 4, 2, 2)
    assert d.std_dim == 8 and d.twist == 2
    with pytest.raises(ValueError):
        make_group_datum("A", 1, 1, 2)


@pytest.mark.parametrize("args", [("B", 0), ("E", 6), ("C", 2, 1, 2), ("B", 2, 0), ("GL", 3, 1, 2)])
def test_make_group_datum_rejects(args):
    with pytest.raises(ValueError):
        make_group_datum(*args)


def test_std_dims():
    assert [make_group_datum(f, 3).std_dim for f in FAMS] == [4, 3, 7, 6, 6, 6]


def test_enumeration_sizes():
    assert sum(1 for _ in enumerate_weyl(make_group_datum("B", 2))) == 8
    d = make_group_datum("B", 2, 3)
    assert enumeration_size(d, composite=False) == 512
    assert sum(1 for _ in enumerate_weyl(d, composite=True)) == 8
    assert sum(1 for _ in enumerate_weyl(make_group_datum("D", 3))) == 24


@pytest.mark.parametrize("fam,r,order", [
    ("A", 3, 24), ("GL", 3, 6), ("B", 3, 48), ("C", 3, 48), ("D", 4, 192), ("GSp", 2, 8),
])
def test_weyl_orders(fam, r, order):
    d = make_group_datum(fam, r)
    els = list(enumerate_weyl(d))
    assert len(els) == order == d.weyl_factor_order
    assert len(set(els)) == order
    for w in els:
        w.validate(d)


def test_enumeration_is_deterministic():
    d = make_group_datum("C", 2, 2)
    assert list(enumerate_weyl(d)) == list(enumerate_weyl(d))


def test_act_examples():
    d = make_group_datum("B", 3)
    nu = RationalCoweight.of((1, F(1, 2), 0))
    assert act_on_coweight(d, WeylElement.identity(d), nu) == nu
    d2 = make_group_datum("B", 2, 2)
    nu2 = RationalCoweight(((1, 0), (0, 2)))
    assert act_on_coweight(d2, WeylElement.identity(d2), nu2) == RationalCoweight(((0, 2), (1, 0)))
    a2 = make_group_datum("A", 2, 1, 2)
    assert act_on_coweight(a2, WeylElement.identity(a2), RationalCoweight.of((1, 0, 0))) == RationalCoweight.of((0, 0, -1))


def test_act_twisted_d_flips_last():
    d = make_group_datum("D", 3, 1, 2)
    assert act_on_coweight(d, WeylElement.identity(d), RationalCoweight.of((1, 2, 3))) == RationalCoweight.of((1, 2, -3))


def test_act_signed_convention():
    d = make_group_datum("B", 2)
    w = WeylElement.from_one_line([-2, 1])
    assert act_on_coweight(d, w, RationalCoweight.of((3, 5))) == RationalCoweight.of((5, -3))
    assert w.one_line() == "-2:1"


def test_act_shape_mismatch():
    d = make_group_datum("B", 2)
    with pytest.raises(DimensionError):
        act_on_coweight(d, WeylElement.identity(d), RationalCoweight.of((1, 0, 0)))


def test_validate_sign_constraints():
    with pytest.raises(ValueError):
        WeylElement.from_one_line([-1, 2]).validate(make_group_datum("GL", 2))
    with pytest.raises(ValueError):
        WeylElement.from_one_line([-1, 2, 3]).validate(make_group_datum("D", 3))
    WeylElement.from_one_line([-1, -2, 3]).validate(make_group_datum("D", 3))


def test_weyl_to_monomial_examples():
    b2 = make_group_datum("B", 2)
    mu = MinusculeSpec.from_l(b2, 1)
    op = weyl_to_monomial(b2, WeylElement.identity(b2), mu)
    assert op.exponents == (-1, 1, 0, 0, 0)
    assert op.perm == (0, 1, 2, 3, 4)
    flip = weyl_to_monomial(b2, WeylElement.from_one_line([-1, 2]), mu)
    assert flip.perm == (1, 0, 2, 3, 4)
    assert flip.exponents == op.exponents
    g = make_group_datum("GSp", 2)
    sop = weyl_to_monomial(g, WeylElement.identity(g), MinusculeSpec.siegel(g))
    assert sop.exponents == (0, 0, 1, 1)


def test_adjoint_depth_examples():
    assert adjoint_depth(make_group_datum("B", 4), MinusculeSpec.from_l(make_group_datum("B", 4), 1)) == 1
    gl4 = make_group_datum("GL", 4)
    assert adjoint_depth(gl4, RationalCoweight.of((0, 0, 2, 2))) == 2
    assert adjoint_depth(gl4, RationalCoweight.of((0, 0, 0, 0))) == 0
    g = make_group_datum("GSp", 3)
    assert adjoint_depth(g, MinusculeSpec.siegel(g)) == 1


def test_root_counts():
    assert len(positive_roots(make_group_datum("B", 2))) == 4
    assert len(positive_roots(make_group_datum("C", 2))) == 4
    assert len(positive_roots(make_group_datum("D", 3))) == 6
    assert len(positive_roots(make_group_datum("A", 3))) == 6
    assert len(all_roots(make_group_datum("B", 3, 2))) == 2 * 2 * 9


def test_from_l_needs_enough_factors():
    with pytest.raises(ValueError):
        MinusculeSpec.from_l(make_group_datum("B", 3), 2)
    spec = MinusculeSpec.from_l(make_group_datum("B", 3, 2), 2)
    assert spec.weights.factors == ((1, 0, 0), (1, 0, 0))


def test_from_weights_validation():
    d = make_group_datum("GSp", 2)
    with pytest.raises(DimensionError):
        MinusculeSpec.from_weights(d, [(1, 0)])
    with pytest.raises(ValueError):
        MinusculeSpec.from_weights(make_group_datum("B", 2), [(F(1, 2), 0)])
    with pytest.raises(ValueError):
        MinusculeSpec.from_weights(make_group_datum("B", 2), [(2, 0)]).validate(make_group_datum("B", 2), shimura=True)


def test_signed_perm_inverse():
    d = make_group_datum("B", 3)
    for k in range(d.weyl_factor_order):
        w = decode_factor_element(k, 3, d.sign_mode)
        assert compose(w, inverse(w)) == identity_perm(3)


@st.composite
def datum_and_element(draw, max_r=4, max_n=3):
    fam = draw(st.sampled_from(FAMS))
    r = draw(st.integers(2 if fam == "D" else 1, max_r))
    n = draw(st.integers(1, max_n))
    twist = draw(st.sampled_from((1, 2))) if (fam == "D" or (fam == "A" and r >= 2)) else 1
    d = make_group_datum(fam, r, n, twist)
    w = WeylElement(tuple(decode_factor_element(draw(st.integers(0, d.weyl_factor_order - 1)), d.dim, d.sign_mode)
                          for _ in range(n)))
    return d, w


def _perm_order(perm):
    from math import lcm

    seen, out = set(), 1
    for i in range(len(perm)):
        L, j = 0, i
        while j not in seen:
            seen.add(j)
            j = perm[j]
            L += 1
        if L:
            out = lcm(out, L)
    return out


@settings(max_examples=200, deadline=None)
@given(datum_and_element(), st.data())
def test_action_has_finite_order(dw, data):
    d, w = dw
    vec = tuple(tuple(data.draw(st.lists(st.integers(-3, 3), min_size=d.dim, max_size=d.dim))) for _ in range(d.n))
    nu = RationalCoweight(vec, 1 if d.has_similitude else None)
    # order of w sigma on coordinates, via its monomial permutation, bounds the orbit
    op = weyl_to_monomial(d, w, RationalCoweight(tuple((0,) * d.dim for _ in range(d.n)), 0 if d.has_similitude else None))
    bound = _perm_order(op.perm)
    x = nu
    for _ in range(bound):
        x = act_on_coweight(d, w, x)
    assert x == nu


@settings(max_examples=200, deadline=None)
@given(datum_and_element())
def test_exponent_multiset_independent_of_w(dw):
    d, w = dw
    mu = MinusculeSpec.from_l(d, 1)
    base = sorted(weyl_to_monomial(d, WeylElement.identity(d), mu).exponents)
    assert sorted(weyl_to_monomial(d, w, mu).exponents) == base


@settings(max_examples=200, deadline=None)
@given(datum_and_element())
def test_permutation_preserves_pairing(dw):
    d, w = dw
    inv = pairing_involution(d)
    if inv is None:
        return
    op = weyl_to_monomial(d, w, MinusculeSpec.from_l(d, 1))
    for i, j in enumerate(inv):
        assert op.perm[j] == inv[op.perm[i]]


@settings(max_examples=100, deadline=None)
@given(datum_and_element())
def test_operator_exponents_match_weights(dw):
    d, w = dw
    mu = MinusculeSpec.from_l(d, 1)
    op = weyl_to_monomial(d, w, mu)
    assert list(op.exponents) == [-pair(mu.weights, f) for f in standard_weights(d)]


@settings(max_examples=100, deadline=None)
@given(datum_and_element(max_r=5, max_n=1))
def test_adjoint_depth_zero_iff_central(dw):
    d, w = dw
    mu = MinusculeSpec.from_l(d, 1)
    for cw in (mu.weights, RationalCoweight(tuple((1,) * d.dim for _ in range(d.n)), mu.weights.similitude)):
        central = all(pair(cw, a) == 0 for a in positive_roots(d))
        assert (adjoint_depth(d, cw) == 0) == central


@pytest.mark.parametrize("fam", FAMS)
@pytest.mark.parametrize("r", [1, 2, 3])
@pytest.mark.parametrize("n", [1, 2])
def test_composite_matches_full(fam, r, n):
    if fam == "D" and r < 2:
        pytest.skip("D needs rank 2")
    d = make_group_datum(fam, r, n)
    mu = MinusculeSpec.from_l(d, 1)
    key = lambda res: [(s.nu, s.polygon) for s in res]
    assert key(strata(d, mu, composite=True)) == key(strata(d, mu, composite=False))


@pytest.mark.parametrize("fam,r,twist", [("B", 2, 1), ("C", 2, 1), ("D", 3, 2), ("A", 2, 2), ("GL", 3, 1)])
def test_composite_matches_full_two_weights(fam, r, twist):
    d = make_group_datum(fam, r, 2, twist)
    mu = MinusculeSpec.from_l(d, 2)
    key = lambda res: [(s.nu, s.polygon) for s in res]
    assert key(strata(d, mu, composite=True)) == key(strata(d, mu, composite=False))


def test_signed_one_line_roundtrip():
    w = WeylElement.from_one_line([2, -1, 3], [-3, -2, 1])
    assert w.one_line() == "2:-1:3;-3:-2:1"
    assert factorial(3) * 8 == make_group_datum("B", 3).weyl_factor_order
