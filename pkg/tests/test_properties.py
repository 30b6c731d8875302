"""Algebraic identities checked on generated inputs."""

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from hyperlaplace.cascade import laplace_invariants_sys
from hyperlaplace.charform import (
    CharSystem,
    chain_system_to_operator,
    charsys2_to_second_order,
    nth_order_to_charsys,
    operator_invariants,
)
from hyperlaplace.dsl import parse_scalar
from hyperlaplace.expr import VarSpec
from hyperlaplace.lpdo import LPDO, CharOperator, compose, lpdo_to_ncpoly

SP = VarSpec()
X, Y = SP.symbol("x"), SP.symbol("y")
small = st.integers(-3, 3)
nonzero = small.filter(bool)


@st.composite
def polys(draw, degree=2):
    out = SP.zero
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            out = out + draw(small) * X**i * Y**j
    return out


@st.composite
def rationals(draw):
    num = draw(polys())
    den = draw(polys(1))
    return num if den.is_zero else num / den


@st.composite
def linear(draw, allow_zero=True):
    c = draw(small if allow_zero else nonzero)
    return SP(c) + draw(small) * X + draw(small) * Y


@st.composite
def systems(draw):
    m2 = draw(st.sampled_from([SP.one, SP(2), 1 + X * X]))
    X1 = CharOperator(SP.one, draw(linear()))
    X2 = CharOperator(m2, draw(linear()))
    if not X1.independent_of(X2):
        X2 = CharOperator(SP.zero, SP.one)
    a12 = draw(linear(allow_zero=False))
    a21 = draw(linear(allow_zero=False))
    return CharSystem([X1, X2], [[draw(linear()), a12], [a21, draw(linear())]])


@st.composite
def gauges(draw):
    g = draw(linear(allow_zero=False))
    if draw(st.booleans()):
        g = g / draw(linear(allow_zero=False))
    return g


def scalar_ops(draw, n):
    directions = draw(st.lists(st.sampled_from([(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 3)]), min_size=n, max_size=n, unique=True))
    return [CharOperator.of(SP, m, k) for m, k in directions]


@st.composite
def split_operators(draw):
    """``X_1 X_2 ... X_n + lower-order terms`` with distinct constant directions."""
    n = draw(st.integers(2, 3))
    ops = scalar_ops(draw, n)
    A = ops[0].to_lpdo()
    for Xi in ops[1:]:
        A = compose(A, Xi.to_lpdo())
    for i in range(n):
        for j in range(n - i):
            if draw(st.booleans()):
                A = A + draw(linear()) * LPDO.D(SP, i, j)
    return A, ops


slow = settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
medium = settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@settings(max_examples=300, deadline=None)
@given(rationals())
def test_scalar_print_parse_round_trip(s):
    assert parse_scalar(str(s), SP) == s


@slow
@given(systems())
def test_invariant_formula_matches_elimination(S):
    L, _ = charsys2_to_second_order(S, keep=0)
    assert operator_invariants(L, *S.ops) == laplace_invariants_sys(S)


@slow
@given(systems())
def test_k_is_the_coupling_product(S):
    _, k = laplace_invariants_sys(S)
    assert k == S.alpha[0][1] * S.alpha[1][0]


@slow
@given(systems(), gauges(), gauges())
def test_gauge_invariance(S, g1, g2):
    G, _ = S.gauge([g1, g2])
    assert laplace_invariants_sys(G) == laplace_invariants_sys(S)


@slow
@given(systems(), gauges(), gauges())
def test_rescaling_covariance(S, c1, c2):
    h, k = laplace_invariants_sys(S)
    hr, kr = laplace_invariants_sys(S.rescale([c1, c2]))
    assert hr == c1 * c2 * h
    assert kr == c1 * c2 * k


@medium
@given(split_operators())
def test_nth_order_round_trip(case):
    A, _ = case
    S, _ = nth_order_to_charsys(A)
    assert chain_system_to_operator(S) == A


@medium
@given(split_operators())
def test_ncpoly_expansion_round_trip(case):
    A, ops = case
    assert lpdo_to_ncpoly(A, ops).expand() == A
