import pytest

from hyperlaplace.cascade import laplace_invariants_sys
from hyperlaplace.charform import (
    CharSystem,
    apply_map,
    chain_system_to_operator,
    charsys2_to_second_order,
    first_order_to_charsys,
    nth_order_to_charsys,
    operator_form,
    operator_invariants,
    second_order_to_charsys,
)
from hyperlaplace.errors import TransformUndefinedError
from hyperlaplace.expr import VarSpec
from hyperlaplace.lpdo import LPDO, CharOperator, compose

from conftest import inverse_square, noise_system


def test_inverse_square_invariants_with_parameter():
    sp = VarSpec(params=("c",))
    A = inverse_square("c", sp)
    S, rec, h, k = second_order_to_charsys(A)
    expect = sp.parse("c/(x+y)^2")
    assert h == expect and k == expect
    assert laplace_invariants_sys(S) == (h, k)


def test_dxdy_has_zero_invariants(sp):
    _, _, h, k = second_order_to_charsys(inverse_square(0, sp))
    assert h.is_zero and k.is_zero


def test_composed_operator_has_zero_h(sp):
    x = sp.symbol("x")
    Dx, Dy = LPDO.D(sp, 1, 0), LPDO.D(sp, 0, 1)
    A = compose(Dx + 1, Dy + x)
    X1, X2 = CharOperator.of(sp, 1, 0), CharOperator.of(sp, 0, 1)
    f = operator_form(A, X1, X2)
    # expanded: Dx*Dy + x*Dx + Dy + (x + 1), so a1 = x, a2 = 1, a3 = x + 1
    assert (f.a1, f.a2, f.a3) == (x, sp.one, x + 1)
    h, k = operator_invariants(A, X1, X2)
    assert h.is_zero
    # k = X2(a2) + a1*a2 - a3 = -1 for the expanded operator
    assert k == -sp.one
    S, _, hs, ks = second_order_to_charsys(A)
    assert {hs, ks} == {sp.zero, -sp.one}


def test_second_order_round_trip(sp):
    A = inverse_square(6, sp)
    S, rec, _, _ = second_order_to_charsys(A)
    L, _ = charsys2_to_second_order(S, keep=0)
    assert L == A


def test_elimination_needs_coupling(sp):
    S = CharSystem([CharOperator.of(sp, 1, 0), CharOperator.of(sp, 0, 1)], [[1, 0], [2, 1]])
    with pytest.raises(TransformUndefinedError):
        charsys2_to_second_order(S, keep=0)


def test_ww_elimination_invariants():
    S, _, sp = noise_system()
    L, _ = charsys2_to_second_order(S, keep=0)
    h, k = operator_invariants(L, *S.ops)
    nu, p1 = sp.symbol("nu"), sp.symbol("p1")
    assert k == nu**2
    assert h == nu**2 - p1**2


def test_ww_characteristic_form():
    S, rec, sp = noise_system()
    x, nu, p1, p2, q2 = (sp.symbol(n) for n in ("x", "nu", "p1", "p2", "q2"))
    p, q = p1 * x + p2 * x**2, q2 * x**2
    assert S.ops[0] == CharOperator(sp.one, p - q)
    assert S.ops[1] == CharOperator(sp.one, p + q)
    assert rec.to_json()["forward"] == {"u1": "W - W1", "u2": "W + W1"}
    assert S.alpha[0][1] == nu and S.alpha[1][0] == nu
    assert S.alpha[0][0] == -(p.diff("x") - q.diff("x") + nu)


def test_decoupled_constant_first_order(sp):
    a = [[sp(1), sp.zero], [sp.zero, sp(-1)]]
    b = [[sp.zero] * 2 for _ in range(2)]
    S, _ = first_order_to_charsys(a, b)
    assert all(c.is_zero for row in S.alpha for c in row)


def test_k3_matrix_splits(sp):
    a = [[sp(v) for v in row] for row in ([0, 0, 0], [0, 0, 1], [0, 1, 0])]
    b = [[sp.zero] * 3 for _ in range(3)]
    S, rec = first_order_to_charsys(a, b)
    lams = sorted(X.lam.as_fraction() for X in S.ops if X.lam is not None)
    assert lams == [-1, 0, 1]


def test_nth_order_agrees_with_second_order_up_to_gauge(sp):
    A = inverse_square(6, sp)
    S2, _, _, _ = second_order_to_charsys(A)
    Sn, _ = nth_order_to_charsys(A)
    # the step-down chain keeps u in the second slot
    assert laplace_invariants_sys(Sn.permuted([1, 0])) == laplace_invariants_sys(S2)
    L, _ = charsys2_to_second_order(Sn, keep=1)
    assert L == A


def _x123(sp):
    return [CharOperator.of(sp, 1, 0), CharOperator.of(sp, 0, 1), CharOperator.of(sp, 1, 1)]


def test_pure_composition_is_a_chain(sp):
    X1, X2, X3 = (X.to_lpdo() for X in _x123(sp))
    A = compose(compose(X1, X2), X3)
    S, _ = nth_order_to_charsys(A)
    for i in range(3):
        for s in range(3):
            if s != i - 1:
                assert S.alpha[i][s].is_zero
    assert chain_system_to_operator(S) == A


def test_composition_plus_first_order_term_round_trips(sp):
    X1, X2, X3 = (X.to_lpdo() for X in _x123(sp))
    A = compose(compose(X1, X2), X3) + LPDO.D(sp, 1, 0)
    S, rec = nth_order_to_charsys(A)
    assert chain_system_to_operator(S) == A
    assert any(not S.alpha[i][s].is_zero for i in range(3) for s in range(3) if s != i - 1)


def test_record_maps_are_inverse(sp):
    A = inverse_square(6, sp)
    S, rec, _, _ = second_order_to_charsys(A)
    from hyperlaplace.dsl import parse_solution

    u = {"u": parse_solution("F(x) + exp(y)*G(x + y)", sp)}
    assert apply_map(rec.backward, apply_map(rec.forward, u)) == u


def test_gauge_keeps_invariants(sp):
    x, y = sp.symbol("x"), sp.symbol("y")
    S, _, _, _ = second_order_to_charsys(inverse_square(6, sp))
    G, rec = S.gauge([x + 2, 1 / (y + 3)])
    assert laplace_invariants_sys(G) == laplace_invariants_sys(S)


def test_dsl_round_trip_of_system(coupled3):
    from hyperlaplace.dsl import parse_problem

    pf = parse_problem(coupled3.to_dsl())
    assert pf.problem.alpha == coupled3.alpha
    assert pf.problem.ops == coupled3.ops
