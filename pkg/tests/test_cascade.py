import random

import pytest

from hyperlaplace.cascade import (
    cascade_run,
    cascade_solve,
    h_next,
    k_prev,
    laplace_invariants_sys,
    x1_transform,
    x2_transform,
)
from hyperlaplace.charform import (
    CharSystem,
    apply_map,
    charsys2_to_second_order,
    operator_invariants,
    second_order_to_charsys,
)
from hyperlaplace.errors import TransformUndefinedError
from hyperlaplace.expr import VarSpec
from hyperlaplace.lpdo import CharOperator

from conftest import inverse_square, noise_system


def inverse_square_system(c, sp=None):
    sp = sp or VarSpec()
    S, rec, _, _ = second_order_to_charsys(inverse_square(c, sp))
    return S, rec


def random_system(rng, sp, commuting=False):
    x, y = sp.symbol("x"), sp.symbol("y")

    def coef():
        return sp(rng.randint(-3, 3)) + rng.randint(-2, 2) * x + rng.randint(-2, 2) * y

    while True:
        X1 = CharOperator(sp.one, sp(rng.randint(-2, 2)) if commuting else coef())
        X2 = CharOperator(sp.one + (0 if commuting else rng.randint(0, 1)) * x, coef())
        if not X1.independent_of(X2):
            continue
        alpha = [[coef(), coef()], [coef(), coef()]]
        if alpha[0][1].is_zero or alpha[1][0].is_zero:
            continue
        S = CharSystem([X1, X2], alpha)
        h, k = laplace_invariants_sys(S)
        if not h.is_zero and not k.is_zero:
            return S


def test_constant_system_invariants(sp):
    S = CharSystem([CharOperator.of(sp, 1, 0), CharOperator.of(sp, 0, 1)], [[1, 2], [3, 4]])
    assert laplace_invariants_sys(S) == (sp(6), sp(6))


def test_ww_invariants():
    S, _, sp = noise_system()
    nu, p1 = sp.symbol("nu"), sp.symbol("p1")
    h, k = laplace_invariants_sys(S)
    assert k == nu**2
    assert h == nu**2 - p1**2


def test_formula_agrees_with_elimination():
    rng = random.Random(11)
    sp = VarSpec()
    for _ in range(8):
        S = random_system(rng, sp)
        L, _ = charsys2_to_second_order(S, keep=0)
        assert operator_invariants(L, *S.ops) == laplace_invariants_sys(S)


def test_x1_step_on_inverse_square():
    sp = VarSpec(params=("c",))
    S, _ = inverse_square_system("c", sp)
    T, _ = x1_transform(S)
    h, k = laplace_invariants_sys(T)
    assert h == sp.parse("(c - 2)/(x+y)^2")
    assert k == sp.parse("c/(x+y)^2")


def test_ww_x1_step():
    S, _, sp = noise_system()
    nu, p1 = sp.symbol("nu"), sp.symbol("p1")
    T, _ = x1_transform(S)
    h, k = laplace_invariants_sys(T)
    assert h == nu**2 - 4 * p1**2
    assert k == nu**2 - p1**2


def test_ww_x2_step():
    S, _, sp = noise_system()
    nu, p1 = sp.symbol("nu"), sp.symbol("p1")
    T, _ = x2_transform(S)
    h, k = laplace_invariants_sys(T)
    assert h == nu**2
    # one more backward step: h = k of the previous, reaching nu^2 - p1^2
    U, _ = x2_transform(T)
    assert laplace_invariants_sys(U)[0] == k
    assert k == nu**2 - p1**2


def test_transforms_shift_invariants_and_match_predictions():
    rng = random.Random(3)
    sp = VarSpec()
    for _ in range(4):
        S = random_system(rng, sp)
        h, k = laplace_invariants_sys(S)
        T, _ = x1_transform(S)
        assert laplace_invariants_sys(T) == (h_next(S), h)
        U, _ = x2_transform(S)
        assert laplace_invariants_sys(U) == (k, k_prev(S))
        V, _ = x2_transform(T)
        assert laplace_invariants_sys(V) == (h, k)


def test_transform_records_solve_the_base():
    S, _ = inverse_square_system(2)
    T, rec = x1_transform(S)
    # a solution of the transformed system pushed back solves the base
    chain = cascade_run(T)
    bundle = cascade_solve(chain)
    back = apply_map(rec.backward, bundle.values)
    assert all(r.is_zero for r in S.residuals(back))


def test_x1_undefined_when_h_vanishes(sp):
    S, _ = inverse_square_system(0, sp)
    with pytest.raises(TransformUndefinedError):
        x1_transform(S)
    with pytest.raises(TransformUndefinedError):
        x2_transform(S)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_inverse_square_chain_length(n):
    S, _ = inverse_square_system(n * (n + 1))
    chain = cascade_run(S)
    assert chain.status == "terminated-both"
    assert chain.N == n and chain.K == n
    hv = chain.h_values()
    for i in range(n):
        assert hv[i] == hv[-i - 1]


def test_inverse_square_c1_exhausts():
    S, _ = inverse_square_system(1)
    chain = cascade_run(S, 5, 5)
    assert chain.status == "depth-exhausted"
    assert all(not v.is_zero for v in chain.h_values().values())


def test_zero_h_terminates_immediately(sp):
    S, _ = inverse_square_system(0, sp)
    chain = cascade_run(S)
    assert chain.forward_terminated and chain.N == 0
    assert chain.forward == []


def test_dxdy_solution(sp):
    S, rec = inverse_square_system(0, sp)
    bundle = cascade_solve(cascade_run(S))
    u = apply_map(rec.backward, bundle.values)["u"]
    assert sorted(u.functions()) == ["F", "G"]
    assert inverse_square(0, sp).apply(u).is_zero
    assert {str(f.argument) for f in bundle.functions.values()} == {"x", "y"}


def test_inverse_square_n1_closed_form(sp):
    A = inverse_square(2, sp)
    S, rec = inverse_square_system(2, sp)
    bundle = cascade_solve(cascade_run(S))
    assert bundle.quadrature_free
    u = apply_map(rec.backward, bundle.values)["u"]
    assert A.apply(u).is_zero
    # one function of each characteristic variable, each with two terms
    by_function = {}
    for (e, atoms), _ in u.terms():
        for a in atoms:
            by_function.setdefault(a.name, 0)
            by_function[a.name] += 1
    assert by_function == {"F": 2, "G": 2}


def test_chain_json_lists_invariants():
    S, _ = inverse_square_system(6)
    data = cascade_run(S).to_json()
    assert data["status"] == "terminated-both"
    assert data["N"] == 2 and data["K"] == 2
    assert data["invariants"]["1"] == "4/(x + y)^2"
