import pytest

from hyperlaplace.charform import CharSystem
from hyperlaplace.dsl import parse_solution
from hyperlaplace.errors import IntegrationError, TransformUndefinedError
from hyperlaplace.expr.solution import SolutionExpr
from hyperlaplace.genlaplace import PivotChoice, generalized_transform
from hyperlaplace.integrate import SolutionBundle, integrating_factor
from hyperlaplace.lpdo import CharOperator
from hyperlaplace.solver import (
    DriverConfig,
    back_substitute,
    eliminate_quadratures,
    factorize_and_solve,
    solve_first_order_scalar,
    solve_triangular,
    structure_classify,
)

from conftest import inverse_square

DISPLAYED = {
    "u1": "2*exp(y)*G1(x) + exp(x)*(3*F2(y) + F2'(y)) + exp(1/2*x + 1/2*y)*H(x - y)",
    "u2b": "exp(y)*G1'(x) + 2*exp(x)*F2'(y)",
    "u3b": "exp(x)*(F2''(y) - F2'(y))",
}


def sol(text, sp):
    return parse_solution(text, sp)


@pytest.fixture
def transformed(coupled3):
    T, rec = generalized_transform(coupled3, PivotChoice(1, 3))
    return T, rec


def test_transformed_is_triangular(transformed):
    T, _ = transformed
    rep = structure_classify(T)
    assert rep.classification == "triangular"
    assert rep.ordering == ("u3b", "u2b", "u1")


def test_coupled3_is_irreducible(coupled3):
    rep = structure_classify(coupled3)
    assert rep.classification == "irreducible"
    assert rep.blocks == (("u1", "u2", "u3"),)


def test_diagonal_is_triangular(sp):
    S = CharSystem([CharOperator.of(sp, 1, 0), CharOperator.of(sp, 0, 1)], [[1, 0], [0, 2]])
    assert structure_classify(S).classification == "triangular"


def test_block_triangular(sp):
    ops = [CharOperator.of(sp, 1, 0), CharOperator.of(sp, 0, 1), CharOperator.of(sp, 1, 1)]
    S = CharSystem(ops, [[1, 2, 0], [3, 1, 0], [1, 0, 1]])
    rep = structure_classify(S)
    assert rep.classification == "block-triangular"
    assert rep.blocks == (("u1", "u2"), ("u3",))


def test_first_equation_of_transformed(sp):
    u, info = solve_first_order_scalar(CharOperator.of(sp, 1, 0), sp.one, None, "F")
    assert u == sol("exp(x)*F(y)", sp)
    assert str(info.argument) == "y"


def test_second_equation_by_variation_of_constants(sp):
    rhs = sol("2*exp(x)*F(y)", sp)
    u, _ = solve_first_order_scalar(CharOperator.of(sp, 0, 1), sp.one, rhs, "G")
    integral = SolutionExpr.integral(sol("exp(x - y)*F(y)", sp), (0, 1))
    assert u == sol("exp(y)*G(x)", sp) + sol("2*exp(y)", sp) * integral


def test_homogeneous_diagonal_direction(sp):
    u, _ = solve_first_order_scalar(CharOperator.of(sp, 1, 1), sp.zero, None, "H")
    assert u == sol("H(x - y)", sp)


def test_integrating_factor_leaving_the_class(sp):
    x = sp.symbol("x")
    with pytest.raises(IntegrationError):
        integrating_factor((1, 0), 1 / (x**2 + 1))


def test_by_parts_matches_the_worked_step(sp):
    integral = SolutionExpr.integral(sol("exp(x - y)*F(y)", sp), (0, 1))
    assert eliminate_quadratures(integral) == sol("exp(x)*F1(y)", sp)
    u = sol("exp(y)*G(x)", sp) + sol("2*exp(y)", sp) * integral
    b = eliminate_quadratures(SolutionBundle(("u",), {"u": u}, {}))
    assert b["u"] == sol("exp(y)*(G(x) + 2*exp(x)*F1(y))", sp)
    assert [str(r) for r in b.redefinitions] == ["F(t) = exp(t)*F1'(t)"]


def test_quadrature_free_input_is_unchanged(sp):
    e = sol("exp(x)*F(y) + G(x - y)", sp)
    assert eliminate_quadratures(e) == e


def test_unmatched_kernel_is_kept(sp):
    x, y = sp.symbol("x"), sp.symbol("y")
    integral = SolutionExpr.integral(sol("F(y)", sp) * (1 / (x + y)), (0, 1))
    out = eliminate_quadratures(integral)
    assert out == integral
    assert out.has_integral


def test_transformed_solution_matches_text(transformed, sp):
    T, _ = transformed
    b = solve_triangular(T)
    assert b.quadrature_free
    for label, text in DISPLAYED.items():
        assert b[label] == sol(text, sp)
    assert [str(r) for r in b.redefinitions] == [
        "F(t) = exp(t)*F1'(t)",
        "G(t) = G1'(t)",
        "F1(t) = exp(-t)*F2'(t)",
    ]


def test_diagonal_constant_system(sp):
    S = CharSystem([CharOperator.of(sp, 1, 0), CharOperator.of(sp, 0, 1)], [[2, 0], [0, -3]])
    b = solve_triangular(S)
    assert b["u1"] == sol("exp(2*x)*F(y)", sp)
    assert b["u2"] == sol("exp(-3*y)*G(x)", sp)


def test_one_coupling_is_integrated(sp):
    S = CharSystem([CharOperator.of(sp, 1, 0), CharOperator.of(sp, 1, 1)], [[1, 0], [1, 0]])
    b = solve_triangular(S)
    assert b.quadrature_free
    assert all(r.is_zero for r in S.residuals(b.values))


def test_irreducible_system_is_rejected(coupled3):
    with pytest.raises(TransformUndefinedError):
        solve_triangular(coupled3)


def test_back_substitution_to_original_unknowns(coupled3, transformed, sp):
    T, rec = transformed
    b = back_substitute(solve_triangular(T), [rec])
    assert b.labels == ("u1", "u2", "u3")
    u1 = b["u1"]
    assert b["u2"] == sol(DISPLAYED["u2b"], sp) - 2 * u1
    X1 = coupled3.ops[0]
    assert b["u3"] == X1(u1) + 3 * u1 - 2 * sol(DISPLAYED["u2b"], sp)
    assert all(r.is_zero for r in coupled3.residuals(b.values))


def test_empty_trail_is_identity(transformed):
    T, _ = transformed
    b = solve_triangular(T)
    assert back_substitute(b, []).values == b.values


def test_driver_solves_coupled3_at_depth_one(coupled3):
    r = factorize_and_solve(coupled3)
    assert r.status == "solved"
    assert r.path == (PivotChoice(1, 3),)
    assert r.problem_kind == "system"
    assert all(v.is_zero for v in coupled3.residuals(r.bundle.values))


def test_driver_inverse_square_six_via_cascade(sp):
    A = inverse_square(6, sp)
    r = factorize_and_solve(A)
    assert r.solved
    assert r.path == ()
    (chain,) = r.chains
    assert chain.N == 2 and chain.K == 2
    assert A.apply(r.bundle["u"]).is_zero


def test_driver_inverse_square_one_is_exhausted(sp):
    r = factorize_and_solve(inverse_square(1, sp), DriverConfig(max_depth=5, maxN=5, maxK=5))
    assert r.status == "exhausted"
    (chain,) = r.chains
    assert chain.status == "depth-exhausted"
    assert all(not v.is_zero for v in chain.h_values().values())
    assert r.trace[-1]["action"] == "cascade-exhausted"


def test_manual_pivot_sequence(coupled3):
    r = factorize_and_solve(coupled3, DriverConfig(pivots=[PivotChoice(1, 2)], max_depth=1))
    assert r.solved
    assert r.path == (PivotChoice(1, 2),)


def test_driver_respects_depth_zero(coupled3):
    r = factorize_and_solve(coupled3, DriverConfig(max_depth=0))
    assert r.status == "exhausted"


def test_first_order_problem_end_to_end(sp):
    from hyperlaplace.dsl import parse_problem

    pf = parse_problem(
        """
        vars x, y;
        firstorder {
          Dx(v1) = Dy(v2) + v1 + v2;
          Dx(v2) = Dy(v1);
        }
        """
    )
    r = factorize_and_solve(pf)
    assert r.solved
    assert set(r.bundle.labels) == {"v1", "v2"}


def test_invalid_config():
    with pytest.raises(ValueError):
        DriverConfig(max_depth=-1)
    with pytest.raises(ValueError):
        DriverConfig(points=0)
