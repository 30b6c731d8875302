import pytest

from hyperlaplace.dsl import parse_operator, parse_problem, parse_scalar, parse_solution
from hyperlaplace.errors import ParseError
from hyperlaplace.expr import VarSpec

COUPLED3 = """
vars x, y;
ops X1 = Dx, X2 = Dy, X3 = Dx + Dy;
system {
  X1(u1) = u1 + 2*u2 + u3;
  X2(u2) = -6*u1 + u2 + 2*u3;
  X3(u3) = 12*u1 + 6*u2 + u3;
}
"""


def test_coupled3_file(sp):
    pf = parse_problem(COUPLED3)
    assert pf.kind == "system"
    S = pf.problem
    assert S.labels == ("u1", "u2", "u3")
    assert S.alpha == tuple(tuple(sp(v) for v in row) for row in [[1, 2, 1], [-6, 1, 2], [12, 6, 1]])


def test_lets_and_params():
    pf = parse_problem(
        """
        vars x, y;
        params c;
        let r = x + y;
        equation { Dx*Dy - c/r^2 = 0 }
        """
    )
    sp = pf.space
    assert pf.problem == parse_operator("Dx*Dy - c/(x+y)^2", sp)


def test_composition_is_rejected(sp):
    with pytest.raises(ParseError) as info:
        parse_operator("Dx*(Dy + 1)", sp)
    assert "composition" in info.value.message


def test_singular_dx_matrix_is_reported():
    singular = """
    vars x, y;
    firstorder {
      Dx(v1) + Dx(v2) = Dy(v1);
      Dx(v1) + Dx(v2) = Dy(v2);
    }
    """
    with pytest.raises(ParseError) as info:
        parse_problem(singular)
    assert "cannot be put into the standard form" in info.value.message


def test_first_order_standard_form(sp):
    pf = parse_problem(
        """
        vars x, y;
        firstorder {
          Dx(v1) = Dy(v2) + v1;
          2*Dx(v2) = Dy(v1);
        }
        """
    )
    fo = pf.problem
    assert fo.unknowns == ("v1", "v2")
    assert fo.a == [[sp.zero, sp.one], [sp(1) / 2, sp.zero]]
    assert fo.b[0][0] == sp.one


@pytest.mark.parametrize(
    "text, line",
    [
        ("vars x, y;\nsystem {\n  X1(u1) = u1 +;\n}", 3),
        ("vars x;\nequation { Dx }", 1),
        ("vars x, y;\nequation { Dx*Dy }\nequation { Dx }", 3),
        ("vars x, y;\nsystem {\n  Dx(u1) = u2;\n  Dy(u2) = u1 $ 2;\n}", 4),
    ],
)
def test_syntax_errors_carry_positions(text, line):
    with pytest.raises(ParseError) as info:
        parse_problem(text)
    assert info.value.line == line
    assert info.value.column >= 1


def test_missing_problem_block():
    with pytest.raises(ParseError):
        parse_problem("vars x, y;")


def test_config_block():
    pf = parse_problem("vars x, y;\nconfig { chain_max = 5:5; max_depth = 2; }\nequation { Dx*Dy }")
    assert pf.config == {"chain_max": "5:5", "max_depth": "2"}


def test_scalar_and_solution_parsing(sp):
    assert parse_scalar("(x^2 - y^2)/(x - y)", sp) == sp.parse("x + y")
    u = parse_solution("exp(x)*F'(y) + G(x - y)", sp)
    assert sorted(u.functions()) == ["F", "G"]


def test_parametric_operator_round_trip():
    sp = VarSpec(params=("c",))
    A = parse_operator("Dx*Dy + c*x*Dx - c^2/(x+y)^2", sp)
    assert parse_operator(str(A), sp) == A
