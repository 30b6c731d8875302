import pytest

from hyperlaplace.charform import CharSystem, first_order_to_charsys
from hyperlaplace.dsl import parse_operator
from hyperlaplace.expr import VarSpec
from hyperlaplace.lpdo import LPDO, CharOperator


@pytest.fixture
def sp():
    return VarSpec()


@pytest.fixture
def landau(sp):
    x = sp.symbol("x")
    Dx, Dy = LPDO.D(sp, 1, 0), LPDO.D(sp, 0, 1)
    P = Dx + x * Dy
    Q = Dx + 1
    R = Dx * Dx + x * Dx * Dy + Dx + (2 + x) * Dy
    return P, Q, R


def inverse_square(c, sp=None):
    """``Dx Dy - c/(x+y)^2``."""
    sp = sp or VarSpec()
    return parse_operator(f"Dx*Dy - {c}/(x+y)^2", sp)


def coupled3x3(sp=None):
    sp = sp or VarSpec()
    ops = [CharOperator.of(sp, 1, 0), CharOperator.of(sp, 0, 1), CharOperator.of(sp, 1, 1)]
    return CharSystem(ops, [[1, 2, 1], [-6, 1, 2], [12, 6, 1]])


def noise_system():
    """Characteristic system of the dichotomic-noise example, variables ``(t, x)``."""
    sp = VarSpec("t", "x", params=("nu", "p1", "p2", "q2"))
    x, nu, p1, p2, q2 = (sp.symbol(n) for n in ("x", "nu", "p1", "p2", "q2"))
    p = p1 * x + p2 * x**2
    q = q2 * x**2
    px, qx = p.diff("x"), q.diff("x")
    a = [[-p, -q], [-q, -p]]
    b = [[-px, -qx], [-qx, -px - 2 * nu]]
    S, rec = first_order_to_charsys(a, b, ("W", "W1"))
    return S, rec, sp


@pytest.fixture
def coupled3(sp):
    return coupled3x3(sp)
