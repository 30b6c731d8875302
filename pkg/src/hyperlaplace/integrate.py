"""Integration along constant characteristic directions.

For a constant operator ``X = c*(m*D1 + n*D2)`` with coprime integers ``m, n``
the coordinates ``tau = (m*x + n*y)/(m^2 + n^2)`` and ``eta = n*x - m*y``
satisfy ``X(tau) = c`` and ``X(eta) = 0``. Integrating factors are computed by
rational integration in ``tau`` and must come back as a LogForm.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction

import sympy
from sympy.integrals.rationaltools import ratint

from .errors import IntegrationError
from .expr import LogForm, Scalar
from .expr.solution import FuncAtom, SolutionExpr, along, normalize_direction


# -- coordinates ----------------------------------------------------------------


def direction_of(X):
    """``(c, (m, n))`` with ``X = c*(m*D1 + n*D2)`` and coprime integer ``m, n``."""
    if not X.is_constant:
        raise IntegrationError(f"operator {X} has variable coefficients; characteristic coordinates must be supplied")
    m, n = normalize_direction(X.m.as_fraction(), X.n.as_fraction())
    c = X.m / m if m else X.n / n
    return c, (m, n)


def invariant_of(space, direction):
    """``eta = n*x - m*y`` normalized to coprime integers with positive lead."""
    m, n = direction
    a, b = normalize_direction(n, -m)
    return space.symbol(space.first) * a + space.symbol(space.second) * b


def time_of(space, direction):
    """``tau`` with ``(m*D1 + n*D2) tau = 1``."""
    m, n = direction
    norm = m * m + n * n
    return (space.symbol(space.first) * m + space.symbol(space.second) * n) * Fraction(1, norm)


def integrating_factor(direction, a):
    """LogForm ``phi`` with ``(m*D1 + n*D2) phi = a``."""
    sp = a.space
    if a.is_zero:
        return LogForm(sp.zero)
    if along(direction, a).is_zero:
        return LogForm(a * time_of(sp, direction))
    m, n = direction
    norm = m * m + n * n
    x, y = (sympy.Symbol(v) for v in sp.variables)
    tau, eta = sympy.Dummy("tau"), sympy.Dummy("eta")
    expr = a.to_sympy().subs(
        {x: m * tau + sympy.Rational(n, norm) * eta, y: n * tau - sympy.Rational(m, norm) * eta},
        simultaneous=True,
    )
    try:
        prim = ratint(sympy.cancel(expr), tau)
    except Exception as exc:  # sympy raises a variety of types here
        raise IntegrationError(f"cannot integrate {a} along {direction}: {exc}") from None
    prim = sympy.expand(prim.subs({tau: (m * x + n * y) / sympy.Integer(norm), eta: n * x - m * y}, simultaneous=True))
    phi = _to_logform(sp, prim, a, direction)
    if along(direction, phi) != a:
        raise IntegrationError(f"integrating factor check failed for {a}")
    return phi


def _to_logform(sp, expr, a, direction):
    logs = sorted(expr.atoms(sympy.log), key=str)
    rational = expr
    out = LogForm(sp.zero)
    try:
        for lg in logs:
            c = sympy.cancel(expr.coeff(lg))
            rational = rational - c * lg
            out = out + LogForm.log(sp.from_sympy(lg.args[0]), sp.from_sympy(c))
        rational = sympy.cancel(sympy.expand(rational))
        if rational.has(sympy.log) or not rational.is_rational_function(*[sympy.Symbol(v) for v in sp.names]):
            raise ValueError("non-rational remainder")
        return out + LogForm(sp.from_sympy(rational))
    except Exception:
        raise IntegrationError(
            f"integrating factor of {a} along {direction} leaves the rational-plus-logarithm class"
        ) from None


# -- arbitrary functions and bundles -------------------------------------------------


@dataclass(frozen=True)
class FunctionInfo:
    """An arbitrary function of one variable and where it came from."""

    name: str
    argument: LogForm
    provenance: str

    def to_json(self):
        return {"name": self.name, "argument": str(self.argument), "provenance": self.provenance}


@dataclass(frozen=True)
class Redefinition:
    """``old(t) = exp(-mu*t) * new'(t)``, introduced to remove a quadrature."""

    old: str
    new: str
    mu: Scalar

    def __str__(self):
        if self.mu.is_zero:
            return f"{self.old}(t) = {self.new}'(t)"
        e = LogForm(-self.mu * self.mu.space.symbol(self.mu.space.first))
        kernel = str(e).replace(self.mu.space.first, "t")
        return f"{self.old}(t) = exp({kernel})*{self.new}'(t)"

    def builder(self):
        """Substitution ``d, arg -> d-th derivative of exp(-mu*t) new'(t) at arg``."""
        mu, new = self.mu, self.new

        def build(d, arg):
            sp = arg.space
            ex = SolutionExpr.exp(arg.scale(-mu))
            out = SolutionExpr.zero(sp)
            for j in range(d + 1):
                c = sp(math.comb(d, j)) * (-mu) ** (d - j)
                out = out + ex * SolutionExpr.func(new, arg, j + 1) * c
            return out

        return build


@dataclass
class SolutionBundle:
    """Closed-form values for every unknown of a solved problem.

    ``trail`` lists the substitution records already applied, in order, and
    ``system`` is what the values solve (a CharSystem, an LPDO or None).
    """

    labels: tuple
    values: dict
    functions: dict
    trail: tuple = ()
    redefinitions: tuple = ()
    system: object = None
    notes: tuple = field(default_factory=tuple)

    @property
    def space(self):
        return next(iter(self.values.values())).space

    @property
    def quadrature_free(self):
        return not any(v.has_integral for v in self.values.values())

    def function_names(self):
        names = set()
        for v in self.values.values():
            names.update(v.functions())
        return sorted(names)

    def __getitem__(self, label):
        return self.values[label]

    def replace(self, **kw):
        return replace(self, **kw)

    def to_json(self):
        return {
            "unknowns": {l: str(self.values[l]) for l in self.labels},
            "functions": [self.functions[n].to_json() for n in sorted(self.functions)],
            "redefinitions": [str(r) for r in self.redefinitions],
            "quadrature_free": self.quadrature_free,
            "trail": [r.to_json() for r in self.trail],
            **({"notes": list(self.notes)} if self.notes else {}),
        }


FUNCTION_NAMES = ("F", "G", "H", "K", "M", "N", "R", "S", "T", "V", "W")


def fresh_name(used, preferred=None):
    """First name from ``preferred`` then the default sequence not in ``used``."""
    for name in ((preferred,) if preferred else ()) + FUNCTION_NAMES:
        if name not in used:
            return name
    k = 1
    while f"F{k}" in used:
        k += 1
    return f"F{k}"


def next_index(name, used):
    """``F -> F1 -> F2``: the redefinition successor of ``name``."""
    base = re.sub(r"\d+$", "", name)
    k = int(name[len(base):] or 0) + 1
    while f"{base}{k}" in used:
        k += 1
    return f"{base}{k}"


# -- scalar first-order equations ----------------------------------------------


def solve_first_order_scalar(X, a, rhs=None, name="F"):
    """General solution of ``X u = a*u + rhs`` as ``(SolutionExpr, FunctionInfo)``.

    ``u = exp(phi) * (F(eta) + int(exp(-phi) * rhs))`` with ``X(phi) = a`` and
    ``eta`` the invariant of ``X``.
    """
    sp = a.space
    c, direction = direction_of(X)
    phi = integrating_factor(direction, a / c)
    eta = LogForm(invariant_of(sp, direction))
    F = SolutionExpr.func(name, eta)
    inner = F
    if rhs is not None and not rhs.is_zero:
        inner = inner + SolutionExpr.integral(SolutionExpr.exp(-phi) * rhs / c, direction)
    u = SolutionExpr.exp(phi) * inner
    return u, FunctionInfo(name, eta, f"integration along {X}")


# -- quadrature elimination ------------------------------------------------------

_MAX_POLY_STEPS = 12
_MAX_ROUNDS = 64


def _iterated(direction, c):
    """``[c, X c, X^2 c, ...]`` up to the first zero, or None if it does not stop."""
    out = [c]
    for _ in range(_MAX_POLY_STEPS):
        nxt = along(direction, out[-1])
        if nxt.is_zero:
            return out
        out.append(nxt)
    return None


def _unit(sp, e, atoms):
    return SolutionExpr(sp, {(e, tuple(atoms)): sp.one})


def _split_atoms(direction, atoms):
    invariant, moving = [], []
    for a in atoms:
        if isinstance(a, FuncAtom) and along(direction, a.arg).is_zero:
            invariant.append(a)
        else:
            moving.append(a)
    return tuple(invariant), moving


def _plain_antiderivative(direction, e, invariant, c, lam):
    """``int c*exp(e)`` when ``c`` is a polynomial along the direction."""
    sp = c.space
    powers = _iterated(direction, c)
    if powers is None:
        return None
    total = sp.zero
    if not lam.is_zero:
        # int(c e^E) = e^E * sum (-1)^k X^k(c) / lam^(k+1)
        for k, p in enumerate(powers):
            total = total + p * (-1) ** k / lam ** (k + 1)
    else:
        tau = time_of(sp, direction)
        for k, p in enumerate(powers):
            total = total + p * (-1) ** k * tau ** (k + 1) * Fraction(1, math.factorial(k + 1))
    return _unit(sp, e, invariant) * total


def _divide_linear(coeffs, a, lam):
    """Quotient of ``sum coeffs[d] z^d`` by ``a*z + lam`` if exact, else None."""
    top = max(coeffs)
    rem = dict(coeffs)
    quot = {}
    for d in range(top, 0, -1):
        c = rem.get(d)
        if c is None or c.is_zero:
            continue
        q = c / a
        quot[d - 1] = q
        rem[d - 1] = rem.get(d - 1, a.space.zero) - q * lam
    r0 = rem.get(0)
    if r0 is not None and not r0.is_zero:
        return None
    return quot


def _classify(direction, integrand):
    """Group integrand terms; returns ``(closed, rest, requests)``.

    ``closed`` are antiderivatives found without changing any function,
    ``rest`` the terms left under the integral and ``requests`` the
    redefinitions ``(name, mu, arg)`` that would make the rest integrable.
    """
    sp = integrand.space
    closed, rest, requests = [], [], []
    groups = {}
    for (e, atoms), c in integrand.terms():
        lam = along(direction, e)
        invariant, moving = _split_atoms(direction, atoms)
        term = SolutionExpr(sp, {(e, atoms): c})
        if not lam.is_constant:
            rest.append(term)
            continue
        if not moving:
            anti = _plain_antiderivative(direction, e, invariant, c, lam)
            (closed.append(anti) if anti is not None else rest.append(term))
            continue
        f = moving[0]
        if len(moving) != 1 or not isinstance(f, FuncAtom):
            rest.append(term)
            continue
        rate = along(direction, f.arg)
        if not rate.is_constant or not along(direction, c).is_zero:
            rest.append(term)
            continue
        key = (e, invariant, f.name, f.arg)
        groups.setdefault(key, {})[f.order] = c
    for (e, invariant, name, arg), coeffs in groups.items():
        lam = along(direction, e)
        rate = along(direction, arg)
        quot = _divide_linear(coeffs, rate, lam)
        if quot is not None:
            anti = SolutionExpr.zero(sp)
            for d, q in quot.items():
                anti = anti + _unit(sp, e, invariant + (FuncAtom(name, d, arg),)) * q
            closed.append(anti)
            continue
        for d, c in coeffs.items():
            rest.append(_unit(sp, e, invariant + (FuncAtom(name, d, arg),)) * c)
        requests.append((name, lam / rate, arg))
    return closed, rest, requests


def _eliminate_one(values, functions, redefinitions):
    """One rewriting round; returns the updated state or None if nothing applies.

    Closed-form integrations anywhere take priority over redefinitions.
    """
    pending = None
    for label, expr in values.items():
        for integral in expr.integrals():
            if integral.integrand.has_integral:
                continue
            closed, rest, requests = _classify(integral.direction, integral.integrand)
            if requests and pending is None:
                pending = requests[0]
            if not closed:
                continue
            replacement = sum(closed[1:], closed[0])
            if rest:
                replacement = replacement + SolutionExpr.integral(sum(rest[1:], rest[0]), integral.direction)
            values = {l: v.map_atoms(lambda a: replacement if a == integral else None) for l, v in values.items()}
            return values, functions, redefinitions
    if pending is None:
        return None
    name, mu, arg = pending
    used = set(functions) | {n for v in values.values() for n in v.functions()}
    new = next_index(name, used)
    red = Redefinition(name, new, mu)
    build = red.builder()
    values = {l: v.substitute(name, build) for l, v in values.items()}
    functions = dict(functions)
    functions.pop(name, None)
    functions[new] = FunctionInfo(new, arg, f"redefinition {red}")
    return values, functions, redefinitions + (red,)


def eliminate_quadratures(target):
    """Remove quadratures by closed-form integration and by-parts redefinitions.

    ``target`` is a SolutionExpr or a SolutionBundle; redefinitions apply to
    every value of a bundle and are recorded in it. Unmatched integrals stay.
    """
    if isinstance(target, SolutionExpr):
        values, functions = {"_": target}, {}
        for name, (args, _) in target.functions().items():
            functions[name] = FunctionInfo(name, next(iter(args)), "input")
        redefinitions = ()
    else:
        values, functions, redefinitions = dict(target.values), dict(target.functions), target.redefinitions
    for _ in range(_MAX_ROUNDS):
        step = _eliminate_one(values, functions, redefinitions)
        if step is None:
            break
        values, functions, redefinitions = step
    if isinstance(target, SolutionExpr):
        return values["_"]
    return target.replace(values=values, functions=functions, redefinitions=redefinitions)
