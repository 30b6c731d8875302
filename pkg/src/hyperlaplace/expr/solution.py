"""Closed-form solution expressions.

A :class:`SolutionExpr` is kept in a canonical sum-of-products form::

    sum  coefficient * exp(E) * A_1 * ... * A_r

where the coefficient is a Scalar, ``E`` is a :class:`LogForm` with no
integer-coefficient logarithms (those are folded into the coefficient) and each
``A_i`` is an arbitrary-function atom ``F^(d)(arg)`` or an unevaluated integral
along a constant direction. Sums, products and integer powers are normalized on
construction, so the zero test is structural.

Integrals ``int(g, X)`` denote an antiderivative along the constant-coefficient
field ``X = m*D1 + n*D2`` parametrized by ``tau = (m*x + n*y)/(m^2 + n^2)``,
so ``X(int(g, X)) = g``. Factors invariant along ``X`` are moved inside the
integrand and integrals sharing the same outside factor are merged; the lower
limit is absorbed into the arbitrary functions of ``eta = n*x - m*y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .logform import LogForm
from .scalar import Scalar


@dataclass(frozen=True)
class FuncAtom:
    """Derivative of order ``order`` of the arbitrary function ``name`` at ``arg``."""

    name: str
    order: int
    arg: LogForm

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("derivative order must be nonnegative")

    def __str__(self):
        return f"{self.name}{chr(39) * self.order}({self.arg})"


@dataclass(frozen=True)
class IntegralAtom:
    integrand: "SolutionExpr"
    direction: tuple

    def __str__(self):
        return f"int({self.integrand}, {direction_str(self.direction, self.integrand.space)})"


def direction_str(direction, space):
    m, n = direction
    parts = []
    for c, v in ((m, space.first), (n, space.second)):
        if c == 0:
            continue
        body = f"D{v}" if abs(c) == 1 else f"{abs(c)}*D{v}"
        if not parts:
            parts.append(f"-{body}" if c < 0 else body)
        else:
            parts.append(f" - {body}" if c < 0 else f" + {body}")
    return "".join(parts)


def normalize_direction(m, n):
    """Coprime integers with a positive leading entry."""
    m, n = Fraction(m), Fraction(n)
    if m == 0 and n == 0:
        raise ValueError("zero direction")
    den = math.lcm(m.denominator, n.denominator)
    a, b = int(m * den), int(n * den)
    g = math.gcd(a, b)
    a, b = a // g, b // g
    if a < 0 or (a == 0 and b < 0):
        a, b = -a, -b
    return a, b


def along(direction, s):
    """Derivative of the Scalar or LogForm ``s`` along a constant direction."""
    m, n = direction
    sp = s.space
    return m * s.diff(sp.first) + n * s.diff(sp.second)


def _key_str(key):
    e, atoms = key
    return f"{e}|{'*'.join(str(a) for a in atoms)}"


class SolutionExpr:
    """Immutable canonical linear combination of exponential/function monomials."""

    __slots__ = ("space", "_terms", "_items", "_hash", "_str")

    def __init__(self, space, terms=None):
        self.space = space
        terms = {k: v for k, v in (terms or {}).items() if not v.is_zero}
        if any(isinstance(a, IntegralAtom) for k in terms for a in k[1]):
            terms = _canonicalize_integrals(space, terms)
        self._terms = terms
        self._items = tuple(sorted(terms.items(), key=lambda kv: _key_str(kv[0])))
        self._hash = None
        self._str = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def const(cls, s):
        return cls(s.space, {(LogForm(s.space.zero), ()): s})

    @classmethod
    def zero(cls, space):
        return cls(space, {})

    @classmethod
    def exp(cls, arg):
        if isinstance(arg, Scalar):
            arg = LogForm(arg)
        factor, rest = arg.exp_split()
        return cls(arg.space, {(rest, ()): factor})

    @classmethod
    def func(cls, name, arg, order=0):
        if isinstance(arg, Scalar):
            arg = LogForm(arg)
        return cls(arg.space, {(LogForm(arg.space.zero), (FuncAtom(name, order, arg),)): arg.space.one})

    @classmethod
    def integral(cls, integrand, direction):
        direction = normalize_direction(*direction)
        if integrand.is_zero:
            return cls.zero(integrand.space)
        sp = integrand.space
        return cls(sp, {(LogForm(sp.zero), (IntegralAtom(integrand, direction),)): sp.one})

    def _lift(self, other):
        if isinstance(other, SolutionExpr):
            if other.space != self.space:
                raise ValueError("mixing expressions from different VarSpecs")
            return other
        if isinstance(other, (Scalar, int, Fraction)):
            return SolutionExpr.const(self.space(other))
        return NotImplemented

    # -- algebra ----------------------------------------------------------
    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        terms = dict(self._terms)
        for k, v in o._terms.items():
            terms[k] = terms[k] + v if k in terms else v
        return SolutionExpr(self.space, terms)

    __radd__ = __add__

    def __neg__(self):
        return SolutionExpr(self.space, {k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        terms = {}
        for (e1, a1), c1 in self._terms.items():
            for (e2, a2), c2 in o._terms.items():
                factor, e = (e1 + e2).exp_split()
                key = (e, tuple(sorted(a1 + a2, key=str)))
                c = c1 * c2 * factor
                terms[key] = terms[key] + c if key in terms else c
        return SolutionExpr(self.space, terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (Scalar, int, Fraction)):
            return self * (1 / self.space(other))
        return NotImplemented

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("integer exponents only")
        if n < 0:
            if len(self._terms) != 1 or next(iter(self._terms))[1]:
                raise ValueError("negative powers only of coefficient-exponential monomials")
            (e, _), c = next(iter(self._terms.items()))
            return SolutionExpr.exp(-e) * (1 / c) ** (-n) if n == -1 else (self ** (-n)) ** -1
        out = SolutionExpr.const(self.space.one)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (Scalar, int, Fraction)):
            other = SolutionExpr.const(self.space(other))
        if not isinstance(other, SolutionExpr):
            return NotImplemented
        return self.space == other.space and self._items == other._items

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._items)
        return self._hash

    @property
    def is_zero(self):
        return not self._terms

    def terms(self):
        """Canonical ``((exp_arg, atoms), coefficient)`` pairs."""
        return self._items

    # -- calculus ---------------------------------------------------------
    def diff(self, name):
        sp = self.space
        if name not in sp.variables:
            raise ValueError(f"{name!r} is not an independent variable")
        out = SolutionExpr.zero(sp)
        for (e, atoms), c in self._items:
            base = SolutionExpr(sp, {(e, atoms): sp.one})
            dc = c.diff(name) + c * e.diff(name)
            out = out + base * dc
            for i, atom in enumerate(atoms):
                rest = SolutionExpr(sp, {(e, atoms[:i] + atoms[i + 1 :]): c})
                out = out + rest * _diff_atom(atom, name)
        return out

    def along(self, m, n):
        """Apply the first-order operator ``m*D1 + n*D2`` (Scalar coefficients)."""
        sp = self.space
        return self.diff(sp.first) * m + self.diff(sp.second) * n

    # -- inspection -------------------------------------------------------
    def atoms(self):
        for (_, atoms), _ in self._items:
            for a in atoms:
                yield a
                if isinstance(a, IntegralAtom):
                    yield from a.integrand.atoms()

    def functions(self):
        """Map function name -> (set of arguments, maximal derivative order)."""
        out = {}
        for a in self.atoms():
            if isinstance(a, FuncAtom):
                args, order = out.get(a.name, (set(), 0))
                args.add(a.arg)
                out[a.name] = (args, max(order, a.order))
        return out

    @property
    def has_integral(self):
        return any(isinstance(a, IntegralAtom) for a in self.atoms())

    def map_atoms(self, fn):
        """Rebuild with ``fn(atom)`` (a SolutionExpr, or None to keep) for every atom.

        Integrands are rewritten first, so ``fn`` sees integrals whose
        integrands are already mapped.
        """
        sp = self.space
        out = SolutionExpr.zero(sp)
        for (e, atoms), c in self._items:
            term = SolutionExpr(sp, {(e, ()): c})
            for a in atoms:
                if isinstance(a, IntegralAtom):
                    inner = a.integrand.map_atoms(fn)
                    a = IntegralAtom(inner, a.direction) if not inner.is_zero else None
                    if a is None:
                        term = SolutionExpr.zero(sp)
                        break
                rep = fn(a)
                term = term * (rep if rep is not None else SolutionExpr(sp, {(LogForm(sp.zero), (a,)): sp.one}))
            out = out + term
        return out

    def substitute(self, name, builder):
        """Replace every ``name^(d)(arg)`` by ``builder(d, arg)``."""
        return self.substitute_many({name: builder})

    def substitute_many(self, builders):
        def fn(a):
            if isinstance(a, FuncAtom) and a.name in builders:
                return builders[a.name](a.order, a.arg)
            return None

        return self.map_atoms(fn)

    def rename(self, mapping):
        return self.substitute_many(
            {old: (lambda d, arg, new=new: SolutionExpr.func(new, arg, d)) for old, new in mapping.items()}
        )

    def integrals(self):
        """Integral atoms, innermost first."""
        seen = []
        for (_, atoms), _ in self._items:
            for a in atoms:
                if isinstance(a, IntegralAtom):
                    for b in a.integrand.integrals():
                        if b not in seen:
                            seen.append(b)
                    if a not in seen:
                        seen.append(a)
        return seen

    # -- numerics ---------------------------------------------------------
    def evaluate(self, values, realization):
        """Evaluate at ``values`` (ordered as ``space.names``).

        ``realization`` maps function names to callables ``f(t, order)``
        returning the order-th derivative at ``t``.
        """
        total = 0.0
        for (e, atoms), c in self._items:
            v = c.evaluate(values)
            if not e.is_zero:
                v *= math.exp(e.evaluate(values))
            for a in atoms:
                if isinstance(a, IntegralAtom):
                    raise ValueError("cannot evaluate an unevaluated integral numerically")
                try:
                    f = realization[a.name]
                except KeyError:
                    raise KeyError(f"no realization for arbitrary function {a.name!r}") from None
                v *= f(a.arg.evaluate(values), a.order)
            total += v
        return total

    # -- printing ---------------------------------------------------------
    def __str__(self):
        if self._str is None:
            self._str = _format(self)
        return self._str

    def __repr__(self):
        return f"SolutionExpr({str(self)!r})"


def _diff_atom(atom, name):
    sp = atom.arg.space if isinstance(atom, FuncAtom) else atom.integrand.space
    if isinstance(atom, FuncAtom):
        d = atom.arg.diff(name)
        if d.is_zero:
            return SolutionExpr.zero(sp)
        return SolutionExpr.func(atom.name, atom.arg, atom.order + 1) * d
    m, n = atom.direction
    norm = m * m + n * n
    g = atom.integrand
    transverse = (g.diff(sp.first) * n - g.diff(sp.second) * m) * sp(Fraction(1, norm))
    inner = SolutionExpr.integral(transverse, atom.direction)
    if name == sp.first:
        return g * sp(Fraction(m, norm)) + inner * n
    return g * sp(Fraction(n, norm)) - inner * m


# -- integral canonicalization ------------------------------------------------


def _split_scalar(c, direction):
    """``c = inside * outside`` with ``inside`` invariant along ``direction``."""
    sp = c.space
    content, factors = c.factor()
    inside, outside = sp(content), sp.one
    for f, e in factors:
        if along(direction, f).is_zero:
            inside = inside * f**e
        else:
            outside = outside * f**e
    return inside, outside


def _split_logform(e, direction):
    sp = e.space
    inside_logs, outside_logs = [], []
    for arg, coef in e.logs:
        (inside_logs if along(direction, arg).is_zero else outside_logs).append((arg, coef))
    # the restriction of r to the line tau = 0 is invariant, and r minus it
    # does not change when r changes by an invariant function
    r = e.rational
    m, n = direction
    norm = m * m + n * n
    eta = sp.symbol(sp.first) * n - sp.symbol(sp.second) * m
    try:
        r_in = r.subs_vars(eta * Fraction(n, norm), eta * Fraction(-m, norm))
    except ZeroDivisionError:
        r_in = sp.zero
    return LogForm(r_in, inside_logs), LogForm(r - r_in, outside_logs)


def _canonicalize_integrals(space, terms):
    plain = {}
    groups = {}
    for (e, atoms), c in terms.items():
        ints = [a for a in atoms if isinstance(a, IntegralAtom)]
        if len(ints) != 1:
            plain[(e, atoms)] = plain[(e, atoms)] + c if (e, atoms) in plain else c
            continue
        (integral,) = ints
        direction = integral.direction
        c_in, c_out = _split_scalar(c, direction)
        e_in, e_out = _split_logform(e, direction)
        inside = SolutionExpr.exp(e_in) * c_in
        outside_atoms = []
        for a in atoms:
            if a is integral:
                continue
            if isinstance(a, FuncAtom) and along(direction, a.arg).is_zero:
                inside = inside * SolutionExpr(space, {(LogForm(space.zero), (a,)): space.one})
            else:
                outside_atoms.append(a)
        integrand = inside * integral.integrand
        f_out, e_out = e_out.exp_split()
        key = (c_out * f_out, e_out, tuple(outside_atoms), direction)
        groups[key] = groups[key] + integrand if key in groups else integrand
    for (c_out, e_out, atoms_out, direction), integrand in groups.items():
        if integrand.is_zero:
            continue
        atom = IntegralAtom(integrand, direction)
        key = (e_out, tuple(sorted(atoms_out + (atom,), key=str)))
        plain[key] = plain[key] + c_out if key in plain else c_out
    return {k: v for k, v in plain.items() if not v.is_zero}


def _format(expr):
    if expr.is_zero:
        return "0"
    out = []
    for (e, atoms), c in expr.terms():
        factors = []
        if not e.is_zero:
            factors.append(f"exp({e})")
        factors.extend(str(a) for a in atoms)
        neg = False
        if factors:
            if c == 1:
                cs = ""
            elif c == -1:
                cs, neg = "", True
            else:
                cs = str(c)
                if cs.startswith("-") and len(c.numer.terms()) == 1:
                    neg, cs = True, cs[1:]
                if len(c.numer.terms()) > 1 or "/" in cs:
                    cs = f"({cs})"
            body = "*".join(([cs] if cs else []) + factors)
        else:
            cs = str(c)
            if cs.startswith("-") and len(c.numer.terms()) == 1:
                neg, cs = True, cs[1:]
            elif len(c.numer.terms()) > 1 and c.denom != 1:
                cs = f"({cs})"
            body = cs
        if not out:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)
