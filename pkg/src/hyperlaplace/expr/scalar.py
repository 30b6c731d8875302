"""Exact rational functions in two independent variables and named parameters.

A :class:`Scalar` is an element of Q(x, y, params). Values are kept as a reduced
fraction of sparse polynomials whose denominator is monic under the graded
lexicographic order (independent variables first, then parameters), so two
scalars are equal exactly when their stored numerator and denominator agree.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from sympy import QQ
from sympy.polys.fields import field
from sympy.polys.orderings import grlex


class PoleError(ArithmeticError):
    """Raised when a scalar is evaluated (numerically) at or near a pole."""


POLE_TOLERANCE = 1e-6


@lru_cache(maxsize=None)
def _make_field(names):
    K, *gens = field(",".join(names), QQ, grlex)
    return K, tuple(gens)


class VarSpec:
    """Names of the two independent variables plus the ordered parameters."""

    __slots__ = ("first", "second", "params", "field", "_gens", "_index")

    def __init__(self, first="x", second="y", params=()):
        params = tuple(params)
        names = (first, second) + params
        if any(not isinstance(n, str) or not n for n in names):
            raise ValueError("variable and parameter names must be nonempty strings")
        if len(set(names)) != len(names):
            raise ValueError(f"names must be distinct: {names}")
        self.first = first
        self.second = second
        self.params = params
        self.field, self._gens = _make_field(names)
        self._index = {n: i for i, n in enumerate(names)}

    @property
    def names(self):
        return (self.first, self.second) + self.params

    @property
    def variables(self):
        return (self.first, self.second)

    def __eq__(self, other):
        return isinstance(other, VarSpec) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"VarSpec({self.first!r}, {self.second!r}, params={self.params!r})"

    def index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown name {name!r} for {self!r}") from None

    def symbol(self, name):
        return Scalar(self, self._gens[self.index(name)])

    def __call__(self, value):
        """Coerce ``value`` (int, Fraction, name, Scalar or text) to a Scalar."""
        if isinstance(value, Scalar):
            if value.space != self:
                raise ValueError("scalar belongs to a different VarSpec")
            return value
        if isinstance(value, str):
            if value in self._index:
                return self.symbol(value)
            return self.parse(value)
        if isinstance(value, (int, Fraction)):
            return Scalar(self, self.field(QQ(value.numerator, value.denominator)))
        raise TypeError(f"cannot convert {type(value).__name__} to Scalar")

    @property
    def zero(self):
        return Scalar(self, self.field.zero)

    @property
    def one(self):
        return Scalar(self, self.field.one)

    def parse(self, text):
        from ..dsl import parse_scalar

        return parse_scalar(text, self)

    def from_sympy(self, expr):
        return Scalar(self, self.field.from_expr(expr))


def _fmt_rational(q):
    q = Fraction(int(q.numerator), int(q.denominator))
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _fmt_monomial(exps, names):
    parts = []
    for e, n in zip(exps, names):
        if e == 1:
            parts.append(n)
        elif e:
            parts.append(f"{n}^{e}")
    return "*".join(parts)


def format_poly(p, names):
    terms = sorted(p.terms(), key=lambda t: p.ring.order(t[0]), reverse=True)
    if not terms:
        return "0"
    out = []
    for k, (exps, c) in enumerate(terms):
        neg = c < 0
        c = -c if neg else c
        mono = _fmt_monomial(exps, names)
        if not mono:
            body = _fmt_rational(c)
        elif c == 1:
            body = mono
        else:
            body = f"{_fmt_rational(c)}*{mono}"
        if k == 0:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


def _is_atomic(p):
    """True if the printed polynomial needs no parentheses after a ``/``."""
    if len(p.terms()) != 1:
        return False
    exps, c = p.terms()[0]
    return c == 1 and sum(1 for e in exps if e) <= 1


def _denominator_parts(den, names):
    """``(content, factor strings)`` with ``den = content * prod(factors)``."""
    content, factors = den.factor_list()
    parts = []
    for f, e in sorted(factors, key=lambda t: format_poly(t[0], names)):
        body = format_poly(f, names)
        if not _is_atomic(f):
            body = f"({body})"
        parts.append(body if e == 1 else f"{body}^{e}")
    return Fraction(int(content.numerator), int(content.denominator)), parts


class Scalar:
    """Immutable exact element of Q(x, y, params)."""

    __slots__ = ("space", "_f", "_num", "_den", "_compiled", "_hash")

    def __init__(self, space, frac):
        den = frac.denom
        lc = den.LC
        if lc != 1:
            frac = frac.field.raw_new(frac.numer.quo_ground(lc), den.quo_ground(lc))
        self.space = space
        self._f = frac
        self._num = frac.numer
        self._den = frac.denom
        self._compiled = None
        self._hash = None

    # -- coercion helpers -------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Scalar):
            if other.space != self.space:
                raise ValueError("mixing scalars from different VarSpecs")
            return other._f
        if isinstance(other, (int, Fraction)):
            return self.space.field(QQ(other.numerator, other.denominator))
        return NotImplemented

    def _wrap(self, f):
        return Scalar(self.space, f)

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self._f + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self._f - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(o - self._f)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self._f * o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if not o:
            raise ZeroDivisionError("division by the zero Scalar")
        return self._wrap(self._f / o)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if not self._f:
            raise ZeroDivisionError("division by the zero Scalar")
        return self._wrap(o / self._f)

    def __neg__(self):
        return self._wrap(-self._f)

    def __pos__(self):
        return self

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("Scalar exponents must be integers")
        if n == 0:
            return self.space.one
        if n < 0 and not self._f:
            raise ZeroDivisionError("negative power of the zero Scalar")
        return self._wrap(self._f**n)

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.space == other.space and self._num == other._num and self._den == other._den
        if isinstance(other, (int, Fraction)):
            return self._den == 1 and self._num == QQ(other.numerator, other.denominator)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._num, self._den))
        return self._hash

    def __bool__(self):
        return bool(self._num)

    @property
    def is_zero(self):
        return not self._num

    @property
    def numer(self):
        return self._num

    @property
    def denom(self):
        return self._den

    def numerator(self):
        return self._wrap(self.space.field(self._num))

    def denominator(self):
        return self._wrap(self.space.field(self._den))

    # -- structure --------------------------------------------------------
    def degrees(self, name):
        i = self.space.index(name)
        return self._num.degree(i), self._den.degree(i)

    def depends_on(self, name):
        return any(d > 0 for d in self.degrees(name))

    @property
    def is_constant(self):
        """No dependence on the independent variables (parameters allowed)."""
        return not self.depends_on(self.space.first) and not self.depends_on(self.space.second)

    @property
    def is_number(self):
        return self._den == 1 and self._num.is_ground

    def as_fraction(self):
        if not self.is_number:
            raise ValueError(f"{self} is not a rational number")
        c = self._num.LC if self._num else 0
        return Fraction(int(c.numerator), int(c.denominator)) if c else Fraction(0)

    @property
    def is_integer(self):
        return self.is_number and self.as_fraction().denominator == 1

    # -- calculus ---------------------------------------------------------
    def diff(self, name):
        if name not in self.space.variables:
            raise ValueError(f"cannot differentiate with respect to {name!r}: not an independent variable")
        return self._wrap(self._f.diff(self.space.field.gens[self.space.index(name)]))

    def subs_vars(self, first, second):
        """Substitute polynomial Scalars for both independent variables at once."""
        if not (first.denom == 1 and second.denom == 1):
            raise ValueError("substitution values must be polynomials")
        ring = self._num.ring
        pairs = [(ring.gens[0], first._num), (ring.gens[1], second._num)]
        num = self._num.compose(pairs)
        den = self._den.compose(pairs)
        if not den:
            raise ZeroDivisionError("substitution annihilates the denominator")
        return self._wrap(self.space.field.new(num, den))

    def factor(self):
        """Return ``(content, [(Scalar factor, exponent), ...])``.

        Factors are monic irreducible polynomials; denominator factors carry
        negative exponents. ``content`` is a rational number.
        """
        cn, fn = self._num.factor_list()
        cd, fd = self._den.factor_list()
        content = Fraction(int(cn.numerator), int(cn.denominator)) / Fraction(
            int(cd.numerator), int(cd.denominator)
        )
        out = []
        for facs, sign in ((fn, 1), (fd, -1)):
            for f, e in facs:
                lc = f.LC
                content *= Fraction(int(lc.numerator), int(lc.denominator)) ** (sign * e)
                out.append((self._wrap(self.space.field(f.quo_ground(lc))), sign * e))
        out.sort(key=lambda t: str(t[0]))
        return content, out

    # -- numerics ---------------------------------------------------------
    def _compile(self):
        if self._compiled is None:
            def terms(p):
                return [(float(c), tuple(exps)) for exps, c in p.terms()]

            self._compiled = (terms(self._num), terms(self._den))
        return self._compiled

    def evaluate(self, values):
        """Evaluate at ``values`` (a sequence matching ``space.names``)."""
        num, den = self._compile()

        def ev(terms):
            s = 0.0
            for c, exps in terms:
                t = c
                for v, e in zip(values, exps):
                    if e:
                        t *= v**e
                s += t
            return s

        d = ev(den)
        if abs(d) < POLE_TOLERANCE:
            raise PoleError(f"evaluation of {self} too close to a pole")
        return ev(num) / d

    # -- printing ---------------------------------------------------------
    def __str__(self):
        names = self.space.names
        if self._den == 1:
            return format_poly(self._num, names)
        # num/den = (q * prim) / prod(factors) with prim a primitive integer polynomial
        content, parts = _denominator_parts(self._den, names)
        scale, num_int = self._num.clear_denoms()
        g, prim = num_int.primitive()
        q = Fraction(int(g), 1) / Fraction(int(scale.numerator), int(scale.denominator)) / content
        num = format_poly(prim * q.numerator, names)
        if q.denominator != 1:
            parts.insert(0, str(q.denominator))
        den = parts[0] if len(parts) == 1 else f"({'*'.join(parts)})"
        if len(self._num.terms()) > 1:
            num = f"({num})"
        return f"{num}/{den}"

    def __repr__(self):
        return f"Scalar({str(self)!r})"

    @property
    def needs_parens(self):
        """Whether the printed form must be parenthesized inside a product."""
        return len(self._num.terms()) > 1 and self._den == 1

    def to_sympy(self):
        return self._f.as_expr()

    def sort_key(self):
        return str(self)


def lcm_denominators(scalars):
    """Least common multiple of the denominators, as a polynomial Scalar."""
    scalars = list(scalars)
    if not scalars:
        raise ValueError("empty sequence")
    space = scalars[0].space
    den = scalars[0].denom.ring.one
    for s in scalars:
        den = den.lcm(s.denom)
    return Scalar(space, space.field(den))
