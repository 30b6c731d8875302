"""Rational functions plus constant multiples of logarithms.

A :class:`LogForm` is ``r + sum c_i*ln|f_i|`` with ``r`` a Scalar, each ``c_i``
free of the independent variables and each ``f_i`` either a monic irreducible
polynomial or a prime number. Its derivatives are Scalars again, which is what
arguments of exponentials and characteristic coordinates need.
"""

from __future__ import annotations

import math

from sympy import factorint

from .scalar import PoleError, Scalar


class LogForm:
    __slots__ = ("space", "rational", "logs", "_hash")

    def __init__(self, rational, logs=()):
        self.space = rational.space
        merged = {}
        for arg, coef in logs:
            if not coef.is_constant:
                raise ValueError(f"logarithm coefficient {coef} depends on the independent variables")
            merged[arg] = merged.get(arg, coef.space.zero) + coef
        self.rational = rational
        self.logs = tuple(sorted(((a, c) for a, c in merged.items() if c), key=lambda t: str(t[0])))
        self._hash = None

    @classmethod
    def of(cls, s):
        return cls(s)

    @classmethod
    def log(cls, s, coef=None):
        """``coef * ln|s|`` in canonical form."""
        space = s.space
        coef = space.one if coef is None else coef
        if s.is_zero:
            raise ValueError("logarithm of zero")
        content, factors = s.factor()
        logs = [(f, coef * e) for f, e in factors]
        for part, sign in ((content.numerator, 1), (content.denominator, -1)):
            for p, e in factorint(abs(part)).items():
                logs.append((space(p), coef * (sign * e)))
        return cls(space.zero, logs)

    # -- algebra ----------------------------------------------------------
    def _lift(self, other):
        if isinstance(other, LogForm):
            return other
        if isinstance(other, Scalar):
            return LogForm(other)
        if isinstance(other, int):
            return LogForm(self.space(other))
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return LogForm(self.rational + o.rational, self.logs + o.logs)

    __radd__ = __add__

    def __neg__(self):
        return LogForm(-self.rational, [(a, -c) for a, c in self.logs])

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        """Multiply by a constant (free of the independent variables)."""
        c = self.space(c) if not isinstance(c, Scalar) else c
        if not c.is_constant:
            raise ValueError("LogForm can only be scaled by constants")
        return LogForm(self.rational * c, [(a, k * c) for a, k in self.logs])

    def __mul__(self, c):
        if isinstance(c, (int, Scalar)):
            return self.scale(c)
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, LogForm):
            return self.rational == other.rational and self.logs == other.logs
        if isinstance(other, (Scalar, int)):
            return not self.logs and self.rational == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.rational, self.logs))
        return self._hash

    @property
    def is_scalar(self):
        return not self.logs

    @property
    def is_zero(self):
        return not self.logs and self.rational.is_zero

    def as_scalar(self):
        if self.logs:
            raise ValueError(f"{self} contains logarithms")
        return self.rational

    # -- calculus ---------------------------------------------------------
    def diff(self, name):
        d = self.rational.diff(name)
        for arg, coef in self.logs:
            d = d + coef * arg.diff(name) / arg
        return d

    def depends_on(self, name):
        return not self.diff(name).is_zero

    @property
    def is_constant(self):
        return all(not self.depends_on(v) for v in self.space.variables)

    def exp_split(self):
        """Split ``exp(self)`` as ``(Scalar factor, LogForm remainder)``.

        Logarithms with integer coefficients become powers in the factor; the
        remainder keeps the rational part and the non-integer logarithms.
        """
        factor = self.space.one
        rest = []
        for arg, coef in self.logs:
            if coef.is_integer:
                factor = factor * arg ** int(coef.as_fraction())
            else:
                rest.append((arg, coef))
        return factor, LogForm(self.rational, rest)

    def subs_vars(self, first, second):
        out = LogForm(self.rational.subs_vars(first, second))
        for arg, coef in self.logs:
            out = out + LogForm.log(arg.subs_vars(first, second), coef)
        return out

    # -- numerics and printing -------------------------------------------
    def evaluate(self, values):
        v = self.rational.evaluate(values)
        for arg, coef in self.logs:
            a = abs(arg.evaluate(values))
            if a < 1e-300:
                raise PoleError(f"logarithm of zero in {self}")
            v += coef.evaluate(values) * math.log(a)
        return v

    def __str__(self):
        parts = []
        if not self.rational.is_zero or not self.logs:
            parts.append(str(self.rational))
        for arg, coef in self.logs:
            term = f"ln({arg})"
            if coef == 1:
                parts.append(term)
            elif coef == -1:
                parts.append(f"-{term}")
            else:
                c = str(coef)
                if len(coef.numer.terms()) > 1:
                    c = f"({c})"
                parts.append(f"{c}*{term}")
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __repr__(self):
        return f"LogForm({str(self)!r})"
