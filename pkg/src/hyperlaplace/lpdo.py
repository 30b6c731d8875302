"""Linear partial differential operators in two variables.

``LPDO`` stores ``sum p_ij * D1^i * D2^j`` with coefficients written on the
left. ``CharOperator`` is the first-order operator ``m*D1 + n*D2``.
``NCOpPoly`` holds Scalar-weighted words in a fixed list of characteristic
operators and expands back to an ``LPDO``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import sympy

from . import linalg
from .errors import DependentOperatorsError, NonSplittingError, NotHyperbolicError, RepresentationError
from .expr import Scalar
from .expr.solution import SolutionExpr


def _coerce(space, c):
    return c if isinstance(c, Scalar) else space(c)


class LPDO:
    __slots__ = ("space", "coeffs", "_hash")

    def __init__(self, space, coeffs=None):
        self.space = space
        clean = {}
        for (i, j), c in (coeffs or {}).items():
            if i < 0 or j < 0:
                raise ValueError("negative derivative order")
            c = _coerce(space, c)
            if not c.is_zero:
                clean[(i, j)] = c
        self.coeffs = clean
        self._hash = None

    @classmethod
    def zero(cls, space):
        return cls(space)

    @classmethod
    def scalar(cls, s, space=None):
        space = space or s.space
        return cls(space, {(0, 0): _coerce(space, s)})

    @classmethod
    def one(cls, space):
        return cls(space, {(0, 0): space.one})

    @classmethod
    def D(cls, space, i=0, j=0):
        return cls(space, {(i, j): space.one})

    @property
    def order(self):
        return max((i + j for i, j in self.coeffs), default=0)

    @property
    def is_zero(self):
        return not self.coeffs

    def coeff(self, i, j):
        return self.coeffs.get((i, j), self.space.zero)

    def principal_symbol(self):
        """Coefficients ``[p_{n,0}, p_{n-1,1}, ..., p_{0,n}]`` of the top-order part."""
        n = self.order
        return [self.coeff(n - t, t) for t in range(n + 1)]

    def homogeneous_part(self, s):
        return LPDO(self.space, {k: v for k, v in self.coeffs.items() if sum(k) == s})

    # -- algebra ----------------------------------------------------------
    def _lift(self, other):
        if isinstance(other, LPDO):
            if other.space != self.space:
                raise ValueError("operators over different VarSpecs")
            return other
        if isinstance(other, CharOperator):
            return other.to_lpdo()
        if isinstance(other, (Scalar, int, Fraction)):
            return LPDO.scalar(_coerce(self.space, other), self.space)
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        out = dict(self.coeffs)
        for k, v in o.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return LPDO(self.space, out)

    __radd__ = __add__

    def __neg__(self):
        return LPDO(self.space, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        """Composition; a Scalar acts as a multiplication operator."""
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return compose(self, o)

    def __rmul__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return compose(o, self)

    def __eq__(self, other):
        if isinstance(other, CharOperator):
            other = other.to_lpdo()
        if not isinstance(other, LPDO):
            return NotImplemented
        return self.space == other.space and self.coeffs == other.coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.coeffs.items()))
        return self._hash

    # -- action -----------------------------------------------------------
    def apply(self, u):
        """Apply to a Scalar or a SolutionExpr."""
        sp = self.space
        if isinstance(u, Scalar):
            out = sp.zero
            for (i, j), c in self.coeffs.items():
                out = out + c * diff_scalar(u, i, j)
            return out
        out = SolutionExpr.zero(sp)
        for (i, j), c in self.coeffs.items():
            d = u
            for _ in range(i):
                d = d.diff(sp.first)
            for _ in range(j):
                d = d.diff(sp.second)
            out = out + d * c
        return out

    __call__ = apply

    def __str__(self):
        return format_operator(self.coeffs, self.space)

    def __repr__(self):
        return f"LPDO({str(self)!r})"


def diff_scalar(s, i, j):
    for _ in range(i):
        s = s.diff(s.space.first)
    for _ in range(j):
        s = s.diff(s.space.second)
    return s


def compose(a, b):
    """``a`` after ``b``, by the Leibniz rule."""
    if a.space != b.space:
        raise ValueError("operators over different VarSpecs")
    out = {}
    for (i1, j1), ca in a.coeffs.items():
        for (i2, j2), cb in b.coeffs.items():
            for gi in range(i1 + 1):
                for gj in range(j1 + 1):
                    d = diff_scalar(cb, gi, gj)
                    if d.is_zero:
                        continue
                    key = (i1 - gi + i2, j1 - gj + j2)
                    term = ca * d * (comb(i1, gi) * comb(j1, gj))
                    out[key] = out[key] + term if key in out else term
    return LPDO(a.space, out)


def _mono_str(i, j, space):
    parts = []
    for e, v in ((i, space.first), (j, space.second)):
        if e == 1:
            parts.append(f"D{v}")
        elif e:
            parts.append(f"D{v}^{e}")
    return "*".join(parts)


def format_operator(coeffs, space):
    if not coeffs:
        return "0"
    keys = sorted(coeffs, key=lambda k: (-(k[0] + k[1]), -k[0]))
    out = []
    for idx, k in enumerate(keys):
        c = coeffs[k]
        mono = _mono_str(*k, space)
        cs = str(c)
        neg = False
        if mono:
            if c == 1:
                body = mono
            elif c == -1:
                body, neg = mono, True
            else:
                if cs.startswith("-") and len(c.numer.terms()) == 1:
                    neg, cs = True, cs[1:]
                if len(c.numer.terms()) > 1 or "/" in cs:
                    cs = f"({cs})"
                body = f"{cs}*{mono}"
        else:
            if cs.startswith("-") and len(c.numer.terms()) == 1:
                neg, cs = True, cs[1:]
            elif len(c.numer.terms()) > 1 and c.denom != 1:
                cs = f"({cs})"
            body = cs
        if idx == 0:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


# -- characteristic operators -------------------------------------------------


class CharOperator:
    """First-order operator ``m*D1 + n*D2`` with ``(m, n) != (0, 0)``."""

    __slots__ = ("m", "n")

    def __init__(self, m, n):
        if m.space != n.space:
            raise ValueError("coefficients over different VarSpecs")
        if m.is_zero and n.is_zero:
            raise ValueError("characteristic operator with m = n = 0")
        self.m = m
        self.n = n

    @classmethod
    def of(cls, space, m, n):
        return cls(_coerce(space, m), _coerce(space, n))

    @property
    def space(self):
        return self.m.space

    def to_lpdo(self):
        return LPDO(self.space, {(1, 0): self.m, (0, 1): self.n})

    @property
    def is_constant(self):
        return self.m.is_number and self.n.is_number

    def __call__(self, u):
        """Apply to a Scalar, LogForm or SolutionExpr."""
        sp = self.space
        if isinstance(u, SolutionExpr):
            return u.along(self.m, self.n)
        return self.m * u.diff(sp.first) + self.n * u.diff(sp.second)

    def det(self, other):
        return self.m * other.n - self.n * other.m

    def independent_of(self, other):
        return not self.det(other).is_zero

    def scaled(self, g):
        return CharOperator(self.m * g, self.n * g)

    def normalized(self):
        """Constant operators rescaled to coprime integers with positive lead."""
        if not self.is_constant:
            return self
        from .expr.solution import normalize_direction

        a, b = normalize_direction(self.m.as_fraction(), self.n.as_fraction())
        return CharOperator.of(self.space, a, b)

    @property
    def lam(self):
        """``lam`` with the operator proportional to ``D1 - lam*D2``; None for ``D2``."""
        if self.m.is_zero:
            return None
        return -self.n / self.m

    def __eq__(self, other):
        return isinstance(other, CharOperator) and self.m == other.m and self.n == other.n

    def __hash__(self):
        return hash((self.m, self.n))

    def __str__(self):
        return str(self.to_lpdo())

    def __repr__(self):
        return f"CharOperator({str(self)!r})"


@dataclass(frozen=True)
class CommutatorDecomposition:
    """``[X1, X2] = P*X1 + Q*X2``."""

    P: Scalar
    Q: Scalar


def decompose(Z, X1, X2):
    """``(phi, psi)`` with ``Z = phi*X1 + psi*X2``."""
    d = X1.det(X2)
    if d.is_zero:
        raise DependentOperatorsError(f"{X1} and {X2} are dependent")
    phi = (Z.m * X2.n - Z.n * X2.m) / d
    psi = (X1.m * Z.n - X1.n * Z.m) / d
    return phi, psi


def commutator(X1, X2):
    """``[X1, X2]`` as a CharOperator-shaped pair, or None when it vanishes."""
    c = X1(X2.m) - X2(X1.m)
    d = X1(X2.n) - X2(X1.n)
    return c, d


def commutator_decompose(X1, X2):
    c, d = commutator(X1, X2)
    if X1.det(X2).is_zero:
        raise DependentOperatorsError(f"{X1} and {X2} are dependent")
    if c.is_zero and d.is_zero:
        sp = X1.space
        return CommutatorDecomposition(sp.zero, sp.zero)
    P, Q = decompose(CharOperator(c, d), X1, X2)
    return CommutatorDecomposition(P, Q)


# -- symbol factorization -----------------------------------------------------


def factor_binary_form(coeffs, space):
    """Split ``sum c_t * xi^(n-t) * eta^t`` into linear factors over the field.

    Returns ``(unit, [(a, b), ...])`` with ``form = unit * prod(a*xi + b*eta)``;
    each pair is normalized (``a = 1``, or ``(0, 1)``, or coprime integers for
    constant pairs) and the list is sorted by printed form.
    """
    n = len(coeffs) - 1
    xi, eta = sympy.Dummy("xi"), sympy.Dummy("eta")
    syms = [sympy.Symbol(s) for s in space.names]
    expr = sum(c.to_sympy() * xi ** (n - t) * eta**t for t, c in enumerate(coeffs))
    num, den = sympy.fraction(sympy.together(expr))
    content, factors = sympy.factor_list(sympy.expand(num), xi, eta, *syms)
    unit = space.from_sympy(content / den)
    pairs = []
    for f, e in factors:
        poly = sympy.Poly(f, xi, eta)
        deg = poly.total_degree()
        if deg == 0:
            unit = unit * space.from_sympy(f) ** e
            continue
        if deg > 1:
            raise NonSplittingError(
                f"symbol has the irreducible factor {sympy.sstr(f.subs({xi: sympy.Symbol('xi'), eta: sympy.Symbol('eta')}))}",
                factor=f,
            )
        if e > 1:
            raise NotHyperbolicError(f"repeated characteristic factor {f} (multiplicity {e})")
        a = space.from_sympy(poly.coeff_monomial(xi))
        b = space.from_sympy(poly.coeff_monomial(eta))
        if not a.is_zero:
            unit, pair = unit * a, (space.one, b / a)
        else:
            unit, pair = unit * b, (space.zero, space.one)
        if pair[1].is_number and not pair[0].is_zero:
            q = pair[1].as_fraction()
            k = q.denominator
            unit = unit * Fraction(1, k)
            pair = (space(k), space(q.numerator))
        pairs.append(pair)
    if len(set(pairs)) != len(pairs):
        raise NotHyperbolicError("repeated characteristic factors")
    pairs.sort(key=lambda p: str(CharOperator(*p)))
    return unit, pairs


def characteristic_roots(A):
    """Characteristic operators of ``A``: one per linear factor of its symbol.

    The symbol ``sum p_ij xi^i eta^j`` of the top-order part factors as
    ``unit * prod(m_k*xi + n_k*eta)``; the k-th operator is ``m_k*D1 + n_k*D2``
    (``lam_k = -n_k/m_k`` in the ``D1 - lam*D2`` convention).
    """
    if A.order < 1:
        raise NotHyperbolicError("operator of order 0 has no characteristics")
    unit, pairs = factor_binary_form(A.principal_symbol(), A.space)
    if len(pairs) != A.order:
        raise NotHyperbolicError("degenerate leading form")
    return [CharOperator(a, b) for a, b in pairs]


def symbol_unit(A, basis):
    """``u`` with ``sigma(A) = u * prod(sigma(X))``; RepresentationError otherwise."""
    prod = LPDO.one(A.space)
    for X in basis:
        prod = compose(prod, X.to_lpdo())
    top, ptop = A.principal_symbol(), prod.principal_symbol()
    if len(top) != len(ptop):
        raise RepresentationError("leading form order mismatch")
    t = next(i for i, c in enumerate(ptop) if not c.is_zero)
    u = top[t] / ptop[t]
    if any(a != u * b for a, b in zip(top, ptop)):
        raise RepresentationError("leading form is not the product of the basis symbols")
    return u


# -- non-commutative words ---------------------------------------------------


class NCOpPoly:
    """``sum a_w * X_{w1} ... X_{ws}`` with coefficients on the left.

    Words are tuples of 0-based indices into ``basis``.
    """

    __slots__ = ("basis", "terms", "space")

    def __init__(self, basis, terms=None):
        self.basis = tuple(basis)
        self.space = self.basis[0].space
        clean = {}
        for w, c in (terms or {}).items():
            w = tuple(w)
            if any(not 0 <= i < len(self.basis) for i in w):
                raise ValueError(f"word {w} outside the alphabet")
            c = _coerce(self.space, c)
            if not c.is_zero:
                clean[w] = clean[w] + c if w in clean else c
        self.terms = {w: c for w, c in clean.items() if not c.is_zero}

    def expand(self):
        sp = self.space
        out = LPDO.zero(sp)
        for w, c in self.terms.items():
            op = LPDO.scalar(c, sp)
            for i in w:
                op = compose(op, self.basis[i].to_lpdo())
            out = out + op
        return out

    def __add__(self, other):
        terms = dict(self.terms)
        for w, c in other.terms.items():
            terms[w] = terms[w] + c if w in terms else c
        return NCOpPoly(self.basis, terms)

    def __eq__(self, other):
        return isinstance(other, NCOpPoly) and self.basis == other.basis and self.terms == other.terms

    def __hash__(self):
        return hash((self.basis, frozenset(self.terms.items())))

    def coeff(self, word):
        return self.terms.get(tuple(word), self.space.zero)

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for w in sorted(self.terms, key=lambda w: (-len(w), w)):
            c = self.terms[w]
            word = "*".join(f"X{i + 1}" for i in w)
            cs = str(c)
            neg = cs.startswith("-") and len(c.numer.terms()) == 1
            if neg:
                cs = cs[1:]
            if len(c.numer.terms()) > 1 or ("/" in cs and word):
                cs = f"({cs})"
            if not word:
                body = cs
            elif cs == "1":
                body = word
            else:
                body = f"{cs}*{word}"
            if not out:
                out.append(f"-{body}" if neg else body)
            else:
                out.append(f" - {body}" if neg else f" + {body}")
        return "".join(out)


def _push_scalar_left(basis, prefix, s, suffix, coef, out):
    """Add ``coef * prefix * s * suffix`` to ``out`` with all scalars moved left."""
    if s.is_zero:
        return
    if not prefix:
        w = tuple(suffix)
        out[w] = out[w] + coef * s if w in out else coef * s
        return
    *rest, k = prefix
    _push_scalar_left(basis, tuple(rest), s, (k,) + tuple(suffix), coef, out)
    _push_scalar_left(basis, tuple(rest), basis[k](s), tuple(suffix), coef, out)


def normal_order(p, order=None):
    """Rewrite every word so its letters follow ``order`` (default 0, 1, ...)."""
    n = len(p.basis)
    order = list(range(n)) if order is None else list(order)
    rank = {sym: r for r, sym in enumerate(order)}
    decomp = {}

    def dec(i, j):
        if (i, j) not in decomp:
            decomp[(i, j)] = commutator_decompose(p.basis[i], p.basis[j])
        return decomp[(i, j)]

    terms = dict(p.terms)
    while True:
        bad = next(
            (w for w in sorted(terms, key=lambda w: (-len(w), w))
             if any(rank[a] > rank[b] for a, b in zip(w, w[1:]))),
            None,
        )
        if bad is None:
            break
        c = terms.pop(bad)
        pos = next(t for t in range(len(bad) - 1) if rank[bad[t]] > rank[bad[t + 1]])
        j, i = bad[pos], bad[pos + 1]
        # X_j X_i = X_i X_j - [X_i, X_j] = X_i X_j - P X_i - Q X_j
        swapped = bad[:pos] + (i, j) + bad[pos + 2 :]
        terms[swapped] = terms[swapped] + c if swapped in terms else c
        cd = dec(i, j)
        new = {}
        for letter, s in ((i, cd.P), (j, cd.Q)):
            _push_scalar_left(p.basis, bad[:pos], -s, (letter,) + bad[pos + 2 :], c, new)
        for w, v in new.items():
            terms[w] = terms[w] + v if w in terms else v
        terms = {w: v for w, v in terms.items() if not v.is_zero}
    return NCOpPoly(p.basis, terms)


def lpdo_to_ncpoly(A, basis):
    """Write ``A`` in the increasing-index word basis over ``basis``.

    Order-s words are ``X_{i1}...X_{is}`` with ``i1 < ... < is <= s+1``; the top
    word uses every operator. Coefficients are found order by order from the
    leading forms and the final residual is checked to vanish.
    """
    n = len(basis)
    sp = A.space
    if A.order != n:
        raise RepresentationError(f"operator order {A.order} differs from basis size {n}")
    for a, b in itertools.combinations(basis, 2):
        if not a.independent_of(b):
            raise DependentOperatorsError(f"{a} and {b} are dependent")
    terms = {tuple(range(n)): symbol_unit(A, basis)}
    residual = A - NCOpPoly(basis, terms).expand()
    for s in range(n - 1, 0, -1):
        words = [tuple(i for i in range(s + 1) if i != t) for t in range(s + 1)]
        target = residual.homogeneous_part(s)
        if target.is_zero:
            continue
        sym = [NCOpPoly(basis, {w: sp.one}).expand().homogeneous_part(s) for w in words]
        mat = [[op.coeff(s - r, r) for op in sym] for r in range(s + 1)]
        rhs = [target.coeff(s - r, r) for r in range(s + 1)]
        try:
            sol = linalg.solve(mat, rhs)
        except ValueError:
            raise RepresentationError(f"order-{s} part is not representable", residual=residual) from None
        part = NCOpPoly(basis, dict(zip(words, sol)))
        terms.update(part.terms)
        residual = residual - part.expand()
    a0 = residual.coeff(0, 0)
    if not a0.is_zero:
        terms[()] = a0
        residual = residual - LPDO.scalar(a0, sp)
    if not residual.is_zero:
        raise RepresentationError("nonzero residual after matching all orders", residual=residual)
    return NCOpPoly(basis, terms)
