"""Characteristic-form systems and conversions from scalar equations and first-order systems.

A :class:`CharSystem` is ``X_i(u_i) = sum_k alpha[i][k] * u_k``. Each conversion
returns a :class:`SubstitutionRecord` whose maps are linear differential
expressions: ``{target: {source: LPDO}}`` meaning ``target = sum L(source)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import linalg
from .errors import DependentOperatorsError, NotHyperbolicError, RepresentationError, TransformUndefinedError
from .expr import Scalar
from .lpdo import LPDO, CharOperator, commutator_decompose, compose, factor_binary_form, lpdo_to_ncpoly, characteristic_roots, symbol_unit


# -- linear differential maps -------------------------------------------------


def format_application(op, label):
    """``coef*Dx^i*Dy^j(label)`` terms of ``op`` applied to ``label``."""
    if op.is_zero:
        return "0"
    parts = []
    for (i, j) in sorted(op.coeffs, key=lambda k: (-(k[0] + k[1]), -k[0])):
        mono = LPDO(op.space, {(i, j): op.space.one})
        ms = str(mono)
        c = op.coeffs[(i, j)]
        term = f"{ms}({label})" if (i, j) != (0, 0) else label
        parts.append((c, term))
    return format_linear(parts)


def format_linear(pairs):
    """Print ``sum c * term`` with signs pulled out."""
    out = []
    for c, term in pairs:
        if c.is_zero:
            continue
        cs = str(c)
        neg = cs.startswith("-") and len(c.numer.terms()) == 1
        if neg:
            cs = cs[1:]
        if cs == "1":
            body = term
        else:
            if len(c.numer.terms()) > 1 or "/" in cs:
                cs = f"({cs})"
            body = f"{cs}*{term}"
        if not out:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out) or "0"


def format_map(mapping):
    lines = {}
    for target, srcs in mapping.items():
        pieces = [format_application(op, src) for src, op in srcs.items() if not op.is_zero]
        text = " + ".join(pieces) if pieces else "0"
        lines[target] = text.replace("+ -", "- ")
    return lines


def apply_map(mapping, solution):
    """Evaluate ``{target: {source: L}}`` on ``{source: SolutionExpr}``."""
    out = {}
    for target, srcs in mapping.items():
        acc = None
        for src, op in srcs.items():
            if src not in solution:
                raise KeyError(f"no value for unknown {src!r}")
            term = op.apply(solution[src])
            acc = term if acc is None else acc + term
        if acc is None:
            raise ValueError(f"empty expression for {target!r}")
        out[target] = acc
    return out


def compose_maps(outer, inner):
    """``outer`` expressed through the sources of ``inner``."""
    out = {}
    for target, srcs in outer.items():
        acc = {}
        for mid, op in srcs.items():
            for src, op2 in inner[mid].items():
                c = compose(op, op2)
                acc[src] = acc[src] + c if src in acc else c
        kept = {k: v for k, v in acc.items() if not v.is_zero}
        if not kept:
            src = next(iter(acc))
            kept = {src: acc[src]}
        out[target] = kept
    return out


@dataclass(frozen=True)
class SubstitutionRecord:
    """One change of unknowns.

    ``forward`` gives each new unknown in terms of the old ones and
    ``backward`` each old unknown in terms of the new ones.
    """

    kind: str
    old: tuple
    new: tuple
    forward: dict
    backward: dict
    note: str = ""

    def to_json(self):
        return {
            "kind": self.kind,
            "old": list(self.old),
            "new": list(self.new),
            "forward": format_map(self.forward),
            "backward": format_map(self.backward),
            **({"note": self.note} if self.note else {}),
        }


def identity_map(space, labels, rename=None):
    rename = rename or {}
    return {rename.get(l, l): {l: LPDO.one(space)} for l in labels}


# -- characteristic systems ---------------------------------------------------


class CharSystem:
    """``X_i(u_i) = sum_k alpha[i][k] * u_k`` with pairwise independent ``X_i``."""

    __slots__ = ("ops", "alpha", "labels", "history", "names")

    def __init__(self, ops, alpha, labels=None, history=(), names=None):
        ops = tuple(ops)
        n = len(ops)
        if n < 2:
            raise ValueError("a characteristic system needs n >= 2")
        space = ops[0].space
        if len(alpha) != n or any(len(row) != n for row in alpha):
            raise ValueError("alpha must be n x n")
        alpha = tuple(tuple(c if isinstance(c, Scalar) else space(c) for c in row) for row in alpha)
        labels = tuple(labels) if labels is not None else tuple(f"u{i + 1}" for i in range(n))
        if len(labels) != n or len(set(labels)) != n:
            raise ValueError("labels must be n distinct names")
        for a, b in itertools.combinations(range(n), 2):
            if not ops[a].independent_of(ops[b]):
                raise DependentOperatorsError(f"operators {ops[a]} and {ops[b]} are dependent")
        self.ops = ops
        self.alpha = alpha
        self.labels = labels
        self.history = tuple(history)
        # display names of the operators; they travel with the operators, not the slots
        self.names = tuple(names) if names is not None else tuple(f"X{i + 1}" for i in range(n))
        if len(self.names) != n:
            raise ValueError("names must match the number of operators")

    @property
    def n(self):
        return len(self.ops)

    @property
    def space(self):
        return self.ops[0].space

    def with_history(self, *records):
        return CharSystem(self.ops, self.alpha, self.labels, self.history + records, self.names)

    def __eq__(self, other):
        return (
            isinstance(other, CharSystem)
            and self.ops == other.ops
            and self.alpha == other.alpha
            and self.labels == other.labels
        )

    def __hash__(self):
        return hash((self.ops, self.alpha, self.labels))

    def equations(self):
        """Each equation as ``{label: LPDO}`` with zero right side."""
        sp = self.space
        eqs = []
        for i in range(self.n):
            row = {l: LPDO.scalar(-self.alpha[i][k], sp) for k, l in enumerate(self.labels)}
            row[self.labels[i]] = row[self.labels[i]] + self.ops[i].to_lpdo()
            eqs.append(row)
        return eqs

    def residuals(self, solution):
        """``X_i u_i - sum alpha_ik u_k`` for ``solution = {label: SolutionExpr}``."""
        out = []
        for i in range(self.n):
            r = self.ops[i](solution[self.labels[i]])
            for k, l in enumerate(self.labels):
                if not self.alpha[i][k].is_zero:
                    r = r - solution[l] * self.alpha[i][k]
            out.append(r)
        return out

    def commutator(self, i=0, j=1):
        return commutator_decompose(self.ops[i], self.ops[j])

    # -- transformations ---------------------------------------------------
    def permuted(self, perm):
        """Reorder slots: new slot ``t`` is old slot ``perm[t]``."""
        ops = [self.ops[p] for p in perm]
        alpha = [[self.alpha[p][q] for q in perm] for p in perm]
        labels = [self.labels[p] for p in perm]
        names = [self.names[p] for p in perm]
        return CharSystem(ops, alpha, labels, self.history, names)

    def gauge(self, g, labels=None):
        """New unknowns ``g_i * u_i``; returns ``(system, record)``."""
        sp = self.space
        n = self.n
        new_labels = tuple(labels) if labels else self.labels
        alpha = [
            [
                g[i] * self.alpha[i][k] / g[k] + (self.ops[i](g[i]) / g[i] if i == k else sp.zero)
                for k in range(n)
            ]
            for i in range(n)
        ]
        rec = SubstitutionRecord(
            "gauge",
            self.labels,
            new_labels,
            {new_labels[i]: {self.labels[i]: LPDO.scalar(g[i], sp)} for i in range(n)},
            {self.labels[i]: {new_labels[i]: LPDO.scalar(1 / g[i], sp)} for i in range(n)},
        )
        return CharSystem(self.ops, alpha, new_labels, self.history + (rec,), self.names), rec

    def rescale(self, gamma):
        """Operators ``gamma_i * X_i`` (rows scaled accordingly); unknowns unchanged."""
        ops = [X.scaled(c) for X, c in zip(self.ops, gamma)]
        alpha = [[c * a for a in row] for row, c in zip(self.alpha, gamma)]
        return CharSystem(ops, alpha, self.labels, self.history, self.names)

    def normalized_operators(self):
        """Rescale constant operators to coprime integers with positive lead."""
        gamma = []
        for X in self.ops:
            N = X.normalized()
            gamma.append(N.m / X.m if not X.m.is_zero else N.n / X.n)
        return self.rescale(gamma)

    # -- printing ------------------------------------------------------------
    def op_names(self):
        return list(self.names)

    def equation_strings(self):
        names = self.op_names()
        out = []
        for i in range(self.n):
            rhs = format_linear(list(zip(self.alpha[i], self.labels)))
            out.append(f"{names[i]}({self.labels[i]}) = {rhs}")
        return out

    def to_dsl(self):
        sp = self.space
        lines = [f"vars {sp.first}, {sp.second};"]
        if sp.params:
            lines.append(f"params {', '.join(sp.params)};")
        ops = ", ".join(f"{nm} = {X}" for nm, X in zip(self.op_names(), self.ops))
        lines.append(f"ops {ops};")
        lines.append("system {")
        lines.extend(f"  {e};" for e in self.equation_strings())
        lines.append("}")
        return "\n".join(lines) + "\n"

    def __str__(self):
        ops = ", ".join(f"{nm} = {X}" for nm, X in zip(self.op_names(), self.ops))
        return f"[{ops}] " + "; ".join(self.equation_strings())

    def __repr__(self):
        return f"CharSystem({str(self)!r})"

    def to_json(self):
        return {
            "labels": list(self.labels),
            "operators": [str(X) for X in self.ops],
            "alpha": [[str(c) for c in row] for row in self.alpha],
            "equations": self.equation_strings(),
        }


# -- scalar second-order equations ---------------------------------------------


@dataclass(frozen=True)
class OperatorForm:
    """``A = unit * (X1 X2 + a1 X1 + a2 X2 + a3)`` with ``[X1, X2] = P X1 + Q X2``."""

    X1: CharOperator
    X2: CharOperator
    unit: Scalar
    a1: Scalar
    a2: Scalar
    a3: Scalar
    P: Scalar
    Q: Scalar

    @property
    def h(self):
        return self.X1(self.a1) + self.a1 * self.a2 - self.a3

    @property
    def k(self):
        b1, b2 = self.a1 + self.P, self.a2 + self.Q
        return self.X2(b2) + b1 * b2 - self.a3


def operator_form(A, X1, X2):
    """Write an order-2 operator over the basis ``(X1, X2)``."""
    nc = lpdo_to_ncpoly(A, [X1, X2])
    unit = nc.coeff((0, 1))
    cd = commutator_decompose(X1, X2)
    return OperatorForm(
        X1, X2, unit, nc.coeff((0,)) / unit, nc.coeff((1,)) / unit, nc.coeff(()) / unit, cd.P, cd.Q
    )


def operator_invariants(A, X1, X2):
    """Laplace invariants ``(h, k)`` of ``A`` written as ``X1 X2 + ...``."""
    f = operator_form(A, X1, X2)
    return f.h, f.k


def second_order_to_charsys(A, system="S1", label="u"):
    """Order-2 operator to a 2x2 characteristic system.

    With ``A ~ X1 X2 + a1 X1 + a2 X2 + a3`` (roots sorted by printed form),
    ``S1`` uses ``u1 = u``, ``u2 = X2(u) + a1*u``, giving
    ``X2(u1) = -a1 u1 + u2``, ``X1(u2) = h u1 - a2 u2``. ``S2`` uses the
    opposite ordering with ``k``. Returns ``(system, record, h, k)`` where
    ``h, k`` are the invariants of the operator.
    """
    if A.order != 2:
        raise NotHyperbolicError(f"expected an order-2 operator, got order {A.order}")
    X1, X2 = characteristic_roots(A)
    f = operator_form(A, X1, X2)
    h, k = f.h, f.k
    sp = A.space
    one = LPDO.one(sp)
    if system == "S1":
        ops = [X2, X1]
        alpha = [[-f.a1, sp.one], [h, -f.a2]]
        second = X2.to_lpdo() + f.a1
    elif system == "S2":
        b1, b2 = f.a1 + f.P, f.a2 + f.Q
        ops = [X1, X2]
        alpha = [[-b2, sp.one], [k, -b1]]
        second = X1.to_lpdo() + b2
    else:
        raise ValueError("system must be 'S1' or 'S2'")
    labels = ("u1", "u2")
    rec = SubstitutionRecord(
        "introduce",
        (label,),
        labels,
        {"u1": {label: one}, "u2": {label: second}},
        {label: {"u1": one}},
        note=f"operator = ({f.unit}) * normal form",
    )
    S = CharSystem(ops, alpha, labels, (rec,))
    return S, rec, h, k


def charsys2_to_second_order(S, keep=0):
    """Eliminate the other unknown of a 2x2 system; returns ``(LPDO, record)``.

    The operator is normalized so that its symbol equals ``sigma(X1) sigma(X2)``.
    """
    if S.n != 2:
        raise ValueError("elimination is provided for 2x2 systems only")
    i, o = (0, 1) if keep == 0 else (1, 0)
    a = S.alpha
    if a[i][o].is_zero:
        raise TransformUndefinedError(
            f"coefficient alpha[{i + 1}][{o + 1}] vanishes: the system is triangular, no elimination needed"
        )
    sp = S.space
    Xi, Xo = S.ops[i].to_lpdo(), S.ops[o].to_lpdo()
    # u_o = (X_i u_i - a_ii u_i) / a_io
    expr_o = LPDO.scalar(1 / a[i][o], sp) * (Xi - a[i][i])
    L = compose(Xo, expr_o) - a[o][i] - compose(LPDO.scalar(a[o][o], sp), expr_o)
    L = LPDO.scalar(a[i][o], sp) * L
    rec = SubstitutionRecord(
        "eliminate",
        S.labels,
        (S.labels[i],),
        {S.labels[i]: {S.labels[i]: LPDO.one(sp)}},
        {S.labels[i]: {S.labels[i]: LPDO.one(sp)}, S.labels[o]: {S.labels[i]: expr_o}},
    )
    return L, rec


# -- first-order systems -------------------------------------------------------


def eigen_split(a):
    """Distinct eigenvalues of ``a`` in the field, sorted by printed form."""
    n = len(a)
    space = a[0][0].space
    cp = linalg.charpoly(a)
    # sum cp[k] lam^k as a binary form in (lam, 1)
    coeffs = [cp[n - t] for t in range(n + 1)]
    _, pairs = factor_binary_form(coeffs, space)
    if len(pairs) != n:
        raise NotHyperbolicError("degenerate characteristic polynomial")
    lams = [-q / p for p, q in pairs]
    lams.sort(key=str)
    return lams


def left_eigenvector(a, lam):
    n = len(a)
    sp = a[0][0].space
    m = [[a[k][j] - (lam if k == j else sp.zero) for k in range(n)] for j in range(n)]  # transpose
    basis = linalg.nullspace(m)
    if len(basis) != 1:
        raise NotHyperbolicError(f"eigenvalue {lam} is not simple")
    v = basis[0]
    lead = next(c for c in v if not c.is_zero)
    return [c / lead for c in v]


def first_order_to_charsys(a, b, unknowns=None):
    """``v_1 = a v_2 + b v`` to characteristic form; returns ``(system, record)``.

    ``X_i = D1 - lam_i D2`` (constant ones rescaled to coprime integers),
    ``u_i = sum_k p_ik v_k`` with left eigenvectors normalized so their first
    nonzero entry is 1, and ``alpha = (P b + X(P)) P^-1``.
    """
    n = len(a)
    sp = a[0][0].space
    unknowns = tuple(unknowns) if unknowns else tuple(f"v{i + 1}" for i in range(n))
    lams = eigen_split(a)
    Pm = [left_eigenvector(a, lam) for lam in lams]
    try:
        Pinv = linalg.inverse(Pm)
    except ValueError:
        raise NotHyperbolicError("eigenvector matrix is singular") from None
    ops = [CharOperator(sp.one, -lam) for lam in lams]
    XP = [[ops[i](Pm[i][k]) for k in range(n)] for i in range(n)]
    Pb = linalg.matmul(Pm, b)
    alpha = linalg.matmul([[Pb[i][k] + XP[i][k] for k in range(n)] for i in range(n)], Pinv)
    labels = tuple(f"u{i + 1}" for i in range(n))
    rec = SubstitutionRecord(
        "introduce",
        unknowns,
        labels,
        {labels[i]: {unknowns[k]: LPDO.scalar(Pm[i][k], sp) for k in range(n) if not Pm[i][k].is_zero} for i in range(n)},
        {unknowns[k]: {labels[i]: LPDO.scalar(Pinv[k][i], sp) for i in range(n) if not Pinv[k][i].is_zero} for k in range(n)},
    )
    S = CharSystem(ops, alpha, labels, (rec,)).normalized_operators()
    return S, rec


# -- order-n scalar equations -------------------------------------------------


def _chain_operators(ops, coef):
    """Operators ``u_j`` (as LPDOs acting on ``u``) and ``M`` for the step-down chain.

    ``coef[(j, s)]`` (0-based, s >= j) gives ``alpha_js`` of the construction.
    """
    n = len(ops)
    sp = ops[0].space
    zero = sp.zero
    u = [None] * n
    u[n - 1] = LPDO.one(sp)
    for j in range(n - 1, 0, -1):
        acc = compose(ops[j].to_lpdo(), u[j])
        for s in range(j, n):
            c = coef.get((j, s), zero)
            if not c.is_zero:
                acc = acc + LPDO.scalar(c, sp) * u[s]
        u[j - 1] = acc
    M = compose(ops[0].to_lpdo(), u[0])
    for s in range(n):
        c = coef.get((0, s), zero)
        if not c.is_zero:
            M = M + LPDO.scalar(c, sp) * u[s]
    return u, M


def nth_order_to_charsys(A, label="u"):
    """Order-n operator to an n x n characteristic system (step-down chain).

    ``u_n = u``, ``u_{j-1} = X_j u_j + sum_{s>=j} c_js u_s`` and
    ``X_1 u_1 + sum_s c_1s u_s = A / unit``. The coefficients are found level
    by level from leading forms; the result is checked exactly.
    """
    n = A.order
    if n < 2:
        raise NotHyperbolicError("order must be at least 2")
    sp = A.space
    ops = characteristic_roots(A)
    unit = symbol_unit(A, ops)
    target = LPDO.scalar(1 / unit, sp) * A
    coef = {}
    for d in range(n):
        _, M = _chain_operators(ops, coef)
        R = target - M
        order = n - 1 - d
        if any(not R.homogeneous_part(s).is_zero for s in range(order + 1, n + 1)):
            raise RepresentationError(f"higher-order residual at level {d}", residual=R)
        slots = [(j, j + d) for j in range(n - d)]
        syms = []
        for j, s in slots:
            prod = LPDO.one(sp)
            for t in list(range(j)) + list(range(s + 1, n)):
                prod = compose(prod, ops[t].to_lpdo())
            syms.append([prod.coeff(order - r, r) for r in range(order + 1)])
        rhs = [R.coeff(order - r, r) for r in range(order + 1)]
        mat = [[syms[c][r] for c in range(len(slots))] for r in range(order + 1)]
        try:
            sol = linalg.solve(mat, rhs)
        except ValueError:
            raise RepresentationError(f"level {d} coefficients are not determined", residual=R) from None
        coef.update(dict(zip(slots, sol)))
    u_ops, M = _chain_operators(ops, coef)
    R = target - M
    if not R.is_zero:
        raise RepresentationError("step-down construction left a residual", residual=R)
    labels = tuple(f"u{i + 1}" for i in range(n))
    alpha = [[sp.zero] * n for _ in range(n)]
    for (j, s), c in coef.items():
        alpha[j][s] = -c
    for j in range(1, n):
        alpha[j][j - 1] = alpha[j][j - 1] + 1
    rec = SubstitutionRecord(
        "introduce",
        (label,),
        labels,
        {labels[j]: {label: u_ops[j]} for j in range(n)},
        {label: {labels[n - 1]: LPDO.one(sp)}},
        note=f"operator = ({unit}) * chain form",
    )
    return CharSystem(ops, alpha, labels, (rec,)), rec


def chain_system_to_operator(S):
    """Eliminate ``u_1 .. u_{n-1}`` from a step-down shaped system.

    Requires ``alpha[j][j-1] != 0`` and ``alpha[j][s] = 0`` for ``s < j-1``.
    Returns the operator acting on ``u_n`` (first equation).
    """
    n = S.n
    sp = S.space
    a = S.alpha
    for j in range(1, n):
        if a[j][j - 1].is_zero or any(not a[j][s].is_zero for s in range(j - 1)):
            raise RepresentationError("system is not in step-down shape")
    u = [None] * n
    u[n - 1] = LPDO.one(sp)
    for j in range(n - 1, 0, -1):
        acc = compose(S.ops[j].to_lpdo(), u[j])
        for s in range(j, n):
            acc = acc - LPDO.scalar(a[j][s], sp) * u[s]
        u[j - 1] = LPDO.scalar(1 / a[j][j - 1], sp) * acc
    L = compose(S.ops[0].to_lpdo(), u[0])
    for s in range(n):
        L = L - LPDO.scalar(a[0][s], sp) * u[s]
    return L
